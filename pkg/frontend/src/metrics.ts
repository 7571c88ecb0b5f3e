/**
 * Metric calls, delegated to the engine's `eval` command.
 *
 * Hypotheses and references cross the boundary as token lists, written to
 * scratch files in the engine's line format; scores come back through the
 * engine's JSON report, so every value is bit-identical to a native call.
 * Calls run in a child process, leaving the host event loop free.
 */

import { readFile } from "node:fs/promises";
import { join } from "node:path";

import {
    checkTokenRows,
    runEngine,
    withScratchDir,
    writeTokenFile,
} from "./engine.js";
import { EngineError } from "./errors.js";

/** Mirrors the engine's metric configuration keys. */
export interface EvaluateConfig {
    metrics: string | string[];
    bleu_max_n?: number;
    rouge_max_n?: number;
    distinct_max_n?: number;
    smoothing?: "none" | "epsilon";
    epsilon?: number;
    self_bleu_sample?: number;
    self_bleu_seed?: number;
    threads?: number;
    ref_mode?: "pool" | "aligned";
}

export interface MetricOptions {
    threads?: number;
    smoothing?: "none" | "epsilon";
    epsilon?: number;
    self_bleu_sample?: number;
    self_bleu_seed?: number;
}

function cliFlags(cfg: EvaluateConfig): string[] {
    const flags: string[] = [];
    const names = Array.isArray(cfg.metrics) ? cfg.metrics.join(",") : cfg.metrics;
    flags.push("--metrics", names);
    const scalar: Array<[string, number | string | undefined]> = [
        ["--bleu_max_n", cfg.bleu_max_n],
        ["--rouge_max_n", cfg.rouge_max_n],
        ["--distinct_max_n", cfg.distinct_max_n],
        ["--smoothing", cfg.smoothing],
        ["--epsilon", cfg.epsilon],
        ["--self_bleu_sample", cfg.self_bleu_sample],
        ["--self_bleu_seed", cfg.self_bleu_seed],
        ["--threads", cfg.threads],
        ["--ref_mode", cfg.ref_mode],
    ];
    for (const [flag, value] of scalar) {
        if (value !== undefined) {
            flags.push(flag, String(value));
        }
    }
    return flags;
}

/**
 * Run the requested metrics and return the engine's score mapping
 * (keys like "bleu-4", "rouge-l", "distinct-2").
 */
export async function evaluate(
    cfg: EvaluateConfig,
    hyps: string[][],
    refs?: string[][],
): Promise<Record<string, number>> {
    checkTokenRows(hyps, "hyps");
    if (refs !== undefined) {
        checkTokenRows(refs, "refs");
    }
    return withScratchDir(async (dir) => {
        const hypPath = await writeTokenFile(dir, "hyp.txt", hyps);
        const jsonPath = join(dir, "results.json");
        const args = ["eval", "--hyp", hypPath, "--json", jsonPath];
        if (refs !== undefined) {
            args.push("--ref", await writeTokenFile(dir, "ref.txt", refs));
        }
        args.push(...cliFlags(cfg));
        await runEngine(args);
        const payload = JSON.parse(await readFile(jsonPath, "utf-8")) as Record<
            string,
            unknown
        >;
        const scores: Record<string, number> = {};
        for (const [key, value] of Object.entries(payload)) {
            if (typeof value === "number") {
                scores[key] = value;
            }
        }
        return scores;
    });
}

async function singleScore(
    key: string,
    cfg: EvaluateConfig,
    hyps: string[][],
    refs?: string[][],
): Promise<number> {
    const scores = await evaluate(cfg, hyps, refs);
    const value = scores[key];
    if (value === undefined) {
        throw new EngineError(`engine report is missing ${key}`);
    }
    return value;
}

/** Mean multi-reference sentence BLEU of order n over the hypothesis set. */
export function corpus_bleu(
    hyps: string[][],
    refs: string[][],
    n = 4,
    opts: MetricOptions = {},
): Promise<number> {
    return singleScore(`bleu-${n}`, { metrics: "bleu", bleu_max_n: n, ...opts }, hyps, refs);
}

/** Mean BLEU-n of each hypothesis against all the others. */
export function self_bleu(
    hyps: string[][],
    n = 4,
    opts: MetricOptions = {},
): Promise<number> {
    return singleScore(
        `self-bleu-${n}`,
        { metrics: "self_bleu", bleu_max_n: n, ...opts },
        hyps,
    );
}

/** Mean best-reference ROUGE-n F1 over the hypothesis set. */
export function rouge_n(
    hyps: string[][],
    refs: string[][],
    n: number,
    opts: MetricOptions = {},
): Promise<number> {
    return singleScore(
        `rouge-${n}`,
        { metrics: "rouge", rouge_max_n: n, ...opts },
        hyps,
        refs,
    );
}

/** Mean best-reference ROUGE-L F1 over the hypothesis set. */
export function rouge_l(
    hyps: string[][],
    refs: string[][],
    opts: MetricOptions = {},
): Promise<number> {
    return singleScore(
        "rouge-l",
        { metrics: "rouge", rouge_max_n: 1, ...opts },
        hyps,
        refs,
    );
}

/** Distinct n-grams over total n-grams, pooled across hypotheses. */
export function distinct_n(hyps: string[][], n: number): Promise<number> {
    return singleScore(`distinct-${n}`, { metrics: "distinct", distinct_max_n: n }, hyps);
}
