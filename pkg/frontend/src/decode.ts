/**
 * Decoding with a host-side model over the engine's decode bridge.
 *
 * The engine owns the search (greedy, top-k, beam); this side only answers
 * per-step distribution requests. The callback receives the prefix as
 * token ids into `vocab` (ids 0-3 are pad/unk/sos/eos) and must return a
 * probability vector of length `vocab.length`; the engine validates every
 * reply (non-negative, sums to 1 within 1e-6).
 */

import { spawn } from "node:child_process";
import { createInterface } from "node:readline";

import { engineCommand } from "./engine.js";
import { DecodeError, EngineError } from "./errors.js";

export type CallbackModel = (prefix: number[]) => number[] | Promise<number[]>;

export interface DecodeOptions {
    vocab: string[];
    strategy?: "greedy" | "topk" | "beam";
    beam_size?: number;
    k?: number;
    max_len?: number;
    seed?: number;
    length_penalty?: number;
    count?: number;
}

interface BridgeMessage {
    need?: number[];
    step?: number;
    done?: string[][];
    error?: string;
}

export async function decode(
    callback: CallbackModel,
    options: DecodeOptions,
): Promise<string[][]> {
    const { vocab } = options;
    if (!Array.isArray(vocab) || vocab.length < 4) {
        throw new TypeError("options.vocab must list all tokens, specials first");
    }
    vocab.forEach((token, i) => {
        if (typeof token !== "string") {
            throw new TypeError(`options.vocab[${i}] is not a string`);
        }
    });

    const [command, ...prefix] = engineCommand();
    const child = spawn(command, [...prefix, "decode-bridge"], {
        stdio: ["pipe", "pipe", "pipe"],
    });
    const lines = createInterface({ input: child.stdout });
    let stderr = "";
    child.stderr.on("data", (chunk: Buffer) => {
        stderr += chunk.toString();
    });

    const finish = () => {
        lines.close();
        child.kill();
    };

    try {
        child.stdin.write(JSON.stringify(options) + "\n");
        for await (const line of lines) {
            if (line.trim().length === 0) {
                continue;
            }
            const message = JSON.parse(line) as BridgeMessage;
            if (message.need !== undefined) {
                const step = message.step ?? -1;
                let probs: number[];
                try {
                    probs = await callback(message.need);
                } catch (cause) {
                    child.stdin.write(JSON.stringify({ error: String(cause) }) + "\n");
                    throw new DecodeError(
                        `host callback failed at step ${step}: ${String(cause)}`,
                        step,
                    );
                }
                child.stdin.write(JSON.stringify({ probs }) + "\n");
            } else if (message.done !== undefined) {
                return message.done;
            } else if (message.error !== undefined) {
                throw new DecodeError(message.error, message.step ?? -1);
            }
        }
        throw new EngineError("decode bridge closed without a result", null, stderr);
    } finally {
        finish();
    }
}
