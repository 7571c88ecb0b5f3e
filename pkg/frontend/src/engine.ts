/**
 * Locating and invoking the native engine.
 *
 * The engine is the `genbench` command line tool; point GENBENCH_BIN at a
 * different executable (or e.g. "python3 -m genbench.cli") to override.
 */

import { execFile } from "node:child_process";
import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { EngineError } from "./errors.js";

export function engineCommand(): string[] {
    const override = process.env.GENBENCH_BIN;
    if (override && override.trim().length > 0) {
        return override.trim().split(/\s+/);
    }
    return ["genbench"];
}

/** Run an engine subcommand to completion, returning stdout. */
export function runEngine(args: string[]): Promise<string> {
    const [command, ...prefix] = engineCommand();
    return new Promise((resolve, reject) => {
        execFile(
            command,
            [...prefix, ...args],
            { maxBuffer: 64 * 1024 * 1024 },
            (error, stdout, stderr) => {
                if (error) {
                    const code = typeof error.code === "number" ? error.code : null;
                    reject(new EngineError(`engine ${args[0]} failed`, code, stderr));
                    return;
                }
                resolve(stdout);
            },
        );
    });
}

/**
 * Validate token rows at the boundary. Tokens must be non-empty
 * whitespace-free strings; anything else reports the offending index.
 */
export function checkTokenRows(rows: string[][], label: string): void {
    if (!Array.isArray(rows)) {
        throw new TypeError(`${label} must be an array of token arrays`);
    }
    rows.forEach((row, i) => {
        if (!Array.isArray(row)) {
            throw new TypeError(`${label}[${i}] must be an array of tokens`);
        }
        row.forEach((token, j) => {
            if (typeof token !== "string") {
                throw new TypeError(`${label}[${i}][${j}] is not a string`);
            }
            if (token.length === 0 || /\s/.test(token)) {
                throw new TypeError(
                    `${label}[${i}][${j}] must be a non-empty token without whitespace`,
                );
            }
        });
    });
}

/** One sequence per line, tokens joined by single spaces. */
export function toLineFormat(rows: string[][]): string {
    return rows.map((row) => row.join(" ")).join("\n") + "\n";
}

/** Scratch directory for request files, removed after use. */
export async function withScratchDir<T>(
    run: (dir: string) => Promise<T>,
): Promise<T> {
    const dir = await mkdtemp(join(tmpdir(), "genbench-"));
    try {
        return await run(dir);
    } finally {
        await rm(dir, { recursive: true, force: true });
    }
}

export async function writeTokenFile(
    dir: string,
    name: string,
    rows: string[][],
): Promise<string> {
    const path = join(dir, name);
    await writeFile(path, toLineFormat(rows), "utf-8");
    return path;
}
