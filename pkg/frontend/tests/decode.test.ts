import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { decode, DecodeError } from "../src/index.js";
import type { DecodeOptions } from "../src/index.js";

interface DecodeCase {
    label: string;
    config: Record<string, unknown>;
    expected: string[][];
}

interface DecodeFixture {
    vocab: string[];
    max_len: number;
    table: Record<string, number[]>;
    cases: DecodeCase[];
}

const fixturePath = join(__dirname, "fixtures", "native_decode.json");
const fixture = JSON.parse(readFileSync(fixturePath, "utf-8")) as DecodeFixture;

/** Replays the recorded native model's distributions. */
function tableCallback(prefix: number[]): number[] {
    const probs = fixture.table[prefix.join(" ")];
    if (!probs) {
        throw new Error(`fixture table has no entry for prefix [${prefix.join(", ")}]`);
    }
    return probs;
}

function optionsFor(decodeCase: DecodeCase): DecodeOptions {
    return { vocab: fixture.vocab, ...decodeCase.config } as DecodeOptions;
}

describe("decode over the bridge", () => {
    for (const decodeCase of fixture.cases) {
        it(`reproduces the native output: ${decodeCase.label}`, async () => {
            const result = await decode(tableCallback, optionsFor(decodeCase));
            expect(result).toEqual(decodeCase.expected);
        });
    }

    it("is deterministic for a fixed seed", async () => {
        const topk = fixture.cases.find((c) => c.config.strategy === "topk");
        expect(topk).toBeDefined();
        const first = await decode(tableCallback, optionsFor(topk!));
        const second = await decode(tableCallback, optionsFor(topk!));
        expect(second).toEqual(first);
    });

    it("supports async callbacks", async () => {
        const greedy = fixture.cases.find((c) => c.config.strategy === "greedy");
        const asyncCallback = async (prefix: number[]) => tableCallback(prefix);
        const result = await decode(asyncCallback, optionsFor(greedy!));
        expect(result).toEqual(greedy!.expected);
    });
});

describe("bridge failure handling", () => {
    const options: DecodeOptions = {
        vocab: fixture.vocab,
        strategy: "greedy",
        max_len: 6,
    };

    it("propagates callback exceptions with the step index", async () => {
        // Beam width 2 issues calls 1 and 2 while expanding the second
        // layer, so the third call (index 2) is always reached.
        let calls = 0;
        const flaky = (prefix: number[]) => {
            if (calls++ === 2) {
                throw new Error("host model exploded");
            }
            return tableCallback(prefix);
        };
        try {
            await decode(flaky, { ...options, strategy: "beam", beam_size: 2, max_len: 4 });
            expect.unreachable("callback failure should reject");
        } catch (error) {
            expect(error).toBeInstanceOf(DecodeError);
            expect((error as DecodeError).step).toBe(2);
            expect((error as DecodeError).message).toMatch(/host model exploded/);
        }
    });

    it("rejects distributions that do not sum to 1", async () => {
        const broken = () => fixture.vocab.map(() => 0.5);
        try {
            await decode(broken, options);
            expect.unreachable("invalid distribution should be rejected");
        } catch (error) {
            expect(error).toBeInstanceOf(DecodeError);
            expect((error as DecodeError).message).toMatch(/sums to/);
            expect((error as DecodeError).step).toBe(0);
        }
    });

    it("rejects vectors of the wrong length", async () => {
        const short = () => [1.0];
        await expect(decode(short, options)).rejects.toThrow(/length 6/);
    });

    it("requires a usable vocabulary", async () => {
        await expect(
            decode(tableCallback, { vocab: ["just-one"] } as DecodeOptions),
        ).rejects.toThrow(TypeError);
    });
});
