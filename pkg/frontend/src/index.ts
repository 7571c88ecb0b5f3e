/**
 * TypeScript client for the genbench text-generation engine.
 *
 * Metric scores are computed by the native engine and returned
 * bit-identical to in-process calls; decoding runs the native search
 * strategies against a host-supplied distribution callback.
 *
 * Versioned in lockstep with the engine package.
 */

export { decode } from "./decode.js";
export type { CallbackModel, DecodeOptions } from "./decode.js";
export { DecodeError, EngineError, GenbenchError } from "./errors.js";
export {
    corpus_bleu,
    distinct_n,
    evaluate,
    rouge_l,
    rouge_n,
    self_bleu,
} from "./metrics.js";
export type { EvaluateConfig, MetricOptions } from "./metrics.js";
export { tokenize } from "./tokenize.js";

export const ENGINE_VERSION = "0.1.0";
