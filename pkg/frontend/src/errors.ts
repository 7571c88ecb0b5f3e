/** Error types surfaced by the bindings. */

export class GenbenchError extends Error {}

/** The engine process failed: nonzero exit, bad output, or unreachable. */
export class EngineError extends GenbenchError {
    readonly exitCode: number | null;
    readonly stderr: string;

    constructor(message: string, exitCode: number | null = null, stderr = "") {
        super(stderr ? `${message}\n${stderr.trim()}` : message);
        this.exitCode = exitCode;
        this.stderr = stderr;
    }
}

/** Decoding failed, usually because the host callback misbehaved. */
export class DecodeError extends GenbenchError {
    readonly step: number;

    constructor(message: string, step: number) {
        super(message);
        this.step = step;
    }
}
