/**
 * Host-side tokenization, mirroring the engine's convention: optional
 * lowercasing, then splitting on runs of Unicode whitespace.
 */

export function tokenize(text: string, lowercase = true): string[] {
    const prepared = lowercase ? text.toLowerCase() : text;
    const tokens = prepared.split(/\s+/u);
    return tokens.filter((token) => token.length > 0);
}
