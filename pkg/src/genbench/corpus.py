"""Corpus loading, tokenization, vocabulary, splitting, and batching.

Datasets are plain text, one example per line (LF or CRLF). Conditional
tasks use two line-aligned files, ``<name>.src`` and ``<name>.tgt``.
All structures built here are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .errors import AlignmentError, ConfigurationError, DataError

# Reserved token ids. Fixed so checkpoints and tests are portable.
PAD_ID, UNK_ID, SOS_ID, EOS_ID = 0, 1, 2, 3
SPECIAL_TOKENS = ("<pad>", "<unk>", "<sos>", "<eos>")

TokenSequence = list[str]


def tokenize(text: str, lowercase: bool = True) -> TokenSequence:
    """Split a raw line into tokens on runs of Unicode whitespace.

    Lowercasing (when enabled) happens before splitting. Empty input
    yields an empty sequence; output tokens are never empty.
    """
    if lowercase:
        text = text.lower()
    return text.split()


class Vocabulary:
    """Bidirectional token/id map with the four reserved specials at ids 0-3.

    Non-special ids are dense (4..size-1). ``id_of`` and ``token_of`` are
    mutual inverses over all entries.
    """

    __slots__ = ("id_of", "token_of")

    def __init__(self, tokens: list[str]):
        """Build from the complete token list, specials included at 0-3."""
        if len(tokens) < 4:
            raise ConfigurationError(
                f"vocabulary needs at least the 4 special tokens, got {len(tokens)}"
            )
        self.token_of: tuple[str, ...] = tuple(tokens)
        self.id_of: dict[str, int] = {tok: i for i, tok in enumerate(tokens)}
        if len(self.id_of) != len(self.token_of):
            raise ConfigurationError("vocabulary contains duplicate tokens")

    def __len__(self) -> int:
        return len(self.token_of)

    def __contains__(self, token: str) -> bool:
        return token in self.id_of

    def lookup(self, token: str) -> int:
        """Return the id for a token, UNK for out-of-vocabulary tokens."""
        return self.id_of.get(token, UNK_ID)

    def token(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.token_of):
            raise IndexError(
                f"token id {token_id} out of range for vocabulary of size {len(self.token_of)}"
            )
        return self.token_of[token_id]

    def encode(self, seq: TokenSequence, add_bos_eos: bool = False) -> list[int]:
        """Map tokens to ids (OOV to UNK), optionally framing with SOS/EOS."""
        ids = [self.id_of.get(tok, UNK_ID) for tok in seq]
        if add_bos_eos:
            return [SOS_ID] + ids + [EOS_ID]
        return ids

    def decode(self, ids: list[int]) -> TokenSequence:
        """Inverse of encode for in-vocabulary tokens; specials are dropped."""
        size = len(self.token_of)
        out = []
        for i in ids:
            if not 0 <= i < size:
                raise IndexError(
                    f"token id {i} out of range for vocabulary of size {size}"
                )
            if i >= 4:
                out.append(self.token_of[i])
        return out


def build_vocabulary(
    sequences: list[TokenSequence],
    max_size: int | None = None,
    min_freq: int = 1,
) -> Vocabulary:
    """Build a vocabulary from token sequences.

    Keeps tokens with frequency >= ``min_freq``, truncated to ``max_size``
    total entries (specials included) by descending frequency; frequency
    ties break toward the earliest first occurrence in the corpus, so the
    result is deterministic.
    """
    if max_size is not None and max_size < 4:
        raise ConfigurationError(f"max_size must be at least 4, got {max_size}")
    if min_freq < 1:
        raise ConfigurationError(f"min_freq must be at least 1, got {min_freq}")
    if not sequences:
        raise ConfigurationError("cannot build a vocabulary from an empty corpus")

    freq: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    position = 0
    for seq in sequences:
        for tok in seq:
            if tok not in freq:
                freq[tok] = 1
                first_seen[tok] = position
            else:
                freq[tok] += 1
            position += 1

    candidates = [tok for tok, c in freq.items() if c >= min_freq]
    candidates.sort(key=lambda tok: (-freq[tok], first_seen[tok]))
    if max_size is not None:
        candidates = candidates[: max_size - 4]

    tokens = list(SPECIAL_TOKENS)
    seen = set(tokens)
    for tok in candidates:
        if tok not in seen:  # corpus token colliding with a special surface
            tokens.append(tok)
            seen.add(tok)
    return Vocabulary(tokens)


@dataclass(frozen=True)
class PairedExample:
    """Line-aligned source/target pair for conditional generation."""

    source: TokenSequence
    target: TokenSequence


@dataclass(frozen=True)
class SplitRatio:
    train: float
    valid: float
    test: float

    def __post_init__(self):
        for name, frac in (("train", self.train), ("valid", self.valid), ("test", self.test)):
            if not 0.0 <= frac <= 1.0:
                raise ConfigurationError(f"split fraction {name}={frac} outside [0, 1]")
        total = self.train + self.valid + self.test
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"split fractions must sum to 1, got {total}")


def _read_lines(path: str | Path) -> list[str]:
    """Read UTF-8 lines, accepting LF or CRLF, keeping interior empty lines."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read dataset file {p}: {exc}") from exc
    chunks = raw.split(b"\n")
    if chunks and chunks[-1] == b"":
        chunks.pop()  # trailing newline, not an empty final line
    lines = []
    for lineno, chunk in enumerate(chunks, start=1):
        if chunk.endswith(b"\r"):
            chunk = chunk[:-1]
        try:
            lines.append(chunk.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise DataError(f"{p}: invalid UTF-8 on line {lineno}: {exc}") from exc
    return lines


def load_single(path: str | Path, lowercase: bool = True) -> list[TokenSequence]:
    """Load a single-sequence dataset: one tokenized example per line.

    Empty lines are kept as empty sequences so line alignment with other
    files is never silently broken.
    """
    return [tokenize(line, lowercase) for line in _read_lines(path)]


def load_paired(
    src_path: str | Path, tgt_path: str | Path, lowercase: bool = True
) -> list[PairedExample]:
    """Load a paired dataset from two line-aligned files."""
    sources = load_single(src_path, lowercase)
    targets = load_single(tgt_path, lowercase)
    if len(sources) != len(targets):
        raise AlignmentError(
            f"paired files are misaligned: {src_path} has {len(sources)} lines, "
            f"{tgt_path} has {len(targets)} lines"
        )
    return [PairedExample(s, t) for s, t in zip(sources, targets)]


def split(
    data: list,
    ratio: SplitRatio,
    seed: int = 0,
    shuffle: bool = False,
) -> tuple[list, list, list]:
    """Partition examples into train/valid/test.

    Sizes are floor(N * train), floor(N * valid), remainder to test, so no
    example is ever lost. With ``shuffle`` a seeded permutation is applied
    first; the same seed always yields the same partition.
    """
    n = len(data)
    nonzero = sum(1 for f in (ratio.train, ratio.valid, ratio.test) if f > 0)
    if n < nonzero:
        raise DataError(
            f"cannot split {n} examples into {nonzero} non-empty parts"
        )
    order = list(range(n))
    if shuffle:
        random.Random(seed).shuffle(order)
    n_train = int(n * ratio.train)
    n_valid = int(n * ratio.valid)
    train = [data[i] for i in order[:n_train]]
    valid = [data[i] for i in order[n_train : n_train + n_valid]]
    test = [data[i] for i in order[n_train + n_valid :]]
    return train, valid, test


@dataclass(frozen=True)
class Batch:
    """Rectangular id matrix padded with PAD, plus true per-row lengths.

    ``lengths[i]`` counts the non-PAD entries of row i (SOS/EOS included).
    """

    ids: list[list[int]]
    lengths: list[int]


def batches(data: list[list[int]], batch_size: int):
    """Yield consecutive groups of <= batch_size encoded sequences.

    Order is preserved and the final partial batch is emitted. Rows are
    padded with PAD to the longest sequence in the group.
    """
    if batch_size < 1:
        raise ConfigurationError(f"batch_size must be at least 1, got {batch_size}")
    for start in range(0, len(data), batch_size):
        group = data[start : start + batch_size]
        width = max((len(seq) for seq in group), default=0)
        ids = [seq + [PAD_ID] * (width - len(seq)) for seq in group]
        yield Batch(ids=ids, lengths=[len(seq) for seq in group])
