"""Interpolated add-delta n-gram language model.

A reference model implementing the framework's model contract (loss via
``forward``, text production via ``generate``, next-token distributions via
``next_logprobs``) so the full pipeline runs without neural training.
Fitted models are immutable and safe for concurrent scoring.
"""

from __future__ import annotations

import math
import struct
from pathlib import Path
from typing import Protocol

from .corpus import Batch, EOS_ID, SOS_ID
from .errors import CheckpointError, ConfigurationError

CHECKPOINT_MAGIC = b"NGLM"
CHECKPOINT_VERSION = 1


class LanguageModel(Protocol):
    """Contract every pluggable model satisfies."""

    vocab_size: int

    def next_logprobs(self, prefix: list[int]) -> list[float]:
        """Log-distribution over the vocabulary given a prefix; sums to 1."""
        ...

    def forward(self, batch: Batch) -> float:
        """Mean per-token negative log-likelihood of a batch."""
        ...

    def generate(self, cfg, count: int = 1, vocab=None) -> list:
        """Produce sequences under a decoding configuration."""
        ...


class NGramLM:
    """Count-based model with per-order add-delta smoothing and interpolation.

    Probability of token t after a prefix:

        P(t) = sum_k lambda_k * (count(ctx_k, t) + delta) / (total(ctx_k) + delta * V)

    where ctx_k is the last k prefix tokens (k = 0..order-1). Contexts never
    seen in training contribute their order's uniform share, so every
    distribution is proper regardless of prefix.
    """

    def __init__(
        self,
        order: int,
        vocab_size: int,
        delta: float = 0.01,
        lambdas: tuple[float, ...] | None = None,
    ):
        if order < 1:
            raise ConfigurationError(f"model order must be at least 1, got {order}")
        if vocab_size < 1:
            raise ConfigurationError(f"vocab_size must be at least 1, got {vocab_size}")
        if not delta > 0:
            raise ConfigurationError(f"smoothing delta must be positive, got {delta}")
        if lambdas is None:
            lambdas = tuple(1.0 / order for _ in range(order))
        lambdas = tuple(float(w) for w in lambdas)
        if len(lambdas) != order:
            raise ConfigurationError(
                f"need {order} interpolation weights, got {len(lambdas)}"
            )
        if any(w < 0 for w in lambdas) or abs(sum(lambdas) - 1.0) > 1e-9:
            raise ConfigurationError(
                f"interpolation weights must be non-negative and sum to 1, got {lambdas}"
            )
        self.order = order
        self.vocab_size = vocab_size
        self.delta = delta
        self.lambdas = lambdas
        # counts[k]: context tuple of length k -> {token id -> count}
        self.counts: list[dict[tuple, dict[int, int]]] = [{} for _ in range(order)]
        self.totals: list[dict[tuple, int]] = [{} for _ in range(order)]

    # -- fitting ---------------------------------------------------------

    def _observe(self, context: tuple, token: int, k: int):
        ctx_counts = self.counts[k].setdefault(context, {})
        ctx_counts[token] = ctx_counts.get(token, 0) + 1
        self.totals[k][context] = self.totals[k].get(context, 0) + 1

    def fit(self, corpus: list[list[int]]) -> "NGramLM":
        """Accumulate counts from SOS/EOS-framed id sequences.

        Pure counting: the result is independent of corpus order.
        """
        if not corpus:
            raise ConfigurationError("cannot fit on an empty corpus")
        for seq in corpus:
            if len(seq) < 2 or seq[0] != SOS_ID or seq[-1] != EOS_ID:
                raise ValueError("training sequences must be SOS/EOS framed")
            for i in range(1, len(seq)):
                token = seq[i]
                for k in range(min(i, self.order - 1) + 1):
                    self._observe(tuple(seq[i - k : i]), token, k)
        return self

    # -- scoring ---------------------------------------------------------

    def prob_of(self, prefix: list[int], token: int) -> float:
        """Interpolated probability of one token after a prefix."""
        v = self.vocab_size
        delta = self.delta
        p = 0.0
        for k in range(self.order):
            context = tuple(prefix[-k:]) if k else ()
            total = self.totals[k].get(context, 0)
            count = self.counts[k].get(context, {}).get(token, 0) if total else 0
            p += self.lambdas[k] * (count + delta) / (total + delta * v)
        return p

    def next_logprobs(self, prefix: list[int]) -> list[float]:
        """Log-distribution over the whole vocabulary after a prefix.

        Bit-identical to ``log(prob_of(prefix, t))`` for every t; the inner
        arithmetic is kept in the same order-by-order accumulation.
        """
        v = self.vocab_size
        delta = self.delta
        probs = [0.0] * v
        for k in range(self.order):
            context = tuple(prefix[-k:]) if k else ()
            total = self.totals[k].get(context, 0)
            ctx_counts = self.counts[k].get(context) if total else None
            lam = self.lambdas[k]
            if ctx_counts is None:
                for t in range(v):
                    probs[t] += lam * (0 + delta) / (total + delta * v)
            else:
                for t in range(v):
                    probs[t] += lam * (ctx_counts.get(t, 0) + delta) / (total + delta * v)
        return [math.log(p) for p in probs]

    def sequence_logprob(self, seq: list[int]) -> float:
        """Sum of per-step log-probabilities for all tokens after SOS."""
        return math.fsum(
            math.log(self.prob_of(seq[:i], seq[i])) for i in range(1, len(seq))
        )

    def forward(self, batch: Batch) -> float:
        """Mean per-token NLL of the batch; the contract's loss value."""
        total_logprob = []
        n_tokens = 0
        for row, length in zip(batch.ids, batch.lengths):
            seq = row[:length]
            for i in range(1, len(seq)):
                total_logprob.append(math.log(self.prob_of(seq[:i], seq[i])))
            n_tokens += max(0, len(seq) - 1)
        if n_tokens == 0:
            raise ValueError("batch contains no scorable tokens")
        return -math.fsum(total_logprob) / n_tokens

    def generate(self, cfg, count: int = 1, vocab=None) -> list:
        from .decoding import generate as _generate

        return _generate(self, cfg, count=count, vocab=vocab)

    # -- persistence -----------------------------------------------------

    def save(self, path: str | Path):
        """Write a versioned binary table dump; byte-reproducible.

        Layout: magic, version, order, vocab size, delta, interpolation
        weights, then (context, token, count) triples sorted by
        (order, context, token).
        """
        triples = []
        for k in range(self.order):
            for context, ctx_counts in self.counts[k].items():
                for token, count in ctx_counts.items():
                    triples.append((k, context, token, count))
        triples.sort()
        chunks = [
            CHECKPOINT_MAGIC,
            struct.pack("<III", CHECKPOINT_VERSION, self.order, self.vocab_size),
            struct.pack("<d", self.delta),
            struct.pack(f"<{self.order}d", *self.lambdas),
            struct.pack("<Q", len(triples)),
        ]
        for k, context, token, count in triples:
            chunks.append(struct.pack(f"<B{k}IIQ", k, *context, token, count))
        Path(path).write_bytes(b"".join(chunks))

    @classmethod
    def load(cls, path: str | Path) -> "NGramLM":
        raw = Path(path).read_bytes()
        try:
            return cls._parse_checkpoint(raw)
        except (struct.error, IndexError, ConfigurationError) as exc:
            raise CheckpointError(
                f"corrupt checkpoint {path} (format version {CHECKPOINT_VERSION}): {exc}"
            ) from exc

    @classmethod
    def _parse_checkpoint(cls, raw: bytes) -> "NGramLM":
        if raw[:4] != CHECKPOINT_MAGIC:
            raise CheckpointError(
                f"not a model checkpoint: bad magic {raw[:4]!r}, "
                f"expected {CHECKPOINT_MAGIC!r}"
            )
        offset = 4
        version, order, vocab_size = struct.unpack_from("<III", raw, offset)
        offset += 12
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"unsupported checkpoint format version {version}, "
                f"this build reads version {CHECKPOINT_VERSION}"
            )
        (delta,) = struct.unpack_from("<d", raw, offset)
        offset += 8
        lambdas = struct.unpack_from(f"<{order}d", raw, offset)
        offset += 8 * order
        (n_triples,) = struct.unpack_from("<Q", raw, offset)
        offset += 8
        model = cls(order, vocab_size, delta, lambdas)
        for _ in range(n_triples):
            (k,) = struct.unpack_from("<B", raw, offset)
            offset += 1
            fields = struct.unpack_from(f"<{k}IIQ", raw, offset)
            offset += 4 * k + 4 + 8
            context, token, count = fields[:k], fields[k], fields[k + 1]
            model.counts[k].setdefault(context, {})[token] = count
            model.totals[k][context] = model.totals[k].get(context, 0) + count
        if offset != len(raw):
            raise CheckpointError(f"trailing bytes in checkpoint ({len(raw) - offset})")
        return model
