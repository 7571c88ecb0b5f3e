"""Generation strategies: greedy, top-k sampling, and beam search.

All strategies operate over any model exposing ``next_logprobs`` and are
fully deterministic: argmax ties break toward the lowest token id, beam
ties toward the lexicographically smaller id sequence, and sampling uses a
named seeded generator (Python's Mersenne Twister) so outputs reproduce
across platforms.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from random import Random

from .corpus import EOS_ID, SOS_ID, Vocabulary
from .errors import ConfigurationError

RNG_NAME = "python-mersenne-twister"

STRATEGIES = ("greedy", "topk", "beam")


@dataclass
class DecodeConfig:
    strategy: str = "greedy"
    beam_size: int = 5
    k: int = 10
    max_len: int = 30
    seed: int = 42
    length_penalty: float = 0.0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(
                f"unknown decoding strategy {self.strategy!r}; "
                f"choose from {', '.join(STRATEGIES)}"
            )
        if self.beam_size < 1:
            raise ConfigurationError(f"beam_size must be at least 1, got {self.beam_size}")
        if self.k < 1:
            raise ConfigurationError(f"k must be at least 1, got {self.k}")
        if self.max_len < 1:
            raise ConfigurationError(f"max_len must be at least 1, got {self.max_len}")
        if self.length_penalty < 0:
            raise ConfigurationError(
                f"length_penalty must be non-negative, got {self.length_penalty}"
            )


@dataclass
class Hypothesis:
    """Partial or complete decode state.

    ``logprob`` is the cumulative model log-probability of ``ids`` (all
    tokens after SOS); ``finished`` means EOS was emitted and is the last id.
    """

    ids: list[int] = field(default_factory=lambda: [SOS_ID])
    logprob: float = 0.0
    finished: bool = False


def _argmax_lowest(values: list[float]) -> int:
    """Index of the maximum; ties resolve to the lowest index."""
    best = 0
    best_value = values[0]
    for i in range(1, len(values)):
        if values[i] > best_value:
            best = i
            best_value = values[i]
    return best


def greedy(model, cfg: DecodeConfig, prompt_ids: list[int] | None = None) -> Hypothesis:
    """Append the most probable token at each step until EOS or max_len."""
    ids = list(prompt_ids) if prompt_ids else [SOS_ID]
    hyp = Hypothesis(ids=ids)
    for _ in range(cfg.max_len):
        logprobs = model.next_logprobs(hyp.ids)
        token = _argmax_lowest(logprobs)
        hyp.ids.append(token)
        hyp.logprob += logprobs[token]
        if token == EOS_ID:
            hyp.finished = True
            break
    return hyp


def top_k(
    model,
    cfg: DecodeConfig,
    prompt_ids: list[int] | None = None,
    rng: Random | None = None,
) -> Hypothesis:
    """Sample each step from the k most probable tokens, renormalized.

    Ties at the k-th boundary keep lower token ids. Deterministic given
    the seed.
    """
    if cfg.k > model.vocab_size:
        raise ConfigurationError(
            f"k={cfg.k} exceeds vocabulary size {model.vocab_size}"
        )
    rng = rng if rng is not None else Random(cfg.seed)
    ids = list(prompt_ids) if prompt_ids else [SOS_ID]
    hyp = Hypothesis(ids=ids)
    for _ in range(cfg.max_len):
        logprobs = model.next_logprobs(hyp.ids)
        candidates = sorted(range(len(logprobs)), key=lambda t: (-logprobs[t], t))[: cfg.k]
        weights = [math.exp(logprobs[t]) for t in candidates]
        target = rng.random() * math.fsum(weights)
        cumulative = 0.0
        token = candidates[-1]
        for t, w in zip(candidates, weights):
            cumulative += w
            if target < cumulative:
                token = t
                break
        hyp.ids.append(token)
        hyp.logprob += logprobs[token]
        if token == EOS_ID:
            hyp.finished = True
            break
    return hyp


def _normalized(logprob: float, n_generated: int, penalty: float) -> float:
    if penalty == 0.0 or n_generated <= 0:
        return logprob
    return logprob / (n_generated ** penalty)


def beam(model, cfg: DecodeConfig, prompt_ids: list[int] | None = None) -> Hypothesis:
    """Breadth-limited search keeping the best beam_size partial sequences.

    Each step expands every live hypothesis by every token, ranks all
    extensions by (optionally length-normalized) cumulative log-probability
    with ties toward the lexicographically smaller id sequence, and keeps
    the top beam_size. Extensions emitting EOS move to a finished pool.
    The search stops once no live hypothesis could still beat the best
    finished one, which makes the B >= V^max_len case exhaustive.
    """
    start = list(prompt_ids) if prompt_ids else [SOS_ID]
    prompt_len = len(start)
    live = [Hypothesis(ids=start)]
    done: list[Hypothesis] = []

    def sort_key(hyp: Hypothesis):
        n_generated = len(hyp.ids) - prompt_len
        return (-_normalized(hyp.logprob, n_generated, cfg.length_penalty),
                tuple(hyp.ids))

    at_max_len = False
    for step in range(cfg.max_len):
        extensions = []
        for hyp in live:
            logprobs = model.next_logprobs(hyp.ids)
            for token, lp in enumerate(logprobs):
                extensions.append(
                    Hypothesis(ids=hyp.ids + [token], logprob=hyp.logprob + lp)
                )
        extensions.sort(key=sort_key)
        live = []
        for hyp in extensions[: cfg.beam_size]:
            if hyp.ids[-1] == EOS_ID:
                hyp.finished = True
                done.append(hyp)
            else:
                live.append(hyp)
        if not live:
            break
        if step == cfg.max_len - 1:
            at_max_len = True
            break
        if done:
            best_done = min(sort_key(h)[0] for h in done)
            # Optimistic bound: logprob can only fall, the normalizer only grow.
            bound = min(
                -_normalized(h.logprob, cfg.max_len, cfg.length_penalty) for h in live
            )
            if bound > best_done:
                break
    # Live hypotheses only become returnable once they hit the length cap.
    pool = done + live if at_max_len else done
    return min(pool, key=sort_key)


def derive_seed(seed: int, index: int) -> int:
    """Per-sample seed for reproducible multi-sample top-k runs."""
    return seed * 1_000_003 + index


def generate(
    model,
    cfg: DecodeConfig,
    count: int = 1,
    vocab: Vocabulary | None = None,
    prompt_ids: list[int] | None = None,
    workers: int = 1,
) -> list:
    """Generate ``count`` sequences under the configured strategy.

    Greedy and beam search are deterministic, so multiple samples are
    identical copies; top-k reseeds per sample from (seed, index), making
    the output independent of scheduling. With a vocabulary the result is
    token sequences (specials stripped); otherwise raw Hypothesis objects.
    """
    if count < 1:
        raise ConfigurationError(f"count must be at least 1, got {count}")

    def decode_one(i: int) -> Hypothesis:
        if cfg.strategy == "greedy":
            return greedy(model, cfg, prompt_ids)
        if cfg.strategy == "beam":
            return beam(model, cfg, prompt_ids)
        return top_k(model, cfg, prompt_ids, rng=Random(derive_seed(cfg.seed, i)))

    if cfg.strategy in ("greedy", "beam"):
        hyps = [decode_one(0)] * count
    elif workers > 1 and count > 1:
        hyps: list[Hypothesis] = [None] * count  # type: ignore[list-item]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, hyp in enumerate(pool.map(decode_one, range(count))):
                hyps[i] = hyp
    else:
        hyps = [decode_one(i) for i in range(count)]

    if vocab is None:
        return hyps
    prompt_len = len(prompt_ids) if prompt_ids else 1
    return [vocab.decode(h.ids[prompt_len:]) for h in hyps]
