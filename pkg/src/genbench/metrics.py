"""Standardized evaluation metrics for generated text.

Word-based metrics: BLEU-n with one-hot weights (only order n contributes),
Self-BLEU, ROUGE-n, ROUGE-L, Distinct-n. Logit-based metrics: NLL and PPL
against any model satisfying the language-model contract.

Corpus-level drivers distribute per-hypothesis scoring over a worker pool.
Scores are written to pre-assigned slots and reduced with an exactly-rounded
sum, so results are bit-identical for any thread count and any permutation
of hypotheses or references.
"""

from __future__ import annotations

import hashlib
import json
import math
from bisect import bisect_left
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from random import Random

from .errors import ConfigurationError, MetricError

KNOWN_METRICS = ("nll", "ppl", "bleu", "self_bleu", "rouge", "distinct")

TokenSequence = list[str]


def ngram_counts(seq: TokenSequence, n: int) -> Counter:
    """Sliding-window n-gram multiset; empty when the sequence is shorter than n."""
    if n < 1:
        raise ConfigurationError(f"n-gram order must be at least 1, got {n}")
    counts = Counter()
    for i in range(len(seq) - n + 1):
        counts[tuple(seq[i : i + n])] += 1
    return counts


@dataclass
class MetricConfig:
    """Selects which metrics run and how.

    ``names`` holds coarse metric names from {nll, ppl, bleu, self_bleu,
    rouge, distinct}; each expands to per-order keys in the report.
    """

    names: list[str] = field(default_factory=lambda: ["bleu", "distinct"])
    bleu_max_n: int = 4
    rouge_max_n: int = 2
    distinct_max_n: int = 2
    smoothing: str = "none"
    epsilon: float = 1e-9
    self_bleu_sample: int | None = None
    self_bleu_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not self.names:
            raise ConfigurationError("metric list must not be empty")
        for name in self.names:
            if name not in KNOWN_METRICS:
                raise ConfigurationError(
                    f"unknown metric {name!r}; known metrics: {', '.join(KNOWN_METRICS)}"
                )
        for label, order in (
            ("bleu_max_n", self.bleu_max_n),
            ("rouge_max_n", self.rouge_max_n),
            ("distinct_max_n", self.distinct_max_n),
        ):
            if order < 1:
                raise ConfigurationError(f"{label} must be at least 1, got {order}")
        if self.smoothing not in ("none", "epsilon"):
            raise ConfigurationError(
                f"smoothing must be 'none' or 'epsilon', got {self.smoothing!r}"
            )
        if self.smoothing == "epsilon" and not self.epsilon > 0:
            raise ConfigurationError("epsilon smoothing requires epsilon > 0")
        if self.self_bleu_sample is not None and self.self_bleu_sample < 1:
            raise ConfigurationError("self_bleu_sample must be at least 1 when set")
        if self.threads < 1:
            raise ConfigurationError(f"threads must be at least 1, got {self.threads}")

    def digest(self) -> str:
        payload = json.dumps(vars(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass
class MetricReport:
    """Named metric scores plus provenance metadata."""

    scores: dict[str, float]
    meta: dict[str, object]

    def to_text(self) -> str:
        """Flat ``key: value`` lines, one metric per line."""
        return "\n".join(f"{key}: {value:.6f}" for key, value in self.scores.items())

    def to_json(self) -> str:
        """Metric keys at top level, provenance under "meta"."""
        payload: dict[str, object] = dict(self.scores)
        payload["meta"] = self.meta
        return json.dumps(payload, indent=2, sort_keys=True)


class _ReferenceTable:
    """Shared read-only n-gram statistics of a reference set for one order."""

    __slots__ = ("max_counts", "sorted_lengths")

    def __init__(self, refs: list[TokenSequence], n: int):
        max_counts: dict[tuple, int] = {}
        for ref in refs:
            for gram, count in ngram_counts(ref, n).items():
                if count > max_counts.get(gram, 0):
                    max_counts[gram] = count
        self.max_counts = max_counts
        self.sorted_lengths = sorted(len(ref) for ref in refs)

    def closest_length(self, c: int) -> int:
        """Reference length closest to c; ties resolve to the shorter one."""
        lengths = self.sorted_lengths
        pos = bisect_left(lengths, c)
        best = None
        for cand in (lengths[pos - 1] if pos > 0 else None,
                     lengths[pos] if pos < len(lengths) else None):
            if cand is None:
                continue
            if best is None or (abs(cand - c), cand) < (abs(best - c), best):
                best = cand
        return best if best is not None else 0


def _clipped_precision(
    hyp: TokenSequence, table: _ReferenceTable, n: int, smoothing: str, epsilon: float
) -> tuple[int, int, float]:
    """Return (matches, total, precision) of hyp n-grams against the table."""
    hyp_counts = ngram_counts(hyp, n)
    total = max(0, len(hyp) - n + 1)
    if total == 0:
        return 0, 0, 0.0
    matches = 0
    for gram, count in hyp_counts.items():
        limit = table.max_counts.get(gram, 0)
        matches += count if count <= limit else limit
    if matches == 0:
        if smoothing == "epsilon":
            return 0, total, epsilon / total
        return 0, total, 0.0
    return matches, total, matches / total


def _brevity_penalty(c: int, r: int) -> float:
    return min(1.0, math.exp(1.0 - r / c))


def _bleu_from_table(
    hyp: TokenSequence,
    table_for_order,
    n: int,
    smoothing: str,
    epsilon: float,
    weighting: str,
) -> float:
    c = len(hyp)
    if c == 0:
        return 0.0
    if weighting == "one_hot":
        _, total, precision = _clipped_precision(
            hyp, table_for_order(n), n, smoothing, epsilon
        )
        if total == 0 or precision == 0.0:
            return 0.0
        return _brevity_penalty(c, table_for_order(n).closest_length(c)) * precision
    # Geometric mean over orders 1..n (the average-weight variant).
    log_sum = 0.0
    for order in range(1, n + 1):
        _, total, precision = _clipped_precision(
            hyp, table_for_order(order), order, smoothing, epsilon
        )
        if total == 0 or precision == 0.0:
            return 0.0
        log_sum += math.log(precision)
    bp = _brevity_penalty(c, table_for_order(1).closest_length(c))
    return bp * math.exp(log_sum / n)


def bleu_n(
    hyp: TokenSequence,
    refs: list[TokenSequence],
    n: int,
    smoothing: str = "none",
    epsilon: float = 1e-9,
    weighting: str = "one_hot",
) -> float:
    """Sentence BLEU of order n with one-hot weights.

    Modified (clipped) n-gram precision against the multi-reference maximum
    counts, times the brevity penalty min(1, exp(1 - r/c)) where r is the
    reference length closest to the hypothesis length (ties toward the
    shorter reference). With one-hot weights only order n contributes;
    ``weighting="average"`` instead takes the geometric mean of orders 1..n.
    An empty hypothesis scores 0 by convention.
    """
    if not refs:
        raise MetricError("bleu_n needs at least one reference")
    tables: dict[int, _ReferenceTable] = {}

    def table_for_order(order: int) -> _ReferenceTable:
        if order not in tables:
            tables[order] = _ReferenceTable(refs, order)
        return tables[order]

    return _bleu_from_table(hyp, table_for_order, n, smoothing, epsilon, weighting)


def _run_slotted(worker, count: int, threads: int) -> list[float]:
    """Fill a per-item result list, optionally across threads.

    ``worker(i)`` must depend only on i; slot assignment keeps the gather
    order equal to the input order regardless of scheduling.
    """
    slots = [0.0] * count
    if threads <= 1 or count < 2:
        for i in range(count):
            slots[i] = worker(i)
        return slots

    def run_chunk(start: int, stop: int):
        for i in range(start, stop):
            slots[i] = worker(i)

    step = -(-count // threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(run_chunk, start, min(start + step, count))
            for start in range(0, count, step)
        ]
        for future in futures:
            future.result()
    return slots


def corpus_bleu(
    hyps: list[TokenSequence],
    refs: list[TokenSequence],
    n: int = 4,
    cfg: MetricConfig | None = None,
) -> float:
    """Mean over hypotheses of multi-reference sentence BLEU-n.

    Every hypothesis is scored against the full reference set. The
    reference table is built once and shared read-only across workers.
    """
    if not hyps:
        raise MetricError("corpus_bleu needs at least one hypothesis")
    if not refs:
        raise MetricError("corpus_bleu needs at least one reference")
    cfg = cfg or MetricConfig(names=["bleu"], bleu_max_n=n)
    table = _ReferenceTable(refs, n)

    def worker(i: int) -> float:
        return _bleu_from_table(
            hyps[i], lambda _order: table, n, cfg.smoothing, cfg.epsilon, "one_hot"
        )

    scores = _run_slotted(worker, len(hyps), cfg.threads)
    return math.fsum(scores) / len(scores)


class _LeaveOneOutTable:
    """Per-order reference statistics over all hypotheses except one.

    Tracks the two highest per-hypothesis counts of every n-gram, so the
    maximum count over any leave-one-out reference set is exact without
    rebuilding a table per hypothesis.
    """

    def __init__(self, counters: list[Counter], lengths: list[int]):
        best: dict[tuple, tuple[int, int, int]] = {}  # gram -> (top, multiplicity, second)
        for counts in counters:
            for gram, count in counts.items():
                top, mult, second = best.get(gram, (0, 0, 0))
                if count > top:
                    best[gram] = (count, 1, top)
                elif count == top:
                    best[gram] = (top, mult + 1, second)
                elif count > second:
                    best[gram] = (top, mult, count)
        self.best = best
        self.sorted_lengths = sorted(lengths)
        self.length_counts = Counter(lengths)

    def max_count_excluding(self, gram: tuple, own_count: int) -> int:
        entry = self.best.get(gram)
        if entry is None:
            return 0
        top, mult, second = entry
        if own_count == top and mult == 1:
            return second
        return top

    def closest_length_excluding_self(self, c: int) -> int:
        """Closest length to c in the multiset minus one copy of c itself."""
        if self.length_counts[c] >= 2:
            return c
        lengths = self.sorted_lengths
        pos = bisect_left(lengths, c)
        lo = pos - 1  # lengths[lo] < c, never the excluded copy
        hi = pos
        while hi < len(lengths) and lengths[hi] == c:
            hi += 1  # step past my own single copy
        best = None
        for cand in (lengths[lo] if lo >= 0 else None,
                     lengths[hi] if hi < len(lengths) else None):
            if cand is None:
                continue
            if best is None or (abs(cand - c), cand) < (abs(best - c), best):
                best = cand
        return best if best is not None else 0


def self_bleu(
    hyps: list[TokenSequence],
    n: int = 4,
    cfg: MetricConfig | None = None,
) -> float:
    """Mean BLEU-n of each hypothesis against all the others.

    High values mean the generated set is self-similar (low diversity).
    When ``cfg.self_bleu_sample`` is set, each hypothesis is scored against
    a seeded random subsample of the others instead of the full set, an
    explicit mitigation of the quadratic cost of the exact definition.
    """
    if len(hyps) < 2:
        raise MetricError(f"self_bleu needs at least 2 hypotheses, got {len(hyps)}")
    cfg = cfg or MetricConfig(names=["self_bleu"], bleu_max_n=n)

    if cfg.self_bleu_sample is not None:
        sample_size = cfg.self_bleu_sample

        def sampled_worker(i: int) -> float:
            others = list(range(len(hyps)))
            others.pop(i)
            rng = Random(cfg.self_bleu_seed * 1_000_003 + i)
            if sample_size < len(others):
                others = rng.sample(others, sample_size)
            return bleu_n(hyps[i], [hyps[j] for j in others], n,
                          cfg.smoothing, cfg.epsilon)

        scores = _run_slotted(sampled_worker, len(hyps), cfg.threads)
        return math.fsum(scores) / len(scores)

    counters = [ngram_counts(hyp, n) for hyp in hyps]
    lengths = [len(hyp) for hyp in hyps]
    table = _LeaveOneOutTable(counters, lengths)

    def worker(i: int) -> float:
        c = lengths[i]
        if c == 0:
            return 0.0
        total = max(0, c - n + 1)
        if total == 0:
            return 0.0
        matches = 0
        for gram, count in counters[i].items():
            limit = table.max_count_excluding(gram, count)
            matches += count if count <= limit else limit
        if matches == 0:
            if cfg.smoothing == "epsilon":
                precision = cfg.epsilon / total
            else:
                return 0.0
        else:
            precision = matches / total
        r = table.closest_length_excluding_self(c)
        return _brevity_penalty(c, r) * precision

    scores = _run_slotted(worker, len(hyps), cfg.threads)
    return math.fsum(scores) / len(scores)


def _f1(matches: int, hyp_total: int, ref_total: int) -> float:
    if matches == 0:
        return 0.0
    precision = matches / hyp_total
    recall = matches / ref_total
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(hyp: TokenSequence, refs: list[TokenSequence], n: int) -> float:
    """F1 of clipped n-gram overlap, maximized over references."""
    if not refs:
        raise MetricError("rouge_n needs at least one reference")
    hyp_counts = ngram_counts(hyp, n)
    hyp_total = max(0, len(hyp) - n + 1)
    best = 0.0
    for ref in refs:
        ref_counts = ngram_counts(ref, n)
        ref_total = max(0, len(ref) - n + 1)
        if hyp_total == 0 or ref_total == 0:
            continue
        matches = sum(
            min(count, ref_counts[gram])
            for gram, count in hyp_counts.items()
            if gram in ref_counts
        )
        score = _f1(matches, hyp_total, ref_total)
        if score > best:
            best = score
    return best


def _lcs_length(a: TokenSequence, b: TokenSequence) -> int:
    """Longest common subsequence length, O(len(a) * len(b)) rolling rows."""
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for tok_a in a:
        current = [0]
        for j, tok_b in enumerate(b):
            if tok_a == tok_b:
                current.append(previous[j] + 1)
            else:
                prev_best = current[j]
                current.append(prev_best if prev_best >= previous[j + 1] else previous[j + 1])
        previous = current
    return previous[-1]


def rouge_l(hyp: TokenSequence, refs: list[TokenSequence]) -> float:
    """LCS-based F1, maximized over references."""
    if not refs:
        raise MetricError("rouge_l needs at least one reference")
    best = 0.0
    for ref in refs:
        lcs = _lcs_length(hyp, ref)
        if lcs == 0:
            continue
        score = _f1(lcs, len(hyp), len(ref))
        if score > best:
            best = score
    return best


def distinct_n(hyps: list[TokenSequence], n: int) -> float:
    """Distinct n-grams over total n-grams, pooled across all hypotheses."""
    if not hyps:
        raise MetricError("distinct_n needs at least one hypothesis")
    if n < 1:
        raise ConfigurationError(f"n-gram order must be at least 1, got {n}")
    seen = set()
    total = 0
    for hyp in hyps:
        for i in range(len(hyp) - n + 1):
            seen.add(tuple(hyp[i : i + n]))
            total += 1
    if total == 0:
        return 0.0
    return len(seen) / total


def nll_ppl(model, data: list[list[int]]) -> tuple[float, float, float]:
    """Negative log-likelihood and perplexity of framed id sequences.

    Returns (nll_token, nll_seq, ppl), natural log throughout. SOS
    conditions but is not scored; EOS is scored. A zero-probability token
    makes all three values +inf.
    """
    if not data:
        raise MetricError("nll_ppl needs at least one sequence")
    seq_logprobs = []
    token_logprobs = []
    for seq in data:
        per_token = []
        for i in range(1, len(seq)):
            per_token.append(model.next_logprobs(seq[:i])[seq[i]])
        token_logprobs.extend(per_token)
        seq_logprobs.append(math.fsum(per_token))
    if not token_logprobs:
        raise MetricError("nll_ppl got only empty sequences, nothing to score")
    nll_token = -math.fsum(token_logprobs) / len(token_logprobs)
    nll_seq = -math.fsum(seq_logprobs) / len(seq_logprobs)
    try:
        ppl = math.exp(nll_token)
    except OverflowError:
        ppl = math.inf
    return nll_token, nll_seq, ppl


def _mean_over_hyps(score_one, count: int, threads: int) -> float:
    scores = _run_slotted(score_one, count, threads)
    return math.fsum(scores) / len(scores)


def evaluate(
    cfg: MetricConfig,
    hyps: list[TokenSequence] | None = None,
    refs: list[TokenSequence] | None = None,
    model=None,
    data: list[list[int]] | None = None,
    dataset_id: str | None = None,
    ref_mode: str = "pool",
) -> MetricReport:
    """Run every requested metric and assemble a report.

    ``ref_mode="pool"`` scores each hypothesis against the full reference
    set (the unconditional-generation convention); ``"aligned"`` pairs
    hypothesis i with reference i (the translation/summarization
    convention, requires equal lengths).
    """
    if ref_mode not in ("pool", "aligned"):
        raise ConfigurationError(f"ref_mode must be 'pool' or 'aligned', got {ref_mode!r}")

    def need(metric: str, value, what: str):
        if value is None:
            raise ConfigurationError(f"metric {metric!r} requires {what}, which was not provided")
        return value

    word_metrics = [m for m in cfg.names if m in ("bleu", "self_bleu", "rouge", "distinct")]
    if word_metrics:
        need(word_metrics[0], hyps, "hypotheses")
    if ref_mode == "aligned" and refs is not None and hyps is not None and len(refs) != len(hyps):
        raise ConfigurationError(
            f"aligned ref_mode needs one reference per hypothesis, got "
            f"{len(hyps)} hypotheses and {len(refs)} references"
        )

    scores: dict[str, float] = {}
    flags: list[str] = []
    for name in cfg.names:
        if name == "bleu":
            need("bleu", refs, "references")
            for order in range(1, cfg.bleu_max_n + 1):
                if ref_mode == "aligned":
                    scores[f"bleu-{order}"] = _mean_over_hyps(
                        lambda i, o=order: bleu_n(hyps[i], [refs[i]], o,
                                                  cfg.smoothing, cfg.epsilon),
                        len(hyps), cfg.threads)
                else:
                    scores[f"bleu-{order}"] = corpus_bleu(hyps, refs, order, cfg)
        elif name == "self_bleu":
            for order in range(1, cfg.bleu_max_n + 1):
                scores[f"self-bleu-{order}"] = self_bleu(hyps, order, cfg)
        elif name == "rouge":
            need("rouge", refs, "references")
            for order in range(1, cfg.rouge_max_n + 1):
                if ref_mode == "aligned":
                    scores[f"rouge-{order}"] = _mean_over_hyps(
                        lambda i, o=order: rouge_n(hyps[i], [refs[i]], o),
                        len(hyps), cfg.threads)
                else:
                    scores[f"rouge-{order}"] = _mean_over_hyps(
                        lambda i, o=order: rouge_n(hyps[i], refs, o),
                        len(hyps), cfg.threads)
            if ref_mode == "aligned":
                scores["rouge-l"] = _mean_over_hyps(
                    lambda i: rouge_l(hyps[i], [refs[i]]), len(hyps), cfg.threads)
            else:
                scores["rouge-l"] = _mean_over_hyps(
                    lambda i: rouge_l(hyps[i], refs), len(hyps), cfg.threads)
        elif name == "distinct":
            for order in range(1, cfg.distinct_max_n + 1):
                scores[f"distinct-{order}"] = distinct_n(hyps, order)
        elif name in ("nll", "ppl"):
            need(name, model, "a model")
            need(name, data, "encoded evaluation data")
            nll_token, nll_seq, ppl = nll_ppl(model, data)
            if name == "nll":
                scores["nll-token"] = nll_token
                scores["nll-seq"] = nll_seq
            else:
                scores["ppl"] = ppl
            if not math.isfinite(nll_token) and "nonfinite-nll" not in flags:
                flags.append("nonfinite-nll")

    meta: dict[str, object] = {
        "dataset": dataset_id,
        "hypotheses": len(hyps) if hyps is not None else 0,
        "config_digest": cfg.digest(),
    }
    if flags:
        meta["flags"] = flags
    return MetricReport(scores=scores, meta=meta)
