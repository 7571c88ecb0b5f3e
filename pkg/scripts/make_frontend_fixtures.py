#!/usr/bin/env python3
"""Freeze native engine behavior into JSON fixtures for the frontend tests.

Writes frontend/tests/fixtures/{metric_cases,native_decode}.json. Metric
cases carry exact expected floats from the native evaluator; the decode
fixture carries a fitted model's full distribution table plus the native
decoder outputs, verified to survive a JSON float round-trip.
"""

import json
import math
import sys
from itertools import product
from pathlib import Path
from random import Random

from genbench import DecodeConfig, MetricConfig, NGramLM, evaluate, generate
from genbench.corpus import SOS_ID, Vocabulary

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"


def random_corpus(rng, size, vocab=8, max_len=10, min_len=0):
    alphabet = [f"w{i}" for i in range(vocab)]
    return [
        [rng.choice(alphabet) for _ in range(rng.randint(min_len, max_len))]
        for _ in range(size)
    ]


def metric_case(label, hyps, refs=None, ref_mode="pool", **cfg_kwargs):
    cfg = MetricConfig(**cfg_kwargs)
    report = evaluate(cfg, hyps=hyps, refs=refs, ref_mode=ref_mode)
    cli = {
        "metrics": ",".join(cfg.names),
        "bleu_max_n": cfg.bleu_max_n,
        "rouge_max_n": cfg.rouge_max_n,
        "distinct_max_n": cfg.distinct_max_n,
        "smoothing": cfg.smoothing,
        "epsilon": cfg.epsilon,
        "threads": cfg.threads,
        "ref_mode": ref_mode,
    }
    if cfg.self_bleu_sample is not None:
        cli["self_bleu_sample"] = cfg.self_bleu_sample
        cli["self_bleu_seed"] = cfg.self_bleu_seed
    return {
        "label": label,
        "hyps": hyps,
        "refs": refs,
        "cli": cli,
        "expected": report.scores,
    }


def build_metric_cases():
    cases = [
        metric_case(
            "hand bleu mean",
            [["the", "cat", "sat"], ["the", "cat", "ate"]],
            [["the", "cat", "ate"]],
            names=["bleu"], bleu_max_n=2,
        ),
        metric_case(
            "hand rouge lcs",
            [["a", "b", "c", "d"]],
            [["a", "c", "b", "d"]],
            names=["rouge"], rouge_max_n=2,
        ),
        metric_case(
            "hand distinct quarter",
            [["a", "a", "a", "a"]],
            names=["distinct"],
        ),
        metric_case(
            "self-bleu trio",
            [["a", "b", "c"], ["a", "b", "d"], ["a", "e", "f"]],
            names=["self_bleu"], bleu_max_n=1,
        ),
        metric_case(
            "epsilon smoothing",
            [["x", "y", "z"]],
            [["a", "b", "c"]],
            names=["bleu"], bleu_max_n=2, smoothing="epsilon", epsilon=1e-9,
        ),
    ]
    rng = Random(989901)
    for i in range(8):
        hyps = random_corpus(rng, rng.randint(5, 20))
        refs = random_corpus(rng, rng.randint(3, 12))
        cases.append(
            metric_case(
                f"random corpus {i}",
                hyps,
                refs,
                names=["bleu", "self_bleu", "rouge", "distinct"],
                threads=1 + (i % 4),
            )
        )
    aligned_hyps = random_corpus(rng, 10, min_len=1)
    aligned_refs = random_corpus(rng, 10, min_len=1)
    cases.append(
        metric_case(
            "aligned pairs",
            aligned_hyps,
            aligned_refs,
            ref_mode="aligned",
            names=["bleu", "rouge"],
            bleu_max_n=2,
        )
    )
    return cases


class RoundtripModel:
    """Wraps a model behind the JSON probability round-trip the bridge sees."""

    def __init__(self, model):
        self.model = model
        self.vocab_size = model.vocab_size

    def next_logprobs(self, prefix):
        probs = [math.exp(lp) for lp in self.model.next_logprobs(prefix)]
        restored = json.loads(json.dumps(probs))
        return [math.log(p) if p > 0 else -math.inf for p in restored]


def build_decode_fixture():
    vocab_tokens = ["<pad>", "<unk>", "<sos>", "<eos>", "a", "b"]
    vocab = Vocabulary(vocab_tokens)
    lines = ["a b a", "a a b", "b a", "a b b a", "a b a", "b b a"]
    corpus = [vocab.encode(line.split(), add_bos_eos=True) for line in lines]
    model = NGramLM(order=2, vocab_size=len(vocab), delta=0.05).fit(corpus)

    max_len = 4
    table = {}
    non_eos = [t for t in range(len(vocab)) if t != 3]
    for length in range(max_len):
        for body in product(non_eos, repeat=length):
            prefix = [SOS_ID, *body]
            probs = [math.exp(lp) for lp in model.next_logprobs(prefix)]
            table[" ".join(map(str, prefix))] = probs

    cases = [
        {"label": "greedy pair", "config": {"strategy": "greedy", "max_len": max_len, "count": 2}},
        {"label": "beam 2", "config": {"strategy": "beam", "beam_size": 2, "max_len": max_len}},
        {"label": "beam 5 penalized",
         "config": {"strategy": "beam", "beam_size": 5, "max_len": max_len,
                    "length_penalty": 1.5}},
        {"label": "topk seeded",
         "config": {"strategy": "topk", "k": 3, "max_len": max_len, "seed": 7, "count": 3}},
    ]
    for case in cases:
        cfg = DecodeConfig(
            strategy=case["config"]["strategy"],
            beam_size=case["config"].get("beam_size", 5),
            k=case["config"].get("k", 10),
            max_len=case["config"]["max_len"],
            seed=case["config"].get("seed", 42),
            length_penalty=case["config"].get("length_penalty", 0.0),
        )
        count = case["config"].get("count", 1)
        native = generate(model, cfg, count=count, vocab=vocab)
        replayed = generate(RoundtripModel(model), cfg, count=count, vocab=vocab)
        if native != replayed:
            sys.exit(f"fixture {case['label']!r} unstable under JSON round-trip")
        case["expected"] = native
    return {"vocab": vocab_tokens, "max_len": max_len, "table": table, "cases": cases}


def main():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    (FIXTURE_DIR / "metric_cases.json").write_text(
        json.dumps(build_metric_cases(), indent=1) + "\n", encoding="utf-8"
    )
    (FIXTURE_DIR / "native_decode.json").write_text(
        json.dumps(build_decode_fixture(), indent=1) + "\n", encoding="utf-8"
    )
    print(f"fixtures written under {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
