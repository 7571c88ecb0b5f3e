"""Decoder tests: strategy behavior, equivalences, optimality, determinism."""

import math
from random import Random

import pytest

import oracles
from genbench import ConfigurationError, DecodeConfig, NGramLM, beam, generate, greedy, top_k
from genbench.corpus import EOS_ID, SOS_ID, Vocabulary
from models import RandomTableModel, TableModel, greedy_trap_model


def fitted_model(seed, vocab_size=8, order=2, sentences=12):
    rng = Random(seed)
    corpus = []
    for _ in range(sentences):
        body = [rng.randrange(4, vocab_size) for _ in range(rng.randint(1, 7))]
        corpus.append([SOS_ID] + body + [EOS_ID])
    return NGramLM(order=order, vocab_size=vocab_size, delta=0.05).fit(corpus)


class TestGreedy:
    def test_immediate_eos(self):
        model = TableModel(5, {(2,): {EOS_ID: 0.9, 4: 0.1}})
        hyp = greedy(model, DecodeConfig(max_len=10))
        assert hyp.ids == [SOS_ID, EOS_ID]
        assert hyp.finished

    def test_argmax_trace_with_tie(self):
        # Step 1 picks A (0.6); step 2 ties C/D at 0.5 and takes the lower id C.
        hyp = greedy(greedy_trap_model(), DecodeConfig(max_len=5))
        assert hyp.ids == [SOS_ID, 4, 6, EOS_ID]
        assert hyp.logprob == pytest.approx(math.log(0.6) + math.log(0.5))

    def test_respects_max_len(self):
        looping = TableModel(5, {(2,) + (4,) * i: {4: 1.0} for i in range(50)})
        hyp = greedy(looping, DecodeConfig(max_len=7))
        assert not hyp.finished
        assert len(hyp.ids) <= 7 + 2

    def test_deterministic(self):
        model = fitted_model(1)
        cfg = DecodeConfig(max_len=12)
        assert greedy(model, cfg).ids == greedy(model, cfg).ids


class TestTopK:
    def test_k1_equals_greedy(self):
        for seed in range(20):
            model = fitted_model(seed)
            cfg = DecodeConfig(strategy="topk", k=1, max_len=10, seed=seed)
            assert top_k(model, cfg).ids == greedy(model, cfg).ids

    def test_same_seed_same_sequence(self):
        model = fitted_model(2)
        cfg = DecodeConfig(strategy="topk", k=4, max_len=10, seed=99)
        assert top_k(model, cfg).ids == top_k(model, cfg).ids

    def test_different_seed_differs_somewhere(self):
        model = fitted_model(3)
        outputs = {
            tuple(top_k(model, DecodeConfig(strategy="topk", k=6, max_len=10, seed=s)).ids)
            for s in range(12)
        }
        assert len(outputs) > 1

    def test_k_exceeding_vocab_rejected(self):
        with pytest.raises(ConfigurationError):
            top_k(fitted_model(4), DecodeConfig(strategy="topk", k=99))

    def test_full_k_uniform_frequencies_within_3_sigma(self):
        # One sampling step over a uniform distribution: empirical token
        # frequencies over 10,000 draws stay within 3 sigma of 1/V.
        v = 8
        model = TableModel(v, {(2,): {t: 1.0 / v for t in range(v)}})
        cfg = DecodeConfig(strategy="topk", k=v, max_len=1, seed=0)
        counts = [0] * v
        draws = 10_000
        for i in range(draws):
            hyp = top_k(model, cfg, rng=Random(i))
            counts[hyp.ids[1]] += 1
        p = 1.0 / v
        sigma = math.sqrt(draws * p * (1 - p))
        for count in counts:
            assert abs(count - draws * p) <= 3 * sigma

    def test_boundary_tie_keeps_lower_ids(self):
        # Four tokens tie at the k=2 boundary; ids 4 and 5 stay eligible.
        model = TableModel(8, {(2,): {4: 0.25, 5: 0.25, 6: 0.25, 7: 0.25}})
        cfg = DecodeConfig(strategy="topk", k=2, max_len=1, seed=0)
        seen = {top_k(model, cfg, rng=Random(i)).ids[1] for i in range(300)}
        assert seen == {4, 5}


class TestBeam:
    def test_trap_beam_beats_greedy(self):
        model = greedy_trap_model()
        greedy_hyp = greedy(model, DecodeConfig(max_len=4))
        beam_hyp = beam(model, DecodeConfig(strategy="beam", beam_size=2, max_len=4))
        assert greedy_hyp.ids == [SOS_ID, 4, 6, EOS_ID]   # A C
        assert beam_hyp.ids == [SOS_ID, 5, 6, EOS_ID]     # B C
        assert beam_hyp.logprob == pytest.approx(math.log(0.4) + math.log(0.9))
        assert beam_hyp.logprob > greedy_hyp.logprob

    def test_b1_equals_greedy(self):
        for seed in range(20):
            model = fitted_model(seed)
            greedy_hyp = greedy(model, DecodeConfig(max_len=8))
            beam_hyp = beam(model, DecodeConfig(strategy="beam", beam_size=1, max_len=8))
            assert beam_hyp.ids == greedy_hyp.ids
            assert beam_hyp.logprob == pytest.approx(greedy_hyp.logprob, abs=1e-9)

    def test_exhaustive_beam_matches_enumeration(self):
        for seed in range(10):
            v, max_len = 4, 3
            model = RandomTableModel(seed, v)
            cfg = DecodeConfig(strategy="beam", beam_size=v**max_len, max_len=max_len)
            got = beam(model, cfg)
            want_ids, want_logprob = oracles.best_sequence_by_enumeration(model, max_len)
            assert got.ids == want_ids
            assert got.logprob == want_logprob

    def test_score_consistency_with_model(self):
        for seed in range(10):
            model = fitted_model(seed, order=3)
            for cfg in (
                DecodeConfig(max_len=10),
                DecodeConfig(strategy="beam", beam_size=4, max_len=10),
                DecodeConfig(strategy="topk", k=5, max_len=10, seed=seed),
            ):
                hyp = {
                    "greedy": greedy,
                    "beam": beam,
                    "topk": top_k,
                }[cfg.strategy](model, cfg)
                assert hyp.logprob == pytest.approx(
                    model.sequence_logprob(hyp.ids), abs=1e-9
                )

    def test_larger_beam_never_scores_worse(self):
        for seed in range(15):
            model = fitted_model(seed, vocab_size=7)
            scores = []
            for b in (1, 2, 4, 8, 16):
                cfg = DecodeConfig(strategy="beam", beam_size=b, max_len=6)
                scores.append(beam(model, cfg).logprob)
            for small, large in zip(scores, scores[1:]):
                assert large >= small - 1e-12

    def test_length_penalty_changes_ranking(self):
        # Without penalty the short finish wins; a strong penalty
        # normalizes per token and favors the longer continuation.
        model = TableModel(
            6,
            {
                (2,): {EOS_ID: 0.5, 4: 0.5},
                (2, 4): {5: 1.0},
                (2, 4, 5): {EOS_ID: 1.0},
            },
        )
        plain = beam(model, DecodeConfig(strategy="beam", beam_size=4, max_len=4))
        assert plain.ids == [SOS_ID, EOS_ID]
        penalized = beam(
            model,
            DecodeConfig(strategy="beam", beam_size=4, max_len=4, length_penalty=2.0),
        )
        assert penalized.ids == [SOS_ID, 4, 5, EOS_ID]

    def test_max_len_cap(self):
        looping = TableModel(5, {(2,) + (4,) * i: {4: 1.0} for i in range(50)})
        for b in (1, 3):
            hyp = beam(looping, DecodeConfig(strategy="beam", beam_size=b, max_len=5))
            assert len(hyp.ids) <= 5 + 2


class TestGenerate:
    def test_three_way_equivalence(self):
        for seed in range(25):
            model = fitted_model(seed, vocab_size=9, order=3)
            greedy_ids = greedy(model, DecodeConfig(max_len=8)).ids
            topk_ids = top_k(model, DecodeConfig(strategy="topk", k=1, max_len=8, seed=seed)).ids
            beam_ids = beam(model, DecodeConfig(strategy="beam", beam_size=1, max_len=8)).ids
            assert greedy_ids == topk_ids == beam_ids

    def test_greedy_copies(self):
        model = fitted_model(40)
        vocab = Vocabulary(["<pad>", "<unk>", "<sos>", "<eos>", "a", "b", "c", "d"])
        outs = generate(model, DecodeConfig(max_len=6), count=3, vocab=vocab)
        assert len(outs) == 3
        assert outs[0] == outs[1] == outs[2]
        assert all(tok in ("a", "b", "c", "d") for tok in outs[0])

    def test_topk_reseeds_per_sample(self):
        model = fitted_model(41)
        cfg = DecodeConfig(strategy="topk", k=5, max_len=8, seed=7)
        outs = generate(model, cfg, count=10)
        rerun = generate(model, cfg, count=10)
        assert [h.ids for h in outs] == [h.ids for h in rerun]
        assert len({tuple(h.ids) for h in outs}) > 1

    def test_worker_count_does_not_change_output(self):
        model = fitted_model(42)
        cfg = DecodeConfig(strategy="topk", k=4, max_len=8, seed=3)
        sequential = generate(model, cfg, count=8, workers=1)
        threaded = generate(model, cfg, count=8, workers=4)
        assert [h.ids for h in sequential] == [h.ids for h in threaded]

    def test_prompted_continuation(self):
        model = fitted_model(43)
        vocab = Vocabulary(["<pad>", "<unk>", "<sos>", "<eos>", "a", "b", "c", "d"])
        prompt = [SOS_ID, 4, 5]
        outs = generate(model, DecodeConfig(max_len=5), count=1, vocab=vocab,
                        prompt_ids=prompt)
        assert len(outs) == 1
        # Output holds only the continuation, prompt tokens stripped.
        hyp = greedy(model, DecodeConfig(max_len=5), prompt_ids=prompt)
        assert outs[0] == vocab.decode(hyp.ids[len(prompt):])