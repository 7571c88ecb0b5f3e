"""Tests for tokenization, vocabulary, loading, splitting, batching."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genbench import (
    EOS_ID,
    PAD_ID,
    SOS_ID,
    UNK_ID,
    AlignmentError,
    ConfigurationError,
    DataError,
    SplitRatio,
    batches,
    build_vocabulary,
    load_paired,
    load_single,
    split,
    tokenize,
)

tokens = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd")),
    min_size=1,
    max_size=6,
)
token_lists = st.lists(tokens, min_size=0, max_size=12)


class TestTokenize:
    def test_lowercase_split(self):
        assert tokenize("The Cat  sat", lowercase=True) == ["the", "cat", "sat"]

    def test_empty(self):
        assert tokenize("", lowercase=True) == []

    def test_case_preserved(self):
        assert tokenize("A a", lowercase=False) == ["A", "a"]

    def test_unicode_whitespace(self):
        assert tokenize("a b\tc\r\nd") == ["a", "b", "c", "d"]

    @given(token_lists)
    @settings(max_examples=50)
    def test_idempotent_on_joined_output(self, toks):
        once = tokenize(" ".join(toks))
        again = tokenize(" ".join(once))
        assert once == again


class TestVocabulary:
    def test_specials_fixed(self):
        vocab = build_vocabulary([["a"]])
        assert (PAD_ID, UNK_ID, SOS_ID, EOS_ID) == (0, 1, 2, 3)
        assert vocab.token_of[:4] == ("<pad>", "<unk>", "<sos>", "<eos>")
        assert len(vocab) == 5

    def test_min_freq_filters(self):
        vocab = build_vocabulary([["a", "a", "b"]], min_freq=2)
        assert "a" in vocab and "b" not in vocab

    def test_tie_breaks_to_first_occurrence(self):
        vocab = build_vocabulary([["a", "b"], ["b", "a"]], max_size=5)
        assert len(vocab) == 5
        assert "a" in vocab and "b" not in vocab

    def test_truncation_by_frequency(self):
        vocab = build_vocabulary([["x"], ["y", "y"]], max_size=5)
        assert "y" in vocab and "x" not in vocab

    def test_max_size_too_small(self):
        with pytest.raises(ConfigurationError):
            build_vocabulary([["a"]], max_size=3)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ConfigurationError):
            build_vocabulary([])

    def test_encode_oov_and_framing(self):
        vocab = build_vocabulary([["a"]])
        assert vocab.encode(["a", "z"]) == [4, UNK_ID]
        assert vocab.encode(["a"], add_bos_eos=True) == [SOS_ID, 4, EOS_ID]
        assert vocab.encode([], add_bos_eos=True) == [SOS_ID, EOS_ID]

    def test_decode_strips_specials(self):
        vocab = build_vocabulary([["a"]])
        assert vocab.decode([SOS_ID, 4, EOS_ID]) == ["a"]

    def test_decode_out_of_range(self):
        vocab = build_vocabulary([["a"]])
        with pytest.raises(IndexError):
            vocab.decode([99])

    @given(st.lists(token_lists, min_size=1, max_size=8))
    @settings(max_examples=50)
    def test_bijection(self, corpus):
        vocab = build_vocabulary(corpus)
        for i, tok in enumerate(vocab.token_of):
            assert vocab.id_of[tok] == i
        non_special = sorted(vocab.id_of.values())
        assert non_special == list(range(len(vocab)))

    @given(st.lists(token_lists, min_size=1, max_size=8))
    @settings(max_examples=50)
    def test_encode_decode_roundtrip(self, corpus):
        vocab = build_vocabulary(corpus)
        for seq in corpus:
            body = [t for t in seq if t in vocab and vocab.id_of[t] >= 4]
            assert vocab.decode(vocab.encode(body, add_bos_eos=True)) == body


class TestLoading:
    def test_load_single(self, tmp_path):
        p = tmp_path / "data.txt"
        p.write_text("The cat\n\nsat down\r\n", encoding="utf-8")
        seqs = load_single(p)
        assert seqs == [["the", "cat"], [], ["sat", "down"]]

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="nope.txt"):
            load_single(tmp_path / "nope.txt")

    def test_invalid_utf8_reports_line(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_bytes(b"fine line\n\xff\xfe broken\n")
        with pytest.raises(DataError, match="line 2"):
            load_single(p)

    def test_load_paired(self, tmp_path):
        (tmp_path / "d.src").write_text("a b\nc\n", encoding="utf-8")
        (tmp_path / "d.tgt").write_text("x\ny z\n", encoding="utf-8")
        pairs = load_paired(tmp_path / "d.src", tmp_path / "d.tgt")
        assert len(pairs) == 2
        assert pairs[0].source == ["a", "b"] and pairs[0].target == ["x"]

    def test_load_paired_misaligned(self, tmp_path):
        (tmp_path / "d.src").write_text("a\nb\n", encoding="utf-8")
        (tmp_path / "d.tgt").write_text("x\n", encoding="utf-8")
        with pytest.raises(AlignmentError, match="2.*1"):
            load_paired(tmp_path / "d.src", tmp_path / "d.tgt")


class TestSplit:
    def test_exact_sizes_no_shuffle(self):
        data = list(range(100))
        train, valid, test = split(data, SplitRatio(0.8, 0.1, 0.1))
        assert (len(train), len(valid), len(test)) == (80, 10, 10)
        assert train == list(range(80))

    def test_floor_rule_remainder_to_test(self):
        train, valid, test = split(list(range(10)), SplitRatio(0.5, 0.25, 0.25))
        assert (len(train), len(valid), len(test)) == (5, 2, 3)

    def test_same_seed_same_partition(self):
        data = list(range(50))
        first = split(data, SplitRatio(0.6, 0.2, 0.2), seed=7, shuffle=True)
        second = split(data, SplitRatio(0.6, 0.2, 0.2), seed=7, shuffle=True)
        assert first == second
        third = split(data, SplitRatio(0.6, 0.2, 0.2), seed=8, shuffle=True)
        assert first != third

    def test_too_few_examples(self):
        with pytest.raises(DataError):
            split([1, 2], SplitRatio(0.4, 0.3, 0.3))

    def test_bad_ratio(self):
        with pytest.raises(ConfigurationError):
            SplitRatio(0.5, 0.5, 0.5)
        with pytest.raises(ConfigurationError):
            SplitRatio(-0.1, 0.6, 0.5)

    @given(st.integers(3, 60), st.integers(0, 2**31), st.booleans())
    @settings(max_examples=50)
    def test_partition_disjoint_and_exhaustive(self, n, seed, shuffle):
        data = list(range(n))
        train, valid, test = split(data, SplitRatio(0.7, 0.2, 0.1), seed=seed, shuffle=shuffle)
        combined = sorted(train + valid + test)
        assert combined == data


class TestBatches:
    def test_grouping_and_padding(self):
        data = [[2, 4, 3], [2, 3], [2, 5, 6, 3]]
        got = list(batches(data, batch_size=2))
        assert len(got) == 2
        assert got[0].ids == [[2, 4, 3], [2, 3, PAD_ID]]
        assert got[0].lengths == [3, 2]
        assert got[1].ids == [[2, 5, 6, 3]]

    def test_zero_batch_size(self):
        with pytest.raises(ConfigurationError):
            list(batches([[2, 3]], 0))

    @given(st.lists(st.lists(st.integers(4, 9), min_size=1, max_size=6), min_size=1, max_size=10),
           st.integers(1, 4))
    @settings(max_examples=50)
    def test_padding_invariant(self, seqs, batch_size):
        total_non_pad = 0
        rows = 0
        for batch in batches(seqs, batch_size):
            assert len({len(row) for row in batch.ids}) == 1
            for row, length in zip(batch.ids, batch.lengths):
                assert row[length:] == [PAD_ID] * (len(row) - length)
                total_non_pad += sum(1 for x in row if x != PAD_ID)
                rows += 1
        assert rows == len(seqs)
        assert total_non_pad == sum(len(s) for s in seqs)