"""genbench: a toolkit for text-generation experimentation.

Corpus pipeline, a reference n-gram language model, greedy/top-k/beam
decoding, and standardized evaluation metrics, runnable end-to-end through
the ``genbench`` command line or programmatically:

    >>> import genbench as gb
    >>> gb.corpus_bleu([["the", "cat", "sat"]], [["the", "cat", "ate"]], n=2)
    0.5
"""

from .corpus import (
    EOS_ID,
    PAD_ID,
    SOS_ID,
    UNK_ID,
    Batch,
    PairedExample,
    SplitRatio,
    Vocabulary,
    batches,
    build_vocabulary,
    load_paired,
    load_single,
    split,
    tokenize,
)
from .decoding import DecodeConfig, Hypothesis, beam, generate, greedy, top_k
from .errors import (
    AlignmentError,
    CheckpointError,
    ConfigurationError,
    DataError,
    DecodeError,
    GenbenchError,
    MetricError,
)
from .metrics import (
    MetricConfig,
    MetricReport,
    bleu_n,
    corpus_bleu,
    distinct_n,
    evaluate,
    ngram_counts,
    nll_ppl,
    rouge_l,
    rouge_n,
    self_bleu,
)
from .ngram_lm import LanguageModel, NGramLM
from .runner import ExperimentConfig, RunResult, list_registry, load_config, run_experiment

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "Batch",
    "CheckpointError",
    "ConfigurationError",
    "DataError",
    "DecodeConfig",
    "DecodeError",
    "EOS_ID",
    "ExperimentConfig",
    "GenbenchError",
    "Hypothesis",
    "LanguageModel",
    "MetricConfig",
    "MetricError",
    "MetricReport",
    "NGramLM",
    "PAD_ID",
    "PairedExample",
    "RunResult",
    "SOS_ID",
    "SplitRatio",
    "UNK_ID",
    "Vocabulary",
    "batches",
    "beam",
    "bleu_n",
    "build_vocabulary",
    "corpus_bleu",
    "distinct_n",
    "evaluate",
    "generate",
    "greedy",
    "list_registry",
    "load_config",
    "load_paired",
    "load_single",
    "ngram_counts",
    "nll_ppl",
    "rouge_l",
    "rouge_n",
    "run_experiment",
    "self_bleu",
    "split",
    "tokenize",
    "top_k",
]
