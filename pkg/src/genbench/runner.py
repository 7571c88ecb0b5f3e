"""Experiment orchestration: layered configuration, phases, artifacts.

An experiment runs configuration -> data -> model -> generation ->
evaluation. Option values resolve with precedence command line > model
file > dataset file > built-in defaults, and every resolved value carries
the layer it came from. Reruns with the same configuration and seed
produce byte-identical artifacts.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from . import corpus as corpus_mod
from .corpus import SplitRatio, Vocabulary, build_vocabulary, split
from .decoding import RNG_NAME, DecodeConfig, generate
from .errors import CheckpointError, ConfigurationError, DataError
from .metrics import MetricConfig, MetricReport, evaluate
from .ngram_lm import NGramLM

log = logging.getLogger("genbench")


@dataclass(frozen=True)
class DatasetEntry:
    """Registry entry; the structure decides the task, so the task never
    needs to be spelled out in configuration."""

    name: str
    structure: str  # "single" | "paired"
    stem: str | None = None  # path stem; None = bundled data

    @property
    def task(self) -> str:
        return "unconditional" if self.structure == "single" else "conditional"


_BUNDLED = {
    "coco-mini": DatasetEntry("coco-mini", "single"),
    "giga-mini": DatasetEntry("giga-mini", "paired"),
}

MODELS = ("nglm",)

DEFAULTS: dict[str, object] = {
    "dataset": None,
    "model": None,
    "data_path": None,
    # data options
    "lowercase": True,
    "min_freq": 1,
    "max_vocab": None,
    "split_ratio": [0.8, 0.1, 0.1],
    "batch_size": 32,
    "shuffle": True,
    # model options
    "order": 3,
    "delta": 0.01,
    "lambdas": None,
    "checkpoint": None,
    # decoding options
    "decoding_strategy": "greedy",
    "beam_size": 5,
    "k": 10,
    "max_len": 30,
    "length_penalty": 0.0,
    "num_samples": 50,
    # metric options
    "metrics": ["bleu", "self_bleu", "distinct"],
    "bleu_max_n": 4,
    "rouge_max_n": 2,
    "distinct_max_n": 2,
    "smoothing": "none",
    "epsilon": 1e-9,
    "self_bleu_sample": None,
    "threads": 1,
    # run options
    "seed": 42,
    "output_dir": "runs",
}

# Accepted for config-file compatibility; this build is CPU-only.
IGNORED_KEYS = ("use_gpu", "gpu_id", "DDP")

LAYER_DEFAULT = "default"
LAYER_DATASET = "dataset-file"
LAYER_MODEL = "model-file"
LAYER_CLI = "command-line"


@dataclass(eq=True)
class ExperimentConfig:
    values: dict[str, object]
    provenance: dict[str, str] = field(compare=False, default_factory=dict)

    def __getattr__(self, key: str):
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None

    def digest(self) -> str:
        payload = json.dumps(self.values, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]

    def metric_config(self) -> MetricConfig:
        names = self.values["metrics"]
        if isinstance(names, str):
            names = [n.strip() for n in names.split(",") if n.strip()]
        return MetricConfig(
            names=list(names),
            bleu_max_n=self.values["bleu_max_n"],
            rouge_max_n=self.values["rouge_max_n"],
            distinct_max_n=self.values["distinct_max_n"],
            smoothing=self.values["smoothing"],
            epsilon=self.values["epsilon"],
            self_bleu_sample=self.values["self_bleu_sample"],
            self_bleu_seed=self.values["seed"],
            threads=self.values["threads"],
        )

    def decode_config(self) -> DecodeConfig:
        return DecodeConfig(
            strategy=self.values["decoding_strategy"],
            beam_size=self.values["beam_size"],
            k=self.values["k"],
            max_len=self.values["max_len"],
            seed=self.values["seed"],
            length_penalty=self.values["length_penalty"],
        )

    def ratio(self) -> SplitRatio:
        ratio = self.values["split_ratio"]
        if isinstance(ratio, str):
            ratio = [float(part) for part in ratio.split(",")]
        if not isinstance(ratio, (list, tuple)) or len(ratio) != 3:
            raise ConfigurationError(
                f"split_ratio must be three fractions, got {ratio!r}"
            )
        return SplitRatio(*[float(f) for f in ratio])


def _read_config_file(path: str | Path | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {p}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config file {p} is not valid YAML: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigurationError(f"config file {p} must be a flat key-value mapping")
    return doc


def parse_cli_overrides(args: list[str]) -> dict:
    """Parse ``--key=value`` (or ``--key value``) tokens into a mapping.

    Values go through the YAML scalar parser so types match config files.
    """
    overrides: dict[str, object] = {}
    i = 0
    while i < len(args):
        token = args[i]
        if not token.startswith("--"):
            raise ConfigurationError(f"unexpected argument {token!r}, expected --key=value")
        body = token[2:]
        if "=" in body:
            key, raw = body.split("=", 1)
        elif i + 1 < len(args) and not args[i + 1].startswith("--"):
            key, raw = body, args[i + 1]
            i += 1
        else:
            key, raw = body, "true"
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            value = raw
        overrides[key.replace("-", "_")] = value
        i += 1
    return overrides


def load_config(
    dataset_file: str | Path | None = None,
    model_file: str | Path | None = None,
    cli_args: dict | list[str] | None = None,
) -> ExperimentConfig:
    """Resolve layered configuration with per-key provenance."""
    if isinstance(cli_args, list):
        cli_args = parse_cli_overrides(cli_args)
    layers = [
        (LAYER_DATASET, _read_config_file(dataset_file)),
        (LAYER_MODEL, _read_config_file(model_file)),
        (LAYER_CLI, dict(cli_args or {})),
    ]

    values = dict(DEFAULTS)
    provenance = {key: LAYER_DEFAULT for key in DEFAULTS}
    for layer_name, layer in layers:
        for key, value in layer.items():
            if key in IGNORED_KEYS:
                log.warning("option %r accepted but ignored: this build is CPU-only", key)
                continue
            if key not in DEFAULTS:
                log.warning("unknown configuration key %r (from %s)", key, layer_name)
                continue
            values[key] = value
            provenance[key] = layer_name

    cfg = ExperimentConfig(values=values, provenance=provenance)
    if cfg.dataset is None:
        raise ConfigurationError("a dataset name is required (--dataset=<name>)")
    if cfg.model is None:
        raise ConfigurationError("a model name is required (--model=<name>)")
    if cfg.model not in MODELS:
        raise ConfigurationError(
            f"unknown model {cfg.model!r}; known models: {', '.join(MODELS)}"
        )
    if cfg.dataset not in _BUNDLED and cfg.data_path is None:
        known = ", ".join(sorted(_BUNDLED))
        raise ConfigurationError(
            f"unknown dataset {cfg.dataset!r}; known datasets: {known} "
            f"(or point data_path at your own files)"
        )
    return cfg


def list_registry() -> tuple[list[str], list[str], list[str]]:
    """Built-in dataset, model, and metric names for CLI discoverability."""
    from .metrics import KNOWN_METRICS

    return sorted(_BUNDLED), list(MODELS), list(KNOWN_METRICS)


def _bundled_stem(name: str) -> Path:
    package_dir = resources.files("genbench")
    return Path(str(package_dir / "data" / name.replace("-", "_")))


def _resolve_dataset(cfg: ExperimentConfig) -> tuple[DatasetEntry, Path]:
    if cfg.dataset in _BUNDLED and cfg.data_path is None:
        entry = _BUNDLED[cfg.dataset]
        return entry, _bundled_stem(cfg.dataset)
    stem = Path(cfg.data_path)
    paired = Path(f"{stem}.src").exists() or Path(f"{stem}.train.src").exists()
    return DatasetEntry(cfg.dataset, "paired" if paired else "single", str(stem)), stem


def _explicit_ratio(cfg: ExperimentConfig) -> bool:
    return cfg.provenance.get("split_ratio", LAYER_DEFAULT) != LAYER_DEFAULT


def _load_splits(cfg: ExperimentConfig, entry: DatasetEntry, stem: Path):
    """Load train/valid/test, preferring pre-split files when present."""
    lowercase = cfg.lowercase
    if entry.structure == "single":
        presplit = [Path(f"{stem}.{part}") for part in ("train", "valid", "test")]
        if all(p.exists() for p in presplit):
            if _explicit_ratio(cfg):
                log.warning("pre-split files found for %s; split_ratio is ignored", entry.name)
            return tuple(corpus_mod.load_single(p, lowercase) for p in presplit)
        path = stem if stem.exists() else Path(f"{stem}.txt")
        if not path.exists():
            raise DataError(f"dataset file not found: {stem}[.txt]")
        data = corpus_mod.load_single(path, lowercase)
        return split(data, cfg.ratio(), seed=cfg.seed, shuffle=cfg.shuffle)

    presplit = [
        (Path(f"{stem}.{part}.src"), Path(f"{stem}.{part}.tgt"))
        for part in ("train", "valid", "test")
    ]
    if all(src.exists() and tgt.exists() for src, tgt in presplit):
        if _explicit_ratio(cfg):
            log.warning("pre-split files found for %s; split_ratio is ignored", entry.name)
        return tuple(
            corpus_mod.load_paired(src, tgt, lowercase) for src, tgt in presplit
        )
    src, tgt = Path(f"{stem}.src"), Path(f"{stem}.tgt")
    if not (src.exists() and tgt.exists()):
        raise DataError(f"paired dataset files not found: {src} / {tgt}")
    data = corpus_mod.load_paired(src, tgt, lowercase)
    return split(data, cfg.ratio(), seed=cfg.seed, shuffle=cfg.shuffle)


@dataclass
class RunResult:
    report: MetricReport
    artifacts: dict[str, Path]
    timing: dict[str, float]


def _training_sequences(entry: DatasetEntry, examples: list, vocab: Vocabulary):
    """Encode a split for fitting/scoring.

    Paired examples train on source followed by target inside one frame,
    so prompted generation can continue a source into a target.
    """
    if entry.structure == "single":
        return [vocab.encode(seq, add_bos_eos=True) for seq in examples]
    return [
        vocab.encode(ex.source + ex.target, add_bos_eos=True) for ex in examples
    ]


def _run_dir(cfg: ExperimentConfig) -> Path:
    base = Path(cfg.output_dir) / cfg.dataset / cfg.model
    stamp = time.strftime("%Y%m%d-%H%M%S")
    candidate = base / stamp
    suffix = 1
    while candidate.exists():
        candidate = base / f"{stamp}-{suffix}"
        suffix += 1
    candidate.mkdir(parents=True)
    return candidate


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Execute the full flow and write artifacts to a fresh run directory."""
    timing: dict[str, float] = {}
    artifacts: dict[str, Path] = {}

    @contextmanager
    def phase(name: str):
        start = time.perf_counter()
        try:
            yield
        except Exception as exc:
            exc.args = (f"experiment phase {name!r} failed: {exc}",)
            raise
        finally:
            timing[name] = time.perf_counter() - start

    run_dir = _run_dir(cfg)
    snapshot = run_dir / "config.yaml"
    snapshot.write_text(
        yaml.safe_dump(cfg.values, sort_keys=True, default_flow_style=False),
        encoding="utf-8",
    )
    artifacts["config"] = snapshot

    with phase("data"):
        entry, stem = _resolve_dataset(cfg)
        train, valid, test = _load_splits(cfg, entry, stem)
        if not train:
            raise DataError(f"dataset {entry.name} has an empty training split")

    with phase("vocab"):
        if entry.structure == "single":
            vocab_source = train
        else:
            vocab_source = [ex.source for ex in train] + [ex.target for ex in train]
        vocab = build_vocabulary(vocab_source, max_size=cfg.max_vocab, min_freq=cfg.min_freq)

    with phase("model"):
        encoded_train = _training_sequences(entry, train, vocab)
        if cfg.checkpoint:
            model = NGramLM.load(cfg.checkpoint)
            if model.vocab_size != len(vocab):
                raise CheckpointError(
                    f"checkpoint vocabulary size {model.vocab_size} does not match "
                    f"dataset vocabulary size {len(vocab)}"
                )
            log.info("loaded checkpoint %s, skipping fit", cfg.checkpoint)
        else:
            lambdas = tuple(cfg.lambdas) if cfg.lambdas else None
            model = NGramLM(cfg.order, len(vocab), delta=cfg.delta, lambdas=lambdas)
            model.fit(encoded_train)
        checkpoint_path = run_dir / "model.nglm"
        model.save(checkpoint_path)
        artifacts["checkpoint"] = checkpoint_path
        valid_loss = None
        if valid:
            encoded_valid = _training_sequences(entry, valid, vocab)
            batch = next(corpus_mod.batches(encoded_valid, max(1, len(encoded_valid))))
            valid_loss = model.forward(batch)
            log.info("validation loss: %.4f", valid_loss)

    with phase("generate"):
        decode_cfg = cfg.decode_config()
        if entry.structure == "single":
            hyps = generate(model, decode_cfg, count=cfg.num_samples, vocab=vocab)
            refs = test
        else:
            hyps = []
            for i, ex in enumerate(test):
                prompt = [corpus_mod.SOS_ID] + vocab.encode(ex.source)
                sample_cfg = decode_cfg
                if decode_cfg.strategy == "topk":
                    sample_cfg = dataclasses.replace(decode_cfg, seed=decode_cfg.seed + i)
                hyp = generate(model, sample_cfg, count=1, vocab=vocab,
                               prompt_ids=prompt)[0]
                hyps.append(hyp)
            refs = [ex.target for ex in test]
        generated_path = run_dir / "generated.txt"
        generated_path.write_text(
            "".join(" ".join(seq) + "\n" for seq in hyps), encoding="utf-8"
        )
        artifacts["generated"] = generated_path

    with phase("evaluate"):
        metric_cfg = cfg.metric_config()
        encoded_test = _training_sequences(entry, test, vocab) if test else None
        report = evaluate(
            metric_cfg,
            hyps=hyps,
            refs=refs if refs else None,
            model=model,
            data=encoded_test,
            dataset_id=entry.name,
            ref_mode="aligned" if entry.structure == "paired" else "pool",
        )
        report.meta["model"] = cfg.model
        report.meta["rng"] = RNG_NAME
        if valid_loss is not None:
            report.meta["valid_loss"] = valid_loss
        report_json = run_dir / "results.json"
        report_json.write_text(report.to_json() + "\n", encoding="utf-8")
        report_text = run_dir / "report.txt"
        report_text.write_text(report.to_text() + "\n", encoding="utf-8")
        artifacts["results"] = report_json
        artifacts["report"] = report_text

    return RunResult(report=report, artifacts=artifacts, timing=timing)
