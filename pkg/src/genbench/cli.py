"""Command-line interface.

    genbench run --model=nglm --dataset=coco-mini [--key=value ...]
    genbench eval --hyp FILE [--ref FILE] --metrics bleu,rouge [...]
    genbench list
    genbench decode-bridge   (JSON-line protocol for foreign-language hosts)

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigurationError, DataError
from .metrics import MetricConfig, evaluate
from .runner import list_registry, load_config, parse_cli_overrides, run_experiment

log = logging.getLogger("genbench")


def _cmd_run(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="genbench run", add_help=True,
                                     allow_abbrev=False)
    parser.add_argument("--dataset_config", "--dataset-config", default=None,
                        help="YAML dataset configuration file")
    parser.add_argument("--model_config", "--model-config", default=None,
                        help="YAML model configuration file")
    known, rest = parser.parse_known_args(argv)
    overrides = parse_cli_overrides(rest)
    cfg = load_config(known.dataset_config, known.model_config, overrides)
    result = run_experiment(cfg)
    for name, seconds in result.timing.items():
        print(f"phase {name}: {seconds:.3f}s")
    print(result.report.to_text())
    for name, path in result.artifacts.items():
        print(f"{name}: {path}")
    return 0


def _cmd_eval(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="genbench eval")
    parser.add_argument("--hyp", required=True, help="hypotheses, one per line")
    parser.add_argument("--ref", default=None, help="references, one per line")
    parser.add_argument("--metrics", default="bleu",
                        help="comma-separated subset of bleu,self_bleu,rouge,distinct")
    parser.add_argument("--bleu_max_n", type=int, default=4)
    parser.add_argument("--rouge_max_n", type=int, default=2)
    parser.add_argument("--distinct_max_n", type=int, default=2)
    parser.add_argument("--smoothing", default="none", choices=["none", "epsilon"])
    parser.add_argument("--epsilon", type=float, default=1e-9)
    parser.add_argument("--self_bleu_sample", type=int, default=None)
    parser.add_argument("--self_bleu_seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--ref_mode", default="pool", choices=["pool", "aligned"])
    parser.add_argument("--lowercase", action="store_true")
    parser.add_argument("--json", dest="json_path", default=None,
                        help="also write the report as JSON to this path")
    args = parser.parse_args(argv)

    from .corpus import load_single

    hyps = load_single(args.hyp, lowercase=args.lowercase)
    refs = load_single(args.ref, lowercase=args.lowercase) if args.ref else None
    names = [name.strip() for name in args.metrics.split(",") if name.strip()]
    for name in names:
        if name in ("nll", "ppl"):
            raise ConfigurationError(
                f"metric {name!r} needs a fitted model; use 'genbench run'"
            )
    cfg = MetricConfig(
        names=names,
        bleu_max_n=args.bleu_max_n,
        rouge_max_n=args.rouge_max_n,
        distinct_max_n=args.distinct_max_n,
        smoothing=args.smoothing,
        epsilon=args.epsilon,
        self_bleu_sample=args.self_bleu_sample,
        self_bleu_seed=args.self_bleu_seed,
        threads=args.threads,
    )
    report = evaluate(cfg, hyps=hyps, refs=refs, dataset_id=args.hyp,
                      ref_mode=args.ref_mode)
    print(report.to_text())
    if args.json_path:
        with open(args.json_path, "w", encoding="utf-8") as handle:
            handle.write(report.to_json() + "\n")
    return 0


def _cmd_list() -> int:
    datasets, models, metric_names = list_registry()
    print("datasets: " + ", ".join(datasets))
    print("models:   " + ", ".join(models))
    print("metrics:  " + ", ".join(metric_names))
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__.strip())
        return 0
    command, rest = argv[0], argv[1:]
    try:
        if command == "run":
            return _cmd_run(rest)
        if command == "eval":
            return _cmd_eval(rest)
        if command == "list":
            return _cmd_list()
        if command == "decode-bridge":
            from .bridge import serve_decode_bridge

            return serve_decode_bridge()
        raise ConfigurationError(
            f"unknown command {command!r}; choose run, eval, list, or decode-bridge"
        )
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 4
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
