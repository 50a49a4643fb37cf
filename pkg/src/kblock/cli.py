"""Command-line entry point.

Subcommands: evaluate, shuffle, annotate generate, annotate score,
train-ngram. Runs are driven by a JSON config file, command-line flags, or
both; flags win. Every evaluate run embeds its fully resolved config in the
report, and re-running from that snapshot reproduces the report
byte-for-byte.

Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .annotation import (
    bundle_to_json, generate_bundle, key_from_json, key_to_json,
    read_records_csv, score_annotations,
)
from .corpus import Corpus, ingest_jsonl, ingest_text, truncate
from .evaluation import RunReport, emit_report, kbst_sweep
from .external import ExternalScorer, ExternalScorerHandle
from .ngram import NgramScorer, load_model, save_model, train_ngram
from .rng import derive_seed
from .scoring import WindowConfig
from .shuffle import instance_to_json, make_instance, partition_blocks

SEED_ENV_VAR = "KBLOCK_SEED"

CONFIG_KEYS = {
    "corpus_path": str,
    "corpus_format": str,
    "pre_segmented": bool,
    "scorer": str,
    "scorer_options": dict,
    "ks": list,
    "run_seed": int,
    "max_sentences": int,
    "window_tokens": int,
    "overlap_fraction": float,
    "workers": int,
    "samples": int,
    "hard_fail": bool,
    "output_prefix": str,
}

NGRAM_OPTION_KEYS = {"order", "smoothing", "training_corpus_path", "model_path"}
EXTERNAL_OPTION_KEYS = {"provider_cmd", "provider_tcp", "mode", "timeout_s"}


class ConfigError(Exception):
    pass


def _default_config() -> dict:
    return {
        "corpus_path": None,
        "corpus_format": "jsonl",
        "pre_segmented": False,
        "scorer": "ngram",
        "scorer_options": {},
        "ks": [1, 2, 3, 4, 5],
        "run_seed": None,
        "max_sentences": 20,
        "window_tokens": 512,
        "overlap_fraction": 0.5,
        "workers": os.cpu_count() or 1,
        "samples": 1,
        "hard_fail": False,
        "output_prefix": "run",
    }


def load_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file does not exist: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = set(obj) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return obj


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then flags; returns the full snapshot."""
    config = _default_config()
    if getattr(args, "config", None):
        config.update(load_config_file(args.config))

    overrides = {
        "corpus_path": getattr(args, "corpus", None),
        "corpus_format": getattr(args, "format", None),
        "pre_segmented": getattr(args, "pre_segmented", None),
        "scorer": getattr(args, "scorer", None),
        "ks": _parse_ks(getattr(args, "ks", None)),
        "run_seed": getattr(args, "seed", None),
        "max_sentences": getattr(args, "max_sentences", None),
        "window_tokens": getattr(args, "window_tokens", None),
        "overlap_fraction": getattr(args, "overlap_fraction", None),
        "workers": getattr(args, "workers", None),
        "samples": getattr(args, "samples", None),
        "hard_fail": getattr(args, "hard_fail", None),
        "output_prefix": getattr(args, "output_prefix", None),
    }
    config.update({k: v for k, v in overrides.items() if v is not None})

    option_overrides = {
        "order": getattr(args, "order", None),
        "smoothing": _parse_smoothing(getattr(args, "smoothing", None)),
        "training_corpus_path": getattr(args, "train", None),
        "model_path": getattr(args, "model", None),
        "provider_cmd": getattr(args, "provider_cmd", None),
        "provider_tcp": getattr(args, "provider_tcp", None),
        "mode": getattr(args, "mode", None),
        "timeout_s": getattr(args, "timeout", None),
    }
    options = dict(config["scorer_options"])
    options.update({k: v for k, v in option_overrides.items() if v is not None})
    config["scorer_options"] = options

    if config["run_seed"] is None:
        env_seed = os.environ.get(SEED_ENV_VAR)
        config["run_seed"] = int(env_seed) if env_seed else 0
    return config


def _parse_ks(raw) -> list[int] | None:
    if raw is None:
        return None
    try:
        ks = [int(part) for part in str(raw).split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse block sizes {raw!r}: {exc}") from exc
    if not ks:
        raise ConfigError("ks must name at least one block size")
    return ks


def _parse_smoothing(raw) -> list[float] | None:
    if raw is None:
        return None
    try:
        return [float(part) for part in str(raw).split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse smoothing weights {raw!r}: {exc}") from exc


def validate_config(
    config: dict, require_corpus: bool = True, require_scorer: bool = False
) -> None:
    for key, value in config.items():
        expected = CONFIG_KEYS[key]
        if key == "run_seed":
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ConfigError(f"run_seed must be a non-negative integer, got {value!r}")
            continue
        if key == "corpus_path":
            continue
        if expected is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number, got {value!r}")
            continue
        if not isinstance(value, expected) or (expected is int and isinstance(value, bool)):
            raise ConfigError(f"{key} must be {expected.__name__}, got {value!r}")

    if require_corpus:
        if not config["corpus_path"]:
            raise ConfigError("a corpus path is required (--corpus or corpus_path)")
        if not os.path.exists(config["corpus_path"]):
            raise ConfigError(f"corpus path does not exist: {config['corpus_path']}")
    if config["corpus_format"] not in ("jsonl", "text"):
        raise ConfigError(f"corpus_format must be jsonl or text, got {config['corpus_format']!r}")
    if config["scorer"] not in ("ngram", "external"):
        raise ConfigError(f"scorer must be ngram or external, got {config['scorer']!r}")
    if not config["ks"] or any(not isinstance(k, int) or k < 1 for k in config["ks"]):
        raise ConfigError(f"ks must be positive integers, got {config['ks']!r}")
    for key in ("max_sentences", "window_tokens", "workers", "samples"):
        if config[key] < 1:
            raise ConfigError(f"{key} must be at least 1, got {config[key]!r}")
    try:
        WindowConfig(config["window_tokens"], config["overlap_fraction"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if not require_scorer:
        return
    options = config["scorer_options"]
    if config["scorer"] == "ngram":
        unknown = set(options) - NGRAM_OPTION_KEYS
        if unknown:
            raise ConfigError(f"unknown ngram scorer options: {sorted(unknown)}")
        sources = [options.get("training_corpus_path"), options.get("model_path")]
        if sum(1 for s in sources if s) != 1:
            raise ConfigError(
                "ngram scorer needs exactly one of training_corpus_path (--train) "
                "or model_path (--model)"
            )
        for path in filter(None, sources):
            if not os.path.exists(path):
                raise ConfigError(f"scorer path does not exist: {path}")
        if options.get("order") is not None and (
            not isinstance(options["order"], int) or options["order"] < 1
        ):
            raise ConfigError(f"order must be a positive integer, got {options['order']!r}")
    else:
        unknown = set(options) - EXTERNAL_OPTION_KEYS
        if unknown:
            raise ConfigError(f"unknown external scorer options: {sorted(unknown)}")
        endpoints = [options.get("provider_cmd"), options.get("provider_tcp")]
        if sum(1 for e in endpoints if e) != 1:
            raise ConfigError(
                "external scorer needs exactly one of provider_cmd (--provider-cmd) "
                "or provider_tcp (--provider-tcp host:port)"
            )
        if options.get("mode", "generative") not in ("generative", "mlm"):
            raise ConfigError(f"mode must be generative or mlm, got {options['mode']!r}")


def _load_corpus(config: dict) -> Corpus:
    path = config["corpus_path"]
    if config["corpus_format"] == "text":
        corpus, report = ingest_text(path)
    else:
        corpus, report = ingest_jsonl(path, pre_segmented=config["pre_segmented"])
    for skip in report.skipped:
        print(f"note: skipped {skip.doc_id} (line {skip.line_no}): {skip.reason}",
              file=sys.stderr)
    return corpus


def _build_scorer(config: dict):
    window = WindowConfig(config["window_tokens"], config["overlap_fraction"])
    options = config["scorer_options"]
    if config["scorer"] == "ngram":
        if options.get("model_path"):
            model = load_model(options["model_path"])
        else:
            train_corpus, _ = (
                ingest_text(options["training_corpus_path"])
                if config["corpus_format"] == "text"
                else ingest_jsonl(options["training_corpus_path"],
                                  pre_segmented=config["pre_segmented"])
            )
            model = train_ngram(
                train_corpus,
                order=options.get("order") or 3,
                smoothing=options.get("smoothing"),
            )
        return NgramScorer(model, window)
    timeout = float(options.get("timeout_s") or 120.0)
    if options.get("provider_cmd"):
        handle = ExternalScorerHandle.spawn(options["provider_cmd"], timeout_s=timeout)
    else:
        host, _, port = str(options["provider_tcp"]).rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"provider_tcp must be host:port, got {options['provider_tcp']!r}")
        handle = ExternalScorerHandle.connect(host, int(port), timeout_s=timeout)
    return ExternalScorer(handle, options.get("mode", "generative"))


def _write_report_files(report: RunReport, prefix: str) -> list[str]:
    parent = Path(prefix).parent
    if str(parent) not in ("", "."):
        parent.mkdir(parents=True, exist_ok=True)
    written = []
    for suffix, fmt in ((".report.json", "json"), (".table.txt", "text-table"), (".tsv", "tsv")):
        path = f"{prefix}{suffix}"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(emit_report(report, fmt))
        written.append(path)
    return written


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    validate_config(config, require_scorer=True)
    corpus = _load_corpus(config)
    scorer = _build_scorer(config)

    def progress(k, stats):
        print(f"k={k} accuracy={stats.accuracy:.4f} tested={stats.n_tested} "
              f"skipped={stats.n_skipped} failed={stats.n_failed}")

    try:
        report = kbst_sweep(
            corpus, scorer,
            ks=config["ks"], run_seed=config["run_seed"],
            max_sentences=config["max_sentences"], workers=config["workers"],
            samples=config["samples"], hard_fail=config["hard_fail"],
            config_snapshot=config, progress=progress,
        )
    finally:
        if hasattr(scorer, "handle"):
            scorer.handle.close()
    written = _write_report_files(report, config["output_prefix"])
    print(emit_report(report, "text-table"), end="")
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_shuffle(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    validate_config(config, require_corpus=True)
    corpus = _load_corpus(config)
    k = args.k
    if k < 1:
        raise ConfigError("block size must be positive")
    prefix = config["output_prefix"]
    path = f"{prefix}.instances.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            trimmed = truncate(doc, config["max_sentences"])
            if partition_blocks(trimmed, k).num_blocks < 2:
                fh.write(json.dumps(
                    {"doc_id": doc.id, "k": k,
                     "skipped_reason": "un-shufflable: single block"},
                    sort_keys=True, ensure_ascii=False,
                ) + "\n")
                continue
            seed = derive_seed(config["run_seed"], doc.id, k, 0)
            fh.write(instance_to_json(make_instance(trimmed, k, seed)) + "\n")
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_annotate_generate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    validate_config(config)
    corpus = _load_corpus(config)
    bundle, key = generate_bundle(
        corpus, ks=config["ks"], per_k_count=args.per_k,
        seed=config["run_seed"], max_sentences=config["max_sentences"],
    )
    prefix = config["output_prefix"]
    bundle_path, key_path = f"{prefix}.bundle.json", f"{prefix}.key.json"
    with open(bundle_path, "w", encoding="utf-8") as fh:
        fh.write(bundle_to_json(bundle))
    with open(key_path, "w", encoding="utf-8") as fh:
        fh.write(key_to_json(key))
    print(f"wrote {bundle_path} ({len(bundle.items)} items) and {key_path}", file=sys.stderr)
    return 0


def cmd_annotate_score(args: argparse.Namespace) -> int:
    if not os.path.exists(args.key):
        raise ConfigError(f"key file does not exist: {args.key}")
    if not os.path.exists(args.records):
        raise ConfigError(f"records file does not exist: {args.records}")
    with open(args.key, encoding="utf-8") as fh:
        key = key_from_json(fh.read())
    records = read_records_csv(args.records)
    report = score_annotations(records, key)
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if args.output_prefix:
        path = f"{args.output_prefix}.annotation.json"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {path}", file=sys.stderr)
    print(text, end="")
    return 0


def cmd_train_ngram(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    validate_config(config)
    corpus = _load_corpus(config)
    model = train_ngram(
        corpus,
        order=config["scorer_options"].get("order") or 3,
        smoothing=config["scorer_options"].get("smoothing"),
    )
    path = f"{config['output_prefix']}.ngram.json.gz"
    save_model(model, path)
    print(f"wrote {path} (order {model.order}, vocabulary {len(model.vocabulary)})",
          file=sys.stderr)
    return 0


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--corpus", help="corpus path (JSONL file, text file, or directory)")
    p.add_argument("--format", choices=["jsonl", "text"], help="corpus format")
    p.add_argument("--pre-segmented", dest="pre_segmented",
                   action=argparse.BooleanOptionalAction, default=None,
                   help="trust the 'sentences' field instead of re-segmenting")
    p.add_argument("--seed", type=int, help=f"run seed (fallback: ${SEED_ENV_VAR}, then 0)")
    p.add_argument("--max-sentences", dest="max_sentences", type=int,
                   help="truncate documents to this many sentences (default 20)")
    p.add_argument("--output-prefix", dest="output_prefix",
                   help="path prefix for every file this run writes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kblock",
        description="Zero-shot coherence evaluation via the k-block shuffle test",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="run a k-block shuffle-test sweep")
    _add_corpus_flags(p)
    p.add_argument("--scorer", choices=["ngram", "external"])
    p.add_argument("--ks", help="comma-separated block sizes, e.g. 1,2,3,4,5")
    p.add_argument("--order", type=int, help="ngram order (default 3)")
    p.add_argument("--smoothing", help="comma-separated interpolation weights per order")
    p.add_argument("--train", help="training corpus for the ngram scorer (original text only)")
    p.add_argument("--model", help="pre-trained ngram model file")
    p.add_argument("--provider-cmd", dest="provider_cmd",
                   help="external provider command line (stdio protocol)")
    p.add_argument("--provider-tcp", dest="provider_tcp",
                   help="external provider address host:port")
    p.add_argument("--mode", choices=["generative", "mlm"], help="external scoring mode")
    p.add_argument("--timeout", type=float, help="per-document provider timeout in seconds")
    p.add_argument("--window-tokens", dest="window_tokens", type=int)
    p.add_argument("--overlap", dest="overlap_fraction", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--samples", type=int,
                   help="shuffles per document per k, for variance estimation (default 1)")
    p.add_argument("--hard-fail", dest="hard_fail",
                   action=argparse.BooleanOptionalAction, default=None,
                   help="abort the run on any scorer failure (CI mode)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("shuffle", help="write shuffle instances for inspection")
    _add_corpus_flags(p)
    p.add_argument("--k", type=int, required=True, help="block size")
    p.set_defaults(func=cmd_shuffle)

    p = sub.add_parser("annotate", help="human-annotation bundles and scoring")
    annotate_sub = p.add_subparsers(dest="annotate_command", required=True)

    g = annotate_sub.add_parser("generate", help="emit a blinded bundle and its answer key")
    _add_corpus_flags(g)
    g.add_argument("--ks", help="comma-separated block sizes")
    g.add_argument("--per-k", dest="per_k", type=int, required=True,
                   help="items per block size")
    g.set_defaults(func=cmd_annotate_generate)

    s = annotate_sub.add_parser("score", help="score annotation records against a key")
    s.add_argument("--key", required=True, help="answer key JSON file")
    s.add_argument("--records", required=True,
                   help="CSV with header item_id,annotator_id,choice,elapsed_seconds")
    s.add_argument("--output-prefix", dest="output_prefix")
    s.set_defaults(func=cmd_annotate_score)

    p = sub.add_parser("train-ngram", help="train and save the built-in ngram model")
    _add_corpus_flags(p)
    p.add_argument("--order", type=int, help="ngram order (default 3)")
    p.add_argument("--smoothing", help="comma-separated interpolation weights per order")
    p.set_defaults(func=cmd_train_ngram)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
