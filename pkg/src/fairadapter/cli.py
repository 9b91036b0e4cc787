"""Command-line front door: synth, train, eval, and ablate subcommands.

Exit codes: 0 success, 1 domain errors (invalid data, undefined metrics),
2 usage and I/O errors. Diagnostics go to stderr; data goes only to files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields

from .embeddings import (
    EmbeddingFormatError,
    SynthConfig,
    read_embedding_set,
    split_set,
    synth_generate,
    write_embedding_set,
)
from .metrics import (
    UndefinedMetricError,
    evaluate_report,
    predict_set,
    report_to_dict,
    write_category_table,
    write_predictions,
    write_report,
)
from .nn import read_checkpoint, write_checkpoint
from .training import VARIANTS, TrainConfig, save_history, train


class ConfigError(ValueError):
    """Bad configuration file or out-of-range setting."""


@dataclass
class RunConfig:
    """Merged run settings: command-line flag > config file > default."""

    epochs: int = 40
    learning_rate: float = 0.0002
    hidden: int | None = None
    seed: int = 0
    threshold: float = 0.5
    pairs_per_round: int = 1
    others_per_hybrid: int = 1
    clamp_lambda: bool = False
    flip_falling_lambda: bool = False
    classify_fake_only: bool = False
    variant: str = "full"
    test_fraction: float = 0.3

    def to_train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            per_category_pairs_per_round=self.pairs_per_round,
            other_category_samples_per_hybrid=self.others_per_hybrid,
            hidden=self.hidden,
            seed=self.seed,
            lambda_clamp_nonnegative=self.clamp_lambda,
            flip_falling_lambda=self.flip_falling_lambda,
            classify_fake_only=self.classify_fake_only,
            threshold=self.threshold,
            variant=self.variant,
        )


_KNOWN_KEYS = {f.name for f in fields(RunConfig)}


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Read a flat JSON config file and merge command-line overrides.

    Unknown keys are rejected rather than ignored, so typos fail loudly.
    An empty file means "all defaults".
    """
    values: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read().strip()
        if text:
            try:
                parsed = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path}: invalid JSON ({exc.msg})") from exc
            if not isinstance(parsed, dict):
                raise ConfigError(f"config file {path}: expected a flat JSON object")
            for key in parsed:
                if key not in _KNOWN_KEYS:
                    raise ConfigError(f"config file {path}: unknown key {key!r}")
            values.update(parsed)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value

    cfg = RunConfig()
    for key, value in values.items():
        setattr(cfg, key, value)
    _validate_run_config(cfg)
    return cfg


def _validate_run_config(cfg: RunConfig) -> None:
    def fail(msg):
        raise ConfigError(f"configuration error: {msg}")

    if not isinstance(cfg.epochs, int) or isinstance(cfg.epochs, bool) or cfg.epochs < 0:
        fail(f"epochs must be a nonnegative integer, got {cfg.epochs!r}")
    if not isinstance(cfg.learning_rate, (int, float)) or cfg.learning_rate <= 0:
        fail(f"learning_rate must be positive, got {cfg.learning_rate!r}")
    if cfg.hidden is not None and (not isinstance(cfg.hidden, int) or cfg.hidden < 1):
        fail(f"hidden must be a positive integer, got {cfg.hidden!r}")
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool):
        fail(f"seed must be an integer, got {cfg.seed!r}")
    if not isinstance(cfg.threshold, (int, float)) or not 0.0 < cfg.threshold < 1.0:
        fail(f"threshold must lie in (0, 1), got {cfg.threshold!r}")
    for name in ("pairs_per_round", "others_per_hybrid"):
        v = getattr(cfg, name)
        if not isinstance(v, int) or v < 1:
            fail(f"{name} must be a positive integer, got {v!r}")
    for name in ("clamp_lambda", "flip_falling_lambda", "classify_fake_only"):
        if not isinstance(getattr(cfg, name), bool):
            fail(f"{name} must be a boolean")
    if cfg.variant not in VARIANTS:
        fail(f"variant must be one of {VARIANTS}, got {cfg.variant!r}")
    if not isinstance(cfg.test_fraction, (int, float)) or not 0.0 <= cfg.test_fraction <= 1.0:
        fail(f"test_fraction must lie in [0, 1], got {cfg.test_fraction!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairadapter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic embedding file")
    p.add_argument("--categories", type=int, default=4)
    p.add_argument("--real", type=int, default=100, help="natural records per category")
    p.add_argument("--fake", type=int, default=100, help="AI-generated records per category")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--shift", type=float, default=1.0, help="shared fake-direction magnitude")
    p.add_argument("--nuisance", type=float, default=1.0, help="per-category mean offset scale")
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--skew", type=str, default=None,
                   help="comma-separated per-category multipliers on the fake shift")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="flat JSON config file (seed applies here)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train a model on an embedding file")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--history", default=None, help="history output path (default: <out>.history)")
    _add_config_flags(p, with_variant=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on an embedding file")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="report output path")
    p.add_argument("--table", default=None, help="optional per-category CSV path")
    p.add_argument("--predictions", default=None, help="optional per-record dump path")
    p.add_argument("--config", default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("ablate", help="train and compare the four method variants")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="comparison table output path")
    p.add_argument("--test-fraction", type=float, default=None)
    _add_config_flags(p, with_variant=False)
    p.set_defaults(func=_cmd_ablate)

    return parser


def _add_config_flags(p: argparse.ArgumentParser, with_variant: bool) -> None:
    p.add_argument("--config", default=None, help="flat JSON config file")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None, dest="learning_rate")
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--pairs-per-round", type=int, default=None, dest="pairs_per_round")
    p.add_argument("--others-per-hybrid", type=int, default=None, dest="others_per_hybrid")
    p.add_argument("--clamp-lambda", action="store_true", default=None, dest="clamp_lambda")
    p.add_argument("--flip-falling-lambda", action="store_true", default=None,
                   dest="flip_falling_lambda")
    p.add_argument("--classify-fake-only", action="store_true", default=None,
                   dest="classify_fake_only")
    if with_variant:
        p.add_argument("--variant", choices=VARIANTS, default=None)


def run_cli(argv: list[str]) -> int:
    """Parse and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/diagnostics
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EmbeddingFormatError, UndefinedMetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


def _cmd_synth(args) -> int:
    skew = None
    if args.skew is not None:
        try:
            skew = tuple(float(s) for s in args.skew.split(","))
        except ValueError:
            raise ConfigError(f"--skew must be comma-separated numbers, got {args.skew!r}")
    run_cfg = load_config(args.config, {"seed": args.seed})
    cfg = SynthConfig(
        n_categories=args.categories,
        per_category_real=args.real,
        per_category_fake=args.fake,
        dim=args.dim,
        shared_fake_shift=args.shift,
        nuisance_scale=args.nuisance,
        noise_sigma=args.noise,
        skew=skew,
        seed=run_cfg.seed,
    )
    eset = synth_generate(cfg)
    write_embedding_set(eset, args.out)
    print(f"wrote {len(eset)} records ({cfg.n_categories} categories, dim {cfg.dim}) to {args.out}",
          file=sys.stderr)
    return 0


def _collect_overrides(args) -> dict:
    keys = ("epochs", "learning_rate", "hidden", "seed", "threshold", "pairs_per_round",
            "others_per_hybrid", "clamp_lambda", "flip_falling_lambda", "classify_fake_only",
            "variant", "test_fraction")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _cmd_train(args) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    data = read_embedding_set(args.data)
    model, history = train(data, cfg.to_train_config())
    write_checkpoint(model, args.out)
    history_path = args.history if args.history is not None else f"{args.out}.history"
    save_history(history, history_path)
    print(f"trained {cfg.variant} for {cfg.epochs} epochs ({len(history)} rounds); "
          f"checkpoint {args.out}, history {history_path}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    cfg = load_config(args.config, {"threshold": args.threshold})
    model = read_checkpoint(args.model)
    data = read_embedding_set(args.data)
    report = evaluate_report(model, data, cfg.threshold)
    write_report(report, args.out)
    if args.table is not None:
        write_category_table(report, args.table)
    if args.predictions is not None:
        write_predictions(predict_set(model, data, cfg.threshold), args.predictions)
    summary = report_to_dict(report)
    print(f"report {args.out}: mean category AUC {summary['mean_category_auc']}, "
          f"f_fpr {summary['f_fpr']}, f_auc {summary['f_auc']}", file=sys.stderr)
    return 0


def _cmd_ablate(args) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    data = read_embedding_set(args.data)
    train_split, test_split = split_set(data, cfg.test_fraction, cfg.seed)
    rows = []
    for variant in VARIANTS:
        tc = cfg.to_train_config()
        tc.variant = variant
        model, _ = train(train_split, tc)
        report = evaluate_report(model, test_split, cfg.threshold)
        rows.append((variant, report))
        print(f"{variant}: f_fpr {report.f_fpr}, f_auc {report.f_auc}, "
              f"mean category AUC {report.mean_category_auc}", file=sys.stderr)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("variant,f_fpr,f_auc,auc_gap,mean_category_auc,pooled_auc\n")
        for variant, report in rows:
            cells = [
                variant,
                _cell(report.f_fpr),
                _cell(report.f_auc),
                _cell(report.auc_gap),
                _cell(report.mean_category_auc),
                _cell(report.pooled_auc),
            ]
            fh.write(",".join(cells) + "\n")
    print(f"wrote ablation table to {args.out}", file=sys.stderr)
    return 0


def _cell(value) -> str:
    return "" if value is None else repr(value)
