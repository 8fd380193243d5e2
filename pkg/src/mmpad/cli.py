"""Command-line surface: ``score``, ``eval``, ``bench``, and ``synth``.

Exit codes: 0 success, 1 data error (bad file contents, series too short,
length mismatches), 2 usage error (bad flags, invalid generator settings).
Every command is deterministic for fixed flags, including ``--threads``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import metrics as metrics_mod
from .detector import DEFAULT_BUDGET, DetectorConfig, estimate_period, run_detector
from .errors import MmpadError
from .io import read_csv, read_scores, write_csv, write_scores
from .metrics import EvalReport, rank_table
from .synth import SynthConfig, generate

METRIC_NAMES = ("auc-pr", "auc-roc", "vus-pr", "vus-roc")

THREADS_ENV = "MMPAD_THREADS"


def _window_flag(text: str):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be an integer or 'auto', got {text!r}")
    if value < 3:
        raise argparse.ArgumentTypeError(f"window must be >= 3, got {value}")
    return value


def _budget_flag(text: str):
    if text == "none":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"budget must be a number or 'none', got {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"budget must be positive, got {value}")
    return value


def _threads_flag(text: str):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"threads must be an integer or 'auto', got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"threads must be >= 1, got {value}")
    return value


def _positive_int(name: str):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}")
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {value}")
        return value

    return parse


def _positive_float(name: str):
    def parse(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
        if value <= 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {value}")
        return value

    return parse


def _nonnegative_int(name: str):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}")
        if value < 0:
            raise argparse.ArgumentTypeError(f"{name} must be >= 0, got {value}")
        return value

    return parse


def _eval_window_flag(text: str):
    if text == "auto":
        return "auto"
    return _nonnegative_int("eval-window")(text)


def _metrics_flag(text: str):
    names = [name.strip() for name in text.split(",") if name.strip()]
    if not names:
        raise argparse.ArgumentTypeError("at least one metric is required")
    for name in names:
        if name not in METRIC_NAMES:
            raise argparse.ArgumentTypeError(
                f"unknown metric {name!r}; choose from {', '.join(METRIC_NAMES)}"
            )
    return names


def _default_threads():
    env = os.environ.get(THREADS_ENV)
    if env:
        return _threads_flag(env)
    return "auto"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmpad",
        description="Multidimensional matrix-profile anomaly detection toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score a series CSV")
    p_score.add_argument("--input", required=True, help="input series CSV")
    p_score.add_argument("--output", default=None, help="score CSV (default: <input>.scores.csv)")
    p_score.add_argument("--window", type=_window_flag, default="auto", help="subsequence length or 'auto'")
    p_score.add_argument("--k", type=_positive_int("k"), default=1, help="neighbor count")
    p_score.add_argument("--dim", type=_positive_float("dim"), default=1.0,
                         help="profile dimension cutoff (integer or fraction of d)")
    p_score.add_argument("--agg", choices=("pre", "post"), default="pre", help="aggregation mode")
    p_score.add_argument("--budget", type=_budget_flag, default=DEFAULT_BUDGET,
                         help="proxy-cost budget for downsampling, or 'none'")
    p_score.add_argument("--no-normalize", action="store_true", help="skip z-score normalization")
    p_score.add_argument("--threads", type=_threads_flag, default=_default_threads(),
                         help=f"worker count or 'auto' (default ${THREADS_ENV} or auto)")
    p_score.add_argument("--seedless-deterministic", action="store_true",
                         help="reserved; scoring is always deterministic")
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("eval", help="evaluate scores against labels")
    p_eval.add_argument("--input", required=True, help="labeled series CSV (must contain Label)")
    p_eval.add_argument("--scores", required=True, help="score CSV from the score command")
    p_eval.add_argument("--eval-window", type=_eval_window_flag, default="auto",
                        help="window for the range-aware metrics, or 'auto'")
    p_eval.add_argument("--metrics", type=_metrics_flag, default=list(METRIC_NAMES),
                        help="comma-separated subset of " + ",".join(METRIC_NAMES))
    p_eval.add_argument("--output", default="-",
                        help="report path ('-' for stdout; a .json suffix selects JSON)")
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", help="score and rank every dataset in a directory")
    p_bench.add_argument("--data-dir", required=True, help="directory of labeled CSVs")
    p_bench.add_argument("--config", required=True,
                         help="configs file: one 'name key=value ...' line per configuration")
    p_bench.add_argument("--report", required=True, help="JSON report path")
    p_bench.add_argument("--external-scores", default=None,
                         help="directory of <method>/<dataset>.csv score files to rank against")
    p_bench.add_argument("--threads", type=_threads_flag, default=_default_threads(),
                         help="worker count or 'auto'")
    p_bench.set_defaults(func=cmd_bench)

    p_synth = sub.add_parser("synth", help="generate a labeled synthetic series")
    p_synth.add_argument("--n", type=_positive_int("n"), default=2000)
    p_synth.add_argument("--d", type=_positive_int("d"), default=8)
    p_synth.add_argument("--k-dims", type=_positive_int("k-dims"), default=1,
                         help="number of anomalous channels")
    p_synth.add_argument("--period", type=_positive_int("period"), default=50)
    p_synth.add_argument("--anomaly-start", type=_nonnegative_int("anomaly-start"), default=1000)
    p_synth.add_argument("--anomaly-len", type=_nonnegative_int("anomaly-len"), default=50)
    p_synth.add_argument("--noise", type=float, default=0.1)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.set_defaults(func=cmd_synth)

    return parser


def cmd_score(args) -> int:
    cfg = DetectorConfig(
        window=args.window,
        k=args.k,
        dim_cutoff=args.dim,
        aggregation=args.agg,
        budget=args.budget,
        normalize=not args.no_normalize,
        threads=args.threads,
    )
    ts = read_csv(args.input)
    result = run_detector(ts, cfg)
    output = args.output
    if output is None:
        stem = Path(args.input)
        output = stem.with_name(stem.stem + ".scores.csv")
    write_scores(result.scores, output)
    print(
        f"window={result.window} ell_ex={result.ell_ex} "
        f"dim_cutoff={result.dim_cutoff} factor={result.factor}"
        + (" over_budget" if result.over_budget else ""),
        file=sys.stderr,
    )
    return 0


def _evaluate(scores, labels, names, ell) -> EvalReport:
    values = {}
    for name in names:
        if name == "auc-pr":
            values[name] = metrics_mod.auc_pr(scores, labels)
        elif name == "auc-roc":
            values[name] = metrics_mod.auc_roc(scores, labels)
        elif name == "vus-pr":
            values[name] = metrics_mod.vus_pr(scores, labels, ell)
        elif name == "vus-roc":
            values[name] = metrics_mod.vus_roc(scores, labels, ell)
    return EvalReport(metrics=values, eval_window=ell)


def cmd_eval(args) -> int:
    ts = read_csv(args.input)
    if ts.labels is None:
        raise MmpadError(f"{args.input}: no {'Label'!r} column; eval needs ground truth")
    scores = read_scores(args.scores)
    if scores.size != ts.n:
        raise MmpadError(
            f"length mismatch: {args.scores} has {scores.size} scores but "
            f"{args.input} has {ts.n} rows"
        )
    ell = args.eval_window
    if ell == "auto":
        ell = estimate_period(ts.values[:, 0])
    report = _evaluate(scores, ts.labels, args.metrics, ell)
    if args.output == "-":
        sys.stdout.write(report.to_text())
    elif str(args.output).endswith(".json"):
        Path(args.output).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        Path(args.output).write_text(report.to_text())
    return 0


def _parse_bench_configs(path: Path) -> list[tuple[str, DetectorConfig]]:
    known = {"window", "k", "dim", "agg", "budget", "normalize", "threads"}
    configs = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        name = parts[0]
        kwargs: dict = {}
        for part in parts[1:]:
            if "=" not in part:
                raise MmpadError(f"{path}: line {lineno}: expected key=value, got {part!r}")
            key, _, value = part.partition("=")
            if key not in known:
                raise MmpadError(
                    f"{path}: line {lineno}: unknown key {key!r}; known: {sorted(known)}"
                )
            if key == "window":
                kwargs["window"] = value if value == "auto" else int(value)
            elif key == "k":
                kwargs["k"] = int(value)
            elif key == "dim":
                kwargs["dim_cutoff"] = float(value)
            elif key == "agg":
                kwargs["aggregation"] = value
            elif key == "budget":
                kwargs["budget"] = None if value == "none" else float(value)
            elif key == "normalize":
                kwargs["normalize"] = value.lower() not in ("0", "false", "off")
            elif key == "threads":
                kwargs["threads"] = value if value == "auto" else int(value)
        configs.append((name, DetectorConfig(**kwargs)))
    if not configs:
        raise MmpadError(f"{path}: no configurations")
    names = [name for name, _ in configs]
    if len(set(names)) != len(names):
        raise MmpadError(f"{path}: duplicate configuration names")
    return configs


def cmd_bench(args) -> int:
    data_dir = Path(args.data_dir)
    datasets = sorted(p.name for p in data_dir.glob("*.csv"))
    if not datasets:
        raise MmpadError(f"{data_dir}: no CSV datasets")
    configs = _parse_bench_configs(Path(args.config))

    external: dict[str, Path] = {}
    if args.external_scores:
        root = Path(args.external_scores)
        for method_dir in sorted(p for p in root.iterdir() if p.is_dir()):
            external[method_dir.name] = method_dir

    per_dataset: dict[str, dict[str, dict[str, float]]] = {}
    failures: dict[str, dict[str, str]] = {}
    for dataset in datasets:
        ts = read_csv(data_dir / dataset)
        if ts.labels is None:
            failures.setdefault(dataset, {})["*"] = "no Label column"
            continue
        ell = estimate_period(ts.values[:, 0])
        cells: dict[str, dict[str, float]] = {}
        for name, cfg in configs:
            cfg_run = DetectorConfig(
                window=cfg.window, k=cfg.k, dim_cutoff=cfg.dim_cutoff,
                aggregation=cfg.aggregation, budget=cfg.budget,
                normalize=cfg.normalize, threads=args.threads,
            )
            try:
                scores = run_detector(ts, cfg_run).scores
                cells[name] = _evaluate(scores, ts.labels, METRIC_NAMES, ell).metrics
            except MmpadError as exc:
                failures.setdefault(dataset, {})[name] = str(exc)
        for method, method_dir in external.items():
            score_path = method_dir / dataset
            try:
                scores = read_scores(score_path)
                if scores.size != ts.n:
                    raise MmpadError(
                        f"{score_path}: {scores.size} scores for {ts.n} rows"
                    )
                cells[method] = _evaluate(scores, ts.labels, METRIC_NAMES, ell).metrics
            except (OSError, MmpadError) as exc:
                failures.setdefault(dataset, {})[method] = str(exc)
        per_dataset[dataset] = cells

    methods = [name for name, _ in configs] + sorted(external)
    complete = [
        ds for ds, cells in per_dataset.items() if all(m in cells for m in methods)
    ]
    summary = []
    if complete:
        vus_table = {
            m: {ds: per_dataset[ds][m]["vus-pr"] for ds in complete} for m in methods
        }
        summary = [
            {"method": s.method, "mean_vus_pr": s.mean_score, "mean_rank": s.mean_rank}
            for s in rank_table(vus_table)
        ]

    report = {
        "config_echo": {
            name: {
                "window": cfg.window, "k": cfg.k, "dim": cfg.dim_cutoff,
                "agg": cfg.aggregation, "budget": cfg.budget,
                "normalize": cfg.normalize,
            }
            for name, cfg in configs
        },
        "datasets": datasets,
        "ranked_datasets": complete,
        "per_dataset": per_dataset,
        "summary": summary,
        "failures": failures,
    }
    Path(args.report).write_text(json.dumps(report, indent=2) + "\n")

    for row in summary:
        print(
            f"{row['method']}\tmean_vus_pr={row['mean_vus_pr']:.6f}"
            f"\tmean_rank={row['mean_rank']:.4f}"
        )
    if failures:
        print(f"{sum(len(v) for v in failures.values())} failures recorded", file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    try:
        cfg = SynthConfig(
            n=args.n,
            d=args.d,
            k_anom=args.k_dims,
            anomaly_start=args.anomaly_start,
            anomaly_len=args.anomaly_len,
            base_period=args.period,
            noise_sigma=args.noise,
            seed=args.seed,
        )
    except MmpadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_csv(generate(cfg), args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MmpadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    raise SystemExit(main())
