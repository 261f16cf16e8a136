"""Command-line front end.

Subcommands::

    dparetogof test DATA [--stat K --stat T:0 ...]
    dparetogof loglog DATA
    dparetogof power-study CONFIG.json
    dparetogof sample --nu 2.5 --size 1000

Exit status: 0 on success, 2 for usage errors, 3 for unreadable or
malformed input, 4 for out-of-domain arguments or data, 5 for numerical
failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import BootstrapConfig, bootstrap_many
from .distribution import compress, sample
from .exceptions import ConvergenceError, DomainError, DParetoError, ParseError
from .io import ingest, loglog, write_freq_pairs, write_raw_counts
from .simulation import PowerStudyConfig, load_study_config, run_power_study
from .statistics import StatisticId

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_DOMAIN = 4
EXIT_NUMERICAL = 5

TOOL = "dparetogof"
REPORT_SCHEMA_VERSION = 1
PAPER_SCALE = {"mc": 1000, "b": 500}

log = logging.getLogger(TOOL)


def _dump_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(text, output):
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _stamp():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _stat_id(text):
    try:
        return StatisticId.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _cmd_test(args):
    table = ingest(args.data, args.input_format)
    cfg = BootstrapConfig(
        b=args.boot_reps if args.boot_reps is not None else 500,
        alpha=args.alpha,
        master_seed=args.seed,
        worker_count=args.workers,
    )
    ids = args.stat or [StatisticId("K")]
    reports = bootstrap_many(table, ids, cfg)
    doc = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool": TOOL,
        "tool_version": __version__,
        "command": "test",
        "seed": cfg.master_seed,
        "input": {"path": str(args.data), "n": table.n, "distinct_values": int(table.values.size)},
        "reports": [r.as_dict() for r in reports],
        "generated_at": _stamp(),
    }
    if args.format == "json":
        _emit(_dump_json(doc), args.output)
        return EXIT_OK
    fit = reports[0].fit
    lines = [
        f"data: {args.data}  n = {table.n}  distinct values = {table.values.size}",
        f"fitted exponent: {fit.nu_hat:.6g}" + ("  (degenerate, clamped)" if fit.degenerate else ""),
        f"bootstrap: b = {cfg.b}, alpha = {cfg.alpha:g}, seed = {cfg.master_seed}",
        f"{'statistic':<10}{'value':>14}{'critical':>14}{'p-value':>10}  decision",
    ]
    for r in reports:
        lines.append(
            f"{r.statistic.id.label:<10}{r.statistic.value:>14.6g}"
            f"{r.critical_value:>14.6g}{r.p_value:>10.4f}  {r.decision}"
        )
    sys.stdout.write("\n".join(lines) + "\n")
    if args.output:
        _emit(_dump_json(doc), args.output)
    return EXIT_OK


def _cmd_loglog(args):
    diag = loglog(ingest(args.data, args.input_format))
    if args.format == "csv":
        _emit(diag.to_csv(), args.output)
        return EXIT_OK
    if args.format == "json":
        doc = {"tool": TOOL, "tool_version": __version__, "command": "loglog", **diag.as_dict()}
        _emit(_dump_json(doc), args.output)
        return EXIT_OK
    sys.stdout.write(
        f"points: {len(diag.values)}\n"
        f"slope: {diag.ols_slope:.4f}\n"
        f"intercept: {diag.ols_intercept:.4f}\n"
        f"r_squared: {diag.r_squared:.4f}\n"
    )
    if args.output:
        _emit(diag.to_csv(), args.output)
    return EXIT_OK


def _cmd_power_study(args):
    cfg = load_study_config(args.config, workers=args.workers, seed=args.seed)
    mc = PAPER_SCALE["mc"] if args.paper_scale else cfg.mc
    b = PAPER_SCALE["b"] if args.paper_scale else cfg.boot.b
    if args.mc is not None:
        mc = args.mc
    if args.boot_reps is not None:
        b = args.boot_reps
    alpha = args.alpha if args.alpha is not None else cfg.boot.alpha
    cfg = PowerStudyConfig(
        n=cfg.n,
        mc=mc,
        boot=BootstrapConfig(b=b, alpha=alpha, master_seed=cfg.boot.master_seed,
                             worker_count=cfg.boot.worker_count),
        tests=cfg.tests,
        alternatives=cfg.alternatives,
    )

    def progress(done, total):
        log.info("power study: %d/%d replicates", done, total)

    table = run_power_study(cfg, progress=progress)
    doc = table.as_dict()
    doc.update(tool=TOOL, command="power-study", generated_at=_stamp())
    if args.output:
        stem = Path(args.output)
        stem.with_suffix(".csv").write_text(table.to_csv(), encoding="utf-8")
        stem.with_suffix(".json").write_text(_dump_json(doc), encoding="utf-8")
    if args.format == "json":
        sys.stdout.write(_dump_json(doc))
    else:
        sys.stdout.write(table.to_csv())
        if args.format == "text":
            meta = table.metadata
            failed = sum(len(v) for v in meta["failures"].values())
            sys.stdout.write(
                f"# n={meta['n']} mc={meta['mc']} b={meta['b']} alpha={meta['alpha']:g} "
                f"seed={meta['master_seed']} failures={failed} "
                f"elapsed={meta['elapsed_seconds']:.1f}s\n"
            )
    return EXIT_OK


def _cmd_sample(args):
    rng = np.random.default_rng(args.seed)
    draws = sample(args.nu, args.size, rng)
    if args.format == "pairs":
        text = write_freq_pairs(compress(draws))
    else:
        text = write_raw_counts(draws)
    _emit(text, args.output)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master random seed (default 0, or the config value)")
    common.add_argument("--alpha", type=float, default=None, help="nominal level (default 0.05)")
    common.add_argument("--boot-reps", type=int, default=None, metavar="B",
                        help="bootstrap replicates (default 500, or the config value)")
    common.add_argument("--workers", type=int, default=None, help="worker processes (default 1)")
    common.add_argument("--output", "-o", default=None, help="write the machine-readable result here")
    common.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog=TOOL, description="Goodness-of-fit tests for the discrete Pareto law.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("data", help="input file")
        p.add_argument("--input-format", choices=("auto", "raw", "pairs"), default="auto",
                       help="raw: one value per line; pairs: 'value count' lines")

    p = sub.add_parser("test", parents=[common], help="bootstrap goodness-of-fit test")
    data_args(p)
    p.add_argument("--stat", action="append", type=_stat_id,
                   help="statistic: K, K:2, Z:<a>, T:<beta>, CN, SBEN (repeatable; default K)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("loglog", parents=[common], help="log-log frequency plot data and OLS slope")
    data_args(p)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(func=_cmd_loglog)

    p = sub.add_parser("power-study", parents=[common], help="Monte Carlo size and power study")
    p.add_argument("config", help="study description (JSON, schema_version 1)")
    p.add_argument("--mc", type=int, default=None, help="outer replicates per alternative")
    p.add_argument("--paper-scale", action="store_true", help="use mc=1000 and b=500")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(func=_cmd_power_study)

    p = sub.add_parser("sample", parents=[common], help="draw DPareto variates")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--size", "-n", type=int, required=True)
    p.add_argument("--format", choices=("raw", "pairs"), default="raw")
    p.set_defaults(func=_cmd_sample)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if args.command != "power-study":
        args.alpha = 0.05 if args.alpha is None else args.alpha
        args.workers = 1 if args.workers is None else args.workers
        args.seed = 0 if args.seed is None else args.seed
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"{TOOL}: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"{TOOL}: cannot read input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"{TOOL}: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"{TOOL}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DParetoError as exc:
        print(f"{TOOL}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
