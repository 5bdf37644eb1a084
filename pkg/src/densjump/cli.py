"""Command-line interface.

Subcommands cover the full workflow: simulate writes a synthetic CSV,
fit/select/baseline estimate from a CSV, and study runs a replicate
harness.  Every run lands in an output directory as a versioned JSON
report, a fixed-width text table, and (for posterior fits) plot-data
CSVs with rendered PNG companions.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .baseline import Method, fit_bor
from .errors import ConfigError, DataError, NumericalError
from .harness import DESK_CHAIN, metrics_csv, metrics_text, run_study
from .ingest import IngestSpec, dump_dataset, ingest
from .model import full_window, make_window
from .report import (
    baseline_report,
    fit_report,
    render_text,
    select_report,
    simulate_report,
    study_report,
    write_contour_csv,
    write_profiles_csv,
    write_report,
)
from .figures import render_contour, render_profiles
from .sampler import ChainConfig, dump_draws, run_chain, summarize
from .selection import DeltaGrid, adaptive_fit
from .synth import ALPHA_SETTINGS, DESIGN_KINDS, gen_dataset, named_design

OUT_DIR_ENV = "DENSJUMP_OUT_DIR"


def _add_out_dir(parser):
    parser.add_argument(
        "--out-dir",
        default=None,
        help=f"output directory (default: ${OUT_DIR_ENV} or the current directory)",
    )


def _add_chain_args(parser, iters, burn_in, keep):
    parser.add_argument("--iters", type=int, default=iters,
                        help="total sampler iterations")
    parser.add_argument("--burn-in", type=int, default=burn_in,
                        help="iterations discarded before storage")
    parser.add_argument("--keep", type=int, default=keep,
                        help="number of draws stored after thinning")
    parser.add_argument("--seed", type=int, default=0, help="random seed")


def _add_data_args(parser):
    parser.add_argument("--data", required=True, help="input CSV path")
    parser.add_argument("--response", default="y", help="response column name")
    parser.add_argument(
        "--covariates", required=True,
        help="comma-separated covariate column names, in design order",
    )
    parser.add_argument(
        "--threshold", type=float, required=True,
        help="known discontinuity location t in (0,1)",
    )
    parser.add_argument(
        "--transform", action="append", default=[], metavar="COL=SPEC",
        help="per-column transform: identity, log1p, or bspline:<df>; repeatable",
    )


def _resolve_out_dir(args) -> Path:
    chosen = args.out_dir or os.environ.get(OUT_DIR_ENV) or "."
    out = Path(chosen)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_transforms(items) -> dict:
    out = {}
    for item in items:
        col, sep, spec = item.partition("=")
        if not sep or not col or not spec:
            raise ConfigError(
                f"transform must look like column=spec, got {item!r}"
            )
        if col in out:
            raise ConfigError(f"duplicate transform for column {col!r}")
        out[col] = spec
    return out


def _ingest_spec(args) -> IngestSpec:
    return IngestSpec(
        path=args.data,
        response_column=args.response,
        covariate_columns=tuple(
            c.strip() for c in args.covariates.split(",") if c.strip()
        ),
        threshold=args.threshold,
        transforms=_parse_transforms(args.transform),
    )


def _chain_config(args) -> ChainConfig:
    return ChainConfig(
        total_iters=args.iters,
        burn_in=args.burn_in,
        keep=args.keep,
        seed=args.seed,
    )


def _column_names(data) -> list:
    names = data.meta.get("expanded_columns")
    if names is None:
        names = ["intercept"] + [f"x{k}" for k in range(1, data.p)]
    return list(names)


def _emit_posterior_outputs(out, data, draws, report):
    """Shared fit/select artifacts: table, draws, plot data, figures."""
    write_report(report, out / "report.json")
    (out / "table.txt").write_text(render_text(report), encoding="utf-8")
    dump_draws(draws, out / "draws.csv")
    alpha = draws.block("alpha")
    names = _column_names(data)
    write_profiles_csv(alpha, names, out / "profiles.csv")
    render_profiles(out / "profiles.csv", out / "profiles.png")
    if data.p >= 3:
        write_contour_csv(alpha, names, out / "contour.csv")
        render_contour(out / "contour.csv", out / "contour.png")


def _cmd_simulate(args) -> int:
    out = _resolve_out_dir(args)
    design = named_design(
        base=args.design, alpha=args.alpha, n=args.n,
        t=args.threshold, seed=args.seed,
    )
    data = gen_dataset(design)
    data_path = out / "data.csv"
    dump_dataset(data, data_path)
    config = {
        "command": "simulate", "design": args.design, "alpha": args.alpha,
        "n": args.n, "threshold": args.threshold, "seed": args.seed,
    }
    report = simulate_report(data, design, [data_path.name], config, args.seed)
    write_report(report, out / "report.json")
    (out / "table.txt").write_text(render_text(report), encoding="utf-8")
    return 0


def _fit_config(args, command: str) -> dict:
    config = {
        "command": command,
        "data": args.data,
        "response": args.response,
        "covariates": args.covariates,
        "transforms": sorted(args.transform),
        "threshold": args.threshold,
        "iters": args.iters,
        "burn_in": args.burn_in,
        "keep": args.keep,
        "seed": args.seed,
    }
    return config


def _cmd_fit(args) -> int:
    out = _resolve_out_dir(args)
    data = ingest(_ingest_spec(args))
    w = full_window(data) if args.delta is None else make_window(data, args.delta)
    cfg = _chain_config(args)
    draws = run_chain(data, w, cfg)
    summaries = summarize(draws)
    config = _fit_config(args, "fit")
    config["delta"] = args.delta
    report = fit_report(data, w, summaries, config, args.seed)
    _emit_posterior_outputs(out, data, draws, report)
    return 0


def _cmd_select(args) -> int:
    out = _resolve_out_dir(args)
    data = ingest(_ingest_spec(args))
    try:
        grid = DeltaGrid(tuple(float(v) for v in args.delta_grid.split(",")))
    except ValueError as exc:
        raise ConfigError(f"bad delta grid {args.delta_grid!r}: {exc}")
    cfg = _chain_config(args)
    result = adaptive_fit(data, grid, cfg, keep_draws=True)
    config = _fit_config(args, "select")
    config["delta_grid"] = args.delta_grid
    report = select_report(data, result, config, args.seed)
    _emit_posterior_outputs(out, data, result.selected.draws, report)
    return 0


def _cmd_baseline(args) -> int:
    out = _resolve_out_dir(args)
    data = ingest(_ingest_spec(args))
    method = Method(args.method)
    fit = fit_bor(data, args.delta, method)
    config = {
        "command": "baseline",
        "data": args.data,
        "response": args.response,
        "covariates": args.covariates,
        "transforms": sorted(args.transform),
        "threshold": args.threshold,
        "delta": args.delta,
        "method": args.method,
        "seed": args.seed,
    }
    report = baseline_report(data, fit, args.delta, config, args.seed)
    write_report(report, out / "report.json")
    (out / "table.txt").write_text(render_text(report), encoding="utf-8")
    return 0


def _cmd_study(args) -> int:
    out = _resolve_out_dir(args)
    design = named_design(
        base=args.design, alpha=args.alpha, n=args.n,
        t=args.threshold, seed=args.seed,
    )
    chain = _chain_config(args)
    result = run_study(
        design,
        args.estimator,
        replicates=args.replicates,
        seed=args.seed,
        chain=chain,
        out_path=out / "records.ndjson",
    )
    config = {
        "command": "study", "design": args.design, "alpha": args.alpha,
        "n": args.n, "threshold": args.threshold, "estimator": args.estimator,
        "replicates": args.replicates, "iters": args.iters,
        "burn_in": args.burn_in, "keep": args.keep, "seed": args.seed,
    }
    report = study_report(result, config, args.seed)
    write_report(report, out / "report.json")
    metrics_csv(result.rows, out / "metrics.csv")
    (out / "table.txt").write_text(metrics_text(result), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densjump",
        description="Covariate-dependent density discontinuity estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic dataset CSV")
    sim.add_argument("--design", default="matching", choices=sorted(DESIGN_KINDS),
                     help="generating condition")
    sim.add_argument("--alpha", default="easy", choices=sorted(ALPHA_SETTINGS),
                     help="jump coefficient setting")
    sim.add_argument("--n", type=int, default=5000, help="sample size")
    sim.add_argument("--threshold", type=float, default=0.5,
                     help="discontinuity location")
    sim.add_argument("--seed", type=int, default=0, help="random seed")
    _add_out_dir(sim)
    sim.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser("fit", help="posterior fit on one window")
    _add_data_args(fit)
    fit.add_argument("--delta", type=float, default=None,
                     help="window half-width (default: no trimming)")
    _add_chain_args(fit, 10000, 5000, 1000)
    _add_out_dir(fit)
    fit.set_defaults(func=_cmd_fit)

    sel = sub.add_parser("select", help="adaptive window selection fit")
    _add_data_args(sel)
    sel.add_argument("--delta-grid", default="0.5,0.4,0.25,0.1",
                     help="comma-separated candidate half-widths")
    _add_chain_args(sel, 10000, 5000, 1000)
    _add_out_dir(sel)
    sel.set_defaults(func=_cmd_select)

    base = sub.add_parser("baseline", help="binarized regression baseline")
    _add_data_args(base)
    base.add_argument("--delta", type=float, required=True,
                      help="window half-width")
    base.add_argument("--method", default="logistic",
                      choices=[m.value for m in Method],
                      help="regression flavor")
    base.add_argument("--seed", type=int, default=0,
                      help="recorded in provenance; the fit is deterministic")
    _add_out_dir(base)
    base.set_defaults(func=_cmd_baseline)

    study = sub.add_parser("study", help="replicate simulation study")
    study.add_argument("--design", default="matching",
                       choices=sorted(DESIGN_KINDS), help="generating condition")
    study.add_argument("--alpha", default="easy",
                       choices=sorted(ALPHA_SETTINGS),
                       help="jump coefficient setting")
    study.add_argument("--n", type=int, default=2000,
                       help="sample size per replicate")
    study.add_argument("--threshold", type=float, default=0.5,
                       help="discontinuity location")
    study.add_argument("--estimator", required=True,
                       help="bayes-full | bayes-trimmed:<d> | "
                            "bayes-adaptive[:<d1,d2,...>] | bolr:<d> | ols:<d>")
    study.add_argument("--replicates", type=int, default=20,
                       help="number of replicate datasets")
    _add_chain_args(study, DESK_CHAIN.total_iters, DESK_CHAIN.burn_in,
                    DESK_CHAIN.keep)
    _add_out_dir(study)
    study.set_defaults(func=_cmd_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return 3
    except (NumericalError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
