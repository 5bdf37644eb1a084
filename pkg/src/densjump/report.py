"""Versioned JSON reports with provenance, plus plot-data CSV emission.

Reports carry no timestamps: the same inputs and seed must produce the
same bytes.  Provenance instead records a hash of the run configuration
and a content-derived build identifier, so any report can be traced to
the exact code and settings that produced it.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np
import jsonschema

from . import __version__
from .errors import ConfigError
from .model import Dataset

SCHEMA_VERSION = "1.0"

_SUMMARY_ITEM = {
    "type": "object",
    "required": ["estimate", "lo95", "hi95"],
    "properties": {
        "estimate": {"type": "number"},
        "lo95": {"type": "number"},
        "hi95": {"type": "number"},
    },
    "additionalProperties": False,
}

_SUMMARY_LIST = {"type": "array", "items": _SUMMARY_ITEM, "minItems": 1}

_WINDOW = {
    "type": "object",
    "required": ["delta", "t1", "t2", "n_window"],
    "properties": {
        "delta": {"type": ["number", "null"]},
        "t1": {"type": "number"},
        "t2": {"type": "number"},
        "n_window": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "kind", "provenance", "dataset"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"enum": ["fit", "select", "baseline", "study", "simulate"]},
        "provenance": {
            "type": "object",
            "required": ["config_hash", "seed", "build_id"],
            "properties": {
                "config_hash": {"type": "string", "pattern": "^[0-9a-f]{12}$"},
                "seed": {"type": "integer"},
                "build_id": {"type": "string"},
            },
            "additionalProperties": False,
        },
        "dataset": {
            "type": "object",
            "required": ["n", "p", "threshold", "standardization"],
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "p": {"type": "integer", "minimum": 1},
                "threshold": {
                    "type": "number",
                    "exclusiveMinimum": 0,
                    "exclusiveMaximum": 1,
                },
                "standardization": {
                    "type": "object",
                    "required": ["columns", "means", "sds"],
                    "properties": {
                        "columns": {"type": "array", "items": {"type": "string"}},
                        "means": {"type": "array", "items": {"type": "number"}},
                        "sds": {"type": "array", "items": {"type": "number"}},
                    },
                    "additionalProperties": False,
                },
                "drops": {
                    "type": "object",
                    "properties": {
                        "rows_read": {"type": "integer"},
                        "missing": {"type": "integer"},
                        "boundary": {"type": "integer"},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "window": _WINDOW,
        "coefficients": {
            "type": "object",
            "required": ["gamma1", "gamma2", "alpha"],
            "properties": {
                "gamma1": _SUMMARY_LIST,
                "gamma2": _SUMMARY_LIST,
                "alpha": _SUMMARY_LIST,
            },
            "additionalProperties": False,
        },
        "grid": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "selected_delta": {"type": "number"},
        "windows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "delta",
                    "n_window",
                    "waic_fit",
                    "waic_complexity",
                    "waic_total",
                    "alpha",
                ],
                "properties": {
                    "delta": {"type": "number"},
                    "n_window": {"type": "integer"},
                    "waic_fit": {"type": "number"},
                    "waic_complexity": {"type": "number"},
                    "waic_total": {"type": "number"},
                    "alpha": _SUMMARY_LIST,
                },
                "additionalProperties": False,
            },
        },
        "subset_size": {"type": "integer", "minimum": 1},
        "method": {"enum": ["logistic", "least_squares"]},
        "delta": {"type": "number"},
        "n_window": {"type": "integer"},
        "coefficients_table": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["estimate", "se", "lo95", "hi95"],
                "properties": {
                    "estimate": {"type": "number"},
                    "se": {"type": "number"},
                    "lo95": {"type": "number"},
                    "hi95": {"type": "number"},
                },
                "additionalProperties": False,
            },
        },
        "estimator": {"type": "string"},
        "replicates": {"type": "integer", "minimum": 1},
        "n_failed": {"type": "integer", "minimum": 0},
        "chain": {
            "type": "object",
            "required": ["total_iters", "burn_in", "keep"],
            "properties": {
                "total_iters": {"type": "integer"},
                "burn_in": {"type": "integer"},
                "keep": {"type": "integer"},
            },
            "additionalProperties": False,
        },
        "metrics": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "coef_index",
                    "true_value",
                    "bias",
                    "rmse",
                    "coverage",
                    "sign_recovery",
                ],
                "properties": {
                    "coef_index": {"type": "integer"},
                    "true_value": {"type": "number"},
                    "bias": {"type": "number"},
                    "rmse": {"type": "number"},
                    "coverage": {"type": "number"},
                    "sign_recovery": {"type": ["number", "null"]},
                },
                "additionalProperties": False,
            },
        },
        "trim_selection": {
            "type": ["object", "null"],
            "additionalProperties": {"type": "number"},
        },
        "generator": {"type": "object"},
        "outputs": {"type": "array", "items": {"type": "string"}},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "fit"}}},
            "then": {"required": ["window", "coefficients"]},
        },
        {
            "if": {"properties": {"kind": {"const": "select"}}},
            "then": {
                "required": [
                    "grid",
                    "selected_delta",
                    "windows",
                    "subset_size",
                    "coefficients",
                ]
            },
        },
        {
            "if": {"properties": {"kind": {"const": "baseline"}}},
            "then": {"required": ["method", "delta", "n_window", "coefficients_table"]},
        },
        {
            "if": {"properties": {"kind": {"const": "study"}}},
            "then": {
                "required": [
                    "estimator",
                    "replicates",
                    "n_failed",
                    "chain",
                    "metrics",
                    "trim_selection",
                ]
            },
        },
        {
            "if": {"properties": {"kind": {"const": "simulate"}}},
            "then": {"required": ["generator", "outputs"]},
        },
    ],
    "additionalProperties": False,
}


def config_hash(config: dict) -> str:
    """12-hex digest of the canonicalized run configuration."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def build_id() -> str:
    """Content-derived identifier of the installed package sources."""
    here = Path(__file__).resolve().parent
    digest = hashlib.sha256()
    for path in sorted(here.glob("*.py")):
        digest.update(path.name.encode("utf-8"))
        digest.update(path.read_bytes())
    return f"{__version__}+g{digest.hexdigest()[:12]}"


def provenance(config: dict, seed: int) -> dict:
    return {
        "config_hash": config_hash(config),
        "seed": int(seed),
        "build_id": build_id(),
    }


def dataset_block(data: Dataset) -> dict:
    names = data.meta.get("expanded_columns")
    if names is None:
        names = ["intercept"] + [f"x{k}" for k in range(1, data.p)]
    block = {
        "n": int(data.n),
        "p": int(data.p),
        "threshold": float(data.t),
        "standardization": {
            "columns": list(names),
            "means": [float(v) for v in data.column_means],
            "sds": [float(v) for v in data.column_sds],
        },
    }
    if "n_rows_read" in data.meta:
        block["drops"] = {
            "rows_read": int(data.meta["n_rows_read"]),
            "missing": int(data.meta["n_dropped_missing"]),
            "boundary": int(data.meta["n_dropped_boundary"]),
        }
    return block


def _summary_items(summaries):
    return [
        {"estimate": float(s.estimate), "lo95": float(s.lo95), "hi95": float(s.hi95)}
        for s in summaries
    ]


def coefficient_blocks(summaries, p: int) -> dict:
    if len(summaries) != 3 * p:
        raise ConfigError("expected summaries for all 3p coordinates")
    return {
        "gamma1": _summary_items(summaries[:p]),
        "gamma2": _summary_items(summaries[p : 2 * p]),
        "alpha": _summary_items(summaries[2 * p :]),
    }


def fit_report(data, window, summaries, config: dict, seed: int) -> dict:
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "fit",
        "provenance": provenance(config, seed),
        "dataset": dataset_block(data),
        "window": {
            "delta": None if window.delta is None else float(window.delta),
            "t1": float(window.t1),
            "t2": float(window.t2),
            "n_window": int(window.n_retained),
        },
        "coefficients": coefficient_blocks(summaries, data.p),
    }
    validate_report(report)
    return report


def select_report(data, result, config: dict, seed: int) -> dict:
    windows = []
    for delta in sorted(result.fits, reverse=True):
        rep = result.fits[delta]
        windows.append(
            {
                "delta": float(delta),
                "n_window": int(rep.n_window),
                "waic_fit": float(rep.waic.fit_term),
                "waic_complexity": float(rep.waic.complexity_term),
                "waic_total": float(rep.waic.total),
                "alpha": _summary_items(rep.summaries[2 * data.p :]),
            }
        )
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "select",
        "provenance": provenance(config, seed),
        "dataset": dataset_block(data),
        "grid": [float(d) for d in sorted(result.fits, reverse=True)],
        "selected_delta": float(result.selected_delta),
        "subset_size": int(result.selected.waic.subset_size),
        "windows": windows,
        "coefficients": coefficient_blocks(result.selected.summaries, data.p),
    }
    validate_report(report)
    return report


def baseline_report(data, fit, delta: float, config: dict, seed: int) -> dict:
    table = [
        {
            "estimate": float(est),
            "se": float(se),
            "lo95": float(lo),
            "hi95": float(hi),
        }
        for est, se, (lo, hi) in zip(
            fit.coefficients, fit.standard_errors, fit.ci95
        )
    ]
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "baseline",
        "provenance": provenance(config, seed),
        "dataset": dataset_block(data),
        "method": fit.method.value,
        "delta": float(delta),
        "n_window": int(fit.n_trimmed),
        "coefficients_table": table,
    }
    validate_report(report)
    return report


def study_report(result, config: dict, seed: int) -> dict:
    metrics = [
        {
            "coef_index": row.coef_index,
            "true_value": row.true_value,
            "bias": row.bias,
            "rmse": row.rmse,
            "coverage": row.coverage,
            "sign_recovery": row.sign_recovery,
        }
        for row in result.rows
    ]
    trim = None
    if result.trim_freq is not None:
        trim = {format(d, "g"): float(v) for d, v in result.trim_freq.items()}
    design = result.design
    dataset = {
        "n": int(design.n),
        "p": int(design.p),
        "threshold": float(design.t),
        "standardization": {
            "columns": ["intercept"] + [f"x{k}" for k in range(1, design.p)],
            # per-replicate constants differ; the study block keeps the
            # nominal generating scale (centered, unit) as reference
            "means": [0.0] * design.p,
            "sds": [1.0] * design.p,
        },
    }
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "study",
        "provenance": provenance(config, seed),
        "dataset": dataset,
        "estimator": result.estimator.label,
        "replicates": len(result.records),
        "n_failed": int(result.n_failed),
        "chain": {
            "total_iters": result.chain.total_iters,
            "burn_in": result.chain.burn_in,
            "keep": result.chain.keep,
        },
        "metrics": metrics,
        "trim_selection": trim,
        "generator": design.describe(),
    }
    validate_report(report)
    return report


def simulate_report(data, design, outputs, config: dict, seed: int) -> dict:
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "simulate",
        "provenance": provenance(config, seed),
        "dataset": dataset_block(data),
        "generator": design.describe(),
        "outputs": [str(p) for p in outputs],
    }
    validate_report(report)
    return report


def validate_report(report: dict) -> None:
    jsonschema.validate(report, REPORT_SCHEMA)


def write_report(report: dict, path) -> None:
    validate_report(report)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def destandardized_alpha(report: dict) -> np.ndarray:
    """Map reported (standardized-scale) alpha estimates to raw scale.

    With standardized columns z_k = (x_k - m_k) / s_k, the raw-scale
    coefficients are a_k / s_k with the intercept absorbing the shifts.
    """
    std = report["dataset"]["standardization"]
    means = np.asarray(std["means"])
    sds = np.asarray(std["sds"])
    est = np.array([item["estimate"] for item in report["coefficients"]["alpha"]])
    raw = est / sds
    raw[0] = est[0] - np.sum(est[1:] * means[1:] / sds[1:])
    return raw


# --- text rendering --------------------------------------------------------


def _coef_table(blocks) -> list:
    lines = [f"{'coef':<12} {'estimate':>10} {'2.5%':>10} {'97.5%':>10}"]
    for name in ("gamma1", "gamma2", "alpha"):
        for k, item in enumerate(blocks[name]):
            lines.append(
                f"{f'{name}[{k}]':<12} "
                f"{item['estimate']:>10.4f} {item['lo95']:>10.4f} "
                f"{item['hi95']:>10.4f}"
            )
    return lines


def render_text(report: dict) -> str:
    kind = report["kind"]
    prov = report["provenance"]
    ds = report["dataset"]
    head = [
        f"{kind} report (schema {report['schema_version']}, "
        f"build {prov['build_id']}, config {prov['config_hash']}, "
        f"seed {prov['seed']})",
        f"n={ds['n']} p={ds['p']} threshold={ds['threshold']:g}",
    ]
    body = []
    if kind == "fit":
        w = report["window"]
        delta = "full" if w["delta"] is None else format(w["delta"], "g")
        body.append(
            f"window: delta={delta} [{w['t1']:g}, {w['t2']:g}] "
            f"n_window={w['n_window']}"
        )
        body += _coef_table(report["coefficients"])
    elif kind == "select":
        body.append(
            f"selected delta: {report['selected_delta']:g} "
            f"(common subset size {report['subset_size']})"
        )
        body.append(
            f"{'delta':>7} {'n_window':>9} {'waic_fit':>12} "
            f"{'complexity':>11} {'total':>12}"
        )
        for w in report["windows"]:
            marker = " *" if w["delta"] == report["selected_delta"] else ""
            body.append(
                f"{w['delta']:>7g} {w['n_window']:>9} {w['waic_fit']:>12.3f} "
                f"{w['waic_complexity']:>11.3f} {w['waic_total']:>12.3f}{marker}"
            )
        body += _coef_table(report["coefficients"])
    elif kind == "baseline":
        body.append(
            f"method: {report['method']} delta={report['delta']:g} "
            f"n_window={report['n_window']}"
        )
        body.append(f"{'coef':>6} {'estimate':>10} {'se':>10} {'lo95':>10} {'hi95':>10}")
        for k, item in enumerate(report["coefficients_table"]):
            body.append(
                f"{k:>6} {item['estimate']:>10.4f} {item['se']:>10.4f} "
                f"{item['lo95']:>10.4f} {item['hi95']:>10.4f}"
            )
    elif kind == "study":
        body.append(
            f"estimator: {report['estimator']} replicates={report['replicates']} "
            f"failed={report['n_failed']}"
        )
        body.append(
            f"{'j':>3} {'true':>7} {'bias':>8} {'rmse':>7} {'cvrg':>5} {'sign':>5}"
        )
        for row in report["metrics"]:
            sign = "--" if row["sign_recovery"] is None else f"{row['sign_recovery']:.0f}"
            body.append(
                f"{row['coef_index'] + 1:>3} {row['true_value']:>7.2f} "
                f"{row['bias']:>8.3f} {row['rmse']:>7.2f} "
                f"{row['coverage']:>5.0f} {sign:>5}"
            )
        if report["trim_selection"] is not None:
            shares = "/".join(f"{v:.0f}" for v in report["trim_selection"].values())
            body.append(f"trim selection %: {shares}")
    elif kind == "simulate":
        gen = report["generator"]
        body.append(
            f"generator: base={gen['base_kind']} kernel={gen['kernel_kind']} "
            f"n={gen['n']}"
        )
        body.append("outputs: " + ", ".join(report["outputs"]))
    return "\n".join(head + body) + "\n"


# --- plot-data CSVs --------------------------------------------------------

PROFILE_GRID = np.linspace(-2.0, 2.0, 81)
CONTOUR_GRID = np.linspace(-2.0, 2.0, 61)


def profile_rows(alpha_draws: np.ndarray, names) -> list:
    """Jump-size posterior profile per covariate.

    One standardized covariate sweeps [-2, 2] with the others at 0, so
    the jump is max(a0 + ak * u, 0) per draw; rows carry the posterior
    median and central 95% band at each grid point.
    """
    draws = np.asarray(alpha_draws, dtype=np.float64)
    p = draws.shape[1]
    if len(names) != p:
        raise ConfigError("need one name per alpha coordinate")
    rows = []
    for k in range(1, p):
        surf = np.maximum(draws[:, [0]] + np.outer(draws[:, k], PROFILE_GRID), 0.0)
        lo, med, hi = np.percentile(surf, [2.5, 50.0, 97.5], axis=0)
        for i, u in enumerate(PROFILE_GRID):
            rows.append((names[k], float(u), float(lo[i]), float(med[i]), float(hi[i])))
    return rows


def write_profiles_csv(alpha_draws, names, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["covariate", "u", "j_lo", "j_med", "j_hi"])
        for name, u, lo, med, hi in profile_rows(alpha_draws, names):
            writer.writerow(
                [name, f"{u:.10g}", f"{lo:.10g}", f"{med:.10g}", f"{hi:.10g}"]
            )


def contour_rows(alpha_draws: np.ndarray, names, i: int = 1, j: int = 2) -> list:
    """Posterior-median jump surface over two standardized covariates.

    Remaining covariates sit at 0.  Each row is (u_i, u_j, median jump,
    flag for the entirely-flat region where the median jump is zero).
    """
    draws = np.asarray(alpha_draws, dtype=np.float64)
    p = draws.shape[1]
    if p < 3:
        raise ConfigError("contour output needs at least two non-intercept covariates")
    if not (1 <= i < p and 1 <= j < p and i != j):
        raise ConfigError("contour axes must be distinct non-intercept indices")
    rows = []
    for u1 in CONTOUR_GRID:
        group = draws[:, 0] + draws[:, i] * u1
        surf = np.maximum(group[:, None] + np.outer(draws[:, j], CONTOUR_GRID), 0.0)
        med = np.median(surf, axis=0)
        for c, u2 in enumerate(CONTOUR_GRID):
            rows.append(
                (names[i], names[j], float(u1), float(u2), float(med[c]),
                 int(med[c] == 0.0))
            )
    return rows


def write_contour_csv(alpha_draws, names, path, i: int = 1, j: int = 2) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["covariate_1", "covariate_2", "u1", "u2", "j_med", "is_zero"])
        for n1, n2, u1, u2, med, flag in contour_rows(alpha_draws, names, i, j):
            writer.writerow([n1, n2, f"{u1:.10g}", f"{u2:.10g}", f"{med:.10g}", flag])
