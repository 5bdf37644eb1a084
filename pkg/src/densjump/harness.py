"""Replicate-study driver: bias / rmse / coverage / sign-recovery metrics.

One study = one generating condition x one estimator x R replicates.
Replicate r's dataset stream depends only on (seed, r), so different
estimators called with the same study seed see identical data, making
head-to-head comparisons paired.  Per-replicate results are appended to
a line-delimited JSON file so long studies survive interruption.

Estimates are compared against the generating coefficients mapped onto
the standardized covariate scale of each replicate (an exact linear
map); the displayed true_value column keeps the nominal raw-scale
coefficient.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .baseline import Method, fit_bor
from .errors import ConfigError, DataError, NumericalError
from .model import DEFAULT_LINK, full_window, make_window
from .sampler import ChainConfig, run_chain, summarize
from .selection import DeltaGrid, adaptive_fit
from .synth import GenDesign, default_rng, gen_dataset, standardized_truth

DESK_REPLICATES = 20
DESK_N = 2000
DESK_CHAIN = ChainConfig(total_iters=4000, burn_in=2000, keep=500, seed=0)
FULL_CHAIN = ChainConfig(total_iters=10000, burn_in=5000, keep=1000, seed=0)

_BAYES_KINDS = ("bayes-full", "bayes-trimmed", "bayes-adaptive")
_BOR_KINDS = ("bolr", "ols")


def _delta_key(delta: float) -> str:
    return format(float(delta), "g")


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator a study runs; parsed from a compact string form.

    Accepted forms: "bayes-full", "bayes-trimmed:<delta>",
    "bayes-adaptive", "bayes-adaptive:<d1,d2,...>", "bolr:<delta>",
    "ols:<delta>".
    """

    kind: str
    delta: float | None = None
    grid: DeltaGrid | None = None

    def __post_init__(self):
        if self.kind not in _BAYES_KINDS + _BOR_KINDS:
            raise ConfigError(f"unknown estimator kind {self.kind!r}")
        if self.kind in ("bayes-trimmed",) + _BOR_KINDS and self.delta is None:
            raise ConfigError(f"{self.kind} needs a trimming half-width")
        if self.kind == "bayes-adaptive" and self.grid is None:
            object.__setattr__(self, "grid", DeltaGrid())

    @classmethod
    def from_string(cls, text: str) -> "EstimatorSpec":
        kind, _, arg = text.strip().partition(":")
        if kind == "bayes-adaptive" and arg:
            return cls(kind, grid=DeltaGrid(tuple(float(v) for v in arg.split(","))))
        if kind in ("bayes-trimmed",) + _BOR_KINDS:
            if not arg:
                raise ConfigError(f"{kind} needs a delta, e.g. {kind}:0.25")
            return cls(kind, delta=float(arg))
        if arg:
            raise ConfigError(f"{kind} takes no argument")
        return cls(kind)

    @property
    def label(self) -> str:
        if self.kind == "bayes-adaptive":
            return "bayes-adaptive:" + ",".join(_delta_key(d) for d in self.grid.deltas)
        if self.delta is not None:
            return f"{self.kind}:{_delta_key(self.delta)}"
        return self.kind


@dataclass(frozen=True)
class MetricRow:
    """One coefficient's replicate-aggregated performance figures."""

    coef_index: int
    true_value: float
    bias: float
    rmse: float
    coverage: float
    sign_recovery: float | None

    def __post_init__(self):
        if self.rmse + 1e-12 < abs(self.bias):
            raise ConfigError("rmse cannot undercut |bias|")
        if not 0.0 <= self.coverage <= 100.0:
            raise ConfigError("coverage is a percentage")
        if self.sign_recovery is not None and not 0.0 <= self.sign_recovery <= 100.0:
            raise ConfigError("sign recovery is a percentage")
        if (self.sign_recovery is None) != (self.true_value == 0.0):
            raise ConfigError("sign recovery is not-applicable exactly for true 0")


@dataclass
class StudyResult:
    design: GenDesign
    estimator: EstimatorSpec
    seed: int
    chain: ChainConfig
    records: list
    rows: list
    trim_freq: dict | None
    n_failed: int


def _alpha_block(summaries, p):
    alpha = summaries[2 * p : 3 * p]
    return (
        [s.estimate for s in alpha],
        [s.lo95 for s in alpha],
        [s.hi95 for s in alpha],
    )


def _estimate_one(spec, data, chain, seed, r, link):
    p = data.p
    if spec.kind == "bolr":
        fit = fit_bor(data, spec.delta, Method.LOGISTIC)
    elif spec.kind == "ols":
        fit = fit_bor(data, spec.delta, Method.LEAST_SQUARES)
    else:
        fit = None
    if fit is not None:
        return {
            "estimates": [float(v) for v in fit.coefficients],
            "lo95": [float(v) for v in fit.ci95[:, 0]],
            "hi95": [float(v) for v in fit.ci95[:, 1]],
            "n_window": fit.n_trimmed,
        }

    if spec.kind == "bayes-adaptive":
        rngs = [default_rng([seed, r, k]) for k in range(len(spec.grid.deltas))]
        res = adaptive_fit(data, spec.grid, chain, link=link, rngs=rngs)
        est, lo, hi = _alpha_block(res.selected.summaries, p)
        per_delta = {}
        for d, rep in res.fits.items():
            de, dl, dh = _alpha_block(rep.summaries, p)
            per_delta[_delta_key(d)] = {
                "estimates": de,
                "lo95": dl,
                "hi95": dh,
                "n_window": rep.n_window,
                "waic_total": rep.waic.total,
                "waic_fit": rep.waic.fit_term,
                "waic_complexity": rep.waic.complexity_term,
            }
        return {
            "estimates": est,
            "lo95": lo,
            "hi95": hi,
            "selected_delta": res.selected_delta,
            "per_delta": per_delta,
        }

    if spec.kind == "bayes-full":
        w = full_window(data)
    else:
        w = make_window(data, spec.delta)
    draws = run_chain(data, w, chain, link=link, rng=default_rng([seed, r, 0]))
    est, lo, hi = _alpha_block(summarize(draws), p)
    return {"estimates": est, "lo95": lo, "hi95": hi, "n_window": w.n_retained}


def _study_header(design, spec, seed, chain):
    return {
        "study": {
            "generator": design.describe(),
            "estimator": spec.label,
            "seed": seed,
            "chain": {
                "total_iters": chain.total_iters,
                "burn_in": chain.burn_in,
                "keep": chain.keep,
            },
        }
    }


def _load_records(path, header):
    """Existing per-replicate records, keyed by replicate index."""
    done = {}
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            return done
        if json.loads(first) != header:
            raise DataError(
                f"{path} belongs to a different study configuration; "
                "remove it or point the study elsewhere"
            )
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                done[rec["replicate"]] = rec
    return done


def aggregate_records(records, alpha_raw, pick=None):
    """Fold per-replicate records into MetricRow entries.

    `pick` selects which estimate block to score (defaults to the
    top-level one); records flagged as failed are skipped and counted.
    """
    alpha_raw = np.asarray(alpha_raw, dtype=float)
    p = alpha_raw.size
    ok = [r for r in records if not r.get("failed")]
    n_failed = len(records) - len(ok)
    if not ok:
        raise DataError("every replicate failed; nothing to aggregate")
    est = np.empty((len(ok), p))
    lo = np.empty((len(ok), p))
    hi = np.empty((len(ok), p))
    truth = np.empty((len(ok), p))
    for i, rec in enumerate(ok):
        block = pick(rec) if pick is not None else rec
        est[i] = block["estimates"]
        lo[i] = block["lo95"]
        hi[i] = block["hi95"]
        truth[i] = rec["true_std"]
    diff = est - truth
    rows = []
    for j in range(p):
        covered = (lo[:, j] <= truth[:, j]) & (truth[:, j] <= hi[:, j])
        if alpha_raw[j] > 0.0:
            sign = 100.0 * float(np.mean(lo[:, j] > 0.0))
        elif alpha_raw[j] < 0.0:
            sign = 100.0 * float(np.mean(hi[:, j] < 0.0))
        else:
            sign = None
        rows.append(
            MetricRow(
                coef_index=j,
                true_value=float(alpha_raw[j]),
                bias=float(np.mean(diff[:, j])),
                rmse=float(np.sqrt(np.mean(diff[:, j] ** 2))),
                coverage=100.0 * float(np.mean(covered)),
                sign_recovery=sign,
            )
        )
    return rows, n_failed


def _selection_frequencies(records, grid):
    ok = [r for r in records if not r.get("failed")]
    counts = {d: 0 for d in grid.deltas}
    for rec in ok:
        counts[rec["selected_delta"]] += 1
    return {d: 100.0 * counts[d] / len(ok) for d in grid.deltas}


def run_study(
    design: GenDesign,
    estimator,
    replicates: int = DESK_REPLICATES,
    seed: int = 0,
    chain: ChainConfig = DESK_CHAIN,
    out_path=None,
    link=DEFAULT_LINK,
    progress=None,
) -> StudyResult:
    """Run (or resume) a replicate study and aggregate its metrics.

    Per-replicate failures are recorded and skipped during aggregation
    rather than aborting the study; a ConfigError still propagates since
    it means the study itself is set up wrong.
    """
    if isinstance(estimator, str):
        estimator = EstimatorSpec.from_string(estimator)
    if replicates < 1:
        raise ConfigError("need at least one replicate")
    header = _study_header(design, estimator, seed, chain)
    done = {}
    fh = None
    if out_path is not None:
        out_path = os.fspath(out_path)
        if os.path.exists(out_path):
            done = _load_records(out_path, header)
        else:
            os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
            with open(out_path, "w", encoding="utf-8") as new:
                new.write(json.dumps(header) + "\n")
        fh = open(out_path, "a", encoding="utf-8")
    try:
        records = []
        for r in range(replicates):
            if r in done:
                records.append(done[r])
                continue
            data = gen_dataset(design, rng=default_rng([seed, r]))
            truth = standardized_truth(design, data)
            rec = {"replicate": r, "true_std": [float(v) for v in truth]}
            try:
                rec.update(_estimate_one(estimator, data, chain, seed, r, link))
            except (DataError, NumericalError) as exc:
                rec.update(failed=True, error=f"{type(exc).__name__}: {exc}")
            records.append(rec)
            if fh is not None:
                fh.write(json.dumps(rec) + "\n")
                fh.flush()
            if progress is not None:
                tag = "failed" if rec.get("failed") else "ok"
                progress(f"replicate {r + 1}/{replicates} {tag}")
    finally:
        if fh is not None:
            fh.close()
    rows, n_failed = aggregate_records(records, design.alpha)
    trim = None
    if estimator.kind == "bayes-adaptive":
        trim = _selection_frequencies(records, estimator.grid)
    return StudyResult(
        design=design,
        estimator=estimator,
        seed=seed,
        chain=chain,
        records=records,
        rows=rows,
        trim_freq=trim,
        n_failed=n_failed,
    )


def rows_for_delta(result: StudyResult, delta: float):
    """Re-aggregate an adaptive study at one fixed window of its grid."""
    if result.estimator.kind != "bayes-adaptive":
        raise ConfigError("per-delta rows exist only for adaptive studies")
    key = _delta_key(delta)
    if delta not in result.estimator.grid.deltas:
        raise ConfigError(f"delta {delta} is not in the study grid")
    rows, _ = aggregate_records(
        result.records, result.design.alpha, pick=lambda rec: rec["per_delta"][key]
    )
    return rows


def metrics_csv(rows, path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["coef_index", "true_value", "bias", "rmse", "coverage", "sign_recovery"]
        )
        for row in rows:
            sign = "" if row.sign_recovery is None else f"{row.sign_recovery:.10g}"
            writer.writerow(
                [
                    row.coef_index,
                    f"{row.true_value:.10g}",
                    f"{row.bias:.10g}",
                    f"{row.rmse:.10g}",
                    f"{row.coverage:.10g}",
                    sign,
                ]
            )


def metrics_text(result: StudyResult) -> str:
    """Fixed-width per-coefficient table of bias, rmse, coverage, and sign."""
    lines = [
        f"estimator: {result.estimator.label}   replicates: "
        f"{len(result.records)}   failed: {result.n_failed}",
        f"{'j':>3} {'true':>7} {'bias':>8} {'rmse':>7} {'cvrg':>5} {'sign':>5}",
    ]
    for row in result.rows:
        sign = "--" if row.sign_recovery is None else f"{row.sign_recovery:.0f}"
        lines.append(
            f"{row.coef_index + 1:>3} {row.true_value:>7.2f} {row.bias:>8.3f} "
            f"{row.rmse:>7.2f} {row.coverage:>5.0f} {sign:>5}"
        )
    if result.trim_freq is not None:
        shares = "/".join(f"{v:.0f}" for v in result.trim_freq.values())
        order = ", ".join(_delta_key(d) for d in result.trim_freq)
        lines.append(f"trim selection % ({order}): {shares}")
    return "\n".join(lines) + "\n"
