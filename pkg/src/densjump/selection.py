"""Trimming-window selection via common-subset WAIC.

Every candidate window in the grid gets its own MCMC fit; each fit is
scored by WAIC summed over the subset S* of samples inside the smallest
window, so that all scores integrate over the same observations and are
comparable. The grid member with the smallest total wins, ties going to
the larger window.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, DataError, NumericalError
from .model import DEFAULT_LINK, Dataset, Window, log_density_terms, make_window
from .sampler import ChainConfig, CoefSummary, PosteriorDraws, run_chain, summarize

__all__ = [
    "DeltaGrid",
    "WaicReport",
    "FitReport",
    "AdaptiveResult",
    "DEFAULT_DELTAS",
    "common_subset",
    "waic",
    "waic_from_matrix",
    "adaptive_fit",
]

DEFAULT_DELTAS = (0.5, 0.4, 0.25, 0.1)


@dataclass(frozen=True)
class DeltaGrid:
    """Descending grid of candidate half-widths; the smallest defines S*."""

    deltas: tuple = DEFAULT_DELTAS

    def __post_init__(self):
        ds = tuple(float(d) for d in self.deltas)
        if len(ds) == 0:
            raise ConfigError("delta grid must be nonempty")
        if len(set(ds)) != len(ds):
            raise ConfigError("delta grid values must be distinct")
        if any(d <= 0.0 for d in ds):
            raise ConfigError("delta grid values must be positive")
        object.__setattr__(self, "deltas", tuple(sorted(ds, reverse=True)))

    @property
    def smallest(self) -> float:
        return self.deltas[-1]

    def validate_for(self, t: float) -> None:
        half = min(t, 1.0 - t)
        if self.deltas[0] > half + 1e-12:
            raise ConfigError(
                f"delta {self.deltas[0]} exceeds the distance from t={t} "
                "to the nearer boundary"
            )


@dataclass(frozen=True)
class WaicReport:
    """Eq-style decomposition: total = fit_term + complexity_term."""

    fit_term: float
    complexity_term: float
    subset_size: int

    @property
    def total(self) -> float:
        return self.fit_term + self.complexity_term


@dataclass
class FitReport:
    """One window's fit: coefficient summaries plus its WAIC score."""

    delta: float
    n_window: int
    summaries: list
    waic: WaicReport
    draws: PosteriorDraws | None = None


@dataclass
class AdaptiveResult:
    fits: dict = field(default_factory=dict)  # delta -> FitReport
    selected_delta: float = np.nan

    @property
    def selected(self) -> FitReport:
        return self.fits[self.selected_delta]


def common_subset(data: Dataset, grid: DeltaGrid) -> np.ndarray:
    """Indices of the samples inside the smallest window, |y_i - t| <= D*."""
    grid.validate_for(data.t)
    w_star = make_window(data, grid.smallest)
    if w_star.n_retained == 0:
        raise DataError(
            f"no samples within the smallest window delta={grid.smallest}"
        )
    return w_star.indices


def waic_from_matrix(log_dens: np.ndarray) -> WaicReport:
    """WAIC pieces from an M x |S| matrix of pointwise log densities."""
    if not np.all(np.isfinite(log_dens)):
        raise NumericalError("non-finite pointwise log density among draws")
    m = log_dens.shape[0]
    lme = logsumexp(log_dens, axis=0) - np.log(m)  # log posterior-mean density
    fit_term = -2.0 * float(np.sum(lme))
    if m == 1:
        complexity = 0.0
    else:
        complexity = 2.0 * float(np.sum(np.var(log_dens, axis=0, ddof=1)))
    return WaicReport(
        fit_term=fit_term,
        complexity_term=complexity,
        subset_size=log_dens.shape[1],
    )


def waic(draws: PosteriorDraws, data: Dataset, w: Window, S) -> WaicReport:
    """Common-subset WAIC of one fit.

    Densities are the fitted model's own (window-normalized) pointwise
    densities; the subset S only restricts which observations are summed,
    so it must be contained in the fit's window.
    """
    S = np.asarray(S, dtype=np.intp)
    if S.size == 0:
        raise DataError("WAIC subset is empty")
    if not np.all(np.isin(S, w.indices)):
        raise DataError("WAIC subset must be contained in the fit's window")
    log_dens = np.empty((draws.keep, S.size))
    for m in range(draws.keep):
        log_dens[m] = log_density_terms(draws.draws[m], data, w, S)
    return waic_from_matrix(log_dens)


def adaptive_fit(
    data: Dataset,
    grid: DeltaGrid,
    cfg: ChainConfig,
    link=DEFAULT_LINK,
    reference: np.ndarray | None = None,
    keep_draws: bool = False,
    rngs: list | None = None,
) -> AdaptiveResult:
    """Fit every window in the grid and select the WAIC minimizer.

    Each window runs its own chain on an independent stream derived from
    (cfg.seed, grid position) unless explicit generators are supplied.
    Ties in the total go to the larger delta.
    """
    grid.validate_for(data.t)
    s_star = common_subset(data, grid)
    if rngs is not None and len(rngs) != len(grid.deltas):
        raise ConfigError("need one generator per grid member")
    result = AdaptiveResult()
    best_delta = None
    best_total = np.inf
    for k, delta in enumerate(grid.deltas):
        w = make_window(data, delta)
        if rngs is None:
            rng = np.random.Generator(
                np.random.Philox(np.random.SeedSequence([cfg.seed, k]))
            )
        else:
            rng = rngs[k]
        try:
            draws = run_chain(data, w, cfg, link=link, rng=rng)
            rep = waic(draws, data, w, s_star)
        except Exception as exc:
            raise type(exc)(f"window delta={delta}: {exc}") from exc
        result.fits[delta] = FitReport(
            delta=delta,
            n_window=w.n_retained,
            summaries=summarize(draws, reference=reference),
            waic=rep,
            draws=draws if keep_draws else None,
        )
        if rep.total < best_total:
            best_total = rep.total
            best_delta = delta
    result.selected_delta = best_delta
    sizes = {r.waic.subset_size for r in result.fits.values()}
    assert sizes == {s_star.size}, "WAIC subsets diverged across windows"
    return result
