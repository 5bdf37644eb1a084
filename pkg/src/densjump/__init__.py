"""Bayesian regression of density discontinuities at a known threshold."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    DegenerateWindowError,
    NumericalError,
    SeparationError,
)
from .model import (
    DEFAULT_LINK,
    Dataset,
    LinkConfig,
    ParamVector,
    Window,
    build_dataset,
    full_window,
    log_likelihood,
    log_posterior_unnorm,
    log_prior,
    make_window,
)
from .sampler import ChainConfig, CoefSummary, PosteriorDraws, run_chain, summarize
from .selection import AdaptiveResult, DeltaGrid, FitReport, adaptive_fit, waic
from .synth import GenDesign, gen_dataset, named_design, standardized_truth
from .baseline import BorFit, Method, fit_bor
from .harness import EstimatorSpec, MetricRow, StudyResult, run_study
from .ingest import IngestSpec, dump_dataset, ingest

__all__ = [
    "__version__",
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "DegenerateWindowError",
    "NumericalError",
    "SeparationError",
    "DEFAULT_LINK",
    "Dataset",
    "LinkConfig",
    "ParamVector",
    "Window",
    "build_dataset",
    "full_window",
    "log_likelihood",
    "log_posterior_unnorm",
    "log_prior",
    "make_window",
    "ChainConfig",
    "CoefSummary",
    "PosteriorDraws",
    "run_chain",
    "summarize",
    "AdaptiveResult",
    "DeltaGrid",
    "FitReport",
    "adaptive_fit",
    "waic",
    "GenDesign",
    "gen_dataset",
    "named_design",
    "standardized_truth",
    "BorFit",
    "Method",
    "fit_bor",
    "EstimatorSpec",
    "MetricRow",
    "StudyResult",
    "run_study",
    "IngestSpec",
    "dump_dataset",
    "ingest",
]
