"""Synthetic data generation for validation studies.

Responses follow f(y|x) proportional to b(y|x) * exp(-K(t-y) * max(x'a, 0)),
where b is a smooth base density and K a half kernel (K(u)=0 for u<0,
nonincreasing for u>=0, K(0)=1).  Draws are exact via rejection: propose
from b, accept with probability exp(-K*j).
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, NumericalError
from .model import Dataset, LinkConfig, DEFAULT_LINK, build_dataset, link_s

# per-draw cap on rejection attempts; unreachable for bounded jump sizes
_REJECTION_CAP = 10**6


class BaseKind(Enum):
    MATCHING_BETA = "matching_beta"
    MIXTURE_BETA = "mixture_beta"


class KernelKind(Enum):
    INDICATOR = "indicator"
    DECAYING_GAUSSIAN = "decaying_gaussian"


# coefficient settings used across all validation studies
TRUE_GAMMA1 = (-1.5, -0.4, -0.1, 0.0, 0.4, -0.1)
TRUE_GAMMA2 = (-3.0, -0.1, 0.2, -0.6, 0.0, -0.1)
EASY_ALPHA = (1.0, 0.3, 0.2, 0.2, 0.1, -0.1)
HARD_ALPHA = (0.5, 0.2, -0.2, 0.0, 0.0, 0.0)

DESIGN_KINDS = {
    "matching": (BaseKind.MATCHING_BETA, KernelKind.INDICATOR),
    "mixture": (BaseKind.MIXTURE_BETA, KernelKind.INDICATOR),
    "decaying": (BaseKind.MATCHING_BETA, KernelKind.DECAYING_GAUSSIAN),
}

ALPHA_SETTINGS = {"easy": EASY_ALPHA, "hard": HARD_ALPHA}


@dataclass(frozen=True)
class GenDesign:
    """Full specification of one data-generating condition.

    Coefficient vectors are stored as tuples so designs stay hashable.
    ``mixture_weight`` is the weight on the covariate-dependent beta
    component; the remainder goes to the fixed contaminant.
    """

    base_kind: BaseKind
    kernel_kind: KernelKind
    gamma1: tuple
    gamma2: tuple
    alpha: tuple
    n: int = 5000
    t: float = 0.5
    seed: int = 0
    mixture_weight: float = 0.5
    contaminant_shapes: tuple = (15.0, 10.0)
    decay_rate: float = 19.5
    link: LinkConfig = field(default_factory=lambda: DEFAULT_LINK)

    def __post_init__(self):
        p = len(self.gamma1)
        if len(self.gamma2) != p or len(self.alpha) != p:
            raise ConfigError("gamma1, gamma2, alpha must share one length")
        if p < 1:
            raise ConfigError("need at least the intercept coefficient")
        if not 0.0 < self.t < 1.0:
            raise ConfigError(f"threshold must lie in (0,1), got {self.t}")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if not 0.0 <= self.mixture_weight <= 1.0:
            raise ConfigError("mixture_weight must lie in [0,1]")
        if min(self.contaminant_shapes) <= 0.0:
            raise ConfigError("contaminant shapes must be positive")
        if self.decay_rate <= 0.0:
            raise ConfigError("decay_rate must be positive")

    @property
    def p(self) -> int:
        return len(self.gamma1)

    def describe(self) -> dict:
        """JSON-ready summary recorded in generated Dataset metadata."""
        return {
            "base_kind": self.base_kind.value,
            "kernel_kind": self.kernel_kind.value,
            "gamma1": list(self.gamma1),
            "gamma2": list(self.gamma2),
            "alpha": list(self.alpha),
            "n": self.n,
            "t": self.t,
            "seed": self.seed,
            "mixture_weight": self.mixture_weight,
            "contaminant_shapes": list(self.contaminant_shapes),
            "decay_rate": self.decay_rate,
        }


def named_design(base: str = "matching", alpha: str = "easy", n: int = 5000,
                 t: float = 0.5, seed: int = 0) -> GenDesign:
    """One of the six standard conditions: 3 (b,K) pairs x 2 alpha settings."""
    if base not in DESIGN_KINDS:
        raise ConfigError(f"unknown design {base!r}; choose from {sorted(DESIGN_KINDS)}")
    if alpha not in ALPHA_SETTINGS:
        raise ConfigError(f"unknown alpha setting {alpha!r}; choose from {sorted(ALPHA_SETTINGS)}")
    base_kind, kernel_kind = DESIGN_KINDS[base]
    return GenDesign(
        base_kind=base_kind,
        kernel_kind=kernel_kind,
        gamma1=TRUE_GAMMA1,
        gamma2=TRUE_GAMMA2,
        alpha=ALPHA_SETTINGS[alpha],
        n=n,
        t=t,
        seed=seed,
    )


def default_rng(seed) -> np.random.Generator:
    """Philox stream; `seed` may be an int or a SeedSequence-style list."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def gen_covariates(n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """Intercept column of ones plus i.i.d. standard normal columns."""
    if n < 1 or p < 1:
        raise ConfigError("n and p must be positive")
    X = np.empty((n, p))
    X[:, 0] = 1.0
    if p > 1:
        X[:, 1:] = rng.normal(size=(n, p - 1))
    return X


def kernel_weight(u, design: GenDesign):
    """Half kernel K(u): zero for u<0, K(0)=1, nonincreasing for u>=0."""
    u = np.asarray(u, dtype=np.float64)
    live = u >= 0.0
    if design.kernel_kind is KernelKind.INDICATOR:
        return np.where(live, 1.0, 0.0)
    return np.where(live, np.exp(-design.decay_rate * np.square(u)), 0.0)


def base_shapes(X: np.ndarray, design: GenDesign):
    """Per-row shapes (a_i, b_i) of the covariate-dependent beta component."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    a = link_s(X @ np.asarray(design.gamma1), design.link)
    b = link_s(X @ np.asarray(design.gamma2), design.link)
    return a, b


def jump_sizes(X: np.ndarray, design: GenDesign):
    """j(x) = max(x'alpha, 0) on the generation (raw covariate) scale."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.maximum(X @ np.asarray(design.alpha), 0.0)


def _beta_draws(rng, a, b):
    # ratio-of-gammas construction; numpy's gamma sampler is exact for
    # all shape values, including the sub-1 range the link can produce
    g1 = rng.standard_gamma(a)
    g2 = rng.standard_gamma(b)
    return g1 / (g1 + g2)


def _propose(rng, a, b, design: GenDesign):
    if design.base_kind is BaseKind.MATCHING_BETA:
        return _beta_draws(rng, a, b)
    pick = rng.random(a.shape[0]) < design.mixture_weight
    ca, cb = design.contaminant_shapes
    return _beta_draws(rng, np.where(pick, a, ca), np.where(pick, b, cb))


def _rejection_sample(rng, a, b, jmp, design: GenDesign):
    """Vectorized rejection for one response per (a_i, b_i, j_i) triple.

    Returns (responses, total proposal count).  Proposals landing exactly
    on 0.0 or 1.0 in floating point are re-drawn: the target places no
    mass there and downstream code requires open-interval responses.
    """
    n = a.shape[0]
    y = np.empty(n)
    active = np.arange(n)
    total = 0
    for _ in range(_REJECTION_CAP):
        if active.size == 0:
            return y, total
        m = active.size
        total += m
        prop = _propose(rng, a[active], b[active], design)
        k = kernel_weight(design.t - prop, design)
        acc = rng.random(m) < np.exp(-k * jmp[active])
        acc &= (prop > 0.0) & (prop < 1.0)
        y[active[acc]] = prop[acc]
        active = active[~acc]
    raise NumericalError(
        f"rejection sampler exceeded {_REJECTION_CAP} rounds; "
        "jump sizes are implausibly large"
    )


def sample_responses(x, design: GenDesign, size: int, rng: np.random.Generator):
    """`size` independent draws at a single fixed covariate row."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (design.p,):
        raise ConfigError(f"covariate row must have length {design.p}")
    a, b = base_shapes(x, design)
    j = jump_sizes(x, design)
    y, _ = _rejection_sample(
        rng,
        np.full(size, a[0]),
        np.full(size, b[0]),
        np.full(size, j[0]),
        design,
    )
    return y


def sample_response(x, design: GenDesign, rng: np.random.Generator) -> float:
    return float(sample_responses(x, design, 1, rng)[0])


def gen_dataset(design: GenDesign, rng=None) -> Dataset:
    """Generate covariates and responses, then standardize the design matrix.

    Standardization happens after generation, so the raw-scale generating
    coefficients map to the fitted scale through the recorded column
    means and sds.  Metadata carries the design, the raw-scale truth, and
    rejection-sampler accounting.
    """
    if rng is None:
        rng = default_rng(design.seed)
    X = gen_covariates(design.n, design.p, rng)
    a, b = base_shapes(X, design)
    jmp = jump_sizes(X, design)
    y, total = _rejection_sample(rng, a, b, jmp, design)
    meta = {
        "generator": design.describe(),
        "alpha_true": list(design.alpha),
        "gamma1_true": list(design.gamma1),
        "gamma2_true": list(design.gamma2),
        "n_proposals": int(total),
        "jump_prevalence": float(np.mean(jmp > 0.0)),
        # pre-standardization values, so the dataset can be exported to
        # CSV and re-ingested without float drift
        "raw_header": ["y"] + [f"x{k}" for k in range(1, design.p)],
        "raw_values": np.column_stack([y, X[:, 1:]]),
    }
    return build_dataset(y, X, design.t, meta=meta)


def jump_prevalence(design: GenDesign, n_draws: int = 10**5, rng=None) -> float:
    """Monte Carlo fraction of covariate draws with a strictly positive jump."""
    if rng is None:
        rng = default_rng(design.seed)
    X = gen_covariates(n_draws, design.p, rng)
    return float(np.mean(jump_sizes(X, design) > 0.0))


def standardized_truth(design: GenDesign, data: Dataset) -> np.ndarray:
    """Map the raw-scale alpha onto the standardized covariate scale.

    With x_raw = m + s * x_std columnwise, x_raw'a equals x_std'a~ where
    a~_0 = a_0 + sum_k a_k m_k and a~_k = a_k s_k.  Exact per dataset.
    """
    alpha = np.asarray(design.alpha, dtype=np.float64)
    out = alpha * data.column_sds
    # the intercept slot of the stored constants is (0, 1), so the dot
    # product below picks up only the non-intercept mean shifts
    out[0] += alpha @ data.column_means
    return out
