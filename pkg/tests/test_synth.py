"""Generator correctness: exact rejection sampling, prevalence, determinism."""

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import cumulative_trapezoid

import densjump.synth as synth
from densjump.errors import ConfigError, NumericalError
from densjump.synth import (
    BaseKind,
    GenDesign,
    KernelKind,
    base_shapes,
    default_rng,
    gen_covariates,
    gen_dataset,
    jump_prevalence,
    jump_sizes,
    kernel_weight,
    named_design,
    sample_response,
    sample_responses,
    standardized_truth,
)

X_ROW_A = np.array([1.0, 0.5, -0.3, 0.8, -1.2, 0.4])
X_ROW_B = np.array([1.0, -1.0, 0.2, 0.0, 1.0, -0.5])
# keeps both beta shapes above 1 so the grid quadrature oracle applies
X_ROW_C = np.array([1.0, -1.0, 2.0, -1.0, 0.5, -1.0])


def indicator_cdf(design, x):
    """Closed-form CDF for indicator-kernel designs via the beta CDF."""
    a, b = base_shapes(x, design)

    def base(y):
        y = np.asarray(y, dtype=float)
        out = stats.beta.cdf(y, a[0], b[0])
        if design.base_kind is BaseKind.MIXTURE_BETA:
            ca, cb = design.contaminant_shapes
            w = design.mixture_weight
            out = w * out + (1 - w) * stats.beta.cdf(y, ca, cb)
        return out

    j = jump_sizes(x, design)[0]
    e = np.exp(-j)
    ft = base(design.t)
    z = e * ft + 1.0 - ft

    def cdf(y):
        y = np.asarray(y, dtype=float)
        below = e * base(np.minimum(y, design.t))
        above = np.maximum(base(y) - ft, 0.0)
        return (below + above) / z

    return cdf


def grid_cdf(design, x, n_grid=400_001):
    """Trapezoid CDF on a fine grid; valid when both shapes exceed 1."""
    a, b = base_shapes(x, design)
    assert a[0] > 1.0 and b[0] > 1.0, "grid oracle needs bounded density"
    j = jump_sizes(x, design)[0]
    grid = np.linspace(0.0, 1.0, n_grid)
    dens = stats.beta.pdf(grid, a[0], b[0]) * np.exp(
        -j * kernel_weight(design.t - grid, design)
    )
    cum = cumulative_trapezoid(dens, grid, initial=0.0)
    cum /= cum[-1]
    return lambda y: np.interp(y, grid, cum)


class TestDesignConstruction:
    def test_named_designs_map_to_kind_pairs(self):
        d = named_design("matching", "easy")
        assert (d.base_kind, d.kernel_kind) == (BaseKind.MATCHING_BETA, KernelKind.INDICATOR)
        d = named_design("mixture", "hard")
        assert (d.base_kind, d.kernel_kind) == (BaseKind.MIXTURE_BETA, KernelKind.INDICATOR)
        assert d.alpha == synth.HARD_ALPHA
        d = named_design("decaying", "easy")
        assert (d.base_kind, d.kernel_kind) == (BaseKind.MATCHING_BETA, KernelKind.DECAYING_GAUSSIAN)

    def test_unknown_names_rejected(self):
        with pytest.raises(ConfigError):
            named_design("bimodal", "easy")
        with pytest.raises(ConfigError):
            named_design("matching", "medium")

    def test_field_validation(self):
        with pytest.raises(ConfigError):
            GenDesign(BaseKind.MATCHING_BETA, KernelKind.INDICATOR,
                      (0.1, 0.2), (0.1,), (0.0, 0.0))
        with pytest.raises(ConfigError):
            GenDesign(BaseKind.MATCHING_BETA, KernelKind.INDICATOR,
                      (0.1,), (0.1,), (0.0,), t=1.2)

    def test_describe_round_trips_through_json(self):
        import json

        d = named_design("mixture", "hard", n=100, seed=3)
        blob = json.loads(json.dumps(d.describe()))
        assert blob["base_kind"] == "mixture_beta"
        assert blob["alpha"] == list(synth.HARD_ALPHA)


class TestCovariates:
    def test_intercept_only(self):
        X = gen_covariates(7, 1, default_rng(0))
        np.testing.assert_array_equal(X, np.ones((7, 1)))

    def test_column_moments_within_clt_bound(self):
        n = 4000
        X = gen_covariates(n, 6, default_rng(1))
        assert np.all(X[:, 0] == 1.0)
        bound = 4.0 / np.sqrt(n)
        assert np.all(np.abs(X[:, 1:].mean(axis=0)) < bound)

    def test_reproducible(self):
        X1 = gen_covariates(50, 4, default_rng(9))
        X2 = gen_covariates(50, 4, default_rng(9))
        np.testing.assert_array_equal(X1, X2)


class TestKernel:
    def test_indicator(self):
        d = named_design("matching", "easy")
        np.testing.assert_array_equal(
            kernel_weight([-0.2, 0.0, 0.3], d), [0.0, 1.0, 1.0]
        )

    def test_decaying_gaussian(self):
        d = named_design("decaying", "easy")
        u = np.array([-0.1, 0.0, 0.2, 0.5])
        expect = [0.0, 1.0, np.exp(-19.5 * 0.04), np.exp(-19.5 * 0.25)]
        np.testing.assert_allclose(kernel_weight(u, d), expect, rtol=1e-12)
        vals = kernel_weight(np.linspace(0, 1, 50), d)
        assert np.all(np.diff(vals) <= 0)


class TestRejectionSampler:
    def test_nonpositive_jump_gives_base_distribution(self):
        # x'alpha = -0.5 here, so every proposal is accepted
        d = named_design("matching", "easy")
        x = np.array([1.0, -5.0, 0.0, 0.0, 0.0, 0.0])
        assert jump_sizes(x, d)[0] == 0.0
        y = sample_responses(x, d, 30_000, default_rng(100))
        a, b = base_shapes(x, d)
        ks = stats.kstest(y, lambda v: stats.beta.cdf(v, a[0], b[0]))
        assert ks.statistic < 0.01

    def test_huge_jump_suppresses_below_threshold(self):
        d = GenDesign(BaseKind.MATCHING_BETA, KernelKind.INDICATOR,
                      gamma1=synth.TRUE_GAMMA1, gamma2=synth.TRUE_GAMMA2,
                      alpha=(50.0, 0, 0, 0, 0, 0), n=10)
        y = sample_responses(X_ROW_A, d, 2000, default_rng(101))
        assert np.all(y > d.t)

    def test_matching_design_matches_oracle_cdf(self):
        d = named_design("matching", "easy")
        for seed, x in ((102, X_ROW_A), (103, X_ROW_B)):
            y = sample_responses(x, d, 30_000, default_rng(seed))
            ks = stats.kstest(y, indicator_cdf(d, x))
            assert ks.statistic < 0.01

    def test_mixture_design_matches_oracle_cdf(self):
        d = named_design("mixture", "easy")
        for seed, x in ((104, X_ROW_A), (105, X_ROW_B)):
            y = sample_responses(x, d, 30_000, default_rng(seed))
            ks = stats.kstest(y, indicator_cdf(d, x))
            assert ks.statistic < 0.01

    def test_decaying_design_matches_quadrature_cdf(self):
        d = named_design("decaying", "easy")
        y = sample_responses(X_ROW_C, d, 30_000, default_rng(106))
        ks = stats.kstest(y, grid_cdf(d, X_ROW_C))
        assert ks.statistic < 0.01

    def test_two_sample_against_inverse_cdf_draws(self):
        d = named_design("mixture", "hard")
        cdf = indicator_cdf(d, X_ROW_B)
        grid = np.linspace(0.0, 1.0, 200_001)
        vals = cdf(grid)
        rng = default_rng(107)
        oracle = np.interp(rng.random(30_000), vals, grid)
        y = sample_responses(X_ROW_B, d, 30_000, rng)
        ks = stats.ks_2samp(y, oracle)
        assert ks.statistic < 0.015

    def test_cap_exceeded_raises(self, monkeypatch):
        monkeypatch.setattr(synth, "_REJECTION_CAP", 2)
        # base mass sits almost entirely below t and the jump wipes it out
        d = GenDesign(BaseKind.MATCHING_BETA, KernelKind.INDICATOR,
                      gamma1=(-20.0,), gamma2=(20.0,), alpha=(700.0,), n=10)
        with pytest.raises(NumericalError):
            sample_responses(np.array([1.0]), d, 50, default_rng(108))

    def test_scalar_wrapper(self):
        d = named_design("matching", "easy", seed=5)
        v = sample_response(X_ROW_A, d, default_rng(5))
        assert 0.0 < v < 1.0


class TestGenDataset:
    def test_shapes_standardization_and_meta(self):
        d = named_design("matching", "easy", n=500, seed=42)
        data = gen_dataset(d)
        assert data.X.shape == (500, 6)
        assert data.y.shape == (500,)
        assert data.t == 0.5
        # standardized columns: mean 0, sample sd 1
        assert np.all(np.abs(data.X[:, 1:].mean(axis=0)) < 1e-12)
        np.testing.assert_allclose(data.X[:, 1:].std(axis=0, ddof=1), 1.0, rtol=1e-12)
        assert data.meta["generator"]["base_kind"] == "matching_beta"
        assert data.meta["n_proposals"] >= 500
        assert 0.9 < data.meta["jump_prevalence"] <= 1.0

    def test_determinism(self):
        d = named_design("mixture", "hard", n=300, seed=7)
        d1, d2 = gen_dataset(d), gen_dataset(d)
        np.testing.assert_array_equal(d1.y, d2.y)
        np.testing.assert_array_equal(d1.X, d2.X)
        assert d1.meta["n_proposals"] == d2.meta["n_proposals"]

    def test_external_rng_overrides_seed(self):
        d = named_design("matching", "easy", n=200, seed=0)
        a = gen_dataset(d, rng=default_rng([12, 3]))
        b = gen_dataset(d, rng=default_rng([12, 3]))
        c = gen_dataset(d, rng=default_rng([12, 4]))
        np.testing.assert_array_equal(a.y, b.y)
        assert not np.array_equal(a.y, c.y)

    def test_acceptance_rate_lower_bound(self):
        d = named_design("mixture", "easy", n=2000, seed=11)
        data = gen_dataset(d)
        rate = d.n / data.meta["n_proposals"]
        raw = data.X[:, 1:] * data.column_sds[1:] + data.column_means[1:]
        jmax = np.max(jump_sizes(np.column_stack([np.ones(d.n), raw]), d))
        assert rate > np.exp(-jmax)


class TestPrevalence:
    def test_easy_alpha_prevalence(self):
        # x'alpha ~ N(1, 0.19), so P(jump) = Phi(1/sqrt(0.19)) = 0.989
        d = named_design("matching", "easy", seed=1)
        assert abs(jump_prevalence(d) - 0.99) < 0.01

    def test_hard_alpha_prevalence_and_median(self):
        d = named_design("matching", "hard", seed=2)
        assert abs(jump_prevalence(d) - 0.96) < 0.01
        X = gen_covariates(10**5, 6, default_rng(3))
        med = np.median(jump_sizes(X, d))
        assert abs(med - 0.5) < 0.01


class TestStandardizedTruth:
    def test_exact_linear_map(self):
        d = named_design("matching", "easy", n=400, seed=21)
        data = gen_dataset(d)
        truth = standardized_truth(d, data)
        raw = data.X * data.column_sds + data.column_means
        np.testing.assert_allclose(raw @ np.asarray(d.alpha), data.X @ truth,
                                   rtol=0, atol=1e-10)

    def test_zero_coefficients_stay_zero(self):
        d = named_design("matching", "hard", n=400, seed=22)
        data = gen_dataset(d)
        truth = standardized_truth(d, data)
        np.testing.assert_array_equal(truth[3:], 0.0)
        assert truth[0] != 0.0
