import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetdata.errors import (
    BracketingError,
    EvaluationError,
    InvalidInputError,
)
from hetdata.numerics import (
    GaussianSpec,
    expect_gauss_hermite,
    gauss_hermite_rule,
    hazard_rate,
    make_stream,
    normal_cdf,
    normal_pdf,
    portfolio_moment,
    solve_bracketed,
)

mpmath.mp.dps = 50
STD = GaussianSpec(0.0, 1.0)


def mp_pdf(x, mean=0.0, var=1.0):
    return float(mpmath.npdf(x, mean, mpmath.sqrt(var)))


def mp_cdf(x, mean=0.0, var=1.0):
    return float(mpmath.ncdf(x, mean, mpmath.sqrt(var)))


class TestNormalKernels:
    def test_pdf_at_zero(self):
        assert normal_pdf(0.0, STD) == pytest.approx(1.0 / math.sqrt(2 * math.pi),
                                                     abs=1e-15)

    def test_pdf_mode_value(self):
        for mean, var in [(0.3, 2.0), (-1.0, 0.25)]:
            spec = GaussianSpec(mean, var)
            assert normal_pdf(mean, spec) == pytest.approx(
                1.0 / math.sqrt(2 * math.pi * var), abs=1e-15
            )

    def test_pdf_oracle_value(self):
        # exp(-1/2)/sqrt(2 pi) via arbitrary precision
        assert normal_pdf(1.0, STD) == pytest.approx(mp_pdf(1.0), abs=1e-15)

    def test_cdf_median_and_limit(self):
        assert normal_cdf(0.0, STD) == 0.5
        assert normal_cdf(40.0, STD) == 1.0

    def test_cdf_against_erf_oracle(self):
        for x in np.linspace(-6, 6, 41):
            assert abs(normal_cdf(float(x), STD) - mp_cdf(float(x))) < 1e-12

    def test_cdf_quantile_95(self):
        assert normal_cdf(1.6449, STD) == pytest.approx(0.95, abs=1e-4)

    def test_non_finite_rejected(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(InvalidInputError):
                normal_pdf(bad, STD)
            with pytest.raises(InvalidInputError):
                normal_cdf(bad, STD)

    def test_bad_variance_rejected(self):
        with pytest.raises(InvalidInputError):
            GaussianSpec(0.0, 0.0)
        with pytest.raises(InvalidInputError):
            GaussianSpec(0.0, -1.0)

    @given(st.floats(-20, 20), st.floats(-3, 3))
    @settings(max_examples=200, deadline=None)
    def test_cdf_symmetry(self, x, mean):
        spec = GaussianSpec(mean, 1.7)
        assert normal_cdf(mean + x, spec) + normal_cdf(mean - x, spec) == \
            pytest.approx(1.0, abs=1e-12)


class TestHazard:
    def test_value_at_zero(self):
        assert hazard_rate(0.0, STD) == pytest.approx(
            mp_pdf(0.0) / 0.5, rel=1e-13
        )

    def test_value_at_one(self):
        expected = mp_pdf(1.0) / (1.0 - mp_cdf(1.0))
        assert hazard_rate(1.0, STD) == pytest.approx(expected, rel=1e-13)

    def test_location_scale_identity(self):
        spec = GaussianSpec(0.7, 4.0)
        for x in (-2.0, 0.0, 1.3, 5.0):
            z = (x - 0.7) / 2.0
            assert hazard_rate(x, spec) == pytest.approx(
                hazard_rate(z, STD) / 2.0, rel=1e-13
            )

    def test_strictly_increasing_on_wide_grid(self):
        grid = np.linspace(-5.0, 5.0, 501)
        values = [hazard_rate(float(x), STD) for x in grid]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_deep_right_tail_no_blowup(self):
        # asymptotically h(z) ~ z; ratio must stay close
        h = hazard_rate(50.0, STD)
        assert 50.0 < h < 50.03


class TestQuadrature:
    def test_weights_normalized(self):
        rule = gauss_hermite_rule(STD, 20)
        assert abs(float(np.sum(rule.weights)) - 1.0) <= 1e-12

    def test_constant_and_square(self):
        assert expect_gauss_hermite(lambda x: 1.0, STD, 20) == pytest.approx(
            1.0, abs=1e-13
        )
        assert expect_gauss_hermite(lambda x: x * x, STD, 20) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_mean_one_lognormal_construction(self):
        spec = GaussianSpec(-0.125, 0.25)
        assert expect_gauss_hermite(math.exp, spec, 40) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_lognormal_moment_identity(self):
        spec = GaussianSpec(0.3, 0.8)
        for a in (-2, -1, 1, 2):
            exact = math.exp(a * 0.3 + 0.5 * a * a * 0.8)
            approx = expect_gauss_hermite(lambda x: math.exp(a * x), spec, 40)
            assert abs(approx - exact) / exact < 1e-10

    def test_order_too_small(self):
        with pytest.raises(InvalidInputError):
            expect_gauss_hermite(lambda x: x, STD, 1)

    def test_non_finite_integrand_reported(self):
        with pytest.raises(EvaluationError, match="node"):
            expect_gauss_hermite(lambda x: math.inf, STD, 10)


class TestPortfolioMoment:
    def test_theta_zero_constant(self):
        assert portfolio_moment(0.0, 0.5, 2.0) == pytest.approx(1.0, abs=1e-13)

    def test_theta_one_lognormal(self):
        # E[e^((1-gamma) eps)] with eps ~ N(-sigma^2/2, sigma^2)
        assert portfolio_moment(1.0, 0.5, 2.0) == pytest.approx(
            math.exp(0.25), rel=1e-10
        )

    def test_log_branch_theta_one(self):
        assert portfolio_moment(1.0, 0.5, 1.0) == pytest.approx(-0.125, abs=1e-12)

    def test_gamma_to_one_continuity(self):
        log_branch = portfolio_moment(0.1, 0.5, 1.0)
        for gamma in (1.0 + 1e-4, 1.0 - 1e-4):
            transformed = (portfolio_moment(0.1, 0.5, gamma) - 1.0) / (1.0 - gamma)
            assert abs(transformed - log_branch) < 1e-6

    def test_domain_checks(self):
        with pytest.raises(InvalidInputError):
            portfolio_moment(-0.1, 0.5, 2.0)
        with pytest.raises(InvalidInputError):
            portfolio_moment(0.5, 0.0, 2.0)


class TestSolveBracketed:
    def test_linear(self):
        assert solve_bracketed(lambda x: x - 1.0, 0.0, 2.0, 1e-12) == \
            pytest.approx(1.0, abs=1e-12)

    def test_sqrt2(self):
        root = solve_bracketed(lambda x: x * x - 2.0, 0.0, 2.0, 1e-12)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_no_sign_change(self):
        with pytest.raises(BracketingError) as err:
            solve_bracketed(lambda x: x * x + 1.0, -1.0, 1.0, 1e-8)
        assert err.value.f_lo == 2.0 and err.value.f_hi == 2.0

    @given(st.floats(-3, 3), st.floats(0.1, 3))
    @settings(max_examples=100, deadline=None)
    def test_root_stays_in_bracket(self, center, width):
        lo, hi = center - width, center + width
        root = solve_bracketed(lambda x: math.tanh(x - center), lo, hi, 1e-10)
        assert lo <= root <= hi


class TestRandomStream:
    def test_determinism(self):
        a = make_stream(123, 4).normals(1000)
        b = make_stream(123, 4).normals(1000)
        assert np.array_equal(a, b)

    def test_stream_independence(self):
        n = 100_000
        a = make_stream(7, 0).normals(n)
        b = make_stream(7, 1).normals(n)
        corr = float(np.corrcoef(a, b)[0, 1])
        assert abs(corr) < 3.0 / math.sqrt(n)

    def test_poisson_moment(self):
        n = 100_000
        counts = make_stream(11, 2).poisson_counts(2.0, n)
        assert abs(float(np.mean(counts)) - 2.0) < 3.0 * math.sqrt(2.0 / n)

    def test_negative_index_rejected(self):
        with pytest.raises(InvalidInputError):
            make_stream(1, -1)
