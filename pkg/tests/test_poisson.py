import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slowdecay import PointMass, log_modulus, poisson_kernel, split_bound, value
from slowdecay.cantor import CantorModel
from slowdecay.gauge import DomainError
from slowdecay.poisson import (
    PrecisionError,
    conjugate_kernel,
    derivative_bound,
    evaluate,
    kernel_derivative,
    reduce_angle,
)
from slowdecay.suites import kernel_integral, mean_value_gap

PI = math.pi
mpmath.mp.dps = 40


def flat_sum(model, r, thetas, n):
    """Generation-n midpoint sum and a bound on its own error.

    Each node measure is symmetric about its centre, so the first-order term
    vanishes and the error is at most m * sup|F''| * (l_n / 2)^2 / 2.
    """
    ends = model.endpoints(n)
    centres = (ends[0::2] + ends[1::2]) / 2
    m = model.node_mass(n)
    half = model.lengths[n] / 2
    u = np.empty(len(thetas))
    err = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        s = reduce_angle(th - centres)
        u[i] = m * poisson_kernel(r, s).sum()
        dist = np.maximum(np.abs(s) - half, 0.0)
        err[i] = m * derivative_bound(r, dist, 2).sum() * half**2 / 2
    return u, err


def mp_kernel_derivative(r, s, j):
    delta = -mpmath.log(r)
    f = lambda x: 1j * mpmath.cot((x + 1j * delta) / 2)  # noqa: E731
    return complex(mpmath.diff(f, mpmath.mpf(s), j))


class TestKernel:
    def test_values(self):
        assert poisson_kernel(0.0, 1.3) == 1.0
        assert poisson_kernel(0.5, 0.0) == pytest.approx(3.0, rel=1e-15)
        assert poisson_kernel(0.5, PI) == pytest.approx(1 / 3, rel=1e-15)
        assert conjugate_kernel(0.5, PI / 2) == pytest.approx(0.8, rel=1e-15)

    def test_near_boundary(self):
        r = 1 - 1e-12
        # no cancellation in 1 + r^2 - 2 r cos s
        assert poisson_kernel(r, 0.0) == pytest.approx((1 + r) / (1 - r), rel=1e-12)

    @pytest.mark.parametrize("r", [-0.5, 1.0])
    def test_domain(self, r):
        with pytest.raises(DomainError):
            poisson_kernel(r, 0.1)

    @settings(max_examples=200)
    @given(st.floats(0, 0.9999), st.floats(0, PI))
    def test_even_positive_bounded(self, r, s):
        p = poisson_kernel(r, s)
        assert p == poisson_kernel(r, -s)
        assert 0 < p <= (1 + r) / (1 - r) * (1 + 1e-15)
        assert conjugate_kernel(r, -s) == -conjugate_kernel(r, s)

    def test_monotone_on_half_circle(self):
        s = np.linspace(0, PI, 1000)
        for r in (0.3, 0.9, 0.999):
            assert np.all(np.diff(poisson_kernel(r, s)) <= 0)

    @pytest.mark.parametrize("r", [0.0, 0.5, 0.9, 0.99])
    def test_normalization(self, r):
        assert kernel_integral(r) == pytest.approx(PI, abs=1e-9)


class TestDerivatives:
    @pytest.mark.parametrize("j", range(0, 9))
    @pytest.mark.parametrize("r,s", [(0.5, 0.3), (0.9, -1.0), (0.99, 0.02), (0.3, 3.0)])
    def test_against_mpmath(self, r, s, j):
        got = complex(kernel_derivative(r, s, j))
        ref = mp_kernel_derivative(r, s, j)
        assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref))

    def test_zero_is_kernel(self):
        f = complex(kernel_derivative(0.7, 0.4, 0))
        assert f.real == pytest.approx(poisson_kernel(0.7, 0.4), rel=1e-15)
        assert f.imag == pytest.approx(conjugate_kernel(0.7, 0.4), rel=1e-15)

    @settings(max_examples=300)
    @given(st.floats(0.01, 0.9999), st.floats(-PI, PI), st.integers(1, 8))
    def test_bound_dominates(self, r, s, j):
        assert abs(complex(kernel_derivative(r, s, j))) <= derivative_bound(r, abs(s), j) * (1 + 1e-12)


class TestPointMass:
    @pytest.mark.parametrize("r", [0.0, 0.5, 0.9, 0.999])
    def test_on_axis(self, r):
        ev = log_modulus(PointMass(), r, 0.0)
        assert ev.log_modulus_neg == pytest.approx((1 + r) / (1 - r), rel=1e-10)
        assert ev.phase == 0.0

    def test_half(self):
        assert log_modulus(PointMass(), 0.5, 0.0).modulus == pytest.approx(math.exp(-3), rel=1e-10)

    def test_real_on_axis(self):
        assert value(PointMass(), 0.5, 0.0).imag == 0.0

    def test_general(self):
        z = 0.6 * cmath.exp(0.4j)
        expect = cmath.exp(-(1 + z) / (1 - z))
        assert value(PointMass(), 0.6, 0.4) == pytest.approx(expect, rel=1e-12)


class TestCantorEvaluation:
    def test_origin(self, rlog_model):
        ev = evaluate(rlog_model, 0.0, [0.0, 1.0])
        assert np.all(ev.u == rlog_model.total_mass)

    def test_against_flat_sum(self, rlog_model):
        rng = np.random.default_rng(11)
        for r in (0.3, 0.9, 0.99):
            thetas = rng.uniform(-PI, PI, 6)
            ev = evaluate(rlog_model, r, thetas, tol=1e-9)
            ref, ref_err = flat_sum(rlog_model, r, thetas, 18)
            assert np.all(np.abs(ev.u - ref) <= ev.error + ref_err + 1e-12)

    def test_harmonic_conjugate(self, rlog_model):
        # v from the tree matches the conjugate kernel sum
        ends = rlog_model.endpoints(16)
        centres = (ends[0::2] + ends[1::2]) / 2
        v_flat = rlog_model.node_mass(16) * conjugate_kernel(0.8, 0.7 - centres).sum()
        ev = evaluate(rlog_model, 0.8, [0.7], tol=1e-10)
        assert ev.v[0] == pytest.approx(v_flat, abs=1e-8)

    def test_error_within_tol(self, rlog_model):
        ev = evaluate(rlog_model, 0.999, np.linspace(-PI, PI, 50), tol=1e-8)
        assert np.all(ev.error <= 1e-8)
        assert np.all(ev.u > 0)

    def test_value_consistency(self, rlog_model):
        for r, th in [(0.0, 0.0), (0.5, 1.0), (0.99, -2.0)]:
            ev = log_modulus(rlog_model, r, th)
            s = value(rlog_model, r, th)
            assert abs(s) <= 1
            assert abs(abs(s) - math.exp(-ev.log_modulus_neg)) <= 4 * math.ulp(abs(s))
            assert -PI <= ev.phase <= PI
        assert abs(value(rlog_model, 0.0, 0.0)) == pytest.approx(math.exp(-rlog_model.total_mass), rel=1e-15)

    def test_precision_error(self, classical_gauge):
        shallow = CantorModel(3.0 ** -np.arange(7), gauge=classical_gauge, base_center=0.5)
        with pytest.raises(PrecisionError, match="needed"):
            evaluate(shallow, 1 - 1e-6, [0.0], tol=1e-12)

    def test_bad_tol(self, rlog_model):
        with pytest.raises(DomainError):
            evaluate(rlog_model, 0.5, [0.0], tol=0.0)

    def test_scaling_law(self, rlog_model):
        thetas = np.linspace(-3, 3, 16)
        base = evaluate(rlog_model.with_scale(1.0), 0.9, thetas)
        for c in (0.5, 0.25):
            sc = evaluate(rlog_model.with_scale(c), 0.9, thetas)
            assert np.all(np.abs(sc.u - c * base.u) <= sc.error + c * base.error + 1e-15)

    def test_mean_value(self, rlog_model):
        rng = np.random.default_rng(2)
        for _ in range(4):
            z = rng.uniform(0, 0.85) * cmath.exp(1j * rng.uniform(-PI, PI))
            gap, bound = mean_value_gap(rlog_model, z, n=120)
            assert gap <= 1e-6 + bound


class TestSplitBound:
    def test_identity(self, rlog_gauge):
        r = 0.9
        near, far = split_bound(rlog_gauge, r, PI * (1 - r))
        g = rlog_gauge.g(PI * (1 - r))
        assert near == pytest.approx(2 * PI * g, rel=1e-15)
        assert far == pytest.approx(PI * g, rel=1e-15)
        assert near + far == pytest.approx(-math.log(rlog_gauge.profile.omega(r)), rel=1e-14)

    @pytest.mark.parametrize("r", [0.5, 0.9, 0.99, 0.999])
    def test_dominates(self, rlog_model, rlog_gauge, r):
        thetas = np.linspace(-PI, PI, 64, endpoint=False)
        u_max = evaluate(rlog_model, r, thetas).u.max()
        for eps in (PI * (1 - r), PI * math.sqrt(1 - r), PI):
            near, far = split_bound(rlog_gauge, r, eps)
            assert u_max <= near + far

    def test_domain(self, rlog_gauge):
        with pytest.raises(DomainError):
            split_bound(rlog_gauge, 0.5, 0.0)
