import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import Polynomial
from scipy import special

from biheun.bch import (
    BchParams,
    bch_coefficients,
    bch_eval,
    quasipoly_q_values,
    termination_polynomial,
)
from biheun.errors import ConvergenceError, ParameterError

small = st.floats(-3.0, 3.0, allow_nan=False)
gammas = st.floats(0.1, 6.0).filter(lambda g: not float(g).is_integer()) | st.integers(1, 6).map(float)


@st.composite
def params(draw):
    return BchParams(draw(gammas), draw(small), draw(small), draw(small), draw(small))


def exact_partial_sum(p, z, count):
    """Sum c_0..c_{count-1} z^k in rational arithmetic from the recurrence."""
    g, d, e, a, q = (Fraction(v) for v in (p.gamma, p.delta, p.epsilon, p.alpha, p.q))
    zf = Fraction(z)
    prev, cur, total, power = Fraction(0), Fraction(1), Fraction(0), Fraction(1)
    for k in range(count):
        total += cur * power
        power *= zf
        prev, cur = cur, ((q - d * k) * cur - (a + e * (k - 1)) * prev) / ((k + 1) * (k + g))
    return total


class TestParams:
    @pytest.mark.parametrize("gamma", [0.0, -1.0, -7.0])
    def test_nonpositive_integer_gamma_rejected(self, gamma):
        with pytest.raises(ParameterError):
            BchParams(gamma)

    def test_negative_fractional_gamma_allowed(self):
        assert BchParams(-0.5).gamma == -0.5

    @pytest.mark.parametrize("bad", [math.nan, math.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(ParameterError):
            BchParams(1.0, q=bad)


class TestCoefficients:
    def test_constant_solution(self):
        assert bch_coefficients(BchParams(1, 0, 0, 0, 0), 3) == [1.0, 0.0, 0.0]

    def test_hand_expanded(self):
        c = bch_coefficients(BchParams(2, 1, 0, 0, 2), 3)
        assert c == pytest.approx([1.0, 1.0, 1.0 / 6.0], rel=1e-15)

    @given(params())
    def test_first_two(self, p):
        c = bch_coefficients(p, 2)
        assert c[0] == 1.0
        assert c[1] == pytest.approx(p.q / p.gamma, rel=1e-15, abs=1e-300)

    def test_count_must_be_positive(self):
        with pytest.raises(ParameterError):
            bch_coefficients(BchParams(1), 0)

    @settings(max_examples=50)
    @given(params(), st.integers(2, 12))
    def test_truncated_series_satisfies_equation(self, p, count):
        # z u'' + (gamma + delta z + epsilon z^2) u' + (alpha z - q) u leaves
        # nothing below degree count - 1
        u = Polynomial(bch_coefficients(p, count))
        z = Polynomial([0.0, 1.0])
        lhs = z * u.deriv(2) + Polynomial([p.gamma, p.delta, p.epsilon]) * u.deriv() + (
            p.alpha * z - p.q
        ) * u
        coef = lhs.coef
        scale = max(1.0, *np.abs(u.coef)) * (1.0 + sum(abs(v) for v in p.as_dict().values()))
        assert np.all(np.abs(coef[: count - 1]) <= 1e-12 * scale * count**2)


class TestEval:
    @given(params())
    def test_origin_normalization(self, p):
        assert bch_eval(p, 0.0).value == 1.0

    def test_constant_solution(self):
        r = bch_eval(BchParams(1, 0, 0, 0, 0), 5.0)
        assert (r.value, r.derivative) == (1.0, 0.0)

    def test_matches_exact_summation(self):
        p = BchParams(2, 1, 0, 0, 2)
        r = bch_eval(p, 0.5, rel_tol=1e-15)
        ref = exact_partial_sum(p, 0.5, 2 * r.terms)
        assert r.value == pytest.approx(float(ref), rel=1e-15)

    @pytest.mark.parametrize("q, z", [(0.7, 0.3), (2.0, 4.0), (1.5, 20.0)])
    def test_bessel_case(self, q, z):
        # z u'' + u' - q u = 0 is solved by I_0(2 sqrt(q z))
        r = bch_eval(BchParams(1, 0, 0, 0, q), z, rel_tol=1e-14)
        arg = 2.0 * math.sqrt(q * z)
        assert r.value == pytest.approx(special.iv(0, arg), rel=1e-13)
        assert r.derivative == pytest.approx(special.iv(1, arg) * math.sqrt(q / z), rel=1e-13)

    @pytest.mark.parametrize("a, b, z", [(0.5, 1.5, 2.0), (-2.5, 3.2, 7.0), (1.3, 0.4, 10.0)])
    def test_kummer_case(self, a, b, z):
        # delta = -1, q = a turns the equation into Kummer's: H_B = M(a, b, z)
        r = bch_eval(BchParams(b, -1.0, 0.0, 0.0, a), z, rel_tol=1e-14)
        assert r.value == pytest.approx(special.hyp1f1(a, b, z), rel=1e-12)
        assert r.derivative == pytest.approx(a / b * special.hyp1f1(a + 1, b + 1, z), rel=1e-12)

    @pytest.mark.parametrize("z", [40.0, 120.0])
    def test_cancelling_series(self, z):
        # M(1, 2, -z) = (1 - e^-z)/z: alternating terms far larger than the sum
        r = bch_eval(BchParams(2.0, 1.0, 0.0, 0.0, -1.0), z, rel_tol=1e-13)
        assert r.arbitrary_precision
        assert r.value == pytest.approx(-math.expm1(-z) / z, rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(params(), st.floats(0.01, 3.0))
    def test_halved_tolerance_agrees(self, p, z):
        loose = bch_eval(p, z, rel_tol=1e-10)
        tight = bch_eval(p, z, rel_tol=5e-11)
        assert tight.value == pytest.approx(loose.value, rel=1e-10, abs=1e-10 * abs(tight.value))

    def test_term_cap_raises_with_partial_sum(self):
        with pytest.raises(ConvergenceError) as info:
            bch_eval(BchParams(1, 0, 0, 0, 5.0), 10.0, max_terms=5)
        assert info.value.terms == 5
        assert info.value.partial_sum > 1.0

    @pytest.mark.parametrize("kwargs", [{"z": -1.0}, {"z": 1.0, "rel_tol": 0.0}, {"z": 1.0, "max_terms": 1}])
    def test_bad_arguments(self, kwargs):
        with pytest.raises(ParameterError):
            bch_eval(BchParams(1), **kwargs)


class TestQuasiPolynomial:
    def test_degree_zero(self):
        assert quasipoly_q_values(1.5, 0.3, -2.0, 0) == [0.0]

    @pytest.mark.parametrize("gamma, delta, epsilon", [(1, 0, -1), (2.5, 1.0, -2.0), (3, -2.0, 0.5)])
    def test_degree_one_quadratic(self, gamma, delta, epsilon):
        roots = np.roots([1.0, -delta, epsilon * gamma])
        expected = sorted(r.real for r in roots if abs(r.imag) < 1e-12)
        assert quasipoly_q_values(gamma, delta, epsilon, 1) == pytest.approx(expected, abs=1e-13)

    def test_symmetric_pair(self):
        assert quasipoly_q_values(1, 0, -1, 1) == pytest.approx([-1.0, 1.0], abs=1e-13)

    def test_no_real_roots(self):
        # q^2 + 1 = 0
        assert quasipoly_q_values(1, 0, 1, 1) == []

    def test_termination_polynomial_degree(self):
        assert termination_polynomial(2.0, 1.0, -1.0, 4).degree() == 5

    @settings(max_examples=40, deadline=None)
    @given(gammas, small, st.floats(-3.0, -0.1), st.integers(0, 8))
    def test_series_terminates(self, gamma, delta, epsilon, n):
        for q in quasipoly_q_values(gamma, delta, epsilon, n):
            c = bch_coefficients(BchParams(gamma, delta, epsilon, -epsilon * n, q), n + 5)
            head = max(abs(v) for v in c[: n + 1])
            assert max(abs(v) for v in c[n + 1 :]) <= 1e-12 * head

    def test_negative_epsilon_gives_full_set(self):
        # with epsilon < 0 the tridiagonal problem is symmetrizable: n + 1 real roots
        assert len(quasipoly_q_values(1.5, 0.4, -1.0, 6)) == 7

    def test_rejects_negative_degree(self):
        with pytest.raises(ParameterError):
            quasipoly_q_values(1, 0, -1, -1)
