import math

import numpy as np
import pytest

from biheun.bch import bch_eval
from biheun.errors import EvaluationError, ParameterError, ReductionError, TrivialFamilyError
from biheun.potentials import (
    FAMILIES,
    NATURAL,
    PotentialSpec,
    UnitSystem,
    coordinate_transform,
    inverse_transform,
)
from biheun.reduction import (
    BranchPolicy,
    assemble_wavefunction,
    default_grid,
    ode_residual,
    power_coefficients,
    prefactor_from_gamma,
    reduce_to_bch,
)
from biheun.spectra import isr_energy_quasipoly
from cases import reduction_cases

OSCILLATOR = PotentialSpec(0, (0.0, 0.0, 0.5, 0.0, 0.0))


class Analytic:
    """Closed-form wavefunction with the evaluator interface."""

    def __init__(self, f, df):
        self.f, self.df = f, df

    def evaluate(self, x):
        return self.f(x), self.df(x)

    def __call__(self, x):
        return self.f(x)


def solved(spec, energy, units=NATURAL, policy=BranchPolicy()):
    params, ansatz = reduce_to_bch(spec, energy, units, policy)
    return params, ansatz, assemble_wavefunction(params, ansatz, spec, energy, units)


class TestPrefactor:
    @pytest.mark.parametrize("m1", [-1, -0.5, 0.5, 1])
    def test_constant_theta(self, m1):
        assert prefactor_from_gamma(m1, m1, 0, 0) == (0.0, 0.0, 0.0)

    @pytest.mark.parametrize(
        "args, expected", [((0, 1, 0, 0), (0.5, 0, 0)), ((-1, 2, -4, 0), (1.5, -2, 0))]
    )
    def test_examples(self, args, expected):
        assert prefactor_from_gamma(*args) == expected

    @pytest.mark.parametrize("m1", [float(f) for f in FAMILIES])
    def test_solves_first_order_system(self, m1):
        rng = np.random.default_rng(7)
        gamma, delta, epsilon = rng.uniform(0.2, 3.0), rng.normal(), rng.normal()
        a0, a1, a2 = prefactor_from_gamma(m1, gamma, delta, epsilon)
        for z in rng.uniform(0.1, 4.0, 5):
            # 2 theta'/theta + rho'/rho with rho = z^m1
            lhs = 2.0 * (a0 / z + a1 + 2.0 * a2 * z) + m1 / z
            assert lhs == pytest.approx(gamma / z + delta + epsilon * z, rel=1e-13)


class TestReduction:
    def test_oscillator_first_excited_state(self):
        # E = 3/2 on the gamma = 2 branch closes the series at degree 0,
        # so psi = x exp(-x^2/2)
        params, ansatz, psi = solved(OSCILLATOR, 1.5)
        assert (params.gamma, params.epsilon, params.alpha, params.q) == (2.0, -2.0, 0.0, 0.0)
        assert ansatz.alpha2 == -0.5 and ansatz.alpha1 == 0.0 and ansatz.alpha0 == 1.0
        for x in (0.1, 0.7, 2.0, 3.5):
            assert psi(x) == pytest.approx(x * math.exp(-x * x / 2), rel=1e-14)
        assert psi(1e-8) / 1e-8 == pytest.approx(1.0, rel=1e-12)

    def test_oscillator_ground_state_is_not_regular_branch(self):
        # the even ground state needs gamma = 0, which the series excludes
        with pytest.raises(ReductionError) as info:
            reduce_to_bch(OSCILLATOR, 0.5, policy=BranchPolicy("minus"))
        assert info.value.slot == -2

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_inverse_square_root_levels(self, n):
        spec = PotentialSpec(-1, (0.0, -1.0, 0.0, 0.0, 0.0))
        energy = isr_energy_quasipoly(n, -1.0)
        params, ansatz, psi = solved(spec, energy)
        assert params.gamma == 3.0 and ansatz.alpha0 == 2.0
        assert ode_residual(psi, spec, energy) <= 1e-6

    def test_inverse_square_root_regular_exponent_excluded(self):
        # psi(0) != 0 needs gamma = -1 in z = sqrt(2x); the closed-form
        # quasi-polynomial levels live there, outside the regular series
        spec = PotentialSpec(-1, (0.0, -1.0, 0.0, 0.0, 0.0))
        with pytest.raises(ReductionError) as info:
            reduce_to_bch(spec, isr_energy_quasipoly(1, -1.0), policy=BranchPolicy("minus"))
        assert info.value.slot == -2

    def test_trivial_family(self):
        with pytest.raises(TrivialFamilyError):
            reduce_to_bch(PotentialSpec(0, (0.3, 0, 0, 0, 0)), 1.0)

    def test_complex_exponents(self):
        with pytest.raises(ReductionError) as info:
            reduce_to_bch(PotentialSpec(0, (0, 0, 1, 0, -1.0)), 0.5)
        assert info.value.slot == -2 and info.value.family == 0

    def test_unconfined_quadratic_slot(self):
        with pytest.raises(ReductionError) as info:
            reduce_to_bch(PotentialSpec(0, (0, 0, -1.0, 0, 0)), 0.5)
        assert info.value.slot == 2

    def test_unmatched_linear_slot(self):
        with pytest.raises(ReductionError) as info:
            reduce_to_bch(PotentialSpec(0, (0, 1.0, 0, 0, 0.5)), -0.5)
        assert info.value.slot == 1

    @pytest.mark.parametrize("family", FAMILIES)
    def test_coefficient_expansion(self, family):
        # k (E - V(x(z))) z^(-2 m1) against its Laurent expansion at random z
        rng = np.random.default_rng(3)
        spec = PotentialSpec(family, tuple(rng.uniform(-1, 1, 5)), x0=0.4)
        units = UnitSystem(hbar=1.3, mass=0.7)
        energy = 0.37
        f = power_coefficients(spec, energy, units)
        for z in rng.uniform(0.2, 3.0, 5):
            x = spec.x0 + inverse_transform(family, z)
            lhs = units.k * (energy - spec(x)) * z ** (-2 * float(family))
            rhs = sum(c * z**j for j, c in f.items())
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestWavefunction:
    def test_vanishes_at_origin_with_positive_exponent(self):
        spec = PotentialSpec(-1, (0.0, -1.0, 0.0, 0.0, 0.0))
        _, ansatz, psi = solved(spec, -0.3)
        assert ansatz.alpha0 > 0
        values = [abs(psi(x)) for x in (1e-2, 1e-4, 1e-6)]
        assert values[0] > values[1] > values[2] and values[2] < 1e-5

    @pytest.mark.parametrize("family, spec, energy", reduction_cases(seed=11, draws=1))
    def test_recomposition(self, family, spec, energy):
        params, ansatz, psi = solved(spec, energy)
        for x in default_grid(spec, 7):
            z = coordinate_transform(family, x - spec.x0)
            theta = z**ansatz.alpha0 * math.exp(ansatz.alpha1 * z + ansatz.alpha2 * z * z)
            assert psi(x) == pytest.approx(theta * bch_eval(params, z).value, rel=1e-12)

    def test_derivative_by_differences(self):
        spec = PotentialSpec("-1/2", (0.2, 0.8, -0.3, 0.1, 0.4))
        _, _, psi = solved(spec, -0.2)
        for x in (0.3, 1.0, 2.5):
            h = 1e-5
            fd = (psi(x + h) - psi(x - h)) / (2 * h)
            assert psi.evaluate(x)[1] == pytest.approx(fd, rel=1e-7)

    def test_family_mismatch(self):
        params, ansatz = reduce_to_bch(OSCILLATOR, 1.5)
        with pytest.raises(ParameterError):
            assemble_wavefunction(params, ansatz, PotentialSpec(-1, (0, -1, 0, 0, 0)), 1.5, NATURAL)


class TestResidual:
    def test_analytic_ground_state(self):
        psi = Analytic(lambda x: math.exp(-x * x / 2), lambda x: -x * math.exp(-x * x / 2))
        assert ode_residual(psi, OSCILLATOR, 0.5) <= 1e-8

    def test_wrong_energy_detected(self):
        psi = Analytic(lambda x: math.exp(-x * x / 2), lambda x: -x * math.exp(-x * x / 2))
        assert ode_residual(psi, OSCILLATOR, 0.6) > 1e-3

    def test_zero_function_rejected(self):
        with pytest.raises(EvaluationError) as info:
            ode_residual(Analytic(lambda x: 0.0, lambda x: 0.0), OSCILLATOR, 0.5)
        assert info.value.index == 0

    def test_needs_five_points(self):
        psi = Analytic(math.exp, math.exp)
        with pytest.raises(ParameterError):
            ode_residual(psi, OSCILLATOR, 0.5, grid=[1.0, 2.0, 3.0])

    def test_out_of_domain_point_reports_index(self):
        spec = PotentialSpec(-1, (0.0, -1.0, 0.0, 0.0, 0.0))
        _, _, psi = solved(spec, -0.3)
        with pytest.raises(EvaluationError) as info:
            ode_residual(psi, spec, -0.3, grid=[0.5, 1.0, 1.5, 2.0, -1.0])
        assert info.value.index == 4

    @pytest.mark.parametrize("family", FAMILIES)
    def test_randomized_draws(self, family):
        cases = [c for c in reduction_cases(seed=5, draws=3) if c[0] == family]
        for _, spec, energy in cases:
            _, _, psi = solved(spec, energy)
            assert ode_residual(psi, spec, energy) <= 1e-6

    @pytest.mark.parametrize("decaying", [True, False])
    def test_other_branches_still_solve(self, decaying):
        # the minus gamma root and the growing exponential are local solutions too
        spec = PotentialSpec(0, (0.1, -0.4, 0.6, 0.3, 0.35))
        policy = BranchPolicy("minus", decaying)
        params, ansatz, psi = solved(spec, 0.2, policy=policy)
        plus, _ = reduce_to_bch(spec, 0.2)
        assert params.gamma != plus.gamma
        assert ode_residual(psi, spec, 0.2) <= 1e-6

    def test_units_enter_through_k(self):
        units = UnitSystem(hbar=0.8, mass=1.7)
        spec = PotentialSpec(-1, (0.0, -1.2, 0.0, 0.0, 0.1))
        _, _, psi = solved(spec, -0.4, units)
        assert ode_residual(psi, spec, -0.4, units) <= 1e-6
        assert ode_residual(psi, spec, -0.4) > 1e-3


def test_default_grid_is_two_decades():
    grid = default_grid(PotentialSpec(0, (0, 1, 0, 0, 0), x0=2.0), 200)
    assert len(grid) == 200
    assert grid[0] == pytest.approx(2.05) and grid[-1] == pytest.approx(7.0)
    z = [math.exp(x) for x in default_grid(PotentialSpec(1, (0, 1, 0, 0, 0)), 50)]
    assert z[-1] / z[0] == pytest.approx(100.0)
