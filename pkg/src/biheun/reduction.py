"""
Reduction of the Schrödinger equation with a bi-confluent Heun potential
to the bi-confluent Heun equation.

With z = z(x), rho = dz/dx = z**m1 and psi = theta(z) u(z), the prefactor

    theta = z**alpha0 * exp(alpha1 z + alpha2 z**2)

turns the Schrödinger equation into the BCH equation for u. Writing
k (E - V(x(z))) z**(-2 m1) = sum_{j=-2..2} f_j z**j (k = 2m/hbar**2), the
matching conditions on powers of z are

    z^-2 :  alpha0**2 + (m1 - 1) alpha0 + f_-2 = 0
    z^2  :  4 alpha2**2 + f_2 = 0
    z^1  :  4 alpha1 alpha2 + f_1 = 0
    z^0  :  alpha = alpha1**2 + 2 alpha2 (1 + gamma) + f_0
    z^-1 :  q = -(gamma alpha1 + f_-1)

and gamma = 2 alpha0 + m1, delta = 2 alpha1, epsilon = 4 alpha2.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bch import BchParams, bch_eval
from .errors import (
    BiheunError,
    DomainError,
    EvaluationError,
    ParameterError,
    ReductionError,
    TrivialFamilyError,
)
from .potentials import (
    NATURAL,
    coordinate_transform,
    inverse_transform,
    potential_eval,
)


@dataclass(frozen=True)
class BranchPolicy:
    """Which root to take where the matching equations are quadratic.

    gamma_root : 'plus' takes gamma = 1 + sqrt(...), which always gives
        alpha0 >= 0; 'minus' takes the other exponent.
    decaying : pick alpha2 < 0 (or alpha1 < 0 when alpha2 = 0).
    """

    gamma_root: str = "plus"
    decaying: bool = True

    def __post_init__(self):
        if self.gamma_root not in ("plus", "minus"):
            raise ParameterError(f"gamma_root must be 'plus' or 'minus', got {self.gamma_root!r}")


DEFAULT_POLICY = BranchPolicy()


@dataclass(frozen=True)
class SolutionAnsatz:
    alpha0: float
    alpha1: float
    alpha2: float
    family: Fraction

    @property
    def decays(self):
        return self.alpha2 < 0 or (self.alpha2 == 0 and self.alpha1 < 0)

    def as_dict(self):
        return {
            "alpha0": self.alpha0,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "family": str(self.family),
        }


def prefactor_from_gamma(m1, gamma, delta, epsilon):
    """Exponents (alpha0, alpha1, alpha2) of theta for given BCH parameters.

    Integrating 2 theta_z/theta + m1/z = gamma/z + delta + epsilon z gives
    alpha0 = (gamma - m1)/2, alpha1 = delta/2, alpha2 = epsilon/4.
    """
    return ((gamma - float(m1)) / 2.0, delta / 2.0, epsilon / 4.0)


def power_coefficients(spec, E, units=NATURAL):
    """Coefficients f_-2..f_2 of k (E - V) z**(-2 m1) as a dict keyed by power."""
    k = units.k
    v0, v1, v2, v3, v4 = spec.v
    fam = spec.family
    if fam == -1:
        f = {2: k * (E - v0), 1: -k * math.sqrt(2.0) * v1, 0: -2.0 * k * v2,
             -1: -2.0 * math.sqrt(2.0) * k * v3, -2: -4.0 * k * v4}
    elif fam == Fraction(-1, 2):
        c = (2.0 / 3.0) ** (2.0 / 3.0)
        f = {2: -k * c * v1, 1: k * (E - v0), 0: -k * v2 / c,
             -1: -k * v3 / (c * c), -2: -2.25 * k * v4}
    elif fam == 0:
        f = {2: -k * v2, 1: -k * v1, 0: k * (E - v0), -1: -k * v3, -2: -k * v4}
    elif fam == Fraction(1, 2):
        f = {2: -64.0 * k * v3, 1: -16.0 * k * v2, 0: -4.0 * k * v1,
             -1: k * (E - v0), -2: -0.25 * k * v4}
    else:
        f = {2: -k * v4, 1: -k * v3, 0: -k * v2, -1: -k * v1, -2: k * (E - v0)}
    return f


def reduce_to_bch(spec, E, units=NATURAL, policy=DEFAULT_POLICY):
    """Match a potential and energy onto BCH parameters and a prefactor.

    Returns
    -------
    (BchParams, SolutionAnsatz)

    Raises
    ------
    TrivialFamilyError
        If V1..V4 all vanish.
    ReductionError
        If a matching equation has no real solution or the chosen branch
        gives gamma a non-positive integer.
    """
    fam = spec.family
    m1 = float(fam)
    if not any(spec.v[1:]):
        raise TrivialFamilyError(
            f"family m1={fam}: only the constant slot V0 is set, nothing to reduce",
            family=fam,
        )
    f = power_coefficients(spec, E, units)

    disc = (1.0 - m1) ** 2 - 4.0 * f[-2]
    if disc < 0:
        raise ReductionError(
            f"family m1={fam}: indicial equation has complex exponents "
            f"(discriminant {disc:.6g}); the z^-2 slot is too attractive",
            family=fam, slot=-2,
        )
    root = math.sqrt(disc)
    gamma = 1.0 + root if policy.gamma_root == "plus" else 1.0 - root
    if gamma <= 0 and float(gamma).is_integer():
        raise ReductionError(
            f"family m1={fam}: branch '{policy.gamma_root}' gives gamma={gamma}, "
            "a non-positive integer",
            family=fam, slot=-2,
        )

    sign = -1.0 if policy.decaying else 1.0
    if f[2] > 0:
        raise ReductionError(
            f"family m1={fam}: z^2 coefficient {f[2]:.6g} > 0 needs an imaginary alpha2",
            family=fam, slot=2,
        )
    alpha2 = sign * math.sqrt(-f[2]) / 2.0
    if alpha2 != 0:
        alpha1 = -f[1] / (4.0 * alpha2)
    elif f[1] != 0:
        raise ReductionError(
            f"family m1={fam}: z^1 term {f[1]:.6g} cannot be matched when the z^2 term vanishes",
            family=fam, slot=1,
        )
    else:
        alpha1 = sign * math.sqrt(-f[0]) if f[0] < 0 else 0.0

    alpha0 = (gamma - m1) / 2.0
    alpha = alpha1 * alpha1 + 2.0 * alpha2 * (1.0 + gamma) + f[0]
    q = -(gamma * alpha1 + f[-1])
    params = BchParams(gamma, 2.0 * alpha1, 4.0 * alpha2, alpha, q)
    return params, SolutionAnsatz(alpha0, alpha1, alpha2, fam)


@dataclass(frozen=True)
class WavefunctionEvaluator:
    """psi(x) = z**alpha0 exp(alpha1 z + alpha2 z**2) H_B(z), z = z(x - x0)."""

    ansatz: SolutionAnsatz
    bch: BchParams
    spec: object
    energy: float
    units: object = NATURAL
    rel_tol: float = 1e-14
    max_terms: int = 20000

    def z_of(self, x):
        if not self.spec.in_domain(x):
            raise DomainError(f"x={x} outside the domain of family m1={self.spec.family}")
        return coordinate_transform(self.ansatz.family, x - self.spec.x0)

    def prefactor(self, z):
        a = self.ansatz
        return z**a.alpha0 * math.exp(a.alpha1 * z + a.alpha2 * z * z)

    def evaluate(self, x):
        """Return (psi, dpsi/dx) at x."""
        a = self.ansatz
        z = self.z_of(x)
        h = bch_eval(self.bch, z, self.rel_tol, self.max_terms)
        theta = self.prefactor(z)
        psi = theta * h.value
        log_deriv = a.alpha1 + 2.0 * a.alpha2 * z + (a.alpha0 / z if a.alpha0 else 0.0)
        dpsi_dz = theta * (log_deriv * h.value + h.derivative)
        rho = z ** float(a.family)
        return psi, rho * dpsi_dz

    def __call__(self, x):
        return self.evaluate(x)[0]


def assemble_wavefunction(bch, ansatz, spec, E, units=NATURAL):
    if ansatz.family != spec.family:
        raise ParameterError("ansatz and potential belong to different families")
    return WavefunctionEvaluator(ansatz, bch, spec, E, units)


def default_grid(spec, points=200, lo=0.05, hi=5.0):
    """Log-spaced grid over two decades above x0.

    For the exponential family the two decades are taken in z = e^x, which
    makes the x grid uniform.
    """
    if spec.family == 1:
        zs = np.geomspace(lo, hi, points)
        return [spec.x0 + inverse_transform(1, z) for z in zs]
    return list(spec.x0 + np.geomspace(lo, hi, points))


def _second_difference(f, x, h, center):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * center + 16 * f(x - h) - f(x - 2 * h)) / (
        12.0 * h * h
    )


def ode_residual(psi, spec, E, units=NATURAL, grid=None, step=2e-3):
    """Largest normalized residual of psi'' + k (E - V) psi over ``grid``.

    psi'' comes from a five-point centered difference with spacing ``step``
    times the local length L, the smaller of the distance to x0 (1 for the
    exponential family) and the local wavelength 1/sqrt(k |E - V|). Each
    residual is divided by

        max(|psi''|, |k (E - V) psi|, |psi'|/L, |psi|/L**2)

    which stays finite at nodes and in exponentially small tails.
    """
    if grid is None:
        grid = default_grid(spec)
    grid = list(grid)
    if len(grid) < 5:
        raise ParameterError(f"need at least 5 grid points, got {len(grid)}")
    k = units.k
    worst = 0.0
    for i, x in enumerate(grid):
        try:
            pot = potential_eval(spec, x)
            length = 1.0 if spec.family == 1 else x - spec.x0
            wave = k * abs(E - pot)
            if wave * length * length > 1.0:
                length = 1.0 / math.sqrt(wave)
            val, der = psi.evaluate(x)
            d2 = _second_difference(psi, x, step * length, val)
        except BiheunError as exc:
            raise EvaluationError(
                f"evaluation failed at grid point {i} (x={x}): {exc}", index=i
            ) from exc
        coupling = k * (E - pot) * val
        scale = max(abs(d2), abs(coupling), abs(der) / length, abs(val) / length**2)
        if scale == 0 or not math.isfinite(scale):
            raise EvaluationError(f"degenerate wavefunction scale at grid point {i} (x={x})", index=i)
        worst = max(worst, abs(d2 + coupling) / scale)
    return worst
