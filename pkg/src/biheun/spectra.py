"""
Bound-state spectra of the inverse-square-root potential V0/sqrt(x) and
their image under the relativistic energy map.

Schrödinger levels::

    E_n = (V0/2) (-m V0/hbar^2)^(1/3) (n + i_M)^(-2/3)

with Maslov index i_M = 0 for quasi-polynomial states (exact) and
i_M = -1/6 for states vanishing at the origin (approximate).

Relativistic levels follow from W = -mc^2 sqrt(1 + 2E/mc^2). Writing V0
through a length d, V0 = -mc^2 lambda_bar/sqrt(d), the radicand becomes
1 - (lambda_bar/((n + i_M) d))^(2/3), so a level exists only when
(n + i_M) d > lambda_bar.
"""

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError, ForbiddenStateError, ParameterError
from .potentials import NATURAL, isr_length_from_strength

_KINDS = ("quasipoly", "dirichlet", "custom")


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str = "quasipoly"
    maslov_index: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown boundary condition {self.kind!r}")
        fixed = {"quasipoly": 0.0, "dirichlet": -1.0 / 6.0}
        if self.kind in fixed and self.maslov_index != fixed[self.kind]:
            object.__setattr__(self, "maslov_index", fixed[self.kind])

    @classmethod
    def parse(cls, text, maslov_index=None):
        if text == "custom":
            if maslov_index is None:
                raise ParameterError("custom boundary condition needs a Maslov index")
            return cls("custom", float(maslov_index))
        return cls(text)

    def effective_index(self, n):
        return n + self.maslov_index


QUASIPOLY = BoundaryCondition("quasipoly")
DIRICHLET = BoundaryCondition("dirichlet")


def _check_level(n):
    if int(n) != n or n < 1:
        raise DomainError(f"level index must be a positive integer, got {n}")


def _check_strength(V0):
    if not V0 < 0:
        raise DomainError(f"bound states need an attractive strength V0 < 0, got {V0}")


def isr_energy(n, V0, units=NATURAL, bc=QUASIPOLY):
    """Schrödinger level n of V0/sqrt(x) for the given boundary condition."""
    _check_level(n)
    _check_strength(V0)
    nu = bc.effective_index(n)
    if nu <= 0:
        raise DomainError(f"effective index n + i_M = {nu} must be positive")
    scale = (-units.mass * V0 / units.hbar**2) ** (1.0 / 3.0)
    return 0.5 * V0 * scale * nu ** (-2.0 / 3.0)


def isr_energy_quasipoly(n, V0, units=NATURAL):
    return isr_energy(n, V0, units, QUASIPOLY)


def isr_energy_dirichlet(n, V0, units=NATURAL):
    return isr_energy(n, V0, units, DIRICHLET)


def schrodinger_to_rwe(E, units=NATURAL, sign="minus"):
    """Relativistic energy W = +/- mc^2 sqrt(1 + 2E/mc^2).

    Raises
    ------
    ForbiddenStateError
        When 1 + 2E/mc^2 < 0.
    """
    if sign not in ("plus", "minus"):
        raise ParameterError(f"sign must be 'plus' or 'minus', got {sign!r}")
    mc2 = units.rest_energy
    radicand = 1.0 + 2.0 * E / mc2
    if radicand < 0:
        raise ForbiddenStateError(
            f"E={E} is below -mc^2/2; no relativistic level (radicand {radicand:.6g})"
        )
    w = mc2 * math.sqrt(radicand)
    return -w if sign == "minus" else w


def rwe_to_schrodinger(W, units=NATURAL):
    """E = (W^2 - m^2 c^4) / (2 m c^2)."""
    mc2 = units.rest_energy
    return (W * W - mc2 * mc2) / (2.0 * mc2)


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    E_n: float
    W_n: float | None
    bc: str
    forbidden: bool = False

    def as_dict(self):
        return {
            "n": self.n,
            "E_n": self.E_n,
            "W_n": None if self.forbidden else self.W_n,
            "forbidden": self.forbidden,
            "bc": self.bc,
        }


def rwe_isr_spectrum(n, d, units=NATURAL, bc=QUASIPOLY):
    """Relativistic level n for V = -mc^2 (lambda_bar/sqrt(d))/sqrt(x).

    Levels with (n + i_M) d <= lambda_bar are returned with
    ``forbidden=True`` and ``W_n=None``; the marginal case W = 0 counts as
    forbidden.
    """
    _check_level(n)
    if not d > 0:
        raise DomainError(f"characteristic length d must be positive, got {d}")
    mc2 = units.rest_energy
    lam = units.lambda_bar
    nu = bc.effective_index(n)
    if nu <= 0:
        raise DomainError(f"effective index n + i_M = {nu} must be positive")
    ratio23 = (lam / (nu * d)) ** (2.0 / 3.0)
    energy = -0.5 * mc2 * ratio23
    if nu * d <= lam:
        return SpectrumEntry(n, energy, None, bc.kind, True)
    return SpectrumEntry(n, energy, -mc2 * math.sqrt(1.0 - ratio23), bc.kind, False)


def ground_state_index(lambda_over_d, bc=QUASIPOLY):
    """Lowest level n with (n + i_M) d > lambda_bar.

    This is ceil(lambda_bar/d - i_M), bumped by one when the argument is an
    exact integer since the existence condition is strict.
    """
    if not lambda_over_d > 0:
        raise DomainError(f"lambda_bar/d must be positive, got {lambda_over_d}")
    t = lambda_over_d - bc.maslov_index
    n0 = math.ceil(t)
    if n0 == t:
        n0 += 1
    return max(n0, 1)


def rwe_isr_table(levels, d, units=NATURAL, bc=QUASIPOLY):
    return [rwe_isr_spectrum(n, d, units, bc) for n in levels]


@dataclass(frozen=True)
class QuasiPolynomialState:
    """psi = P(sqrt(x)) exp(-kappa x + mu sqrt(x)), P of degree n."""

    n: int
    energy: float
    kappa: float
    mu: float
    coefficients: tuple  # P in powers of s = sqrt(x), ascending
    residual: float

    def evaluate(self, x):
        """Return (psi, dpsi/dx) at x > 0."""
        s = math.sqrt(x)
        p = sum(c * s**j for j, c in enumerate(self.coefficients))
        dp = sum(j * c * s ** (j - 1) for j, c in enumerate(self.coefficients) if j)
        g = math.exp(-self.kappa * x + self.mu * s)
        du = (dp + (-2.0 * self.kappa * s + self.mu) * p) * g
        return p * g, du / (2.0 * s)

    def __call__(self, x):
        return self.evaluate(x)[0]


def _polynomial_residual(p, kappa, mu):
    """Largest coefficient of the ODE left-hand side for P, relative to its terms.

    In s = sqrt(x) the equation for P reads, power by power,

        (j+2) j p_{j+2} + mu (2j+1) p_{j+1} + (mu^2 - 4 kappa j) p_j = 0,

    for j = -1, 0, ..., deg P.
    """
    deg = len(p) - 1

    def coef(j):
        return p[j] if 0 <= j <= deg else 0.0

    rows = []
    for j in range(-1, deg + 1):
        rows.append(((j + 2) * j * coef(j + 2), mu * (2 * j + 1) * coef(j + 1),
                     (mu * mu - 4.0 * kappa * j) * coef(j)))
    scale = max(abs(t) for row in rows for t in row)
    return max(abs(sum(row)) for row in rows) / scale


def quasipoly_state(n, V0, units=NATURAL):
    """Construct the degree-n quasi-polynomial bound state of V0/sqrt(x).

    The energy is not taken from the closed-form spectrum. Instead the two
    conditions that make a polynomial P(sqrt(x)) possible are solved
    numerically:

    * the s^(n+1) balance, mu kappa = -k V0 (k = 2m/hbar^2);
    * the s^n balance, mu^2 = 4 kappa n.

    P is then built from its three-term recurrence and every power of the
    equation, including the two lowest ones not used in the construction,
    is checked.
    """
    _check_level(n)
    _check_strength(V0)
    k = units.k

    def mismatch(kappa):
        mu = -k * V0 / kappa
        return mu * mu - 4.0 * kappa * n

    # mismatch falls monotonically from +inf to -inf in kappa > 0
    hi = 1.0
    while mismatch(hi) > 0:
        hi *= 2.0
    lo = hi / 2.0
    while mismatch(lo) < 0:
        lo /= 2.0
    kappa = brentq(mismatch, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    mu = -k * V0 / kappa

    # Backward recurrence from p_{n+1} = 0, p_n = 1; the divisor
    # mu^2 - 4 kappa j = 4 kappa (n - j) never vanishes for j < n. The
    # balances at j = 0 and j = -1 are left over as checks.
    p = [0.0] * (n + 2)
    p[n] = 1.0
    for j in range(n - 1, -1, -1):
        upper = (j + 2) * j * (p[j + 2] if j + 2 <= n else 0.0)
        p[j] = -(upper + mu * (2 * j + 1) * p[j + 1]) / (mu * mu - 4.0 * kappa * j)
    lead = max(abs(c) for c in p)
    poly = [c / lead for c in p[: n + 1]]
    residual = _polynomial_residual(poly, kappa, mu)
    energy = -kappa * kappa / k
    return QuasiPolynomialState(n, energy, kappa, mu, tuple(poly), residual)


def quasipoly_oracle_energy(n, V0, units=NATURAL):
    """Energy of the degree-n quasi-polynomial state, built without the closed form."""
    state = quasipoly_state(n, V0, units)
    if state.residual > 1e-9:
        raise ArithmeticError(
            f"quasi-polynomial construction for n={n} left residual {state.residual:.3g}"
        )
    return state.energy


def isr_strength_from_length(d, units=NATURAL):
    """V0 = -mc^2 lambda_bar / sqrt(d)."""
    if not d > 0:
        raise DomainError(f"d must be positive, got {d}")
    return -units.rest_energy * units.lambda_bar / math.sqrt(d)


__all__ = [
    "BoundaryCondition",
    "DIRICHLET",
    "QUASIPOLY",
    "SpectrumEntry",
    "QuasiPolynomialState",
    "ground_state_index",
    "isr_energy",
    "isr_energy_dirichlet",
    "isr_energy_quasipoly",
    "isr_length_from_strength",
    "isr_strength_from_length",
    "quasipoly_oracle_energy",
    "quasipoly_state",
    "rwe_isr_spectrum",
    "rwe_isr_table",
    "rwe_to_schrodinger",
    "schrodinger_to_rwe",
]
