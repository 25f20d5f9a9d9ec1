"""
The five bi-confluent Heun potential families and the relativistic
scalar/vector potential constructions built on top of a Schrödinger
potential V(x).

Families are labelled by m1, the power in dz/dx = z**m1:

    m1 = -1    V0 + V1/x**(1/2) + V2/x + V3/x**(3/2) + V4/x**2    z = sqrt(2x)
    m1 = -1/2  V0 + V1 x**(2/3) + V2/x**(2/3) + V3/x**(4/3) + V4/x**2
                                                          z = (3x/2)**(2/3)
    m1 = 0     V0 + V1 x + V2 x**2 + V3/x + V4/x**2          z = x
    m1 = 1/2   V0 + V1 x**2 + V2 x**4 + V3 x**6 + V4/x**2     z = x**2/4
    m1 = 1     V0 + V1 e**x + V2 e**2x + V3 e**3x + V4 e**4x  z = e**x

Coefficients carry whatever length powers their term needs; x is always
measured from the offset x0.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError

FAMILIES = (Fraction(-1), Fraction(-1, 2), Fraction(0), Fraction(1, 2), Fraction(1))

# powers of (x - x0) multiplying V1..V4; None marks the exponential family
_POWERS = {
    Fraction(-1): (-0.5, -1.0, -1.5, -2.0),
    Fraction(-1, 2): (2 / 3, -2 / 3, -4 / 3, -2.0),
    Fraction(0): (1.0, 2.0, -1.0, -2.0),
    Fraction(1, 2): (2.0, 4.0, 6.0, -2.0),
    Fraction(1): None,
}


def as_family(m1):
    """Normalize a family label (float, str such as '-1/2', or Fraction)."""
    try:
        fam = Fraction(m1)
    except (TypeError, ValueError, ZeroDivisionError):
        raise DomainError(f"unknown potential family {m1!r}") from None
    if fam not in FAMILIES:
        raise DomainError(f"m1={m1} is not one of the five families -1, -1/2, 0, 1/2, 1")
    return fam


def is_singular(family):
    return as_family(family) != 1


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants. Natural units (all ones) by default."""

    hbar: float = 1.0
    mass: float = 1.0
    c: float = 1.0
    q0: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "c", "q0"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value}")

    @property
    def lambda_bar(self):
        """Reduced wavelength hbar/(m c)."""
        return self.hbar / (self.mass * self.c)

    @property
    def rest_energy(self):
        return self.mass * self.c**2

    @property
    def k(self):
        """2m/hbar**2, the factor multiplying E - V in the Schrödinger equation."""
        return 2.0 * self.mass / self.hbar**2

    def as_dict(self):
        return {"hbar": self.hbar, "mass": self.mass, "c": self.c, "q0": self.q0}


NATURAL = UnitSystem()


@dataclass(frozen=True)
class PotentialSpec:
    """One member of a bi-confluent Heun family.

    Parameters
    ----------
    family : Fraction
        m1 in {-1, -1/2, 0, 1/2, 1}.
    v : tuple of float
        Coefficients V0..V4.
    x0 : float
        Coordinate offset; the formula is applied to x - x0.
    """

    family: Fraction
    v: tuple = field(default=(0.0, 0.0, 0.0, 0.0, 0.0))
    x0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", as_family(self.family))
        v = tuple(float(c) for c in self.v)
        if len(v) != 5:
            raise DomainError(f"expected five coefficients V0..V4, got {len(v)}")
        object.__setattr__(self, "v", v)

    def in_domain(self, x):
        return self.family == 1 or x > self.x0

    def __call__(self, x):
        return potential_eval(self, x)

    def as_dict(self):
        return {"family": str(self.family), "v": list(self.v), "x0": self.x0}


def potential_eval(spec, x):
    """Evaluate the family expression at x (shifted by x0)."""
    if not spec.in_domain(x):
        raise DomainError(f"x={x} is outside the domain x > {spec.x0} of family m1={spec.family}")
    s = x - spec.x0
    v0, *rest = spec.v
    powers = _POWERS[spec.family]
    if powers is None:
        e = math.exp(s)
        return v0 + sum(c * e ** (j + 1) for j, c in enumerate(rest) if c)
    return v0 + sum(c * s**p for c, p in zip(rest, powers) if c)


def coordinate_transform(family, x):
    """Map x (already measured from x0) to z."""
    fam = as_family(family)
    if fam == 1:
        return math.exp(x)
    if x <= 0:
        raise DomainError(f"x={x} must be positive for family m1={fam}")
    if fam == -1:
        return math.sqrt(2.0 * x)
    if fam == Fraction(-1, 2):
        return (1.5 * x) ** (2.0 / 3.0)
    if fam == 0:
        return float(x)
    return x * x / 4.0


def inverse_transform(family, z):
    """Map z back to x; inverse of :func:`coordinate_transform`."""
    fam = as_family(family)
    if not z > 0:
        raise DomainError(f"z={z} must be positive")
    if fam == 1:
        return math.log(z)
    if fam == -1:
        return z * z / 2.0
    if fam == Fraction(-1, 2):
        return z**1.5 / 1.5
    if fam == 0:
        return float(z)
    return 2.0 * math.sqrt(z)


def isr_spec_from_length(units, d):
    """Inverse-square-root potential V = -m c^2 (lambda_bar/sqrt(d)) / sqrt(x)."""
    if not d > 0:
        raise DomainError(f"characteristic length d must be positive, got {d}")
    v1 = -units.rest_energy * units.lambda_bar / math.sqrt(d)
    return PotentialSpec(-1, (0.0, v1, 0.0, 0.0, 0.0))


def isr_length_from_strength(units, v0):
    """Characteristic length d = (m c^2 lambda_bar / V0)**2 of V0/sqrt(x)."""
    if not v0 < 0:
        raise DomainError(f"inverse-square-root strength must be negative, got {v0}")
    return (units.rest_energy * units.lambda_bar / v0) ** 2


@dataclass(frozen=True)
class ScalarVectorPair:
    """The products q0*phi and q0**2 * A**2."""

    phi_times_q0: float
    A2_times_q0sq: float = 0.0

    def __post_init__(self):
        if self.A2_times_q0sq < 0:
            raise DomainError(f"q0^2 A^2 must be non-negative, got {self.A2_times_q0sq}")


def vector_potential_sq(V, units):
    """q0^2 A^2 = -2 m c^2 V for a purely vector coupling (requires V < 0)."""
    if not V < 0:
        raise DomainError(f"a pure vector potential needs V < 0, got V={V}")
    return -2.0 * units.rest_energy * V


def _check_branch(branch):
    if branch not in ("plus", "minus"):
        raise DomainError(f"branch must be 'plus' or 'minus', got {branch!r}")


def scalar_potential(V, A2, branch, units):
    """Scalar potential q0*phi reproducing V for a given q0^2 A^2.

    Solves V = q0 phi + (q0 phi)^2/(2mc^2) - q0^2 A^2/(2mc^2) for q0 phi in
    the rationalized form 2W/(1 +/- sqrt(1 + 2W/mc^2)), W = V + q0^2A^2/(2mc^2).
    """
    _check_branch(branch)
    if A2 < 0:
        raise DomainError(f"q0^2 A^2 must be non-negative, got {A2}")
    mc2 = units.rest_energy
    w = V + A2 / (2.0 * mc2)
    disc = 1.0 + 2.0 * w / mc2
    if disc < 0:
        raise DomainError(f"no real scalar potential: 1 + 2W/mc^2 = {disc} < 0")
    root = math.sqrt(disc)
    if branch == "plus":
        return 2.0 * w / (1.0 + root)
    # 2W/(1 - root) rewritten as -mc^2 (1 + root): no cancellation near W = 0
    return -mc2 * (1.0 + root)


def potential_from_scalar(phi_q0, A2, units):
    """Schrödinger potential V = q0 phi + ((q0 phi)^2 - q0^2 A^2)/(2 m c^2)."""
    mc2 = units.rest_energy
    return phi_q0 + (phi_q0 * phi_q0 - A2) / (2.0 * mc2)


def isr_threshold(d, units):
    """Smallest x = 4 lambda_bar^2/d where the scalar potentials are real."""
    return 4.0 * units.lambda_bar**2 / d


def isr_scalar_potentials(x, d, branch, units):
    """q0 phi(x) = -mc^2 (2s)/(1 +/- sqrt(1 - 2s)), s = lambda_bar/sqrt(x d)."""
    _check_branch(branch)
    if not d > 0:
        raise DomainError(f"d must be positive, got {d}")
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    s = units.lambda_bar / math.sqrt(x * d)
    arg = 1.0 - 2.0 * s
    if arg < 0:
        raise DomainError(
            f"x={x} lies below the threshold {isr_threshold(d, units)}; "
            "no real scalar potential"
        )
    root = math.sqrt(arg)
    if branch == "plus":
        return -units.rest_energy * 2.0 * s / (1.0 + root)
    return -units.rest_energy * (1.0 + root)
