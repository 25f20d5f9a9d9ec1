"""
Power-series evaluation of the bi-confluent Heun function.

The equation handled here is

    z u'' + (gamma + delta z + epsilon z^2) u' + (alpha z - q) u = 0,

whose solution regular at the origin with u(0) = 1 is H_B(gamma, delta,
epsilon; alpha, q; z). Substituting u = sum c_k z^k gives the three-term
recurrence

    (k+1)(k+gamma) c_{k+1} = (q - delta k) c_k - (alpha + epsilon (k-1)) c_{k-1}

with c_0 = 1, c_{-1} = 0.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConvergenceError, ParameterError

# widest float numpy offers natively (80-bit extended on x86)
_WIDE = np.longdouble
_EPS_WIDE = float(np.finfo(_WIDE).eps)


def _is_nonpositive_integer(value):
    return value <= 0 and float(value).is_integer()


@dataclass(frozen=True)
class BchParams:
    """Parameters of the bi-confluent Heun equation.

    ``gamma`` must not be zero or a negative integer, otherwise the series
    denominator (k+1)(k+gamma) vanishes.
    """

    gamma: float
    delta: float = 0.0
    epsilon: float = 0.0
    alpha: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        values = (self.gamma, self.delta, self.epsilon, self.alpha, self.q)
        if not all(math.isfinite(v) for v in values):
            raise ParameterError(f"non-finite BCH parameter in {values}")
        if _is_nonpositive_integer(self.gamma):
            raise ParameterError(
                f"gamma={self.gamma} is a non-positive integer; "
                "the regular series solution does not exist"
            )

    def as_dict(self):
        return {
            "gamma": self.gamma,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "q": self.q,
        }


def _coefficient_stream(params):
    """Yield c_0, c_1, ... in extended precision."""
    g = _WIDE(params.gamma)
    d = _WIDE(params.delta)
    e = _WIDE(params.epsilon)
    a = _WIDE(params.alpha)
    q = _WIDE(params.q)
    prev, cur = _WIDE(0), _WIDE(1)
    k = 0
    while True:
        yield cur
        nxt = ((q - d * k) * cur - (a + e * (k - 1)) * prev) / ((k + 1) * (k + g))
        prev, cur = cur, nxt
        k += 1


def bch_coefficients(params, count):
    """Return the first ``count`` Taylor coefficients of H_B about z = 0.

    Parameters
    ----------
    params : BchParams
    count : int
        Number of coefficients, at least 1.

    Returns
    -------
    list of float
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    out = []
    for c in _coefficient_stream(params):
        out.append(float(c))
        if len(out) == count:
            return out


@dataclass(frozen=True)
class BchValue:
    value: float
    derivative: float
    terms: int
    # digits of cancellation seen in the partial sums (log10 of sum|t|/|sum t|)
    cancellation: float = 0.0
    arbitrary_precision: bool = False


@lru_cache(maxsize=256)
def _wide_coefficients(params, count):
    out = np.empty(count, dtype=_WIDE)
    for k, c in zip(range(count), _coefficient_stream(params)):
        out[k] = c
    return out


def _first_converged(terms, dterms, total, dtotal, tol):
    """Index of the second of two consecutive negligible terms, or None."""
    small = (np.abs(terms) <= tol * np.abs(total)) & (np.abs(dterms) <= tol * np.abs(dtotal))
    both = small[1:] & small[:-1]
    hits = np.flatnonzero(both)
    return int(hits[0]) + 1 if hits.size else None


def _sum_extended(params, z, rel_tol, max_terms):
    zw = _WIDE(z)
    tol = _WIDE(rel_tol)
    count = min(64, max_terms)
    while True:
        c = _wide_coefficients(params, count)
        ks = np.arange(count, dtype=_WIDE)
        with np.errstate(over="ignore", invalid="ignore"):
            powers = np.full(count, zw)
            powers[0] = 1
            powers = np.cumprod(powers)
            terms = c * powers
            dterms = ks * terms / zw
            total = np.cumsum(terms)
            dtotal = np.cumsum(dterms)
        if not np.all(np.isfinite(total)) or not np.all(np.isfinite(dtotal)):
            return None
        idx = _first_converged(terms, dterms, total, dtotal, tol)
        if idx is not None:
            mass = np.abs(terms[: idx + 1]).sum()
            dmass = np.abs(dterms[: idx + 1]).sum()
            ratio = max(
                mass / abs(total[idx]) if total[idx] else np.inf,
                dmass / abs(dtotal[idx]) if dtotal[idx] else 1.0,
            )
            return total[idx], dtotal[idx], idx + 1, float(ratio)
        if count >= max_terms:
            return total[-1], None, count, None
        count = min(2 * count, max_terms)


def _mp_context(digits):
    return gmpy2.context(gmpy2.get_context(), precision=int(digits * 3.33) + 8)


@lru_cache(maxsize=64)
def _mp_coefficients(params, digits, count):
    with _mp_context(digits):
        g, d, e, a, q = (gmpy2.mpfr(v) for v in (params.gamma, params.delta,
                                                 params.epsilon, params.alpha, params.q))
        prev, cur = gmpy2.mpfr(0), gmpy2.mpfr(1)
        out = []
        for k in range(count):
            out.append(cur)
            prev, cur = cur, ((q - d * k) * cur - (a + e * (k - 1)) * prev) / ((k + 1) * (k + g))
    return tuple(out)


def _sum_mp(params, z, rel_tol, max_terms, digits):
    """Same series summed with ``digits`` significant decimal digits (gmpy2).

    Also returns log10 of the cancellation ratio sum|t|/|sum t| so the
    caller can tell whether ``digits`` was enough.
    """
    digits = 32 * -(-digits // 32)  # bucket so the coefficient cache gets hits
    count = min(256, max_terms)
    with _mp_context(digits):
        zm = gmpy2.mpfr(z)
        tol = gmpy2.mpfr(rel_tol)
        zero = gmpy2.mpfr(0)
        # kterm = k c_k z^k, so the derivative is sum(kterm) / z
        total, ktotal, mass, power = zero, zero, zero, gmpy2.mpfr(1)
        quiet = 0
        k = 0
        while k < max_terms:
            coeffs = _mp_coefficients(params, digits, count)
            for c in coeffs[k:]:
                term = c * power
                kterm = k * term
                total += term
                ktotal += kterm
                mass += abs(term)
                if abs(term) <= tol * abs(total) and abs(kterm) <= tol * abs(ktotal):
                    quiet += 1
                    if quiet >= 2:
                        lost = float(gmpy2.log10(mass / abs(total))) if total else math.inf
                        return float(total), float(ktotal / zm), k + 1, lost
                else:
                    quiet = 0
                power *= zm
                k += 1
            count = min(2 * count, max_terms)
    raise ConvergenceError(
        f"H_B series did not converge at z={z} within {max_terms} terms",
        partial_sum=float(total), terms=max_terms,
    )


def bch_eval(params, z, rel_tol=1e-15, max_terms=10000):
    """Evaluate H_B and dH_B/dz at ``z >= 0`` by direct summation.

    Summation stops once two consecutive terms of both the value series and
    the derivative series fall below ``rel_tol`` times the running sums.
    Two terms are required because parity cancellation can make a single
    term vanish early.

    The sum is first formed in extended precision. If the terms cancel so
    strongly that the rounding error would exceed ``rel_tol``, it is redone
    in multiple precision (gmpy2) with enough extra digits to absorb the
    cancellation.

    Returns
    -------
    BchValue

    Raises
    ------
    ConvergenceError
        If ``max_terms`` terms are not enough.
    """
    if rel_tol <= 0:
        raise ParameterError(f"rel_tol must be positive, got {rel_tol}")
    if max_terms < 2:
        raise ParameterError(f"max_terms must be >= 2, got {max_terms}")
    if z < 0 or not math.isfinite(z):
        raise ParameterError(f"z must be finite and >= 0, got {z}")
    if z == 0:
        c = bch_coefficients(params, 2)
        return BchValue(1.0, c[1], 1)

    result = _sum_extended(params, z, rel_tol, max_terms)
    if result is not None and result[1] is None:
        raise ConvergenceError(
            f"H_B series did not converge at z={z} within {max_terms} terms",
            partial_sum=float(result[0]), terms=max_terms,
        )
    if result is not None and math.isfinite(result[3]):
        total, dtotal, terms, ratio = result
        if ratio * _EPS_WIDE <= rel_tol:
            return BchValue(float(total), float(dtotal), terms, math.log10(ratio))
        digits = int(math.log10(ratio)) + int(-math.log10(rel_tol)) + 10
    else:
        digits = 40 + int(-math.log10(rel_tol))
    while True:
        value, deriv, terms, lost = _sum_mp(params, z, rel_tol, max_terms, digits)
        if lost - digits <= math.log10(rel_tol):
            return BchValue(value, deriv, terms, lost, arbitrary_precision=True)
        if digits > 4000:
            raise ConvergenceError(
                f"H_B series at z={z} cancels beyond {digits} digits",
                partial_sum=value, terms=terms,
            )
        digits = int(min(lost, 2 * digits)) + int(-math.log10(rel_tol)) + 10


def termination_polynomial(gamma, delta, epsilon, n):
    """Coefficient c_{n+1} as a polynomial in q, with alpha = -epsilon*n.

    The numerator (k+1)(k+gamma) factors are kept, so the leading
    coefficient is 1/prod((k+1)(k+gamma)).
    """
    BchParams(gamma, delta, epsilon)  # validates gamma
    alpha = -epsilon * n
    qvar = Polynomial([0.0, 1.0])
    prev, cur = Polynomial([0.0]), Polynomial([1.0])
    for k in range(n + 1):
        nxt = ((qvar - delta * k) * cur - (alpha + epsilon * (k - 1)) * prev) / (
            (k + 1) * (k + gamma)
        )
        prev, cur = cur, nxt
    return cur


def _horner(coef, x):
    acc = 0.0
    for c in reversed(coef):
        acc = acc * x + c
    return acc


def _bisect(coef, a, b, fa):
    while True:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            return m
        fm = _horner(coef, m)
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m


def _real_roots(coef):
    """Real roots of an ascending-coefficient polynomial.

    Critical points (roots of the derivative, found recursively) split the
    line into monotone pieces, each holding at most one simple root, which
    is then isolated by bisection down to machine resolution. Double roots
    show up as critical points where the polynomial is numerically zero.
    """
    coef = list(coef)
    while coef and coef[-1] == 0:
        coef.pop()
    deg = len(coef) - 1
    if deg < 1:
        return []
    if deg == 1:
        return [-coef[0] / coef[1]]
    lead = coef[-1]
    bound = 1.0 + max(abs(c / lead) for c in coef[:-1])
    dcoef = [k * coef[k] for k in range(1, deg + 1)]
    crit = sorted(c for c in _real_roots(dcoef) if -bound < c < bound)
    knots = [-bound] + crit + [bound]

    roots = []
    for c in crit:
        scale = sum(abs(ck) * abs(c) ** k for k, ck in enumerate(coef))
        if abs(_horner(coef, c)) <= 1e-12 * scale:
            roots.append(c)
    for a, b in zip(knots[:-1], knots[1:]):
        fa, fb = _horner(coef, a), _horner(coef, b)
        if fa == 0:
            roots.append(a)
        elif fb != 0 and (fa < 0) != (fb < 0):
            roots.append(_bisect(coef, a, b, fa))
    roots.sort()
    merged = []
    for r in roots:
        if merged and abs(r - merged[-1]) <= 1e-10 * max(1.0, abs(r)):
            continue
        merged.append(r)
    return merged


def quasipoly_q_values(gamma, delta, epsilon, n):
    """Accessory parameters q for which H_B reduces to a degree-n polynomial.

    With alpha = -epsilon*n imposed, the series terminates after c_n exactly
    when c_{n+1}(q) = 0. Returns the sorted real roots; an empty list means
    no real polynomial solution exists.
    """
    if n < 0 or int(n) != n:
        raise ParameterError(f"n must be a non-negative integer, got {n}")
    poly = termination_polynomial(gamma, delta, epsilon, int(n))
    return _real_roots(poly.coef)
