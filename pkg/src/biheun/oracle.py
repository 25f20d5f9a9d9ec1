"""
Numerov shooting solver with node counting.

Used as an independent check on closed-form spectra. The wavefunction is
integrated outward from a hard wall at ``x_min`` (psi = 0 there) and an
eigenvalue is located as the energy where the number of sign changes on
(x_min, x_max] jumps from n-1 to n.
"""

import math
from dataclasses import dataclass, replace

import numba
import numpy as np

from .errors import ParameterError, SolverConfigError
from .potentials import NATURAL

_RESCALE_AT = 1e150


@dataclass(frozen=True)
class SolverConfig:
    """Grid and bisection settings.

    The wall sits at ``x_min`` (default 0, i.e. psi(0) = 0). A negative
    ``x_min`` gives a symmetric box for potentials defined on the whole
    line.
    """

    x_max: float
    grid_points: int = 20001
    energy_bracket: tuple = (-1.0, 0.0)
    bisection_tol: float = 1e-8
    x_min: float = 0.0
    tail_ratio: float = 1e-3

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ParameterError(f"x_max={self.x_max} must exceed x_min={self.x_min}")
        if self.grid_points < 1000:
            raise ParameterError(f"grid_points must be >= 1000, got {self.grid_points}")
        lo, hi = self.energy_bracket
        if not lo < hi:
            raise ParameterError(f"energy bracket {self.energy_bracket} is empty")
        if not self.bisection_tol > 0:
            raise ParameterError("bisection_tol must be positive")

    @property
    def grid(self):
        return np.linspace(self.x_min, self.x_max, self.grid_points)

    @property
    def step(self):
        return (self.x_max - self.x_min) / (self.grid_points - 1)

    def refined(self):
        """Same box with the spacing halved."""
        return replace(self, grid_points=2 * self.grid_points - 1)

    def enlarged(self, factor=2.0):
        """Box stretched by ``factor`` at the same spacing."""
        span = (self.x_max - self.x_min) * factor
        points = int(round((self.grid_points - 1) * factor)) + 1
        return replace(self, x_max=self.x_min + span, grid_points=points)


@numba.njit(cache=True)
def _numerov(f, h):
    """Integrate psi'' = -f psi outward from psi[0] = 0, psi[1] = h."""
    n = f.size
    psi = np.zeros(n)
    psi[1] = h
    c = h * h / 12.0
    for i in range(1, n - 1):
        psi[i + 1] = (2.0 * (1.0 - 5.0 * c * f[i]) * psi[i] - (1.0 + c * f[i - 1]) * psi[i - 1]) / (
            1.0 + c * f[i + 1]
        )
        if abs(psi[i + 1]) > _RESCALE_AT:
            for j in range(i + 2):
                psi[j] /= _RESCALE_AT
    return psi


@numba.njit(cache=True)
def _sign_changes(psi):
    count = 0
    last = 0.0
    for i in range(1, psi.size):
        v = psi[i]
        if v == 0.0:
            continue
        if last != 0.0 and (v > 0.0) != (last > 0.0):
            count += 1
        last = v
    return count


def _potential_on_grid(V, x):
    """V at interior grid points; the wall point is never used."""
    out = np.empty_like(x)
    out[0] = 0.0
    try:
        out[1:] = V(x[1:])
    except (TypeError, ValueError):
        out[1:] = [V(float(xi)) for xi in x[1:]]
    return out


def _coupling(v_grid, E, units):
    f = units.k * (E - v_grid)
    f[0] = 0.0
    return f


def numerov_integrate(V, E, config, units=NATURAL):
    """Sample the outward solution with psi(x_min) = 0 and psi(x_min + h) = h.

    Returns
    -------
    x, psi : ndarray
        Grid and samples. Large values are rescaled on the fly, so only the
        shape of psi is meaningful.
    """
    x = config.grid
    v_grid = _potential_on_grid(V, x)
    psi = _numerov(_coupling(v_grid, E, units), config.step)
    if not np.all(np.isfinite(psi)):
        raise SolverConfigError(f"Numerov integration overflowed at E={E}")
    return x, psi


def count_nodes(samples, threshold=1e-12):
    """Strict sign changes in the interior, skipping values below
    ``threshold * max|psi|``."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 3:
        raise ParameterError("need at least 3 samples to count nodes")
    peak = np.max(np.abs(samples))
    if peak == 0:
        raise ParameterError("all samples are zero; nodes are undefined")
    inner = samples[1:-1]
    inner = inner[np.abs(inner) >= threshold * peak]
    signs = np.sign(inner)
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


@dataclass(frozen=True)
class Eigenstate:
    n: int
    energy: float
    x: np.ndarray
    psi: np.ndarray
    turning_point: float

    @property
    def nodes(self):
        return count_nodes(self.psi)


def _turning_index(v_grid, E):
    allowed = np.flatnonzero(v_grid[1:] < E)
    if allowed.size == 0:
        return None
    return int(allowed[-1]) + 1


def _trim_tail(x, psi, v_grid, E, tail_ratio):
    """Cut psi at the tail minimum, where the decaying solution gives way to
    the growing one, after checking that the decay happened inside the box."""
    t = _turning_index(v_grid, E)
    if t is None:
        raise SolverConfigError(f"E={E} lies below the potential everywhere on the grid")
    body = np.abs(psi[: t + 1]).max()
    tail = np.abs(psi[t:])
    cut = t + int(np.argmin(tail))
    # the box wall is felt if the minimum sits in the last tenth of the grid
    near_wall = cut > t + 0.9 * (x.size - 1 - t)
    if tail.min() > tail_ratio * body or near_wall:
        raise SolverConfigError(
            f"wavefunction at E={E:.10g} has not decayed by x_max={x[-1]:.6g} "
            f"(tail/body = {tail.min() / body:.3g}); enlarge x_max"
        )
    psi = psi[: cut + 1] / body
    return x[: cut + 1], psi, x[t]


def solve_eigenstates(V, n_max, config, units=NATURAL):
    """Lowest ``n_max`` eigenstates by node-count bisection.

    Raises
    ------
    SolverConfigError
        If the bracket does not contain n_max levels or a tail fails to
        decay inside the box.
    """
    if n_max < 1:
        raise ParameterError(f"n_max must be >= 1, got {n_max}")
    x = config.grid
    h = config.step
    v_grid = _potential_on_grid(V, x)

    def nodes_at(E):
        return _sign_changes(_numerov(_coupling(v_grid, E, units), h))

    e_lo, e_hi = config.energy_bracket
    if nodes_at(e_lo) > 0:
        raise SolverConfigError(f"lower bracket E={e_lo} already lies above a bound state")
    if nodes_at(e_hi) < n_max:
        raise SolverConfigError(
            f"bracket {config.energy_bracket} holds fewer than {n_max} levels; "
            "raise the upper energy or enlarge x_max"
        )

    states = []
    lo = e_lo
    for n in range(1, n_max + 1):
        hi = e_hi
        while hi - lo > config.bisection_tol:
            mid = 0.5 * (lo + hi)
            if nodes_at(mid) >= n:
                hi = mid
            else:
                lo = mid
        energy = 0.5 * (lo + hi)
        psi = _numerov(_coupling(v_grid, energy, units), h)
        xs, ps, xt = _trim_tail(x, psi, v_grid, energy, config.tail_ratio)
        states.append(Eigenstate(n, energy, xs, ps, xt))
        lo = hi
    return states


def solve_bound_states(V, n_max, config, units=NATURAL):
    """Energies of the lowest ``n_max`` levels, in increasing order."""
    return [s.energy for s in solve_eigenstates(V, n_max, config, units)]


def isr_potential(V0):
    """Vectorized V0/sqrt(x)."""

    def V(x):
        return V0 / np.sqrt(x)

    return V


def harmonic_potential(omega=1.0, mass=1.0):
    def V(x):
        return 0.5 * mass * omega**2 * np.asarray(x) ** 2

    return V


def isr_config(V0, n_max, units=NATURAL, spacing=0.005, bisection_tol=1e-8, box_factor=3.0):
    """Box sized at ``box_factor`` times the classical turning point of level n_max.

    Level energies are estimated from the Maslov-corrected closed form
    (n - 1/6)^(-2/3).
    """
    from .spectra import isr_energy_dirichlet

    e_top = isr_energy_dirichlet(n_max, V0, units)
    e_ground = isr_energy_dirichlet(1, V0, units)
    x_turn = (V0 / e_top) ** 2
    x_max = box_factor * x_turn
    points = max(1001, int(math.ceil(x_max / spacing)) + 1)
    bracket = (2.0 * e_ground, 0.5 * e_top)
    return SolverConfig(x_max, points, bracket, bisection_tol)
