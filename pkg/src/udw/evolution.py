r"""Markovian evolution of the excited-state probability.

.. math:: \dot p = -(C_+ + C_-)\,p + C_-

is integrated with classical RK4 on the coefficient grid; rates inside a
step come from the cubic-spline interpolants of the sampled coefficients.
The solution decomposes as ``p(t) = P01(t) + p(t0) * memory(t)`` with the
memory factor ``exp(-int (C_+ + C_-))``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientGrid
from .correlators import DetectorParams
from .errors import DomainError, GridTooCoarse
from .numerics import ode_step_rk4
from .serialization import format_csv

logger = logging.getLogger(__name__)

STEP_LIMIT = 0.1


def beta_star(p, omega: float):
    """Effective inverse temperature ``log(1/p - 1)/omega``; ``+inf`` at p=0, ``-inf`` at p=1."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        out = (np.log1p(-p) - np.log(p)) / omega
    out = np.where(p <= 0, np.inf, np.where(p >= 1, -np.inf, out))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Trajectory:
    """Solution of the master equation on a time grid.

    Attributes
    ----------
    t_grid, p, memory, beta_star : ndarray
    chi, c_plus, c_minus : ndarray
        Copied from the coefficient grid for serialization.
    clamp_events : int
        Number of samples clamped into ``[0, 1]``.
    """

    t_grid: np.ndarray
    p: np.ndarray
    memory: np.ndarray
    beta_star: np.ndarray
    chi: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    clamp_events: int = 0

    @property
    def p_final(self) -> float:
        return float(self.p[-1])

    def to_csv(self, path=None) -> str:
        """Serialize as ``t,chi,c_plus,c_minus,p,memory,beta_star``."""
        text = format_csv(["t", "chi", "c_plus", "c_minus", "p", "memory", "beta_star"],
                          zip(self.t_grid, self.chi, self.c_plus, self.c_minus, self.p, self.memory,
                              self.beta_star))
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _check_step(grid: CoefficientGrid):
    dt = float(grid.t_grid[1] - grid.t_grid[0])
    peak = float(np.max(np.abs(grid.total_rate)))
    if dt * peak > STEP_LIMIT:
        needed = int(math.ceil((grid.t_grid[-1] - grid.t_grid[0]) * peak / STEP_LIMIT)) + 1
        raise GridTooCoarse(f"step {dt:.3g} * max rate {peak:.3g} > {STEP_LIMIT}; use n_points >= {needed}",
                            module="evolution", op="evolve")
    return dt


def memory_array(grid: CoefficientGrid) -> np.ndarray:
    """``exp(-int_{t0}^t (C_+ + C_-))`` on the grid."""
    return np.exp(-grid.cumulative)


def _clamp(p: np.ndarray) -> tuple[np.ndarray, int]:
    bad = (p < 0) | (p > 1)
    n = int(np.sum(bad))
    if n:
        logger.warning("clamped %d probability samples into [0, 1] (max excursion %.3e)", n,
                       float(np.max(np.maximum(p - 1, -p))))
    return np.clip(p, 0.0, 1.0), n


def _trajectory(grid: CoefficientGrid, p: np.ndarray, omega: float) -> Trajectory:
    p, n = _clamp(p)
    memory = memory_array(grid)
    if np.any(np.diff(memory) > 1e-15) and not grid.negative_rate:
        logger.warning("memory factor increased although the total rate is non-negative")
    return Trajectory(grid.t_grid, p, memory, beta_star(p, omega), grid.chi, grid.c_plus, grid.c_minus, n)


def evolve(grid: CoefficientGrid, p_initial: float, det: DetectorParams | None = None) -> Trajectory:
    """Integrate the rate equation from ``p_initial`` at the first grid time.

    Parameters
    ----------
    grid : CoefficientGrid
    p_initial : float
        Excited-state probability at ``grid.t_grid[0]``.
    det : DetectorParams, optional
        Supplies the level gap for ``beta_star`` (defaults to ``grid.omega``).

    Raises
    ------
    GridTooCoarse
        If ``dt * max|C_+ + C_-| > 0.1``.
    """
    if not 0.0 <= p_initial <= 1.0:
        raise DomainError("p_initial must lie in [0, 1]", module="evolution", op="evolve")
    dt = _check_step(grid)
    t = grid.t_grid
    # rates at the grid nodes and at step midpoints (spline), laid out on a
    # half-step lattice so the RK4 stages read exact samples
    mids = 0.5 * (t[1:] + t[:-1])
    cp_mid, cm_mid = grid.rates(mids)
    lattice_a = np.empty(2 * len(t) - 1)
    lattice_b = np.empty_like(lattice_a)
    lattice_a[0::2] = grid.c_plus + grid.c_minus
    lattice_a[1::2] = cp_mid + cm_mid
    lattice_b[0::2] = grid.c_minus
    lattice_b[1::2] = cm_mid
    t0 = float(t[0])
    half = 0.5 * dt

    def rhs(time, p):
        k = int(round((time - t0) / half))
        return -lattice_a[k] * p + lattice_b[k]

    p = np.empty_like(t)
    p[0] = p_initial
    state = float(p_initial)
    for i in range(len(t) - 1):
        state = ode_step_rk4(state, rhs, t0 + i * dt, dt)
        p[i + 1] = state
    return _trajectory(grid, p, det.omega if det else grid.omega)


def closed_form_ground_start(grid: CoefficientGrid) -> Trajectory:
    r"""Ground-state start solved by quadrature instead of time stepping.

    .. math:: p(t) = \int_{t_0}^t d\tau\, C_-(\tau)\, e^{-\int_\tau^t (C_+ + C_-)}
                 = e^{-\Lambda(t)} \int_{t_0}^t C_-(\tau) e^{\Lambda(\tau)} d\tau,

    with :math:`\Lambda` the cumulative total rate; the inner integral uses
    the cubic-spline antiderivative of :math:`C_- e^{\Lambda}`.
    """
    _check_step(grid)
    from scipy.interpolate import CubicSpline
    lam = grid.cumulative
    shift = float(lam[-1])              # keep the exponentials bounded
    integrand = grid.c_minus * np.exp(lam - shift)
    inner = CubicSpline(grid.t_grid, integrand).antiderivative()(grid.t_grid)
    p = inner * np.exp(shift - lam)
    return _trajectory(grid, p, grid.omega)


def memory_factor(grid: CoefficientGrid, t: float) -> float:
    r"""Memory factor :math:`e^{-\int_{t_0}^t (C_+ + C_-)}` at time ``t`` (within the grid).

    Equals :math:`P_{0\to0}(t) - P_{1\to0}(t)`; 1 before the coupling acts.
    """
    tg = grid.t_grid
    if not tg[0] <= t <= tg[-1]:
        raise DomainError("t outside the coefficient grid", module="evolution", op="memory_factor")
    if t == tg[-1]:
        return float(math.exp(-grid.cumulative[-1]))
    from scipy.interpolate import CubicSpline
    if len(tg) >= 4:
        lam = CubicSpline(tg, grid.total_rate).integrate(tg[0], t)
    else:
        lam = float(np.interp(t, tg, grid.cumulative))
    return math.exp(-lam)


@dataclass(frozen=True)
class TransitionReport:
    """Finite-time transition probabilities from two evolutions.

    ``xi = p01/p10``; ``xi_undefined`` flags the 0/0 case.
    """

    p01: float
    p10: float
    memory: float
    decomposition_residual: float
    xi_undefined: bool = False

    @property
    def p00(self) -> float:
        return 1.0 - self.p01

    @property
    def p11(self) -> float:
        return 1.0 - self.p10

    @property
    def xi(self) -> float:
        if self.xi_undefined:
            return math.nan
        return self.p01 / self.p10 if self.p10 > 0 else math.inf

    def to_dict(self) -> dict:
        return {"p01": self.p01, "p10": self.p10, "p00": self.p00, "p11": self.p11, "xi": self.xi,
                "memory": self.memory, "xi_undefined": self.xi_undefined}


def transitions(grid: CoefficientGrid, det: DetectorParams | None = None) -> TransitionReport:
    r"""Transition probabilities over the grid from runs starting in 0 and in 1.

    Checks the decomposition ``p_final(1) = P01 + memory`` (logged when the
    residual exceeds 1e-8).
    """
    ground = evolve(grid, 0.0, det)
    excited = evolve(grid, 1.0, det)
    p01 = ground.p_final
    p10 = 1.0 - excited.p_final
    memory = float(math.exp(-grid.cumulative[-1]))
    residual = excited.p_final - (p01 + memory)
    if abs(residual) > 1e-8:
        logger.warning("transition decomposition residual %.3e exceeds 1e-8", residual)
    undefined = p10 == 0 and p01 == 0
    return TransitionReport(p01, p10, memory, residual, undefined)
