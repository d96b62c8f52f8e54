"""Shared numerical kernels.

Adaptive Gauss--Kronrod quadrature on finite intervals, semi-infinite
integration with half-period panels and Aitken acceleration for oscillatory
integrands, the sine/cosine integrals, a bracketing root finder, a classical
Runge--Kutta step and a trapezoidal Fourier transform of even functions.

All tolerances live in :class:`QuadratureSpec` / :class:`RootSpec`; every
downstream operation accepts an optional spec and falls back to the defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import AsymmetricInput, DomainError, NoSignChange, NonConvergence, NonFinite

EULER_GAMMA = 0.57721566490153286061

# 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK tables).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])            # 15 nodes in [-1, 1]
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[[9, 11, 13]] = _WG[2::-1]
_WG15[7] = _WG[3]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for every integral in the package.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Requested accuracy; the target error is ``max(rel_tol*|I|, abs_tol)``.
    max_subdivisions : int
        Budget of subintervals (finite intervals) or panels (semi-infinite).
    tail_cutoff_factor : float
        Non-oscillatory semi-infinite integrals stop once ``s`` exceeds this
        many decay lengths and the last panel is below tolerance.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2**20
    tail_cutoff_factor: float = 40.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive", module="numerics", op="QuadratureSpec")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1", module="numerics", op="QuadratureSpec")

    def target(self, value: float) -> float:
        return max(self.rel_tol * abs(value), self.abs_tol)


@dataclass(frozen=True)
class RootSpec:
    """Bracket and stopping rule for :func:`find_root`."""

    bracket_lo: float
    bracket_hi: float
    tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not self.bracket_lo < self.bracket_hi:
            raise DomainError("bracket_lo must be < bracket_hi", module="numerics", op="RootSpec")


DEFAULT_SPEC = QuadratureSpec()


# ----------------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------------


def _gk15(f, a: np.ndarray, b: np.ndarray):
    """Kronrod estimate and |Kronrod - Gauss| on a batch of intervals."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise NonFinite(f"integrand is not finite at s={bad!r}", module="numerics", op="integrate")
    k = half * (y @ _WK)
    g = half * (y @ _WG15)
    return k, np.abs(k - g)


def integrate_interval(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                       spec: QuadratureSpec | None = None, *,
                       breakpoints: Sequence[float] = (), abs_tol: float | None = None) -> float:
    """Adaptive Gauss--Kronrod (7/15) quadrature of a vectorized integrand.

    Intervals whose local error exceeds their length-proportional share of
    the tolerance are bisected; all intervals of one sweep are evaluated in
    a single vectorized call of ``f``.

    Parameters
    ----------
    f : callable
        Vectorized integrand, ``f(ndarray) -> ndarray``.
    a, b : float
        Finite integration limits.
    spec : QuadratureSpec, optional
    breakpoints : sequence of float
        Points inside ``(a, b)`` where ``f`` has kinks; used as initial edges.
    abs_tol : float, optional
        Overrides ``spec.abs_tol`` (used by panel-wise callers).

    Returns
    -------
    float
    """
    spec = spec or DEFAULT_SPEC
    atol = spec.abs_tol if abs_tol is None else abs_tol
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    edges = np.unique(np.concatenate([[a], [p for p in breakpoints if a < p < b], [b]]))
    lo, hi = edges[:-1], edges[1:]
    done_val = 0.0
    done_err = 0.0
    length = b - a
    n_used = len(lo)
    val, err = _gk15(f, lo, hi)
    while True:
        total = done_val + val.sum()
        tol = max(spec.rel_tol * abs(total), atol)
        if done_err + err.sum() <= tol:
            return sign * total
        share = tol * (hi - lo) / length
        bad = err > share
        if not np.any(bad):
            return sign * total
        done_val += val[~bad].sum()
        done_err += err[~bad].sum()
        lo, hi = lo[bad], hi[bad]
        n_used += len(lo)
        if n_used > spec.max_subdivisions:
            raise NonConvergence(f"subdivision budget exhausted on [{a}, {b}]",
                                 module="numerics", op="integrate")
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        # widths below machine resolution cannot be refined further
        if np.any(hi - lo <= 8 * np.finfo(float).eps * np.maximum(abs(lo), abs(hi))):
            raise NonConvergence(f"interval collapsed while refining near s={lo[0]!r}",
                                 module="numerics", op="integrate")
        val, err = _gk15(f, lo, hi)


def aitken_limit(partial_sums: Sequence[float], levels: int = 4) -> float:
    """Iterated Aitken delta-squared extrapolation of a sequence of partial sums.

    Returns the deepest available extrapolant.  Levels whose denominators
    vanish (already converged sequences) fall back to the last element.
    """
    seq = np.asarray(partial_sums, dtype=float)
    for _ in range(levels):
        if len(seq) < 3:
            break
        d2 = seq[2:] - 2 * seq[1:-1] + seq[:-2]
        safe = np.abs(d2) > 1e-300 + 1e-15 * np.abs(seq[2:])
        nxt = np.where(safe, seq[2:] - (seq[2:] - seq[1:-1]) ** 2 / np.where(safe, d2, 1.0), seq[2:])
        if not np.all(np.isfinite(nxt)):
            break
        seq = nxt
    return float(seq[-1])


def integrate_semi_infinite(f: Callable[[np.ndarray], np.ndarray], osc_freq: float = 0.0,
                            spec: QuadratureSpec | None = None, *, scale: float = 1.0,
                            breakpoints: Sequence[float] = (), min_panels: int = 8) -> float:
    r"""Integrate a vectorized ``f`` over :math:`[0, \infty)`.

    For ``osc_freq > 0`` the domain is cut into half-period panels of length
    ``pi/osc_freq`` and the partial sums are accelerated with iterated
    Aitken extrapolation; this handles integrands whose envelope decays
    like ``1/s`` or ``1/s**2`` as well as exponentially.  For ``osc_freq == 0``
    panels double in length starting from ``scale`` (the decay length).

    Parameters
    ----------
    f : callable
        Vectorized integrand of ``s >= 0`` (already including ``cos(osc_freq*s)``).
    osc_freq : float
        Oscillation frequency of the integrand, or 0.
    spec : QuadratureSpec, optional
    scale : float
        Decay length used for the first panel when ``osc_freq == 0``.
    breakpoints : sequence of float
        Kinks of ``f`` (forwarded to the panel quadrature).
    min_panels : int
        Panels always integrated before convergence is tested.

    Returns
    -------
    float
    """
    spec = spec or DEFAULT_SPEC
    if osc_freq < 0:
        raise DomainError("osc_freq must be >= 0", module="numerics", op="integrate_semi_infinite")
    bps = sorted(p for p in breakpoints if p > 0)
    panel_tol = spec.abs_tol * 0.1

    def panel(a, b):
        return integrate_interval(f, a, b, spec, breakpoints=[p for p in bps if a < p < b],
                                  abs_tol=panel_tol)

    if osc_freq > 0:
        h = math.pi / osc_freq
        sums = []
        total = 0.0
        estimates = []
        small_run = 0
        k = 0
        # panels before the last kink are summed directly
        while True:
            contribution = panel(k * h, (k + 1) * h)
            total += contribution
            sums.append(total)
            k += 1
            if k * h <= (bps[-1] if bps else 0.0) or k < min_panels:
                continue
            small_run = small_run + 1 if abs(contribution) <= panel_tol else 0
            if small_run >= 3:
                return total
            est = aitken_limit(sums[-16:])
            estimates.append(est)
            if len(estimates) >= 3:
                tol = spec.target(est)
                if abs(estimates[-1] - estimates[-2]) <= tol and abs(estimates[-2] - estimates[-3]) <= tol:
                    return est
            if k > spec.max_subdivisions:
                raise NonConvergence("panel budget exhausted in oscillatory integral",
                                     module="numerics", op="integrate_semi_infinite")
    else:
        a, b = 0.0, float(scale)
        total = 0.0
        small_run = 0
        n = 0
        while True:
            contribution = panel(a, b)
            total += contribution
            n += 1
            if abs(contribution) <= spec.target(total) * 0.1:
                small_run += 1
            else:
                small_run = 0
            if small_run >= 2 and (b >= spec.tail_cutoff_factor * scale or abs(contribution) <= panel_tol):
                return total
            if n > 4 * 1024 or n > spec.max_subdivisions:
                raise NonConvergence("integrand does not decay fast enough",
                                     module="numerics", op="integrate_semi_infinite")
            a, b = b, b + (b - a) * (2.0 if b >= 4 * scale else 1.0)


# ----------------------------------------------------------------------------
# Sine / cosine integrals
# ----------------------------------------------------------------------------

_SERIES_MAX = 8.0
_ASYMPTOTIC_MIN = 40.0


def _sici_series(x: np.ndarray):
    x2 = x * x
    si = x.copy()
    ci = np.zeros_like(x)
    tc = np.ones_like(x)   # (-1)^k x^(2k)/(2k)!
    ts = x.copy()          # (-1)^k x^(2k+1)/(2k+1)!
    for k in range(1, 60):
        tc = -tc * x2 / ((2 * k - 1) * (2 * k))
        ts = -ts * x2 / ((2 * k) * (2 * k + 1))
        dc = tc / (2 * k)
        ds = ts / (2 * k + 1)
        ci = ci + dc
        si = si + ds
        if np.all(np.abs(dc) <= 1e-17 * np.maximum(np.abs(ci), 1e-300)) and \
                np.all(np.abs(ds) <= 1e-17 * np.abs(si)):
            break
    ci = EULER_GAMMA + np.log(x) + ci
    return si, ci


def _sici_continued_fraction(x: np.ndarray):
    """Modified Lentz evaluation of E1(ix); valid for x >~ 2."""
    tiny = 1e-300
    b = 1.0 + 1j * x
    c = np.full(x.shape, 1.0 / tiny, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 500):
        a = -float(i * i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    else:
        raise NonConvergence("continued fraction for Ci did not converge", module="numerics",
                             op="cosine_integral")
    h = h * (np.cos(x) - 1j * np.sin(x))
    return math.pi / 2 + h.imag, -h.real


def _sici_asymptotic(x: np.ndarray):
    """Auxiliary-function asymptotic series, truncated at the smallest term."""
    inv2 = 1.0 / (x * x)
    fsum = np.ones_like(x)
    gsum = np.ones_like(x)
    tf = np.ones_like(x)
    tg = np.ones_like(x)
    for k in range(1, 40):
        tf_new = -tf * (2 * k - 1) * (2 * k) * inv2
        tg_new = -tg * (2 * k) * (2 * k + 1) * inv2
        grow = np.abs(tf_new) > np.abs(tf)
        if np.all(np.abs(tf_new) < 1e-17) or np.any(grow):
            break
        tf, tg = tf_new, tg_new
        fsum += tf
        gsum += tg
    fx = fsum / x
    gx = gsum * inv2
    ci = fx * np.sin(x) - gx * np.cos(x)
    si = math.pi / 2 - fx * np.cos(x) - gx * np.sin(x)
    return si, ci


def sine_cosine_integrals(x):
    """Return ``(Si(x), Ci(x))`` for positive ``x`` (scalar or array).

    Power series for ``x <= 8``, continued fraction of ``E1(ix)`` for
    ``8 < x < 40`` and the asymptotic auxiliary-function expansion beyond.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("Ci(x) requires x > 0", module="numerics", op="cosine_integral")
    flat = np.atleast_1d(xa).ravel()
    si = np.empty_like(flat)
    ci = np.empty_like(flat)
    m1 = flat <= _SERIES_MAX
    m3 = flat >= _ASYMPTOTIC_MIN
    m2 = ~(m1 | m3)
    for mask, fn in ((m1, _sici_series), (m2, _sici_continued_fraction), (m3, _sici_asymptotic)):
        if np.any(mask):
            si[mask], ci[mask] = fn(flat[mask])
    if xa.ndim == 0:
        return float(si[0]), float(ci[0])
    return si.reshape(xa.shape), ci.reshape(xa.shape)


def cosine_integral(x):
    r"""Cosine integral :math:`\mathrm{Ci}(x) = \gamma + \ln x + \int_0^x (\cos t - 1)/t\,dt`.

    Parameters
    ----------
    x : float or array_like
        Strictly positive argument.

    Returns
    -------
    float or ndarray

    Raises
    ------
    DomainError
        If any ``x <= 0``.
    """
    return sine_cosine_integrals(x)[1]


def cos_over_s_tail(omega, start):
    r""":math:`\int_S^\infty \cos(\Omega s)/s\,ds = -\mathrm{Ci}(\Omega S)`."""
    return -cosine_integral(np.asarray(omega) * np.asarray(start))


def cos_over_s2_tail(omega, start):
    r""":math:`\int_S^\infty \cos(\Omega s)/s^2\,ds = \cos(\Omega S)/S - \Omega(\pi/2 - \mathrm{Si}(\Omega S))`."""
    omega = np.asarray(omega, dtype=float)
    start = np.asarray(start, dtype=float)
    si, _ = sine_cosine_integrals(omega * start)
    return np.cos(omega * start) / start - omega * (math.pi / 2 - si)


# ----------------------------------------------------------------------------
# Root finding and ODE stepping
# ----------------------------------------------------------------------------


def find_root(g: Callable[[float], float], spec: RootSpec) -> float:
    """Bracketed root of a scalar function: bisection safeguarding secant steps.

    Parameters
    ----------
    g : callable
        Continuous scalar function with a sign change on the bracket.
    spec : RootSpec

    Returns
    -------
    float
        ``x`` with ``|g(x)| <= tol*scale`` or a bracket narrower than ``tol``
        (relative to the bracket magnitude when it exceeds one).

    Raises
    ------
    NoSignChange, NonConvergence
    """
    a, b = float(spec.bracket_lo), float(spec.bracket_hi)
    fa, fb = g(a), g(b)
    if not (np.isfinite(fa) and np.isfinite(fb)):
        raise NonFinite("root function not finite at the bracket ends", module="numerics", op="find_root")
    if fa == 0:
        return a
    if fb == 0:
        return b
    if fa * fb > 0:
        raise NoSignChange(f"g({a})={fa} and g({b})={fb} have the same sign",
                           module="numerics", op="find_root")
    scale = max(abs(fa), abs(fb))
    for _ in range(spec.max_iter):
        width = b - a
        if width <= spec.tol * max(1.0, abs(a), abs(b)):
            return 0.5 * (a + b)
        # secant candidate, accepted only if it falls well inside the bracket
        x = b - fb * (b - a) / (fb - fa)
        if not (a + 0.01 * width < x < b - 0.01 * width):
            x = 0.5 * (a + b)
        fx = g(x)
        if fx == 0 or abs(fx) <= spec.tol * scale * 1e-3:
            return x
        if fa * fx < 0:
            b, fb = x, fx
        else:
            a, fa = x, fx
        # force a bisection whenever the secant step shrinks the bracket too little
        if b - a > 0.5 * width:
            m = 0.5 * (a + b)
            fm = g(m)
            if fm == 0:
                return m
            if fa * fm < 0:
                b, fb = m, fm
            else:
                a, fa = m, fm
    raise NonConvergence("root finder exceeded max_iter", module="numerics", op="find_root")


def ode_step_rk4(state, rhs: Callable, t: float, dt: float):
    """One classical fourth-order Runge--Kutta step of ``dy/dt = rhs(t, y)``.

    Raises
    ------
    DomainError
        If ``dt <= 0``.
    NonFinite
        If the new state is not finite.
    """
    if not dt > 0:
        raise DomainError("dt must be positive", module="numerics", op="ode_step_rk4")
    k1 = rhs(t, state)
    k2 = rhs(t + 0.5 * dt, state + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, state + 0.5 * dt * k2)
    k4 = rhs(t + dt, state + dt * k3)
    new = state + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    if not np.all(np.isfinite(new)):
        raise NonFinite(f"RK4 step produced a non-finite state at t={t}", module="numerics",
                        op="ode_step_rk4")
    return new


# ----------------------------------------------------------------------------
# Fourier transform of even samples
# ----------------------------------------------------------------------------


def fourier_transform_symmetric(samples, omega_grid, tau_grid, spec: QuadratureSpec | None = None,
                                chunk: int = 256) -> np.ndarray:
    r"""Trapezoidal :math:`\int d\omega\, f(\omega) e^{-i\omega\tau}` of an even, real ``f``.

    Because ``f`` is even the transform is the cosine transform, which is
    what is summed; the result is therefore exactly real.

    Parameters
    ----------
    samples : array_like
        ``f`` on ``omega_grid``.
    omega_grid : array_like
        Uniform grid symmetric about 0.
    tau_grid : array_like
        Output times.
    spec : QuadratureSpec, optional
        ``abs_tol`` (relative to ``max|f|``) bounds the admissible asymmetry.

    Raises
    ------
    AsymmetricInput
        If the grid is not symmetric or ``f`` is not even.
    """
    spec = spec or DEFAULT_SPEC
    f = np.asarray(samples, dtype=float)
    w = np.asarray(omega_grid, dtype=float)
    tau = np.asarray(tau_grid, dtype=float)
    if f.shape != w.shape or w.ndim != 1 or len(w) < 3:
        raise DomainError("samples and omega_grid must be 1-d arrays of equal length",
                          module="numerics", op="fourier_transform_symmetric")
    step = np.diff(w)
    if np.max(np.abs(step - step[0])) > 1e-9 * abs(step[0]) or \
            np.max(np.abs(w + w[::-1])) > 1e-9 * np.max(np.abs(w)):
        raise AsymmetricInput("omega grid must be uniform and symmetric about 0",
                              module="numerics", op="fourier_transform_symmetric")
    asym = np.max(np.abs(f - f[::-1]))
    if asym > spec.abs_tol * max(1.0, np.max(np.abs(f))):
        raise AsymmetricInput(f"input is not even (max asymmetry {asym:.3e})",
                              module="numerics", op="fourier_transform_symmetric")
    weights = np.full_like(w, step[0])
    weights[0] = weights[-1] = 0.5 * step[0]
    fw = 0.5 * (f + f[::-1]) * weights
    flat = tau.ravel()
    out = np.empty_like(flat)
    for i in range(0, len(flat), chunk):
        out[i:i + chunk] = np.cos(np.outer(flat[i:i + chunk], w)) @ fw
    return out.reshape(tau.shape)
