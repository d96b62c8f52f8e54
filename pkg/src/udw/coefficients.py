r"""Renormalized coefficient functions of the two-level master equation.

.. math::

    C(t,\Omega) = \bar g\chi^2(t) F_\beta(-\Omega) + \bar g\chi(t)\chi'(t)\zeta^{(r)}
      + \bar g\chi(t)\int_0^\infty (\chi(t-s) - \chi(t))\,\Delta G(s)\cos\Omega s\,ds
      + \bar g\chi(t)\int_0^\infty (\chi(t-s) - \chi(t) + s\chi'(t))\,\tilde G^+(s)\cos\Omega s\,ds

with :math:`\zeta^{(r)} = -\mathrm{Ci}(|\Omega|\tau_s)/2\pi^2`,
:math:`\Delta G = \tilde G^+_\beta - \tilde G^+` and
:math:`\tilde G^+ = -1/(2\pi^2 s^2)`, both at zero regulator.  The de-excitation
rate is :math:`C_+(t) = C(t, +\Omega)` and the excitation rate
:math:`C_-(t) = C(t, -\Omega)`.  The two integrals are even in
:math:`\Omega`, so they are computed once per time and shared.

The integrals are evaluated on Gauss--Legendre panels (fine where the window
or the thermal kernel varies, growing elsewhere) up to the lag where
``chi(t - s)`` has saturated to its past value; beyond it the
integrands reduce to ``cos(Omega s)/s`` and ``cos(Omega s)/s^2`` whose tails
are integrated analytically with the sine/cosine integrals.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import numerics
from .correlators import PI2, BathParams, DetectorParams, spectral_f, tilde_g_difference
from .errors import DomainError, NonConvergence, SharpSwitchWarning
from .numerics import QuadratureSpec
from .serialization import format_csv
from .switching import (ProfileKind, SwitchingProfile, _chi_values, chi_past, kinks, max_switch_rate,
                        support, time_scale)

logger = logging.getLogger(__name__)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GLC_X, _GLC_W = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class ZetaValue:
    """Renormalized switching coefficient ``zeta_r = -Ci(|Omega| tau_s)/(2 pi^2)``."""

    value: float
    tau_s: float


def zeta_renormalized(omega: float, tau_s: float) -> float:
    r""":math:`\zeta^{(r)} = -\mathrm{Ci}(|\Omega|\tau_s)/2\pi^2`.

    Raises
    ------
    DomainError
        If ``omega == 0`` or ``tau_s <= 0``.
    """
    if omega == 0 or not tau_s > 0:
        raise DomainError("zeta_renormalized needs omega != 0 and tau_s > 0", module="coefficients",
                          op="zeta_renormalized")
    return -numerics.cosine_integral(abs(omega) * tau_s) / (2 * PI2)


def zeta_subtraction_split(omega: float, tau_s: float, epsilon: float) -> dict:
    r"""Diagnostic decomposition of the regulated switching coefficient.

    The raw coefficient :math:`\zeta = -\int_0^\infty s\,\tilde G^+(s)\cos\Omega s\,ds` at
    regulator :math:`\epsilon` splits at the subtraction scale :math:`\tau_s` into

    * ``short``: :math:`(\log(\tau_s/\epsilon) - 1)/2\pi^2`, the part that diverges as :math:`\epsilon\to 0`;
    * ``long``: :math:`-\mathrm{Ci}(|\Omega|\tau_s)/2\pi^2 = \zeta^{(r)}`,

    up to :math:`O(\Omega^2\tau_s^2)` and :math:`O(\epsilon^2/\tau_s^2)`.
    Renormalization keeps only ``long``.
    """
    short = (math.log(tau_s / epsilon) - 1.0) / (2 * PI2)
    long = zeta_renormalized(omega, tau_s)
    return {"short": short, "long": long, "raw": short + long}


def _saturation_lag(profile: SwitchingProfile, t: np.ndarray) -> np.ndarray:
    """Lag beyond which ``chi(t - s)`` equals its past limit to working accuracy."""
    if profile.kind is ProfileKind.LORENTZ:
        # power-law tail: truncating where chi ~ 1e-5 leaves an O(1e-10) remainder
        lo = support(profile, 1e-5)[0]
    else:
        lo = support(profile)[0]
    return np.maximum(t - lo, 0.0)


def _integrand_block(profile, bath, omega, t, s, chi_t, dchi_t, chi_inf):
    """Both switching integrands on a (rows, nodes) block."""
    cs = _chi_values(profile, t[:, None] - s)
    cosw = np.cos(omega * s)
    diff = cs - chi_t[:, None]
    vac = (diff + s * dchi_t[:, None]) * (-1.0 / (2 * PI2 * s * s))
    if bath.is_vacuum:
        th = np.zeros_like(vac)
    else:
        th = diff * tilde_g_difference(s, bath)
    return th * cosw, vac * cosw


def _vacuum_rounding(profile, t, s, w, chi_t, dchi_t):
    """Rounding floor of the subtracted vacuum integral (cancellation at small ``s``)."""
    cs = _chi_values(profile, t[:, None] - s)
    mag = (np.abs(cs) + np.abs(chi_t)[:, None] + s * np.abs(dchi_t)[:, None]) / (2 * PI2 * s * s)
    return 4.0 * np.finfo(float).eps * (mag @ np.abs(w))


def _feature_zones(profile: SwitchingProfile) -> list[tuple[float, float]]:
    """``(centre, half_width)`` of the time ranges where ``chi`` varies on its shortest scale."""
    k = profile.kind
    if k is ProfileKind.TANH_WINDOW:
        return [(profile.tau1, 8.0 / profile.lam), (profile.tau2, 8.0 / profile.lam)]
    if k is ProfileKind.TANH_SWITCH_OFF:
        return [(profile.tau_bar, 8.0 / profile.lam)]
    if k is ProfileKind.TABULATED:
        lo, hi = profile.table_tau[0], profile.table_tau[-1]
        return [(0.5 * (lo + hi), 0.5 * (hi - lo))]
    if k is ProfileKind.EXPONENTIAL:
        return [(profile.tau_bar, 12.0 * profile.tau0)]
    return [(profile.tau_bar, 6.0 * profile.tau0)]


def _panel_edges(upper: float, h_fine: float, h_coarse: float, zones, breaks=(), growth: float = 0.25):
    """Panel edges on ``[0, upper]``: ``h_fine`` inside ``zones``, growing with the distance outside.

    Outside the zones the panel length is ``max(h_fine, growth * distance)``
    capped at ``h_coarse``; panels never straddle a zone boundary or a break.
    """
    zones = sorted((max(a, 0.0), min(b, upper)) for a, b in zones if b > 0 and a < upper)
    marks = sorted({0.0, upper, *[z for ab in zones for z in ab], *[b for b in breaks if 0 < b < upper]})
    edges = [0.0]
    for lo, hi in zip(marks[:-1], marks[1:]):
        inside = any(a <= lo and hi <= b for a, b in zones)
        if inside or not zones:
            h = h_fine if inside else h_coarse
            n = max(1, int(math.ceil((hi - lo) / h - 1e-9)))
            edges.extend(np.linspace(lo, hi, n + 1)[1:].tolist())
            continue
        s = lo
        while s < hi:
            d = min(min(abs(s - b), abs(s - a)) for a, b in zones)
            step = min(h_coarse, max(h_fine, growth * d))
            s = min(hi, s + step)
            if hi - s < 0.5 * h_fine:
                s = hi
            edges.append(s)
    return np.asarray(edges)


def _panel_nodes(edges: np.ndarray, x, w):
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def switching_integrals(profile: SwitchingProfile, bath: BathParams, omega: float, t,
                        spec: QuadratureSpec | None = None):
    r"""Thermal and vacuum switching integrals at times ``t`` (vectorized).

    Returns
    -------
    j_thermal, j_vacuum : ndarray
        :math:`\int_0^\infty(\chi(t-s)-\chi(t))\Delta G\cos\Omega s\,ds` and
        :math:`\int_0^\infty(\chi(t-s)-\chi(t)+s\chi'(t))\tilde G^+\cos\Omega s\,ds`.
    """
    spec = spec or numerics.DEFAULT_SPEC
    t = np.atleast_1d(np.asarray(t, dtype=float))
    omega = abs(float(omega))
    if profile.kind is ProfileKind.CONSTANT_ON:
        return np.zeros_like(t), np.zeros_like(t)
    chi_t = _chi_values(profile, t)
    dchi_t = _chi_values(profile, t, derivative=True)
    chi_inf = chi_past(profile)
    h_fine = min(math.pi / omega, 0.5 * time_scale(profile))
    near = 0.0
    if not bath.is_vacuum:
        h_fine = min(h_fine, 0.5 * bath.beta)
        near = 4.0 * bath.beta                  # csch^2 structure of the thermal difference
    h_coarse = math.pi / omega
    lag = _saturation_lag(profile, t)
    floor = 6.0 * bath.beta if not bath.is_vacuum else 0.0
    uppers = np.maximum(lag + 2.0 * time_scale(profile), floor)
    uppers = np.maximum(uppers, 4.0 * h_fine)
    features = _feature_zones(profile)
    j_th = np.empty_like(t)
    j_vac = np.empty_like(t)
    kinked = bool(kinks(profile))
    order = np.argsort(t)
    i = 0
    while i < len(t):
        rows = order[i:i + (1 if kinked else 32)]
        i += len(rows)
        upper = float(np.max(uppers[rows]))
        t_lo, t_hi = float(np.min(t[rows])), float(np.max(t[rows]))
        # in lag space a feature at c with half width w sits at t - c +- w
        zones = [(t_lo - c - hw, t_hi - c + hw) for c, hw in features]
        zones.append((0.0, max(near, 2.0 * h_fine)))
        breaks = tuple(float(t[r] - k) for r in rows for k in kinks(profile)) if kinked else ()
        # just after a kink chi'(t) and the slope of chi(t - s) beyond the break
        # differ, leaving a 1/s tail in the vacuum integrand: grade geometrically
        breaks = breaks + tuple(b * 2.0 ** j for b in breaks if b > 0
                                for j in range(1, max(1, int(math.log2(h_fine / b)) + 1)))
        hf, hc = h_fine, h_coarse
        for _attempt in range(6):
            edges = _panel_edges(upper, hf, hc, zones, breaks)
            s, wts = _panel_nodes(edges, _GL_X, _GL_W)
            th, vac = _integrand_block(profile, bath, omega, t[rows], s, chi_t[rows], dchi_t[rows], chi_inf)
            th_i, vac_i = th @ wts, vac @ wts
            s2, w2 = _panel_nodes(edges, _GLC_X, _GLC_W)
            th2, vac2 = _integrand_block(profile, bath, omega, t[rows], s2, chi_t[rows], dchi_t[rows], chi_inf)
            err = np.maximum(np.abs(th2 @ w2 - th_i), np.abs(vac2 @ w2 - vac_i))
            scale_ = np.maximum(np.abs(th_i), np.abs(vac_i))
            floor = _vacuum_rounding(profile, t[rows], s2, w2, chi_t[rows], dchi_t[rows])
            if np.all(err <= np.maximum(spec.rel_tol * scale_, spec.abs_tol) + floor):
                break
            hf *= 0.5
            hc *= 0.5
        else:
            raise NonConvergence("switching integrals did not converge under panel refinement",
                                 module="coefficients", op="coefficient")
        # analytic tails beyond the saturation lag
        c2 = numerics.cos_over_s2_tail(omega, upper)
        c1 = numerics.cos_over_s_tail(omega, upper)
        jump = chi_inf - chi_t[rows]
        th_tail = 0.0 if bath.is_vacuum else jump * c2 / (2 * PI2)
        vac_tail = -(jump * c2 + dchi_t[rows] * c1) / (2 * PI2)
        j_th[rows] = th_i + th_tail
        j_vac[rows] = vac_i + vac_tail
    return j_th, j_vac


def _check_sharpness(profile: SwitchingProfile, det: DetectorParams):
    rate = max_switch_rate(profile)
    if rate > 1.0 / det.tau_s:
        warnings.warn(f"profile switches at rate {rate:.3g} > 1/tau_s = {1 / det.tau_s:.3g}",
                      SharpSwitchWarning, stacklevel=3)


def _assemble(profile, bath, det, t, j_th, j_vac, omega_signed):
    chi_t = _chi_values(profile, t)
    dchi_t = _chi_values(profile, t, derivative=True)
    stationary = float(spectral_f(-omega_signed, bath))
    zeta = zeta_renormalized(det.omega, det.tau_s)
    return det.gbar * (chi_t ** 2 * stationary + chi_t * dchi_t * zeta + chi_t * (j_th + j_vac))


def coefficient(t: float, omega_signed: float, profile: SwitchingProfile, bath: BathParams,
                det: DetectorParams, spec: QuadratureSpec | None = None) -> float:
    """Renormalized coefficient ``C(t, omega_signed)``.

    ``omega_signed = +det.omega`` gives the de-excitation rate ``C_+``,
    ``-det.omega`` the excitation rate ``C_-``.  Only the magnitude of
    ``omega_signed`` enters the integrals and ``zeta_r``; ``det.omega`` sets ``zeta_r``.

    Warns
    -----
    SharpSwitchWarning
        If ``|chi'/chi|`` exceeds ``1/tau_s`` somewhere on the support.
    """
    _check_sharpness(profile, det)
    tt = np.array([float(t)])
    j_th, j_vac = switching_integrals(profile, bath, omega_signed, tt, spec)
    return float(_assemble(profile, bath, det, tt, j_th, j_vac, omega_signed)[0])


@dataclass(frozen=True)
class CoefficientGrid:
    """Rates ``C_+``, ``C_-`` sampled on a uniform time grid.

    Attributes
    ----------
    t_grid, c_plus, c_minus, chi : ndarray
    cumulative : ndarray
        ``int_{t0}^{t} (C_+ + C_-) dt'`` from the cubic-spline antiderivative.
    negative_rate : bool
        True when ``C_+ + C_-`` is negative somewhere on the grid.
    """

    t_grid: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    cumulative: np.ndarray
    chi: np.ndarray
    negative_rate: bool = False
    omega: float = 1.0
    _splines: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (np.all(np.isfinite(self.c_plus)) and np.all(np.isfinite(self.c_minus))):
            raise DomainError("non-finite coefficients", module="coefficients", op="CoefficientGrid")
        if self._splines is None:
            object.__setattr__(self, "_splines", _rate_splines(self.t_grid, self.c_plus, self.c_minus))

    @property
    def total_rate(self) -> np.ndarray:
        return self.c_plus + self.c_minus

    def rates(self, t):
        """Cubic-spline interpolants ``(C_+(t), C_-(t))``."""
        sp, sm = self._splines
        return sp(t), sm(t)

    def to_csv(self, path_or_buffer=None) -> str:
        """Serialize as ``t,c_plus,c_minus,cumulative`` (17 significant digits)."""
        text = format_csv(["t", "c_plus", "c_minus", "cumulative"],
                          zip(self.t_grid, self.c_plus, self.c_minus, self.cumulative))
        if path_or_buffer is not None:
            with open(path_or_buffer, "w", newline="") as fh:
                fh.write(text)
        return text


def _rate_splines(t, cp, cm):
    if len(t) < 4:
        from scipy.interpolate import interp1d
        return interp1d(t, cp), interp1d(t, cm)
    return CubicSpline(t, cp), CubicSpline(t, cm)


def cumulative_rate(t_grid: np.ndarray, total: np.ndarray) -> np.ndarray:
    """``int_{t0}^{t} total`` on the grid (spline antiderivative, trapezoid for < 4 points)."""
    if len(t_grid) < 4:
        return np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t_grid) * (total[1:] + total[:-1]))])
    return CubicSpline(t_grid, total).antiderivative()(t_grid)


def coefficient_grid(profile: SwitchingProfile, bath: BathParams, det: DetectorParams, t0: float,
                     t1: float, n_points: int, spec: QuadratureSpec | None = None) -> CoefficientGrid:
    """Sample ``C_+`` and ``C_-`` on ``n_points`` uniform times in ``[t0, t1]``.

    Negative total rates are permitted (switching transients) and logged.
    """
    if n_points < 2 or not t0 < t1:
        raise DomainError("need n_points >= 2 and t0 < t1", module="coefficients", op="coefficient_grid")
    _check_sharpness(profile, det)
    t = np.linspace(t0, t1, int(n_points))
    j_th, j_vac = switching_integrals(profile, bath, det.omega, t, spec)
    cp = _assemble(profile, bath, det, t, j_th, j_vac, det.omega)
    cm = _assemble(profile, bath, det, t, j_th, j_vac, -det.omega)
    total = cp + cm
    cumulative = cumulative_rate(t, total)
    negative = bool(np.any(total < -1e-14 * max(1.0, float(np.max(np.abs(total))))))
    if negative:
        logger.info("coefficient_grid: total rate C+ + C- is negative at %d grid points",
                    int(np.sum(total < 0)))
    return CoefficientGrid(t, cp, cm, cumulative, _chi_values(profile, t), negative, det.omega)


def default_window(profile: SwitchingProfile, pad: float = 0.2) -> tuple[float, float]:
    """Evolution window: effective support extended by ``pad`` of its width on both sides."""
    lo, hi = support(profile)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError(f"{profile.kind.value} has no finite support; give t0, t1 explicitly",
                          module="coefficients", op="default_window")
    width = hi - lo
    return lo - pad * width, hi + pad * width
