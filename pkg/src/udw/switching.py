"""Switching (window) profiles and their diagnostics.

A :class:`SwitchingProfile` is an immutable tagged value describing the time
dependence ``chi(tau)`` of the detector--field coupling.  This module
evaluates ``chi`` and its exact derivative, the measurement time
``tau_m = int chi^2``, the effective time
``tau_eff = (int chi^2 / int chi'^2)^(1/2)``, the window autocorrelation
``D_chi(s)``, and the window operator applied to the thermal spectrum.  It
also builds the two designed profiles: the softest (exponential) window and
the "heating" window whose autocorrelation turns the vacuum spectrum into a
thermal one.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import numerics
from .correlators import BathParams, PI2, TWO_PI, spectral_f, tilde_g_difference
from .errors import (DomainError, InfiniteMeasurement, InterpolationRange, NegativeSpectralCurvature,
                     ParameterWarning, UnsupportedProfile, VacuumUnregulated, ZeroDerivative)
from .numerics import QuadratureSpec

logger = logging.getLogger(__name__)

SUPPORT_THRESHOLD = 1e-8


class ProfileKind(str, enum.Enum):
    GAUSSIAN = "Gaussian"
    LORENTZ = "Lorentz"
    TANH_WINDOW = "TanhWindow"
    TANH_SWITCH_OFF = "TanhSwitchOff"
    EXPONENTIAL = "Exponential"
    TABULATED = "Tabulated"
    CONSTANT_ON = "ConstantOn"


@dataclass(frozen=True)
class SwitchingProfile:
    """Window function ``chi(tau)``, normalized to peak value 1.

    Use the constructors (:meth:`gaussian`, :meth:`lorentz`,
    :meth:`tanh_window`, :meth:`tanh_switch_off`, :meth:`exponential`,
    :meth:`tabulated`, :meth:`constant_on`) rather than the raw fields.

    Attributes
    ----------
    kind : ProfileKind
    tau_bar : float
        Centre of the window (switch-off moment for ``TanhSwitchOff``).
    tau0 : float
        Width; ``tau2 - tau1`` for ``TanhWindow``.
    lam : float or None
        Inverse switching time ``1/delta_tau`` of the tanh profiles.
    tau1, tau2 : float or None
        Switch-on/off moments of ``TanhWindow``.
    table_tau, table_chi : tuple of float or None
        Samples of a tabulated profile (cubic spline, natural boundary).
    """

    kind: ProfileKind
    tau_bar: float = 0.0
    tau0: float = 1.0
    lam: float | None = None
    tau1: float | None = None
    tau2: float | None = None
    table_tau: tuple | None = field(default=None, repr=False)
    table_chi: tuple | None = field(default=None, repr=False)
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = ProfileKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ProfileKind.TABULATED:
            tau = np.asarray(self.table_tau, dtype=float)
            val = np.asarray(self.table_chi, dtype=float)
            if tau.ndim != 1 or tau.shape != val.shape or len(tau) < 8:
                raise DomainError("a tabulated profile needs >= 8 (tau, chi) rows",
                                  module="switching", op="SwitchingProfile")
            if np.any(np.diff(tau) <= 0):
                raise DomainError("table tau must be strictly increasing", module="switching",
                                  op="SwitchingProfile")
            if not np.all(np.isfinite(val)):
                raise DomainError("table chi must be finite", module="switching", op="SwitchingProfile")
            object.__setattr__(self, "_spline", CubicSpline(tau, val, bc_type="natural"))
            return
        if kind is ProfileKind.CONSTANT_ON:
            return
        if kind in (ProfileKind.TANH_WINDOW, ProfileKind.TANH_SWITCH_OFF):
            if self.lam is None or not self.lam > 0:
                raise DomainError("tanh profiles need lam > 0", module="switching", op="SwitchingProfile")
        if kind is ProfileKind.TANH_WINDOW:
            if self.tau1 is None or self.tau2 is None or not self.tau2 > self.tau1:
                raise DomainError("TanhWindow needs tau2 > tau1", module="switching", op="SwitchingProfile")
            if self.lam * (self.tau2 - self.tau1) < 5:
                warnings.warn("TanhWindow with lam*tau0 < 5 is not a sharp window", ParameterWarning,
                              stacklevel=3)
        elif kind is not ProfileKind.TANH_SWITCH_OFF and not self.tau0 > 0:
            raise DomainError("tau0 must be positive", module="switching", op="SwitchingProfile")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def gaussian(cls, tau0: float, tau_bar: float = 0.0) -> "SwitchingProfile":
        """``exp(-(tau - tau_bar)^2 / tau0^2)``."""
        return cls(ProfileKind.GAUSSIAN, tau_bar=tau_bar, tau0=tau0)

    @classmethod
    def lorentz(cls, tau0: float, tau_bar: float = 0.0) -> "SwitchingProfile":
        """``tau0^2 / ((tau - tau_bar)^2 + tau0^2)``."""
        return cls(ProfileKind.LORENTZ, tau_bar=tau_bar, tau0=tau0)

    @classmethod
    def exponential(cls, tau0: float, tau_bar: float = 0.0) -> "SwitchingProfile":
        """``exp(-|tau - tau_bar| / tau0)``."""
        return cls(ProfileKind.EXPONENTIAL, tau_bar=tau_bar, tau0=tau0)

    @classmethod
    def tanh_window(cls, tau1: float, tau2: float, lam: float) -> "SwitchingProfile":
        """Smoothed box ``[tanh(lam(tau-tau1)) + tanh(lam(tau2-tau))] / (2 tanh(lam tau0/2))``."""
        return cls(ProfileKind.TANH_WINDOW, tau_bar=0.5 * (tau1 + tau2), tau0=tau2 - tau1, lam=lam,
                   tau1=tau1, tau2=tau2)

    @classmethod
    def tanh_switch_off(cls, lam: float, tau_bar: float = 0.0) -> "SwitchingProfile":
        """Adiabatic switch-off ``(1 - tanh(lam (tau - tau_bar))) / 2``."""
        return cls(ProfileKind.TANH_SWITCH_OFF, tau_bar=tau_bar, tau0=1.0 / lam, lam=lam)

    @classmethod
    def tabulated(cls, tau, chi) -> "SwitchingProfile":
        """Cubic-spline interpolant of samples ``(tau, chi)``."""
        return cls(ProfileKind.TABULATED, table_tau=tuple(np.asarray(tau, float)),
                   table_chi=tuple(np.asarray(chi, float)))

    @classmethod
    def constant_on(cls) -> "SwitchingProfile":
        """Coupling that is always on (``chi = 1``)."""
        return cls(ProfileKind.CONSTANT_ON)

    # -- convenience ------------------------------------------------------------

    def __call__(self, tau):
        return chi(self, tau)

    @property
    def z(self) -> float:
        """Sharpness ``lam * tau0`` of a tanh window."""
        return self.lam * self.tau0

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.kind is ProfileKind.TABULATED:
            d["tau"] = list(self.table_tau)
            d["chi"] = list(self.table_chi)
        elif self.kind is ProfileKind.TANH_WINDOW:
            d.update(tau1=self.tau1, tau2=self.tau2, lam=self.lam)
        elif self.kind is ProfileKind.TANH_SWITCH_OFF:
            d.update(lam=self.lam, tau_bar=self.tau_bar)
        elif self.kind is not ProfileKind.CONSTANT_ON:
            d.update(tau0=self.tau0, tau_bar=self.tau_bar)
        return d


CLOSED_FORM_KINDS = (ProfileKind.GAUSSIAN, ProfileKind.LORENTZ, ProfileKind.TANH_WINDOW)


# ----------------------------------------------------------------------------
# chi and chi'
# ----------------------------------------------------------------------------


def _sech2(x):
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def _chi_values(p: SwitchingProfile, tau, derivative: bool = False, extend: bool = True):
    t = np.asarray(tau, dtype=float)
    k = p.kind
    if k is ProfileKind.CONSTANT_ON:
        return np.zeros_like(t) if derivative else np.ones_like(t)
    if k is ProfileKind.TABULATED:
        lo, hi = p.table_tau[0], p.table_tau[-1]
        outside = (t < lo) | (t > hi)
        if np.any(outside) and not extend:
            raise InterpolationRange(f"tabulated profile evaluated outside [{lo}, {hi}]",
                                     module="switching", op="chi")
        tc = np.clip(t, lo, hi)
        out = p._spline(tc, 1 if derivative else 0)
        if derivative:
            out = np.where(outside, 0.0, out)
        return out
    x = t - p.tau_bar
    if k is ProfileKind.GAUSSIAN:
        g = np.exp(-(x / p.tau0) ** 2)
        return -2.0 * x / p.tau0 ** 2 * g if derivative else g
    if k is ProfileKind.LORENTZ:
        den = x * x + p.tau0 ** 2
        return -2.0 * x * p.tau0 ** 2 / den ** 2 if derivative else p.tau0 ** 2 / den
    if k is ProfileKind.EXPONENTIAL:
        e = np.exp(-np.abs(x) / p.tau0)
        # at the kink the derivative is the limit from the past
        return np.where(x > 0, -1.0, 1.0) / p.tau0 * e if derivative else e
    lam = p.lam
    if k is ProfileKind.TANH_SWITCH_OFF:
        return -0.5 * lam * _sech2(lam * x) if derivative else 0.5 * (1.0 - np.tanh(lam * x))
    # TanhWindow
    norm = 2.0 * math.tanh(0.5 * p.z)
    a = lam * (t - p.tau1)
    b = lam * (p.tau2 - t)
    if derivative:
        return lam * (_sech2(a) - _sech2(b)) / norm
    return (np.tanh(a) + np.tanh(b)) / norm


def _scalar(out):
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def chi(profile: SwitchingProfile, tau):
    """Window value ``chi(tau)`` (vectorized).

    Raises
    ------
    InterpolationRange
        Tabulated profile evaluated outside its table.
    """
    return _scalar(_chi_values(profile, tau, extend=False))


def chi_prime(profile: SwitchingProfile, tau):
    """Exact derivative ``chi'(tau)`` (vectorized; spline derivative for tables).

    At a kink (see :func:`kinks`) the limit from the past is returned.
    """
    return _scalar(_chi_values(profile, tau, derivative=True, extend=False))


def chi_past(profile: SwitchingProfile) -> float:
    """Limit ``chi(tau -> -inf)``; tables are extended by their first value."""
    if profile.kind in (ProfileKind.TANH_SWITCH_OFF, ProfileKind.CONSTANT_ON):
        return 1.0
    if profile.kind is ProfileKind.TABULATED:
        return float(profile.table_chi[0])
    return 0.0


def support(profile: SwitchingProfile, threshold: float = SUPPORT_THRESHOLD) -> tuple[float, float]:
    """Effective support: the interval outside which ``chi`` is within ``threshold`` of its limits.

    For ``TanhSwitchOff`` this is the transition region; ``ConstantOn``
    returns ``(-inf, inf)``.
    """
    k = profile.kind
    c = profile.tau_bar
    if k is ProfileKind.CONSTANT_ON:
        return -math.inf, math.inf
    if k is ProfileKind.TABULATED:
        return float(profile.table_tau[0]), float(profile.table_tau[-1])
    if k is ProfileKind.GAUSSIAN:
        r = profile.tau0 * math.sqrt(math.log(1.0 / threshold))
    elif k is ProfileKind.LORENTZ:
        r = profile.tau0 * math.sqrt(1.0 / threshold - 1.0)
    elif k is ProfileKind.EXPONENTIAL:
        r = profile.tau0 * math.log(1.0 / threshold)
    elif k is ProfileKind.TANH_SWITCH_OFF:
        r = math.atanh(1.0 - 2.0 * threshold) / profile.lam
    else:
        d = -0.5 * math.log(threshold * math.tanh(0.5 * profile.z)) / profile.lam
        return profile.tau1 - d, profile.tau2 + d
    return c - r, c + r


def time_scale(profile: SwitchingProfile) -> float:
    """Shortest time over which ``chi`` changes appreciably (sets quadrature panel sizes)."""
    k = profile.kind
    if k is ProfileKind.CONSTANT_ON:
        return math.inf
    if k in (ProfileKind.TANH_WINDOW, ProfileKind.TANH_SWITCH_OFF):
        return 1.0 / profile.lam
    if k is ProfileKind.TABULATED:
        return 2.0 * float(np.median(np.diff(profile.table_tau)))
    return profile.tau0


def kinks(profile: SwitchingProfile) -> list[float]:
    """Times where ``chi'`` is discontinuous."""
    if profile.kind is ProfileKind.EXPONENTIAL:
        return [profile.tau_bar]
    return []


def max_switch_rate(profile: SwitchingProfile, n: int = 4001) -> float:
    """``max |chi'/chi|`` over the effective support (sampled)."""
    if profile.kind is ProfileKind.CONSTANT_ON:
        return 0.0
    lo, hi = support(profile)
    if profile.kind is ProfileKind.LORENTZ:
        return 1.0 / profile.tau0
    t = np.linspace(lo, hi, n)
    c = _chi_values(profile, t)
    d = _chi_values(profile, t, derivative=True)
    ok = np.abs(c) > SUPPORT_THRESHOLD
    return float(np.max(np.abs(d[ok] / c[ok]))) if np.any(ok) else 0.0


# ----------------------------------------------------------------------------
# Integrals over the whole time axis
# ----------------------------------------------------------------------------

_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


def _piecewise_exact(edges: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Gauss--Legendre-4 on every interval of ``edges``: exact for piecewise degree <= 7."""
    edges = np.unique(edges)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    x = (0.5 * (a + b))[:, None] + half[:, None] * _GL4_X[None, :]
    return float(np.sum(half * (f(x) @ _GL4_W)))


def _integrate_line(profile: SwitchingProfile, f, spec: QuadratureSpec | None) -> float:
    """``int f(tau) d tau`` over the real line for a product-of-chi integrand ``f``."""
    if profile.kind is ProfileKind.TABULATED:
        return _piecewise_exact(np.asarray(profile.table_tau), f)
    lo, hi = support(profile)
    c = profile.tau_bar
    bps = kinks(profile) + [c]
    return numerics.integrate_interval(f, lo, hi, spec, breakpoints=bps)


def measurement_time(profile: SwitchingProfile, spec: QuadratureSpec | None = None, *,
                     closed_form: bool = True) -> float:
    r"""Measurement time :math:`\tau_m = \int \chi^2 d\tau`.

    Closed forms are used for Gaussian (:math:`\tau_0\sqrt{\pi/2}`), Lorentz
    (:math:`\pi\tau_0/2`) and exponential (:math:`\tau_0`) windows unless
    ``closed_form=False``.

    Raises
    ------
    InfiniteMeasurement
        For always-on or switch-off-only profiles.
    """
    k = profile.kind
    if k in (ProfileKind.CONSTANT_ON, ProfileKind.TANH_SWITCH_OFF):
        raise InfiniteMeasurement(f"{k.value} profile has infinite measurement time",
                                  module="switching", op="measurement_time")
    if closed_form:
        if k is ProfileKind.GAUSSIAN:
            return profile.tau0 * math.sqrt(math.pi / 2)
        if k is ProfileKind.LORENTZ:
            return math.pi * profile.tau0 / 2
        if k is ProfileKind.EXPONENTIAL:
            return profile.tau0
    return _integrate_line(profile, lambda t: _chi_values(profile, t) ** 2, spec)


def _derivative_square_integral(profile, spec):
    return _integrate_line(profile, lambda t: _chi_values(profile, t, derivative=True) ** 2, spec)


def effective_time(profile: SwitchingProfile, spec: QuadratureSpec | None = None) -> float:
    r"""Effective interaction time :math:`\tau_{\rm eff} = (\int\chi^2 / \int\chi'^2)^{1/2}`.

    Both integrals are evaluated numerically.

    Raises
    ------
    ZeroDerivative
        For ``ConstantOn``.
    """
    if profile.kind is ProfileKind.CONSTANT_ON:
        raise ZeroDerivative("ConstantOn has chi' = 0", module="switching", op="effective_time")
    num = measurement_time(profile, spec, closed_form=False)
    den = _derivative_square_integral(profile, spec)
    return math.sqrt(num / den)


@dataclass(frozen=True)
class WindowDiagnostics:
    """Measurement time, effective time and their ratio."""

    tau_m: float
    tau_eff: float

    @property
    def ratio(self) -> float:
        return self.tau_m / self.tau_eff

    def to_dict(self) -> dict:
        return {"tau_m": self.tau_m, "tau_eff": self.tau_eff, "ratio": self.ratio}


def window_diagnostics(profile: SwitchingProfile, spec: QuadratureSpec | None = None) -> WindowDiagnostics:
    """Both window times, evaluated by quadrature."""
    return WindowDiagnostics(measurement_time(profile, spec, closed_form=False), effective_time(profile, spec))


# ----------------------------------------------------------------------------
# Window autocorrelation D_chi(s)
# ----------------------------------------------------------------------------


def _d_minus_one_single(profile: SwitchingProfile, s: float, tau_m: float, spec) -> float:
    """``D(s) - 1`` from the pointwise difference ``chi(t+s/2)chi(t-s/2) - chi(t)^2``.

    Differencing under the integral keeps the O(s^2) result accurate at small s.
    """
    h = 0.5 * s

    def f(t):
        return _chi_values(profile, t + h) * _chi_values(profile, t - h) - _chi_values(profile, t) ** 2

    if profile.kind is ProfileKind.TABULATED:
        knots = np.asarray(profile.table_tau)
        edges = np.concatenate([knots - h, knots, knots + h])
        return _piecewise_exact(edges, f) / tau_m
    lo, hi = support(profile)
    bps = [profile.tau_bar - h, profile.tau_bar, profile.tau_bar + h]
    for kpt in kinks(profile):
        bps += [kpt - h, kpt + h]
    local = QuadratureSpec(rel_tol=spec.rel_tol, abs_tol=spec.abs_tol * 1e-2 * tau_m,
                           max_subdivisions=spec.max_subdivisions)
    return numerics.integrate_interval(f, lo - abs(h), hi + abs(h), local, breakpoints=bps) / tau_m


def d_chi_minus_one(profile: SwitchingProfile, s, spec: QuadratureSpec | None = None):
    """``D_chi(s) - 1`` by quadrature (vectorized over ``s``)."""
    spec = spec or numerics.DEFAULT_SPEC
    if profile.kind is ProfileKind.CONSTANT_ON:
        return _scalar(np.zeros_like(np.asarray(s, dtype=float)))
    tau_m = measurement_time(profile, spec, closed_form=False)
    s_arr = np.abs(np.asarray(s, dtype=float))
    flat = s_arr.ravel()
    out = np.array([0.0 if si == 0 else _d_minus_one_single(profile, float(si), tau_m, spec) for si in flat])
    return _scalar(out.reshape(s_arr.shape))


def d_chi_numeric(profile: SwitchingProfile, s, spec: QuadratureSpec | None = None):
    r"""Window autocorrelation :math:`D_\chi(s) = \tau_m^{-1}\int d\tau\,\chi(\tau+s/2)\chi(\tau-s/2)` by quadrature.

    Even in ``s`` with ``D(0) = 1`` exactly.
    """
    return _scalar(1.0 + np.asarray(d_chi_minus_one(profile, s, spec)))


def _u_exp_over_sinh(u):
    """``u e^u / sinh(u) = 2u / (1 - e^{-2u})`` for real ``u``, overflow-free and 1 at 0."""
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    nz = u != 0
    a = np.abs(u[nz])
    # 2|u| / (1 - e^{-2|u|}) for u > 0; times e^{-2|u|} for u < 0
    out[nz] = 2.0 * a / (-np.expm1(-2.0 * a)) * np.where(u[nz] > 0, 1.0, np.exp(-2.0 * a))
    return out


def _tanh_d_direct(x: np.ndarray, z: float) -> np.ndarray:
    """Closed tanh-window autocorrelation at ``x = lam*s > 0`` (no removable-point handling)."""
    # sinh(z)/sinh(x) * [u/sinh(u)]_{u=z-x}^{u=z+x} with the exponentials e^{z-x} folded in
    pref = (-math.expm1(-2.0 * z)) / (-np.expm1(-2.0 * x))
    zcth = z / math.tanh(z) - 1.0
    return 0.5 * pref / zcth * (_u_exp_over_sinh(z - x) - np.exp(-2.0 * x) * _u_exp_over_sinh(z + x))


def _tanh_d_closed(s: np.ndarray, lam: float, z: float) -> np.ndarray:
    x = lam * np.abs(s)
    out = np.empty_like(x)
    delta = 1e-3
    small = x < delta
    if np.any(small):
        # even quartic through D(0)=1, D(delta), D(2 delta): 4th-order series with numerical coefficients
        d1, d2 = _tanh_d_direct(np.array([delta, 2 * delta]), z) - 1.0
        c4 = (d2 - 4.0 * d1) / (12.0 * delta ** 4)
        c2 = (d1 - c4 * delta ** 4) / delta ** 2
        xs2 = x[small] ** 2
        out[small] = 1.0 + c2 * xs2 + c4 * xs2 * xs2
    out[~small] = _tanh_d_direct(x[~small], z)
    return out


def d_chi_closed(profile: SwitchingProfile, s):
    r"""Closed-form window autocorrelation.

    * Gaussian: :math:`e^{-s^2/2\tau_0^2}`
    * Lorentz: :math:`1/(1 + (s/2\tau_0)^2)`
    * TanhWindow (``x = lam*s``, ``z = lam*tau0``):

      .. math:: D = \frac{1}{2}\frac{\sinh z}{\sinh x}\frac{1}{z\coth z - 1}
                \Big[\frac{z-x}{\sinh(z-x)} - \frac{z+x}{\sinh(z+x)}\Big]

      with the removable point ``x = 0`` handled by an even quartic fitted
      to two direct evaluations (``x = z`` is regular in the ``u/sinh u``
      form used here).

    Raises
    ------
    UnsupportedProfile
        For kinds without a closed form.
    """
    s_arr = np.asarray(s, dtype=float)
    k = profile.kind
    if k is ProfileKind.GAUSSIAN:
        out = np.exp(-0.5 * (s_arr / profile.tau0) ** 2)
    elif k is ProfileKind.LORENTZ:
        out = 1.0 / (1.0 + (0.5 * s_arr / profile.tau0) ** 2)
    elif k is ProfileKind.TANH_WINDOW:
        out = _tanh_d_closed(np.atleast_1d(s_arr).astype(float), profile.lam, profile.z).reshape(s_arr.shape)
    elif k is ProfileKind.CONSTANT_ON:
        out = np.ones_like(s_arr)
    else:
        raise UnsupportedProfile(f"no closed-form D_chi for {k.value}", module="switching", op="d_chi_closed")
    return _scalar(out)


def _d_minus_one_function(profile: SwitchingProfile, spec) -> Callable[[np.ndarray], np.ndarray]:
    if profile.kind in CLOSED_FORM_KINDS:
        if profile.kind is ProfileKind.GAUSSIAN:
            return lambda s: np.expm1(-0.5 * (s / profile.tau0) ** 2)
        if profile.kind is ProfileKind.LORENTZ:
            return lambda s: -(0.5 * s / profile.tau0) ** 2 / (1.0 + (0.5 * s / profile.tau0) ** 2)
        return lambda s: np.asarray(d_chi_closed(profile, s)) - 1.0
    return lambda s: np.asarray(d_chi_minus_one(profile, s, spec))


# ----------------------------------------------------------------------------
# Window operator on the spectrum
# ----------------------------------------------------------------------------


def apply_window_to_spectrum(profile: SwitchingProfile, omega_arg: float, bath: BathParams,
                             spec: QuadratureSpec | None = None) -> float:
    r"""Windowed spectrum :math:`D_\chi F_\beta(\Omega) = \int ds\, D_\chi(s) e^{-i\Omega s} G^+_\beta(s)`.

    Evaluated for :math:`\Omega > 0` as

    .. math:: \int_0^\infty D_\chi\cos(\Omega s)\,\Delta G\,ds
              + \int_0^\infty (D_\chi - 1)\cos(\Omega s)\,\tilde G^+\,ds,

    where :math:`\Delta G` is the regular thermal-minus-vacuum difference and
    the vacuum kernel :math:`\tilde G^+ = -1/(2\pi^2 s^2)` is tamed by the
    subtraction :math:`D_\chi - 1 = O(s^2)`.  Negative arguments add
    :math:`|\Omega|/2\pi`.  The leading-order excitation probability is
    ``gbar * tau_m * apply_window_to_spectrum(...)``.

    Parameters
    ----------
    profile : SwitchingProfile
    omega_arg : float
        Frequency of either sign (nonzero).
    bath : BathParams
    spec : QuadratureSpec, optional

    Returns
    -------
    float
    """
    spec = spec or numerics.DEFAULT_SPEC
    if omega_arg == 0:
        raise DomainError("omega_arg must be nonzero", module="switching", op="apply_window_to_spectrum")
    if profile.kind is ProfileKind.CONSTANT_ON:
        return float(spectral_f(omega_arg, bath))
    if bath.is_vacuum and profile.kind is ProfileKind.LORENTZ:
        warnings.warn("vacuum window integral with a power-law window autocorrelation",
                      VacuumUnregulated, stacklevel=2)
    w = abs(float(omega_arg))
    dm1 = _d_minus_one_function(profile, spec)
    zero_temp = bath.is_vacuum

    def integrand(s):
        s = np.asarray(s, dtype=float)
        dmo = dm1(s)
        out = np.empty_like(s)
        pos = s > 0
        sp = s[pos]
        vac = dmo[pos] * (-1.0 / (2 * PI2 * sp * sp))
        out[pos] = vac if zero_temp else vac + (1.0 + dmo[pos]) * tilde_g_difference(sp, bath)
        # s -> 0: (D-1)/s^2 -> -1/(2 tau_eff^2); only reached at exactly s = 0 which GK never samples
        out[~pos] = 0.0
        return out * np.cos(w * s)

    bps = []
    if profile.kind is ProfileKind.TANH_WINDOW:
        bps = [profile.tau0]
    value = numerics.integrate_semi_infinite(integrand, w, spec, breakpoints=bps)
    if omega_arg < 0:
        value += w / TWO_PI
    return value


def optimal_profile(tau0: float) -> SwitchingProfile:
    """The softest window: exponential ``exp(-|tau|/tau0)``, for which ``tau_m = tau_eff``."""
    return SwitchingProfile.exponential(tau0)


# ----------------------------------------------------------------------------
# Heating profile
# ----------------------------------------------------------------------------


def spectral_curvature(omega, bar_beta: float):
    r"""Analytic :math:`\partial^2 F_{\bar\beta}/\partial\omega^2` at zero regulator.

    With :math:`g(x) = x/(e^x - 1)`, :math:`F = g(\bar\beta\omega)/(2\pi\bar\beta)` and
    :math:`F'' = \bar\beta\, g''(\bar\beta\omega)/2\pi`; :math:`g''` is even and
    evaluated as :math:`[|x| u (1+u) - 2u(1-u)]/(1-u)^3`, :math:`u = e^{-|x|}`,
    with its Taylor series near 0.
    """
    x = np.abs(bar_beta * np.asarray(omega, dtype=float))
    out = np.empty_like(x)
    small = x < 0.05
    x2 = x[small] ** 2
    out[small] = 1 / 6 + x2 * (-1 / 60 + x2 * (1 / 1008 + x2 * (-1 / 21600 + x2 / 532224)))
    xl = x[~small]
    u = np.exp(-xl)
    out[~small] = (xl * u * (1 + u) - 2 * u * (1 - u)) / (1 - u) ** 3
    return _scalar(bar_beta / TWO_PI * out)


@dataclass(frozen=True)
class HeatingResult:
    """Outcome of :func:`heating_profile`.

    Attributes
    ----------
    profile : SwitchingProfile
        Tabulated window, peak-normalized.
    tau_m : float
        Measurement time of the tabulated window.
    defect : float
        Clamped negative curvature plus unresolved curvature mass, relative
        to the exact total ``int F'' = 1/(2 pi)``.
    flagged : bool
        ``defect > 1%``.
    """

    profile: SwitchingProfile
    tau_m: float
    defect: float
    flagged: bool

    def to_dict(self) -> dict:
        return {"tau_m": self.tau_m, "defect": self.defect, "flagged": self.flagged,
                "n_points": len(self.profile.table_tau)}


def heating_profile(bar_beta: float, omega_grid, tau_grid=None, spec: QuadratureSpec | None = None,
                    defect_threshold: float = 0.01) -> HeatingResult:
    r"""Window whose autocorrelation maps the vacuum spectrum onto the thermal one at :math:`\bar\beta`.

    .. math:: \chi_{\bar\beta}(\tau) \propto \int d\omega\,
              \big(\tau_m\,\partial^2_\omega F_{\bar\beta}(\omega)\big)^{1/2} e^{-i\omega\tau},

    normalized to peak 1.  Its autocorrelation is
    :math:`D(s) = (\pi s/\bar\beta)^2/\sinh^2(\pi s/\bar\beta)`, so that
    :math:`D\,G^+_\infty = G^+_{\bar\beta}`.  Negative curvature samples are
    clamped to zero; the clamped mass plus the curvature mass missed by the
    grid form the defect measure.

    Parameters
    ----------
    bar_beta : float
        Target inverse temperature (finite).
    omega_grid : array_like
        Uniform grid symmetric about 0 resolving ``F''`` (spacing << 1/bar_beta).
    tau_grid : array_like, optional
        Output times; default ``[-20 bar_beta, 20 bar_beta]`` with spacing
        ``bar_beta/40`` (limited by the aliasing period of ``omega_grid``).

    Warns
    -----
    NegativeSpectralCurvature
        When the defect exceeds ``defect_threshold``.
    """
    if not (bar_beta > 0 and math.isfinite(bar_beta)):
        raise DomainError("bar_beta must be finite and positive", module="switching", op="heating_profile")
    w = np.asarray(omega_grid, dtype=float)
    curv = np.asarray(spectral_curvature(w, bar_beta))
    dw = w[1] - w[0]
    weights = np.full_like(w, dw)
    weights[0] = weights[-1] = 0.5 * dw
    negative = float(np.sum(np.abs(np.minimum(curv, 0.0)) * weights))
    positive = float(np.sum(np.maximum(curv, 0.0) * weights))
    exact_total = 1.0 / TWO_PI
    defect = (negative + abs(exact_total - positive)) / exact_total
    flagged = defect > defect_threshold
    if negative > 0:
        logger.info("heating_profile: clamped negative curvature mass %.3e", negative)
    if flagged:
        warnings.warn(f"spectral curvature defect {defect:.3g} exceeds {defect_threshold:g}",
                      NegativeSpectralCurvature, stacklevel=2)
    amplitude = np.sqrt(np.maximum(curv, 0.0))
    if tau_grid is None:
        half_period = math.pi / dw
        t_max = min(20.0 * bar_beta, 0.45 * half_period)
        n = max(2 * int(math.ceil(t_max / (bar_beta / 40.0))) + 1, 81)
        tau_grid = np.linspace(-t_max, t_max, n)
    tau = np.asarray(tau_grid, dtype=float)
    raw = numerics.fourier_transform_symmetric(amplitude, w, tau, spec)
    # the tau_m^(1/2) prefactor is a constant, so normalizing the peak to 1
    # fixes it; one self-consistency pass recomputes tau_m of the result.
    peak = np.max(np.abs(raw))
    if peak == 0:
        raise DomainError("omega grid does not resolve the spectral curvature", module="switching",
                          op="heating_profile")
    values = raw / peak
    values = 0.5 * (values + values[::-1]) if np.allclose(tau, -tau[::-1]) else values
    prof = SwitchingProfile.tabulated(tau, values)
    tau_m = measurement_time(prof, spec)
    return HeatingResult(prof, tau_m, defect, flagged)


# ----------------------------------------------------------------------------
# Profile tables on disk
# ----------------------------------------------------------------------------


def read_profile_csv(path) -> SwitchingProfile:
    """Read a two-column ``tau,chi`` CSV into a tabulated profile."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["tau", "chi"]:
            raise DomainError(f"{path}: header must be 'tau,chi'", module="switching", op="read_profile_csv")
        rows = [(float(a), float(b)) for a, b in reader]
    tau, val = zip(*rows) if rows else ((), ())
    return SwitchingProfile.tabulated(tau, val)


def write_profile_csv(profile: SwitchingProfile, path) -> None:
    """Write a tabulated profile as ``tau,chi`` with 17 significant digits."""
    if profile.kind is not ProfileKind.TABULATED:
        raise UnsupportedProfile("only tabulated profiles can be written", module="switching",
                                 op="write_profile_csv")
    with open(path, "w", newline="") as fh:
        fh.write("tau,chi\r\n")
        for t, c in zip(profile.table_tau, profile.table_chi):
            fh.write(f"{t:.17g},{c:.17g}\r\n")
