"""Perturbative and large-time observables.

* leading-order excitation probability ``gbar * tau_m * D_chi F_beta(Omega)``;
* the large-time expansion of the transition ratio,
  ``xi = exp(-beta Omega) (1 + beta^2 kappa(beta Omega) / (2 tau_eff^2))``,
  and the effective temperature / entropy shift it implies;
* the residual level shift left by an adiabatic tanh switch-off;
* a Zeno-regime diagnostic for very short sharp windows (raw, regulated route).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import numerics
from .coefficients import coefficient_grid, default_window, zeta_renormalized
from .correlators import (PI2, BathParams, DetectorParams, _one_over_x2_minus_csch2, spectral_f,
                          thermal_occupation, thermal_wightman, tilde_g_difference)
from .errors import AbruptLimitGuard, DomainError, ExpansionWarning, NonConvergence, PerturbativityWarning
from .evolution import transitions
from .numerics import QuadratureSpec
from .switching import (ProfileKind, SwitchingProfile, apply_window_to_spectrum, effective_time,
                        measurement_time)


def leading_order_p01(profile: SwitchingProfile, bath: BathParams, det: DetectorParams,
                      spec: QuadratureSpec | None = None) -> float:
    """Leading-order excitation probability ``gbar * tau_m * D_chi F_beta(Omega)``.

    Raises
    ------
    InfiniteMeasurement
        For always-on profiles (the probability grows without bound).

    Warns
    -----
    PerturbativityWarning
        If the result exceeds 0.1.
    """
    tau_m = measurement_time(profile, spec)
    p = det.gbar * tau_m * apply_window_to_spectrum(profile, det.omega, bath, spec)
    if p > 0.1:
        warnings.warn(f"leading-order probability {p:.3g} is not small", PerturbativityWarning, stacklevel=2)
    return p


def kappa(x):
    r""":math:`\kappa(x) = \coth(x/2) - 2/x` (series ``x/6 - x^3/360 + x^5/15120`` below 1e-3).

    Raises
    ------
    DomainError
        For ``x <= 0``.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("kappa needs x > 0", module="observables", op="kappa")
    small = xa < 1e-3
    series = xa / 6 - xa ** 3 / 360 + xa ** 5 / 15120
    direct = 1.0 / np.tanh(0.5 * np.where(small, 1.0, xa)) - 2.0 / np.where(small, 1.0, xa)
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def xi_large_time(profile: SwitchingProfile | None, bath: BathParams, det: DetectorParams, *,
                  tau_eff: float | None = None) -> float:
    r"""Large-time expansion :math:`\xi = e^{-\beta\Omega}(1 + \beta^2\kappa(\beta\Omega)/2\tau_{\rm eff}^2)`.

    ``tau_eff`` is taken from the profile unless given.

    Warns
    -----
    ExpansionWarning
        If ``beta/tau_eff > 0.5``.
    """
    if bath.is_vacuum:
        raise DomainError("the thermal expansion needs finite beta", module="observables", op="xi_large_time")
    if tau_eff is None:
        tau_eff = effective_time(profile)
    if bath.beta / tau_eff > 0.5:
        warnings.warn(f"beta/tau_eff = {bath.beta / tau_eff:.3g} is not small", ExpansionWarning, stacklevel=2)
    x = bath.beta * det.omega
    return math.exp(-x) * (1.0 + bath.beta ** 2 * kappa(x) / (2.0 * tau_eff ** 2))


def effective_temperature(bath: BathParams, tau_eff: float) -> float:
    """Temperature seen by a finite-time measurement: ``T (1 + 1/(12 tau_eff^2 T^2))``."""
    if not tau_eff > 0:
        raise DomainError("tau_eff must be positive", module="observables", op="effective_temperature")
    t = bath.temperature
    if t == 0:
        return 0.0
    return t * (1.0 + 1.0 / (12.0 * tau_eff ** 2 * t ** 2))


def energy_variance(bath: BathParams, det: DetectorParams) -> float:
    """Thermal energy variance of the two-level detector, ``Omega^2 e^x/(1+e^x)^2``, ``x = beta Omega``."""
    if bath.is_vacuum:
        return 0.0
    x = bath.beta * det.omega
    e = math.exp(-abs(x))
    return det.omega ** 2 * e / (1.0 + e) ** 2


def entropy_shift(bath: BathParams, det: DetectorParams, tau_eff: float) -> float:
    """Entropy change ``S* - S = var(E) / (12 tau_eff^2 T^4)`` of the thermal two-level state."""
    if bath.is_vacuum:
        return 0.0
    t = bath.temperature
    return energy_variance(bath, det) / (12.0 * tau_eff ** 2 * t ** 4)


def binary_entropy(p) -> float:
    """``-p ln p - (1-p) ln(1-p)`` with ``0 ln 0 = 0``."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.where(p > 0, p * np.log(p), 0.0) - np.where(p < 1, (1 - p) * np.log1p(-p), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ThermometryReport:
    """Finite-time thermometry summary (natural units)."""

    xi_exact: float
    xi_expansion: float
    t_star: float
    kappa: float
    entropy_shift: float
    tau_eff: float
    temperature: float

    def to_dict(self) -> dict:
        return asdict(self)


def thermometry(profile: SwitchingProfile, bath: BathParams, det: DetectorParams, *,
                points_per_width: int = 40, spec: QuadratureSpec | None = None) -> ThermometryReport:
    """Compare the exact transition ratio with its large-time expansion.

    ``xi_exact`` comes from two evolutions over the profile's default window
    with ``points_per_width`` samples per ``tau_eff``.
    """
    tau_eff = effective_time(profile, spec)
    lo, hi = default_window(profile)
    n = int(math.ceil((hi - lo) / tau_eff * points_per_width)) + 1
    grid = coefficient_grid(profile, bath, det, lo, hi, n, spec)
    rep = transitions(grid, det)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExpansionWarning)
        xe = xi_large_time(profile, bath, det, tau_eff=tau_eff)
    if bath.beta / tau_eff > 0.5:
        warnings.warn(f"beta/tau_eff = {bath.beta / tau_eff:.3g} is not small", ExpansionWarning, stacklevel=2)
    return ThermometryReport(rep.xi, xe, effective_temperature(bath, tau_eff), kappa(bath.beta * det.omega),
                             entropy_shift(bath, det, tau_eff), tau_eff, bath.temperature)


# ----------------------------------------------------------------------------
# Adiabatic switch-off
# ----------------------------------------------------------------------------


def _q_over_x2(x: np.ndarray) -> np.ndarray:
    """``(1 - x coth x)/x^2`` for ``x >= 0`` (series below 0.05)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 0.05
    x2 = x[small] ** 2
    out[small] = -1 / 3 + x2 * (1 / 45 + x2 * (-2 / 945 + x2 / 4725))
    xl = x[~small]
    out[~small] = (1.0 - xl / np.tanh(xl)) / xl ** 2
    return out


_COTH_SATURATION = 20.0   # coth(x) = 1 to double precision beyond this


@dataclass(frozen=True)
class SwitchOffReport:
    """Residual shift of the level population left by a tanh switch-off.

    ``bracket = i_beta + i_p - zeta_r``; ``delta_p = gbar (1/2 - p_i) bracket``.
    """

    i_beta: float
    i_p: float
    zeta_r: float
    delta_p: float
    asymptotic_rhs: float
    p_initial: float
    p_final: float
    lam: float

    @property
    def bracket(self) -> float:
        return self.i_beta + self.i_p - self.zeta_r

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bracket"] = self.bracket
        return d


def _cosine_transform(g, upper: float, omega: float, spec: QuadratureSpec) -> float:
    """``int_0^upper g(s) cos(omega s) ds`` for smooth ``g`` (QUADPACK QAWO).

    The cosine weight is integrated with modified Clenshaw--Curtis moments,
    so the cost does not grow with the number of oscillations and the
    accuracy is set by ``g`` alone.
    """
    def scalar(s):
        return float(g(np.array([s]))[0])

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, _ = quad(scalar, 0.0, upper, weight="cos", wvar=omega, limit=_quad_limit(spec),
                          epsabs=spec.abs_tol * 1e-2, epsrel=spec.rel_tol * 1e-3)
        except IntegrationWarning as exc:
            raise NonConvergence(f"oscillatory integral on [0, {upper:.6g}]: {exc}", module="observables",
                                 op="switch_off_integrals") from exc
    return val


def _quad_limit(spec: QuadratureSpec) -> int:
    """Subinterval budget handed to QUADPACK."""
    return int(min(spec.max_subdivisions, 10_000))


def switch_off_integrals(lam: float, bath: BathParams, omega: float,
                         spec: QuadratureSpec | None = None) -> tuple[float, float]:
    r"""The thermal and vacuum switch-off integrals.

    .. math::

        I_\beta = \frac{1}{\lambda}\int_0^\infty (\lambda s(1 - \coth\lambda s) + 1)\cos\Omega s\,\Delta G(s)\,ds,\qquad
        I_p = \frac{1}{\lambda}\int_0^\infty (1 - \lambda s\coth\lambda s)\cos\Omega s\,\tilde G^+(s)\,ds

    Beyond ``lam*s = 20`` (``coth = 1``) and many thermal lengths the
    integrands are combinations of ``cos/s`` and ``cos/s^2`` whose tails are
    integrated analytically.
    """
    spec = spec or numerics.DEFAULT_SPEC
    upper = _COTH_SATURATION / lam
    if not bath.is_vacuum:
        upper = max(upper, 8.0 * bath.beta)
    upper = math.pi / omega * math.ceil(upper * omega / math.pi)

    def f_p(s):
        return -lam * _q_over_x2(lam * s) / (2 * PI2)

    # I_p tail: q(x)/(lam s^2) * (-1/(2 pi^2 s^2))... with q = 1 - lam s:
    #   -(1/(2 pi^2)) [cos/(lam s^2) - cos/s]
    i_p = _cosine_transform(f_p, upper, omega, spec)
    i_p += -(numerics.cos_over_s2_tail(omega, upper) / lam - numerics.cos_over_s_tail(omega, upper)) / (2 * PI2)

    if bath.is_vacuum:
        return 0.0, float(i_p)

    def f_b(s):
        x = lam * s
        # (x + 1 - x coth x)/lam = s + s*x*q/x^2
        kern = s + s * x * _q_over_x2(x)
        return kern * tilde_g_difference(s, bath)

    i_b = _cosine_transform(f_b, upper, omega, spec)
    i_b += numerics.cos_over_s2_tail(omega, upper) / (2 * PI2 * lam)
    return float(i_b), float(i_p)


def adiabatic_switch_off_limit(bath: BathParams, det: DetectorParams,
                               spec: QuadratureSpec | None = None) -> float:
    r"""The :math:`\lambda\to0` limit of ``i_beta + i_p - zeta_r``.

    .. math:: \frac{\mathrm{Ci}(|\Omega|\tau_s)}{2\pi^2} + \frac{1}{2\beta^2\Omega^2}\int_0^\infty
              u\cos u\Big[\Big(\frac{\beta\Omega}{\pi u}\Big)^2 - \mathrm{csch}^2\frac{\pi u}{\beta\Omega}\Big]du

    The bracket is evaluated in its series-subtracted form as a cosine
    transform in ``x = pi u/(beta Omega)``; beyond ``x = 20`` only the
    ``cos/x`` tail remains, integrated as ``-Ci``.  For large ``beta Omega``
    the thermal part approaches ``-1/(6 beta^2 Omega^2)``.
    """
    spec = spec or numerics.DEFAULT_SPEC
    ci_term = numerics.cosine_integral(det.omega * det.tau_s) / (2 * PI2)
    if bath.is_vacuum:
        return ci_term
    a = bath.beta * det.omega / math.pi
    # in x = u/a the bracket is a fixed function and a is the frequency
    x_max = 20.0

    def f(x):
        return x * _one_over_x2_minus_csch2(x)

    integral = a * a * (_cosine_transform(f, x_max, a, spec) + numerics.cos_over_s_tail(a, x_max))
    return ci_term + integral / (2 * bath.beta ** 2 * det.omega ** 2)


def switch_off_shift(lam: float, bath: BathParams, det: DetectorParams, p_initial: float | None = None,
                     spec: QuadratureSpec | None = None) -> SwitchOffReport:
    r"""Population shift produced by the switch-off ``chi = (1 - tanh(lam tau))/2`` started at :math:`-\infty`.

    .. math:: p_f = p_i + \bar g\,(\tfrac12 - p_i)\,[I_\beta + I_p - \zeta^{(r)}]

    at leading order.  ``p_initial`` defaults to the thermal occupation.

    Raises
    ------
    AbruptLimitGuard
        If ``lam * tau_s > 1`` (switching faster than the recovery time).
    """
    if not lam > 0:
        raise DomainError("lam must be positive", module="observables", op="switch_off_shift")
    if lam * det.tau_s > 1:
        raise AbruptLimitGuard(f"lam*tau_s = {lam * det.tau_s:g} > 1", module="observables",
                               op="switch_off_shift")
    p_i = thermal_occupation(bath.beta, det.omega) if p_initial is None else float(p_initial)
    if not 0 <= p_i <= 1:
        raise DomainError("p_initial must lie in [0, 1]", module="observables", op="switch_off_shift")
    i_b, i_p = switch_off_integrals(lam, bath, det.omega, spec)
    zeta = zeta_renormalized(det.omega, det.tau_s)
    bracket = i_b + i_p - zeta
    delta = det.gbar * (0.5 - p_i) * bracket
    rhs = float(adiabatic_switch_off_limit(bath, det, spec))
    return SwitchOffReport(i_b, i_p, zeta, delta, rhs, p_i, p_i + delta, lam)


# ----------------------------------------------------------------------------
# Multilevel detailed balance
# ----------------------------------------------------------------------------


def multilevel_xi(e_m: float, e_n: float, bath: BathParams) -> float:
    """Ratio of stationary rates ``m -> n`` over ``n -> m`` built from the spectral function.

    Equals ``exp(beta (E_m - E_n))`` by detailed balance.
    """
    if e_m == e_n:
        return 1.0
    return float(spectral_f(e_n - e_m, bath) / spectral_f(e_m - e_n, bath))


# ----------------------------------------------------------------------------
# Zeno regime diagnostic
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ZenoDiagnostic:
    """Raw excitation probabilities of sharp windows at fixed regulator."""

    tau0: np.ndarray
    probability: np.ndarray
    exponent: float
    epsilon: float


def raw_sharp_window_probability(tau0: float, det: DetectorParams, epsilon: float,
                                 bath: BathParams | None = None,
                                 spec: QuadratureSpec | None = None) -> float:
    r"""Unrenormalized excitation probability of a sharp window of length ``tau0``.

    .. math:: P = \bar g\,\tau_0\int_{-\tau_0}^{\tau_0} ds\,(1 - |s|/\tau_0)\,
              \mathrm{Re}\big[e^{-i\Omega s} G^+_\beta(s - i\epsilon)\big]

    i.e. the triangular window autocorrelation against the regulated
    Wightman function.
    """
    bath = BathParams(math.inf if bath is None else bath.beta, epsilon)

    def f(s):
        g = thermal_wightman(s, bath)
        return (1.0 - s / tau0) * np.real(np.exp(-1j * det.omega * s) * g)

    val = numerics.integrate_interval(f, 0.0, tau0, spec, breakpoints=[min(epsilon, tau0 / 2)])
    return det.gbar * tau0 * 2.0 * val


def zeno_guard(profile: SwitchingProfile, det: DetectorParams, epsilon_eff: float, *,
               n_windows: int = 6, shrink: float = 0.5, bath: BathParams | None = None) -> ZenoDiagnostic:
    r"""Scaling exponent :math:`\alpha` of :math:`P \propto \tau_0^\alpha` for shrinking sharp windows.

    Starting from the profile's width (``tau0``; for a tanh window
    ``tau2 - tau1``) the window is shrunk geometrically by ``shrink``
    ``n_windows - 1`` times; the raw probability is computed at fixed
    regulator ``epsilon_eff`` and ``alpha`` is the log-log slope.  For
    ``tau0 << epsilon`` the probability vanishes as
    :math:`\bar g\,\tau_0^2/(4\pi^2\epsilon^2)` (``alpha = 2``).
    """
    if not epsilon_eff > 0:
        raise DomainError("epsilon_eff must be positive", module="observables", op="zeno_guard")
    if profile.kind is ProfileKind.CONSTANT_ON:
        raise DomainError("zeno_guard needs a finite window", module="observables", op="zeno_guard")
    widths = profile.tau0 * shrink ** np.arange(n_windows)
    probs = np.array([raw_sharp_window_probability(w, det, epsilon_eff, bath) for w in widths])
    alpha = float(np.polyfit(np.log(widths), np.log(probs), 1)[0])
    return ZenoDiagnostic(widths, probs, alpha, epsilon_eff)
