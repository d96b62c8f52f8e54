"""Two-point functions of a massless scalar along a static world-line.

The thermal Wightman function is used in its closed ``sinh^-2`` form (the
KMS image sum resummed).  Renormalized expressions only ever need the
symmetrized combinations at zero regulator, for which the thermal minus
vacuum difference is regular at ``s = 0``.

Units: natural, ``hbar = c = k_B = 1``; ``beta`` and ``s`` in time units,
frequencies in inverse time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterWarning

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
PI2 = math.pi ** 2


@dataclass(frozen=True)
class BathParams:
    """Thermal bath.

    Parameters
    ----------
    beta : float
        Inverse temperature; ``math.inf`` for the vacuum.
    epsilon : float
        UV regulator of the raw Wightman function (default 0).
    """

    beta: float = math.inf
    epsilon: float = 0.0

    def __post_init__(self):
        if not (self.beta > 0):
            raise DomainError("beta must be positive or inf", module="correlators", op="BathParams")
        if not (self.epsilon >= 0):
            raise DomainError("epsilon must be >= 0", module="correlators", op="BathParams")

    @property
    def is_vacuum(self) -> bool:
        return math.isinf(self.beta)

    @property
    def temperature(self) -> float:
        return 0.0 if self.is_vacuum else 1.0 / self.beta


@dataclass(frozen=True)
class DetectorParams:
    """Two-level detector.

    Parameters
    ----------
    omega : float
        Level gap.
    gbar : float
        Coupling strength (coupling squared times the monopole matrix element squared).
    tau_s : float
        Recovery time, the renormalization scale of the finite-time scheme.
    """

    omega: float = 1.0
    gbar: float = 1.0
    tau_s: float = 0.1

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError("omega must be positive", module="correlators", op="DetectorParams")
        if not self.gbar >= 0:
            raise DomainError("gbar must be >= 0", module="correlators", op="DetectorParams")
        if not self.tau_s > 0:
            raise DomainError("tau_s must be positive", module="correlators", op="DetectorParams")
        if self.omega * self.tau_s >= 1:
            import warnings
            warnings.warn(f"omega*tau_s = {self.omega * self.tau_s:g} >= 1: recovery time is not "
                          "short compared to the level period", ParameterWarning, stacklevel=3)


def thermal_wightman(s, bath: BathParams):
    r"""Raw Wightman function :math:`G^+_\beta(s - i\epsilon)`.

    .. math:: G^+_\beta(s) = -\frac{1}{4\beta^2}\,\sinh^{-2}\frac{\pi(s - i\epsilon)}{\beta},

    reducing to :math:`-1/(4\pi^2 (s - i\epsilon)^2)` in the vacuum.

    Parameters
    ----------
    s : float or array_like
        Proper-time separation.
    bath : BathParams

    Returns
    -------
    complex or ndarray of complex

    Raises
    ------
    DomainError
        If ``s == 0`` and ``bath.epsilon == 0``.
    """
    s_arr = np.asarray(s, dtype=float)
    if bath.epsilon == 0 and np.any(s_arr == 0):
        raise DomainError("Wightman function is singular at s=0 without a regulator",
                          module="correlators", op="thermal_wightman")
    z = s_arr - 1j * bath.epsilon
    if bath.is_vacuum:
        out = -1.0 / (4 * PI2 * z * z)
    else:
        # csch^2 is even: evaluate 4 e^{-2w}/(1 - e^{-2w})^2 with Re w >= 0 (no overflow)
        w = math.pi * z / bath.beta
        w = np.where(w.real < 0, -w, w)
        e = np.exp(-2.0 * w)
        out = -e / (bath.beta ** 2 * (1.0 - e) ** 2)
    return out[()] if out.ndim == 0 else out


def tilde_g_vacuum(s, epsilon: float = 0.0):
    r"""Symmetrized vacuum function :math:`\tilde G^+(s) = -\frac{1}{4\pi^2}[(s-i\epsilon)^{-2} + (s+i\epsilon)^{-2}]`.

    At ``epsilon = 0`` this is :math:`-1/(2\pi^2 s^2)`.
    """
    s_arr = np.asarray(s, dtype=float)
    if epsilon == 0 and np.any(s_arr == 0):
        raise DomainError("vacuum function is singular at s=0 without a regulator",
                          module="correlators", op="tilde_g_vacuum")
    out = -(s_arr ** 2 - epsilon ** 2) / (2 * PI2 * (s_arr ** 2 + epsilon ** 2) ** 2)
    return out[()] if out.ndim == 0 else out


def tilde_g_thermal(s, bath: BathParams):
    r"""Symmetrized thermal function :math:`\tilde G^+_\beta(s)`, real by construction.

    .. math:: \tilde G^+_\beta(s) = -\frac{1}{4\beta^2}\Big[\sinh^{-2}\frac{\pi(s-i\epsilon)}{\beta}
              + \sinh^{-2}\frac{\pi(s+i\epsilon)}{\beta}\Big]
    """
    if bath.is_vacuum:
        return tilde_g_vacuum(s, bath.epsilon)
    g = thermal_wightman(s, bath)
    out = 2.0 * np.real(g)
    return out[()] if np.ndim(out) == 0 else out


def _one_over_x2_minus_csch2(x: np.ndarray) -> np.ndarray:
    """``1/x**2 - 1/sinh(x)**2`` for ``x >= 0``, series-subtracted near 0."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < 0.1
    xs2 = x[small] ** 2
    # 1/x^2 - csch^2 x = 1/3 - x^2/15 + 2x^4/189 - x^6/675 + 2x^8/10395
    out[small] = 1 / 3 + xs2 * (-1 / 15 + xs2 * (2 / 189 + xs2 * (-1 / 675 + xs2 * 2 / 10395)))
    xl = x[~small]
    e = np.exp(-2 * xl)
    out[~small] = 1.0 / xl ** 2 - 4 * e / (1 - e) ** 2
    return out


def tilde_g_difference(s, bath: BathParams):
    r"""Regular thermal-minus-vacuum difference :math:`\tilde G^+_\beta - \tilde G^+` at zero regulator.

    .. math:: \Delta G(s) = \frac{1}{2\beta^2}\Big(\frac{1}{x^2} - \mathrm{csch}^2 x\Big),\qquad x = \pi s/\beta,

    with :math:`\Delta G(0) = 1/(6\beta^2)`; identically zero in the vacuum.
    """
    s_arr = np.asarray(s, dtype=float)
    if bath.is_vacuum:
        out = np.zeros_like(s_arr)
    else:
        out = _one_over_x2_minus_csch2(math.pi * s_arr / bath.beta) / (2 * bath.beta ** 2)
    return out[()] if out.ndim == 0 else out


def spectral_f(omega_arg, bath: BathParams, epsilon: float = 0.0, *, return_flag: bool = False):
    r"""Spectral function :math:`F_\beta(\Omega) = \frac{\Omega}{2\pi}\frac{e^{\epsilon\Omega}}{e^{\beta\Omega} - 1}`.

    In the vacuum :math:`F_\infty(\Omega) = -\Theta(-\Omega)\,\Omega/2\pi`.
    At ``omega_arg == 0`` with finite ``beta`` the analytic limit
    ``1/(2 pi beta)`` is returned and flagged (logged; and returned when
    ``return_flag`` is set).

    Parameters
    ----------
    omega_arg : float or array_like
        Frequency of either sign.
    bath : BathParams
    epsilon : float
        Regulator (default 0).
    return_flag : bool
        Also return whether the ``Omega = 0`` limit was used.

    Returns
    -------
    float or ndarray (and bool when ``return_flag``)

    Raises
    ------
    DomainError
        ``omega_arg == 0`` in the vacuum.
    """
    w = np.asarray(omega_arg, dtype=float)
    at_zero = w == 0
    flagged = bool(np.any(at_zero))
    if bath.is_vacuum:
        if flagged:
            raise DomainError("vacuum spectral function is undefined at Omega=0",
                              module="correlators", op="spectral_f")
        out = np.where(w < 0, -w / TWO_PI, 0.0) * np.exp(epsilon * w)
    else:
        x = bath.beta * w
        safe = np.where(at_zero, 1.0, x)
        # x/(e^x - 1) written with expm1 for accuracy at small |x|
        ratio = np.where(safe > 700, safe * np.exp(-np.maximum(safe, 700.0)),
                         safe / np.expm1(np.minimum(safe, 700.0)))
        out = ratio / (TWO_PI * bath.beta) * np.exp(epsilon * w)
        out = np.where(at_zero, 1.0 / (TWO_PI * bath.beta), out)
        if flagged:
            logger.info("spectral_f evaluated at Omega=0: returned the analytic limit 1/(2 pi beta)")
    out = out[()] if out.ndim == 0 else out
    if return_flag:
        return out, flagged
    return out


def spectral_sum(omega, bath: BathParams):
    r""":math:`F_\beta(\Omega) + F_\beta(-\Omega) = \frac{\Omega}{2\pi}\coth(\beta\Omega/2)`, even in :math:`\Omega`."""
    w = np.abs(np.asarray(omega, dtype=float))
    if bath.is_vacuum:
        out = w / TWO_PI
    else:
        x = 0.5 * bath.beta * w
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x == 0, 1.0 / (math.pi * bath.beta), w / (TWO_PI * np.tanh(np.where(x == 0, 1.0, x))))
    return out[()] if out.ndim == 0 else out


def thermal_occupation(beta: float, omega: float) -> float:
    """Equilibrium excited-state probability ``1/(1 + exp(beta*omega))``."""
    if math.isinf(beta):
        return 0.0
    x = beta * omega
    if x > 0:
        e = math.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(x))
