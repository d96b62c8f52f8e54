r"""Ultrarelativistic detector in a thermal photon bath.

A particle of rest mass ``m`` and lab energy ``E`` (``gamma = E/m``) moving
through a bath at temperature ``T`` is treated as a detector with discrete
resonance levels ``(gbar_n, Omega_n)``.  At leading order with a
long interaction time ``t_m``

.. math:: p = t_m\sum_n \frac{\bar g_n}{4\pi}\sum_{l\ge1}\frac{1}{\gamma^2\beta l}
          \,e^{-\beta l\Omega_n/(2\gamma)},

whose inner sum is :math:`-\ln(1 - e^{-a})/(\gamma^2\beta)`,
:math:`a = \beta\Omega_n/(2\gamma)`.  The probability becomes appreciable
once ``gamma k_B T`` approaches ``Omega/4``, which sets the critical energy.

Inputs are in eV, Kelvin, seconds and Mpc; the core works in natural units
(energies in eV, times in 1/eV).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterWarning, TruncationWarning

K_B_EV_PER_K = 8.617333262e-5
HBAR_EV_S = 6.582119569e-16
C_M_PER_S = 2.99792458e8
MPC_M = 3.0857e22
MEV = 1.0e6

MAX_TERMS = 1_000_000


def kelvin_to_ev(t_kelvin: float) -> float:
    return t_kelvin * K_B_EV_PER_K


def ev_to_kelvin(e_ev: float) -> float:
    return e_ev / K_B_EV_PER_K


def seconds_to_inverse_ev(t_s: float) -> float:
    return t_s / HBAR_EV_S


def inverse_ev_to_seconds(t: float) -> float:
    return t * HBAR_EV_S


def mpc_to_m(l_mpc: float) -> float:
    return l_mpc * MPC_M


def m_to_mpc(l_m: float) -> float:
    return l_m / MPC_M


@dataclass(frozen=True)
class ResonanceLevel:
    """Excited level with coupling weight ``gbar_n`` and gap ``omega_n`` (eV)."""

    gbar_n: float
    omega_n: float

    def __post_init__(self):
        if not self.omega_n > 0:
            raise DomainError("omega_n must be positive", module="gzk", op="ResonanceLevel")
        if not self.gbar_n >= 0:
            raise DomainError("gbar_n must be >= 0", module="gzk", op="ResonanceLevel")


DEFAULT_LEVELS = (ResonanceLevel(1.0, 145.0 * MEV),)


@dataclass(frozen=True)
class GzkScenario:
    """Boosted detector in a thermal bath.

    Parameters
    ----------
    mass : float
        Rest mass (eV).
    energy : float
        Lab energy (eV).
    temperature : float
        Bath temperature (K).
    levels : tuple of ResonanceLevel
    t_m : float, optional
        Interaction time (s).  Exactly one of ``t_m`` and ``l_m`` is needed
        for :func:`excitation_probability`.
    l_m : float, optional
        Path length (Mpc); converted with ``t_m = l_m / v``.
    """

    mass: float
    energy: float
    temperature: float
    levels: tuple = field(default=DEFAULT_LEVELS)
    t_m: float | None = None
    l_m: float | None = None

    def __post_init__(self):
        if not (self.mass > 0 and self.energy > 0 and self.temperature > 0):
            raise DomainError("mass, energy and temperature must be positive", module="gzk", op="GzkScenario")
        if self.energy < self.mass:
            raise DomainError("energy below rest mass", module="gzk", op="GzkScenario")
        if self.t_m is not None and self.l_m is not None:
            raise DomainError("give either t_m or l_m, not both", module="gzk", op="GzkScenario")
        object.__setattr__(self, "levels", tuple(self.levels))
        if self.gamma < 10:
            warnings.warn(f"gamma = {self.gamma:.3g} is not ultrarelativistic", ParameterWarning, stacklevel=2)

    @property
    def gamma(self) -> float:
        return self.energy / self.mass

    @property
    def velocity(self) -> float:
        """Speed in m/s."""
        g = self.gamma
        return C_M_PER_S * math.sqrt(-math.expm1(-2.0 * math.log(g)))

    @property
    def e_thr(self) -> float:
        """Lowest level gap (eV)."""
        return min(level.omega_n for level in self.levels)

    @property
    def beta(self) -> float:
        """Inverse temperature in 1/eV."""
        return 1.0 / kelvin_to_ev(self.temperature)

    def interaction_time(self) -> float:
        """Interaction time in seconds."""
        if self.t_m is not None:
            return self.t_m
        if self.l_m is not None:
            return mpc_to_m(self.l_m) / self.velocity
        raise DomainError("scenario has neither t_m nor l_m", module="gzk", op="interaction_time")


def level_sum(a: float, abs_tol: float = 1e-17) -> float:
    r""":math:`\sum_{l\ge1} e^{-a l}/l` by direct summation.

    Terms are added until they fall below ``abs_tol`` times the running sum;
    if that needs more than a million terms the closed form
    :math:`-\ln(1 - e^{-a})` is returned with a :class:`TruncationWarning`.
    """
    if not a > 0:
        raise DomainError("a must be positive", module="gzk", op="level_sum")
    needed = math.log(1.0 / abs_tol) / a
    if needed > MAX_TERMS:
        warnings.warn(f"level sum needs ~{needed:.3g} terms; using the closed form", TruncationWarning,
                      stacklevel=2)
        return level_sum_closed(a)
    n = int(math.ceil(needed)) + 1
    l = np.arange(1, n + 1, dtype=float)
    terms = np.exp(-a * l) / l
    # add the smallest terms first
    return float(math.fsum(terms[::-1]))


def level_sum_closed(a: float) -> float:
    r""":math:`-\ln(1 - e^{-a})`."""
    return -math.log(-math.expm1(-a))


def rate(scenario: GzkScenario) -> float:
    """Excitation probability per unit interaction time (1/s)."""
    g = scenario.gamma
    beta = scenario.beta
    total = 0.0
    for level in scenario.levels:
        if level.gbar_n == 0:
            continue
        a = beta * level.omega_n / (2.0 * g)
        total += level.gbar_n / (4.0 * math.pi) * level_sum(a) / (g * g * beta)
    return total / HBAR_EV_S


def excitation_probability(scenario: GzkScenario) -> float:
    """Leading-order excitation probability accumulated over the interaction time."""
    return rate(scenario) * scenario.interaction_time()


def critical_gamma(e_thr: float, temperature: float) -> float:
    """``E_thr / (4 k_B T)`` (``e_thr`` in eV, ``temperature`` in K)."""
    if not (e_thr > 0 and temperature > 0):
        raise DomainError("e_thr and temperature must be positive", module="gzk", op="critical_gamma")
    return e_thr / (4.0 * kelvin_to_ev(temperature))


def critical_energy(mass: float, e_thr: float, temperature: float) -> float:
    """Lab energy (eV) at which ``gamma k_B T = E_thr / 4``."""
    if not mass > 0:
        raise DomainError("mass must be positive", module="gzk", op="critical_energy")
    return critical_gamma(e_thr, temperature) * mass


def horizon_length(scenario: GzkScenario, p_target: float) -> float:
    """Path length (Mpc) over which the leading-order probability reaches ``p_target``."""
    if not 0 < p_target < 1:
        raise DomainError("p_target must lie in (0, 1)", module="gzk", op="horizon_length")
    t = p_target / rate(scenario)
    return m_to_mpc(t * scenario.velocity)
