r"""Finite-time Landauer bound for a two-level detector.

With the detector's occupation written as an effective inverse temperature
``z`` (``p = 1/(1 + e^{z Omega})``) the external work ``delta E`` needed to
move it from ``beta0`` to ``beta*`` in a bath at ``beta`` obeys

.. math:: \beta\,\delta E \ge F_\beta(\beta^*) - F_\beta(\beta_0),\qquad
          F_\beta(z) = \frac{(\beta - z)\Omega}{1 + e^{z\Omega}} - \ln(1 + e^{-z\Omega}).

Internally ``F`` is evaluated in the occupation parameterization

.. math:: F = \beta\Omega\,p - S_d(p),\qquad S_d(p) = -p\ln p - (1-p)\ln(1-p),

which is finite on the closed interval ``p in [0, 1]`` (``z = +inf`` and
``z = -inf``) and convex with its minimum at the thermal occupation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .correlators import thermal_occupation
from .errors import DomainError
from .numerics import RootSpec, find_root
from .observables import binary_entropy, kappa


def _check(beta: float, omega: float):
    if not (omega > 0 and beta > 0 and math.isfinite(beta)):
        raise DomainError("need finite beta > 0 and omega > 0", module="landauer", op="landauer_f")


def occupation(z, omega: float):
    """``p = 1/(1 + exp(z omega))`` with ``z = +-inf`` mapped to 0 and 1."""
    za = np.asarray(z, dtype=float)
    from scipy.special import expit
    out = expit(-za * omega)
    return float(out) if out.ndim == 0 else out


def landauer_f_of_p(p, beta: float, omega: float):
    """``F = beta*omega*p - S_d(p)`` for ``p`` in ``[0, 1]``."""
    _check(beta, omega)
    pa = np.asarray(p, dtype=float)
    if np.any((pa < 0) | (pa > 1)):
        raise DomainError("p must lie in [0, 1]", module="landauer", op="landauer_f")
    out = beta * omega * pa - np.asarray(binary_entropy(pa))
    return float(out) if out.ndim == 0 else out


def landauer_f(z, beta: float, omega: float):
    r"""Free-energy function :math:`F_\beta(z)`; ``z = +inf`` gives 0, ``z = -inf`` gives ``beta*omega``.

    Examples
    --------
    >>> round(landauer_f(0.0, 1.0, 1.0), 5)
    -0.19315
    """
    return landauer_f_of_p(occupation(z, omega), beta, omega)


def work_bound(beta: float, omega: float, p_initial: float, p_final: float) -> float:
    """Lower bound ``F(p_final) - F(p_initial)`` on ``beta * delta E``."""
    return float(landauer_f_of_p(p_final, beta, omega) - landauer_f_of_p(p_initial, beta, omega))


def _reduced_f(y: float, x: float) -> float:
    """``F / p`` as a function of the log-odds ``y = ln(p/(1-p))``; ``x = beta*omega``."""
    # F = (x + y) p - ln(1 + e^y); divided by p = 1/(1 + e^-y)
    if y >= 0:
        return x + y - float(np.logaddexp(0.0, y)) * (1.0 + math.exp(-y))
    # ln(1 + u)(1 + u)/u with u = e^y, without overflowing e^-y
    u = math.exp(y)
    return x + y - (1.0 + u) * (math.log1p(u) / u if u > 0 else 1.0)


def critical_beta_star(beta: float, omega: float, tol: float = 1e-14) -> float:
    r"""Root :math:`\bar\beta^* < \beta` of :math:`F_\beta(\bar\beta^*) = 0`.

    Below this inverse temperature a transition started from the ground
    state (``beta0 = inf``) needs positive work.  Found by bracketed root
    finding on the log-odds ``y = -z Omega`` over ``(-beta Omega, beta Omega + 50)``.

    Raises
    ------
    NoSignChange
        If the bracket does not enclose the root (degenerate parameters).
    """
    _check(beta, omega)
    x = beta * omega
    y = find_root(lambda v: _reduced_f(v, x), RootSpec(-x, x + 50.0, tol=tol))
    return float(-y / omega)


def p_critical(beta: float, omega: float, exact: bool = False) -> float:
    """Critical occupation ``1/(1 + e^{beta omega - 1})``; ``exact=True`` returns ``p(beta_bar_star)``."""
    _check(beta, omega)
    if exact:
        return occupation(critical_beta_star(beta, omega), omega)
    return thermal_occupation(1.0, beta * omega - 1.0)


def tau_eff_critical(beta: float, omega: float) -> float:
    """Minimal free-erasure time ``beta * sqrt(kappa(beta omega)/(2(e - 1)))``."""
    _check(beta, omega)
    return beta * math.sqrt(kappa(beta * omega) / (2.0 * (math.e - 1.0)))


def effective_inverse_temperature(p: float, omega: float) -> float:
    """``z`` with ``occupation(z) = p``; ``+inf`` at 0 and ``-inf`` at 1."""
    if p <= 0:
        return math.inf
    if p >= 1:
        return -math.inf
    return (math.log1p(-p) - math.log(p)) / omega


@dataclass(frozen=True)
class LandauerReport:
    """Bound and critical quantities for one transition (``beta0``/``beta_star`` may be infinite)."""

    beta: float
    omega: float
    beta0: float
    beta_star: float
    bound: float
    beta_bar_star: float
    p_crit: float
    p_crit_exact: float
    tau_eff_crit: float

    def to_dict(self) -> dict:
        return asdict(self)


def landauer_report(beta: float, omega: float, p_initial: float = 0.0,
                    p_final: float | None = None) -> LandauerReport:
    """Assemble a :class:`LandauerReport`; ``p_final`` defaults to the thermal occupation."""
    if p_final is None:
        p_final = thermal_occupation(beta, omega)
    return LandauerReport(beta, omega, effective_inverse_temperature(p_initial, omega),
                          effective_inverse_temperature(p_final, omega),
                          work_bound(beta, omega, p_initial, p_final), critical_beta_star(beta, omega),
                          p_critical(beta, omega), p_critical(beta, omega, exact=True),
                          tau_eff_critical(beta, omega))


@dataclass(frozen=True)
class Quadrant:
    """Signs of heat and entropy change of a detector transition.

    ``heat = omega * (p_final - p_initial)`` is the energy taken up by the
    detector; ``free`` marks transitions whose work bound is non-positive.
    """

    heat: float
    entropy: float
    bound: float
    label: str

    @property
    def free(self) -> bool:
        return self.bound <= 0


def classify_transition(beta: float, omega: float, p_initial: float, p_final: float) -> Quadrant:
    """Classify a transition by the signs of its heat and entropy change.

    Labels: ``"heating"`` (both up), ``"erasure"`` (both down),
    ``"entropy-only"`` (heat down, entropy up) and ``"heat-only"`` (heat up,
    entropy down).  Transitions towards the thermal occupation always have
    a non-positive bound (``F`` is convex with its minimum there).
    """
    dq = omega * (p_final - p_initial)
    ds = float(binary_entropy(p_final) - binary_entropy(p_initial))
    if dq >= 0 and ds >= 0:
        label = "heating"
    elif dq < 0 and ds < 0:
        label = "erasure"
    elif dq < 0:
        label = "entropy-only"
    else:
        label = "heat-only"
    return Quadrant(dq, ds, work_bound(beta, omega, p_initial, p_final), label)
