"""Exception and warning classes shared by every module.

Numerical failures derive from :class:`NumericalError` (the CLI maps them to
exit code 3); invalid inputs derive from :class:`DomainError`, itself a
``ValueError``.  Every error can carry the module/operation that raised it,
which the CLI copies into its structured error message.
"""

from __future__ import annotations


class UdwError(Exception):
    """Base class for all errors raised by the package."""

    def __init__(self, message: str, *, module: str | None = None, op: str | None = None):
        super().__init__(message)
        self.module = module
        self.op = op


class DomainError(UdwError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericalError(UdwError, ArithmeticError):
    """Base class for failures of a numerical algorithm."""


class NonConvergence(NumericalError):
    """An iterative or adaptive procedure exhausted its budget."""


class NonFinite(NumericalError):
    """A function returned NaN or infinity where a finite value was required."""


class NoSignChange(NumericalError):
    """A root bracket does not contain a sign change."""


class AsymmetricInput(NumericalError):
    """Samples handed to an even-function transform are not even."""


class InterpolationRange(DomainError):
    """A tabulated profile was evaluated outside its table."""


class InfiniteMeasurement(DomainError):
    """The measurement time of the profile is infinite (always-on coupling)."""


class ZeroDerivative(DomainError):
    """The profile has no time dependence, so its effective time is undefined."""


class UnsupportedProfile(DomainError):
    """The requested closed form does not exist for this profile kind."""


class GridTooCoarse(NumericalError):
    """The time grid is too coarse for a stable evolution step."""


class AbruptLimitGuard(DomainError):
    """The switching rate exceeds the inverse recovery time."""


# ----------------------------------------------------------------------------
# Warnings
# ----------------------------------------------------------------------------


class UdwWarning(UserWarning):
    """Base class for warnings emitted by the package."""


class SharpSwitchWarning(UdwWarning):
    """The switching profile varies faster than the recovery time allows."""


class PerturbativityWarning(UdwWarning):
    """A leading-order probability is not small."""


class ExpansionWarning(UdwWarning):
    """A large-time expansion is used outside its small-parameter regime."""


class TruncationWarning(UdwWarning):
    """A direct series would need too many terms; a closed form was used."""


class NegativeSpectralCurvature(UdwWarning):
    """The clamped part of a spectral curvature exceeds the defect threshold."""


class VacuumUnregulated(UdwWarning):
    """Vacuum window integral evaluated without an infrared thermal regulator."""


class ParameterWarning(UdwWarning):
    """Parameters are valid but outside the recommended regime."""
