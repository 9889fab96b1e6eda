"""Exception types distinguishing configuration errors from numerical failures."""

from __future__ import annotations


class NumericalFailure(RuntimeError):
    """A numerical procedure failed (eigensolve, quadrature, CFL, blow-up)."""


class QuadratureError(NumericalFailure):
    """Adaptive quadrature failed to reach the requested tolerance."""


class CflViolation(NumericalFailure):
    """Requested time step exceeds the advective stability limit."""


class BlowUpDetected(NumericalFailure):
    """A norm left the trusted range; carries the partial trace if any."""

    def __init__(self, message: str, trace=None, states=None):
        super().__init__(message)
        self.trace = trace
        self.states = states
