"""
Lorenz Attractors - Error types

Path: /lorenz_errors.py
Purpose: Named failures raised by the map, orbit, return-map, renormalization and
         rotation-number operations. Each error carries a details dict with witnesses
         so reports can serialize what went wrong.
"""

from typing import Any, Dict, Optional


class LorenzError(Exception):
    """Base class for all domain errors"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class InvariantViolation(LorenzError):
    """A numerical result contradicts a structural law (CLI exit code 2)"""


class InvalidMapSpec(LorenzError, ValueError):
    pass


class CriticalPointDerivative(LorenzError, ValueError):
    pass


class ValueOutsideBranchImage(LorenzError, ValueError):
    pass


class PreimageTreeEmpty(LorenzError):
    pass


class NoPeriodicOrbitInWindow(LorenzError):
    pass


class NotNiceError(LorenzError, ValueError):
    pass


class HorizonExhausted(LorenzError):
    pass


class NoApproximantFound(LorenzError):
    pass


class NoReturnWithinHorizon(LorenzError):
    pass


class RecordInvalid(InvariantViolation):
    pass


class LinkedIntervalsDetected(InvariantViolation):
    pass


class BranchOverlap(LorenzError):
    pass


class WrongBranchCount(LorenzError, ValueError):
    pass


class OrbitHitGap(LorenzError):
    pass
