"""Exception types raised by the solvers."""


class CavityArrayError(Exception):
    """Base class for all library errors."""


class PoleAtResonance(CavityArrayError, ZeroDivisionError):
    """Photon energy coincides with the atomic transition (detuning pole)."""


class BandEdge(CavityArrayError, ValueError):
    """Incident mode carries no flux (sin k = 0 or zero hopping)."""


class NotLinear(CavityArrayError, ValueError):
    """Closed-form linear solution requested with a nonzero Kerr coupling."""


class SiteOutOfRange(CavityArrayError, IndexError):
    pass


class DimensionMismatch(CavityArrayError, ValueError):
    pass


class StepUnderflow(CavityArrayError, RuntimeError):
    """Adaptive stepper could not meet the requested tolerance."""


class NonFinite(CavityArrayError, FloatingPointError):
    """Integration produced NaN or Inf.

    ``partial`` holds the trajectory up to the last finite sample, if any.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EigenFailure(CavityArrayError, RuntimeError):
    pass
