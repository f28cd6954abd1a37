"""Exception types raised by :mod:`sogeom`."""


class SingularCouplingError(ValueError):
    """Raised for ``g = 0``, where the field decouples from the atom."""

    def __init__(self, msg="g = 0 is the singular decoupling point"):
        super().__init__(msg)


class UndefinedPhaseError(ValueError):
    """The argument of a vanishing complex number was requested."""


class RefinementRequired(RuntimeError):
    """Adjacent states along a discretized loop are too far apart."""


class LoopTooCloseError(ValueError):
    """A parameter-plane loop passes too close to a nodal point."""


class NumericalDiagnosticError(RuntimeError):
    """Adaptive refinement did not converge."""
