"""Exception hierarchy shared by every module."""


class MomentaError(Exception):
    """Base class for all library errors."""


class DimensionError(MomentaError, ValueError):
    pass


class UnsupportedError(MomentaError, NotImplementedError):
    pass


class ConstraintViolation(MomentaError, ValueError):
    """A point does not satisfy the constraints of its space."""


class TangencyError(MomentaError, ValueError):
    pass


class IntegrationFailure(MomentaError, RuntimeError):
    pass


class InvarianceViolation(MomentaError, ValueError):
    """A one-form expected to be invariant under an action is not."""


class SymmetryViolation(MomentaError, ValueError):
    """A Hamiltonian expected to be invariant under an action is not."""


class PreconditionError(MomentaError, ValueError):
    pass


class LevelSetError(MomentaError, ValueError):
    pass


class LiftError(MomentaError, ValueError):
    """The curve handed to the reconstruction is not a lift of a reduced motion."""


class CartanError(MomentaError, ValueError):
    pass


class DecompositionError(MomentaError, RuntimeError):
    pass


class ChamberError(MomentaError, ValueError):
    pass


class SubalgebraError(MomentaError, ValueError):
    pass


class ClassificationError(MomentaError, ValueError):
    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class CrossSectionSetupError(MomentaError, ValueError):
    pass


class ChartError(MomentaError, RuntimeError):
    pass


class ConsistencyError(MomentaError, RuntimeError):
    """Internal disagreement between equivalent linear-algebra tests."""
