"""Numerical verification of moment maps, reduction, root systems and
Poisson transversals on model phase spaces."""

from . import actions, lie, linalg, phase_space, reduction, roots, transversal
from .errors import MomentaError

__version__ = "0.1.0"

__all__ = ["actions", "lie", "linalg", "phase_space", "reduction", "roots", "transversal", "MomentaError"]
