from ._backend import BACKEND
from .geometry import chordal
from .linalg import LabeledMatrix, RankResult, fit_in_basis, rank_and_kernel
from .poly import Poly
from .roots import Root, roots_with_multiplicity
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "BACKEND",
    "DEFAULT",
    "LabeledMatrix",
    "Poly",
    "RankResult",
    "Root",
    "Tolerances",
    "chordal",
    "fit_in_basis",
    "rank_and_kernel",
    "roots_with_multiplicity",
]
