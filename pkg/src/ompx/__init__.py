"""2D compressive-sampling recovery: 1D-OMP over ``kron(A, A)`` and 2D-OMP over rank-1 atoms."""

from .linalg import DegenerateAtomSetError, ShapeError
from .recovery import OmpConfig, OmpResult, compare_results, omp1d, omp2d, project_1d, project_2d
from .sensing import Dictionary, MemoryCapError, build_dictionary, build_omega, dct_matrix
from .signalgen import Instance, SparseSignal2D, make_instance, sparse_signal

__version__ = "0.1.0"

__all__ = [
    "DegenerateAtomSetError",
    "ShapeError",
    "OmpConfig",
    "OmpResult",
    "compare_results",
    "omp1d",
    "omp2d",
    "project_1d",
    "project_2d",
    "Dictionary",
    "MemoryCapError",
    "build_dictionary",
    "build_omega",
    "dct_matrix",
    "Instance",
    "SparseSignal2D",
    "make_instance",
    "sparse_signal",
]
