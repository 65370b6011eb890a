"""Transform, sensing operator and effective dictionary.

Random draws come from PCG64 (numpy's implementation of O'Neill's
permuted congruential generator) seeded through ``numpy.random.SeedSequence``.
Only the raw 64-bit output stream is consumed; uniforms and normal variates
are derived here with a frozen recipe so fixtures do not depend on numpy's
own sampling routines:

* uniform: ``(raw >> 11) * 2**-53`` in ``[0, 1)``
* normal: Box-Muller on consecutive uniform pairs ``(u1, u2)``, producing
  ``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`` then the matching ``sin`` term.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .linalg import ShapeError, as_matrix, kron, matmul, matmul_nt, read_matrix, write_matrix

__all__ = [
    "RNG_VERSION",
    "MemoryCapError",
    "Dictionary",
    "column_norms",
    "make_rng",
    "uniforms",
    "standard_normals",
    "dct_matrix",
    "gaussian_matrix",
    "build_dictionary",
    "omega_nbytes",
    "build_omega",
    "sample_separable",
    "save_dictionary",
    "load_dictionary",
]

RNG_VERSION = "pcg64-seedseq/box-muller-v1"

DEFAULT_OMEGA_CAP = 1 << 30

_U64 = (1 << 64) - 1


class MemoryCapError(MemoryError):
    def __init__(self, required: int, cap: int):
        super().__init__(
            f"Kronecker dictionary needs {required} bytes, above the cap of {cap} bytes"
        )
        self.required = required
        self.cap = cap


def column_norms(a):
    """l2-norm of every column of ``a``."""
    a = np.asarray(a, dtype=np.float64)
    return np.sqrt(np.einsum("ij,ij->j", a, a))


def make_rng(seed: int, *tags: int) -> np.random.PCG64:
    """Bit generator for ``seed`` (uint64), optionally on a tagged sub-stream."""
    seed = int(seed)
    if not 0 <= seed <= _U64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(int(t) for t in tags)))


def uniforms(bitgen: np.random.PCG64, size: int):
    raw = bitgen.random_raw(size)
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def standard_normals(bitgen: np.random.PCG64, size: int):
    pairs = (size + 1) // 2
    u = uniforms(bitgen, 2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    z = np.empty((pairs, 2))
    z[:, 0] = radius * np.cos(angle)
    z[:, 1] = radius * np.sin(angle)
    return z.reshape(-1)[:size]


def dct_matrix(n: int):
    """Orthonormal DCT-II matrix of order ``n``.

    Entry ``(k, j)`` (0-based) is ``s_k cos(pi (2j+1) k / (2n))`` with
    ``s_0 = sqrt(1/n)`` and ``s_k = sqrt(2/n)`` otherwise. Applied on both
    sides, ``psi @ Z @ psi.T``, it realizes the separable 2D DCT.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"DCT order must be >= 1, got {n}")
    k = np.arange(n, dtype=np.float64)[:, None]
    j = np.arange(n, dtype=np.float64)[None, :]
    psi = np.cos(np.pi * (2.0 * j + 1.0) * k / (2.0 * n))
    psi *= np.sqrt(2.0 / n)
    psi[0, :] = np.sqrt(1.0 / n)
    return psi


def gaussian_matrix(m: int, n: int, seed: int, *tags: int):
    """``m x n`` matrix of i.i.d. standard normals, filled row by row."""
    if m < 1 or n < 1:
        raise ValueError(f"gaussian_matrix needs positive dimensions, got {m}x{n}")
    return standard_normals(make_rng(seed, *tags), m * n).reshape(m, n)


@dataclass(frozen=True)
class Dictionary:
    """Effective dictionary ``A = phi @ psi`` with cached atom norms.

    ``col_norms[i]`` is ``||a_i||`` and ``atom_norms[i, j]`` is
    ``col_norms[i] * col_norms[j]``, the Frobenius norm of the rank-1 atom
    ``outer(a_i, a_j)``. All arrays are read-only.
    """

    A: np.ndarray
    col_norms: np.ndarray = field(repr=False)
    atom_norms: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, a) -> "Dictionary":
        a = as_matrix(a, "A").copy()
        rho = column_norms(a)
        p = np.outer(rho, rho)
        for arr in (a, rho, p):
            arr.setflags(write=False)
        return cls(a, rho, p)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def build_dictionary(phi, psi) -> Dictionary:
    phi = as_matrix(phi, "phi")
    psi = as_matrix(psi, "psi")
    if psi.shape[0] != psi.shape[1] or phi.shape[1] != psi.shape[0]:
        raise ShapeError(
            f"build_dictionary: phi is {phi.shape[0]}x{phi.shape[1]}, "
            f"psi is {psi.shape[0]}x{psi.shape[1]}"
        )
    return Dictionary.from_matrix(matmul(phi, psi))


def omega_nbytes(m: int, n: int) -> int:
    return 8 * m * m * n * n


def build_omega(d: Dictionary, memory_cap: int | None = DEFAULT_OMEGA_CAP):
    """Explicit 1D dictionary ``kron(A, A)`` of shape ``m^2 x n^2``.

    Column ``n*(i-1) + j`` (1-based) is the stretched rank-1 atom
    ``outer(a_i, a_j)``. Costs ``8 m^2 n^2`` bytes; raises
    :class:`MemoryCapError` when that exceeds ``memory_cap``.
    """
    required = omega_nbytes(d.m, d.n)
    if memory_cap is not None and required > memory_cap:
        raise MemoryCapError(required, memory_cap)
    return kron(d.A, d.A)


def sample_separable(d: Dictionary, z):
    """Separable measurement ``Y = A Z A^T`` via two rectangular products."""
    z = as_matrix(z, "Z")
    if z.shape != (d.n, d.n):
        raise ShapeError(f"sample_separable: Z is {z.shape[0]}x{z.shape[1]}, expected {d.n}x{d.n}")
    return matmul_nt(matmul(d.A, z), d.A)


def save_dictionary(path, d: Dictionary) -> None:
    write_matrix(path, d.A)


def load_dictionary(path) -> Dictionary:
    return Dictionary.from_matrix(read_matrix(os.fspath(path)))
