"""Dense linear-algebra core shared by both recovery paths.

Matrices are ``float64`` numpy arrays in C (row-major) order. The row-major
convention is a hard contract: ``stretch`` maps element ``(i, j)`` (1-based)
of a ``p x q`` matrix to position ``q*(i-1) + j``, which is exactly what makes
``stretch(A @ Z @ A.T) == kron(A, A) @ stretch(Z)``. A column-major flatten
silently breaks the 1D/2D equivalence.
"""

from __future__ import annotations

import io
import os
import sys

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "ShapeError",
    "DegenerateAtomSetError",
    "as_matrix",
    "matmul",
    "matmul_tn",
    "matmul_nt",
    "frobenius_norm",
    "kron",
    "stretch",
    "unstretch",
    "cholesky_factor",
    "solve_spd",
    "format_matrix",
    "parse_matrix",
    "write_matrix",
    "read_matrix",
]

SYMMETRY_RTOL = 1e-10
PIVOT_EPS = 1e-12


class ShapeError(ValueError):
    """Operand shapes do not conform."""


class DegenerateAtomSetError(np.linalg.LinAlgError):
    """The selected atoms are linearly dependent (normal matrix not PD).

    ``partial`` is filled in by the recovery routines with the result
    accumulated up to the failing iteration.
    """

    def __init__(self, msg, pivot_index=None):
        super().__init__(msg)
        self.pivot_index = pivot_index
        self.partial = None


def as_matrix(x, name="matrix"):
    a = np.ascontiguousarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def _check_inner(a_shape, b_shape, inner_a, inner_b, op):
    if inner_a != inner_b:
        raise ShapeError(
            f"{op}: shape mismatch {a_shape[0]}x{a_shape[1]} vs {b_shape[0]}x{b_shape[1]}"
        )


def matmul(a, b):
    """``a @ b`` with a shape check that names both operands."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a2 = a if a.ndim == 2 else a.reshape(1, -1)
    b2 = b if b.ndim == 2 else b.reshape(-1, 1)
    _check_inner(a2.shape, b2.shape, a2.shape[1], b2.shape[0], "matmul")
    return a @ b


def matmul_tn(a, b):
    """``a.T @ b`` without materializing the transpose."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a2 = a if a.ndim == 2 else a.reshape(-1, 1)
    b2 = b if b.ndim == 2 else b.reshape(-1, 1)
    _check_inner(a2.shape, b2.shape, a2.shape[0], b2.shape[0], "matmul_tn")
    return a.T @ b


def matmul_nt(a, b):
    """``a @ b.T`` without materializing the transpose."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a2 = a if a.ndim == 2 else a.reshape(1, -1)
    b2 = b if b.ndim == 2 else b.reshape(1, -1)
    _check_inner(a2.shape, b2.shape, a2.shape[1], b2.shape[1], "matmul_nt")
    return a @ b.T


def frobenius_norm(m) -> float:
    """Square root of the sum of squares; the l2-norm for vectors."""
    v = np.asarray(m, dtype=np.float64).ravel()
    return float(np.sqrt(np.dot(v, v)))


def kron(a, b):
    """Kronecker product of two matrices.

    Element ``[p*s + q, i*t + j]`` of the result is ``a[p, i] * b[q, j]``
    (0-based), so column ``i*t + j`` is ``kron(a[:, i], b[:, j])``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"kron expects matrices, got shapes {a.shape} and {b.shape}")
    (p, q), (s, t) = a.shape, b.shape
    rows, cols = p * s, q * t
    # numpy indexes with intp; reject before allocating
    if rows * cols > np.iinfo(np.intp).max or rows * cols * 8 > sys.maxsize:
        raise OverflowError(f"kron result {rows}x{cols} exceeds the index range")
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(rows, cols)


def stretch(m):
    """Row-major flatten of a ``p x q`` matrix into a length ``p*q`` vector."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"stretch expects a matrix, got shape {a.shape}")
    return np.ascontiguousarray(a).reshape(-1).copy()


def unstretch(v, p: int, q: int):
    """Inverse of :func:`stretch`."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size != p * q:
        raise ShapeError(f"unstretch: vector of length {v.size} cannot fill {p}x{q}")
    return v.reshape(p, q).copy()


def cholesky_factor(h, eps: float = PIVOT_EPS):
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    ``h`` is symmetrized as ``(h + h.T) / 2`` first. A pivot at or below
    ``eps * trace(h) / t`` raises :class:`DegenerateAtomSetError`.
    """
    h = as_matrix(h, "H")
    t = h.shape[0]
    if h.shape != (t, t):
        raise ShapeError(f"solve_spd: H must be square, got {t}x{h.shape[1]}")
    asym = np.max(np.abs(h - h.T)) if t else 0.0
    scale = np.max(np.abs(h)) if t else 0.0
    if asym > SYMMETRY_RTOL * scale:
        raise ValueError(f"solve_spd: H is not symmetric (max asymmetry {asym:.3e})")
    h = 0.5 * (h + h.T)
    floor = eps * np.trace(h) / t if t else 0.0

    # Plain right-looking factorization; t stays small (<= k) in recovery.
    L = np.zeros_like(h)
    for j in range(t):
        pivot = h[j, j] - np.dot(L[j, :j], L[j, :j])
        if not pivot > floor:
            raise DegenerateAtomSetError(
                f"degenerate atom set: pivot {pivot:.3e} at position {j + 1} "
                f"is not above {floor:.3e}",
                pivot_index=j + 1,
            )
        d = np.sqrt(pivot)
        L[j, j] = d
        if j + 1 < t:
            L[j + 1:, j] = (h[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / d
    return L


def solve_spd(h, f, eps: float = PIVOT_EPS):
    """Solve ``h @ u = f`` for symmetric positive-definite ``h`` via Cholesky."""
    f = np.asarray(f, dtype=np.float64)
    h = as_matrix(h, "H")
    if f.ndim != 1 or f.size != h.shape[0]:
        raise ShapeError(f"solve_spd: H is {h.shape[0]}x{h.shape[1]} but f has length {f.size}")
    L = cholesky_factor(h, eps)
    w = solve_triangular(L, f, lower=True, check_finite=False)
    return solve_triangular(L, w, lower=True, trans="T", check_finite=False)


# Textual matrix format: "p q" header, then p rows of q values at 17
# significant digits so doubles round-trip exactly.

def format_matrix(m) -> str:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    buf = io.StringIO()
    buf.write(f"{a.shape[0]} {a.shape[1]}\n")
    for row in a:
        buf.write(" ".join(f"{x:.17g}" for x in row))
        buf.write("\n")
    return buf.getvalue()


def parse_matrix(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    try:
        p, q = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad matrix header {lines[0]!r}") from exc
    if len(lines) - 1 != p:
        raise ShapeError(f"matrix header says {p} rows, found {len(lines) - 1}")
    out = np.empty((p, q), dtype=np.float64)
    for i, ln in enumerate(lines[1:]):
        vals = ln.split()
        if len(vals) != q:
            raise ShapeError(f"row {i + 1} has {len(vals)} entries, expected {q}")
        out[i] = [float(v) for v in vals]
    return out


def write_matrix(path, m) -> None:
    with open(os.fspath(path), "w", encoding="ascii") as fh:
        fh.write(format_matrix(m))


def read_matrix(path):
    with open(os.fspath(path), encoding="ascii") as fh:
        return parse_matrix(fh.read())
