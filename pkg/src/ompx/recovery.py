"""Orthogonal matching pursuit over the Kronecker dictionary and over rank-1 atoms.

``omp1d`` works on the explicit ``m^2 x n^2`` dictionary ``Omega = kron(A, A)``
and the stretched sample ``y``. ``omp2d`` works on ``A`` and the ``m x m``
sample ``Y`` directly, with atoms ``B_ij = outer(a_i, a_j)``; it never builds
anything of size ``m^2 n^2``. Both follow the same selection rule, tie-break
(smallest flat index ``n*(i-1) + j``) and stopping rule, so on the same
instance they select the same atoms and produce the same weights up to
rounding.

Atom identifiers on every public surface are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DegenerateAtomSetError, ShapeError, as_matrix, frobenius_norm, solve_spd
from .sensing import Dictionary

__all__ = [
    "OmpConfig",
    "FlopCounts",
    "OmpResult",
    "project_1d",
    "omp1d",
    "project_2d",
    "NormalSystem2D",
    "build_normal_system_2d",
    "omp2d",
    "flat_index",
    "compare_results",
]


@dataclass(frozen=True)
class OmpConfig:
    k: int
    tol: float = 1e-12

    def __post_init__(self):
        if int(self.k) < 1:
            raise ValueError(f"sparsity level k must be >= 1, got {self.k}")
        if not self.tol >= 0:
            raise ValueError(f"tol must be non-negative, got {self.tol}")


@dataclass
class FlopCounts:
    """Multiply-add counts per phase of one recovery run."""

    project: int = 0
    weights: int = 0
    residual: int = 0

    @property
    def total(self) -> int:
        return self.project + self.weights + self.residual


@dataclass
class OmpResult:
    selected: list
    weights: np.ndarray
    residual_norms: list
    iterations: int
    coefficients: np.ndarray
    flops: FlopCounts = field(default_factory=FlopCounts)
    unusable: list = field(default_factory=list)
    input_norm: float = 0.0


def flat_index(i: int, j: int, n: int) -> int:
    """1-based flat index of atom ``(i, j)``: ``n*(i-1) + j``."""
    return n * (i - 1) + j


def _solve_flops(t: int) -> int:
    # Cholesky factorization plus forward and back substitution.
    return (t * t * t - t) // 6 + t * (t - 1)


def _should_stop(rnorm: float, ynorm: float, tol: float) -> bool:
    return rnorm <= tol * ynorm


def project_1d(omega, r, rho):
    """Normalized projections ``(Omega^T r) / rho``; zero where ``rho == 0``."""
    omega = np.asarray(omega, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    if omega.ndim != 2 or r.shape != (omega.shape[0],) or rho.shape != (omega.shape[1],):
        raise ShapeError(
            f"project_1d: Omega {omega.shape}, r {r.shape}, rho {rho.shape} do not conform"
        )
    return np.divide(omega.T @ r, rho, out=np.zeros(omega.shape[1]), where=rho > 0)


def omp1d(omega, rho, y, cfg: OmpConfig) -> OmpResult:
    """1D-OMP on the explicit Kronecker dictionary.

    Parameters
    ----------
    omega : ndarray of shape (m*m, n*n)
        Dictionary whose columns are the stretched atoms.
    rho : ndarray of shape (n*n,)
        Column norms of ``omega``.
    y : ndarray of shape (m*m,)
        Stretched sample.
    cfg : OmpConfig
        Sparsity level and relative early-stop threshold.

    Returns
    -------
    OmpResult
        ``selected`` holds 1-based flat atom indices and ``coefficients`` is
        the length ``n*n`` reconstruction.

    Raises
    ------
    DegenerateAtomSetError
        If the selected atoms become linearly dependent; ``err.partial``
        holds the result of the completed iterations.
    """
    omega = as_matrix(omega, "Omega")
    mm, nn = omega.shape
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    rho = np.asarray(rho, dtype=np.float64).reshape(-1)
    if y.size != mm or rho.size != nn:
        raise ShapeError(f"omp1d: Omega is {mm}x{nn}, y has {y.size}, rho has {rho.size}")
    k = int(cfg.k)
    if k > nn:
        raise ValueError(f"sparsity level {k} exceeds the {nn} available atoms")

    available = rho > 0
    flops = FlopCounts()
    cols = np.empty((mm, k))
    Q = np.zeros((k, k))
    g = np.zeros(k)
    u = np.empty(0)
    selected: list[int] = []
    norms: list[float] = []
    ynorm = frobenius_norm(y)
    rnorm = ynorm
    r = y

    def result():
        z = np.zeros(nn)
        z[np.asarray(selected, dtype=np.intp) - 1] = u
        return OmpResult(list(selected), u.copy(), list(norms), len(selected), z, flops,
                         [int(x) + 1 for x in np.flatnonzero(rho <= 0)], ynorm)

    for t in range(k):
        if _should_stop(rnorm, ynorm, cfg.tol) or not available.any():
            break
        score = np.abs(project_1d(omega, r, rho))
        flops.project += mm * nn
        score[~available] = -1.0
        best = int(np.argmax(score))
        available[best] = False

        w = omega[:, best]
        cols[:, t] = w
        Q[t, : t + 1] = cols[:, : t + 1].T @ w
        Q[:t, t] = Q[t, :t]
        g[t] = w @ y
        flops.weights += (t + 2) * mm + _solve_flops(t + 1)
        try:
            u_new = solve_spd(Q[: t + 1, : t + 1], g[: t + 1])
        except DegenerateAtomSetError as err:
            err.partial = result()
            raise
        selected.append(best + 1)
        u = u_new

        r = y - cols[:, : t + 1] @ u
        flops.residual += (t + 1) * mm
        rnorm = frobenius_norm(r)
        norms.append(rnorm)

    return result()


def project_2d(d: Dictionary, R):
    """Normalized projections onto all rank-1 atoms: ``(A^T R A) / P``.

    Entry ``(i, j)`` is ``a_i^T R a_j / (||a_i|| ||a_j||)``; zero where the
    atom norm is zero.
    """
    R = as_matrix(R, "R")
    if R.shape != (d.m, d.m):
        raise ShapeError(f"project_2d: R is {R.shape[0]}x{R.shape[1]}, expected {d.m}x{d.m}")
    ar = d.A.T @ R
    return np.divide(ar @ d.A, d.atom_norms, out=np.zeros((d.n, d.n)), where=d.atom_norms > 0)


class NormalSystem2D:
    """Incrementally grown normal equations ``H u = f`` for rank-1 atoms.

    ``H[s, t] = <a_is, a_it> * <a_js, a_jt>`` and ``f[t] = a_it^T Y a_jt``.
    Appending an atom costs ``O(t m + m^2)`` and writes only the new row and
    column, so earlier entries stay bit-identical.
    """

    def __init__(self, d: Dictionary, Y, capacity: int):
        self.A = d.A
        self.Y = Y
        self.n = d.n
        self._rows = np.empty((d.m, capacity))
        self._cols = np.empty((d.m, capacity))
        self._H = np.zeros((capacity, capacity))
        self._f = np.zeros(capacity)
        self.atoms: list[tuple[int, int]] = []

    def __len__(self):
        return len(self.atoms)

    @property
    def H(self):
        t = len(self.atoms)
        return self._H[:t, :t]

    @property
    def f(self):
        return self._f[: len(self.atoms)]

    @property
    def row_atoms(self):
        return self._rows[:, : len(self.atoms)]

    @property
    def col_atoms(self):
        return self._cols[:, : len(self.atoms)]

    def append(self, i: int, j: int) -> int:
        """Add atom ``(i, j)`` (1-based); returns the multiply-add count."""
        if (i, j) in self.atoms:
            raise ValueError(f"atom ({i},{j}) is already in the normal system")
        t = len(self.atoms)
        if t == self._H.shape[0]:
            self._grow()
        m = self.A.shape[0]
        ai = self.A[:, i - 1]
        aj = self.A[:, j - 1]
        self._rows[:, t] = ai
        self._cols[:, t] = aj
        row = (self._rows[:, : t + 1].T @ ai) * (self._cols[:, : t + 1].T @ aj)
        self._H[t, : t + 1] = row
        self._H[:t, t] = row[:t]
        self._f[t] = (ai @ self.Y) @ aj
        self.atoms.append((i, j))
        return (t + 1) * (2 * m + 1) + m * m + m

    def _grow(self):
        cap = max(1, 2 * self._H.shape[0])
        t = len(self.atoms)
        H = np.zeros((cap, cap))
        H[:t, :t] = self._H
        f = np.zeros(cap)
        f[:t] = self._f
        rows = np.empty((self.A.shape[0], cap))
        cols = np.empty((self.A.shape[0], cap))
        rows[:, :t] = self._rows
        cols[:, :t] = self._cols
        self._H, self._f, self._rows, self._cols = H, f, rows, cols


def build_normal_system_2d(d: Dictionary, Y, selected):
    """``(H, f)`` for the 1-based atom list ``selected``."""
    Y = as_matrix(Y, "Y")
    system = NormalSystem2D(d, Y, max(1, len(selected)))
    for i, j in selected:
        system.append(int(i), int(j))
    return system.H.copy(), system.f.copy()


def omp2d(d: Dictionary, Y, cfg: OmpConfig) -> OmpResult:
    """2D-OMP with rank-1 matrix atoms.

    ``selected`` holds 1-based ``(i, j)`` pairs and ``coefficients`` is the
    ``n x n`` reconstruction. Memory use is ``O(mn + n^2)``; see
    :func:`omp1d` for the error contract.
    """
    Y = as_matrix(Y, "Y")
    m, n = d.m, d.n
    if Y.shape != (m, m):
        raise ShapeError(f"omp2d: Y is {Y.shape[0]}x{Y.shape[1]}, expected {m}x{m}")
    k = int(cfg.k)
    if k > n * n:
        raise ValueError(f"sparsity level {k} exceeds the {n * n} available atoms")

    available = d.atom_norms > 0
    flops = FlopCounts()
    system = NormalSystem2D(d, Y, k)
    u = np.empty(0)
    norms: list[float] = []
    ynorm = frobenius_norm(Y)
    rnorm = ynorm
    R = Y

    def result():
        Z = np.zeros((n, n))
        if system.atoms:
            done = len(u)
            idx = np.asarray(system.atoms[:done], dtype=np.intp) - 1
            Z[idx[:, 0], idx[:, 1]] = u
        bad = np.argwhere(d.atom_norms <= 0) + 1
        return OmpResult([tuple(a) for a in system.atoms[: len(u)]], u.copy(), list(norms),
                         len(u), Z, flops, [(int(a), int(b)) for a, b in bad], ynorm)

    for t in range(k):
        if _should_stop(rnorm, ynorm, cfg.tol) or not available.any():
            break
        score = np.abs(project_2d(d, R))
        flops.project += n * m * m + n * m * n
        score[~available] = -1.0
        best = int(np.argmax(score))
        i, j = divmod(best, n)
        available[i, j] = False

        flops.weights += system.append(i + 1, j + 1) + _solve_flops(t + 1)
        try:
            u = solve_spd(system.H, system.f)
        except DegenerateAtomSetError as err:
            err.partial = result()
            raise

        R = Y - (system.row_atoms * u) @ system.col_atoms.T
        flops.residual += (t + 1) * m * m + (t + 1) * m
        rnorm = frobenius_norm(R)
        norms.append(rnorm)

    return result()


def compare_results(res1d: OmpResult, res2d: OmpResult, n: int, rtol: float = 1e-9):
    """Check the 1D/2D equivalence; returns ``(ok, reason)``.

    Selections must match exactly under ``(i, j) -> n*(i-1) + j``. Weights
    are compared elementwise with tolerance ``rtol * max|w|``; residual
    norms with tolerance ``rtol * ||y||``, since a residual that has
    collapsed to rounding level can only agree at that level.
    """
    mapped = [flat_index(i, j, n) for i, j in res2d.selected]
    if list(res1d.selected) != mapped:
        return False, f"selection differs: 1d={list(res1d.selected)} 2d={mapped}"
    for label, a, b, ref in (
        ("weights", res1d.weights, res2d.weights, 0.0),
        ("residual_norms", res1d.residual_norms, res2d.residual_norms,
         max(res1d.input_norm, res2d.input_norm)),
    ):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            return False, f"{label} lengths differ: {a.size} vs {b.size}"
        if a.size == 0:
            continue
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), ref)
        gap = np.abs(a - b)
        bound = rtol * scale
        if np.any(gap > bound):
            worst = int(np.argmax(gap))
            return False, f"{label}[{worst}] differs: {a[worst]!r} vs {b[worst]!r}"
    return True, ""
