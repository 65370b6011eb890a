"""Sparse 2D coefficient matrices and full problem instances."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import ShapeError, read_matrix, write_matrix
from .sensing import (
    DEFAULT_OMEGA_CAP,
    Dictionary,
    build_dictionary,
    build_omega,
    dct_matrix,
    gaussian_matrix,
    make_rng,
    sample_separable,
    standard_normals,
)

__all__ = [
    "SparseSignal2D",
    "Instance",
    "derive_seed",
    "sparse_signal",
    "make_instance",
    "save_instance",
    "load_instance",
]

# Sub-stream tags for the independent draws of one instance.
TAG_PHI = 0x9E3779B9
TAG_SIGNAL = 0x85EBCA6B


@dataclass(frozen=True)
class SparseSignal2D:
    """Exactly ``k`` spikes on an ``n x n`` grid, 1-based coordinates."""

    n: int
    spikes: tuple  # of (row, col, value)

    def __post_init__(self):
        seen = set()
        for row, col, val in self.spikes:
            if not (1 <= row <= self.n and 1 <= col <= self.n):
                raise ValueError(f"spike ({row},{col}) outside a {self.n}x{self.n} grid")
            if (row, col) in seen:
                raise ValueError(f"duplicate spike position ({row},{col})")
            if val == 0.0 or not np.isfinite(val):
                raise ValueError(f"spike value at ({row},{col}) must be nonzero and finite")
            seen.add((row, col))

    @property
    def k(self) -> int:
        return len(self.spikes)

    def dense(self):
        z = np.zeros((self.n, self.n))
        for row, col, val in self.spikes:
            z[row - 1, col - 1] = val
        return z

    def support(self) -> set:
        return {(row, col) for row, col, _ in self.spikes}


@dataclass(frozen=True)
class Instance:
    dictionary: Dictionary
    z_true: SparseSignal2D
    Y: np.ndarray
    config: dict
    omega: np.ndarray | None = field(default=None, repr=False)

    @property
    def y(self):
        return self.Y.reshape(-1)


def derive_seed(seed: int, *parts: int) -> int:
    """Deterministic 64-bit sub-seed of ``seed`` keyed by integer ``parts``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in parts))
    return int(ss.generate_state(1, np.uint64)[0])


def _bounded(bitgen, bound: int) -> int:
    # Rejection sampling on raw 64-bit words; unbiased for any bound.
    limit = (1 << 64) - ((1 << 64) % bound)
    while True:
        r = int(bitgen.random_raw())
        if r < limit:
            return r % bound


def sparse_signal(n: int, k: int, seed: int, *tags: int) -> SparseSignal2D:
    """``k`` distinct positions drawn uniformly without replacement, N(0,1) values.

    Positions come from a partial Fisher-Yates shuffle of the ``n*n`` flat
    (row-major) indices; values are redrawn if a draw is exactly zero.
    """
    if n < 1:
        raise ValueError(f"grid side must be >= 1, got {n}")
    if not 0 <= k <= n * n:
        raise ValueError(f"sparsity k={k} outside [0, {n * n}]")
    bitgen = make_rng(seed, *tags)
    pool = list(range(n * n))
    picks = []
    for t in range(k):
        s = t + _bounded(bitgen, n * n - t)
        pool[t], pool[s] = pool[s], pool[t]
        picks.append(pool[t])
    spikes = []
    for flat in picks:
        val = 0.0
        while val == 0.0:
            val = float(standard_normals(bitgen, 1)[0])
        spikes.append((flat // n + 1, flat % n + 1, val))
    return SparseSignal2D(n, tuple(spikes))


def make_instance(n, m, k, seed, with_omega=False, *, psi=None, phi=None,
                  memory_cap=DEFAULT_OMEGA_CAP) -> Instance:
    """Assemble ``(A, Z, Y[, Omega])`` for one trial.

    ``psi`` and ``phi`` are fixture hooks that replace the DCT transform and
    the Gaussian sensing matrix; the CLI never passes them.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if psi is None:
        psi = dct_matrix(n)
    if phi is None:
        phi = gaussian_matrix(m, n, seed, TAG_PHI)
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (m, n):
        raise ShapeError(f"phi override is {phi.shape}, expected ({m}, {n})")
    d = build_dictionary(phi, psi)
    z = sparse_signal(n, k, seed, TAG_SIGNAL)
    Y = sample_separable(d, z.dense())
    Y.setflags(write=False)
    omega = build_omega(d, memory_cap) if with_omega else None
    cfg = {"n": n, "m": m, "k": k, "seed": int(seed)}
    return Instance(d, z, Y, cfg, omega)


def save_instance(path, inst: Instance) -> Path:
    """Write ``config.txt``, ``A.txt``, ``Y.txt`` and ``spikes.csv`` under ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.txt", "w", encoding="ascii") as fh:
        for key in ("n", "m", "k", "seed"):
            fh.write(f"{key}={inst.config[key]}\n")
    write_matrix(out / "A.txt", inst.dictionary.A)
    write_matrix(out / "Y.txt", inst.Y)
    with open(out / "spikes.csv", "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh)
        for row, col, val in inst.z_true.spikes:
            w.writerow([row, col, f"{val:.17g}"])
    return out


def load_instance(path) -> Instance:
    src = Path(os.fspath(path))
    cfg = {}
    for line in (src / "config.txt").read_text(encoding="ascii").splitlines():
        if line.strip():
            key, _, val = line.partition("=")
            cfg[key.strip()] = int(val)
    d = Dictionary.from_matrix(read_matrix(src / "A.txt"))
    Y = read_matrix(src / "Y.txt")
    with open(src / "spikes.csv", newline="", encoding="ascii") as fh:
        spikes = tuple((int(r), int(c), float(v)) for r, c, v in csv.reader(fh))
    return Instance(d, SparseSignal2D(cfg["n"], spikes), Y, cfg)
