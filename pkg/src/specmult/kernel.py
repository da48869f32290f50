"""Integral kernels of invariant operators sampled on a quadrature grid.

The kernel of the operator with symbol ``sigma`` is::

    K(x, y) = sum_l sum_{m,k} sigma(l)_{mk} e_l^m(x) conj(e_l^k(y)),

which on the grid is ``B S B^H`` with ``B`` the basis matrix at the nodes and
``S`` the assembled block-diagonal symbol. Integrals over ``M`` and ``M x M``
use the grid weights, so every identity below is exact for band-limited data.

Binary export layout (little-endian)::

    8 bytes   magic  b"SPMKERN1"
    uint32    number of nodes N
    uint32    coordinate width c (n on the torus, 3 Euler angles on SU(2))
    float64   node coordinates, N * c values, row-major
    float64   weights, N values
    complex128 kernel values, N * N values, row-major K[x, y]
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import linalg
from .fourier import GridFunction
from .manifold import Partition, QuadratureGrid, basis_values
from .symbol import Symbol, assemble, lp_norm

__all__ = [
    "GridKernel",
    "KernelCoefficients",
    "MixedNorm",
    "Ffb2Report",
    "max_kernel_nodes",
    "synthesize",
    "kernel_apply",
    "kernel_coefficients",
    "kernel_trace",
    "mixed_norm",
    "ffb2_check",
    "rank_one_ratio",
    "symbol_bound_from_kernel",
    "export_kernel",
    "read_kernel",
]

MAGIC = b"SPMKERN1"
DEFAULT_MAX_KERNEL_NODES = 4096
FFB2_FLAG = 1e-6


def max_kernel_nodes() -> int:
    raw = os.environ.get("SPECMULT_MAX_KERNEL_NODES")
    if raw is None:
        return DEFAULT_MAX_KERNEL_NODES
    try:
        val = int(raw)
    except ValueError:
        raise ValueError(f"SPECMULT_MAX_KERNEL_NODES must be an integer, got {raw!r}") from None
    if val < 1:
        raise ValueError("SPECMULT_MAX_KERNEL_NODES must be positive")
    return val


@dataclass(frozen=True, eq=False)
class GridKernel:
    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        n = self.grid.size
        if v.shape != (n, n):
            raise ValueError(f"kernel needs shape ({n}, {n}), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("kernel values must be finite")
        object.__setattr__(self, "values", v)

    def transpose(self) -> "GridKernel":
        return GridKernel(self.grid, self.values.T.copy())


@dataclass(frozen=True, eq=False)
class KernelCoefficients:
    """Double Fourier coefficients ``(l, m, l', m') -> int int K conj(e_l^m(x)) e_l'^m'(y)``."""

    partition: Partition
    table: np.ndarray

    def block(self, level: int, other: int | None = None) -> np.ndarray:
        p = self.partition
        return self.table[p.slice(level), p.slice(level if other is None else other)]

    def max_offblock(self) -> float:
        lv = self.partition.level_of
        off = np.abs(self.table[lv[:, None] != lv[None, :]])
        return float(off.max()) if off.size else 0.0

    def symbol(self) -> Symbol:
        return Symbol(self.partition, tuple(self.block(i).copy() for i in range(len(self.partition))))


@dataclass(frozen=True)
class MixedNorm:
    xy: float
    yx: float
    lp1p2: float


@dataclass(frozen=True)
class Ffb2Report:
    p: float
    p_dual: float
    symbol_norm: float
    kernel_norm: float
    ratio: float
    holds: bool
    flagged: bool


def _check_nodes(grid: QuadratureGrid) -> None:
    cap = max_kernel_nodes()
    if grid.size > cap:
        raise ValueError(
            f"kernel on {grid.size} nodes exceeds the cap of {cap} nodes (SPECMULT_MAX_KERNEL_NODES)"
        )


def synthesize(sigma: Symbol, grid: QuadratureGrid) -> GridKernel:
    """Sample ``K(x, y)`` at every node pair."""
    _check_nodes(grid)
    B = grid.basis(sigma.partition)
    return GridKernel(grid, B @ assemble(sigma) @ B.conj().T)


def kernel_apply(K: GridKernel, f: GridFunction) -> GridFunction:
    """``(T f)(x) = int K(x, y) f(y) dy`` by quadrature."""
    if f.grid is not K.grid:
        raise ValueError("function and kernel live on different grids")
    return GridFunction(K.grid, K.values @ (K.grid.weights * f.values))


def kernel_coefficients(K: GridKernel, partition: Partition) -> KernelCoefficients:
    B = K.grid.basis(partition)
    w = K.grid.weights
    table = (B.conj().T * w) @ K.values @ (w[:, None] * B)
    return KernelCoefficients(partition, table)


def kernel_trace(K: GridKernel) -> complex:
    """``int K(x, x) dx`` by quadrature."""
    return complex(np.sum(K.grid.weights * np.diag(K.values)))


def _lp(a: np.ndarray, w: np.ndarray, p: float, axis: int = 0) -> np.ndarray:
    """Weighted ``L^p`` norm of ``a`` along ``axis`` (``w`` indexes that axis)."""
    if math.isinf(p):
        return a.max(axis=axis)
    shape = [1] * a.ndim
    shape[axis] = -1
    return np.sum(w.reshape(shape) * a**p, axis=axis) ** (1.0 / p)


def _check_p(p: float, name: str) -> float:
    p = float(p)
    if not p >= 1:
        raise ValueError(f"{name} must lie in [1, inf], got {p}")
    return p


def mixed_norm(K: GridKernel, p1: float, p2: float) -> MixedNorm:
    """Iterated norms ``||| K ||_{L^p2_y} ||_{L^p1_x}`` and the swapped order.

    ``p = inf`` is the maximum over grid nodes.
    """
    p1, p2 = _check_p(p1, "p1"), _check_p(p2, "p2")
    a = np.abs(K.values)
    w = K.grid.weights
    xy = float(_lp(_lp(a, w, p2, axis=1), w, p1))
    yx = float(_lp(_lp(a, w, p2, axis=0), w, p1))
    return MixedNorm(xy, yx, max(xy, yx))


def _dual(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def ffb2_check(K: GridKernel, partition: Partition, p: float, invariance_tol: float = 1e-9) -> Ffb2Report:
    """Compare ``||sigma_K||_{l^{p'}(Sigma)}`` with ``||K||_{L^{(p', p)}}`` for ``1 <= p <= 2``.

    The inequality with constant 1 holds exactly at ``p = 1`` (Schur test)
    and ``p = 2`` (Plancherel, equality). In between a ratio above
    ``1 + 1e-6`` is reported as ``flagged`` rather than treated as an error.
    """
    p = float(p)
    if not 1 <= p <= 2:
        raise ValueError(f"p must lie in [1, 2], got {p}")
    coeffs = kernel_coefficients(K, partition)
    off = coeffs.max_offblock()
    if not off < invariance_tol:
        raise ValueError(f"kernel is not invariant: off-block coefficient {off:.3e} >= {invariance_tol:g}")
    q = _dual(p)
    lhs = lp_norm(coeffs.symbol(), q)
    rhs = mixed_norm(K, q, p).lp1p2
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    holds = ratio <= 1.0 + 1e-12
    return Ffb2Report(p, q, lhs, rhs, ratio, holds, ratio > 1.0 + FFB2_FLAG)


def rank_one_ratio(partition: Partition, level: int, x, y) -> float:
    """``s_1 / s_2`` of ``Q_l(x, y) = conj(e_l(y)) e_l(x)^T``; ``inf`` when ``s_2`` vanishes."""
    sl = partition.slice(level)
    ex = basis_values(partition, x)[:, sl]
    ey = basis_values(partition, y)[:, sl]
    if ex.shape[0] != 1 or ey.shape[0] != 1:
        raise ValueError("rank_one_ratio takes a single point pair")
    if ex.shape[1] == 1:
        return math.inf
    s = linalg.svd(np.outer(ey[0].conj(), ex[0]))
    return math.inf if s[1] == 0 else float(s[0] / s[1])


def symbol_bound_from_kernel(K: GridKernel, partition: Partition) -> tuple[np.ndarray, np.ndarray]:
    """Per level: ``||sigma(l)||_op`` and the bound ``||K||_{L^1} sup_x ||e_l(x)||^2``."""
    sym = kernel_coefficients(K, partition).symbol()
    B = K.grid.basis(partition)
    l1 = float(np.sum(K.grid.weights[:, None] * K.grid.weights[None, :] * np.abs(K.values)))
    lhs, rhs = [], []
    for i in range(len(partition)):
        vec = np.sqrt(np.sum(np.abs(B[:, partition.slice(i)]) ** 2, axis=1))
        lhs.append(linalg.op_norm(sym[i]))
        rhs.append(l1 * float(vec.max()) ** 2)
    return np.array(lhs), np.array(rhs)


def export_kernel(K: GridKernel, path) -> None:
    g = K.grid
    nodes = np.ascontiguousarray(g.nodes, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", g.size, nodes.shape[1]))
        fh.write(nodes.tobytes())
        fh.write(np.ascontiguousarray(g.weights, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(K.values, dtype="<c16").tobytes())


def read_kernel(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(nodes, weights, values)`` from an exported kernel file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != MAGIC:
        raise ValueError("not a kernel file (bad magic)")
    n, c = struct.unpack_from("<II", raw, 8)
    at = 16
    need = at + 8 * n * c + 8 * n + 16 * n * n
    if len(raw) != need:
        raise ValueError(f"kernel file has {len(raw)} bytes, header implies {need}")
    nodes = np.frombuffer(raw, "<f8", n * c, at).reshape(n, c)
    at += 8 * n * c
    weights = np.frombuffer(raw, "<f8", n, at)
    at += 8 * n
    values = np.frombuffer(raw, "<c16", n * n, at).reshape(n, n)
    return nodes.copy(), weights.copy(), values.copy()
