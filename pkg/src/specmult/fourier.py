"""Fourier analysis relative to the reference operator E.

Coefficients are vectors per eigenvalue level, stored contiguously in one
flat array ordered level by level (label order inside a level). The
coefficient of ``f`` at ``(l, k)`` is the inner product ``(f, e_l^k)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifold import Partition, QuadratureGrid

__all__ = [
    "FourierCoefficients",
    "GridFunction",
    "forward",
    "inverse",
    "sobolev_norm",
    "l2_norm",
    "decay_exponent",
]


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    partition: Partition
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.shape != (self.partition.total_dim,):
            raise ValueError(
                f"coefficient vector has shape {data.shape}, partition needs ({self.partition.total_dim},)"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "data", data)

    def level(self, i: int) -> np.ndarray:
        """Column ``f^(l)`` of length ``d_l``."""
        return self.data[self.partition.slice(i)]

    @classmethod
    def zeros(cls, partition: Partition) -> "FourierCoefficients":
        return cls(partition, np.zeros(partition.total_dim, dtype=complex))

    @classmethod
    def unit(cls, partition: Partition, level_index: int, k: int) -> "FourierCoefficients":
        data = np.zeros(partition.total_dim, dtype=complex)
        data[partition.flat_index(level_index, k)] = 1.0
        return cls(partition, data)

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def __add__(self, other: "FourierCoefficients") -> "FourierCoefficients":
        _check_same(self.partition, other.partition)
        return FourierCoefficients(self.partition, self.data + other.data)

    def __rmul__(self, scalar) -> "FourierCoefficients":
        return FourierCoefficients(self.partition, complex(scalar) * self.data)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.size,):
            raise ValueError(f"grid function needs {self.grid.size} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: QuadratureGrid, fn) -> "GridFunction":
        return cls(grid, fn(grid.nodes))

    def norm(self, p: float = 2.0) -> float:
        a = np.abs(self.values)
        if np.isinf(p):
            return float(a.max())
        return float(np.sum(self.grid.weights * a**p) ** (1.0 / p))


def _check_same(a: Partition, b: Partition) -> None:
    if not a.same_as(b):
        raise ValueError("coefficients live on different partitions")


def forward(f: GridFunction, partition: Partition) -> FourierCoefficients:
    """``f^(l, k) = sum_x f(x) conj(e_l^k(x)) w(x)``."""
    B = f.grid.basis(partition)
    return FourierCoefficients(partition, B.conj().T @ (f.grid.weights * f.values))


def inverse(c: FourierCoefficients, grid: QuadratureGrid) -> GridFunction:
    """Pointwise synthesis ``sum_{l,k} c(l, k) e_l^k(x)`` at the grid nodes."""
    B = grid.basis(c.partition)
    return GridFunction(grid, B @ c.data)


def l2_norm(c: FourierCoefficients) -> float:
    return c.norm()


def sobolev_norm(c: FourierCoefficients, s: float) -> float:
    """``(sum (1 + lambda_j)^{2s/nu} |f^(j, k)|^2)^{1/2}`` over retained levels."""
    p = c.partition
    w = np.repeat((1.0 + p.lambdas) ** (2.0 * s / p.order_nu), p.dims)
    return float(np.sqrt(np.sum(w * np.abs(c.data) ** 2)))


def decay_exponent(c: FourierCoefficients) -> float:
    """Slope of ``log |f^(l)|`` against ``log(1 + lambda_l)`` over non-zero levels."""
    p = c.partition
    norms = np.array([np.linalg.norm(c.level(i)) for i in range(len(p))])
    keep = (norms > 0) & (p.lambdas > 0)
    if keep.sum() < 2:
        raise ValueError("need at least two non-zero levels with positive eigenvalue")
    x = np.log1p(p.lambdas[keep])
    y = np.log(norms[keep])
    return float(np.polyfit(x, y, 1)[0])
