"""Matrix symbols of invariant operators (Fourier multipliers relative to E).

A symbol assigns to every level ``l`` a ``d_l x d_l`` matrix ``sigma(l)`` that
acts on the coefficient column of that level::

    (T f)^(l) = sigma(l) f^(l),      T e_l^k = sum_m sigma(l)_{mk} e_l^m.

So column ``k`` of ``sigma(l)`` holds the coefficients of ``T e_l^k``. The
matrix of the restriction ``T|H_l`` written with the row convention is the
transpose; singular values and traces do not see the difference.

All analysis works on the retained (truncated) partition. Questions about
the infinite series are answered from tail exponents, see :mod:`specmult.tail`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import linalg
from .fourier import FourierCoefficients, GridFunction, forward, inverse
from .manifold import Partition, QuadratureGrid
from .tail import TailFit, analytic_tail, exact, fitted_tail

__all__ = [
    "Symbol",
    "InvarianceReport",
    "SchattenResult",
    "SobolevOrder",
    "SlowDecayWarning",
    "from_spectral_function",
    "power_symbol",
    "apply",
    "assemble",
    "extract",
    "operator_matrix",
    "grid_operator",
    "check_invariance",
    "compose",
    "conjugate",
    "l2_bound",
    "lp_norm",
    "schatten",
    "trace_formula",
    "sobolev_order",
    "recognize_power",
]

DEFAULT_INVARIANCE_TOL = 1e-9


class SlowDecayWarning(UserWarning):
    """The truncated trace series still carries significant mass at its top level."""


@dataclass(frozen=True, eq=False)
class Symbol:
    """Per-level matrices on a fixed partition.

    ``power`` is set when the symbol is known to be ``(1 + lambda)^power I``;
    it lets convergence questions be settled analytically.
    """

    partition: Partition
    blocks: tuple
    power: object = None

    def __post_init__(self):
        p = self.partition
        if len(self.blocks) != len(p):
            raise ValueError(f"symbol has {len(self.blocks)} blocks, partition has {len(p)} levels")
        blocks = []
        for i, (b, d) in enumerate(zip(self.blocks, p.dims)):
            m = np.asarray(b, dtype=complex)
            if m.shape != (d, d):
                raise ValueError(f"level {i}: block shape {m.shape}, expected ({d}, {d})")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"level {i}: non-finite entries")
            blocks.append(m)
        object.__setattr__(self, "blocks", tuple(blocks))

    def __getitem__(self, level_index: int) -> np.ndarray:
        return self.blocks[level_index]

    def __len__(self) -> int:
        return len(self.blocks)

    @classmethod
    def identity(cls, partition: Partition) -> "Symbol":
        return cls(partition, tuple(np.eye(d) for d in partition.dims), power=Fraction(0))

    @classmethod
    def zeros(cls, partition: Partition) -> "Symbol":
        return cls(partition, tuple(np.zeros((d, d)) for d in partition.dims))


@dataclass(frozen=True)
class InvarianceReport:
    max_offblock: float
    tolerance: float
    verdict: bool
    extracted: Symbol


@dataclass(frozen=True)
class SchattenResult:
    value: float
    finite_on_truncation: bool
    tail: TailFit


@dataclass(frozen=True)
class SobolevOrder:
    m_est: float
    C_est: float


def _same(a: Partition, b: Partition) -> None:
    if not a.same_as(b):
        raise ValueError("partition mismatch")


def from_spectral_function(partition: Partition, F: Callable) -> Symbol:
    """Symbol of ``F(E)``: ``sigma(l) = F(lambda_l) I``."""
    blocks = []
    for lv in partition.levels:
        v = complex(F(lv.lam))
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"F is not finite at lambda={lv.lam:g}")
        blocks.append(v * np.eye(lv.dim))
    return Symbol(partition, tuple(blocks))


def power_symbol(partition: Partition, alpha) -> Symbol:
    """Symbol of ``(I + E)^{-alpha/nu}``."""
    power = -exact(alpha) / partition.order_nu
    s = float(power)
    blocks = tuple((1.0 + lv.lam) ** s * np.eye(lv.dim) for lv in partition.levels)
    return Symbol(partition, blocks, power=power)


def apply(sigma: Symbol, c: FourierCoefficients) -> FourierCoefficients:
    _same(sigma.partition, c.partition)
    p = sigma.partition
    out = np.empty(p.total_dim, dtype=complex)
    for i, block in enumerate(sigma.blocks):
        sl = p.slice(i)
        out[sl] = block @ c.data[sl]
    return FourierCoefficients(p, out)


def assemble(sigma: Symbol) -> np.ndarray:
    """Dense block-diagonal matrix acting on flat coefficient vectors."""
    p = sigma.partition
    big = np.zeros((p.total_dim, p.total_dim), dtype=complex)
    for i, block in enumerate(sigma.blocks):
        sl = p.slice(i)
        big[sl, sl] = block
    return big


def _as_vector(out, partition: Partition) -> np.ndarray:
    if isinstance(out, FourierCoefficients):
        _same(out.partition, partition)
        return out.data
    v = np.asarray(out, dtype=complex)
    if v.shape != (partition.total_dim,):
        raise ValueError(f"operator returned shape {v.shape}, expected ({partition.total_dim},)")
    return v


def operator_matrix(apply_op: Callable, partition: Partition) -> np.ndarray:
    """Matrix of a black-box coefficient map in the retained basis.

    Column ``t`` is ``apply_op`` evaluated on the ``t``-th unit vector.
    """
    n = partition.total_dim
    mat = np.empty((n, n), dtype=complex)
    for t in range(n):
        e = np.zeros(n, dtype=complex)
        e[t] = 1.0
        mat[:, t] = _as_vector(apply_op(FourierCoefficients(partition, e)), partition)
    if not np.all(np.isfinite(mat)):
        raise ValueError("operator produced non-finite coefficients")
    return mat


def _blocks_of(mat: np.ndarray, partition: Partition) -> tuple:
    return tuple(mat[partition.slice(i), partition.slice(i)].copy() for i in range(len(partition)))


def extract(apply_op: Callable, partition: Partition) -> Symbol:
    """``sigma(j)_{mk}`` = coefficient ``(j, m)`` of ``apply_op(e_j^k)``."""
    return Symbol(partition, _blocks_of(operator_matrix(apply_op, partition), partition))


def grid_operator(op: Callable, partition: Partition, grid: QuadratureGrid) -> Callable:
    """Wrap a map on grid values as a coefficient map ``forward . op . inverse``."""

    def apply_op(c: FourierCoefficients) -> FourierCoefficients:
        out = op(inverse(c, grid).values)
        return forward(GridFunction(grid, out), partition)

    return apply_op


def check_invariance(op, partition: Partition, tol: float = DEFAULT_INVARIANCE_TOL) -> InvarianceReport:
    """Scan every level pair for coupling between distinct eigenspaces.

    ``op`` is a coefficient map or a :class:`specmult.kernel.GridKernel`.
    """
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    from .kernel import GridKernel, kernel_coefficients

    if isinstance(op, GridKernel):
        mat = kernel_coefficients(op, partition).table
    else:
        mat = operator_matrix(op, partition)
    lv = partition.level_of
    off = np.abs(mat[lv[:, None] != lv[None, :]])
    max_off = float(off.max()) if off.size else 0.0
    extracted = Symbol(partition, _blocks_of(mat, partition))
    return InvarianceReport(max_off, tol, max_off < tol, extracted)


def compose(a: Symbol, b: Symbol) -> Symbol:
    """Symbol of ``A o B``: level-wise product ``sigma_A(l) sigma_B(l)``."""
    _same(a.partition, b.partition)
    power = a.power + b.power if a.power is not None and b.power is not None else None
    return Symbol(a.partition, tuple(x @ y for x, y in zip(a.blocks, b.blocks)), power=power)


def conjugate(sigma: Symbol, unitaries) -> Symbol:
    """Symbol of the same operator after a per-level change of orthonormal basis."""
    blocks = tuple(u @ b @ u.conj().T for u, b in zip(unitaries, sigma.blocks))
    return Symbol(sigma.partition, blocks, power=sigma.power)


def l2_bound(sigma: Symbol) -> float:
    """``||T||_{L^2 -> L^2} = sup_l ||sigma(l)||_op`` on the truncation."""
    return max(linalg.op_norm(b) for b in sigma.blocks)


def _level_schatten_r(sigma: Symbol, r: float) -> np.ndarray:
    out = np.empty(len(sigma))
    for i, b in enumerate(sigma.blocks):
        out[i] = linalg.schatten_q(b, r) ** r
    return out


def recognize_power(sigma: Symbol, rtol: float = 1e-10):
    """Return ``s`` if ``sigma(l) = (1 + lambda_l)^s I`` on every level, else None."""
    if sigma.power is not None:
        return sigma.power
    p = sigma.partition
    scal = []
    for b in sigma.blocks:
        c = b[0, 0]
        if np.abs(b - c * np.eye(b.shape[0])).max() > rtol * max(abs(c), 1e-300):
            return None
        if abs(c.imag) > rtol * abs(c) or c.real <= 0:
            return None
        scal.append(c.real)
    scal = np.array(scal)
    pos = p.lambdas > 0
    if abs(scal[0] - 1.0) > rtol or pos.sum() < 2:
        return None
    exps = np.log(scal[pos]) / np.log1p(p.lambdas[pos])
    s = float(np.median(exps))
    if np.abs(scal[pos] - (1.0 + p.lambdas[pos]) ** s).max() > 1e3 * rtol * scal[pos].max():
        return None
    frac = Fraction(s).limit_denominator(10**6)
    return frac if abs(float(frac) - s) < 1e-9 else s


def schatten(sigma: Symbol, r: float) -> SchattenResult:
    """``(sum_l ||sigma(l)||_{S_r}^r)^{1/r}`` plus a tail-exponent membership test."""
    if not r > 0:
        raise ValueError(f"Schatten index must be positive, got {r}")
    if math.isinf(r):
        raise ValueError("use l2_bound for r = inf")
    per = _level_schatten_r(sigma, r)
    total = float(per.sum())
    value = total ** (1.0 / r)
    power = recognize_power(sigma)
    if power is not None:
        tail = analytic_tail(exact(power) * exact(r), sigma.partition)
    else:
        tail = fitted_tail(sigma.partition, per)
    return SchattenResult(value, math.isfinite(value), tail)


def lp_norm(sigma: Symbol, p: float) -> float:
    """Norm of ``sigma`` in ``l^p(Sigma)``; ``p = inf`` is the sup of operator norms."""
    if math.isinf(p):
        return l2_bound(sigma)
    return float(_level_schatten_r(sigma, p).sum() ** (1.0 / p))


def trace_formula(sigma: Symbol, warn_fraction: float = 0.01) -> complex:
    """``Tr(T) = sum_l Tr(sigma(l))`` over the retained levels.

    Emits :class:`SlowDecayWarning` when the top level still holds more than
    ``warn_fraction`` of the accumulated trace-norm mass.
    """
    tr = sum(linalg.mat_trace(b) for b in sigma.blocks)
    s1 = _level_schatten_r(sigma, 1.0)
    total = s1.sum()
    if total > 0 and s1[-1] > warn_fraction * total:
        warnings.warn(
            f"top level carries {s1[-1] / total:.1%} of the S_1 mass; truncated trace may not be converged",
            SlowDecayWarning,
            stacklevel=2,
        )
    return complex(tr)


def sobolev_order(sigma: Symbol) -> SobolevOrder:
    """Fit ``||sigma(l)||_op ~ C (1 + lambda_l)^{m/nu}`` on the upper half of the levels."""
    p = sigma.partition
    pos = np.flatnonzero(p.lambdas > 0)
    if pos.size < 8:
        raise ValueError(f"sobolev_order needs at least 8 levels with lambda > 0, got {pos.size}")
    window = pos[len(pos) // 2:]
    norms = np.array([linalg.op_norm(sigma.blocks[i]) for i in window])
    if np.all(norms == 0):
        raise ValueError("symbol vanishes on the fit window")
    keep = norms > 0
    x = np.log1p(p.lambdas[window][keep]) / p.order_nu
    y = np.log(norms[keep])
    slope, intercept = np.polyfit(x, y, 1)
    return SobolevOrder(float(slope), float(math.exp(intercept)))
