"""Sufficient conditions for r-nuclearity of invariant operators L^p1 -> L^p2.

The sufficiency sum weights each symbol entry with eigenfunction controls
``Lambda >= ||e_l^k||_inf`` raised to the exponents ``ptilde(p2) r`` and
``ptilde(q1) r`` (``q1`` dual to ``p1``). Whether the infinite sum is finite
is decided from the tail exponent of the summand, never from the size of the
truncated partial sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .manifold import Partition, QuadratureGrid
from .symbol import Symbol, recognize_power
from .tail import CONVERGENT, DIVERGENT, analytic_tail, exact, fitted_tail

__all__ = [
    "LambdaControl",
    "NuclearityReport",
    "HormanderFit",
    "HOLDS",
    "FAILS",
    "INCONCLUSIVE",
    "CONTROL_KINDS",
    "ptilde",
    "dual_index",
    "exponent_identity",
    "eigenfunction_lp_norms",
    "nuclearity_sum",
    "power_threshold",
    "hormander_constant_fit",
]

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"
CONTROL_KINDS = ("uniform", "hormander", "group_sqrt_dim", "empirical")
FORMS = ("full", "diagonal", "basis_free")


def _index(p):
    """Exact copy of an exponent in ``[1, inf]``; ``inf`` stays a float."""
    if isinstance(p, float) and math.isinf(p):
        if p < 0:
            raise ValueError("p must be at least 1")
        return math.inf
    q = exact(p)
    if q < 1:
        raise ValueError(f"p must be at least 1, got {p}")
    return q


def ptilde(p) -> Fraction:
    """0 on ``[1, 2]``, ``(p - 2)/p`` on ``(2, inf)``, 1 at ``inf``."""
    q = _index(p)
    if q == math.inf:
        return Fraction(1)
    if q <= 2:
        return Fraction(0)
    return (q - 2) / q


def dual_index(p):
    """Hoelder conjugate ``p'``; ``1 <-> inf``."""
    q = _index(p)
    if q == math.inf:
        return Fraction(1)
    if q == 1:
        return math.inf
    return q / (q - 1)


def exponent_identity(p1, p2) -> tuple[Fraction, Fraction]:
    """Both sides of ``(ptilde(p2) + ptilde(p1')) / 2 = 1/min(2, p1) - 1/max(2, p2)``."""
    a, b = _index(p1), _index(p2)
    lhs = (ptilde(b) + ptilde(dual_index(a))) / 2
    inv_min = Fraction(1, 2) if a == math.inf or a >= 2 else 1 / a
    inv_max = Fraction(0) if b == math.inf else 1 / max(Fraction(2), b)
    return lhs, inv_min - inv_max


@dataclass(frozen=True)
class LambdaControl:
    """Upper bound ``Lambda(l, k)`` for ``||e_l^k||_inf``.

    * ``uniform``: the constant ``constant``;
    * ``hormander``: ``constant * (1 + lambda)^{(n-1)/(2 nu)}``;
    * ``group_sqrt_dim``: ``d_xi^{1/2}`` on SU(2) (equal to ``d_l^{1/4}``);
    * ``empirical``: measured sup norms per basis function, ``table`` holds
      them in flat order.
    """

    kind: str
    constant: float = 1.0
    table: tuple | None = None

    def __post_init__(self):
        if self.kind not in CONTROL_KINDS:
            raise ValueError(f"unknown control {self.kind!r}; choose from {', '.join(CONTROL_KINDS)}")
        if not self.constant > 0:
            raise ValueError("control constant must be positive")
        if self.kind == "empirical" and self.table is None:
            raise ValueError("empirical control needs measured sup norms (use LambdaControl.empirical)")

    @classmethod
    def empirical(cls, partition: Partition, grid: QuadratureGrid) -> "LambdaControl":
        return cls("empirical", 1.0, tuple(eigenfunction_lp_norms(partition, grid, math.inf)))

    def growth_exponent(self, partition: Partition):
        """Exponent ``g`` with ``Lambda ~ (1 + lambda)^g``; exact except for ``empirical``."""
        if self.kind == "uniform":
            return Fraction(0)
        if self.kind == "hormander":
            return Fraction(partition.dim_n - 1, 2 * partition.order_nu)
        if self.kind == "group_sqrt_dim":
            if partition.manifold.kind != "su2":
                raise ValueError("group_sqrt_dim control is defined on SU(2) only")
            return Fraction(1, 4)
        per_level = self._level_max(partition, self.evaluate(partition))
        pos = partition.lambdas > 0
        if pos.sum() < 2:
            return 0.0
        return float(np.polyfit(np.log1p(partition.lambdas[pos]), np.log(per_level[pos]), 1)[0])

    def evaluate(self, partition: Partition) -> np.ndarray:
        """Control value at every flat basis position."""
        lam = np.repeat(partition.lambdas, partition.dims)
        if self.kind == "uniform":
            return np.full(partition.total_dim, self.constant)
        if self.kind == "hormander":
            g = float(self.growth_exponent(partition))
            return self.constant * (1.0 + lam) ** g
        if self.kind == "group_sqrt_dim":
            self.growth_exponent(partition)
            dxi = np.repeat([lv.rep2 + 1 for lv in partition.levels], partition.dims)
            return np.sqrt(dxi.astype(float))
        vals = np.asarray(self.table, dtype=float)
        if vals.shape != (partition.total_dim,):
            raise ValueError("empirical control was measured on a different partition")
        return vals

    def per_level(self, partition: Partition) -> np.ndarray:
        return self._level_max(partition, self.evaluate(partition))

    @staticmethod
    def _level_max(partition: Partition, flat: np.ndarray) -> np.ndarray:
        return np.array([flat[partition.slice(i)].max() for i in range(len(partition))])


@dataclass(frozen=True)
class NuclearityReport:
    partial_sum: float
    tail_exponent: float
    verdict: str
    threshold_alpha: float | None
    analytic: bool
    form: str


@dataclass(frozen=True)
class HormanderFit:
    C: float
    ratios: np.ndarray  # per positive level: max sup-norm / lambda^{(n-1)/(2 nu)}
    bounded: bool


def eigenfunction_lp_norms(partition: Partition, grid: QuadratureGrid, p) -> np.ndarray:
    """Quadrature ``L^p`` norm of every retained basis function (``p = inf``: grid max)."""
    B = np.abs(grid.basis(partition))
    q = _index(p)
    if q == math.inf:
        return B.max(axis=0)
    q = float(q)
    return np.sum(grid.weights[:, None] * B**q, axis=0) ** (1.0 / q)


def _summand(sigma: Symbol, r: float, a: float, b: float, control: LambdaControl, form: str) -> np.ndarray:
    p = sigma.partition
    lam_flat = control.evaluate(p)
    out = np.empty(len(p))
    for i, block in enumerate(sigma.blocks):
        ctl = lam_flat[p.slice(i)]
        if form == "full":
            w = np.abs(block) ** r * (ctl[:, None] ** (a * r)) * (ctl[None, :] ** (b * r))
            out[i] = w.sum()
        elif form == "diagonal":
            out[i] = float(np.sum(np.abs(np.diag(block)) ** r * ctl ** ((a + b) * r)))
        else:
            out[i] = linalg.schatten_q(block, r) ** r * ctl.max() ** ((a + b) * r)
    return out


def nuclearity_sum(sigma: Symbol, r, p1, p2, control: LambdaControl, form: str = "full") -> NuclearityReport:
    """Partial sufficiency sum and a verdict on its convergence.

    ``form`` picks the full entrywise sum, the diagonal sum (for symbols
    diagonal in the chosen basis) or the basis-free Schatten form with a
    level-wise control. The verdict is analytic when ``sigma`` is a recognized
    power ``(1 + lambda)^s I`` and the control has an exact growth exponent;
    otherwise the tail exponent is fitted.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {', '.join(FORMS)}")
    if isinstance(r, bool) or not 0 < float(r) <= 1:
        raise ValueError(f"r must lie in (0, 1], got {r}")
    a1, a2 = _index(p1), _index(p2)
    if a1 == math.inf or a2 == math.inf:
        raise ValueError("p1 and p2 must be finite")
    ta, tb = ptilde(a2), ptilde(dual_index(a1))
    per_level = _summand(sigma, float(r), float(ta), float(tb), control, form)
    partial = float(per_level.sum())

    power = recognize_power(sigma)
    p = sigma.partition
    threshold = None
    if power is not None and control.kind != "empirical":
        g = control.growth_exponent(p)
        e = exact(power) * exact(r) + (ta + tb) * exact(r) * g
        tail = analytic_tail(e, p)
        threshold = float(_threshold(p.dim_n, p.order_nu, exact(r), ta + tb, g))
    else:
        tail = fitted_tail(p, per_level)
    verdict = {CONVERGENT: HOLDS, DIVERGENT: FAILS}.get(tail.verdict, INCONCLUSIVE)
    return NuclearityReport(partial, tail.exponent, verdict, threshold, tail.analytic, form)


def _threshold(n: int, nu: int, r: Fraction, tsum: Fraction, g: Fraction) -> Fraction:
    # alpha threshold from  -alpha r / nu + tsum r g < -n / nu
    return Fraction(n) / r + tsum * g * nu


def power_threshold(n: int, nu: int, r, p1, p2, control_kind: str) -> Fraction:
    """Smallest ``alpha`` (exclusive) for which ``(I + E)^{-alpha/nu}`` meets the condition.

    ``control_kind``: ``hormander`` (``n/r + (ptilde(p2) + ptilde(p1'))(n-1)/2``),
    ``group_sqrt_dim`` (SU(2): ``3/r + (ptilde(p2) + ptilde(p1'))/2``),
    ``uniform`` (``n/r``) or ``schatten`` (membership in ``S_r`` on ``L^2``,
    ``n/r`` for any ``r > 0``; needs ``p1 = p2 = 2``).
    """
    if int(n) != n or n < 1 or int(nu) != nu or nu < 1:
        raise ValueError("n and nu must be positive integers")
    rr = exact(r)
    if not rr > 0:
        raise ValueError(f"r must be positive, got {r}")
    a1, a2 = _index(p1), _index(p2)
    if control_kind == "schatten":
        if a1 != 2 or a2 != 2:
            raise ValueError("the Schatten threshold applies to p1 = p2 = 2 only")
        return Fraction(n) / rr
    if rr > 1:
        raise ValueError(f"r must lie in (0, 1], got {r}")
    if a1 == math.inf or a2 == math.inf:
        raise ValueError("p1 and p2 must be finite")
    tsum = ptilde(a2) + ptilde(dual_index(a1))
    if control_kind == "hormander":
        return Fraction(n) / rr + tsum * Fraction(n - 1, 2)
    if control_kind == "group_sqrt_dim":
        if (n, nu) != (3, 2):
            raise ValueError("group_sqrt_dim threshold is available for SU(2) (n=3, nu=2) only")
        return Fraction(3) / rr + tsum / 2
    if control_kind == "uniform":
        return Fraction(n) / rr
    raise ValueError(f"unsupported control {control_kind!r}")


def hormander_constant_fit(partition: Partition, grid: QuadratureGrid) -> HormanderFit:
    """Fit ``C`` in ``||e_l^m||_inf <= C lambda_l^{(n-1)/(2 nu)}`` over positive levels."""
    pos = np.flatnonzero(partition.lambdas > 0)
    if pos.size < 5:
        raise ValueError(f"need at least 5 levels with lambda > 0, got {pos.size}")
    sup = eigenfunction_lp_norms(partition, grid, math.inf)
    g = (partition.dim_n - 1) / (2 * partition.order_nu)
    ratios = np.array([sup[partition.slice(i)].max() / partition.lambdas[i] ** g for i in pos])
    half = len(ratios) // 2
    bounded = bool(ratios[half:].max() <= ratios[:half].max() * (1 + 1e-12))
    return HormanderFit(float(ratios.max()), ratios, bounded)
