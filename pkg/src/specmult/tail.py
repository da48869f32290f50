"""Convergence classification of level series from their tail exponent.

A level series ``sum_l s_l`` is compared with ``sum_l d_l (1 + lambda_l)^e``:
the per-eigenfunction average ``s_l / d_l`` is modelled as
``(1 + lambda_l)^e`` and the series converges iff ``e < -n/nu`` (the Weyl
summability rule). Partial sums never decide the verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .manifold import Partition

__all__ = ["TailFit", "exact", "critical_exponent", "analytic_tail", "fitted_tail"]

CONVERGENT = "convergent"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TailFit:
    exponent: float
    critical: float
    analytic: bool
    slope_stderr: float
    verdict: str


def exact(x):
    """Exact rational copy of an int, Fraction or finite float."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float) and math.isfinite(x):
        return Fraction(x)
    raise ValueError(f"cannot take an exact value of {x!r}")


def critical_exponent(partition: Partition) -> Fraction:
    return -Fraction(partition.dim_n) / exact(partition.order_nu)


def analytic_tail(exponent, partition: Partition) -> TailFit:
    """Sign test ``exponent < -n/nu`` in exact rational arithmetic."""
    e = exact(exponent)
    crit = critical_exponent(partition)
    verdict = CONVERGENT if e < crit else DIVERGENT
    return TailFit(float(e), float(crit), True, 0.0, verdict)


def fitted_tail(partition: Partition, per_level, margin: float = 0.05, max_stderr: float = 0.1) -> TailFit:
    """Least-squares tail exponent over the upper half of the retained levels.

    Inconclusive when the slope standard error exceeds ``max_stderr`` or the
    exponent lies within ``margin * n/nu`` of the critical value.
    """
    s = np.asarray(per_level, dtype=float)
    lam, d = partition.lambdas, partition.dims
    crit = float(critical_exponent(partition))
    pos = np.flatnonzero(lam > 0)
    window = pos[len(pos) // 2:]
    window = window[s[window] > 0]
    if window.size < 3:
        return TailFit(float("nan"), crit, False, float("inf"), INCONCLUSIVE)
    x = np.log1p(lam[window])
    y = np.log(s[window] / d[window])
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    sxx = float(np.sum((x - x.mean()) ** 2))
    dof = max(window.size - 2, 1)
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx) if sxx > 0 else float("inf")
    e = float(coef[0])
    if stderr > max_stderr:
        verdict = INCONCLUSIVE
    elif e < crit - margin * abs(crit):
        verdict = CONVERGENT
    elif e > crit + margin * abs(crit):
        verdict = DIVERGENT
    else:
        verdict = INCONCLUSIVE
    return TailFit(e, crit, False, stderr, verdict)
