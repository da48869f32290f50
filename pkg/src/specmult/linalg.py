"""Dense complex matrix kernel: singular values, Schatten quasi-norms, traces.

Singular values come from a one-sided (Hestenes) Jacobi iteration on the
columns of the matrix. Column pairs are visited in round-robin order so each
round rotates n/2 disjoint pairs at once with vectorized numpy updates.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "ConvergenceError",
    "as_cmatrix",
    "svd",
    "schatten_q",
    "op_norm",
    "mat_trace",
    "frobenius",
]

MAX_SWEEPS = 60
OFF_TOL = 1e-14
CLAMP_TOL = 1e-14


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi sweeps fail to orthogonalize the columns."""


def as_cmatrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array, rejecting anything else."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix must have positive dimensions, got {m.shape}")
    if not np.all(np.isfinite(m)):
        bad = np.argwhere(~np.isfinite(m))[0]
        raise ValueError(f"matrix has non-finite entry at {tuple(int(i) for i in bad)}")
    return m


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # Circle-method tournament; index n (when n is odd) is a bye.
    size = n + (n % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        p, q = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def svd(a) -> np.ndarray:
    """Singular values of ``a`` in non-increasing order.

    Parameters
    ----------
    a : array_like
        Finite complex matrix of any shape.

    Returns
    -------
    numpy.ndarray
        ``min(rows, cols)`` non-negative reals. Values below ``1e-14 * s_max``
        are clamped to exactly zero.

    Raises
    ------
    ValueError
        If ``a`` is not a finite 2-D matrix.
    ConvergenceError
        If the off-diagonal mass has not vanished after 60 sweeps.
    """
    m = as_cmatrix(a)
    if m.shape[0] < m.shape[1]:
        m = m.conj().T
    n = m.shape[1]
    # rescale by a power of two (exact) so squared entries neither underflow nor overflow
    top = float(np.abs(m).max())
    if top == 0.0:
        return np.zeros(n)
    shift = math.frexp(top)[1]
    w = np.ldexp(m.real, -shift) + 1j * np.ldexp(m.imag, -shift)
    fro2 = float(np.sum(np.abs(w) ** 2))
    pair_tol = max(1e-15, n * np.finfo(float).eps)
    rounds = _round_robin(n)

    off2 = math.inf
    for _ in range(MAX_SWEEPS):
        rotated = False
        off2 = 0.0
        for p, q in rounds:
            if p.size == 0:
                continue
            ap, aq = w[:, p], w[:, q]
            alpha = np.sum(np.abs(ap) ** 2, axis=0)
            beta = np.sum(np.abs(aq) ** 2, axis=0)
            gamma = np.sum(ap.conj() * aq, axis=0)
            g = np.abs(gamma)
            off2 += 2.0 * float(np.sum(g**2))
            act = g > pair_tol * np.sqrt(alpha * beta)
            if not np.any(act):
                continue
            rotated = True
            p, q = p[act], q[act]
            ap, aq = ap[:, act], aq[:, act]
            alpha, beta, g, gamma = alpha[act], beta[act], g[act], gamma[act]
            phase = gamma / g
            zeta = (beta - alpha) / (2.0 * g)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta**2))
            c = 1.0 / np.sqrt(1.0 + t**2)
            s = c * t
            aq = aq * phase.conj()
            w[:, p] = c * ap - s * aq
            w[:, q] = s * ap + c * aq
        if not rotated or math.sqrt(off2) < OFF_TOL * fro2:
            break
    else:
        raise ConvergenceError(
            f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps "
            f"(shape {m.shape}, off-diagonal mass {math.sqrt(off2):.3e})"
        )

    sv = np.sort(np.sqrt(np.sum(np.abs(w) ** 2, axis=0)))[::-1]
    sv[sv < CLAMP_TOL * sv[0]] = 0.0
    return np.ldexp(sv, shift)


def schatten_q(a, r: float) -> float:
    """Schatten quasi-norm ``(sum_k s_k**r) ** (1/r)`` for ``r > 0``.

    ``r = inf`` is accepted as a synonym for :func:`op_norm`.
    """
    if not r > 0:
        raise ValueError(f"Schatten index must be positive, got {r}")
    s = svd(a)
    if math.isinf(r):
        return float(s[0])
    s = s[s > 0]
    if s.size == 0:
        return 0.0
    # scale by s_max so r < 1 sums neither overflow nor underflow
    top = s[0]
    return float(top * np.sum((s / top) ** r) ** (1.0 / r))


def op_norm(a) -> float:
    """Operator (spectral) norm, the largest singular value."""
    return float(svd(a)[0])


def mat_trace(a) -> complex:
    m = as_cmatrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"trace needs a square matrix, got shape {m.shape}")
    return complex(np.trace(m))


def frobenius(a) -> float:
    return float(np.sqrt(np.sum(np.abs(as_cmatrix(a)) ** 2)))
