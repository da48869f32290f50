"""Independent reference computations used only by the tests."""

from __future__ import annotations

import math

import numpy as np


def jacobi_eigh(sym: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by classical two-sided Jacobi rotations."""
    a = np.array(sym, dtype=float)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(a, -1) ** 2)))
        if off <= tol * max(1.0, float(np.linalg.norm(a))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))[::-1]


def singular_values_oracle(m: np.ndarray) -> np.ndarray:
    """Singular values via the real symmetric embedding [[0, M], [M^H, 0]] (eigenvalues +-s)."""
    m = np.asarray(m, dtype=complex)
    r, c = m.shape
    # complex -> real: M = X + iY acts on R^{2c} as [[X, -Y], [Y, X]]
    real = np.block([[m.real, -m.imag], [m.imag, m.real]])
    big = np.block([[np.zeros((2 * r, 2 * r)), real], [real.T, np.zeros((2 * c, 2 * c))]])
    ev = jacobi_eigh(big)
    # each singular value of M appears twice among the positive eigenvalues
    k = min(r, c)
    return np.clip(ev[: 2 * k : 2], 0.0, None)


def dirichlet(n: int, t: np.ndarray) -> np.ndarray:
    """sum_{|j| <= n} exp(2 pi i j t) in closed form."""
    t = np.asarray(t, dtype=float)
    den = np.sin(np.pi * t)
    out = np.empty_like(t)
    small = np.abs(den) < 1e-12
    out[small] = 2 * n + 1
    out[~small] = np.sin((2 * n + 1) * np.pi * t[~small]) / den[~small]
    return out


def brute_lattice_levels(n: int, cutoff: int) -> dict:
    """|j|^2 -> multiplicity by brute-force counting."""
    out: dict[int, int] = {}
    k = int(math.isqrt(cutoff)) + 1
    grids = np.meshgrid(*([np.arange(-k, k + 1)] * n), indexing="ij")
    sq = sum(g.astype(int) ** 2 for g in grids).ravel()
    for v in sq[sq <= cutoff]:
        out[int(v)] = out.get(int(v), 0) + 1
    return out


def singular_values_gram(m: np.ndarray) -> np.ndarray:
    """sqrt of the eigenvalues of A^H A, via its real symmetric 2n x 2n form."""
    g = np.asarray(m, dtype=complex)
    g = g.conj().T @ g
    real = np.block([[g.real, -g.imag], [g.imag, g.real]])
    ev = jacobi_eigh(real)
    return np.sqrt(np.clip(ev[::2], 0.0, None))
