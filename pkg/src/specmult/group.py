"""Group symbols on SU(2) and their relation to manifold symbols.

A group symbol assigns to every irrep ``xi`` (keyed by the integer ``2l``) a
``d_xi x d_xi`` matrix ``tau(xi)``. The operator it quantizes is::

    A f(x) = sum_xi d_xi Tr(xi(x) tau(xi) f^(xi)),   f^(xi) = int f(x) xi(x)^* dx.

With the basis ``e_{(row, col)} = sqrt(d_xi) xi_{row, col}`` flattened
row-major, the manifold symbol of ``A`` is ``kron(I_{d_xi}, tau(xi))``: every
row of ``xi`` is an invariant block on which ``tau`` acts.

On SU(2) each Casimir eigenvalue carries exactly one irrep, so the fine
(per-irrep) and coarse (per-eigenvalue) partitions coincide. :func:`coarsen`
is the direct-sum assembly used when several fine pieces share an eigenvalue,
as happens for characters of the torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .fourier import GridFunction
from .manifold import Partition, QuadratureGrid, wigner_D
from .symbol import Symbol

__all__ = [
    "GroupSymbol",
    "MatrixFourier",
    "ConsistencyReport",
    "gamma",
    "phi_psi",
    "tau_to_sigma",
    "sigma_to_tau",
    "schatten_consistency",
    "rep_matrices",
    "group_fourier",
    "group_inverse",
    "group_quantize",
    "coarsen",
    "right_translation",
    "left_translation",
    "torus_translation",
    "character_multiplication",
]

BLOCK_TOL = 1e-10


def _rep_eigenvalue(two_l: int) -> Fraction:
    return Fraction(two_l * (two_l + 2), 4)


def _check_rep_dict(mats: dict, what: str) -> dict:
    out = {}
    for key, m in sorted(mats.items()):
        two_l = int(key)
        if two_l != key or two_l < 0:
            raise ValueError(f"{what}: rep key must be a non-negative integer 2l, got {key!r}")
        arr = linalg.as_cmatrix(m)
        if arr.shape != (two_l + 1, two_l + 1):
            raise ValueError(f"{what}: rep 2l={two_l} needs a {two_l + 1}x{two_l + 1} matrix, got {arr.shape}")
        out[two_l] = arr
    if not out:
        raise ValueError(f"{what}: no representations given")
    return out


@dataclass(frozen=True, eq=False)
class GroupSymbol:
    """``tau(xi)`` per irrep, keyed by ``2l``."""

    mats: dict

    def __post_init__(self):
        object.__setattr__(self, "mats", _check_rep_dict(self.mats, "group symbol"))

    @property
    def reps(self) -> tuple:
        return tuple(self.mats)

    def __getitem__(self, two_l: int) -> np.ndarray:
        return self.mats[two_l]

    @classmethod
    def identity(cls, max_two_l: int) -> "GroupSymbol":
        return cls({k: np.eye(k + 1) for k in range(max_two_l + 1)})


@dataclass(frozen=True, eq=False)
class MatrixFourier:
    """Matrix-valued Fourier transform ``f^(xi)`` per irrep, keyed by ``2l``."""

    mats: dict

    def __post_init__(self):
        object.__setattr__(self, "mats", _check_rep_dict(self.mats, "matrix Fourier transform"))

    def __getitem__(self, two_l: int) -> np.ndarray:
        return self.mats[two_l]

    def plancherel_norm(self) -> float:
        """``(sum_xi d_xi ||f^(xi)||_HS^2)^{1/2}``."""
        return math.sqrt(sum((k + 1) * float(np.sum(np.abs(m) ** 2)) for k, m in self.mats.items()))


@dataclass(frozen=True)
class ConsistencyReport:
    rs: tuple
    per_level_max_rel: dict  # r -> worst relative mismatch over levels
    aggregate_rel: dict  # r -> relative mismatch of the summed quantities
    ok: bool


# --- index bijection --------------------------------------------------------


def _check_pos_int(x, name: str) -> int:
    if isinstance(x, bool) or int(x) != x:
        raise ValueError(f"{name} must be an integer, got {x!r}")
    return int(x)


def gamma(d: int, j: int, k: int) -> int:
    """Flat 1-based position ``(j - 1) d + k`` of the pair ``(j, k)``."""
    d, j, k = (_check_pos_int(v, n) for v, n in ((d, "d"), (j, "j"), (k, "k")))
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    if not (1 <= j <= d and 1 <= k <= d):
        raise ValueError(f"(j, k) = ({j}, {k}) outside [1, {d}]^2")
    return (j - 1) * d + k


def phi_psi(t: int, d: int) -> tuple[int, int]:
    """Inverse of :func:`gamma`: ``t = gamma(d, psi, phi)``; returns ``(phi, psi)``."""
    t, d = _check_pos_int(t, "t"), _check_pos_int(d, "d")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    if not 1 <= t <= d * d:
        raise ValueError(f"t = {t} outside [1, {d * d}]")
    q = (t - 1) // d
    return t - q * d, q + 1


# --- tau <-> sigma ----------------------------------------------------------


def _require_su2(partition: Partition) -> None:
    if partition.manifold.kind != "su2":
        raise ValueError(f"group symbols live on SU(2), partition is on {partition.manifold}")


def tau_to_sigma(tau: GroupSymbol, partition: Partition) -> Symbol:
    """``sigma(l)_{mi} = tau_{phi(m), phi(i)}`` when ``psi(m) = psi(i)``, else 0."""
    _require_su2(partition)
    reps = tuple(lv.rep2 for lv in partition.levels)
    if reps != tau.reps:
        raise ValueError(f"group symbol reps {tau.reps} do not match partition reps {reps}")
    blocks = tuple(np.kron(np.eye(k + 1), tau[k]) for k in reps)
    return Symbol(partition, blocks)


def sigma_to_tau(sigma: Symbol, tol: float = BLOCK_TOL) -> GroupSymbol:
    """Top-left ``d_xi x d_xi`` block, after checking the repeated-block pattern."""
    p = sigma.partition
    _require_su2(p)
    mats = {}
    worst, where = 0.0, None
    for lv, block in zip(p.levels, sigma.blocks):
        d = lv.rep2 + 1
        tau = block[:d, :d].copy()
        dev = float(np.abs(block - np.kron(np.eye(d), tau)).max())
        if dev > worst:
            worst, where = dev, lv.rep2
        mats[lv.rep2] = tau
    if worst > tol:
        raise ValueError(
            f"symbol is not of group type: block-pattern deviation {worst:.3e} at rep 2l={where} exceeds {tol:g}"
        )
    return GroupSymbol(mats)


def schatten_consistency(tau: GroupSymbol, sigma: Symbol, rs=(0.5, 1.0, 2.0), rtol: float = 1e-10) -> ConsistencyReport:
    """Compare ``||sigma(l)||_{S_r}^r`` with ``d_xi ||tau(xi)||_{S_r}^r`` level by level."""
    p = sigma.partition
    per, agg = {}, {}
    for r in rs:
        lhs = np.array([linalg.schatten_q(b, r) ** r for b in sigma.blocks])
        rhs = np.array([(lv.rep2 + 1) * linalg.schatten_q(tau[lv.rep2], r) ** r for lv in p.levels])
        scale = np.maximum(np.abs(rhs), 1e-300)
        per[r] = float(np.max(np.abs(lhs - rhs) / scale))
        agg[r] = float(abs(lhs.sum() - rhs.sum()) / max(abs(rhs.sum()), 1e-300))
    ok = all(v <= rtol for v in per.values()) and all(v <= rtol for v in agg.values())
    return ConsistencyReport(tuple(rs), per, agg, ok)


# --- group Fourier analysis -------------------------------------------------


def _max_rep_in_band(band_limit: float) -> int:
    k = 0
    while _rep_eigenvalue(k + 1) <= band_limit:
        k += 1
    return k


def rep_matrices(grid: QuadratureGrid, two_l: int) -> np.ndarray:
    """``xi(x)`` at every node of an SU(2) grid, shape ``(N, d, d)`` (cached)."""
    if grid.manifold.kind != "su2":
        raise ValueError("representation matrices need an SU(2) grid")
    if _rep_eigenvalue(two_l) > grid.band_limit:
        raise ValueError(f"rep 2l={two_l} exceeds the grid band limit {grid.band_limit:g}")
    key = ("rep", two_l)
    hit = grid._cache.get(key)
    if hit is None:
        n = grid.nodes
        hit = wigner_D(two_l, n[:, 0], n[:, 1], n[:, 2])
        grid._cache[key] = hit
    return hit


def group_fourier(f: GridFunction, max_two_l: int | None = None) -> MatrixFourier:
    """``f^(xi) = sum_x w(x) f(x) xi(x)^*`` for every rep up to ``max_two_l``."""
    grid = f.grid
    top = _max_rep_in_band(grid.band_limit) if grid.manifold.kind == "su2" else None
    if top is None:
        raise ValueError("group Fourier transform needs an SU(2) grid")
    if max_two_l is None:
        max_two_l = top
    if max_two_l > top:
        raise ValueError(f"rep 2l={max_two_l} exceeds the grid band (largest exact rep 2l={top})")
    wf = grid.weights * f.values
    mats = {}
    for k in range(max_two_l + 1):
        D = rep_matrices(grid, k)
        mats[k] = np.einsum("n,nba->ab", wf, D.conj())
    return MatrixFourier(mats)


def group_inverse(fhat: MatrixFourier, grid: QuadratureGrid) -> GridFunction:
    """Peter-Weyl synthesis ``sum_xi d_xi Tr(xi(x) f^(xi))`` at the grid nodes."""
    out = np.zeros(grid.size, dtype=complex)
    for k, m in fhat.mats.items():
        D = rep_matrices(grid, k)
        out += (k + 1) * np.einsum("nab,ba->n", D, m)
    return GridFunction(grid, out)


def group_quantize(tau: GroupSymbol, f: GridFunction) -> GridFunction:
    """``A f(x) = sum_xi d_xi Tr(xi(x) tau(xi) f^(xi))`` over the reps of ``tau``."""
    top = max(tau.reps)
    fhat = group_fourier(f, top)
    return group_inverse(MatrixFourier({k: tau[k] @ fhat[k] for k in tau.reps}), f.grid)


# --- fine -> coarse ---------------------------------------------------------


def coarsen(partition: Partition, pieces: dict, eigenvalues: dict, rtol: float = 1e-12) -> Symbol:
    """Direct-sum assembly of fine symbol pieces sharing an eigenvalue.

    ``pieces`` maps a fine key (a torus lattice vector or an SU(2) rep index)
    to its square matrix; ``eigenvalues`` maps the same key to its eigenvalue.
    Within a level the blocks are placed in sorted key order.
    """
    if set(pieces) != set(eigenvalues):
        raise ValueError("pieces and eigenvalues must have the same keys")
    by_level: dict[int, list] = {}
    lam = partition.lambdas
    for key in pieces:
        ev = float(eigenvalues[key])
        hit = np.flatnonzero(np.abs(lam - ev) <= rtol * max(1.0, abs(ev)))
        if hit.size != 1:
            raise ValueError(f"eigenvalue {ev:g} of piece {key!r} is not a retained level")
        by_level.setdefault(int(hit[0]), []).append(key)
    blocks = []
    for i, lv in enumerate(partition.levels):
        keys = sorted(by_level.get(i, []))
        mats = [linalg.as_cmatrix(np.atleast_2d(pieces[k])) for k in keys]
        for k, m in zip(keys, mats):
            if m.shape[0] != m.shape[1]:
                raise ValueError(f"piece {k!r} is not square: {m.shape}")
        total = sum(m.shape[0] for m in mats)
        if total != lv.dim:
            raise ValueError(f"level {i} (lambda={lv.lam:g}) has dimension {lv.dim}, pieces sum to {total}")
        block = np.zeros((lv.dim, lv.dim), dtype=complex)
        at = 0
        for m in mats:
            s = m.shape[0]
            block[at:at + s, at:at + s] = m
            at += s
        blocks.append(block)
    return Symbol(partition, tuple(blocks))


# --- concrete translation and multiplication operators ---------------------


def _su2_translate(grid: QuadratureGrid, h, side: str):
    if grid.manifold.kind != "su2":
        raise ValueError("SU(2) translation needs an SU(2) grid")
    top = _max_rep_in_band(grid.band_limit)
    h = tuple(float(a) for a in h)
    hmats = {k: wigner_D(k, h[0], h[1], h[2])[0] for k in range(top + 1)}

    def op(values: np.ndarray) -> np.ndarray:
        fhat = group_fourier(GridFunction(grid, values), top)
        out = np.zeros(grid.size, dtype=complex)
        for k in range(top + 1):
            D = rep_matrices(grid, k)
            # xi(x h) = xi(x) xi(h);  xi(h^-1 x) = xi(h)^* xi(x)
            if side == "right":
                moved = D @ hmats[k]
            else:
                moved = hmats[k].conj().T[None, :, :] @ D
            out += (k + 1) * np.einsum("nab,ba->n", moved, fhat[k])
        return out

    return op


def right_translation(grid: QuadratureGrid, h):
    """Grid map ``f -> f(. h)`` for band-limited ``f``; ``h`` given as Euler angles.

    Its group symbol is ``tau(xi) = xi(h)``.
    """
    return _su2_translate(grid, h, "right")


def left_translation(grid: QuadratureGrid, h):
    """Grid map ``f -> f(h^-1 .)`` for band-limited ``f``; ``h`` given as Euler angles."""
    return _su2_translate(grid, h, "left")


def torus_translation(grid: QuadratureGrid, shift):
    """Grid map ``f -> f(. - shift)`` on the torus.

    Shifts that are whole grid steps act as exact index rolls; other shifts use
    trigonometric interpolation, exact for functions in the grid band.
    """
    if grid.manifold.kind != "torus":
        raise ValueError("torus translation needs a torus grid")
    n = grid.manifold.dim
    a = np.broadcast_to(np.asarray(shift, dtype=float), (n,))
    shape = grid.shape
    steps = a * np.array(shape)
    whole = np.allclose(steps, np.round(steps), atol=1e-12, rtol=0)

    def op(values: np.ndarray) -> np.ndarray:
        f = np.asarray(values, dtype=complex).reshape(shape)
        if whole:
            return np.roll(f, tuple(int(s) for s in np.round(steps)), axis=tuple(range(n))).ravel()
        F = np.fft.fftn(f)
        for ax in range(n):
            freq = np.fft.fftfreq(shape[ax], d=1.0 / shape[ax])
            phase = np.exp(-2j * np.pi * freq * a[ax])
            F = F * phase.reshape([-1 if i == ax else 1 for i in range(n)])
        return np.fft.ifftn(F).ravel()

    return op


def character_multiplication(grid: QuadratureGrid, j):
    """Grid map ``f -> exp(2 pi i j.x) f``; shifts frequencies, so not invariant."""
    if grid.manifold.kind != "torus":
        raise ValueError("character multiplication needs a torus grid")
    jj = np.broadcast_to(np.asarray(j, dtype=float), (grid.manifold.dim,))
    g = np.exp(2j * np.pi * grid.nodes @ jj)

    def op(values: np.ndarray) -> np.ndarray:
        return g * np.asarray(values, dtype=complex)

    return op
