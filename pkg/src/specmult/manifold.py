"""Backends for the torus T^n (n = 1, 2, 3) and SU(2).

Reference operators:

* torus: ``E = -(2 pi)^-2 Laplacian`` on ``R^n / Z^n``, so the character
  ``exp(2 pi i j.x)`` has eigenvalue ``|j|^2`` (order 2, integer spectrum);
* SU(2): the Casimir ``-L_G`` with eigenvalue ``l(l+1)`` on the irrep of
  dimension ``2l+1``; the basis is ``sqrt(2l+1) D^l_{ab}`` with entries in
  row-major (lexicographic) order.

Both manifolds carry the normalized measure (total volume 1).
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

__all__ = [
    "Manifold",
    "Level",
    "Partition",
    "QuadratureGrid",
    "WeylReport",
    "parse_manifold",
    "enumerate_partition",
    "eval_basis",
    "basis_values",
    "wigner_small_d",
    "wigner_D",
    "su2_matrix",
    "euler_angles",
    "build_quadrature",
    "max_grid_nodes",
    "weyl_check",
]

SUPPORTED = ("torus1", "torus2", "torus3", "su2")
MAX_TWO_L = 40
DEFAULT_MAX_GRID = 8000


@dataclass(frozen=True)
class Manifold:
    kind: str  # "torus" or "su2"
    dim: int

    @property
    def name(self) -> str:
        return "su2" if self.kind == "su2" else f"torus{self.dim}"

    def __str__(self) -> str:
        return self.name


def parse_manifold(name) -> Manifold:
    if isinstance(name, Manifold):
        return name
    key = str(name).strip().lower().replace("(", "").replace(")", "")
    key = {"t1": "torus1", "t2": "torus2", "t3": "torus3", "s3": "su2"}.get(key, key)
    if key == "su2":
        return Manifold("su2", 3)
    if key in ("torus1", "torus2", "torus3"):
        return Manifold("torus", int(key[-1]))
    raise ValueError(f"unsupported manifold {name!r}; supported backends: {', '.join(SUPPORTED)}")


@dataclass(frozen=True)
class Level:
    """One eigenspace: eigenvalue, multiplicity and basis labels.

    Torus labels are lattice vectors ``j``; SU(2) labels are triples
    ``(2l, row, col)`` with 1-based row/col.
    """

    lam: float
    dim: int
    labels: tuple
    exact: object  # int (torus) or Fraction (SU(2))
    rep2: int | None = None

    def __post_init__(self):
        if self.dim != len(self.labels) or self.dim < 1:
            raise ValueError("level dimension must equal the number of labels")
        if len(set(self.labels)) != self.dim:
            raise ValueError("level labels must be distinct")


@dataclass(frozen=True)
class Partition:
    manifold: Manifold
    order_nu: int
    levels: tuple[Level, ...]
    cutoff: float

    def __post_init__(self):
        if not self.levels:
            raise ValueError("partition has no levels")
        if self.levels[0].exact != 0:
            raise ValueError("first level must have eigenvalue 0")
        ex = [lv.exact for lv in self.levels]
        if any(b <= a for a, b in zip(ex, ex[1:])):
            raise ValueError("level eigenvalues must be strictly increasing")

    @property
    def dim_n(self) -> int:
        return self.manifold.dim

    @property
    def n_over_nu(self) -> float:
        return self.manifold.dim / self.order_nu

    def __len__(self) -> int:
        return len(self.levels)

    @cached_property
    def lambdas(self) -> np.ndarray:
        return np.array([lv.lam for lv in self.levels], dtype=float)

    @cached_property
    def dims(self) -> np.ndarray:
        return np.array([lv.dim for lv in self.levels], dtype=int)

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.dims)])

    @property
    def total_dim(self) -> int:
        return int(self.offsets[-1])

    @cached_property
    def labels(self) -> tuple:
        return tuple(lab for lv in self.levels for lab in lv.labels)

    @cached_property
    def level_of(self) -> np.ndarray:
        """Level index of every flat basis position."""
        return np.repeat(np.arange(len(self.levels)), self.dims)

    def slice(self, level_index: int) -> slice:
        return slice(int(self.offsets[level_index]), int(self.offsets[level_index + 1]))

    def flat_index(self, level_index: int, k: int) -> int:
        """Flat position of basis function ``e_level^k`` (``k`` is 1-based)."""
        lv = self.levels[level_index]
        if not 1 <= k <= lv.dim:
            raise IndexError(f"k={k} out of range [1, {lv.dim}] at level {level_index}")
        return int(self.offsets[level_index]) + k - 1

    def same_as(self, other: "Partition") -> bool:
        return self is other or self == other

    @property
    def max_lambda(self) -> float:
        return float(self.levels[-1].lam)


def _torus_levels(n: int, cutoff: float) -> list[Level]:
    kmax = math.isqrt(int(math.floor(cutoff)))
    groups: dict[int, list] = {}
    for j in itertools.product(range(-kmax, kmax + 1), repeat=n):
        s = sum(c * c for c in j)
        if s <= cutoff:
            groups.setdefault(s, []).append(j)
    return [Level(float(s), len(g), tuple(sorted(g)), s) for s, g in sorted(groups.items())]


def _su2_levels(cutoff: float) -> list[Level]:
    levels = []
    k = 0
    while Fraction(k * (k + 2), 4) <= cutoff:
        if k > MAX_TWO_L:
            raise ValueError(f"SU(2) cutoff {cutoff} needs 2l > {MAX_TWO_L}; not supported")
        lam = Fraction(k * (k + 2), 4)
        d = k + 1
        labels = tuple((k, a, b) for a in range(1, d + 1) for b in range(1, d + 1))
        levels.append(Level(float(lam), d * d, labels, lam, rep2=k))
        k += 1
    return levels


def enumerate_partition(manifold, lambda_cutoff: float, order_nu: float = 2.0) -> Partition:
    """All eigenvalue levels ``lambda <= lambda_cutoff`` of the reference Laplacian."""
    man = parse_manifold(manifold)
    if not lambda_cutoff >= 0:
        raise ValueError(f"lambda_cutoff must be non-negative, got {lambda_cutoff}")
    if order_nu != 2:
        raise ValueError("only the order-2 reference Laplacians are available (order_nu=2)")
    if man.kind == "torus":
        levels = _torus_levels(man.dim, lambda_cutoff)
    else:
        levels = _su2_levels(lambda_cutoff)
    return Partition(man, 2, tuple(levels), float(lambda_cutoff))


# --- SU(2) representation matrices -----------------------------------------

_FACT = np.array([math.factorial(i) for i in range(MAX_TWO_L + 1)], dtype=float)


def wigner_small_d(two_j: int, beta) -> np.ndarray:
    """Wigner small-d matrices ``d^j(beta)``, shape ``(N, 2j+1, 2j+1)``.

    Row/column ``a`` corresponds to magnetic number ``m = j - a``. Uses
    Wigner's factorial sum, fine for the modest ``j`` used here.
    """
    if not 0 <= two_j <= MAX_TWO_L:
        raise ValueError(f"2j must lie in [0, {MAX_TWO_L}], got {two_j}")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    c = np.cos(beta / 2)
    s = np.sin(beta / 2)
    d = two_j + 1
    out = np.zeros((beta.size, d, d))
    F = _FACT
    for a in range(d):
        for b in range(d):
            pref = math.sqrt(F[two_j - a] * F[a] * F[two_j - b] * F[b])
            acc = np.zeros(beta.size)
            for k in range(max(0, a - b), min(two_j - b, a) + 1):
                coef = (-1) ** (b - a + k) * pref / (
                    F[two_j - b - k] * F[k] * F[b - a + k] * F[a - k]
                )
                acc += coef * c ** (two_j + a - b - 2 * k) * s ** (b - a + 2 * k)
            out[:, a, b] = acc
    return out


def wigner_D(two_j: int, alpha, beta, gamma) -> np.ndarray:
    """``D^j_{m'm}(alpha, beta, gamma) = e^{-i m' alpha} d^j_{m'm}(beta) e^{-i m gamma}``.

    z-y-z Euler angles; for ``j = 1/2`` this is the SU(2) matrix itself
    (see :func:`su2_matrix`).
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    small = wigner_small_d(two_j, beta)
    m = (two_j - 2 * np.arange(two_j + 1)) / 2.0
    left = np.exp(-1j * np.outer(alpha, m))
    right = np.exp(-1j * np.outer(gamma, m))
    return left[:, :, None] * small * right[:, None, :]


def su2_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    return wigner_D(1, alpha, beta, gamma)[0]


def euler_angles(u) -> tuple[float, float, float]:
    """Euler angles ``(alpha, beta, gamma)`` of an SU(2) matrix."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-10) or abs(np.linalg.det(u) - 1) > 1e-10:
        raise ValueError("matrix is not in SU(2)")
    beta = 2.0 * math.atan2(abs(u[1, 0]), abs(u[0, 0]))
    plus = float(np.angle(u[1, 1])) if abs(u[1, 1]) > 1e-14 else 0.0
    minus = float(np.angle(u[1, 0])) if abs(u[1, 0]) > 1e-14 else 0.0
    alpha = (plus + minus) % (2 * math.pi)
    gamma = (plus - minus) % (4 * math.pi)
    # alpha is only defined mod 2pi when paired with gamma mod 4pi up to a
    # simultaneous shift; correct the sign flip the reduction may introduce
    if not np.allclose(su2_matrix(alpha, beta, gamma), u, atol=1e-9):
        gamma = (gamma + 2 * math.pi) % (4 * math.pi)
    return alpha, beta, gamma


# --- basis evaluation -------------------------------------------------------


def _points(manifold: Manifold, points) -> np.ndarray:
    width = 3 if manifold.kind == "su2" else manifold.dim
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0 or (pts.ndim == 1 and width == 1 and pts.size != 1):
        pts = pts.reshape(-1, 1)
    pts = np.atleast_2d(pts)
    if pts.shape[1] != width:
        raise ValueError(f"points on {manifold} need {width} coordinates, got shape {pts.shape}")
    return pts


def _level_values(partition: Partition, level_index: int, pts: np.ndarray) -> np.ndarray:
    lv = partition.levels[level_index]
    if partition.manifold.kind == "torus":
        J = np.array(lv.labels, dtype=float)
        return np.exp(2j * np.pi * pts @ J.T)
    d = lv.rep2 + 1
    D = wigner_D(lv.rep2, pts[:, 0], pts[:, 1], pts[:, 2])
    return math.sqrt(d) * D.reshape(pts.shape[0], d * d)


def basis_values(partition: Partition, points) -> np.ndarray:
    """Matrix of all retained basis functions at ``points``, shape ``(N, total_dim)``."""
    pts = _points(partition.manifold, points)
    return np.concatenate(
        [_level_values(partition, i, pts) for i in range(len(partition))], axis=1
    )


def eval_basis(partition: Partition, level_index: int, k: int, point) -> complex:
    """Value of ``e_level^k`` (``k`` 1-based) at a single point."""
    if not 0 <= level_index < len(partition):
        raise IndexError(f"level {level_index} out of range [0, {len(partition) - 1}]")
    partition.flat_index(level_index, k)
    pts = _points(partition.manifold, point)
    if pts.shape[0] != 1:
        raise ValueError("eval_basis takes a single point")
    return complex(_level_values(partition, level_index, pts)[0, k - 1])


# --- quadrature -------------------------------------------------------------


def max_grid_nodes() -> int:
    raw = os.environ.get("SPECMULT_MAX_GRID")
    if raw is None:
        return DEFAULT_MAX_GRID
    try:
        val = int(raw)
    except ValueError:
        raise ValueError(f"SPECMULT_MAX_GRID must be an integer, got {raw!r}") from None
    if val < 1:
        raise ValueError("SPECMULT_MAX_GRID must be positive")
    return val


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and weights exact for products of two basis functions up to ``band_limit``."""

    manifold: Manifold
    nodes: np.ndarray
    weights: np.ndarray
    band_limit: float
    shape: tuple
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def basis(self, partition: Partition) -> np.ndarray:
        """Basis matrix at the nodes (cached per partition)."""
        hit = self._cache.get(id(partition))
        if hit is None or hit[0] is not partition:
            if partition.manifold != self.manifold:
                raise ValueError(f"grid on {self.manifold} cannot evaluate a {partition.manifold} partition")
            if partition.max_lambda > self.band_limit:
                raise ValueError(
                    f"partition reaches lambda={partition.max_lambda:g} but grid band limit is {self.band_limit:g}"
                )
            hit = (partition, basis_values(partition, self.nodes))
            self._cache[id(partition)] = hit
        return hit[1]


def build_quadrature(partition_or_manifold, band_limit: float | None = None, max_nodes: int | None = None) -> QuadratureGrid:
    """Tensor-product quadrature exact for ``e * conj(e')`` with both in band.

    Torus: ``2 ceil(sqrt(B)) + 1`` uniform points per axis. SU(2): uniform
    ``alpha`` (``2L+1`` points), Gauss-Legendre in ``cos beta``, uniform
    ``gamma`` over ``[0, 4 pi)`` (``4L+1`` points), where ``L`` is the largest
    rep with ``L(L+1) <= B``.
    """
    if isinstance(partition_or_manifold, Partition):
        man = partition_or_manifold.manifold
        if band_limit is None:
            band_limit = partition_or_manifold.max_lambda
        elif band_limit < partition_or_manifold.max_lambda:
            raise ValueError(
                f"band_limit {band_limit:g} is below the largest retained eigenvalue "
                f"{partition_or_manifold.max_lambda:g}"
            )
    else:
        man = parse_manifold(partition_or_manifold)
        if band_limit is None:
            raise ValueError("band_limit is required when building from a manifold")
    if not band_limit >= 0:
        raise ValueError(f"band_limit must be non-negative, got {band_limit}")
    cap = max_grid_nodes() if max_nodes is None else max_nodes

    if man.kind == "torus":
        k = math.ceil(math.sqrt(band_limit))
        npts = 2 * k + 1
        required = npts**man.dim
        if required > cap:
            raise ValueError(f"band {band_limit:g} needs {required} grid nodes, above the cap of {cap} (SPECMULT_MAX_GRID)")
        axis = np.arange(npts) / npts
        mesh = np.meshgrid(*([axis] * man.dim), indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=1)
        weights = np.full(required, 1.0 / required)
        shape = (npts,) * man.dim
    else:
        two_l = 0
        while Fraction((two_l + 1) * (two_l + 3), 4) <= band_limit:
            two_l += 1
        na, ng = two_l + 1, 2 * two_l + 1
        nb = (two_l + 2) // 2
        required = na * nb * ng
        if required > cap:
            raise ValueError(f"band {band_limit:g} needs {required} grid nodes, above the cap of {cap} (SPECMULT_MAX_GRID)")
        x, wx = np.polynomial.legendre.leggauss(nb)
        alpha = 2 * np.pi * np.arange(na) / na
        beta = np.arccos(x)
        gamma = 4 * np.pi * np.arange(ng) / ng
        A, B, G = np.meshgrid(alpha, beta, gamma, indexing="ij")
        nodes = np.stack([A.ravel(), B.ravel(), G.ravel()], axis=1)
        W = np.broadcast_to((wx / 2.0)[None, :, None] / (na * ng), (na, nb, ng))
        weights = W.ravel().copy()
        shape = (na, nb, ng)
    return QuadratureGrid(man, nodes, weights, float(band_limit), shape)


# --- Weyl law diagnostics ---------------------------------------------------


@dataclass(frozen=True)
class WeylReport:
    fitted_C: float
    exponent_ok: bool
    n_over_nu: float
    summability: dict  # q -> "convergent" | "divergent"
    partial_sums: dict  # q -> partial sum over retained levels
    counting_ratio_min: float
    counting_ratio_max: float


def weyl_check(partition: Partition, qs=None) -> WeylReport:
    """Multiplicity bound ``d_j <= C (1 + lambda_j)^{n/nu}`` and summability rule.

    ``sum_j d_j (1 + lambda_j)^{-q}`` converges iff ``q > n/nu``; the verdict
    uses that rule, partial sums are reported as evidence only.
    """
    if len(partition) < 10:
        raise ValueError(f"weyl_check needs at least 10 levels, partition has {len(partition)}")
    lam, d = partition.lambdas, partition.dims.astype(float)
    crit = partition.n_over_nu
    ratio = d * (1.0 + lam) ** (-crit)
    half = len(ratio) // 2
    fitted_C = float(ratio.max())
    exponent_ok = bool(ratio[half:].max() <= ratio[:half].max())
    if qs is None:
        qs = (crit / 2, crit, 1.5 * crit, 2 * crit)
    summ, partial = {}, {}
    for q in qs:
        summ[q] = "convergent" if q > crit else "divergent"
        partial[q] = float(np.sum(d * (1.0 + lam) ** (-q)))
    counts = np.cumsum(d)
    top = partition.max_lambda
    window = (lam >= top / 10) & (lam > 0)
    cr = counts[window] / lam[window] ** crit
    return WeylReport(fitted_C, exponent_ok, crit, summ, partial, float(cr.min()), float(cr.max()))
