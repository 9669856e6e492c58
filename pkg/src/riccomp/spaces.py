"""Linear algebra over a real inner-product space of arbitrary index.

A space is described by a symmetric nondegenerate Gram matrix ``G``; the
inner product is ``<x, y> = x^T G y``.  An operator ``A`` is self-adjoint
when ``G @ A`` is symmetric, positive semidefinite when the quadratic form
``x -> <A x, x>`` is nonnegative, and operators are ordered by
``A <= B  iff  B - A`` is positive semidefinite.  The module also provides
the wedge-square comparison ``<Ax,x><Ay,y> - <Ax,y>^2`` evaluated on
sampled pairs, and rank-one structure recovery ``S x = sign * <x, e> e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

# Tolerances fixed at module level; downstream comparisons rely on them.
GRAM_DET_TOL = 1e-12
SELF_ADJOINT_RTOL = 1e-12
PSD_RTOL = 1e-9          # min eigenvalue of G@A >= -PSD_RTOL * (1 + norm)
RANK_ONE_SV_RTOL = 1e-10
WEDGE_PAIRS = 2000


def _as_matrix(m, n: int) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} array, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class InnerSpace:
    """Real n-dimensional space with a symmetric nondegenerate bilinear form.

    ``index`` is the number of negative eigenvalues of ``gram`` (0 means
    Riemannian/definite, 1 Lorentzian).  The default Gram matrix is
    ``diag(-1 x index, +1 x (dim - index))``.
    """

    dim: int
    index: int = 0
    gram: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if not 0 <= self.index <= self.dim:
            raise ValueError(f"index must lie in [0, {self.dim}]")
        if self.gram is None:
            g = np.diag(np.r_[-np.ones(self.index), np.ones(self.dim - self.index)])
            object.__setattr__(self, "gram", g)
        else:
            g = _as_matrix(self.gram, self.dim)
            if not np.allclose(g, g.T, rtol=0.0, atol=1e-13 * (1.0 + np.abs(g).max())):
                raise ValueError("gram matrix must be symmetric")
            if abs(np.linalg.det(g)) < GRAM_DET_TOL:
                raise ValueError("gram matrix is degenerate (|det| < 1e-12)")
            negatives = int(np.sum(np.linalg.eigvalsh(g) < 0.0))
            if negatives != self.index:
                raise ValueError(
                    f"gram has {negatives} negative eigenvalues, index says {self.index}"
                )
            object.__setattr__(self, "gram", 0.5 * (g + g.T))
        self.gram.setflags(write=False)

    @cached_property
    def gram_inv(self) -> np.ndarray:
        inv = np.linalg.inv(self.gram)
        inv.setflags(write=False)
        return inv

    def inner(self, x, y) -> float:
        """<x, y> = x^T G y."""
        return float(np.asarray(x) @ self.gram @ np.asarray(y))

    def is_definite(self) -> bool:
        return self.index in (0, self.dim)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, InnerSpace)
            and self.dim == other.dim
            and self.index == other.index
            and np.array_equal(self.gram, other.gram)
        )

    def __hash__(self):
        return hash((self.dim, self.index, self.gram.tobytes()))


@dataclass(frozen=True)
class Operator:
    """A linear map on an InnerSpace, stored as a dense real matrix."""

    space: InnerSpace
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _as_matrix(self.entries, self.space.dim))
        self.entries.setflags(write=False)

    @classmethod
    def zero(cls, space: InnerSpace) -> "Operator":
        return cls(space, np.zeros((space.dim, space.dim)))

    @classmethod
    def identity(cls, space: InnerSpace) -> "Operator":
        return cls(space, np.eye(space.dim))

    @classmethod
    def from_quadratic(cls, space: InnerSpace, sym) -> "Operator":
        """Operator G^{-1} M from a symmetric matrix M of the quadratic form.

        The result is automatically self-adjoint since G @ (G^{-1} M) = M.
        """
        m = _as_matrix(sym, space.dim)
        return cls(space, space.gram_inv @ (0.5 * (m + m.T)))

    @property
    def quad_matrix(self) -> np.ndarray:
        """The symmetric representative G @ A of the quadratic form <Ax, y>."""
        return self.space.gram @ self.entries

    def apply(self, x) -> np.ndarray:
        return self.entries @ np.asarray(x, dtype=float)

    def __add__(self, other: "Operator") -> "Operator":
        _require_same_space(self, other)
        return Operator(self.space, self.entries + other.entries)

    def __sub__(self, other: "Operator") -> "Operator":
        _require_same_space(self, other)
        return Operator(self.space, self.entries - other.entries)

    def __mul__(self, c: float) -> "Operator":
        return Operator(self.space, float(c) * self.entries)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))


def _require_same_space(a: Operator, b: Operator) -> None:
    if a.space != b.space:
        raise ValueError("operators live on different inner-product spaces")


def symmetrize_quadratic(space: InnerSpace, entries: np.ndarray) -> np.ndarray:
    """Project a matrix onto the self-adjoint subspace: symmetrize G @ A."""
    m = space.gram @ entries
    return space.gram_inv @ (0.5 * (m + m.T))


def self_adjoint_defect(a: Operator) -> float:
    """Relative asymmetry of G @ A; zero for exactly self-adjoint maps."""
    m = a.quad_matrix
    scale = 1.0 + np.abs(m).max()
    return float(np.abs(m - m.T).max() / scale)


def is_self_adjoint(a: Operator, rtol: float = SELF_ADJOINT_RTOL) -> bool:
    """True iff <Ax, y> = <x, Ay> for all x, y, i.e. G @ A is symmetric."""
    return self_adjoint_defect(a) <= rtol


def _require_self_adjoint(a: Operator, who: str) -> None:
    # integration output carries O(1e-12) asymmetry, so gate loosely here
    if self_adjoint_defect(a) > 1e-8:
        raise ValueError(f"{who}: operator is not self-adjoint")


@dataclass(frozen=True)
class PsdResult:
    psd: bool
    min_quadratic_eigenvalue: float


def psd_check(a: Operator) -> PsdResult:
    """Decide whether <Ax, x> >= 0 for all x.

    This holds iff the symmetric matrix G @ A is positive semidefinite;
    the report carries its least eigenvalue.  Tolerance: an operator counts
    PSD when that eigenvalue is >= -1e-9 * (1 + ||G @ A||), which absorbs
    ODE-integration noise in downstream comparisons.
    """
    _require_self_adjoint(a, "psd_check")
    m = a.quad_matrix
    m = 0.5 * (m + m.T)
    min_eig = float(np.linalg.eigvalsh(m)[0])
    tol = PSD_RTOL * (1.0 + float(np.linalg.norm(m, 2)))
    return PsdResult(psd=min_eig >= -tol, min_quadratic_eigenvalue=min_eig)


def order_leq(a: Operator, b: Operator) -> bool:
    """A <= B iff B - A is positive semidefinite."""
    _require_same_space(a, b)
    _require_self_adjoint(a, "order_leq")
    _require_self_adjoint(b, "order_leq")
    return psd_check(b - a).psd


def kernel_lemma_witness(a: Operator, x0) -> np.ndarray:
    """Return A @ x0 for a PSD operator with <A x0, x0> = 0.

    The returned vector has norm below tolerance scaled by ||A|| ||x0||:
    a nonnegative quadratic form vanishing at x0 forces x0 into the kernel.
    Precondition violations raise; there is no partial output.
    """
    x0 = np.asarray(x0, dtype=float)
    check = psd_check(a)
    if not check.psd:
        raise ValueError(
            f"kernel_lemma_witness: operator is not PSD "
            f"(min quadratic eigenvalue {check.min_quadratic_eigenvalue:.3e})"
        )
    scale = (1.0 + a.norm()) * (1.0 + float(np.linalg.norm(x0)) ** 2)
    q = a.space.inner(a.apply(x0), x0)
    if abs(q) > 1e-8 * scale:
        raise ValueError(f"kernel_lemma_witness: <A x0, x0> = {q:.3e} is not zero")
    return a.apply(x0)


def wedge_value(a: Operator, x, y) -> float:
    """<Ax,x><Ay,y> - <Ax,y>^2, the wedge-square quadratic form on (x, y).

    Symmetric under swapping x and y and invariant under x -> x + c*y,
    so it only depends on the decomposable element x ^ y.
    """
    _require_self_adjoint(a, "wedge_value")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = a.quad_matrix
    return float((x @ m @ x) * (y @ m @ y) - (x @ m @ y) ** 2)


def _wedge_values_batch(m: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized wedge values for row-stacked pairs; m = G @ A symmetric."""
    mx = xs @ m
    my = ys @ m
    return (
        np.einsum("ij,ij->i", mx, xs) * np.einsum("ij,ij->i", my, ys)
        - np.einsum("ij,ij->i", mx, ys) ** 2
    )


_SOBOL_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _sobol_unit_pairs(dim: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic low-discrepancy sample of Euclidean-unit vector pairs."""
    key = (dim, count)
    if key in _SOBOL_CACHE:
        return _SOBOL_CACHE[key]
    eng = qmc.Sobol(d=2 * dim, scramble=False)
    eng.fast_forward(1)  # skip the all-zeros point
    raw = eng.random(2 * count)  # headroom for rejected near-zero vectors
    z = ndtri(np.clip(raw, 1e-12, 1.0 - 1e-12))
    xs, ys = z[:, :dim], z[:, dim:]
    nx = np.linalg.norm(xs, axis=1)
    ny = np.linalg.norm(ys, axis=1)
    keep = (nx > 1e-9) & (ny > 1e-9)
    xs = (xs[keep].T / nx[keep]).T
    ys = (ys[keep].T / ny[keep]).T
    pair = (xs[:count].copy(), ys[:count].copy())
    pair[0].setflags(write=False)
    pair[1].setflags(write=False)
    _SOBOL_CACHE[key] = pair
    return pair


def _refine_pair(gap_fn: Callable[[np.ndarray, np.ndarray], float],
                 x0: np.ndarray, y0: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Coordinate descent from the worst sampled pair, on unit pairs."""
    def normed(x, y):
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        if nx < 1e-12 or ny < 1e-12:
            return None
        return x / nx, y / ny

    z = np.concatenate([x0, y0])
    n = x0.size
    best = gap_fn(x0, y0)
    h = 0.25
    while h >= 1e-4:
        # at most 3 sweeps per step size keeps the per-check cost bounded
        for _ in range(3):
            improved = False
            for i in range(2 * n):
                for s in (+h, -h):
                    trial = z.copy()
                    trial[i] += s
                    pair = normed(trial[:n], trial[n:])
                    if pair is None:
                        continue
                    val = gap_fn(*pair)
                    if val < best - 1e-15:
                        best = val
                        z = np.concatenate(pair)
                        improved = True
            if not improved:
                break
        h *= 0.5
    return best, z[:n], z[n:]


@dataclass(frozen=True)
class WedgeResult:
    holds: bool
    worst_gap: float
    worst_pair: tuple[np.ndarray, np.ndarray]
    status: str  # "holds" | "violated" | "inconclusive"
    n_samples: int


def wedge_leq(a: Operator, b: Operator,
              sampler: Optional[Callable[[int, int], tuple[np.ndarray, np.ndarray]]] = None,
              n_pairs: int = WEDGE_PAIRS,
              tol: Optional[float] = None) -> WedgeResult:
    """Check the wedge-square order on decomposables by sampling.

    Evaluates ``wedge_value(b, x, y) - wedge_value(a, x, y)`` over a
    deterministic low-discrepancy sample of unit pairs, then runs
    coordinate descent from the worst sample; the refined minimum is
    certified by re-evaluation.  Holds iff the worst gap is >= -tol.
    Exhaustive quantification over decomposables is impossible, so an
    exhausted sampler is reported as inconclusive, never as success.
    """
    _require_same_space(a, b)
    _require_self_adjoint(a, "wedge_leq")
    _require_self_adjoint(b, "wedge_leq")
    dim = a.space.dim
    if sampler is None:
        xs, ys = _sobol_unit_pairs(dim, n_pairs)
    else:
        xs, ys = sampler(n_pairs, dim)
    if len(xs) < max(8, n_pairs // 2):
        return WedgeResult(False, np.nan, (np.zeros(dim), np.zeros(dim)),
                           "inconclusive", len(xs))

    ma = 0.5 * (a.quad_matrix + a.quad_matrix.T)
    mb = 0.5 * (b.quad_matrix + b.quad_matrix.T)
    gaps = _wedge_values_batch(mb, xs, ys) - _wedge_values_batch(ma, xs, ys)
    i = int(np.argmin(gaps))

    def gap_fn(x, y):
        return float((x @ mb @ x) * (y @ mb @ y) - (x @ mb @ y) ** 2
                     - ((x @ ma @ x) * (y @ ma @ y) - (x @ ma @ y) ** 2))

    worst, wx, wy = _refine_pair(gap_fn, xs[i], ys[i])
    if tol is None:
        scale = 1.0 + float(np.linalg.norm(ma, 2) + np.linalg.norm(mb, 2)) ** 2
        tol = 1e-9 * scale
    holds = worst >= -tol
    return WedgeResult(holds, worst, (wx, wy),
                       "holds" if holds else "violated", len(xs))


class RankOneError(ValueError):
    """Raised when rank-one structure recovery fails; carries the rank found."""

    def __init__(self, rank: int, message: str):
        super().__init__(message)
        self.rank = rank


@dataclass(frozen=True)
class RankOneDecomposition:
    sign: int
    e: np.ndarray


def rank_one_decompose(s: Operator) -> RankOneDecomposition:
    """Recover (sign, e) with S x = sign * <x, e> e from a rank-one map.

    Singular values below 1e-10 * sigma_max count as zero.  Raises
    RankOneError (with the computed rank) when the numerical rank is not 1,
    and when the reconstruction does not reproduce S to relative 1e-10.
    """
    _require_self_adjoint(s, "rank_one_decompose")
    m = s.entries
    u_mat, svals, _ = np.linalg.svd(m)
    smax = svals[0] if svals.size else 0.0
    rank = int(np.sum(svals > RANK_ONE_SV_RTOL * max(smax, 1e-300)))
    if smax == 0.0:
        rank = 0
    if rank != 1:
        raise RankOneError(rank, f"operator has numerical rank {rank}, expected 1")
    u = u_mat[:, 0]
    q = s.space.gram @ u
    # entries = kappa * outer(u, G u) for a self-adjoint rank-one map
    kappa = float(u @ m @ q) / float((u @ u) * (q @ q))
    sign = 1 if kappa > 0 else -1
    e = np.sqrt(abs(kappa)) * u
    recon = sign * np.outer(e, s.space.gram @ e)
    if np.abs(recon - m).max() > 1e-10 * (1.0 + np.abs(m).max()):
        raise RankOneError(1, "rank-one reconstruction failed to match the operator")
    return RankOneDecomposition(sign=sign, e=e)


def random_self_adjoint(space: InnerSpace, rng: np.random.Generator,
                        scale: float = 1.0) -> Operator:
    """Random self-adjoint operator G^{-1} M with M symmetric Gaussian."""
    n = space.dim
    m = rng.normal(scale=scale, size=(n, n))
    return Operator.from_quadratic(space, m + m.T)


def random_psd_quadratic(space: InnerSpace, rng: np.random.Generator,
                         scale: float = 1.0) -> np.ndarray:
    """Random symmetric PSD matrix Q = scale * B^T B / dim."""
    n = space.dim
    b = rng.normal(size=(n, n))
    return scale * (b.T @ b) / n


def random_monotone_pair(space: InnerSpace, seed: int,
                         scale: float = 1.0) -> tuple[Operator, Operator]:
    """Seeded pair (A, B) with A <= B by construction.

    B = A + G^{-1} Q with Q symmetric PSD, so G @ (B - A) = Q >= 0 and both
    operators are self-adjoint.
    """
    rng = np.random.default_rng(seed)
    a = random_self_adjoint(space, rng, scale=scale)
    q = random_psd_quadratic(space, rng, scale=scale)
    b = Operator(space, a.entries + space.gram_inv @ q)
    return a, b
