"""Closed-form warped-product model spaces and curvature-bound checks.

A warped product carries the metric w(t)^2 g + eps dt^2 over a fiber of
constant curvature.  Its parallel slices are umbilic with Weingarten
coefficient -w'/w, the tidal operator along the normal is -w''/w times the
identity, and fiber-tangent planes see the sectional value
(K0 - eps w'^2) / w^2.  The module tabulates the six constant-curvature
model rows realized this way, the half-space and strip models, the signed
product and cosh-warped examples, and the one-sided curvature-bound
predicate  <R(X,Y)Y,X> >= K0 (<X,X><Y,Y> - <X,Y>^2)  checked by stratified
sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

WARP_FD_STEP = 1e-6
WARP_FD_TOL = 1e-6


@dataclass(frozen=True)
class WarpFunction:
    """Scalar warp supplied as a (w, w', w'') triple on an interval.

    Derivative consistency is gated by finite differences at construction,
    which catches transcription errors without a symbolic dependency.
    """

    w: Callable[[np.ndarray], np.ndarray]
    dw: Callable[[np.ndarray], np.ndarray]
    d2w: Callable[[np.ndarray], np.ndarray]
    t_lo: float
    t_hi: float

    def __post_init__(self):
        if not self.t_lo < self.t_hi:
            raise ValueError("empty warp interval")
        span = self.t_hi - self.t_lo
        ts = np.linspace(self.t_lo + 1e-9 * span, self.t_hi - 1e-9 * span, 41)
        w = np.asarray(self.w(ts), dtype=float)
        if np.any(w <= 0.0):
            raise ValueError("warp function must be positive on its interval")
        h = WARP_FD_STEP
        inner = ts[(ts > self.t_lo + 2 * h) & (ts < self.t_hi - 2 * h)]
        fd1 = (np.asarray(self.w(inner + h)) - np.asarray(self.w(inner - h))) / (2 * h)
        fd2 = (np.asarray(self.dw(inner + h)) - np.asarray(self.dw(inner - h))) / (2 * h)
        scale = 1.0 + float(np.abs(w).max())
        if np.abs(fd1 - self.dw(inner)).max() > WARP_FD_TOL * scale:
            raise ValueError("supplied w' is inconsistent with w (finite differences)")
        if np.abs(fd2 - self.d2w(inner)).max() > WARP_FD_TOL * scale:
            raise ValueError("supplied w'' is inconsistent with w' (finite differences)")

    def require_inside(self, t: float) -> None:
        if not self.t_lo <= t <= self.t_hi:
            raise ValueError(f"t={t} outside warp interval [{self.t_lo}, {self.t_hi}]")


@dataclass(frozen=True)
class WarpedModel:
    """Warped product w(t)^2 g + eps dt^2 over a constant-curvature fiber.

    The fiber is Riemannian; ambient_index is therefore 0 for eps=+1 and 1
    for eps=-1.
    """

    fiber_dim: int
    fiber_curvature: float
    warp: WarpFunction
    eps: int

    def __post_init__(self):
        if self.eps not in (-1, 1):
            raise ValueError("eps must be +1 or -1")
        if self.fiber_dim < 1:
            raise ValueError("fiber_dim must be >= 1")

    @property
    def dim(self) -> int:
        return self.fiber_dim + 1

    @property
    def ambient_index(self) -> int:
        return 0 if self.eps == 1 else 1


def slice_weingarten(m: WarpedModel, t: float) -> float:
    """Coefficient of the identity in the slice Weingarten map: -w'/w."""
    m.warp.require_inside(t)
    return -float(m.warp.dw(t)) / float(m.warp.w(t))


def normal_curvature_operator(m: WarpedModel, t: float) -> float:
    """Coefficient of the tidal operator on the slice tangent space: -w''/w."""
    m.warp.require_inside(t)
    return -float(m.warp.d2w(t)) / float(m.warp.w(t))


def ambient_sectional(m: WarpedModel, t: float) -> float:
    """Sectional value of fiber-tangent planes: (K0 - eps w'^2) / w^2."""
    w = float(m.warp.w(t))
    dw = float(m.warp.dw(t))
    return (m.fiber_curvature - m.eps * dw * dw) / (w * w)


def ricci_normal(m: WarpedModel, t: float) -> float:
    """Normal-normal Ricci value: -(n-1) w''/w with n-1 the fiber dimension."""
    m.warp.require_inside(t)
    return -m.fiber_dim * float(m.warp.d2w(t)) / float(m.warp.w(t))


def gauss_equation_residual(m: WarpedModel, t: float, x, y) -> float:
    """Residual of the slice/ambient curvature relation for tangents x, y.

    slice quadform = ambient quadform + eps (w'/w)^2 * wedge, with all three
    terms from closed forms: the slice has constant curvature K0/w^2 and the
    slice inner product is w^2 times the fiber one.
    """
    m.warp.require_inside(t)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (m.fiber_dim,) or y.shape != (m.fiber_dim,):
        raise ValueError("tangent vectors must have the fiber dimension")
    w = float(m.warp.w(t))
    dw = float(m.warp.dw(t))
    gxx = w * w * float(x @ x)
    gyy = w * w * float(y @ y)
    gxy = w * w * float(x @ y)
    wedge = gxx * gyy - gxy * gxy
    slice_quad = (m.fiber_curvature / (w * w)) * wedge
    ambient_quad = ambient_sectional(m, t) * wedge
    corr = m.eps * (dw / w) ** 2 * wedge
    return abs(slice_quad - ambient_quad - corr)


@dataclass(frozen=True)
class Table1Row:
    """One constant-curvature model row: warp, sign, and slice data.

    ``weingarten`` is the closed-form coefficient s(t) of the identity in
    the slice Weingarten map; ``ambient_curvature`` is the constant ambient
    sectional value.  The tidal coefficient -w''/w equals
    eps * ambient_curvature, so s satisfies s' = s^2 + eps * K.
    """

    row_id: int
    alpha: float
    k0_fiber: float
    eps: int
    weingarten: Callable[[float], float]
    weingarten_prime: Callable[[float], float]
    ambient_curvature: float

    def riccati_residual(self, t: float) -> float:
        s = self.weingarten(t)
        return abs(self.weingarten_prime(t) - s * s - self.eps * self.ambient_curvature)


def _row_defs():
    # row -> (k0 validator, alpha from k0, warp builder, eps, ambient K)
    def alpha_cos(k0):    # cos(alpha) = 1/sqrt(|k0|)
        return math.acos(1.0 / math.sqrt(abs(k0)))

    def alpha_cosh(k0):   # cosh(alpha) = 1/sqrt(|k0|)
        return math.acosh(1.0 / math.sqrt(abs(k0)))

    return {
        1: dict(check=lambda k0: k0 == 0.0, hint="row 1 needs flat fiber (K0 = 0)",
                alpha=lambda k0: 0.0, kind="exp-", eps=1, ambient=-1.0),
        2: dict(check=lambda k0: k0 == 0.0, hint="row 2 needs flat fiber (K0 = 0)",
                alpha=lambda k0: 0.0, kind="exp+", eps=-1, ambient=1.0),
        3: dict(check=lambda k0: k0 >= 1.0, hint="row 3 needs K0 >= 1",
                alpha=alpha_cos, kind="cos", eps=1, ambient=1.0),
        4: dict(check=lambda k0: -1.0 <= k0 < 0.0, hint="row 4 needs -1 <= K0 < 0",
                alpha=alpha_cosh, kind="cosh", eps=1, ambient=-1.0),
        5: dict(check=lambda k0: 0.0 < k0 <= 1.0, hint="row 5 needs 0 < K0 <= 1",
                alpha=alpha_cosh, kind="cosh", eps=-1, ambient=1.0),
        6: dict(check=lambda k0: k0 <= -1.0, hint="row 6 needs K0 <= -1",
                alpha=alpha_cos, kind="cos", eps=-1, ambient=-1.0),
    }


_ROW_DEFAULT_K0 = {1: 0.0, 2: 0.0, 3: 1.0, 4: -1.0, 5: 1.0, 6: -1.0}


def table1_model(row_id: int, k0: Optional[float] = None,
                 fiber_dim: int = 2) -> tuple[WarpedModel, Table1Row]:
    """Build the warped model and closed-form data for one table row."""
    defs = _row_defs()
    if row_id not in defs:
        raise ValueError("row_id must be in 1..6")
    spec = defs[row_id]
    if k0 is None:
        k0 = _ROW_DEFAULT_K0[row_id]
    if not spec["check"](k0):
        raise ValueError(f"{spec['hint']}; got K0 = {k0}")
    alpha = spec["alpha"](k0)
    kind = spec["kind"]

    if kind == "exp-":
        warp = WarpFunction(lambda t: np.exp(-t), lambda t: -np.exp(-t),
                            lambda t: np.exp(-t), -20.0, 20.0)
        s = lambda t: 1.0 + 0.0 * t
        sp = lambda t: 0.0 * t
    elif kind == "exp+":
        warp = WarpFunction(lambda t: np.exp(t), lambda t: np.exp(t),
                            lambda t: np.exp(t), -20.0, 20.0)
        s = lambda t: -1.0 + 0.0 * t
        sp = lambda t: 0.0 * t
    elif kind == "cos":
        c = math.cos(alpha)
        warp = WarpFunction(lambda t: np.cos(t + alpha) / c,
                            lambda t: -np.sin(t + alpha) / c,
                            lambda t: -np.cos(t + alpha) / c,
                            -math.pi / 2 - alpha + 1e-12, math.pi / 2 - alpha - 1e-12)
        s = lambda t: np.tan(t + alpha)
        sp = lambda t: 1.0 / np.cos(t + alpha) ** 2
    elif kind == "cosh":
        c = math.cosh(alpha)
        warp = WarpFunction(lambda t: np.cosh(t + alpha) / c,
                            lambda t: np.sinh(t + alpha) / c,
                            lambda t: np.cosh(t + alpha) / c, -20.0, 20.0)
        s = lambda t: -np.tanh(t + alpha)
        sp = lambda t: -1.0 / np.cosh(t + alpha) ** 2
    else:  # pragma: no cover
        raise AssertionError(kind)

    model = WarpedModel(fiber_dim=fiber_dim, fiber_curvature=float(k0),
                        warp=warp, eps=spec["eps"])
    row = Table1Row(row_id=row_id, alpha=alpha, k0_fiber=float(k0),
                    eps=spec["eps"], weingarten=s, weingarten_prime=sp,
                    ambient_curvature=spec["ambient"])
    # defining relation of the row parameters
    if kind == "cos":
        assert abs(math.cos(alpha) - 1.0 / math.sqrt(abs(k0))) < 1e-12
    if kind == "cosh":
        assert abs(math.cosh(alpha) - 1.0 / math.sqrt(abs(k0))) < 1e-12
    return model, row


def table1_sample_interval(row: Table1Row, margin: float = 0.2) -> tuple[float, float]:
    """A t-interval safely inside the row's domain for sampling checks."""
    if row.row_id in (3, 6):
        return (-math.pi / 2 - row.alpha + margin, math.pi / 2 - row.alpha - margin)
    return (-2.0, 2.0)


def halfspace_geodesic_length(cutoff: float = 30.0) -> float:
    """Length of the witness geodesic in the exponential half-space model.

    The model e^{2t} g - dt^2 covers only part of its constant-curvature
    ambient space; the curve t -> (sinh t, cosh t) in half-space coordinates
    has total length integral dt / cosh(t) = pi, a finite value exposing
    geodesic incompleteness.
    """
    val, _ = quad(lambda t: 1.0 / math.cosh(t), -cutoff, cutoff,
                  epsabs=1e-12, epsrel=1e-12)
    return float(val)


@dataclass(frozen=True)
class ProductExample:
    """Direct sum of constant-curvature blocks with signs: g = sum s_i g_i.

    blocks: sequence of (dimension, constant curvature w.r.t. g_i, sign).
    The curvature quadform and the inner product both split blockwise, with
    the sign entering each linearly.
    """

    blocks: tuple[tuple[int, float, int], ...]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("need at least one block")
        for d, _, s in self.blocks:
            if d < 1:
                raise ValueError("block dimension must be >= 1")
            if s not in (-1, 1):
                raise ValueError("block signs must be +1 or -1")

    @property
    def dim(self) -> int:
        return sum(d for d, _, _ in self.blocks)

    @property
    def index(self) -> int:
        return sum(d for d, _, s in self.blocks if s == -1)

    def inner_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        out = np.zeros(len(xs))
        i = 0
        for d, _, s in self.blocks:
            out += s * np.einsum("ij,ij->i", xs[:, i:i + d], ys[:, i:i + d])
            i += d
        return out

    def quadform_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        out = np.zeros(len(xs))
        i = 0
        for d, k, s in self.blocks:
            xb, yb = xs[:, i:i + d], ys[:, i:i + d]
            xx = np.einsum("ij,ij->i", xb, xb)
            yy = np.einsum("ij,ij->i", yb, yb)
            xy = np.einsum("ij,ij->i", xb, yb)
            out += s * k * (xx * yy - xy * xy)
            i += d
        return out


@dataclass(frozen=True)
class CoshWarpedProduct:
    """cosh-warped fiber over a negated hyperbolic base: f^2 g_F - g_H.

    The base block is negative definite of dimension base_dim; the warp
    f = cosh(rho) of the base distance satisfies Hess f = -f g_B and
    |grad f|^2_B = -(f^2 - 1), so the full curvature quadform closes in
    terms of the pointwise value of f alone.  For fiber curvature >= 1 the
    quadform dominates the wedge form, i.e. the model satisfies R >= 1.
    """

    base_dim: int
    fiber_dim: int
    fiber_curvature: float
    f_max: float = 4.0

    @property
    def dim(self) -> int:
        return self.base_dim + self.fiber_dim

    @property
    def index(self) -> int:
        return self.base_dim

    def sample_f(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(1.0, self.f_max, size=count)

    def inner_batch(self, f: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        nf = self.fiber_dim
        fib = np.einsum("ij,ij->i", xs[:, :nf], ys[:, :nf]) * f * f
        base = -np.einsum("ij,ij->i", xs[:, nf:], ys[:, nf:])
        return fib + base

    def quadform_batch(self, f: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        nf = self.fiber_dim
        v, w = xs[:, :nf], ys[:, :nf]
        xb, yb = xs[:, nf:], ys[:, nf:]
        big_p = f * f * np.einsum("ij,ij->i", v, v)
        big_q = f * f * np.einsum("ij,ij->i", w, w)
        c = f * f * np.einsum("ij,ij->i", v, w)
        p = -np.einsum("ij,ij->i", xb, xb)
        q = -np.einsum("ij,ij->i", yb, yb)
        r = -np.einsum("ij,ij->i", xb, yb)
        base_term = p * q - r * r               # base curvature +1 w.r.t. -g_H
        mixed = q * big_p + p * big_q - 2.0 * r * c
        fiber = ((self.fiber_curvature + f * f - 1.0) / (f * f)) * (big_p * big_q - c * c)
        return base_term + mixed + fiber


@dataclass(frozen=True)
class CurvatureBoundResult:
    holds: bool
    worst: float
    worst_pair: tuple[np.ndarray, np.ndarray]
    status: str
    n_samples: int


def _stratified_pairs(rng: np.random.Generator, dim: int, count: int,
                      inner_fn) -> tuple[np.ndarray, np.ndarray]:
    """Pairs of Euclidean-unit vectors covering all causal-sign combinations.

    Indefinite forms need stratified sampling to exercise every sign regime;
    strata that the signature cannot populate are skipped.
    """
    pool = rng.normal(size=(4 * count, dim))
    pool /= np.linalg.norm(pool, axis=1, keepdims=True)
    signs = np.sign(inner_fn(pool, pool))
    buckets = {s: pool[signs == s] for s in (-1.0, 0.0, 1.0) if np.any(signs == s)}
    keys = sorted(buckets, reverse=True)
    combos = [(a, b) for a in keys for b in keys]
    per = max(1, count // len(combos))
    xs_list, ys_list = [], []
    for a, b in combos:
        xa, yb = buckets[a], buckets[b]
        take = min(per, len(xa), len(yb))
        xs_list.append(xa[:take])
        ys_list.append(yb[:take])
    xs = np.vstack(xs_list)
    ys = np.vstack(ys_list)
    if len(xs) < count:  # fill the remainder without stratification
        extra = count - len(xs)
        xs = np.vstack([xs, pool[:extra]])
        ys = np.vstack([ys, pool[extra:2 * extra][::-1]])
    return xs[:count], ys[:count]


def curvature_bound_check(example, k0: float, direction: str,
                          n_samples: int = 10_000, seed: int = 1234,
                          tol: float = 1e-9) -> CurvatureBoundResult:
    """Sampled verification of the one-sided bound R >= K0 or R <= K0.

    Evaluates <R(X,Y)Y,X> - K0 (<X,X><Y,Y> - <X,Y>^2) on stratified seeded
    pairs (blockwise closed forms, no tensor machinery) and asserts the
    requested sign.  The worst signed value is reported; a run that could
    not draw enough valid samples is inconclusive, never a pass.
    """
    if direction not in (">=", "<="):
        raise ValueError("direction must be '>=' or '<='")
    rng = np.random.default_rng(seed)

    if isinstance(example, ProductExample):
        inner_fn = example.inner_batch
        xs, ys = _stratified_pairs(rng, example.dim, n_samples, inner_fn)
        quad_v = example.quadform_batch(xs, ys)
        wedge = (inner_fn(xs, xs) * inner_fn(ys, ys) - inner_fn(xs, ys) ** 2)
    elif isinstance(example, CoshWarpedProduct):
        # stratify at a representative warp value, then sample f per pair
        def inner_fn(a, b):
            return example.inner_batch(np.full(len(a), 1.7), a, b)

        xs, ys = _stratified_pairs(rng, example.dim, n_samples, inner_fn)
        f = example.sample_f(rng, len(xs))
        quad_v = example.quadform_batch(f, xs, ys)
        inner = lambda a, b: example.inner_batch(f, a, b)
        wedge = inner(xs, xs) * inner(ys, ys) - inner(xs, ys) ** 2
    elif isinstance(example, WarpedModel):
        d = example.dim

        def inner_slice(a, b, w2, eps):
            nf = example.fiber_dim
            return (w2 * np.einsum("ij,ij->i", a[:, :nf], b[:, :nf])
                    + eps * a[:, nf] * b[:, nf])

        lo, hi = example.warp.t_lo, example.warp.t_hi
        span = hi - lo
        ts = rng.uniform(lo + 0.05 * span, hi - 0.05 * span, size=n_samples)
        w = np.asarray(example.warp.w(ts), dtype=float)
        dw = np.asarray(example.warp.dw(ts), dtype=float)
        d2w = np.asarray(example.warp.d2w(ts), dtype=float)
        w2 = w * w

        def inner_fn(a, b):
            return inner_slice(a, b, np.median(w2), example.eps)

        xs, ys = _stratified_pairs(rng, d, n_samples, inner_fn)
        ts = ts[: len(xs)]
        w, dw, d2w, w2 = w[: len(xs)], dw[: len(xs)], d2w[: len(xs)], w2[: len(xs)]
        nf = example.fiber_dim
        v, vv = xs[:, :nf], ys[:, :nf]
        a, b = xs[:, nf], ys[:, nf]
        big_p = w2 * np.einsum("ij,ij->i", v, v)
        big_q = w2 * np.einsum("ij,ij->i", vv, vv)
        c = w2 * np.einsum("ij,ij->i", v, vv)
        mixed = -(d2w / w) * (b * b * big_p + a * a * big_q - 2 * a * b * c)
        fib = ((example.fiber_curvature - example.eps * dw * dw) / w2) * (
            big_p * big_q - c * c)
        quad_v = mixed + fib
        ixx = big_p + example.eps * a * a
        iyy = big_q + example.eps * b * b
        ixy = c + example.eps * a * b
        wedge = ixx * iyy - ixy * ixy
    else:
        raise TypeError(f"unsupported example type {type(example)!r}")

    vals = quad_v - k0 * wedge
    if direction == "<=":
        vals = -vals
    if len(vals) < n_samples // 2:
        return CurvatureBoundResult(False, math.nan,
                                    (np.zeros(1), np.zeros(1)), "inconclusive", len(vals))
    i = int(np.argmin(vals))
    worst = float(vals[i])
    scale = 1.0 + float(np.abs(quad_v).max() + abs(k0) * np.abs(wedge).max())
    holds = worst >= -tol * scale
    return CurvatureBoundResult(holds, worst, (xs[i], ys[i]),
                                "holds" if holds else "violated", len(vals))


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)


def _smoothstep_prime(u: np.ndarray) -> np.ndarray:
    inside = (u > 0.0) & (u < 1.0)
    return np.where(inside, 30.0 * u ** 2 * (1.0 - u) ** 2, 0.0)


def _smoothstep_integral(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return 2.5 * u ** 4 - 3.0 * u ** 5 + u ** 6


def modified_warp_example(branch: str, delta: float = 0.25, fiber_dim: int = 2,
                          t_lo: float = -4.0, t_hi: float = 6.0) -> WarpedModel:
    """Smooth warp equal to e^t for t <= 1 with modified growth beyond 1+delta.

    branch "sub": -w''/w < -1 and -(w'/w)^2 < -1 strictly for t > 1+delta
    (the model's curvature drops below the exponential comparison value);
    branch "super": both reversed.  The log-derivative w'/w is blended from
    1 to a target constant by a C^2 smoothstep on [1, 1+delta], and the
    target inequalities are certified on a grid of step 1e-3 as a
    postcondition; a grid failure is a construction defect, not an input
    error.
    """
    if branch == "sub":
        c_target = 2.0
    elif branch == "super":
        c_target = 0.5
    else:
        raise ValueError("branch must be 'sub' or 'super'")

    d = float(delta)

    def phi_prime(s):
        return 1.0 + (c_target - 1.0) * _smoothstep(s / d)

    def phi_second(s):
        return (c_target - 1.0) * _smoothstep_prime(s / d) / d

    # phi(s) = s + (c-1) * [d * Sint(min(s,d)/d) + max(s-d, 0)]
    def phi_val(s):
        s = np.asarray(s, dtype=float)
        return s + (c_target - 1.0) * (d * _smoothstep_integral(np.minimum(s, d) / d)
                                       + np.maximum(s - d, 0.0))

    def w(t):
        t = np.asarray(t, dtype=float)
        s = t - 1.0
        return np.where(t <= 1.0, np.exp(t), np.exp(1.0 + phi_val(np.maximum(s, 0.0))))

    def dw(t):
        t = np.asarray(t, dtype=float)
        s = np.maximum(t - 1.0, 0.0)
        rate = np.where(t <= 1.0, 1.0, phi_prime(s))
        return rate * w(t)

    def d2w(t):
        t = np.asarray(t, dtype=float)
        s = np.maximum(t - 1.0, 0.0)
        rate = np.where(t <= 1.0, 1.0, phi_second(s) + phi_prime(s) ** 2)
        return rate * w(t)

    warp = WarpFunction(w, dw, d2w, t_lo, t_hi)
    model = WarpedModel(fiber_dim=fiber_dim, fiber_curvature=0.0, warp=warp, eps=1)

    grid = np.arange(1.0 + d + 1e-3, t_hi, 1e-3)
    tidal = -np.asarray(d2w(grid)) / np.asarray(w(grid))
    tangent = -(np.asarray(dw(grid)) / np.asarray(w(grid))) ** 2
    if branch == "sub":
        ok = np.all(tidal < -1.0) and np.all(tangent < -1.0)
    else:
        ok = np.all(tidal > -1.0) and np.all(tangent > -1.0)
    assert ok, "modified warp construction failed its curvature grid check"
    return model


# ---------------------------------------------------------------------------
# model registry

def _parse_params(query: str) -> dict[str, float]:
    params: dict[str, float] = {}
    if not query:
        return params
    for item in query.split("&"):
        if "=" not in item:
            raise ValueError(f"malformed model parameter {item!r}")
        key, val = item.split("=", 1)
        params[key.strip()] = float(val)
    return params


def get_model(model_id: str):
    """Resolve a registry id like 'table1/row3?K0=1' to a model object."""
    base, _, query = model_id.partition("?")
    params = _parse_params(query)
    base = base.strip()
    if base.startswith("table1/row"):
        row_id = int(base.removeprefix("table1/row"))
        model, _row = table1_model(row_id, k0=params.get("K0"),
                                   fiber_dim=int(params.get("fiber_dim", 2)))
        return model
    if base == "halfspace":
        model, _ = table1_model(2, fiber_dim=int(params.get("fiber_dim", 2)))
        return model
    if base == "strip":
        model, _ = table1_model(6, k0=-1.0, fiber_dim=int(params.get("fiber_dim", 2)))
        return model
    if base == "product/S2xH2-":
        return ProductExample(((2, 1.0, 1), (2, -1.0, -1)))
    if base == "product/R2xR2-":
        return ProductExample(((2, 0.0, 1), (2, 0.0, -1)))
    if base == "coshwarp/S2overH2":
        return CoshWarpedProduct(base_dim=2, fiber_dim=2,
                                 fiber_curvature=params.get("KF", 1.0))
    if base == "modified_warp/sub":
        return modified_warp_example("sub")
    if base == "modified_warp/super":
        return modified_warp_example("super")
    raise KeyError(f"unknown model id {model_id!r}")


def list_models() -> list[tuple[str, str]]:
    return [
        ("table1/row1", "exponential warp, eps=+1: hyperbolic ambient, slice Weingarten I"),
        ("table1/row2", "exponential warp, eps=-1: half-space patch of the K=+1 Lorentzian model"),
        ("table1/row3?K0=1", "cosine warp, eps=+1: round-sphere ambient, Weingarten tan(t+a) I"),
        ("table1/row4?K0=-1", "cosh warp, eps=+1: hyperbolic ambient, Weingarten -tanh(t+a) I"),
        ("table1/row5?K0=1", "cosh warp, eps=-1: K=+1 Lorentzian ambient (de Sitter)"),
        ("table1/row6?K0=-1", "cosine warp, eps=-1: strip in the K=-1 Lorentzian model"),
        ("halfspace", "geodesically incomplete exponential half-space model (alias of row 2)"),
        ("strip", "cos^2 warped strip in the K=-1 Lorentzian model (alias of row 6)"),
        ("product/S2xH2-", "signed product: round sphere block minus hyperbolic block, R >= 0"),
        ("product/R2xR2-", "flat signed product, R identically 0"),
        ("coshwarp/S2overH2", "cosh-warped sphere fiber over negated hyperbolic base, R >= 1"),
        ("modified_warp/sub", "e^t warp modified to strict sub-exponential comparison range"),
        ("modified_warp/super", "e^t warp modified to strict super-exponential comparison range"),
    ]
