"""Two-dimensional metrics: curvature, flux identities, and the focal ODE.

Metrics come in three normal forms: conformally flat  lam (e1 dx^2 + e2 dy^2),
Fermi  E^2 ds^2 + dt^2  with a geodesic axis at t = 0, and y-warped
e1 w(y)^2 dx^2 + e2 dy^2.  For an oriented orthonormal frame (f1, f2) with
signs (e1, e2) the Gaussian curvature K = <R(X,Y)Y,X> (X, Y orthonormal)
satisfies  K dA = e1 d(omega^1_2),  so the integral of K dA over a region
where the metric is standard near the boundary equals a pure boundary flux
of the connection form, which vanishes for a frame that is standard there.
That flux identity, its index-1 frame extension, the unit-bound focal ODE
y'' + k y = 0, and the boundary-normal length bound all live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp


@dataclass(frozen=True)
class ScalarField2D:
    """A scalar field with the partial derivatives the curvature formulas need."""

    value: Callable
    dx: Callable
    dy: Callable
    dxx: Callable
    dyy: Callable


def constant_field(c: float) -> ScalarField2D:
    f = lambda x, y: np.full_like(np.asarray(x, dtype=float), c)
    z = lambda x, y: np.zeros_like(np.asarray(x, dtype=float))
    return ScalarField2D(f, z, z, z, z)


@dataclass(frozen=True)
class ConformalMetric:
    """g = factor * (e1 dx^2 + e2 dy^2) with a positive conformal factor."""

    factor: ScalarField2D
    eps1: int = 1
    eps2: int = 1
    support_box: Optional[tuple[float, float, float, float]] = None  # flat outside

    def __post_init__(self):
        if self.eps1 not in (-1, 1) or self.eps2 not in (-1, 1):
            raise ValueError("signature signs must be +-1")
        xs, ys = np.meshgrid(np.linspace(-3, 3, 21), np.linspace(-3, 3, 21))
        lam = np.asarray(self.factor.value(xs, ys), dtype=float)
        if np.any(lam <= 0.0):
            raise ValueError("conformal factor must be positive")

    @property
    def signature(self) -> tuple[int, int]:
        return (self.eps1, self.eps2)

    def metric_matrix(self, x, y) -> np.ndarray:
        lam = np.asarray(self.factor.value(x, y), dtype=float)
        out = np.zeros(lam.shape + (2, 2))
        out[..., 0, 0] = self.eps1 * lam
        out[..., 1, 1] = self.eps2 * lam
        return out

    def area_density(self, x, y) -> np.ndarray:
        return np.asarray(self.factor.value(x, y), dtype=float)

    def curvature(self, x, y) -> np.ndarray:
        lam = np.asarray(self.factor.value(x, y), dtype=float)
        if np.any(lam <= 0.0):
            raise ValueError("degenerate metric at evaluation point")
        lx = np.asarray(self.factor.dx(x, y), dtype=float)
        ly = np.asarray(self.factor.dy(x, y), dtype=float)
        lxx = np.asarray(self.factor.dxx(x, y), dtype=float)
        lyy = np.asarray(self.factor.dyy(x, y), dtype=float)
        # phi = log(lam)/2; K = -e1 (phi_yy + e1 e2 phi_xx) / lam
        phi_xx = (lxx * lam - lx * lx) / (2.0 * lam * lam)
        phi_yy = (lyy * lam - ly * ly) / (2.0 * lam * lam)
        return -self.eps1 * (phi_yy + self.eps1 * self.eps2 * phi_xx) / lam


@dataclass(frozen=True)
class FermiMetric:
    """g = E(s,t)^2 ds^2 + dt^2 with t = 0 a unit-speed geodesic.

    ``e_field`` supplies E with its t-derivatives; the geodesic axis forces
    E(s, 0) = 1 and E_t(s, 0) = 0, checked on a grid at construction.
    """

    e_field: ScalarField2D   # partials taken as (s, t); dx = d/ds unused
    period: float

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be positive")
        ss = np.linspace(0.0, self.period, 33)
        zero = np.zeros_like(ss)
        e0 = np.asarray(self.e_field.value(ss, zero), dtype=float)
        et0 = np.asarray(self.e_field.dy(ss, zero), dtype=float)
        if np.abs(e0 - 1.0).max() > 1e-10:
            raise ValueError("Fermi form requires E(s, 0) = 1 (t = 0 is a geodesic)")
        if np.abs(et0).max() > 1e-10:
            raise ValueError("Fermi form requires E_t(s, 0) = 0")

    @property
    def signature(self) -> tuple[int, int]:
        return (1, 1)

    def metric_matrix(self, s, t) -> np.ndarray:
        e = np.asarray(self.e_field.value(s, t), dtype=float)
        out = np.zeros(e.shape + (2, 2))
        out[..., 0, 0] = e * e
        out[..., 1, 1] = 1.0
        return out

    def area_density(self, s, t) -> np.ndarray:
        return np.asarray(self.e_field.value(s, t), dtype=float)

    def curvature(self, s, t) -> np.ndarray:
        e = np.asarray(self.e_field.value(s, t), dtype=float)
        if np.any(e <= 0.0):
            raise ValueError("degenerate metric at evaluation point")
        ett = np.asarray(self.e_field.dyy(s, t), dtype=float)
        return -ett / e


@dataclass(frozen=True)
class Warped2DMetric:
    """g = e1 w(y)^2 dx^2 + e2 dy^2, standard where w = 1."""

    w: Callable
    dw: Callable
    d2w: Callable
    eps1: int = 1
    eps2: int = 1

    def __post_init__(self):
        if self.eps1 not in (-1, 1) or self.eps2 not in (-1, 1):
            raise ValueError("signature signs must be +-1")

    @property
    def signature(self) -> tuple[int, int]:
        return (self.eps1, self.eps2)

    def metric_matrix(self, x, y) -> np.ndarray:
        w = np.asarray(self.w(y), dtype=float)
        out = np.zeros(np.shape(w) + (2, 2))
        out[..., 0, 0] = self.eps1 * w * w
        out[..., 1, 1] = self.eps2
        return out

    def area_density(self, x, y) -> np.ndarray:
        return np.asarray(self.w(y), dtype=float)

    def curvature(self, x, y) -> np.ndarray:
        w = np.asarray(self.w(y), dtype=float)
        if np.any(w <= 0.0):
            raise ValueError("degenerate metric at evaluation point")
        # frame computation with the warp on the e1 block gives K = -e1 w''/w
        return -self.eps1 * np.asarray(self.d2w(y), dtype=float) / w


SurfaceMetric = Union[ConformalMetric, FermiMetric, Warped2DMetric]


def gaussian_curvature(m: SurfaceMetric, point) -> float:
    """Gaussian curvature K = <R(X,Y)Y,X> for orthonormal X, Y at a point."""
    x, y = point
    return float(np.asarray(m.curvature(np.asarray([x]), np.asarray([y])))[0])


# ---------------------------------------------------------------------------
# frames and the curvature flux


@dataclass(frozen=True)
class FrameField:
    """Oriented g-orthonormal frame in coordinate order (f1 along x, f2 along y)."""

    metric: SurfaceMetric

    def frames(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        g = self.metric.metric_matrix(np.asarray(x, dtype=float),
                                      np.asarray(y, dtype=float))
        e1, e2 = self.metric.signature
        g00, g01, g11 = g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]
        if np.any(np.sign(g00) != e1):
            raise ValueError("metric polarization changed sign along the x-axis field")
        f1 = np.zeros(g00.shape + (2,))
        f1[..., 0] = 1.0 / np.sqrt(np.abs(g00))
        coeff = g01 / g00
        v0 = -coeff
        vnorm2 = g00 * v0 * v0 + 2 * g01 * v0 + g11
        if np.any(np.sign(vnorm2) != e2):
            raise ValueError("metric polarization changed sign along the y-axis field")
        f2 = np.zeros(g00.shape + (2,))
        f2[..., 0] = v0 / np.sqrt(np.abs(vnorm2))
        f2[..., 1] = 1.0 / np.sqrt(np.abs(vnorm2))
        return f1, f2

    def orthonormality_residual(self, xs: np.ndarray, ys: np.ndarray) -> float:
        gx, gy = np.meshgrid(xs, ys)
        g = self.metric.metric_matrix(gx, gy)
        f1, f2 = self.frames(gx, gy)
        e1, e2 = self.metric.signature

        def pair(u, v):
            return np.einsum("...i,...ij,...j->...", u, g, v)

        return float(max(np.abs(pair(f1, f1) - e1).max(),
                         np.abs(pair(f2, f2) - e2).max(),
                         np.abs(pair(f1, f2)).max()))


def frame_extension(m: SurfaceMetric) -> FrameField:
    """Global oriented orthonormal frame agreeing with the standard one
    wherever the metric is standard.

    Pointwise Gram-Schmidt against g (normalization included) is smooth as
    long as the coordinate axes keep their causal character, which holds for
    perturbations supported away from the flat region; over the contractible
    plane this realizes the triviality of the orthonormal frame bundle
    constructively, covering the index-1 case where plain rescaling fails.
    """
    return FrameField(m)


def frame_connection_values(m: SurfaceMetric, frame: FrameField,
                            xs: np.ndarray, ys: np.ndarray,
                            h: float = 1e-5) -> np.ndarray:
    """|omega^1_2| of the frame on a grid where the metric is flat standard.

    Valid only where the metric is exactly standard (covariant derivative =
    coordinate derivative there); used to certify that the extended frame is
    parallel outside the support of a perturbation.
    """
    gx, gy = np.meshgrid(xs, ys)
    e1 = m.signature[0]
    g = m.metric_matrix(gx, gy)

    def omega(direction):
        if direction == "x":
            _, f2p = frame.frames(gx + h, gy)
            _, f2m = frame.frames(gx - h, gy)
        else:
            _, f2p = frame.frames(gx, gy + h)
            _, f2m = frame.frames(gx, gy - h)
        df2 = (f2p - f2m) / (2 * h)
        f1, _ = frame.frames(gx, gy)
        return e1 * np.einsum("...i,...ij,...j->...", df2, g, f1)

    return np.maximum(np.abs(omega("x")), np.abs(omega("y")))


@dataclass(frozen=True)
class GaussBonnetResult:
    interior: float
    boundary: float
    defect: float
    nx: int
    ny: int


def gauss_bonnet_defect(m: SurfaceMetric, domain: tuple[float, float, float, float],
                        nx: int, ny: Optional[int] = None,
                        boundary_nodes: int = 512,
                        flat_tol: float = 1e-12) -> GaussBonnetResult:
    """Quadrature check of  integral_D K dA = e1 * loop integral of omega^1_2.

    ``interior`` is a composite-midpoint quadrature of K dA on an nx-by-ny
    grid; ``boundary`` is e1 times the line quadrature of the connection
    form of the extended frame along the rectangle boundary (zero when the
    frame is standard there); the defect converges to zero at second order
    under grid refinement.  The metric must be standard flat near the
    boundary, otherwise the boundary term is not a pure frame flux.
    """
    if ny is None:
        ny = nx
    x0, x1, y0, y1 = domain
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    xs = x0 + (np.arange(nx) + 0.5) * hx
    ys = y0 + (np.arange(ny) + 0.5) * hy
    gx, gy = np.meshgrid(xs, ys)

    _require_flat_on_boundary(m, domain, flat_tol)

    k = m.curvature(gx, gy)
    rho = m.area_density(gx, gy)
    interior = float(np.sum(k * rho) * hx * hy)

    frame = frame_extension(m)
    e1 = m.signature[0]
    boundary = e1 * _loop_connection_integral(m, frame, domain, boundary_nodes)
    return GaussBonnetResult(interior=interior, boundary=boundary,
                             defect=interior - boundary, nx=nx, ny=ny)


def _require_flat_on_boundary(m: SurfaceMetric,
                              domain: tuple[float, float, float, float],
                              tol: float) -> None:
    x0, x1, y0, y1 = domain
    for xs, ys in _boundary_nodes(domain, 257):
        g = m.metric_matrix(xs, ys)
        e1, e2 = m.signature
        dev = max(np.abs(g[..., 0, 0] - e1).max(), np.abs(g[..., 1, 1] - e2).max(),
                  np.abs(g[..., 0, 1]).max())
        if dev > tol:
            raise ValueError(
                f"metric is not standard flat on the boundary (deviation {dev:.2e})")


def _boundary_nodes(domain, n):
    x0, x1, y0, y1 = domain
    ts = np.linspace(0.0, 1.0, n)
    yield x0 + ts * (x1 - x0), np.full(n, y0)
    yield np.full(n, x1), y0 + ts * (y1 - y0)
    yield x1 - ts * (x1 - x0), np.full(n, y1)
    yield np.full(n, x0), y1 - ts * (y1 - y0)


def _loop_connection_integral(m: SurfaceMetric, frame: FrameField, domain,
                              n_nodes: int) -> float:
    """Midpoint line quadrature of omega^1_2 around the rectangle boundary."""
    x0, x1, y0, y1 = domain
    e1 = m.signature[0]
    total = 0.0
    sides = [
        ((x0, y0), (x1, y0)),
        ((x1, y0), (x1, y1)),
        ((x1, y1), (x0, y1)),
        ((x0, y1), (x0, y0)),
    ]
    for (ax, ay), (bx, by) in sides:
        length = math.hypot(bx - ax, by - ay)
        ts = (np.arange(n_nodes) + 0.5) / n_nodes
        px = ax + ts * (bx - ax)
        py = ay + ts * (by - ay)
        tx, ty = (bx - ax) / length, (by - ay) / length
        h = 1e-6 * max(1.0, length)
        _, f2p = frame.frames(px + h * tx, py + h * ty)
        _, f2m = frame.frames(px - h * tx, py - h * ty)
        df2 = (f2p - f2m) / (2 * h)
        f1, _ = frame.frames(px, py)
        g = m.metric_matrix(px, py)
        omega = e1 * np.einsum("...i,...ij,...j->...", df2, g, f1)
        total += float(np.sum(omega) * (length / n_nodes))
    return total


# ---------------------------------------------------------------------------
# compactly supported bumps (analytic derivatives)


def _bump(u):
    """exp(-1/(1-u^2)) on |u| < 1, zero outside; C-infinity with compact support."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0 - 1e-9
    w = np.where(inside, 1.0 - u * u, 1.0)
    val = np.where(inside, np.exp(-1.0 / w), 0.0)
    return val, inside, w


def _bump_value(u):
    return _bump(u)[0]


def _bump_d1(u):
    val, inside, w = _bump(u)
    return np.where(inside, val * (-2.0 * u / (w * w)), 0.0)


def _bump_d2(u):
    val, inside, w = _bump(u)
    a = -2.0 * u / (w * w)                       # d/du of -1/w
    da = (-2.0 * w - 8.0 * u * u) / (w ** 3)     # second derivative of -1/w
    return np.where(inside, val * (a * a + da), 0.0)


def product_bump_field(amp: float, cx: float, cy: float,
                       rx: float, ry: float) -> ScalarField2D:
    """amp * B((x-cx)/rx) * B((y-cy)/ry) with analytic partials."""

    def ux(x):
        return (np.asarray(x, dtype=float) - cx) / rx

    def uy(y):
        return (np.asarray(y, dtype=float) - cy) / ry

    return ScalarField2D(
        value=lambda x, y: amp * _bump_value(ux(x)) * _bump_value(uy(y)),
        dx=lambda x, y: amp * _bump_d1(ux(x)) * _bump_value(uy(y)) / rx,
        dy=lambda x, y: amp * _bump_value(ux(x)) * _bump_d1(uy(y)) / ry,
        dxx=lambda x, y: amp * _bump_d2(ux(x)) * _bump_value(uy(y)) / rx ** 2,
        dyy=lambda x, y: amp * _bump_value(ux(x)) * _bump_d2(uy(y)) / ry ** 2,
    )


def sum_fields(fields: Sequence[ScalarField2D]) -> ScalarField2D:
    return ScalarField2D(
        value=lambda x, y: sum(f.value(x, y) for f in fields),
        dx=lambda x, y: sum(f.dx(x, y) for f in fields),
        dy=lambda x, y: sum(f.dy(x, y) for f in fields),
        dxx=lambda x, y: sum(f.dxx(x, y) for f in fields),
        dyy=lambda x, y: sum(f.dyy(x, y) for f in fields),
    )


def exp_factor_field(phi: ScalarField2D) -> ScalarField2D:
    """lam = exp(2 phi) with partials chained from phi."""
    return ScalarField2D(
        value=lambda x, y: np.exp(2.0 * phi.value(x, y)),
        dx=lambda x, y: 2.0 * phi.dx(x, y) * np.exp(2.0 * phi.value(x, y)),
        dy=lambda x, y: 2.0 * phi.dy(x, y) * np.exp(2.0 * phi.value(x, y)),
        dxx=lambda x, y: (2.0 * phi.dxx(x, y) + 4.0 * phi.dx(x, y) ** 2)
        * np.exp(2.0 * phi.value(x, y)),
        dyy=lambda x, y: (2.0 * phi.dyy(x, y) + 4.0 * phi.dy(x, y) ** 2)
        * np.exp(2.0 * phi.value(x, y)),
    )


def random_conformal_bump(seed: int, eps1: int = 1, eps2: int = 1,
                          n_bumps: Optional[int] = None) -> ConformalMetric:
    """Seeded compactly supported conformal perturbation of the flat metric.

    The factor is exp(2 phi) with phi a sum of product bumps supported well
    inside [-0.85, 0.85]^2, so the metric is exactly standard near the
    boundary of [-1, 1]^2.
    """
    rng = np.random.default_rng(seed)
    count = n_bumps if n_bumps is not None else int(rng.integers(1, 4))
    parts = []
    for _ in range(count):
        amp = float(rng.uniform(0.05, 0.2) * rng.choice([-1.0, 1.0]))
        cx, cy = rng.uniform(-0.4, 0.4, size=2)
        rx, ry = rng.uniform(0.15, 0.35, size=2)
        parts.append(product_bump_field(amp, float(cx), float(cy), float(rx), float(ry)))
    phi = sum_fields(parts)
    return ConformalMetric(factor=exp_factor_field(phi), eps1=eps1, eps2=eps2,
                           support_box=(-0.85, 0.85, -0.85, 0.85))


# ---------------------------------------------------------------------------
# the focal ODE  y'' + k(t) y = 0,  y(0) = 1, y'(0) = 0


@dataclass(frozen=True)
class KProfile:
    """Piecewise-constant coefficient 0 <= k <= 1 on [0, infinity)."""

    pieces: tuple[tuple[float, float], ...]   # (start, value)

    def __post_init__(self):
        starts = [p[0] for p in self.pieces]
        if not self.pieces or starts[0] != 0.0:
            raise ValueError("profile must start at t = 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("piece starts must increase")
        for _, v in self.pieces:
            if not 0.0 <= v <= 1.0:
                raise ValueError("k must take values in [0, 1]")

    def __call__(self, t: float) -> float:
        val = self.pieces[0][1]
        for start, v in self.pieces:
            if t >= start:
                val = v
        return val

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(p[0] for p in self.pieces[1:])


@dataclass
class CalabiSolution:
    """Solution of y'' + k y = 0, y(0)=1, y'(0)=0 up to the first zero of y.

    beta is the first positive zero (math.inf when y never vanished before
    t_max).  The unit bound on k forces 0 <= -y' <= 1 and y^2 + y'^2 <= 1 on
    [0, beta]; both are enforced on the sample grid after integration.
    """

    k: Callable[[float], float]
    beta: float
    ts: np.ndarray
    ys: np.ndarray
    yps: np.ndarray
    t_max: float

    def min_yprime(self) -> float:
        return float(self.yps.min())


def calabi_ode(k: Union[KProfile, Callable[[float], float]],
               t_max: float = 40.0, breakpoints: Sequence[float] = (),
               n_samples: int = 2001, rtol: float = 1e-12,
               atol: float = 1e-12) -> CalabiSolution:
    """Integrate the focal ODE to its first zero, bisected to 1e-8 or better.

    ``k`` must take values in [0, 1]; a KProfile supplies its own
    breakpoints, a bare callable can declare them via ``breakpoints``.
    """
    if isinstance(k, KProfile):
        breaks = k.breakpoints
    else:
        breaks = tuple(breakpoints)
        probe = np.linspace(0.0, t_max, 401)
        vals = np.array([float(k(t)) for t in probe])
        if vals.min() < -1e-12 or vals.max() > 1.0 + 1e-12:
            raise ValueError("k must take values in [0, 1]")

    edges = [0.0, *sorted(b for b in breaks if 0.0 < b < t_max), t_max]
    state = np.array([1.0, 0.0])
    t0 = 0.0
    beta = math.inf
    chunks: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []

    def zero_event(t, y):
        return y[0]

    zero_event.terminal = True
    zero_event.direction = -1.0

    for lo, hi in zip(edges[:-1], edges[1:]):
        k_mid = k  # left limit inside the piece
        cap = hi - 1e-13 * (1.0 + abs(hi))

        def rhs(t, y):
            return [y[1], -float(k_mid(min(t, cap))) * y[0]]

        res = solve_ivp(rhs, (t0, hi), state, method="RK45", rtol=rtol, atol=atol,
                        dense_output=True, events=zero_event, max_step=0.1)
        if not res.success:
            raise RuntimeError(f"focal ODE integration failed: {res.message}")
        t_hi = res.t[-1]
        sample_t = np.linspace(t0, t_hi, max(8, int(np.ceil((t_hi - t0) * 200))))
        vals = res.sol(sample_t)
        chunks.append((sample_t, vals[0], vals[1]))
        if res.t_events[0].size:
            beta = float(res.t_events[0][0])
            break
        state = res.y[:, -1]
        t0 = t_hi

    ts = np.concatenate([c[0] for c in chunks])
    ys = np.concatenate([c[1] for c in chunks])
    yps = np.concatenate([c[2] for c in chunks])
    order = np.argsort(ts)
    sol = CalabiSolution(k=k, beta=beta, ts=ts[order], ys=ys[order],
                         yps=yps[order], t_max=t_max)
    _enforce_calabi_invariants(sol)
    return sol


def _enforce_calabi_invariants(sol: CalabiSolution, tol: float = 1e-9) -> None:
    if sol.yps.max() > tol or sol.yps.min() < -1.0 - tol:
        raise RuntimeError("focal ODE invariant 0 <= -y' <= 1 violated")
    if (sol.ys ** 2 + sol.yps ** 2).max() > 1.0 + tol:
        raise RuntimeError("focal ODE invariant y^2 + y'^2 <= 1 violated")


@dataclass(frozen=True)
class CalabiRigidityReport:
    beta: float
    min_yprime: float
    rigid: bool                       # y' reaches -1 (within 1e-6) on [0, beta]
    t_switch: Optional[float]         # beta - pi/2 when rigid
    k_step_l1: Optional[float]        # L1 distance of k to the 0-then-1 step
    beta_ge_half_pi: Optional[bool]


def calabi_rigidity_scan(sol: CalabiSolution, rigid_tol: float = 1e-6,
                         l1_nodes: int = 200_001) -> CalabiRigidityReport:
    """Detect the equality case: y' = -1 forces the 0-then-1 step coefficient.

    When the minimum of y' on [0, beta] reaches -1 within tolerance, the
    switch time is beta - pi/2 and k must equal 0 before it and 1 after; the
    L1 distance of k to that step profile is reported.
    """
    if not math.isfinite(sol.beta):
        raise ValueError("rigidity scan needs a finite first zero")
    min_yp = sol.min_yprime()
    rigid = min_yp <= -1.0 + rigid_tol
    if not rigid:
        return CalabiRigidityReport(sol.beta, min_yp, False, None, None, None)
    t1 = sol.beta - math.pi / 2.0
    nodes = (np.arange(l1_nodes) + 0.5) * (sol.beta / l1_nodes)
    kv = np.array([float(sol.k(t)) for t in nodes])
    step = np.where(nodes < t1, 0.0, 1.0)
    l1 = float(np.abs(kv - step).sum() * (sol.beta / l1_nodes))
    return CalabiRigidityReport(sol.beta, min_yp, True, t1, l1,
                                sol.beta >= math.pi / 2.0 - 1e-9)


def random_k_profile(seed: int, strict_interior: bool = True,
                     max_pieces: int = 4, t_span: float = 8.0) -> KProfile:
    """Seeded piecewise-constant coefficient profile.

    With ``strict_interior`` the values stay in [0.05, 0.95]; the energy
    y^2 + y'^2 then decays by a provable margin, so such profiles stay
    quantitatively away from the rigid case y' = -1.
    """
    rng = np.random.default_rng(seed)
    n_pieces = int(rng.integers(1, max_pieces + 1))
    cuts = np.sort(rng.uniform(0.1, t_span, size=n_pieces - 1))
    starts = np.r_[0.0, cuts]
    lo, hi = (0.05, 0.95) if strict_interior else (0.0, 1.0)
    return KProfile(tuple((float(s), float(rng.uniform(lo, hi))) for s in starts))


def step_k_profile(t_switch: float) -> KProfile:
    """k = 0 on [0, t_switch), 1 afterwards; the rigidity profile."""
    if t_switch == 0.0:
        return KProfile(((0.0, 1.0),))
    return KProfile(((0.0, 0.0), (float(t_switch), 1.0)))


# ---------------------------------------------------------------------------
# boundary-normal length bound in Fermi form


@dataclass(frozen=True)
class LengthBoundResult:
    length: float
    total_curvature: float
    k_min: float
    k_max: float

    @property
    def bound_holds(self) -> bool:
        return self.total_curvature <= self.length + 1e-9


def geodesic_length_bound(m: FermiMetric, beta_fn: Callable[[np.ndarray], np.ndarray],
                          n_quad: int = 4096, n_k_check: tuple[int, int] = (128, 64),
                          k_tol: float = 1e-9) -> LengthBoundResult:
    """total_curvature = integral over s of -E_t(s, beta(s)), against length L.

    Requires 0 <= K <= 1 on the swept region (verified by sampling); the
    unit bound on K caps -E_t by 1, so the total is at most L, with equality
    exactly when the normal geodesics all reach the focal value y' = -1.
    """
    length = m.period
    ss = (np.arange(n_quad) + 0.5) * (length / n_quad)
    betas = np.asarray(beta_fn(ss), dtype=float)

    cs, ct = n_k_check
    s_chk = np.linspace(0.0, length, cs)
    frac = np.linspace(0.0, 1.0, ct)
    sg, fg = np.meshgrid(s_chk, frac)
    tg = fg * np.asarray(beta_fn(s_chk), dtype=float)[None, :]
    k_vals = m.curvature(sg, tg)
    k_min, k_max = float(k_vals.min()), float(k_vals.max())
    if k_min < -k_tol or k_max > 1.0 + k_tol:
        raise ValueError(
            f"curvature range violation: K in [{k_min:.3e}, {k_max:.3e}], needs [0, 1]")

    flux = -np.asarray(m.e_field.dy(ss, betas), dtype=float)
    total = float(flux.sum() * (length / n_quad))
    return LengthBoundResult(length=length, total_curvature=total,
                             k_min=k_min, k_max=k_max)


# ---------------------------------------------------------------------------
# complete one-signed-curvature metrics flat on a half-plane


@dataclass(frozen=True)
class FlatOutsideResult:
    status: str                      # "ok" | "unrealized-by-ansatz"
    metric: Optional[Warped2DMetric]
    sign: int
    complete_certificate: Optional[dict]
    cause: str = ""


def _warp_blend():
    """w = 1 on y <= 1, convex C^2 blend on [1, 2], linear growth after.

    w'' >= 0 with w >= 1 and |w'| <= 1/2, which certifies geodesic
    completeness of the warped metric.
    """
    slope = 0.5

    def sint(u):
        u = np.clip(u, 0.0, 1.0)
        return 2.5 * u ** 4 - 3.0 * u ** 5 + u ** 6

    def sstep(u):
        u = np.clip(u, 0.0, 1.0)
        return u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)

    def sstep_prime(u):
        inside = (u > 0.0) & (u < 1.0)
        return np.where(inside, 30.0 * u ** 2 * (1.0 - u) ** 2, 0.0)

    def w(y):
        y = np.asarray(y, dtype=float)
        s = np.clip(y - 1.0, 0.0, None)
        return 1.0 + slope * (sint(np.minimum(s, 1.0)) + np.clip(s - 1.0, 0.0, None))

    def dw(y):
        y = np.asarray(y, dtype=float)
        s = np.clip(y - 1.0, 0.0, None)
        return slope * np.where(s >= 1.0, 1.0, sstep(s))

    def d2w(y):
        y = np.asarray(y, dtype=float)
        s = y - 1.0
        return slope * np.where((s > 0.0) & (s < 1.0), sstep_prime(s), 0.0)

    return w, dw, d2w


def certify_curvature_sign(m: Warped2DMetric, sign: int,
                           y_lo: float = -2.0, y_hi: float = 8.0,
                           step: float = 1e-3) -> dict:
    """Grid certificate: K has the requested sign and is not identically zero."""
    ys = np.arange(y_lo, y_hi, step)
    k = np.asarray(m.curvature(np.zeros_like(ys), ys), dtype=float)
    ok_sign = bool(np.all(sign * k >= -1e-13))
    nontrivial = bool(np.abs(k).max() > 1e-9)
    return {"sign_ok": ok_sign, "not_identically_zero": nontrivial,
            "max_abs_k": float(np.abs(k).max()),
            "worst": float((sign * k).min())}


def construct_flat_outside_halfplane(sign_target: int,
                                     signature: tuple[int, int]) -> FlatOutsideResult:
    """Geodesically complete metric, standard on {y <= 1}, with one-signed K.

    The ansatz warps the dx^2 block by a convex w(y): then K = -eps1 w''/w,
    so only the sign opposite to eps1 is reachable; a concave warp that
    starts flat at y = 1 must eventually cross zero, so the other sign
    admits no completeness certificate in this family and is reported as
    unrealized-by-ansatz rather than returned uncertified.
    """
    if sign_target not in (-1, 1):
        raise ValueError("sign_target must be +1 or -1")
    eps1, eps2 = signature
    if eps1 not in (-1, 1) or eps2 not in (-1, 1):
        raise ValueError("signature signs must be +-1")
    if sign_target == eps1:
        return FlatOutsideResult(
            "unrealized-by-ansatz", None, sign_target, None,
            cause=("K = -eps1 w''/w with a convex warp gives sign -eps1 only; "
                   "the concave alternative loses the completeness certificate"))
    w, dw, d2w = _warp_blend()
    metric = Warped2DMetric(w=w, dw=dw, d2w=d2w, eps1=eps1, eps2=eps2)
    cert = certify_curvature_sign(metric, sign_target)
    if not (cert["sign_ok"] and cert["not_identically_zero"]):
        raise AssertionError(f"curvature sign certification failed: {cert}")
    complete = {"w_min": 1.0, "dw_max": 0.5,
                "criterion": "warp bounded below by 1 with |w'| <= 1/2"}
    return FlatOutsideResult("ok", metric, sign_target, complete)


# ---------------------------------------------------------------------------
# grid-field text interchange


@dataclass(frozen=True)
class GridField:
    """Row-major scalar samples on a uniform grid; values[j, i] sits at
    (x0 + i dx, y0 + j dy)."""

    nx: int
    ny: int
    x0: float
    y0: float
    dx: float
    dy: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.ny, self.nx):
            raise ValueError(f"values must have shape (ny, nx) = ({self.ny}, {self.nx})")
        object.__setattr__(self, "values", v)


def write_grid_field(path, grid: GridField) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{grid.nx} {grid.ny} {grid.x0:.17g} {grid.y0:.17g} "
                 f"{grid.dx:.17g} {grid.dy:.17g}\n")
        for row in grid.values:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_grid_field(path) -> GridField:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ValueError("grid header must be: nx ny x0 y0 dx dy")
        nx, ny = int(header[0]), int(header[1])
        x0, y0, dx, dy = map(float, header[2:])
        values = np.loadtxt(fh, ndmin=2)
    if values.shape != (ny, nx):
        raise ValueError(f"expected {ny} rows of {nx} values, got {values.shape}")
    return GridField(nx=nx, ny=ny, x0=x0, y0=y0, dx=dx, dy=dy, values=values)
