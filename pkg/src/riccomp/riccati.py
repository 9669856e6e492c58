"""Matrix Riccati and Jacobi integration with blow-up detection.

The Riccati system S' = S^2 + R(t) governs the shape operator of a family
of parallel hypersurfaces; the linear Jacobi system F'' + R(t) F = 0 is its
regularization, with S = -F' F^{-1} wherever F is invertible.  Solutions of
the Riccati equation can escape to infinity in finite time (a focal point of
the family); the integrator detects that, confirms it by step-halving, and
brackets the escape time.

Integration uses an explicit adaptive Runge-Kutta 5(4) pair with dense
output (scipy's RK45 stepper), restarted at profile breakpoints.  After each
accepted Riccati step the state is projected back onto the self-adjoint
subspace (symmetrize G @ S), which prevents drift out of the manifold the
comparison theory lives on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import OdeSolution, RK45
from scipy.optimize import brentq

from .profiles import CurvatureProfile
from .spaces import (
    InnerSpace,
    Operator,
    order_leq,
    psd_check,
    self_adjoint_defect,
)


class IntegrationError(RuntimeError):
    """Integrator diagnostics that must never be silently swallowed."""


@dataclass(frozen=True)
class IntegrationControls:
    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float = math.inf
    escape_norm: float = 1e8
    confirm_blow_up: bool = True  # step-halving confirmation; off only for cheap probes
    max_steps: int = 400_000
    t_min_cutoff: float = 1e-3  # earliest t at which tube shape operators are formed


DEFAULT_CONTROLS = IntegrationControls()


@dataclass(frozen=True)
class BlowUp:
    t_star: float
    bracket_width: float
    norm_at_detect: float


def _segments(breaks: Sequence[float], t_end: float) -> list[tuple[float, float]]:
    cuts = sorted({b for b in breaks if 0.0 < b < t_end})
    edges = [0.0, *cuts, t_end]
    return list(zip(edges[:-1], edges[1:]))


def _spectral_norm(mat: np.ndarray) -> float:
    return float(np.linalg.norm(mat, 2))


class _StepRecorder:
    """Collects accepted steps and per-step dense interpolants."""

    def __init__(self, t0: float, y0: np.ndarray):
        self.ts = [t0]
        self.ys = [y0.copy()]
        self.interps = []

    def push(self, rk: RK45) -> None:
        self.ts.append(rk.t)
        self.ys.append(rk.y.copy())
        self.interps.append(rk.dense_output())

    def solution(self) -> Optional[OdeSolution]:
        if not self.interps:
            return None
        return OdeSolution(np.asarray(self.ts), self.interps)


def _run_stepper(rhs: Callable[[float, np.ndarray], np.ndarray],
                 t0: float, y0: np.ndarray, t1: float,
                 controls: IntegrationControls,
                 recorder: Optional[_StepRecorder],
                 postprocess: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 norm_monitor: Optional[Callable[[np.ndarray], float]] = None,
                 max_step: Optional[float] = None):
    """Drive RK45 over [t0, t1].

    Returns (status, rk) where status is "reached", or "escaped" when the
    norm monitor exceeded the escape threshold (the recorder then holds the
    offending step as its last entry).  Step failure without norm escape
    raises IntegrationError("stiff-failure ...").
    """
    rk = RK45(rhs, t0, y0, t1,
              rtol=controls.rtol, atol=controls.atol,
              max_step=controls.max_step if max_step is None else max_step)
    steps = 0
    while rk.status == "running":
        rk.step()
        steps += 1
        if steps > controls.max_steps:
            raise IntegrationError("stiff-failure: step budget exhausted")
        if rk.status == "failed":
            raise IntegrationError(
                "stiff-failure: step underflow without norm escape")
        if postprocess is not None:
            y_new = postprocess(rk.y)
            rk.y = y_new
            rk.f = rk.fun(rk.t, y_new)  # keep the FSAL stage consistent
        if recorder is not None:
            recorder.push(rk)
        if norm_monitor is not None and norm_monitor(rk.y) > controls.escape_norm:
            return "escaped", rk
    return "reached", rk


@dataclass
class RiccatiTrajectory:
    """Sampled solution of S' = S^2 + R with optional blow-up record.

    Samples are the accepted integration steps, each projected onto the
    self-adjoint subspace; ``at`` evaluates the dense output anywhere in the
    domain.  When ``blow_up`` is set, the domain ends at the last accepted
    step before the escape threshold was crossed.
    """

    profile: CurvatureProfile
    initial: Operator
    ts: np.ndarray
    operators: np.ndarray          # shape (m, n, n)
    blow_up: Optional[BlowUp]
    t_end_requested: float
    _sol: Optional[OdeSolution] = field(repr=False, default=None)

    @property
    def space(self) -> InnerSpace:
        return self.profile.space

    @property
    def domain_end(self) -> float:
        return float(self.ts[-1])

    def matrix_at(self, t: float) -> np.ndarray:
        if t < self.ts[0] - 1e-12 or t > self.domain_end + 1e-12:
            raise ValueError(f"t={t} outside trajectory domain [0, {self.domain_end}]")
        n = self.space.dim
        s = self._sol(t).reshape(n, n)
        g, gi = self.space.gram, self.space.gram_inv
        m = g @ s
        return gi @ (0.5 * (m + m.T))

    def at(self, t: float) -> Operator:
        return Operator(self.space, self.matrix_at(t))

    def matrices_at(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized dense evaluation; returns shape (len(ts), n, n)."""
        n = self.space.dim
        raw = self._sol(np.asarray(ts)).T.reshape(-1, n, n)
        g, gi = self.space.gram, self.space.gram_inv
        m = g @ raw
        return gi @ (0.5 * (m + np.transpose(m, (0, 2, 1))))

    def residual_at(self, t: float, h: float = 1e-4) -> float:
        """|S' - S^2 - R| at t, with S' from a 5-point stencil on the dense output."""
        lo, hi = self.ts[0], self.domain_end
        h = min(h, 0.25 * (hi - lo))
        t = min(max(t, lo + 2 * h), hi - 2 * h)
        f = self.matrix_at
        deriv = (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)
        s = f(t)
        rhs = s @ s + self.profile.matrix_at(t)
        return float(np.abs(deriv - rhs).max())

    def sample_norms(self) -> np.ndarray:
        return np.array([_spectral_norm(m) for m in self.operators])


def integrate_riccati(profile: CurvatureProfile, s0: Operator, t_end: float,
                      controls: IntegrationControls = DEFAULT_CONTROLS,
                      ) -> RiccatiTrajectory:
    """Integrate S' = S^2 + R(t), S(0) = s0 until t_end or blow-up.

    Blow-up is declared when the spectral norm of S exceeds
    ``controls.escape_norm`` and two reruns of the final stretch with halved
    step caps confirm the escape.  The escape time is then bracketed via the
    reciprocal-norm extrapolation 1/|S(t)| ~ (t* - t), which is accurate to
    O(1/|S|^2); the reported bracket width is 2/escape_norm <= 1e-6.
    """
    space = profile.space
    if s0.space != space:
        raise ValueError("initial operator on a different space than the profile")
    if self_adjoint_defect(s0) > 1e-10:
        raise ValueError("initial operator must be self-adjoint")
    if not t_end > 0.0:
        raise ValueError("t_end must be positive")

    n = space.dim
    g, gi = space.gram, space.gram_inv

    def symmetrize(y: np.ndarray) -> np.ndarray:
        m = g @ y.reshape(n, n)
        return (gi @ (0.5 * (m + m.T))).ravel()

    def monitor(y: np.ndarray) -> float:
        return _spectral_norm(y.reshape(n, n))

    recorder = _StepRecorder(0.0, s0.entries.ravel())
    blow_up = None
    for lo, hi in _segments(profile.breakpoints, t_end):
        seg_r = profile.segment_matrix_fn(lo, hi)

        def rhs(t, y, seg_r=seg_r):
            s = y.reshape(n, n)
            return (s @ s + seg_r(t)).ravel()

        status, rk = _run_stepper(rhs, recorder.ts[-1], recorder.ys[-1], hi,
                                  controls, recorder,
                                  postprocess=symmetrize, norm_monitor=monitor)
        if status == "escaped":
            blow_up = _confirm_blow_up(rhs, recorder, rk, controls, monitor)
            # drop the post-escape sample; the domain ends before the pole
            recorder.ts.pop()
            recorder.ys.pop()
            recorder.interps.pop()
            break

    ts = np.asarray(recorder.ts[: len(recorder.interps) + 1])
    ops = np.array([y.reshape(n, n) for y in recorder.ys[: len(ts)]])
    sol = OdeSolution(ts, recorder.interps) if recorder.interps else None
    if sol is None:
        raise IntegrationError("stiff-failure: no step could be completed")
    return RiccatiTrajectory(profile=profile, initial=s0, ts=ts, operators=ops,
                             blow_up=blow_up, t_end_requested=t_end, _sol=sol)


def _confirm_blow_up(rhs, recorder: _StepRecorder, rk: RK45,
                     controls: IntegrationControls, monitor) -> BlowUp:
    """Bracket the escape time and confirm divergence by step-halving."""
    t_prev, t_det = recorder.ts[-2], recorder.ts[-1]
    interp = recorder.interps[-1]

    def over(t):
        return monitor(interp(t)) - controls.escape_norm

    if over(t_prev) >= 0.0:  # escaped within numerical width of one sample
        t_hit = t_prev
    else:
        t_hit = brentq(over, t_prev, t_det, xtol=1e-14, rtol=8.9e-16)
    norm_hit = monitor(interp(t_hit))
    t_star = t_hit + 1.0 / norm_hit
    bracket = 2.0 / controls.escape_norm

    # two confirming reruns with halved step caps, restarted well before the pole
    ts = np.asarray(recorder.ts)
    norms = np.array([monitor(y) for y in recorder.ys])
    safe = np.nonzero(norms <= math.sqrt(controls.escape_norm))[0]
    j = int(safe[-1]) if safe.size else 0
    span = max(t_det - ts[j], 1e-12)
    horizon = t_star + bracket
    for halving in (1, 2):
        cap = span / (8.0 * 2.0 ** halving)
        status, _ = _run_stepper(rhs, float(ts[j]), recorder.ys[j].copy(), horizon,
                                 controls, recorder=None, postprocess=None,
                                 norm_monitor=monitor, max_step=cap)
        if status != "escaped":
            raise IntegrationError(
                "stiff-failure: norm escape not confirmed under step-halving")
    return BlowUp(t_star=t_star, bracket_width=bracket, norm_at_detect=norm_hit)


@dataclass
class JacobiTrajectory:
    """Sampled solution of F'' + R(t) F = 0 with located singular times.

    ``singular_times`` are the zeros of det F found by sign changes (plus a
    singular start, as happens for tubes).  The transpose-with-respect-to-
    the-form combination F* F' - (F')* F is a first integral; its drift
    measures integration quality.
    """

    profile: CurvatureProfile
    f0: np.ndarray
    f0_prime: np.ndarray
    ts: np.ndarray
    fs: np.ndarray                 # (m, n, n)
    fps: np.ndarray                # (m, n, n)
    singular_times: tuple[float, ...]
    t_end_requested: float
    tube_cutoff: float = 0.0       # shape operators only formed for t >= cutoff
    _sol: Optional[OdeSolution] = field(repr=False, default=None)

    @property
    def space(self) -> InnerSpace:
        return self.profile.space

    @property
    def domain_end(self) -> float:
        return float(self.ts[-1])

    def f_at(self, t: float) -> np.ndarray:
        n = self.space.dim
        return self._sol(t)[: n * n].reshape(n, n)

    def fp_at(self, t: float) -> np.ndarray:
        n = self.space.dim
        return self._sol(t)[n * n:].reshape(n, n)

    def det_at(self, t: float) -> float:
        return float(np.linalg.det(self.f_at(t)))

    def shape_at(self, t: float) -> Operator:
        return shape_from_jacobi(self, t)

    def wronskian_drift(self) -> float:
        """Max relative deviation of F* F' - (F')* F from its initial value."""
        g, gi = self.space.gram, self.space.gram_inv

        def wron(f, fp):
            star = lambda m: gi @ m.T @ g
            return star(f) @ fp - star(fp) @ f

        w0 = wron(self.fs[0], self.fps[0])
        scale = 1.0 + max(
            float(np.abs(self.fs[i]).max() * np.abs(self.fps[i]).max())
            for i in range(len(self.ts))
        )
        drift = max(
            float(np.abs(wron(self.fs[i], self.fps[i]) - w0).max())
            for i in range(len(self.ts))
        )
        return drift / scale


def integrate_jacobi(profile: CurvatureProfile, f0, f0_prime, t_end: float,
                     controls: IntegrationControls = DEFAULT_CONTROLS,
                     tube_cutoff: float = 0.0) -> JacobiTrajectory:
    """Integrate the linear second-order system F'' + R(t) F = 0.

    Singular times (zeros of det F) are located from sign changes on a
    refined sample of the dense output and bisected to 1e-8; a singular
    start (det F(0) = 0, as for tubes) is recorded explicitly.
    """
    space = profile.space
    n = space.dim
    f0 = np.asarray(f0, dtype=float).reshape(n, n)
    f0p = np.asarray(f0_prime, dtype=float).reshape(n, n)
    if not t_end > 0.0:
        raise ValueError("t_end must be positive")

    recorder = _StepRecorder(0.0, np.concatenate([f0.ravel(), f0p.ravel()]))
    for lo, hi in _segments(profile.breakpoints, t_end):
        seg_r = profile.segment_matrix_fn(lo, hi)

        def rhs(t, y, seg_r=seg_r):
            f = y[: n * n].reshape(n, n)
            fp = y[n * n:].reshape(n, n)
            return np.concatenate([fp.ravel(), (-(seg_r(t) @ f)).ravel()])

        _run_stepper(rhs, recorder.ts[-1], recorder.ys[-1], hi, controls, recorder)

    ts = np.asarray(recorder.ts)
    fs = np.array([y[: n * n].reshape(n, n) for y in recorder.ys])
    fps = np.array([y[n * n:].reshape(n, n) for y in recorder.ys])
    sol = recorder.solution()
    traj = JacobiTrajectory(profile=profile, f0=f0, f0_prime=f0p, ts=ts,
                            fs=fs, fps=fps, singular_times=(),
                            t_end_requested=t_end, tube_cutoff=tube_cutoff,
                            _sol=sol)
    traj.singular_times = _locate_singular_times(traj)
    return traj


def _locate_singular_times(traj: JacobiTrajectory, refine: int = 8) -> tuple[float, ...]:
    ts = traj.ts
    grid = [ts[0]]
    for a, b in zip(ts[:-1], ts[1:]):
        grid.extend(np.linspace(a, b, refine + 1)[1:])
    grid = np.asarray(grid)
    dets = np.array([traj.det_at(t) for t in grid])
    scale = max(1.0, float(np.abs(dets).max()))

    found = []
    if abs(dets[0]) <= 1e-12 * scale:
        found.append(float(grid[0]))
    sign = np.sign(dets)
    for i in range(len(grid) - 1):
        if sign[i] != 0 and sign[i + 1] != 0 and sign[i] != sign[i + 1]:
            root = brentq(traj.det_at, grid[i], grid[i + 1], xtol=1e-8)
            found.append(float(root))
        elif sign[i + 1] == 0 and abs(dets[i]) > 1e-12 * scale:
            found.append(float(grid[i + 1]))
    dedup: list[float] = []
    for t in found:
        if not dedup or t - dedup[-1] > 1e-8:
            dedup.append(t)
    return tuple(dedup)


def shape_from_jacobi(traj: JacobiTrajectory, t: float,
                      singular_margin: float = 1e-6) -> Operator:
    """S(t) = -F'(t) F(t)^{-1}, refused near singular times of F.

    The result agrees with direct Riccati integration from the same data
    wherever both are defined, and is self-adjoint up to integration error;
    the returned operator is projected exactly onto the self-adjoint
    subspace.
    """
    if t < traj.tube_cutoff:
        raise ValueError(
            f"shape operator only formed for t >= {traj.tube_cutoff} on tube data")
    for ts in traj.singular_times:
        if abs(t - ts) < singular_margin:
            raise ValueError(
                f"t={t} is within {singular_margin} of singular time {ts}")
    f = traj.f_at(t)
    fp = traj.fp_at(t)
    svals = np.linalg.svd(f, compute_uv=False)
    if svals[-1] < 1e-10 * svals[0]:
        nearest = min(traj.singular_times, key=lambda s: abs(s - t), default=None)
        raise ValueError(f"F(t) numerically singular at t={t}; "
                         f"nearest located singular time: {nearest}")
    s_raw = -np.linalg.solve(f.T, fp.T).T
    op = Operator(traj.space, s_raw)
    if self_adjoint_defect(op) > 1e-4:
        raise IntegrationError(
            "shape operator from Jacobi data lost self-adjointness")
    g, gi = traj.space.gram, traj.space.gram_inv
    m = g @ s_raw
    return Operator(traj.space, gi @ (0.5 * (m + m.T)))


@dataclass(frozen=True)
class ComparisonResult:
    status: str                    # "holds" | "violated" | "inconclusive"
    holds: bool
    min_gap_curve: tuple[np.ndarray, np.ndarray]  # (ts, min quadratic eigenvalues)
    t_common_end: float
    cause: str = ""


def compare_trajectories(t1: RiccatiTrajectory, t2: RiccatiTrajectory,
                         tol: float = 1e-7, n_grid: int = 512) -> ComparisonResult:
    """Check S1(t) <= S2(t) on the common domain of two trajectories.

    The trajectories are resampled by dense output on 512 uniform points
    plus both native step grids; at each time the least eigenvalue of
    G @ (S2 - S1) must be >= -tol.
    """
    if t1.space != t2.space:
        raise ValueError("trajectories on different spaces")
    end = min(t1.domain_end, t2.domain_end)
    if end <= 1e-12:
        return ComparisonResult("inconclusive", False,
                                (np.array([]), np.array([])), end,
                                "common domain is degenerate")
    grid = np.unique(np.concatenate([
        np.linspace(0.0, end, n_grid),
        t1.ts[t1.ts <= end],
        t2.ts[t2.ts <= end],
    ]))
    g = t1.space.gram
    diff = t2.matrices_at(grid) - t1.matrices_at(grid)
    m = g @ diff
    m = 0.5 * (m + np.transpose(m, (0, 2, 1)))
    gaps = np.linalg.eigvalsh(m)[:, 0]
    worst = float(gaps.min())
    holds = worst >= -tol
    return ComparisonResult("holds" if holds else "violated", holds,
                            (grid, gaps), end,
                            "" if holds else f"min gap eigenvalue {worst:.3e}")


def _certify_profile_order(p1: CurvatureProfile, p2: CurvatureProfile,
                           t_end: float, n_check: int = 17) -> None:
    ts = np.unique(np.concatenate([
        np.linspace(0.0, t_end, n_check),
        [b for b in (*p1.breakpoints, *p2.breakpoints) if 0 < b < t_end],
        [b + 1e-9 for b in (*p1.breakpoints, *p2.breakpoints) if 0 < b < t_end],
    ]))
    for t in ts:
        if not order_leq(p1.operator_at(t), p2.operator_at(t)):
            raise ValueError(f"profile order R1 <= R2 fails at t={t}")


@dataclass(frozen=True)
class RigidityReport:
    status: str                    # "ok" | "inconclusive"
    gap_min_eig_at_b: float
    gap_norm_at_b: float
    equal_at_b: bool
    strict_at_b: bool
    cause: str = ""


def rigidity_probe(profile1: CurvatureProfile, profile2: CurvatureProfile,
                   a1: Operator, a2: Operator, b: float,
                   controls: IntegrationControls = DEFAULT_CONTROLS,
                   equal_tol: float = 1e-9) -> RigidityReport:
    """Probe the equality case of the comparison: gap of S2 - S1 at t = b.

    Preconditions (A1 <= A2 and R1 <= R2 pointwise) are certified before
    integrating.  Blow-up before b is reported as inconclusive.  A strictly
    positive least eigenvalue at b witnesses the contrapositive of the
    rigidity statement: distinct data force a strict gap.
    """
    if not order_leq(a1, a2):
        raise ValueError("initial order A1 <= A2 fails")
    _certify_profile_order(profile1, profile2, b)
    t1 = integrate_riccati(profile1, a1, b, controls)
    t2 = integrate_riccati(profile2, a2, b, controls)
    if t1.domain_end < b - 1e-9 or t2.domain_end < b - 1e-9:
        return RigidityReport("inconclusive", math.nan, math.nan, False, False,
                              "blow-up before b")
    d = t2.matrix_at(b) - t1.matrix_at(b)
    g = t1.space.gram
    m = g @ d
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])
    gap_norm = float(np.abs(d).max())
    scale = 1.0 + _spectral_norm(t1.matrix_at(b)) + _spectral_norm(t2.matrix_at(b))
    equal = gap_norm <= equal_tol * scale
    strict = min_eig > equal_tol * scale
    return RigidityReport("ok", min_eig, gap_norm, equal, strict)


@dataclass(frozen=True)
class BracketResult:
    outer_reached: bool
    middle_reached: bool
    holds: bool


def domain_bracket_check(profiles: Sequence[CurvatureProfile],
                         inits: Sequence[Operator], b: float,
                         controls: IntegrationControls = DEFAULT_CONTROLS,
                         ) -> BracketResult:
    """Two-sided domain control: if S1 and S3 reach b, the sandwiched S2 does.

    The orders R1 <= R2 <= R3 and S1(0) <= S2(0) <= S3(0) are certified
    first; certification failure raises.
    """
    p1, p2, p3 = profiles
    s1, s2, s3 = inits
    if not (order_leq(s1, s2) and order_leq(s2, s3)):
        raise ValueError("initial sandwich S1(0) <= S2(0) <= S3(0) fails")
    _certify_profile_order(p1, p2, b)
    _certify_profile_order(p2, p3, b)
    t1 = integrate_riccati(p1, s1, b, controls)
    t3 = integrate_riccati(p3, s3, b, controls)
    outer = t1.domain_end >= b - 1e-9 and t3.domain_end >= b - 1e-9
    if not outer:
        return BracketResult(False, False, True)  # hypothesis empty, nothing to check
    t2 = integrate_riccati(p2, s2, b, controls)
    middle = t2.domain_end >= b - 1e-9
    return BracketResult(True, middle, middle)


@dataclass(frozen=True)
class TraceChannelReport:
    ts: np.ndarray                        # pointwise grid for the algebraic checks
    window_edges: np.ndarray
    trace_residual_curve: np.ndarray      # per-window residual of the trace identity
    max_trace_residual: float
    cs_slack_curve: np.ndarray            # m*tr(S^2) - (tr S)^2 >= 0
    cs_equality_times: tuple[float, ...]
    umbilic_at_equalities: bool           # S proportional to I at those times
    mean_slack_consistent: np.ndarray     # windowed slack of dH >= int(H^2 + tr R / m)
    mean_slack_printed: np.ndarray        # windowed slack of dH >= int(m H^2 + tr R)


def _gauss_nodes(a: float, b: float, order: int = 7) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def trace_channel(traj: RiccatiTrajectory, n_grid: int = 201,
                  n_windows: int = 24, eq_tol: float = 1e-8) -> TraceChannelReport:
    """Trace diagnostics of a Riccati trajectory on a definite space.

    The identity tr(S') = tr(S^2) + tr(R) is verified in its
    fundamental-theorem form on windows: tr S(b) - tr S(a) must equal the
    Gauss quadrature of tr(S^2) + tr(R) over [a, b].  That uses only values
    the integrator produced (not its own right-hand side), so the check is
    not circular, and it avoids the interpolation-noise floor that direct
    differencing of the dense output would hit.  Windows are aligned with
    profile breakpoints so each integrand piece is smooth.

    The Cauchy-Schwarz bound (tr S)^2 <= m tr(S^2) is checked pointwise,
    recording the times where equality holds to tolerance and whether S is
    a multiple of the identity there.  Both normalizations of the
    mean-curvature display are reported as windowed slack curves; neither
    is asserted, because they disagree and only the identity plus
    Cauchy-Schwarz is unambiguous.

    Indefinite spaces are refused: the Cauchy-Schwarz step needs real
    eigenvalues, which a definite form guarantees.
    """
    space = traj.space
    if not space.is_definite():
        raise ValueError("trace_channel requires a definite form on the slice block")
    m_dim = space.dim
    lo, hi = float(traj.ts[0]), traj.domain_end

    edges = np.unique(np.concatenate([
        np.linspace(lo, hi, n_windows + 1),
        [b for b in traj.profile.breakpoints if lo < b < hi],
    ]))
    residuals = np.empty(edges.size - 1)
    slack_consistent = np.empty(edges.size - 1)
    slack_printed = np.empty(edges.size - 1)
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        xs, ws = _gauss_nodes(a, b)
        mats = traj.matrices_at(xs)
        tr_s2 = np.einsum("kij,kji->k", mats, mats)
        tr_r = np.array([np.trace(traj.profile.matrix_at(float(t))) for t in xs])
        tr_s = np.einsum("kii->k", mats)
        lhs = float(np.trace(traj.matrix_at(b)) - np.trace(traj.matrix_at(a)))
        residuals[i] = abs(lhs - float(ws @ (tr_s2 + tr_r)))
        d_h = lhs / m_dim
        slack_consistent[i] = d_h - float(ws @ ((tr_s / m_dim) ** 2 + tr_r / m_dim))
        slack_printed[i] = d_h - float(ws @ (m_dim * (tr_s / m_dim) ** 2 + tr_r))

    ts = np.linspace(lo, hi, n_grid)
    mats = traj.matrices_at(ts)
    tr_s = np.einsum("kii->k", mats)
    tr_s2 = np.einsum("kij,kji->k", mats, mats)
    cs = m_dim * tr_s2 - tr_s ** 2
    eq_times = []
    umbilic_ok = True
    for i, t in enumerate(ts):
        if abs(cs[i]) <= eq_tol * (1.0 + abs(tr_s2[i])):
            eq_times.append(float(t))
            dev = np.abs(mats[i] - (tr_s[i] / m_dim) * np.eye(m_dim)).max()
            if dev > 1e-6 * (1.0 + np.abs(mats[i]).max()):
                umbilic_ok = False
    return TraceChannelReport(
        ts=ts, window_edges=edges, trace_residual_curve=residuals,
        max_trace_residual=float(residuals.max()),
        cs_slack_curve=cs, cs_equality_times=tuple(eq_times),
        umbilic_at_equalities=umbilic_ok,
        mean_slack_consistent=slack_consistent,
        mean_slack_printed=slack_printed,
    )


def tube_jacobi(p: Operator, p_perp: Operator, a_tangent: Operator,
                profile: CurvatureProfile, t_end: float,
                controls: IntegrationControls = DEFAULT_CONTROLS,
                ) -> JacobiTrajectory:
    """Jacobi integration from tube initial data F(0) = P, F'(0) = -A P + P_perp.

    P and P_perp must be complementary orthogonal projections with respect
    to the form, and A self-adjoint on the range of P.  The Riccati field of
    a tube behaves like (1/t) P_perp near the start, so only the regular
    Jacobi form is integrated; shape operators are formed downstream for
    t >= controls.t_min_cutoff only.
    """
    space = profile.space
    n = space.dim
    for name, op in (("P", p), ("P_perp", p_perp)):
        if self_adjoint_defect(op) > 1e-10:
            raise ValueError(f"{name} is not self-adjoint w.r.t. the form")
        if np.abs(op.entries @ op.entries - op.entries).max() > 1e-10:
            raise ValueError(f"{name} is not idempotent")
    if np.abs(p.entries + p_perp.entries - np.eye(n)).max() > 1e-10:
        raise ValueError("P and P_perp are not complementary (P + P_perp != I)")
    if np.abs(p.entries @ p_perp.entries).max() > 1e-10:
        raise ValueError("P and P_perp are not orthogonal projections")
    a = a_tangent.entries
    if np.abs(a - p.entries @ a @ p.entries).max() > 1e-10:
        raise ValueError("A must act on the range of P (A = P A P)")

    f0 = p.entries
    f0p = p_perp.entries - a @ p.entries
    return integrate_jacobi(profile, f0, f0p, t_end, controls,
                            tube_cutoff=controls.t_min_cutoff)


@dataclass(frozen=True)
class TubeExpansionReport:
    lhs: float                     # <F(r) X, F(r) X>
    rhs_r2: float                  # r^2 <X, X>
    rhs_inv_r2: float              # (1/r^2) <X, X>
    derivative_residual: float     # max |d/dt<FX,FX> + 2 <S F X, F X>| on the grid


def tube_expansion_check(traj: JacobiTrajectory, r: float, x,
                         n_grid: int = 33, fd_h: float = 1e-4,
                         ) -> TubeExpansionReport:
    """Growth of <F(r)X, F(r)X> against both candidate tube bounds.

    Returns the value together with r^2 <X,X> and (1/r^2) <X,X>; no side is
    asserted because the flat tube F = t I realizes the r^2 growth while the
    reciprocal bound appears in the distance-tube literature.  Also verifies
    d/dt <F X, F X> = -2 <S F X, F X> by finite differences of the
    integrated curve.
    """
    space = traj.space
    x = np.asarray(x, dtype=float)
    if r <= traj.tube_cutoff:
        raise ValueError("r must exceed the tube start cutoff")
    fx = traj.f_at(r) @ x
    lhs = space.inner(fx, fx)
    xx = space.inner(x, x)

    lo = max(traj.tube_cutoff, 0.02 * traj.domain_end)
    hi = traj.domain_end - 4 * fd_h
    ts = np.linspace(lo + 4 * fd_h, hi, n_grid)

    def phi(t):
        v = traj.f_at(t) @ x
        return space.inner(v, v)

    worst = 0.0
    for t in ts:
        if any(abs(t - s) < 1e-3 for s in traj.singular_times):
            continue
        d = (-phi(t + 2 * fd_h) + 8 * phi(t + fd_h)
             - 8 * phi(t - fd_h) + phi(t - 2 * fd_h)) / (12 * fd_h)
        s_op = traj.shape_at(t)
        v = traj.f_at(t) @ x
        rhs = -2.0 * space.inner(s_op.apply(v), v)
        worst = max(worst, abs(d - rhs) / (1.0 + abs(rhs)))
    return TubeExpansionReport(lhs=lhs, rhs_r2=r * r * xx,
                               rhs_inv_r2=xx / (r * r),
                               derivative_residual=worst)
