"""Curvature profiles: self-adjoint operator valued functions of a parameter.

Profiles feed the Riccati equation S' = S^2 + R(t) and the Jacobi equation
F'' + R(t) F = 0.  Evaluation is deterministic, every evaluated operator is
self-adjoint, and piecewise profiles expose their breakpoints so the
integrator can restart at discontinuities instead of stepping across them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .spaces import InnerSpace, Operator, is_self_adjoint, random_monotone_pair


class CurvatureProfile:
    """Base class: t -> self-adjoint operator on a fixed space."""

    space: InnerSpace

    def operator_at(self, t: float) -> Operator:
        return Operator(self.space, self.matrix_at(t))

    def matrix_at(self, t: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def segment_matrix_fn(self, lo: float, hi: float) -> Callable[[float], np.ndarray]:
        """Evaluator valid on [lo, hi), taking the left limit at the joint.

        Integrators restart at breakpoints; clamping keeps Runge-Kutta stage
        evaluations at exactly t = hi from picking up the next piece.
        """
        cap = hi - 1e-12 * (1.0 + abs(hi))

        def fn(t: float) -> np.ndarray:
            return self.matrix_at(min(max(t, lo), cap))

        return fn


@dataclass(frozen=True)
class PiecewiseConstantProfile(CurvatureProfile):
    """R(t) constant on [t_i, t_{i+1}); pieces given as (start, Operator)."""

    space: InnerSpace
    pieces: tuple[tuple[float, Operator], ...]

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("a piecewise profile needs at least one piece")
        starts = [p[0] for p in self.pieces]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("piece start times must be strictly increasing")
        for _, op in self.pieces:
            if op.space != self.space:
                raise ValueError("piece operator on a different space")
            if not is_self_adjoint(op, rtol=1e-10):
                raise ValueError("piece operator is not self-adjoint")

    def matrix_at(self, t: float) -> np.ndarray:
        idx = 0
        for i, (start, _) in enumerate(self.pieces):
            if t >= start:
                idx = i
        return self.pieces[idx][1].entries

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(p[0] for p in self.pieces[1:])

    def segment_matrix_fn(self, lo: float, hi: float) -> Callable[[float], np.ndarray]:
        m = self.matrix_at(0.5 * (lo + hi))
        return lambda t: m


def constant_profile(r0: Operator) -> PiecewiseConstantProfile:
    return PiecewiseConstantProfile(r0.space, ((0.0, r0),))


def step_profile(r_a: Operator, r_b: Operator, t_switch: float) -> PiecewiseConstantProfile:
    """R(t) = r_a for t < t_switch, r_b afterwards."""
    return PiecewiseConstantProfile(r_a.space, ((0.0, r_a), (t_switch, r_b)))


@dataclass(frozen=True)
class DiagonalProfile(CurvatureProfile):
    """R(t) = diag(f_1(t), ..., f_n(t)) on a diagonal-Gram space.

    Diagonal matrices are self-adjoint exactly when the Gram matrix is
    diagonal, which is enforced at construction.
    """

    space: InnerSpace
    funcs: tuple[Callable[[float], float], ...]
    breaks: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.funcs) != self.space.dim:
            raise ValueError("need one scalar function per dimension")
        g = self.space.gram
        if np.abs(g - np.diag(np.diag(g))).max() > 0.0:
            raise ValueError("diagonal profiles require a diagonal Gram matrix")

    def matrix_at(self, t: float) -> np.ndarray:
        return np.diag([f(t) for f in self.funcs])

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.breaks


@dataclass(frozen=True)
class ScalarMultipleProfile(CurvatureProfile):
    """R(t) = r(t) * A for a fixed self-adjoint A and scalar profile r."""

    space: InnerSpace
    r: Callable[[float], float]
    a: Operator
    breaks: tuple[float, ...] = ()

    def __post_init__(self):
        if self.a.space != self.space:
            raise ValueError("operator on a different space")
        if not is_self_adjoint(self.a, rtol=1e-10):
            raise ValueError("scalar-multiple profile needs a self-adjoint A")

    def matrix_at(self, t: float) -> np.ndarray:
        return self.r(t) * self.a.entries

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.breaks


def random_ordered_profiles(space: InnerSpace, seed: int, t_end: float,
                            max_pieces: int = 4, scale: float = 0.6,
                            ) -> tuple[PiecewiseConstantProfile, PiecewiseConstantProfile]:
    """Seeded pair of piecewise-constant profiles with R1(t) <= R2(t) for all t.

    Each piece is an independently generated monotone pair, so the pointwise
    order is guaranteed by construction.  Piece counts and switch times are
    drawn from the same seed stream, which keeps instances reproducible.
    """
    rng = np.random.default_rng(seed)
    n_pieces = int(rng.integers(1, max_pieces + 1))
    cuts = np.sort(rng.uniform(0.05 * t_end, 0.95 * t_end, size=n_pieces - 1))
    starts = np.r_[0.0, cuts]
    lo_pieces, hi_pieces = [], []
    for i, start in enumerate(starts):
        piece_seed = int(rng.integers(0, 2**63 - 1))
        r_lo, r_hi = random_monotone_pair(space, piece_seed, scale=scale)
        lo_pieces.append((float(start), r_lo))
        hi_pieces.append((float(start), r_hi))
    return (PiecewiseConstantProfile(space, tuple(lo_pieces)),
            PiecewiseConstantProfile(space, tuple(hi_pieces)))


def zero_profile(space: InnerSpace) -> PiecewiseConstantProfile:
    return constant_profile(Operator.zero(space))


def diag_constant_profile(space: InnerSpace, values: Sequence[float]) -> PiecewiseConstantProfile:
    return constant_profile(Operator(space, np.diag(np.asarray(values, dtype=float))))
