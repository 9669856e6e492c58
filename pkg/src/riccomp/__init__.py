"""Comparison checks for shape-operator ODEs on indefinite inner-product
spaces, with warped-product model spaces and 2D curvature-flux machinery."""

from .profiles import (
    CurvatureProfile,
    DiagonalProfile,
    PiecewiseConstantProfile,
    ScalarMultipleProfile,
    constant_profile,
    diag_constant_profile,
    random_ordered_profiles,
    step_profile,
    zero_profile,
)
from .riccati import (
    BlowUp,
    IntegrationControls,
    IntegrationError,
    JacobiTrajectory,
    RiccatiTrajectory,
    compare_trajectories,
    domain_bracket_check,
    integrate_jacobi,
    integrate_riccati,
    rigidity_probe,
    shape_from_jacobi,
    trace_channel,
    tube_expansion_check,
    tube_jacobi,
)
from .spaces import (
    InnerSpace,
    Operator,
    PsdResult,
    RankOneError,
    WedgeResult,
    is_self_adjoint,
    kernel_lemma_witness,
    order_leq,
    psd_check,
    random_monotone_pair,
    rank_one_decompose,
    wedge_leq,
    wedge_value,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
