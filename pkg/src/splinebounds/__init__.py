"""Splines of arbitrary degree and smoothness with explicit, computable
approximation error bounds for L2, Ritz, boundary-interpolating and
reduced-space projections, in one dimension, on tensor products and on
mapped and multi-patch domains."""

from .constants import (
    BoundBreakdown,
    C_hpkr,
    C_value,
    EstimateQuery,
    c_pkr,
    check_identity,
    crossover_h,
    dof_constant,
    figure_table,
    max_smooth_bounds,
    poly_constant,
    q_bound,
    reduced_bound,
    ritz_bound,
)
from .corpus import corpus, tensor_corpus
from .errors import *  # noqa: F401,F403
from .experiments import ErrorReport, emit_figure, run_convergence, run_verify
from .geometry import bell, faa_index_set, geometry_constants, mapped_project
from .projectors import (
    build_reduced_space,
    error_norm,
    estimate_constant,
    l2_project,
    q_project,
    ritz_project,
    ritz_reduced,
)
from .spline_core import KnotSequence, SplineFunction, SplineSpace, TestFunction, uniform_knots
from .tensor import TensorSpace, tensor_l2_project, tensor_q_project, tensor_ritz_project

__version__ = "0.1.0"
