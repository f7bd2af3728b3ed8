"""
Invariant splitting of the linearized cocycle and bounded solves on the hyperbolic bundles.
"""
from hyperbolic.cocycle import bundle_tables, cocycle_evolve, reduced_cocycle
from hyperbolic.galerkin import GalerkinOperator, linearize, unperturbed_operator
from hyperbolic.graph_transform import (
    TransferMap,
    compute_splitting,
    graph_transform_update,
    refinement_check,
    splitting_from_graphs,
    unperturbed_splitting,
)
from hyperbolic.quadrature import graded_rule, integrate_graded, tanh_sinh_rule
from hyperbolic.rates import horizon, rate_estimate
from hyperbolic.solvers import (
    BundleSolver,
    project,
    solve_hyperbolic_direct,
    solve_stable,
    solve_unstable,
)
from hyperbolic.splitting import (
    BUNDLES,
    GraphPair,
    Rates,
    SplittingData,
    SplittingReport,
    center_rank,
    fitted_strip_width,
    invariance_defect,
    projection_defect,
    splitting_report,
)

__all__ = [
    "bundle_tables", "cocycle_evolve", "reduced_cocycle",
    "GalerkinOperator", "linearize", "unperturbed_operator",
    "TransferMap", "compute_splitting", "graph_transform_update", "refinement_check", "splitting_from_graphs",
    "unperturbed_splitting",
    "graded_rule", "integrate_graded", "tanh_sinh_rule",
    "horizon", "rate_estimate",
    "BundleSolver", "project", "solve_hyperbolic_direct", "solve_stable", "solve_unstable",
    "BUNDLES", "GraphPair", "Rates", "SplittingData", "SplittingReport", "center_rank",
    "fitted_strip_width", "invariance_defect", "projection_defect", "splitting_report",
]
