"""Leaf counts of rooted unlabelled trees and their exponential growth rates."""

from .analytics import (
    all_constants,
    critical_point,
    find_z0,
    leaf_statistics,
    normal_approx_constant,
    r_derivatives,
    rate_function,
    solve_alpha,
    solve_r,
)
from .arnold import count_A, count_L, count_L_prime, rate_report, vertex_budget
from .genfunc import CoefficientTable, LeafPolynomial, eval_h, eval_T, leaf_polynomials, otter_counts
from .precision import PrecisionContext
from .trees import (
    RootedTree,
    arnold_star_counts,
    balance_chi,
    canonical_form,
    enumerate_rooted_trees,
    leaf_count,
    parity_counts,
)

__version__ = "0.1.0"

__all__ = [
    "RootedTree",
    "canonical_form",
    "enumerate_rooted_trees",
    "leaf_count",
    "parity_counts",
    "arnold_star_counts",
    "balance_chi",
    "LeafPolynomial",
    "CoefficientTable",
    "leaf_polynomials",
    "otter_counts",
    "eval_T",
    "eval_h",
    "PrecisionContext",
    "solve_alpha",
    "solve_r",
    "r_derivatives",
    "find_z0",
    "critical_point",
    "rate_function",
    "leaf_statistics",
    "normal_approx_constant",
    "all_constants",
    "vertex_budget",
    "count_L",
    "count_L_prime",
    "count_A",
    "rate_report",
]
