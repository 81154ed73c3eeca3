"""Explicit constants, theorem right-hand sides and inequality checks."""
from .constants import (
    BIG_C_TABLE,
    BoundConstants,
    big_c,
    big_c_table_check,
    c1,
    c2,
    c3,
    constants,
    log_omega,
    stirling_log_bounds,
)
from .l2 import GridNotConvergedWarning, L2Estimate, l2_distance_estimate, l2_distance_exact
from .lemmas import LEMMA_NAMES, LemmaResult, chahkiev_G, lemma_suite
from .pointwise import PointwiseBounds, check_charfn_bounds, pointwise_bounds
from .theorems import (
    APPROX1_GATES,
    BoundReport,
    BoundValue,
    l2_summand_logs,
    maineq_vs_approx1,
    theorem_bounds,
)

__all__ = [
    "BIG_C_TABLE", "BoundConstants", "big_c", "big_c_table_check", "c1", "c2", "c3",
    "constants", "log_omega", "stirling_log_bounds",
    "GridNotConvergedWarning", "L2Estimate", "l2_distance_estimate", "l2_distance_exact",
    "LEMMA_NAMES", "LemmaResult", "chahkiev_G", "lemma_suite",
    "PointwiseBounds", "check_charfn_bounds", "pointwise_bounds",
    "APPROX1_GATES", "BoundReport", "BoundValue", "l2_summand_logs", "maineq_vs_approx1",
    "theorem_bounds",
]
