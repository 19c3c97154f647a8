"""MTZ model, LP export, branch-and-bound and a brute-force oracle."""
from .bnb import (LIMIT_FEASIBLE, LIMIT_NONE, OPTIMAL_STATUS, BnbNode, BnbResult,
                  extract_cycles, routes_from_arcs, solve_branch_and_bound)
from .brute import MAX_BRUTE_FORCE_N, brute_force_optimal
from .model import MilpModel, Row, build_mtz_model, export_lp
from .simplex import LPResult, solve_lp

__all__ = [
    "BnbNode", "BnbResult", "LIMIT_FEASIBLE", "LIMIT_NONE", "LPResult", "MAX_BRUTE_FORCE_N",
    "MilpModel", "OPTIMAL_STATUS", "Row", "brute_force_optimal", "build_mtz_model",
    "export_lp", "extract_cycles", "routes_from_arcs", "solve_branch_and_bound", "solve_lp",
]
