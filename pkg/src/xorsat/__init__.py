"""CDCL SAT solving for cnf-xor formulas with incremental Gauss-Jordan parity reasoning."""

from .cdcl import SAT, UNKNOWN, UNSAT, SolveResult, Solver, SolverConfig, solve
from .decompose import Decomposition, build_graph, clausify_singletons, cut_vertices, decompose
from .dimacs import emit, export, parse, parse_string
from .eliminate import EliminationRecord, eliminable_vars, eliminate_all, reconstruct_model, xor_internal_vars
from .engine import UnitXorPropagator, XorEngine
from .formula import (
    CnfXorFormula,
    XorConstraint,
    eval_xor,
    lit_from_dimacs,
    lit_to_dimacs,
    mklit,
    neg,
    normalize_xor,
    substitute,
    xor_add,
)
from .preprocess import preprocess
from .tableau import AssignedTableau, DeductionResult, Equation, Tableau, XorConflict, build_tableau, init_assigned, swap

__version__ = "0.1.0"

__all__ = [
    "AssignedTableau",
    "CnfXorFormula",
    "Decomposition",
    "DeductionResult",
    "EliminationRecord",
    "Equation",
    "SAT",
    "SolveResult",
    "Solver",
    "SolverConfig",
    "Tableau",
    "UNKNOWN",
    "UNSAT",
    "UnitXorPropagator",
    "XorConflict",
    "XorConstraint",
    "XorEngine",
    "build_graph",
    "build_tableau",
    "clausify_singletons",
    "cut_vertices",
    "decompose",
    "eliminable_vars",
    "eliminate_all",
    "emit",
    "eval_xor",
    "export",
    "init_assigned",
    "lit_from_dimacs",
    "lit_to_dimacs",
    "mklit",
    "neg",
    "normalize_xor",
    "parse",
    "parse_string",
    "preprocess",
    "reconstruct_model",
    "solve",
    "substitute",
    "swap",
    "xor_add",
    "xor_internal_vars",
]
