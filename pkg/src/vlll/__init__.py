"""Boundaries of the variable and abstract Lovasz local lemma on small instances.

Submodules: graphs (dependency graphs and event-variable bigraphs), shearer,
tree, cycle, cylinders, discrete (brute-force program), reductions, gap, cli.
"""
from .errors import CapExceededError, InapplicableError, InvalidInputError, LLLError, NonConvergenceError
from .graphs import (Bigraph, DependencyGraph, base_graph, complete_graph, cycle_graph, make_canonical_bigraph,
                     make_combinatorial_bigraph, make_cycle_bigraph, make_hstar, path_graph)
from .shearer import BoundaryResult, abstract_boundary_lambda, shearer_values
from .tree import tree_boundary_lambda, tree_witness
from .cycle import cycle_boundary_lambda, triangle_closed_form
from .cylinders import DiscreteCylinderSet, evaluate_cylinder_set
from .discrete import SearchConfig, exterior_membership, mup_bruteforce, vlll_boundary_lambda_bruteforce
from .reductions import ReductionOp, apply_reduction, normalize
from .gap import GapVerdict, classify_gap, classify_graph, numeric_gap_check

__version__ = "0.1.0"

__all__ = [
    "LLLError", "InvalidInputError", "InapplicableError", "CapExceededError", "NonConvergenceError",
    "Bigraph", "DependencyGraph", "base_graph", "complete_graph", "cycle_graph", "path_graph",
    "make_canonical_bigraph", "make_combinatorial_bigraph", "make_cycle_bigraph", "make_hstar",
    "BoundaryResult", "abstract_boundary_lambda", "shearer_values",
    "tree_boundary_lambda", "tree_witness", "cycle_boundary_lambda", "triangle_closed_form",
    "DiscreteCylinderSet", "evaluate_cylinder_set",
    "SearchConfig", "exterior_membership", "mup_bruteforce", "vlll_boundary_lambda_bruteforce",
    "ReductionOp", "apply_reduction", "normalize",
    "GapVerdict", "classify_gap", "classify_graph", "numeric_gap_check",
]
