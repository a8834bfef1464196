"""Heralded Dicke-state generation from linear quantum graphs.

Symbolic boson algebra, sculpting digraphs/bigraphs, circuit compilation and
exact heralded simulation.
"""

from .fock import FockPolynomial, InternalBasis, ModeLabel, TermBudgetExceeded, dicke_reference
from .graphs import build_dicke_digraph, dcc_count_formula, digraph_to_bigraph, enumerate_dccs
from .surd import Surd

__version__ = "0.1.0"

__all__ = [
    "FockPolynomial", "InternalBasis", "ModeLabel", "TermBudgetExceeded", "dicke_reference",
    "build_dicke_digraph", "dcc_count_formula", "digraph_to_bigraph", "enumerate_dccs",
    "Surd", "__version__",
]
