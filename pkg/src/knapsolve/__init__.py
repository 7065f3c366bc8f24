"""Exponent-equation solver for compositionally described groups.

Solves equations u1^{x1} v1 ... uk^{xk} vk = 1 over groups built from
finite groups and the integers by graph products, HNN-extensions and
amalgamated products with finite associated subgroups, and finite
extensions.  Solution sets are semilinear subsets of N^X and are
returned as explicit linear-set unions.
"""

from .errors import BudgetExceededError, InputError, KnapsolveError
from .expr import ExponentExpression, parse_expr
from .finite_ext import FiniteExtBackend, solve_exponent_finite_ext
from .gp_solver import GraphProductBackend, solve_exponent_graph_product
from .groups import (
    FiniteGroup,
    IntegerGroup,
    build_backend,
    cyclic_group,
    solve_exponent,
)
from .hnn import (
    AmalgamBackend,
    HnnBackend,
    solve_exponent_amalgam,
    solve_exponent_hnn,
)
from .semilinear import LinearSet, SemilinearSet

__version__ = "0.1.0"

__all__ = [
    "AmalgamBackend",
    "BudgetExceededError",
    "ExponentExpression",
    "FiniteExtBackend",
    "FiniteGroup",
    "GraphProductBackend",
    "HnnBackend",
    "InputError",
    "IntegerGroup",
    "KnapsolveError",
    "LinearSet",
    "SemilinearSet",
    "build_backend",
    "cyclic_group",
    "parse_expr",
    "solve_exponent",
    "solve_exponent_amalgam",
    "solve_exponent_finite_ext",
    "solve_exponent_graph_product",
    "solve_exponent_hnn",
]
