from src.fem.quadrature import QuadratureRule, quadrature_rule, edge_gauss_rule
from src.fem.fields import P0VectorField, P1ScalarField, RT0Field, P0ScalarField
from src.fem.rt0 import rt0_basis_eval, eval_rt0
from src.fem.norms import l2_norm, l2_error_vs_exact
from src.fem.nonlinearity import forchheimer_drag

__all__ = [
    "QuadratureRule",
    "quadrature_rule",
    "edge_gauss_rule",
    "P0VectorField",
    "P1ScalarField",
    "RT0Field",
    "P0ScalarField",
    "rt0_basis_eval",
    "eval_rt0",
    "l2_norm",
    "l2_error_vs_exact",
    "forchheimer_drag",
]
