"""Exact intertwining Laplace transformations of linear partial differential operators."""

from .errors import IltError, InputError, VerificationError
from .field import FieldTower, RationalExpr
from .operators import (
    Lpdo, PrincipalSymbol, apply, change_vars, commutator, compose, conjugate,
    factor_symbol_quadratic, principal_symbol, right_divide, symbols_equal,
)
from .text import format_operator, operator_from_json, operator_to_json, parse_expr, parse_operator
from .ilt import IltCertificate, build_transform, detect_psi, generate, h_from_factors, verify_intertwining
from .classical import (
    cascade, darboux_hyperbolic, darboux_parabolic, dini_decompose, dini_to_ilt, euler_darboux,
    gauge_as_ilt, laplace_invariants, laplace_operator, laplace_transform, lodo_euclid,
    lodo_transform_as_ilt, petren_transform, schrodinger_darboux,
)
from .solver import certify_lclm, first_order_to_ilt, kernel_check, solve_intertwining, system_residual
from .workspace import Workspace

__all__ = [
    "IltError", "InputError", "VerificationError", "FieldTower", "RationalExpr", "Lpdo",
    "PrincipalSymbol", "apply", "change_vars", "commutator", "compose", "conjugate",
    "factor_symbol_quadratic", "principal_symbol", "right_divide", "symbols_equal",
    "format_operator", "operator_from_json", "operator_to_json", "parse_expr", "parse_operator",
    "IltCertificate", "build_transform", "detect_psi", "generate", "h_from_factors",
    "verify_intertwining", "certify_lclm", "first_order_to_ilt", "kernel_check",
    "solve_intertwining", "system_residual", "Workspace", "cascade", "darboux_hyperbolic",
    "darboux_parabolic", "dini_decompose", "dini_to_ilt", "euler_darboux", "gauge_as_ilt",
    "laplace_invariants", "laplace_operator", "laplace_transform", "lodo_euclid",
    "lodo_transform_as_ilt", "petren_transform", "schrodinger_darboux",
]
