"""Conic program IR and solver backend."""
from .embed import (
    embed_complex_vector,
    embed_hermitian,
    hermitian_to_params,
    lift_complex_vector,
    params_to_hermitian,
    unembed_dual,
    unembed_hermitian,
)
from .problem import (
    ConicProblem,
    LinearConstraint,
    LinExpr,
    PsdConstraint,
    SocConstraint,
    complex_row,
    const,
    im_inner,
    re_inner,
    real_var,
    trace_inner,
)
from .solver import DEFAULT_TOL, SolveResult, SolveStats, solve

__all__ = [
    "ConicProblem",
    "LinExpr",
    "LinearConstraint",
    "SocConstraint",
    "PsdConstraint",
    "SolveResult",
    "SolveStats",
    "solve",
    "DEFAULT_TOL",
    "const",
    "re_inner",
    "im_inner",
    "complex_row",
    "trace_inner",
    "real_var",
    "embed_complex_vector",
    "lift_complex_vector",
    "hermitian_to_params",
    "params_to_hermitian",
    "embed_hermitian",
    "unembed_hermitian",
    "unembed_dual",
]
