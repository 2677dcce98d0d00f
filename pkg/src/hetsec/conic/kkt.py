"""Dual-slack reconstruction for KKT verification.

For a solved problem whose constraints are all linear in a Hermitian block,
stationarity determines the PSD dual slack of that block from the linear
multipliers alone:

    max problems:  Z = -grad f + sum_i y_i grad g_i
    min problems:  Z =  grad f + sum_i y_i grad g_i

where the gradients are taken of the constraint expressions as registered
(eq: expr == 0, ineq: expr <= 0) and y_i are the multipliers reported by
:func:`hetsec.conic.solver.solve`.  Comparing the reconstruction with the
solver's own PSD dual, checking Z >= 0 and Tr(Z X) = 0 gives an
end-to-end optimality certificate.
"""
from __future__ import annotations

import numpy as np

from .problem import ConicProblem, LinearConstraint
from .solver import SolveResult


def coeffs_to_hermitian(coeffs: np.ndarray, d: int) -> np.ndarray:
    """Invert the trace pairing: the Hermitian A with Tr(A X(p)) = coeffs.p."""
    coeffs = np.asarray(coeffs, dtype=float)
    a = np.zeros((d, d), dtype=complex)
    pos = 0
    for j in range(d):
        for i in range(j):
            a[i, j] = (coeffs[pos] + 1j * coeffs[pos + 1]) / 2.0
            a[j, i] = a[i, j].conjugate()
            pos += 2
        a[j, j] = coeffs[pos]
        pos += 1
    return a


def block_gradient(problem: ConicProblem, expr, block: str) -> np.ndarray:
    """Gradient of a linear expression w.r.t. a Hermitian block, as a matrix."""
    blk = problem.blocks[block]
    coeffs = expr.terms.get(block)
    if coeffs is None:
        coeffs = np.zeros(blk.real_size)
    return coeffs_to_hermitian(coeffs, blk.dim)


def reconstruct_psd_dual(problem: ConicProblem, result: SolveResult, block: str) -> np.ndarray:
    """Stationarity-implied dual slack of a Hermitian block (see module doc).

    Only linear constraints may touch the block; a SOC constraint involving
    it would need its own conic multiplier term and is rejected.
    """
    sign = -1.0 if problem.sense == "max" else 1.0
    z = sign * block_gradient(problem, problem.objective, block)
    for c in problem.constraints:
        if isinstance(c, LinearConstraint):
            if block in c.expr.terms:
                z = z + result.duals[c.name] * block_gradient(problem, c.expr, block)
        elif getattr(c, "rows", None) is not None:
            touched = any(block in r.terms for r in c.rows) or block in c.bound.terms
            if touched:
                raise ValueError(f"block {block!r} appears in SOC {c.name!r}")
    return z
