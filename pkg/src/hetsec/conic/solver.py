"""Clarabel-backed solve() for the conic IR.

The IR is flattened to Clarabel's standard form

    min q.x   s.t.  A x + s = b,  s in K,

with cone order: zero (equalities), nonnegative (inequalities), one
second-order cone per SOC constraint, one PSD-triangle cone per Hermitian
PSD constraint (through the real-symmetric embedding of
:mod:`hetsec.conic.embed`).  Duals are mapped back per constraint; for PSD
constraints the dual is returned as a Hermitian matrix Z satisfying the
stationarity and complementary-slackness identities in Hermitian terms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import sparse

import clarabel

from .embed import (
    hermitian_param_entry,
    lift_complex_vector,
    params_to_hermitian,
    unembed_dual,
)
from .problem import ConicProblem, LinearConstraint, PsdConstraint, SocConstraint

DEFAULT_TOL = 1e-8


@dataclass
class SolveStats:
    iterations: int = 0
    solve_time_s: float = 0.0
    duality_gap: float = math.nan
    max_violation: float = math.nan
    raw_status: str = ""


@dataclass
class SolveResult:
    status: str  # optimal | infeasible | unbounded | numerical-failure
    objective_value: float
    primal: dict = field(default_factory=dict)
    duals: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)  # raw real parameterization
    solve_stats: SolveStats = field(default_factory=SolveStats)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _svec_rows_for_psd(block_dim: int, offset: int, size: int):
    """COO triplets mapping block params to svec of the embedded matrix.

    Yields (svec_row, param_col, coefficient) for E = [[Re,-Im],[Im,Re]] of
    the Hermitian block starting at ``offset`` in x; column-major upper
    triangle of E with sqrt(2) off-diagonal scaling (Clarabel convention).
    """
    d = block_dim
    sqrt2 = math.sqrt(2.0)
    row = 0
    triplets = []
    for j in range(2 * d):
        for i in range(j + 1):
            scale = 1.0 if i == j else sqrt2
            bi, bj = i // d, j // d  # which 2x2 super-block
            ii, jj = i % d, j % d
            if bi == bj:
                # Re X_{ii,jj}
                re_idx, _, _ = hermitian_param_entry(d, ii, jj)
                triplets.append((row, offset + re_idx, scale))
            else:
                # upper-right super-block: -Im X_{ii,jj}  (bi=0, bj=1)
                re_idx, im_idx, sign = hermitian_param_entry(d, ii, jj)
                if im_idx >= 0:
                    triplets.append((row, offset + im_idx, -sign * scale))
                # diagonal of Im X is zero: no entry
            row += 1
    return row, triplets


def solve(
    problem: ConicProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = 200,
    accept_tol: float | None = None,
) -> SolveResult:
    """Solve the conic program; statuses are returns, never exceptions.

    ``tol`` is the target handed to the interior-point backend; a run that
    stalls short of it is still reported optimal when its relative duality
    gap and scale-normalized violations stay within ``accept_tol``
    (default 10*tol, the documented certificate cushion).
    """
    # variable layout
    offsets: dict[str, int] = {}
    total = 0
    for blk in problem.blocks.values():
        offsets[blk.name] = total
        total += blk.real_size

    def expr_row(expr) -> tuple[np.ndarray, np.ndarray, float]:
        cols, vals = [], []
        for bname, coeffs in expr.terms.items():
            nz = np.nonzero(coeffs)[0]
            cols.append(nz + offsets[bname])
            vals.append(coeffs[nz])
        if cols:
            return np.concatenate(cols), np.concatenate(vals), expr.offset
        return np.zeros(0, dtype=int), np.zeros(0), expr.offset

    # assemble rows in cone order: eq, ineq, soc..., psd...
    eqs = [c for c in problem.constraints if isinstance(c, LinearConstraint) and c.equality]
    ineqs = [c for c in problem.constraints if isinstance(c, LinearConstraint) and not c.equality]
    socs = [c for c in problem.constraints if isinstance(c, SocConstraint)]
    psds = [c for c in problem.constraints if isinstance(c, PsdConstraint)]

    rows_i, cols_i, vals_i = [], [], []
    b_list = []
    row = 0

    def push(cols, vals, bval):
        nonlocal row
        rows_i.append(np.full(cols.size, row, dtype=int))
        cols_i.append(cols)
        vals_i.append(vals)
        b_list.append(bval)
        row += 1

    cones = []
    # zero cone: expr == 0  ->  A=coeffs, b=-offset
    for c in eqs:
        cols, vals, off = expr_row(c.expr)
        push(cols, vals, -off)
    if eqs:
        cones.append(clarabel.ZeroConeT(len(eqs)))
    # nonneg cone: expr <= 0  ->  s = -offset - coeffs.x >= 0
    for c in ineqs:
        cols, vals, off = expr_row(c.expr)
        push(cols, vals, -off)
    if ineqs:
        cones.append(clarabel.NonnegativeConeT(len(ineqs)))
    # SOC: s0 = bound, s_i = row_i  ->  A = -coeffs, b = offset
    soc_spans = {}
    for c in socs:
        start = row
        for e in (c.bound, *c.rows):
            cols, vals, off = expr_row(e)
            push(cols, -vals, off)
        soc_spans[c.name] = (start, row)
        cones.append(clarabel.SecondOrderConeT(1 + len(c.rows)))
    # PSD: s = svec(embed(X))  ->  A = -map, b = 0
    psd_spans = {}
    for c in psds:
        blk = problem.blocks[c.block]
        n_rows, triplets = _svec_rows_for_psd(blk.dim, offsets[c.block], total)
        start = row
        for r, col, v in triplets:
            rows_i.append(np.array([start + r]))
            cols_i.append(np.array([col]))
            vals_i.append(np.array([-v]))
        for _ in range(n_rows):
            b_list.append(0.0)
        row += n_rows
        psd_spans[c.name] = (start, row, blk.dim)
        cones.append(clarabel.PSDTriangleConeT(2 * blk.dim))

    a_mat = sparse.csc_matrix(
        (
            np.concatenate(vals_i) if vals_i else np.zeros(0),
            (
                np.concatenate(rows_i) if rows_i else np.zeros(0, dtype=int),
                np.concatenate(cols_i) if cols_i else np.zeros(0, dtype=int),
            ),
        ),
        shape=(row, total),
    )
    b_vec = np.asarray(b_list)

    sign = 1.0 if problem.sense == "min" else -1.0
    q = np.zeros(total)
    for bname, coeffs in problem.objective.terms.items():
        q[offsets[bname] : offsets[bname] + coeffs.size] += sign * coeffs

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = max_iter
    settings.tol_gap_abs = tol
    settings.tol_gap_rel = tol
    settings.tol_feas = tol

    solver = clarabel.DefaultSolver(
        sparse.csc_matrix((total, total)), q, a_mat, b_vec, cones, settings
    )
    sol = solver.solve()
    raw = str(sol.status)

    stats = SolveStats(
        iterations=int(sol.iterations),
        solve_time_s=float(sol.solve_time),
        raw_status=raw,
    )

    if raw in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        return SolveResult("infeasible", math.nan, solve_stats=stats)
    if raw in ("DualInfeasible", "AlmostDualInfeasible"):
        return SolveResult("unbounded", math.nan, solve_stats=stats)
    if raw not in ("Solved", "AlmostSolved"):
        return SolveResult("numerical-failure", math.nan, solve_stats=stats)

    x = np.asarray(sol.x)
    z = np.asarray(sol.z)

    params = {
        name: x[offsets[name] : offsets[name] + blk.real_size]
        for name, blk in problem.blocks.items()
    }
    primal: dict = {}
    for name, blk in problem.blocks.items():
        if blk.kind == "real":
            primal[name] = params[name].copy() if blk.dim > 1 else float(params[name][0])
        elif blk.kind == "complex":
            primal[name] = lift_complex_vector(params[name])
        else:
            primal[name] = params_to_hermitian(params[name], blk.dim)

    # Raw multipliers; they satisfy, on every Hermitian block,
    #   min:  grad f + sum y grad(eq) + sum lam grad(ineq) = Z
    #   max:  -grad f + sum y grad(eq) + sum lam grad(ineq) = Z
    # with lam >= 0, Z >= 0 and Tr(Z X) = 0 at the optimum.
    duals: dict = {}
    for idx, c in enumerate(eqs):
        duals[c.name] = float(z[idx])
    base = len(eqs)
    for idx, c in enumerate(ineqs):
        duals[c.name] = float(z[base + idx])
    for c in socs:
        lo, hi = soc_spans[c.name]
        duals[c.name] = z[lo:hi].copy()
    for c in psds:
        lo, hi, d = psd_spans[c.name]
        svec = z[lo:hi]
        e = np.zeros((2 * d, 2 * d))
        pos = 0
        for j in range(2 * d):
            for i in range(j + 1):
                v = svec[pos] / (1.0 if i == j else math.sqrt(2.0))
                e[i, j] = v
                e[j, i] = v
                pos += 1
        duals[c.name] = unembed_dual(e)

    obj = problem.objective.value(params)
    # duality gap in the min-form: q.x vs -b.z
    pcost = float(np.dot(q, x))
    dcost = float(-np.dot(b_vec, z))
    gap = abs(pcost - dcost)
    stats.duality_gap = gap
    stats.max_violation = _max_violation(problem, params)

    # Solved met the requested tolerances inside the solver; AlmostSolved
    # means it stalled at reduced accuracy, so apply our own quality gate.
    gate = 10 * tol if accept_tol is None else accept_tol
    status = "optimal"
    if raw == "AlmostSolved":
        rel_gap = gap / max(1.0, abs(pcost), abs(dcost))
        if rel_gap > gate or stats.max_violation > gate:
            status = "numerical-failure"
    return SolveResult(status, obj, primal, duals, params, stats)


def _max_violation(problem: ConicProblem, params: dict[str, np.ndarray]) -> float:
    """Worst constraint violation of a primal point, normalized by the
    magnitude of the constraint's evaluated terms."""
    worst = 0.0
    for c in problem.constraints:
        if isinstance(c, LinearConstraint):
            v = c.expr.value(params)
            scale = abs(c.expr.offset)
            for bname, coeffs in c.expr.terms.items():
                scale += abs(float(np.dot(coeffs, params[bname])))
            viol = abs(v) if c.equality else max(0.0, v)
            worst = max(worst, viol / max(1.0, scale))
        elif isinstance(c, SocConstraint):
            norm = math.sqrt(sum(r.value(params) ** 2 for r in c.rows))
            bound = c.bound.value(params)
            worst = max(worst, (norm - bound) / max(1.0, abs(bound)))
        elif isinstance(c, PsdConstraint):
            blk = problem.blocks[c.block]
            h = params_to_hermitian(params[c.block], blk.dim)
            lam_min = float(np.linalg.eigvalsh(h)[0])
            worst = max(worst, -lam_min / max(1.0, float(np.abs(h).max())))
    return worst
