"""Non-secrecy baseline: maximize the wiretapped user's plain rate.

The baseline solves

    max  SINR_1   s.t.  power budgets, MU QoS, FU QoS

jointly over all MBS and FBS precoders, ignoring the eavesdropper, and is
afterwards scored on secrecy like every other scheme.  The fractional
SINR_1 objective is handled by bisection on the target level theta: for a
fixed theta the lifted margin program

    max  Tr(H1 W1) - theta * (interference at MU_1 + sigma^2)

is a plain SDP (no normalization variable needed), and theta is feasible
iff its optimal margin is nonnegative.  The final solve at the converged
level adds a vanishing penalty on the non-confidential blocks' power so
the parasitic directions collapse and the Gram blocks come out (near)
rank-one; the same face-restriction polish as the joint scheme then purges
residual eigenvalue mass before the eigen extraction.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .channel import ChannelSet, NetworkConfig
from .conic import ConicProblem, SolveResult, const, solve, trace_inner
from .errors import NumericalFailureError, QosInfeasibleError
from .metrics import BeamformingSolution, SolveDiagnostics
from .stb_jmf import rank_one_extract, verify_rank_one
from .stb_om import outer


@dataclass(frozen=True)
class BenchmarkOptions:
    bisect_rel_tol: float = 1e-4
    solver_tol: float = 1e-8
    search_accept_tol: float = 1e-5
    face_solver_tol: float = 1e-11
    rank_one_tol: float = 1e-4
    randomization_trials: int = 100
    power_penalty: float = 1e-8  # tie-breaker on non-confidential power


def _mu_block(m: int) -> str:
    return f"W{m}"


def _fu_block(n: int, k: int) -> str:
    return f"V{n}_{k}"


def _channel_span(ch: ChannelSet) -> np.ndarray:
    """Span of every channel entering the baseline's constraints (h_E does
    not appear, and power outside this span is pure waste)."""
    rows = [ch.h_mu[m].conj() for m in range(ch.m_users)]
    for n in range(ch.n_coop):
        for k in range(ch.k_users):
            rows.append(ch.h_mbs_fu[n, k].conj())
    q, r = np.linalg.qr(np.column_stack(rows))
    keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, float(np.abs(r).max()))
    return q[:, : int(np.count_nonzero(keep))]


def build_rate_sdp(
    ch: ChannelSet,
    config: NetworkConfig,
    theta: float,
    penalty: float = 0.0,
    bases: dict[str, np.ndarray] | None = None,
) -> ConicProblem:
    """Margin SDP at rate level theta (see module docstring)."""
    bases = bases or {}
    m_users, n_coop, k_users = ch.m_users, ch.n_coop, ch.k_users
    big_h = [outer(ch.h_mu[m]) for m in range(m_users)]

    def coeff(h, block):
        u = bases.get(block)
        return h if u is None else u.conj().T @ h @ u

    def tr(h, block):
        return trace_inner(coeff(h, block), block)

    prob = ConicProblem(f"benchmark_theta={theta:.6g}")
    for m in range(1, m_users + 1):
        name = _mu_block(m)
        prob.add_hermitian(name, bases[name].shape[1] if name in bases else ch.n_m)
        prob.add_psd(f"psd_{name}", name)
    for n in range(1, n_coop + 1):
        for k in range(1, k_users + 1):
            name = _fu_block(n, k)
            prob.add_hermitian(name, bases[name].shape[1] if name in bases else ch.n_f)
            prob.add_psd(f"psd_{name}", name)

    margin = tr(big_h[0], _mu_block(1)) + const(-theta * config.sigma2)
    for q in range(2, m_users + 1):
        margin = margin + tr(-theta * big_h[0], _mu_block(q))
    for n in range(1, n_coop + 1):
        h_n1 = outer(ch.h_fbs_mu[n - 1, 0])
        for k in range(1, k_users + 1):
            margin = margin + tr(-theta * h_n1, _fu_block(n, k))
    if penalty > 0:
        for m in range(2, m_users + 1):
            margin = margin + tr(-penalty * np.eye(ch.n_m), _mu_block(m))
        for n in range(1, n_coop + 1):
            for k in range(1, k_users + 1):
                margin = margin + tr(-penalty * np.eye(ch.n_f), _fu_block(n, k))
    prob.set_objective("max", margin)

    expr = const(-config.p_m)
    for m in range(1, m_users + 1):
        expr = expr + tr(np.eye(ch.n_m), _mu_block(m))
    prob.add_ineq("power_mbs", expr)
    for n in range(1, n_coop + 1):
        expr = const(-config.p_f)
        for k in range(1, k_users + 1):
            expr = expr + tr(np.eye(ch.n_f), _fu_block(n, k))
        prob.add_ineq(f"power_fbs_{n}", expr)

    for m in range(2, m_users + 1):
        gamma = config.gamma_mu[m - 2]
        if gamma == 0:
            continue
        expr = trace_inner(coeff(-big_h[m - 1], _mu_block(m)), _mu_block(m)) + (
            gamma * config.sigma2
        )
        for q in range(1, m_users + 1):
            if q != m:
                expr = expr + tr(gamma * big_h[m - 1], _mu_block(q))
        for n in range(1, n_coop + 1):
            h_nm = outer(ch.h_fbs_mu[n - 1, m - 1])
            for k in range(1, k_users + 1):
                expr = expr + tr(gamma * h_nm, _fu_block(n, k))
        prob.add_ineq(f"qos_mu_{m}", expr)

    for n in range(1, n_coop + 1):
        for k in range(1, k_users + 1):
            gamma = config.gamma_fu[n - 1][k - 1]
            if gamma == 0:
                continue
            h_own = outer(ch.h_fbs_fu[n - 1, n - 1, k - 1])
            expr = trace_inner(coeff(-h_own, _fu_block(n, k)), _fu_block(n, k)) + (
                gamma * config.sigma2
            )
            for t in range(1, k_users + 1):
                if t != k:
                    expr = expr + tr(gamma * h_own, _fu_block(n, t))
            for p in range(1, n_coop + 1):
                if p == n:
                    continue
                h_cross = outer(ch.h_fbs_fu[p - 1, n - 1, k - 1])
                for t in range(1, k_users + 1):
                    expr = expr + tr(gamma * h_cross, _fu_block(p, t))
            h_mbs = outer(ch.h_mbs_fu[n - 1, k - 1])
            for m in range(1, m_users + 1):
                expr = expr + tr(gamma * h_mbs, _mu_block(m))
            prob.add_ineq(f"qos_fu_{n}_{k}", expr)
    return prob


def _margin_at(ch, config, theta, opts, bases, penalty=0.0) -> tuple[float, SolveResult]:
    prob = build_rate_sdp(ch, config, theta, penalty, bases)
    res = solve(prob, opts.solver_tol, accept_tol=opts.search_accept_tol)
    if res.status == "numerical-failure":
        # retry ladder: looser target, then a coarser acceptance gate
        res = solve(prob, 1e-6, accept_tol=1e-4)
    if res.status == "infeasible":
        raise QosInfeasibleError("QoS targets infeasible for the baseline")
    if res.status != "optimal":
        raise NumericalFailureError(f"baseline SDP at theta={theta:.6g}: {res.status}")
    return float(res.objective_value), res


def _blocks(ch, res, bases):
    def lift(name):
        x = res.primal[name]
        u = bases.get(name) if bases else None
        return x if u is None else u @ x @ u.conj().T

    w = [lift(_mu_block(m)) for m in range(1, ch.m_users + 1)]
    v = [
        [lift(_fu_block(n, k)) for k in range(1, ch.k_users + 1)]
        for n in range(1, ch.n_coop + 1)
    ]
    return w, v


def solve_benchmark(
    ch: ChannelSet,
    config: NetworkConfig,
    opts: BenchmarkOptions | None = None,
) -> BeamformingSolution:
    """Rate-maximal (secrecy-blind) precoders for one realization."""
    opts = opts or BenchmarkOptions()
    span = _channel_span(ch)
    bases = {_mu_block(m): span for m in range(1, ch.m_users + 1)}

    lo = 0.0
    hi = float(np.linalg.norm(ch.h_mu[0]) ** 2) * config.p_m * 1.01
    margin0, _ = _margin_at(ch, config, lo, opts, bases)  # raises if QoS empty
    if margin0 < 0:
        raise QosInfeasibleError("baseline infeasible even at zero rate target")
    n_solves = 1
    while hi - lo > opts.bisect_rel_tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        n_solves += 1
        try:
            margin, _ = _margin_at(ch, config, mid, opts, bases)
        except (QosInfeasibleError, NumericalFailureError):
            margin = -1.0
        if margin >= 0:
            lo = mid
        else:
            hi = mid

    # definite final solve, with the power tie-breaker and a face polish
    penalty = opts.power_penalty * (1.0 + lo)
    try:
        _, res = _margin_at(ch, config, lo, opts, bases, penalty)
    except (QosInfeasibleError, NumericalFailureError):
        # back off marginally from the feasibility boundary
        lo = lo * (1.0 - 10 * opts.bisect_rel_tol)
        _, res = _margin_at(ch, config, lo, opts, bases, penalty)
    n_solves += 1
    w_blocks, v_blocks = _blocks(ch, res, bases)
    import dataclasses

    face_opts = dataclasses.replace(opts, solver_tol=opts.face_solver_tol)
    for rank in (3, 2):
        face = {}
        for m in range(1, ch.m_users + 1):
            _, vecs = np.linalg.eigh(w_blocks[m - 1])
            face[_mu_block(m)] = vecs[:, -rank:]
        for n in range(1, ch.n_coop + 1):
            for k in range(1, ch.k_users + 1):
                _, vecs = np.linalg.eigh(v_blocks[n - 1][k - 1])
                face[_fu_block(n, k)] = vecs[:, -rank:]
        try:
            _, res_f = _margin_at(ch, config, lo, face_opts, face, penalty)
        except (QosInfeasibleError, NumericalFailureError):
            continue
        n_solves += 1
        w_blocks, v_blocks = _blocks(ch, res_f, face)

    w_mu = np.zeros((ch.m_users, ch.n_m), dtype=complex)
    w_fu = np.zeros((ch.n_coop, ch.k_users, ch.n_f), dtype=complex)
    ratios, paths = {}, {}
    rng = np.random.default_rng(np.random.SeedSequence([0xBE, ch.n_m, ch.m_users]))
    for m in range(1, ch.m_users + 1):
        ratios[f"mu{m}"], _ = verify_rank_one(w_blocks[m - 1], opts.rank_one_tol)
        w_mu[m - 1], paths[f"mu{m}"] = rank_one_extract(
            w_blocks[m - 1], 1.0, opts.randomization_trials,
            rank_tol=opts.rank_one_tol, rng=rng,
        )
    for n in range(1, ch.n_coop + 1):
        for k in range(1, ch.k_users + 1):
            key = f"fu{n}_{k}"
            ratios[key], _ = verify_rank_one(v_blocks[n - 1][k - 1], opts.rank_one_tol)
            w_fu[n - 1, k - 1], paths[key] = rank_one_extract(
                v_blocks[n - 1][k - 1], 1.0, opts.randomization_trials,
                rank_tol=opts.rank_one_tol, rng=rng,
            )

    ift = float(
        sum(
            np.abs(ch.h_fbs_e[n] @ w_fu[n, k]) ** 2
            for n in range(ch.n_coop)
            for k in range(ch.k_users)
        )
    )
    diag = SolveDiagnostics(
        iterations=n_solves,
        conic_solves=n_solves,
        converged=True,
        final_objective=lo,  # achieved SINR_1 level
        solver_statuses=["optimal"],
    )
    diag.notes.update(
        sinr1_level=lo,
        rank_ratios=ratios,
        extraction_paths=paths,
        randomized_blocks=sum(p == "randomized" for p in paths.values()),
    )
    return BeamformingSolution(w_mu=w_mu, w_fu=w_fu, ift_sum=ift, diagnostics=diag)
