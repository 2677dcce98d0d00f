"""Macro-tier secrecy beamforming via successive convex approximation.

The nonconvex secrecy-rate problem

    max  log(1 + SINR_1) - log(1 + SINR_E)
    s.t. SINR_m >= gamma_m (m >= 2),   sum_m ||w_m||^2 <= P_M

is lifted with slacks t1 >= 1 + SINR_1 ... wait, t1 <= 1 + SINR_1 and
1 + SINR_E <= 1/t2, turning the objective into max t1*t2.  Both rate
constraints contain convex quadratic-over-linear terms

    F_{A,a}(w, x) = w^H A w / (x - a),

which are replaced by their first-order expansions Q around the current
iterate; each resulting subproblem is an SOCP whose optimum becomes the
next expansion point.  Because Q minorizes F and matches it at the
expansion point, the previous optimum stays feasible and the objective
trace t0 = sqrt(t1*t2) is nondecreasing.

The same machinery covers two extensions: a constant extra noise floor at
the eavesdropper (interference temperature fed back by cooperative
femtocells), and an artificial-noise vector z transmitted by the MBS, which
enters every receiver as one more interfering stream and the power budget
through ||z|| (not squared).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .channel import ChannelSet, NetworkConfig
from .conic import (
    ConicProblem,
    LinExpr,
    complex_row,
    const,
    im_inner,
    re_inner,
    real_var,
    solve,
)
from .errors import DegenerateChannelError, NumericalFailureError, QosInfeasibleError
from .metrics import BeamformingSolution, SolveDiagnostics, secrecy_rate, sinr_eve, sinr_mu


def outer(h: np.ndarray) -> np.ndarray:
    """Rank-one Gram matrix H = h^H h of a row-vector channel, so that
    w^H H w = |h w|^2."""
    h = np.asarray(h, dtype=complex).ravel()
    return np.outer(h.conj(), h)


def quad_over_lin(a_mat: np.ndarray, a: float, w: np.ndarray, x: float) -> float:
    """w^H A w / (x - a) for PSD A; defined only for x > a."""
    if x <= a:
        raise ValueError(f"quad-over-linear undefined at x={x} <= a={a}")
    return float(np.real(np.conj(w) @ a_mat @ w)) / (x - a)


@dataclass(frozen=True)
class TaylorCoeffs:
    """Affine expansion of F_{A,a} at (w~, x~):
    Q(w, x) = Re(c_w^H w) + c_x * x + c_const."""

    c_w: np.ndarray
    c_x: float
    c_const: float

    def value(self, w: np.ndarray, x: float) -> float:
        return float(np.real(np.vdot(self.c_w, w))) + self.c_x * x + self.c_const


def taylor_q(a_mat: np.ndarray, a: float, w_tilde: np.ndarray, x_tilde: float) -> TaylorCoeffs:
    """First-order expansion of the quadratic-over-linear F_{A,a}.

    Q(w, x) = 2 Re(w~^H A w)/(x~-a) - (w~^H A w~) (x-a)/(x~-a)^2; it
    globally minorizes F (convexity) and equals it at the expansion point.
    """
    if x_tilde <= a:
        raise ValueError(f"expansion point x~={x_tilde} must exceed a={a}")
    den = x_tilde - a
    quad = float(np.real(np.conj(w_tilde) @ a_mat @ w_tilde))
    return TaylorCoeffs(
        c_w=2.0 * (a_mat @ w_tilde) / den,
        c_x=-quad / den**2,
        c_const=quad * a / den**2,
    )


def _taylor_expr(coeffs: TaylorCoeffs, w_block: str, x_expr: LinExpr) -> LinExpr:
    return re_inner(coeffs.c_w, w_block) + x_expr * coeffs.c_x + coeffs.c_const


@dataclass(frozen=True)
class TaylorPoint:
    """Expansion point for one SOCP subproblem; must be feasible."""

    w_tilde: np.ndarray  # (M, n_m)
    t1_tilde: float      # > 1
    t2_tilde: float      # in (0, 1]
    z_tilde: np.ndarray | None = None

    def __post_init__(self):
        if not self.t1_tilde > 1.0:
            raise ValueError("t1~ must exceed 1 (positive signal at MU_1)")
        if not 0.0 < self.t2_tilde <= 1.0 + 1e-9:
            raise ValueError("t2~ must lie in (0, 1]")


@dataclass(frozen=True)
class StbOmOptions:
    max_iters: int = 30
    rel_tol: float = 1e-4
    ift_sum: float = 0.0       # extra constant noise at the eavesdropper
    use_an: bool = False
    an_force_zero: bool = False  # pin z = 0 (testing hook)
    solver_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 1 or self.rel_tol <= 0:
            raise ValueError("need max_iters >= 1 and rel_tol > 0")
        if self.ift_sum < 0:
            raise ValueError("ift_sum must be nonnegative")


def _unit_rows(block: str, size: int) -> list[LinExpr]:
    """One row per real parameter: the plain Euclidean norm of the block."""
    rows = []
    for i in range(size):
        coeffs = np.zeros(size)
        coeffs[i] = 1.0
        rows.append(LinExpr({block: coeffs}))
    return rows


def build_socp(
    ch: ChannelSet, point: TaylorPoint, config: NetworkConfig, opts: StbOmOptions
) -> ConicProblem:
    """One convex subproblem at the given expansion point.

    max t0 subject to: the MU_1 rate surrogate, the eavesdropper rate
    surrogate, per-user QoS cones with the phase-fixing equalities
    Im(h_m w_m) = 0, the MBS power cone, and the hyperbolic cone
    ||[2 t0, t1-t2]|| <= t1+t2 encoding t0^2 <= t1*t2.
    """
    m_users, n_m = ch.m_users, ch.n_m
    s_e = config.sigma2 + opts.ift_sum  # eavesdropper noise floor
    sigma = math.sqrt(config.sigma2)
    h1, h_e = ch.h_mu[0], ch.h_e
    big_h1, big_he = outer(h1), outer(h_e)
    use_an = opts.use_an
    z_tilde = point.z_tilde if point.z_tilde is not None else np.zeros(n_m, dtype=complex)

    prob = ConicProblem("stb_om_subproblem")
    wnames = [prob.add_complex(f"w{m}", n_m) for m in range(1, m_users + 1)]
    for name in ("t0", "t1", "t2"):
        prob.add_real(name)
    t0, t1, t2 = (real_var(n) for n in ("t0", "t1", "t2"))
    if use_an:
        prob.add_complex("z", n_m)
        prob.add_real("u_an")

    prob.set_objective("max", t0)

    # MU_1 rate: 1 + sum_{m>=2} |h1 w_m|^2 (+ |h1 z|^2) <= Q_{H1,1}(w1, t1)
    rows = []
    for m in range(2, m_users + 1):
        rows.extend(complex_row(h1, f"w{m}"))
    if use_an:
        rows.extend(complex_row(h1, "z"))
    bound = _taylor_expr(taylor_q(big_h1, 1.0, point.w_tilde[0], point.t1_tilde), "w1", t1)
    prob.add_quad_le("rate_mu1", rows, bound - config.sigma2)

    # eavesdropper rate: s_e + sum_m |h_E w_m|^2 (+ |h_E z|^2)
    #   <= s_e/t2 + sum_{m>=2} F(w_m, t2) (+ F(z, t2)), all linearized
    rows = []
    for m in range(1, m_users + 1):
        rows.extend(complex_row(h_e, f"w{m}"))
    if use_an:
        rows.extend(complex_row(h_e, "z"))
    bound = const(s_e * 2.0 / point.t2_tilde) + t2 * (-s_e / point.t2_tilde**2)
    for m in range(2, m_users + 1):
        coeffs = taylor_q(big_he, 0.0, point.w_tilde[m - 1], point.t2_tilde)
        bound = bound + _taylor_expr(coeffs, f"w{m}", t2)
    if use_an:
        coeffs = taylor_q(big_he, 0.0, z_tilde, point.t2_tilde)
        bound = bound + _taylor_expr(coeffs, "z", t2)
    prob.add_quad_le("rate_eve", rows, bound - s_e)

    # QoS cones (amplitude form) and phase fixing for m in [2, M]
    for m in range(2, m_users + 1):
        h_m = ch.h_mu[m - 1]
        gamma = config.gamma_mu[m - 2]
        if gamma > 0:
            rows = []
            for q in range(1, m_users + 1):
                if q != m:
                    rows.extend(complex_row(h_m, f"w{q}"))
            if use_an:
                rows.extend(complex_row(h_m, "z"))
            rows.append(const(sigma))
            prob.add_soc(
                f"qos_mu_{m}", rows, re_inner(h_m.conj(), f"w{m}") * (1.0 / math.sqrt(gamma))
            )
        prob.add_eq(f"phase_{m}", im_inner(h_m.conj(), f"w{m}"))

    # MBS power
    w_rows = []
    for name in wnames:
        w_rows.extend(_unit_rows(name, 2 * n_m))
    if use_an:
        u_an = real_var("u_an")
        prob.add_soc("an_norm", _unit_rows("z", 2 * n_m), u_an)
        prob.add_quad_le("power", w_rows, const(config.p_m) - u_an)
        if opts.an_force_zero:
            for i, row in enumerate(_unit_rows("z", 2 * n_m)):
                prob.add_eq(f"an_zero_{i}", row)
    else:
        prob.add_soc("power", w_rows, const(math.sqrt(config.p_m)))

    # t0^2 <= t1*t2
    prob.add_soc("hyperbolic", [t0 * 2.0, t1 - t2], t1 + t2)
    return prob


def _point_solution(ch: ChannelSet, config: NetworkConfig, w_mu, z=None) -> BeamformingSolution:
    return BeamformingSolution(
        w_mu=np.asarray(w_mu, dtype=complex),
        w_fu=np.zeros((ch.n_coop, ch.k_users, ch.n_f), dtype=complex),
        ift_sum=0.0,
        w_an=None if z is None else np.asarray(z, dtype=complex),
    )


def _project_out(target: np.ndarray, rows: list[np.ndarray]) -> np.ndarray:
    """Component of ``target`` orthogonal to conj(row) for every row, i.e.
    a direction that every listed channel cannot hear."""
    d = target.astype(complex).copy()
    if rows:
        basis = np.linalg.qr(np.column_stack([r.conj() for r in rows]))[0]
        d -= basis @ (basis.conj().T @ d)
    return d


def _slacks_at(ch, config, opts, w_mu, z) -> tuple[float, float]:
    sol = _point_solution(ch, config, w_mu, z)
    s1 = sinr_mu(ch, sol, 1)
    # eavesdropper noise floor includes the reported interference temperature
    num = float(np.abs(ch.h_e @ w_mu[0]) ** 2)
    den = config.sigma2 + opts.ift_sum + sum(
        float(np.abs(ch.h_e @ w_mu[m]) ** 2) for m in range(1, ch.m_users)
    )
    if z is not None:
        den += float(np.abs(ch.h_e @ z) ** 2)
    s_e = num / den
    return 1.0 + s1, 1.0 / (1.0 + s_e)


def init_feasible(
    ch: ChannelSet, config: NetworkConfig, opts: StbOmOptions
) -> TaylorPoint:
    """Deterministic feasible starting point.

    QoS users get the minimum-power beamformers that meet their targets
    while ignoring MU_1 (whose precoder is then placed in the joint null
    space of the eavesdropper's and the QoS users' channels, so it cannot
    disturb them); the whole remaining budget goes to MU_1.
    """
    m_users, n_m = ch.m_users, ch.n_m
    sigma = math.sqrt(config.sigma2)
    w_mu = np.zeros((m_users, n_m), dtype=complex)

    p_used = 0.0
    if m_users >= 2 and any(g > 0 for g in config.gamma_mu):
        prob = ConicProblem("qos_feasibility")
        for m in range(2, m_users + 1):
            prob.add_complex(f"w{m}", n_m)
        prob.add_real("r")
        r = real_var("r")
        prob.set_objective("min", r)
        stack = []
        for m in range(2, m_users + 1):
            stack.extend(_unit_rows(f"w{m}", 2 * n_m))
        prob.add_soc("power", stack, r)
        for m in range(2, m_users + 1):
            h_m = ch.h_mu[m - 1]
            gamma = config.gamma_mu[m - 2]
            if gamma > 0:
                rows = []
                for q in range(2, m_users + 1):
                    if q != m:
                        rows.extend(complex_row(h_m, f"w{q}"))
                rows.append(const(sigma))
                prob.add_soc(
                    f"qos_mu_{m}", rows, re_inner(h_m.conj(), f"w{m}") * (1.0 / math.sqrt(gamma))
                )
            prob.add_eq(f"phase_{m}", im_inner(h_m.conj(), f"w{m}"))
        res = solve(prob, opts.solver_tol)
        if res.status == "infeasible":
            raise QosInfeasibleError("QoS targets infeasible at any power")
        if res.status != "optimal":
            raise NumericalFailureError(f"QoS feasibility solve: {res.status}")
        for m in range(2, m_users + 1):
            w_mu[m - 1] = res.primal[f"w{m}"]
        p_used = float(np.sum(np.abs(w_mu) ** 2))
        if p_used > config.p_m * (1.0 - 1e-9):
            raise QosInfeasibleError(
                f"QoS needs power {p_used:.6g} >= budget {config.p_m:.6g}"
            )

    guard_rows = [ch.h_e] + [ch.h_mu[m] for m in range(1, m_users)]
    direction = _project_out(ch.h_mu[0].conj(), guard_rows)
    norm = np.linalg.norm(direction)
    if norm < 1e-9 * np.linalg.norm(ch.h_mu[0]):
        raise DegenerateChannelError("MU_1 channel lies in the guarded span")
    w_mu[0] = math.sqrt(config.p_m - p_used) * direction / norm

    t1, t2 = _slacks_at(ch, config, opts, w_mu, None)
    if not t1 > 1.0:
        raise QosInfeasibleError("no power left for the confidential stream")
    z0 = np.zeros(n_m, dtype=complex) if opts.use_an else None
    return TaylorPoint(w_tilde=w_mu, t1_tilde=t1, t2_tilde=min(t2, 1.0), z_tilde=z0)


def _iterate(
    ch: ChannelSet,
    config: NetworkConfig,
    opts: StbOmOptions,
    point: TaylorPoint,
) -> tuple[TaylorPoint, SolveDiagnostics]:
    """Run the SCA loop from ``point``; returns final point and diagnostics."""
    trace: list[float] = []
    statuses: list[str] = []
    diag = SolveDiagnostics()
    prev_t0 = None
    for _ in range(opts.max_iters):
        prob = build_socp(ch, point, config, opts)
        res = solve(prob, opts.solver_tol)
        if res.status != "optimal":
            res = solve(prob, opts.solver_tol * 100)  # one retry, relaxed
        statuses.append(res.status)
        if res.status == "infeasible":
            raise QosInfeasibleError("SOCP subproblem infeasible")
        if res.status != "optimal":
            if trace:
                diag.notes["aborted"] = res.status
                break
            raise NumericalFailureError(f"first SOCP subproblem: {res.status}")
        diag.conic_solves += 1
        t0 = float(res.primal["t0"])
        improved = prev_t0 is None or t0 > prev_t0
        if improved:
            # accept the iterate; each surrogate contains the previous
            # optimum, so accepted objectives can only ascend
            trace.append(t0)
            w_new = np.array([res.primal[f"w{m}"] for m in range(1, ch.m_users + 1)])
            z_new = res.primal["z"] if opts.use_an else None
            point = TaylorPoint(
                w_tilde=w_new,
                t1_tilde=max(float(res.primal["t1"]), 1.0 + 1e-9),
                t2_tilde=float(np.clip(res.primal["t2"], 1e-12, 1.0)),
                z_tilde=z_new,
            )
        if prev_t0 is not None and t0 - prev_t0 <= opts.rel_tol * max(1.0, abs(prev_t0)):
            # stalled (or a sub-solver-precision dip): keep the best iterate
            diag.converged = True
            if not improved:
                diag.notes["discarded_final_iterate"] = True
            break
        prev_t0 = t0
    diag.iterations = len(trace)
    diag.objective_trace = trace
    diag.final_objective = trace[-1] if trace else math.nan
    diag.solver_statuses = statuses
    return point, diag


def solve_stb_om(
    ch: ChannelSet,
    config: NetworkConfig,
    opts: StbOmOptions | None = None,
    start: TaylorPoint | None = None,
) -> BeamformingSolution:
    """Iterative SOCP maximization of MU_1's secrecy rate at the MBS."""
    opts = opts or StbOmOptions()
    point = start if start is not None else init_feasible(ch, config, opts)
    point, diag = _iterate(ch, config, opts, point)
    sol = _point_solution(ch, config, point.w_tilde, point.z_tilde if opts.use_an else None)
    sol.diagnostics = diag
    return sol


def random_an_direction(ch: ChannelSet, seed: int) -> np.ndarray:
    """A unit vector no legitimate MU can hear, drawn at random."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xA17]))
    raw = (rng.standard_normal(ch.n_m) + 1j * rng.standard_normal(ch.n_m)) / math.sqrt(2)
    d = _project_out(raw, [ch.h_mu[m] for m in range(ch.m_users)])
    norm = np.linalg.norm(d)
    if norm < 1e-12:
        raise DegenerateChannelError("MU channels span the whole space")
    return d / norm


def solve_random_an(
    ch: ChannelSet,
    config: NetworkConfig,
    opts: StbOmOptions | None = None,
    fraction: float = 0.1,
    seed: int = 0,
) -> BeamformingSolution:
    """Baseline: fixed random AN in the MUs' null space, beamformers optimized.

    The AN claims ``fraction`` of the MBS budget through its norm; since no
    MU hears it, the precoders solve a plain macro-tier problem with a
    shrunken budget and an eavesdropper noise floor raised by |h_E z|^2.
    """
    opts = opts or StbOmOptions()
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    z = fraction * config.p_m * random_an_direction(ch, seed)
    leak = float(np.abs(ch.h_e @ z) ** 2)
    inner_cfg = replace(config, p_m=(1.0 - fraction) * config.p_m)
    inner_opts = replace(opts, ift_sum=opts.ift_sum + leak, use_an=False)
    sol = solve_stb_om(ch, inner_cfg, inner_opts)
    sol.w_an = z
    sol.diagnostics.notes["an_fraction"] = fraction
    return sol


def solve_stb_om_with_an(
    ch: ChannelSet,
    config: NetworkConfig,
    opts: StbOmOptions | None = None,
    an_fraction: float = 0.1,
    seed: int = 0,
) -> BeamformingSolution:
    """Joint beamforming and artificial-noise design.

    Power couples through sum ||w_m||^2 + ||z|| <= P_M.  The SCA gives the
    AN vector no first-order credit at z~ = 0, so the loop is started both
    from the plain initialization and from the random-AN baseline point,
    keeping whichever converges to the better secrecy rate; this also makes
    the result dominate the random-AN baseline by construction.
    """
    opts = replace(opts or StbOmOptions(), use_an=True)
    candidates: list[BeamformingSolution] = []

    sol_plain = solve_stb_om(ch, config, opts)
    candidates.append(sol_plain)

    if not opts.an_force_zero:
        try:
            base = solve_random_an(ch, config, replace(opts, use_an=False), an_fraction, seed)
            t1, t2 = _slacks_at(ch, config, opts, base.w_mu, base.w_an)
            warm = TaylorPoint(
                w_tilde=base.w_mu, t1_tilde=t1, t2_tilde=min(t2, 1.0), z_tilde=base.w_an
            )
            candidates.append(solve_stb_om(ch, config, opts, start=warm))
        except (QosInfeasibleError, DegenerateChannelError):
            pass

    best = max(candidates, key=lambda s: secrecy_rate(ch, s))
    best.diagnostics.notes["an_starts"] = len(candidates)
    return best
