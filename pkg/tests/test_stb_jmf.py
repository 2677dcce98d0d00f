import math

import numpy as np
import pytest

from hetsec.channel import NetworkConfig, sample_rayleigh_channels
from hetsec.conic import ConicProblem, solve, trace_inner
from hetsec.conic.problem import LinearConstraint, PsdConstraint
from hetsec.errors import NumericalFailureError
from hetsec.metrics import secrecy_rate, sinr_eve, sinr_fu, sinr_mu
from hetsec.stb_jmf import (
    GoldenSearchTrace,
    StbJmfOptions,
    build_inner_sdp,
    charnes_cooper_residuals,
    golden_section,
    inner_value,
    mbs_channel_span,
    rank_one_extract,
    solve_stb_jmf,
    tau_upper_bound,
    verify_kkt,
    verify_rank_one,
)


def default_config(**kw):
    base = dict(n_m=10, n_f=4, m_users=2, k_users=1, n_coop=2,
                p_m=1e3, p_f=1e4, gamma_mu=(1.0,), gamma_fu=((0.6,), (0.6,)))
    base.update(kw)
    return NetworkConfig(**base)


# -- inner SDP structure -----------------------------------------------------

def test_inner_sdp_census():
    cfg = default_config()
    ch = sample_rayleigh_channels(cfg, 0)
    prob = build_inner_sdp(ch, cfg, tau=1.0)
    herm = [(b.name, b.dim) for b in prob.blocks.values() if b.kind == "hermitian"]
    assert sorted(herm) == [("X1", 10), ("X2", 10), ("Y1_1", 4), ("Y2_1", 4)]
    assert sum(b.kind == "real" for b in prob.blocks.values()) == 1
    lins = [c for c in prob.constraints if isinstance(c, LinearConstraint)]
    # power (1+N) + MU QoS (M-1) + FU QoS (N*K) + cap + normalization = 7
    named = [c for c in lins if c.name != "zeta_pos"]
    assert len(named) == 1 + 2 + 1 + 2 + 1
    assert sum(isinstance(c, PsdConstraint) for c in prob.constraints) == 4


def test_zero_cap_forces_eavesdropper_nulling():
    cfg = default_config()
    ch = sample_rayleigh_channels(cfg, 0)
    prob = build_inner_sdp(ch, cfg, tau=0.0)
    cap = prob.constraint("eve_cap")
    # at tau=0 the cap expression reduces to Tr(HE X1) <= 0
    assert set(cap.expr.terms) == {"X1"}


def test_inner_feasibility_residuals_and_g_monotone():
    cfg = default_config()
    opts = StbJmfOptions()
    for seed in range(3):
        ch = sample_rayleigh_channels(cfg, seed)
        span = mbs_channel_span(ch)
        bases = {"X1": span, "X2": span}
        tau_grid = np.geomspace(1e-3, tau_upper_bound(ch, cfg), 20)
        last_g = -np.inf
        violations = 0
        for tau in tau_grid:
            try:
                g, sol = inner_value(ch, cfg, tau, opts, bases=bases, accept_tol=1e-5)
            except NumericalFailureError:
                continue
            cc = charnes_cooper_residuals(ch, cfg, sol)
            assert cc["constraint_violation"] <= 1e-6
            if g < last_g * (1 - 1e-6):
                violations += 1
            last_g = max(last_g, g)
        assert violations == 0  # relaxing the cap can only help


def test_inner_value_upper_bound_with_free_qos():
    cfg = default_config(gamma_mu=(0.0,), gamma_fu=((0.0,), (0.0,)))
    ch = sample_rayleigh_channels(cfg, 1)
    bound = tau_upper_bound(ch, cfg)  # = P_M ||h_1||^2
    g, _ = inner_value(ch, cfg, bound, accept_tol=1e-4)
    assert g <= bound * (1 + 1e-6)


# -- golden section -----------------------------------------------------------

def test_golden_quadratic_maximum():
    tau, trace = golden_section(lambda t: -(t - 2.0) ** 2, 0.0, 5.0, 1e-6)
    assert tau == pytest.approx(2.0, abs=1e-6)
    assert isinstance(trace, GoldenSearchTrace)
    # bracket shrinks by the golden ratio each step
    widths = [b - a for a, b in trace.brackets]
    for w0, w1 in zip(widths, widths[1:]):
        assert w1 == pytest.approx(w0 * (math.sqrt(5) - 1) / 2, rel=1e-9)


def test_golden_monotone_boundary():
    tau, _ = golden_section(lambda t: t, 0.0, 1.0, 1e-6)
    assert tau == pytest.approx(1.0, abs=1e-5)


def test_golden_evaluation_count_bound():
    for span, eps in ((5.0, 1e-6), (100.0, 1e-3), (1.0, 1e-2)):
        calls = 0

        def f(t):
            nonlocal calls
            calls += 1
            return -(t - span / 3) ** 2

        golden_section(f, 0.0, span, eps)
        rho = (math.sqrt(5) - 1) / 2
        assert calls <= math.ceil(math.log(span / eps) / math.log(1 / rho)) + 2


def test_golden_rejects_bad_bracket():
    with pytest.raises(ValueError):
        golden_section(lambda t: t, 1.0, 0.0, 1e-3)
    with pytest.raises(ValueError):
        golden_section(lambda t: t, 0.0, 1.0, -1.0)


# -- rank-one machinery ---------------------------------------------------------

def test_verify_rank_one_cases():
    v = np.array([1.0, 2.0j, -1.0])
    ratio, ok = verify_rank_one(np.outer(v, v.conj()))
    assert ratio <= 1e-15 and ok
    ratio, ok = verify_rank_one(np.eye(2))
    assert ratio == pytest.approx(1.0) and not ok
    ratio, ok = verify_rank_one(np.zeros((2, 2)))
    assert ratio == 0.0 and ok


def test_rank_one_extract_exact_recovery():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    zeta = 0.5
    x = zeta * np.outer(v, v.conj())
    w, path = rank_one_extract(x, zeta)
    assert path == "eigen"
    assert np.linalg.norm(np.outer(w, w.conj()) - np.outer(v, v.conj())) <= 1e-8


def test_rank_one_extract_randomization_power_rule():
    x = np.diag([1.0, 1.0])
    scores = []

    def check(w):
        scores.append(float(np.linalg.norm(w) ** 2))
        return 1.0

    w, path = rank_one_extract(x, zeta=1.0, trials=50, feasibility_check=check,
                               rank_tol=1e-6, rng=np.random.default_rng(1))
    assert path == "randomized"
    # every candidate is rescaled to carry the block's full power Tr(W)=2
    assert all(s == pytest.approx(2.0, rel=1e-9) for s in scores)
    with pytest.raises(NumericalFailureError):
        rank_one_extract(x, 1.0, trials=5, feasibility_check=lambda w: False,
                         rng=np.random.default_rng(2))


# -- KKT verification -------------------------------------------------------------

def test_kkt_toy_sdp_residuals():
    # max Tr(CX), Tr(X)=1: reconstruction must match the solver duals
    rng = np.random.default_rng(3)
    c = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    c = (c + c.conj().T) / 2
    p = ConicProblem()
    p.add_hermitian("X", 3)
    p.set_objective("max", trace_inner(c, "X"))
    p.add_eq("tr", trace_inner(np.eye(3), "X") - 1.0)
    p.add_psd("psd_X", "X")
    r = solve(p)
    from hetsec.conic.kkt import reconstruct_psd_dual
    z = reconstruct_psd_dual(p, r, "X")
    assert np.linalg.norm(z - r.duals["psd_X"]) <= 1e-7
    assert np.linalg.norm(z @ r.primal["X"]) <= 1e-7
    assert np.linalg.eigvalsh(z)[0] >= -1e-7


def test_kkt_on_solved_instance_and_perturbation_detector():
    cfg = default_config()
    ch = sample_rayleigh_channels(cfg, 2)
    sol = solve_stb_jmf(ch, cfg)
    inner = sol.diagnostics.notes["inner"]
    report = verify_kkt(ch, cfg, inner, tol=1e-4)
    assert report.stationarity_residual <= 1e-4
    assert report.dual_min_eig >= -1e-4
    assert report.comp_slack <= 1e-4
    assert report.power_gap_mbs <= 1e-6
    assert all(g <= 1e-6 for g in report.power_gap_fbs)
    assert report.passed
    # a 1% primal perturbation must blow up complementary slackness
    import copy
    bent = copy.deepcopy(inner)
    rng = np.random.default_rng(0)
    d = bent.x_mu[0].shape[0]
    noise = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    noise = (noise + noise.conj().T) / 2
    bent.x_mu[0] = bent.x_mu[0] + 0.01 * np.linalg.norm(bent.x_mu[0]) * noise / np.linalg.norm(noise)
    worse = verify_kkt(ch, cfg, bent, tol=1e-4)
    assert worse.comp_slack > report.comp_slack * 10


# -- full scheme -------------------------------------------------------------------

def test_solution_invariants_over_seeds():
    cfg = default_config()
    for seed in range(8):
        ch = sample_rayleigh_channels(cfg, seed)
        sol = solve_stb_jmf(ch, cfg)
        notes = sol.diagnostics.notes
        # powers within budgets
        sol.validate(cfg.p_m, cfg.p_f, tol=1e-6)
        # QoS within 1e-6 (relative)
        assert sinr_mu(ch, sol, 2) >= cfg.gamma_mu[0] * (1 - 1e-6)
        for n in (1, 2):
            assert sinr_fu(ch, sol, n, 1) >= 0.6 * (1 - 1e-6)
        # eavesdropper cap honored by the recovered vectors
        assert sinr_eve(ch, sol) <= notes["tau_star"] * (1 + 1e-4) + 1e-9
        # Charnes-Cooper consistency
        assert notes["cc"]["g_residual"] <= 1e-7
        assert notes["cc"]["constraint_violation"] <= 1e-6
        # golden-section trace consistent with the returned cap
        assert notes["tau_star"] <= notes["tau_max"]


def test_outer_value_beats_tau_grid():
    cfg = default_config()
    opts = StbJmfOptions()
    for seed in range(3):
        ch = sample_rayleigh_channels(cfg, seed)
        sol = solve_stb_jmf(ch, cfg)
        notes = sol.diagnostics.notes
        achieved = (1 + notes["g_value"]) / (1 + notes["tau_star"])
        span = mbs_channel_span(ch)
        bases = {"X1": span, "X2": span}
        grid = np.linspace(0.0, notes["tau_max"], 40)[1:]  # coarse probe
        best = -np.inf
        for tau in grid:
            try:
                g, _ = inner_value(ch, cfg, tau, opts, bases=bases, accept_tol=1e-4)
            except NumericalFailureError:
                continue
            best = max(best, (1 + g) / (1 + tau))
        assert achieved >= best - 1e-3


def test_infeasible_fu_targets_raise():
    cfg = default_config(p_f=1.001, gamma_fu=((1e9,), (1e9,)))
    ch = sample_rayleigh_channels(cfg, 0)
    from hetsec.errors import QosInfeasibleError
    with pytest.raises(QosInfeasibleError):
        solve_stb_jmf(ch, cfg)
