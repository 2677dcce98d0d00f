import math

import numpy as np
import pytest

from hetsec.channel import NetworkConfig, sample_rayleigh_channels
from hetsec.metrics import (
    BeamformingSolution,
    interference_temperature,
    secrecy_rate,
    secrecy_rate_pos,
    sinr_eve,
    sinr_fu,
    sinr_mu,
)

import oracles


def random_solution(ch, rng, power=4.0):
    w_mu = (rng.standard_normal((ch.m_users, ch.n_m))
            + 1j * rng.standard_normal((ch.m_users, ch.n_m)))
    w_fu = (rng.standard_normal((ch.n_coop, ch.k_users, ch.n_f))
            + 1j * rng.standard_normal((ch.n_coop, ch.k_users, ch.n_f)))
    w_mu *= math.sqrt(power) / np.linalg.norm(w_mu)
    if w_fu.size:
        w_fu *= math.sqrt(power) / np.linalg.norm(w_fu)
    return BeamformingSolution(w_mu=w_mu, w_fu=w_fu)


def project_out(vec, rows):
    """Component of vec that every channel row cannot hear."""
    d = vec.astype(complex).copy()
    basis = np.linalg.qr(np.column_stack([r.conj() for r in rows]))[0]
    return d - basis @ (basis.conj().T @ d)


@pytest.fixture
def small():
    cfg = NetworkConfig(n_m=4, n_f=3, m_users=2, k_users=1, n_coop=2,
                        p_m=10.0, p_f=10.0, gamma_mu=(1.0,), gamma_fu=((0.6,), (0.6,)))
    return cfg, sample_rayleigh_channels(cfg, 3)


def test_single_user_no_interference():
    cfg = NetworkConfig(n_m=4, n_f=2, m_users=1, k_users=1, n_coop=0,
                        p_m=10.0, p_f=1.0, gamma_mu=(), gamma_fu=())
    ch = sample_rayleigh_channels(cfg, 0)
    w = np.zeros((1, 4), dtype=complex)
    w[0] = ch.h_mu[0].conj()
    sol = BeamformingSolution(w_mu=w, w_fu=np.zeros((0, 1, 2), dtype=complex))
    expect = abs(ch.h_mu[0] @ w[0]) ** 2
    assert sinr_mu(ch, sol, 1) == pytest.approx(expect, rel=1e-12)


def test_zero_forcing_denominator_is_noise_only(small):
    cfg, ch = small
    h1 = ch.h_mu[0]
    w_mu = np.zeros((2, 4), dtype=complex)
    w_mu[0] = h1.conj()
    w_mu[1] = project_out(ch.h_mu[1].conj(), [h1])  # w_2 inaudible at MU_1
    w_fu = np.zeros((2, 1, 3), dtype=complex)
    for n in range(2):
        w_fu[n, 0] = project_out(np.ones(3, dtype=complex), [ch.h_fbs_mu[n, 0]])
    sol = BeamformingSolution(w_mu=w_mu, w_fu=w_fu)
    expect = abs(h1 @ w_mu[0]) ** 2 / cfg.sigma2
    assert sinr_mu(ch, sol, 1) == pytest.approx(expect, rel=1e-10)


def test_eve_zero_numerator(small):
    _, ch = small
    w_mu = np.zeros((2, 4), dtype=complex)
    w_mu[0] = project_out(np.ones(4, dtype=complex), [ch.h_e])
    w_mu[1] = np.ones(4)
    sol = BeamformingSolution(w_mu=w_mu, w_fu=np.zeros((2, 1, 3), dtype=complex))
    assert sinr_eve(ch, sol) == pytest.approx(0.0, abs=1e-20)


def test_eve_reduces_to_macro_only_form_with_zero_fbs(small):
    _, ch = small
    rng = np.random.default_rng(1)
    sol = random_solution(ch, rng)
    sol.w_fu[:] = 0
    expected = oracles.sinr_eve_scalar(ch, list(sol.w_mu), [[np.zeros(3)] for _ in range(2)])
    assert sinr_eve(ch, sol) == pytest.approx(expected, rel=1e-12)
    assert interference_temperature(ch, sol) == 0.0


def test_fu_single_cell_noise_only():
    cfg = NetworkConfig(n_m=4, n_f=3, m_users=2, k_users=1, n_coop=1,
                        p_m=10.0, p_f=10.0, gamma_mu=(1.0,), gamma_fu=((0.6,),))
    ch = sample_rayleigh_channels(cfg, 5)
    w_fu = np.zeros((1, 1, 3), dtype=complex)
    w_fu[0, 0] = ch.h_fbs_fu[0, 0, 0].conj()
    sol = BeamformingSolution(w_mu=np.zeros((2, 4), dtype=complex), w_fu=w_fu)
    expect = abs(ch.h_fbs_fu[0, 0, 0] @ w_fu[0, 0]) ** 2 / cfg.sigma2
    assert sinr_fu(ch, sol, 1, 1) == pytest.approx(expect, rel=1e-12)


def test_matches_elementwise_oracle_on_random_instances(small):
    _, ch = small
    rng = np.random.default_rng(3)
    for _ in range(20):
        sol = random_solution(ch, rng)
        w_mu = [sol.w_mu[m] for m in range(2)]
        w_fu = [[sol.w_fu[n, 0]] for n in range(2)]
        assert sinr_mu(ch, sol, 1) == pytest.approx(
            oracles.sinr_mu_scalar(ch, w_mu, w_fu, 1), rel=1e-12)
        assert sinr_mu(ch, sol, 2) == pytest.approx(
            oracles.sinr_mu_scalar(ch, w_mu, w_fu, 2), rel=1e-12)
        assert sinr_eve(ch, sol) == pytest.approx(
            oracles.sinr_eve_scalar(ch, w_mu, w_fu), rel=1e-12)
        assert sinr_fu(ch, sol, 1, 1) == pytest.approx(
            oracles.sinr_fu_scalar(ch, w_mu, w_fu, 1, 1), rel=1e-12)
        assert secrecy_rate(ch, sol) == pytest.approx(
            oracles.secrecy_rate_scalar(ch, w_mu, w_fu), rel=1e-12, abs=1e-12)


def test_secrecy_rate_identity_and_clip(small):
    _, ch = small
    rng = np.random.default_rng(4)
    sol = random_solution(ch, rng)
    s1, se = sinr_mu(ch, sol, 1), sinr_eve(ch, sol)
    assert secrecy_rate(ch, sol) == pytest.approx(
        math.log2((1 + s1) / (1 + se)), rel=1e-12, abs=1e-12)
    assert secrecy_rate_pos(ch, sol) == max(0.0, secrecy_rate(ch, sol))


def test_identical_channels_give_zero_rate(small):
    cfg, ch = small
    import dataclasses
    ch_eq = dataclasses.replace(ch, h_e=ch.h_mu[0].copy())
    sol = BeamformingSolution(
        w_mu=np.stack([ch.h_mu[0].conj(), np.zeros(4, dtype=complex)]),
        w_fu=np.zeros((2, 1, 3), dtype=complex),
    )
    assert secrecy_rate(ch_eq, sol) == pytest.approx(0.0, abs=1e-12)


def test_common_phase_leaves_sinrs_unchanged(small):
    _, ch = small
    rng = np.random.default_rng(7)
    for _ in range(100):
        sol = random_solution(ch, rng)
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        rotated = BeamformingSolution(w_mu=phase * sol.w_mu, w_fu=phase * sol.w_fu)
        for m in (1, 2):
            assert sinr_mu(ch, rotated, m) == pytest.approx(
                sinr_mu(ch, sol, m), rel=1e-10)
        assert sinr_eve(ch, rotated) == pytest.approx(sinr_eve(ch, sol), rel=1e-10)
        assert sinr_fu(ch, rotated, 1, 1) == pytest.approx(
            sinr_fu(ch, sol, 1, 1), rel=1e-10)


def test_joint_noise_power_scaling_invariance(small):
    _, ch = small
    rng = np.random.default_rng(8)
    sol = random_solution(ch, rng)
    for c in (0.25, 4.0, 100.0):
        scaled = BeamformingSolution(
            w_mu=math.sqrt(c) * sol.w_mu, w_fu=math.sqrt(c) * sol.w_fu)
        assert sinr_mu(ch, scaled, 1, sigma2=c) == pytest.approx(
            sinr_mu(ch, sol, 1), rel=1e-10)
        assert sinr_eve(ch, scaled, sigma2=c) == pytest.approx(
            sinr_eve(ch, sol), rel=1e-10)
        assert sinr_fu(ch, scaled, 2, 1, sigma2=c) == pytest.approx(
            sinr_fu(ch, sol, 2, 1), rel=1e-10)


def test_rate_antisymmetric_under_sinr_swap():
    s1, se = 3.7, 0.4
    forward = math.log2(1 + s1) - math.log2(1 + se)
    backward = math.log2(1 + se) - math.log2(1 + s1)
    assert forward == pytest.approx(-backward, rel=1e-15)


def test_dimension_mismatch_raises(small):
    _, ch = small
    sol = BeamformingSolution(
        w_mu=np.zeros((2, 5), dtype=complex), w_fu=np.zeros((2, 1, 3), dtype=complex))
    with pytest.raises(ValueError):
        sinr_mu(ch, sol, 1)
    good = BeamformingSolution(
        w_mu=np.zeros((2, 4), dtype=complex), w_fu=np.zeros((2, 1, 3), dtype=complex))
    with pytest.raises(ValueError):
        sinr_mu(ch, good, 3)
    with pytest.raises(ValueError):
        sinr_fu(ch, good, 3, 1)


def test_power_accounting_with_an(small):
    cfg, ch = small
    sol = BeamformingSolution(
        w_mu=np.ones((2, 4), dtype=complex),
        w_fu=np.zeros((2, 1, 3), dtype=complex),
        w_an=2.0 * np.ones(4, dtype=complex),
    )
    # AN enters the budget through its norm, precoders through norms squared
    assert sol.mbs_power() == pytest.approx(8.0 + 4.0)
    sol.validate(p_m=12.1, p_f=10.0)
    with pytest.raises(ValueError):
        sol.validate(p_m=11.9, p_f=10.0)
