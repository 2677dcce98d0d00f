"""Sequential macro/femto secrecy beamforming.

Each cooperative FBS transmits in the null space of the collective channels
to all legitimate MUs, so its signal is invisible to the macro tier, and
points the null-space degrees of freedom at the eavesdropper:

    max  sum_k |h_{n,E} w_nk|^2
    s.t. sum_k ||w_nk||^2 <= P_F,   G_n w_nk = 0,
         h_{n,nt} w_nk = 0 for t != k  (own-cell stream separation)

With w_nk = V_n x_nk (V_n an orthonormal null-space basis of G_n) this is a
quadratic-ratio problem in x; for K = 1 the optimum is the generalized
eigenvector of (R1n, R2n) = (V^H h_E^H h_E V, V^H V) scaled to full power,
with objective P_F * lambda_max(R1n, R2n).  The SOCP route rotates the
rank-one objective to a linear one (max Re of the eavesdropper alignment)
and, for K > 1, solves one cone program per stream and pours all power into
the most damaging stream, which is exact for this objective.

Each FBS reports its interference temperature IFT_n = sum_k |h_{n,E} w_nk|^2;
the MBS adds IFT_sum = sum_n IFT_n to the eavesdropper's noise floor and
runs the macro-tier scheme unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np
import scipy.linalg

from .channel import ChannelSet, NetworkConfig
from .conic import ConicProblem, complex_row, const, re_inner, solve
from .errors import DegenerateChannelError, NumericalFailureError
from .metrics import BeamformingSolution
from .stb_om import StbOmOptions, solve_stb_om


@dataclass(frozen=True)
class FbsLocalProblem:
    """Inputs for one cooperative FBS's jamming design."""

    g_n: np.ndarray      # (M, n_f) channels to every MU
    h_ne: np.ndarray     # (n_f,)   channel to the eavesdropper
    h_n_fu: np.ndarray   # (K, n_f) channels to the FBS's own FUs
    p_f: float

    def __post_init__(self):
        if self.g_n.shape[0] >= self.g_n.shape[1]:
            raise ValueError("need more FBS antennas than protected MUs")
        if self.p_f <= 0:
            raise ValueError("p_f must be positive")


def phase_normalize(v: np.ndarray) -> np.ndarray:
    """Rotate so the first non-negligible entry is real-positive
    (eigenvectors are phase-ambiguous; this pins a reproducible one)."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    if mags.max() == 0.0:
        return v.copy()
    idx = int(np.argmax(mags > 1e-12 * mags.max()))
    return v * (v[idx].conj() / mags[idx])


def null_space_basis(g_n: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis V (n_f x (n_f - M)) with g_n V = 0 and V^H V = I."""
    g_n = np.asarray(g_n, dtype=complex)
    m, n_f = g_n.shape
    if m >= n_f:
        raise DegenerateChannelError("no null space: as many MUs as antennas")
    _, sing, vh = np.linalg.svd(g_n, full_matrices=True)
    if sing.size and sing.min() < rank_tol * sing.max():
        raise DegenerateChannelError("rank-deficient MU channel stack")
    return vh[m:].conj().T


def _restricted_matrices(prob: FbsLocalProblem, v_n: np.ndarray):
    r1 = v_n.conj().T @ np.outer(prob.h_ne.conj(), prob.h_ne) @ v_n
    r2 = v_n.conj().T @ v_n
    return r1, r2


def solve_fbs_closed_form(
    prob: FbsLocalProblem, v_n: np.ndarray | None = None
) -> np.ndarray:
    """K = 1 optimum: top generalized eigenvector of (R1n, R2n) at full power.

    scipy reduces the Hermitian pair by the Cholesky factor of R2n; R2n is
    the identity whenever the basis is orthonormal, but the general pair is
    kept so any basis works.
    """
    if prob.h_n_fu.shape[0] != 1:
        raise ValueError("closed form requires exactly one FU per femtocell")
    if v_n is None:
        v_n = null_space_basis(prob.g_n)
    r1, r2 = _restricted_matrices(prob, v_n)
    eigvals, eigvecs = scipy.linalg.eigh(r1, r2)
    phi = eigvecs[:, -1]
    alpha = math.sqrt(prob.p_f / float(np.real(np.conj(phi) @ r2 @ phi)))
    return phase_normalize(v_n @ (alpha * phi))


def solve_fbs_socp(
    prob: FbsLocalProblem, v_n: np.ndarray | None = None
) -> tuple[np.ndarray, float]:
    """Cone-program route; returns (precoders (K, n_f), objective).

    The objective is the squared optimal cone objective, i.e. the
    interference power sum_k |h_{n,E} w_nk|^2 delivered at the eavesdropper.
    """
    if v_n is None:
        v_n = null_space_basis(prob.g_n)
    k_users = prob.h_n_fu.shape[0]
    dim = v_n.shape[1]
    if dim < k_users:
        raise DegenerateChannelError("null space thinner than the stream count")
    r_vec = (prob.h_ne @ v_n).conj()           # alignment with the eavesdropper
    chol = np.linalg.cholesky(_restricted_matrices(prob, v_n)[1])

    best_amp, best_x, best_k = -1.0, None, 0
    for k in range(k_users):
        p = ConicProblem(f"fbs_stream_{k}")
        p.add_complex("x", dim)
        p.set_objective("max", re_inner(r_vec, "x"))
        rows = []
        for row in chol.conj().T:              # ||L^H x|| = sqrt(x^H R2 x)
            rows.extend(complex_row(row, "x"))
        p.add_soc("power", rows, const(math.sqrt(prob.p_f)))
        for t in range(k_users):
            if t != k:
                re, im = complex_row(prob.h_n_fu[t] @ v_n, "x")
                p.add_eq(f"zf_re_{t}", re)
                p.add_eq(f"zf_im_{t}", im)
        res = solve(p)
        if res.status != "optimal":
            raise NumericalFailureError(f"FBS stream SOCP: {res.status}")
        if res.objective_value > best_amp:
            best_amp, best_x, best_k = res.objective_value, res.primal["x"], k

    w = np.zeros((k_users, v_n.shape[0]), dtype=complex)
    w[best_k] = phase_normalize(v_n @ best_x)
    return w, best_amp**2


def compute_ift(ch: ChannelSet, n: int, precoders: np.ndarray) -> float:
    """Interference temperature FBS_n (1-based) deposits at the eavesdropper."""
    h = ch.h_fbs_e[n - 1]
    w = np.atleast_2d(precoders)
    return float(sum(np.abs(h @ w[k]) ** 2 for k in range(w.shape[0])))


def fbs_local_problem(ch: ChannelSet, config: NetworkConfig, n: int) -> FbsLocalProblem:
    """Local data available at cooperative FBS_n (1-based)."""
    ni = n - 1
    return FbsLocalProblem(
        g_n=ch.h_fbs_mu[ni],
        h_ne=ch.h_fbs_e[ni],
        h_n_fu=ch.h_fbs_fu[ni, ni],
        p_f=config.p_f,
    )


def solve_stb_smf(
    ch: ChannelSet,
    config: NetworkConfig,
    opts: StbOmOptions | None = None,
    fbs_method: str = "auto",
) -> BeamformingSolution:
    """Altruistic femto jamming, then the macro tier reacts to IFT_sum."""
    opts = opts or StbOmOptions()
    if not config.n_m > config.n_f > config.m_users:
        raise ValueError("sequential scheme needs n_m > n_f > m_users")
    if fbs_method not in ("auto", "closed_form", "socp"):
        raise ValueError(f"unknown fbs_method {fbs_method!r}")

    w_fu = np.zeros((ch.n_coop, ch.k_users, ch.n_f), dtype=complex)
    ift_sum = 0.0
    for n in range(1, ch.n_coop + 1):
        prob = fbs_local_problem(ch, config, n)
        use_closed = fbs_method == "closed_form" or (
            fbs_method == "auto" and ch.k_users == 1
        )
        if use_closed:
            w_fu[n - 1, 0] = solve_fbs_closed_form(prob)
        else:
            w_fu[n - 1], _ = solve_fbs_socp(prob)
        ift_sum += compute_ift(ch, n, w_fu[n - 1])

    mbs = solve_stb_om(ch, config, replace(opts, ift_sum=opts.ift_sum + ift_sum))
    return BeamformingSolution(
        w_mu=mbs.w_mu,
        w_fu=w_fu,
        ift_sum=ift_sum,
        diagnostics=mbs.diagnostics,
    )
