"""SINR and secrecy-rate evaluation for a set of precoding vectors.

The receive model for MU_m, the eavesdropper and FU_nk:

    SINR_m  = |h_m w_m|^2  / (sum_{q!=m} |h_m w_q|^2
                              + sum_{n,k} |h_{n,m} w_nk|^2
                              + |h_m z|^2 + sigma^2)
    SINR_E  = |h_E w_1|^2  / (sum_{m>=2} |h_E w_m|^2
                              + sum_{n,k} |h_{n,E} w_nk|^2   (= IFT_sum)
                              + |h_E z|^2 + sigma^2)
    SINR_nk = |h_{n,nk} w_nk|^2 / (sum_{t!=k} |h_{n,nk} w_nt|^2
                              + sum_{p!=n, t} |h_{p,nk} w_pt|^2
                              + sum_m |h_nk w_m|^2 + |h_nk z|^2 + sigma^2)

z is an optional artificial-noise vector transmitted by the MBS; it is
treated as one extra interfering stream everywhere.  The secrecy rate is
log2(1 + SINR_1) - log2(1 + SINR_E), in bits.

User indices are 1-based to match the network naming (MU_1 is the
wiretapped user, FU_nk is the k-th user of the n-th cooperative femtocell).
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .channel import ChannelSet

SIGMA2 = 1.0  # noise floor; all powers in the model are noise-normalized


@dataclass
class SolveDiagnostics:
    """Bookkeeping attached to every solver output."""

    iterations: int = 0
    solver_statuses: list[str] = field(default_factory=list)
    objective_trace: list[float] = field(default_factory=list)
    final_objective: float = math.nan
    converged: bool = False
    conic_solves: int = 0
    notes: dict = field(default_factory=dict)


@dataclass
class BeamformingSolution:
    """MBS and FBS precoders for one channel realization.

    w_mu is (M, n_m); w_fu is (N, K, n_f) (all-zero when the scheme does not
    drive the femto tier); w_an is an optional MBS artificial-noise vector.
    ift_sum records sum_{n,k} |h_{n,E} w_nk|^2, the interference temperature
    deposited at the eavesdropper by the cooperative FBSs.
    """

    w_mu: np.ndarray
    w_fu: np.ndarray
    ift_sum: float = 0.0
    w_an: np.ndarray | None = None
    diagnostics: SolveDiagnostics = field(default_factory=SolveDiagnostics)

    def mbs_power(self) -> float:
        p = float(np.sum(np.abs(self.w_mu) ** 2))
        if self.w_an is not None:
            # AN enters the MBS budget through its norm, not its square
            p += float(np.linalg.norm(self.w_an))
        return p

    def fbs_power(self, n: int) -> float:
        """Transmit power of cooperative FBS_n (1-based)."""
        return float(np.sum(np.abs(self.w_fu[n - 1]) ** 2))

    def validate(self, p_m: float, p_f: float, tol: float = 1e-6) -> None:
        if self.mbs_power() > p_m * (1 + tol) + tol:
            raise ValueError(f"MBS power {self.mbs_power():.6g} exceeds budget {p_m:.6g}")
        for n in range(1, self.w_fu.shape[0] + 1):
            if self.fbs_power(n) > p_f * (1 + tol) + tol:
                raise ValueError(f"FBS_{n} power exceeds budget {p_f:.6g}")
        if self.ift_sum < -tol:
            raise ValueError("ift_sum must be nonnegative")


def _gain(h: np.ndarray, w: np.ndarray) -> float:
    """|h w|^2 for a row-vector channel and a column precoder."""
    return float(np.abs(np.dot(h, w)) ** 2)


def _check_dims(ch: ChannelSet, sol: BeamformingSolution) -> None:
    if sol.w_mu.shape != (ch.m_users, ch.n_m):
        raise ValueError(f"w_mu has shape {sol.w_mu.shape}, expected {(ch.m_users, ch.n_m)}")
    if sol.w_fu.shape != (ch.n_coop, ch.k_users, ch.n_f):
        raise ValueError(
            f"w_fu has shape {sol.w_fu.shape}, expected {(ch.n_coop, ch.k_users, ch.n_f)}"
        )
    if sol.w_an is not None and sol.w_an.shape != (ch.n_m,):
        raise ValueError("w_an must have length n_m")


def sinr_mu(ch: ChannelSet, sol: BeamformingSolution, m: int, sigma2: float = SIGMA2) -> float:
    """Receive SINR of MU_m (1-based)."""
    _check_dims(ch, sol)
    if not 1 <= m <= ch.m_users:
        raise ValueError(f"m must be in [1, {ch.m_users}]")
    h = ch.h_mu[m - 1]
    signal = _gain(h, sol.w_mu[m - 1])
    interf = sum(_gain(h, sol.w_mu[q]) for q in range(ch.m_users) if q != m - 1)
    interf += sum(
        _gain(ch.h_fbs_mu[n, m - 1], sol.w_fu[n, k])
        for n in range(ch.n_coop)
        for k in range(ch.k_users)
    )
    if sol.w_an is not None:
        interf += _gain(h, sol.w_an)
    return signal / (interf + sigma2)


def sinr_eve(ch: ChannelSet, sol: BeamformingSolution, sigma2: float = SIGMA2) -> float:
    """Receive SINR of the eavesdropper listening to MU_1's stream."""
    _check_dims(ch, sol)
    signal = _gain(ch.h_e, sol.w_mu[0])
    interf = sum(_gain(ch.h_e, sol.w_mu[q]) for q in range(1, ch.m_users))
    interf += sum(
        _gain(ch.h_fbs_e[n], sol.w_fu[n, k])
        for n in range(ch.n_coop)
        for k in range(ch.k_users)
    )
    if sol.w_an is not None:
        interf += _gain(ch.h_e, sol.w_an)
    return signal / (interf + sigma2)


def sinr_fu(
    ch: ChannelSet, sol: BeamformingSolution, n: int, k: int, sigma2: float = SIGMA2
) -> float:
    """Receive SINR of FU_nk (both indices 1-based)."""
    _check_dims(ch, sol)
    if not 1 <= n <= ch.n_coop:
        raise ValueError(f"n must be in [1, {ch.n_coop}]")
    if not 1 <= k <= ch.k_users:
        raise ValueError(f"k must be in [1, {ch.k_users}]")
    ni, ki = n - 1, k - 1
    h_own = ch.h_fbs_fu[ni, ni, ki]
    signal = _gain(h_own, sol.w_fu[ni, ki])
    interf = sum(_gain(h_own, sol.w_fu[ni, t]) for t in range(ch.k_users) if t != ki)
    interf += sum(
        _gain(ch.h_fbs_fu[p, ni, ki], sol.w_fu[p, t])
        for p in range(ch.n_coop)
        if p != ni
        for t in range(ch.k_users)
    )
    h_mbs = ch.h_mbs_fu[ni, ki]
    interf += sum(_gain(h_mbs, sol.w_mu[m]) for m in range(ch.m_users))
    if sol.w_an is not None:
        interf += _gain(h_mbs, sol.w_an)
    return signal / (interf + sigma2)


def sinr_fu_mean(ch: ChannelSet, sol: BeamformingSolution, sigma2: float = SIGMA2) -> float:
    """Average FU SINR over all (n, k); nan when there is no femto tier."""
    if ch.n_coop == 0:
        return math.nan
    vals = [
        sinr_fu(ch, sol, n, k, sigma2)
        for n in range(1, ch.n_coop + 1)
        for k in range(1, ch.k_users + 1)
    ]
    return float(np.mean(vals))


def interference_temperature(ch: ChannelSet, sol: BeamformingSolution) -> float:
    """sum_{n,k} |h_{n,E} w_nk|^2 observed at the eavesdropper."""
    return float(
        sum(
            _gain(ch.h_fbs_e[n], sol.w_fu[n, k])
            for n in range(ch.n_coop)
            for k in range(ch.k_users)
        )
    )


def secrecy_rate(ch: ChannelSet, sol: BeamformingSolution, sigma2: float = SIGMA2) -> float:
    """log2(1 + SINR_1) - log2(1 + SINR_E), in bits; may be negative."""
    s1 = sinr_mu(ch, sol, 1, sigma2)
    se = sinr_eve(ch, sol, sigma2)
    return math.log2(1.0 + s1) - math.log2(1.0 + se)


def secrecy_rate_pos(ch: ChannelSet, sol: BeamformingSolution, sigma2: float = SIGMA2) -> float:
    """Clipped companion of :func:`secrecy_rate`: max(0, rate)."""
    return max(0.0, secrecy_rate(ch, sol, sigma2))
