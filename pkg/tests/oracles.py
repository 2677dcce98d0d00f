"""Independent reference implementations used to check the library.

Everything here is deliberately written with scalar Python loops and no
linear-algebra calls, so the checks do not share code paths with the
package under test.
"""
from __future__ import annotations

import cmath
import math


def dot(h, w) -> complex:
    """Channel-row times precoder-column, entry by entry."""
    acc = 0j
    for i in range(len(h)):
        acc += complex(h[i]) * complex(w[i])
    return acc


def gain(h, w) -> float:
    return abs(dot(h, w)) ** 2


def sinr_mu_scalar(ch, w_mu, w_fu, m: int, sigma2: float = 1.0, w_an=None) -> float:
    """Eq.-by-eq SINR of MU_m (1-based), loops only."""
    h = ch.h_mu[m - 1]
    num = gain(h, w_mu[m - 1])
    den = sigma2
    for q in range(len(w_mu)):
        if q != m - 1:
            den += gain(h, w_mu[q])
    for n in range(ch.n_coop):
        for k in range(ch.k_users):
            den += gain(ch.h_fbs_mu[n][m - 1], w_fu[n][k])
    if w_an is not None:
        den += gain(h, w_an)
    return num / den


def sinr_eve_scalar(ch, w_mu, w_fu, sigma2: float = 1.0, w_an=None) -> float:
    h = ch.h_e
    num = gain(h, w_mu[0])
    den = sigma2
    for q in range(1, len(w_mu)):
        den += gain(h, w_mu[q])
    for n in range(ch.n_coop):
        for k in range(ch.k_users):
            den += gain(ch.h_fbs_e[n], w_fu[n][k])
    if w_an is not None:
        den += gain(h, w_an)
    return num / den


def sinr_fu_scalar(ch, w_mu, w_fu, n: int, k: int, sigma2: float = 1.0) -> float:
    ni, ki = n - 1, k - 1
    h_own = ch.h_fbs_fu[ni][ni][ki]
    num = gain(h_own, w_fu[ni][ki])
    den = sigma2
    for t in range(ch.k_users):
        if t != ki:
            den += gain(h_own, w_fu[ni][t])
    for p in range(ch.n_coop):
        if p != ni:
            for t in range(ch.k_users):
                den += gain(ch.h_fbs_fu[p][ni][ki], w_fu[p][t])
    for m in range(len(w_mu)):
        den += gain(ch.h_mbs_fu[ni][ki], w_mu[m])
    return num / den


def secrecy_rate_scalar(ch, w_mu, w_fu, sigma2: float = 1.0, w_an=None) -> float:
    s1 = sinr_mu_scalar(ch, w_mu, w_fu, 1, sigma2, w_an)
    se = sinr_eve_scalar(ch, w_mu, w_fu, sigma2, w_an)
    return math.log2(1.0 + s1) - math.log2(1.0 + se)
