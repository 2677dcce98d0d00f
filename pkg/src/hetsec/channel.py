"""Network configuration, random deployments and Rayleigh channel realizations.

The scenario is a two-tier downlink: one multi-antenna macro base station
(MBS) serving M single-antenna macro users (MUs), a single-antenna
eavesdropper wiretapping MU_1, and N cooperative femto base stations (FBSs)
each serving K single-antenna femto users (FUs).

All channels are i.i.d. circularly-symmetric complex Gaussian with unit
variance (flat Rayleigh fading); powers are expressed in linear units
normalized to the noise floor sigma^2 = 1, so a budget of "40 dB" means
p = 10**(40/10) = 1e4.

RNG stream-splitting (documented contract, stable across platforms):
``sample_rayleigh_channels(config, seed)`` derives six independent child
streams from ``numpy.random.SeedSequence(seed).spawn(6)`` and uses them, in
order, for: h_mu, h_e, h_fbs_mu, h_fbs_e, h_mbs_fu, h_fbs_fu.
``sample_fbs_placement(config, seed)`` derives two child streams for the
Poisson count and the point coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np


def db_to_linear(x_db: float) -> float:
    """10**(x/10): dB-relative-to-noise to linear power."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class NetworkConfig:
    """Scenario parameters for one deployment.

    gamma_mu holds the SINR targets of MU_2..MU_M (length M-1); gamma_fu is
    an (N, K) grid of FU targets.  A target of exactly 0 means "no QoS
    constraint" for that user.  sigma2 is pinned to 1.0: every power in the
    model is already noise-normalized.
    """

    n_m: int = 10
    n_f: int = 4
    m_users: int = 2
    k_users: int = 1
    n_coop: int = 2
    p_m: float = db_to_linear(40.0)
    p_f: float = db_to_linear(40.0)
    sigma2: float = 1.0
    gamma_mu: tuple[float, ...] = (1.0,)
    gamma_fu: tuple[tuple[float, ...], ...] = ((0.60,), (0.60,))
    cell_radius_m: float = 500.0
    fbs_intensity: float = 1.0e-5

    def __post_init__(self):
        if self.n_m <= self.m_users:
            raise ValueError(f"need n_m > m_users, got {self.n_m} <= {self.m_users}")
        if self.n_f <= self.k_users:
            raise ValueError(f"need n_f > k_users, got {self.n_f} <= {self.k_users}")
        if self.p_m <= 0 or self.p_f <= 0:
            raise ValueError("power budgets must be strictly positive")
        if self.sigma2 != 1.0:
            raise ValueError("noise power is normalized; sigma2 must be 1.0")
        if self.m_users < 1 or self.k_users < 1 or self.n_coop < 0:
            raise ValueError("need m_users >= 1, k_users >= 1, n_coop >= 0")
        if len(self.gamma_mu) != self.m_users - 1:
            raise ValueError(f"gamma_mu must have length M-1={self.m_users - 1}")
        if len(self.gamma_fu) != self.n_coop or any(
            len(row) != self.k_users for row in self.gamma_fu
        ):
            raise ValueError(f"gamma_fu must be {self.n_coop}x{self.k_users}")
        if any(g < 0 for g in self.gamma_mu) or any(
            g < 0 for row in self.gamma_fu for g in row
        ):
            raise ValueError("SINR targets must be nonnegative")
        if self.fbs_intensity < 0 or self.cell_radius_m <= 0:
            raise ValueError("need fbs_intensity >= 0 and cell_radius_m > 0")

    @classmethod
    def from_db(cls, p_m_db: float, p_f_db: float, **kwargs) -> "NetworkConfig":
        """Build a config with MBS/FBS power budgets given in dB over noise."""
        return cls(p_m=db_to_linear(p_m_db), p_f=db_to_linear(p_f_db), **kwargs)

    def with_power_db(self, *, p_m_db: float | None = None, p_f_db: float | None = None):
        updates = {}
        if p_m_db is not None:
            updates["p_m"] = db_to_linear(p_m_db)
        if p_f_db is not None:
            updates["p_f"] = db_to_linear(p_f_db)
        return replace(self, **updates)

    def with_gamma_fu(self, gamma: float) -> "NetworkConfig":
        """Same config with every FU SINR target replaced by ``gamma``."""
        grid = tuple(tuple(gamma for _ in range(self.k_users)) for _ in range(self.n_coop))
        return replace(self, gamma_fu=grid)


@dataclass(frozen=True)
class ChannelSet:
    """One realization of every channel vector in the network.

    Array shapes (channels are row vectors, stored along the last axis):
        h_mu      (M, n_m)       MBS -> MU_m
        h_e       (n_m,)         MBS -> eavesdropper
        h_fbs_mu  (N, M, n_f)    FBS_n -> MU_m
        h_fbs_e   (N, n_f)       FBS_n -> eavesdropper
        h_mbs_fu  (N, K, n_m)    MBS -> FU_nk
        h_fbs_fu  (N, N, K, n_f) FBS_p -> FU_nk, indexed [p, n, k]
    """

    h_mu: np.ndarray
    h_e: np.ndarray
    h_fbs_mu: np.ndarray
    h_fbs_e: np.ndarray
    h_mbs_fu: np.ndarray
    h_fbs_fu: np.ndarray

    @property
    def m_users(self) -> int:
        return self.h_mu.shape[0]

    @property
    def n_coop(self) -> int:
        return self.h_fbs_e.shape[0]

    @property
    def k_users(self) -> int:
        return self.h_mbs_fu.shape[1]

    @property
    def n_m(self) -> int:
        return self.h_mu.shape[1]

    @property
    def n_f(self) -> int:
        return self.h_fbs_e.shape[1]

    def validate(self, config: NetworkConfig) -> None:
        m, k, n = config.m_users, config.k_users, config.n_coop
        expect = {
            "h_mu": (m, config.n_m),
            "h_e": (config.n_m,),
            "h_fbs_mu": (n, m, config.n_f),
            "h_fbs_e": (n, config.n_f),
            "h_mbs_fu": (n, k, config.n_m),
            "h_fbs_fu": (n, n, k, config.n_f),
        }
        for name, shape in expect.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")


@dataclass(frozen=True)
class Placement:
    """FBS positions (meters) inside the macrocell disk, origin at the MBS."""

    fbs_positions: np.ndarray  # (n, 2)
    cell_radius_m: float

    def __post_init__(self):
        pos = np.asarray(self.fbs_positions, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "fbs_positions", pos)
        r = np.hypot(pos[:, 0], pos[:, 1]) if len(pos) else np.zeros(0)
        if np.any(r > self.cell_radius_m * (1 + 1e-12)):
            raise ValueError("placement point outside the macrocell disk")

    def __len__(self) -> int:
        return self.fbs_positions.shape[0]

    def nearest(self, point: np.ndarray, count: int) -> np.ndarray:
        """Indices of the ``count`` FBSs closest to ``point`` (e.g. the
        eavesdropper, to pick which femtocells go co-channel)."""
        d = np.linalg.norm(self.fbs_positions - np.asarray(point)[None, :], axis=1)
        return np.argsort(d, kind="stable")[:count]


def _cn01(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) entries: real and imaginary parts N(0, 1/2)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_rayleigh_channels(config: NetworkConfig, seed: int) -> ChannelSet:
    """Draw one i.i.d. unit-variance Rayleigh realization of all channels.

    Deterministic in ``seed``; see the module docstring for the per-group
    stream-splitting order.
    """
    m, k, n = config.m_users, config.k_users, config.n_coop
    streams = np.random.SeedSequence(seed).spawn(6)
    rngs = [np.random.default_rng(s) for s in streams]
    return ChannelSet(
        h_mu=_cn01(rngs[0], (m, config.n_m)),
        h_e=_cn01(rngs[1], (config.n_m,)),
        h_fbs_mu=_cn01(rngs[2], (n, m, config.n_f)),
        h_fbs_e=_cn01(rngs[3], (n, config.n_f)),
        h_mbs_fu=_cn01(rngs[4], (n, k, config.n_m)),
        h_fbs_fu=_cn01(rngs[5], (n, n, k, config.n_f)),
    )


def uniform_disk_points(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    """Uniform points on the disk: r = R*sqrt(u) corrects the area density."""
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=count))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def sample_fbs_placement(config: NetworkConfig, seed: int) -> Placement:
    """Homogeneous Poisson point process on the macrocell disk.

    The point count is Poisson with mean lambda_f * pi * R^2 and positions
    are uniform on the disk.  Deterministic in ``seed``.
    """
    count_stream, pos_stream = np.random.SeedSequence(seed).spawn(2)
    mean = config.fbs_intensity * np.pi * config.cell_radius_m**2
    count = int(np.random.default_rng(count_stream).poisson(mean))
    points = uniform_disk_points(np.random.default_rng(pos_stream), count, config.cell_radius_m)
    return Placement(fbs_positions=points, cell_radius_m=config.cell_radius_m)


def sample_eavesdropper_position(config: NetworkConfig, seed: int) -> np.ndarray:
    """Uniform-on-disk eavesdropper location for geometry-driven selection."""
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    return uniform_disk_points(rng, 1, config.cell_radius_m)[0]
