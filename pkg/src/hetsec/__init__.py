"""Secrecy transmit beamforming for two-tier downlink heterogeneous networks.

Three schemes maximize the secrecy rate of a wiretapped macro user under
QoS and power constraints:

* ``stb_om``  -- iterative SOCP beamforming at the macro base station only;
* ``stb_smf`` -- altruistic null-space jamming at the cooperative femto
  base stations, then the macro tier reacts to the reported interference
  temperature;
* ``stb_jmf`` -- joint macro+femto design through a semidefinite program
  inside a one-dimensional search over the eavesdropper's SINR cap.

``benchmark`` maximizes the wiretapped user's plain rate (no secrecy) for
comparison, and ``harness`` runs seeded Monte-Carlo sweeps to CSV.
"""
from .channel import (
    ChannelSet,
    NetworkConfig,
    Placement,
    db_to_linear,
    linear_to_db,
    sample_fbs_placement,
    sample_rayleigh_channels,
)
from .metrics import (
    BeamformingSolution,
    SolveDiagnostics,
    interference_temperature,
    secrecy_rate,
    secrecy_rate_pos,
    sinr_eve,
    sinr_fu,
    sinr_fu_mean,
    sinr_mu,
)

__version__ = "0.1.0"
