"""Shared exception types for the beamforming solvers."""


class HetsecError(Exception):
    """Base class for solver-level failures."""


class QosInfeasibleError(HetsecError):
    """The QoS targets cannot be met within the power budgets."""


class NumericalFailureError(HetsecError):
    """The conic backend broke down repeatedly."""


class DegenerateChannelError(HetsecError):
    """A channel draw is rank-deficient for the requested construction;
    callers normally resample."""
