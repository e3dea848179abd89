"""Three-step tuning of the reliability knobs for a lossy wireless link.

Step 1 caps the middleware message at one IP packet (MTU minus the 28-byte
RTPS header), step 2 sets the repair rate to twice the publish rate, step 3
bounds the writer cache so a full flush fits the allocated link budget.
The tuner needs no loss estimate; an optional feasibility check takes one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .model import burst_size, history_cache_limit, steady_state_rate
from .sim.types import HistoryKind, QosProfile, ReliabilityKind

RTPS_HEADER_BYTES = 28
DEFAULT_MTU_BYTES = 1500


@dataclass(frozen=True)
class OptimizationInput:
    """What the tuner needs to know about the workload and the link."""

    publish_rate_hz: float
    sample_size_bytes: int
    link_throughput_bytes_per_s: float
    utilization: float

    def __post_init__(self) -> None:
        if self.publish_rate_hz <= 0:
            raise ValueError("publish_rate_hz must be > 0")
        if self.sample_size_bytes < 1:
            raise ValueError("sample_size_bytes must be >= 1")
        if self.link_throughput_bytes_per_s <= 0:
            raise ValueError("link_throughput_bytes_per_s must be > 0")
        if not 0.0 < self.utilization <= 1.0:
            raise ValueError("utilization must be in (0, 1]")


@dataclass(frozen=True)
class FeasibilityReport:
    """Predicted steady load and worst-case burst against the link budget."""

    offered_rate_bytes_per_s: float
    link_budget_bytes_per_s: float
    feasible: bool
    predicted_burst_bytes: float


def optimize_profile(inp: OptimizationInput, mtu_bytes: int = DEFAULT_MTU_BYTES) -> QosProfile:
    """Produce the tuned profile for the given workload and link.

    A budget smaller than one sample still yields a usable profile with a
    single-sample cache, under warning.
    """
    max_message = mtu_bytes - RTPS_HEADER_BYTES
    if max_message < 1:
        raise ValueError(f"mtu_bytes too small: {mtu_bytes}")
    budget = inp.link_throughput_bytes_per_s * inp.utilization
    if budget < inp.sample_size_bytes:
        warnings.warn(
            "link budget below one sample (LOW_BUDGET); cache clamped to 1",
            RuntimeWarning,
            stacklevel=2,
        )
    capacity = history_cache_limit(
        inp.link_throughput_bytes_per_s, inp.utilization, inp.sample_size_bytes
    )
    return QosProfile(
        max_rtps_message_bytes=max_message,
        retransmission_rate_hz=2.0 * inp.publish_rate_hz,
        history_cache_capacity=capacity,
        reliability_kind=ReliabilityKind.RELIABLE,
        history_kind=HistoryKind.KEEP_ALL,
    )


def feasibility(inp: OptimizationInput, packet_delivery_prob: float) -> FeasibilityReport:
    """Check the tuned profile's predicted load against the link budget.

    The tuned profile is fragmentation free, so the steady-state unit is a
    single packet and the burst prediction uses the doubled repair rate.
    """
    if not 0.0 <= packet_delivery_prob <= 1.0:
        raise ValueError("packet_delivery_prob out of [0,1]")
    publish_bps = inp.publish_rate_hz * inp.sample_size_bytes
    offered = steady_state_rate(publish_bps, packet_delivery_prob, 1)
    budget = inp.link_throughput_bytes_per_s * inp.utilization
    burst = burst_size(
        inp.sample_size_bytes,
        inp.publish_rate_hz,
        2.0 * inp.publish_rate_hz,
        packet_delivery_prob,
        packet_delivery_prob,
    )
    return FeasibilityReport(
        offered_rate_bytes_per_s=offered,
        link_budget_bytes_per_s=budget,
        feasible=offered <= budget,
        predicted_burst_bytes=burst,
    )


def recommend_utilization(exclusive: bool) -> tuple[float, float]:
    """Suggested link-utilization range for the cache-sizing budget.

    With the channel dedicated to this flow the recommended range is
    0.6 to 0.7; a shared channel gets the conservative repo default of 0.3
    (SHARED_CHANNEL: tune down further when many hosts contend).
    """
    if exclusive:
        return (0.6, 0.7)
    return (0.3, 0.3)
