"""Domain types shared by the simulator, optimizer and serialization layers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

UNBOUNDED = None  # history cache capacity sentinel


class ReliabilityKind(enum.Enum):
    RELIABLE = "RELIABLE"
    BEST_EFFORT = "BEST_EFFORT"


class HistoryKind(enum.Enum):
    KEEP_ALL = "KEEP_ALL"
    KEEP_LAST = "KEEP_LAST"


class OnFullCache(enum.Enum):
    """Writer behaviour when a KEEP_ALL cache is full: defer or drop the sample."""

    BLOCK = "BLOCK"
    DROP = "DROP"


class RetransmitPolicy(enum.Enum):
    """How the writer treats the pending retransmission set across rounds.

    PERSISTENT is the real protocol: missing samples stay nacked until
    acknowledged. SINGLE_ROUND abandons the backlog whenever a round's
    control exchange fails, which is the accounting the closed-form traffic
    recursion assumes; it exists for model-validation runs.
    """

    PERSISTENT = "PERSISTENT"
    SINGLE_ROUND = "SINGLE_ROUND"


@dataclass(frozen=True)
class QosProfile:
    """The tunable protocol knobs."""

    max_rtps_message_bytes: int = 65536
    retransmission_rate_hz: float = 1.0 / 3.0
    history_cache_capacity: int | None = 400
    reliability_kind: ReliabilityKind = ReliabilityKind.RELIABLE
    history_kind: HistoryKind = HistoryKind.KEEP_ALL
    history_depth: int = 1  # only meaningful for KEEP_LAST
    on_full: OnFullCache = OnFullCache.BLOCK
    retransmit_policy: RetransmitPolicy = RetransmitPolicy.PERSISTENT

    def __post_init__(self) -> None:
        if self.max_rtps_message_bytes < 1:
            raise ValueError("max_rtps_message_bytes must be >= 1")
        if self.retransmission_rate_hz <= 0:
            raise ValueError("retransmission_rate_hz must be > 0")
        if self.history_cache_capacity is not None and self.history_cache_capacity < 1:
            raise ValueError("history_cache_capacity must be >= 1 when bounded")
        if self.history_kind is HistoryKind.KEEP_LAST and self.history_depth < 1:
            raise ValueError("history_depth must be >= 1 for KEEP_LAST")

    @property
    def heartbeat_period_s(self) -> float:
        return 1.0 / self.retransmission_rate_hz


@dataclass(frozen=True)
class CongestionModel:
    """Optional load-dependent loss: bursts beyond the threshold degrade delivery.

    Stand-in for collision loss on a saturated shared channel. A packet that
    enters the link queue while more than ``threshold_bytes`` are already
    backlogged is delivered with probability ``delivery_prob *
    congested_delivery_factor``. Disabled by default (infinite threshold).
    """

    threshold_bytes: float = math.inf
    congested_delivery_factor: float = 1.0

    def __post_init__(self) -> None:
        if self.threshold_bytes <= 0:
            raise ValueError("threshold_bytes must be > 0")
        if not 0.0 <= self.congested_delivery_factor <= 1.0:
            raise ValueError("congested_delivery_factor out of [0,1]")

    @property
    def enabled(self) -> bool:
        return math.isfinite(self.threshold_bytes)


@dataclass(frozen=True)
class LinkModel:
    """The impaired link: per-packet delivery probability, a single capacity
    queue, propagation delay, and scheduled outage windows."""

    delivery_prob: float = 1.0
    capacity_bytes_per_s: float = 54.125e6
    mtu_bytes: int = 1500
    propagation_delay_s: float = 0.0
    outage_windows: tuple[tuple[float, float], ...] = ()
    congestion: CongestionModel = field(default_factory=CongestionModel)

    def __post_init__(self) -> None:
        if not 0.0 <= self.delivery_prob <= 1.0:
            raise ValueError("delivery_prob out of [0,1]")
        if self.capacity_bytes_per_s <= 0:
            raise ValueError("capacity_bytes_per_s must be > 0")
        if self.mtu_bytes < 1:
            raise ValueError("mtu_bytes must be >= 1")
        if self.propagation_delay_s < 0:
            raise ValueError("propagation_delay_s must be >= 0")
        prev_end = -math.inf
        for start, end in self.outage_windows:
            if end <= start:
                raise ValueError(f"empty outage window [{start}, {end})")
            if start < prev_end:
                raise ValueError("outage windows must be sorted and non-overlapping")
            prev_end = end

    def in_outage(self, start_s: float, end_s: float) -> bool:
        """True when [start_s, end_s] intersects any outage window."""
        for w_start, w_end in self.outage_windows:
            if start_s < w_end and end_s >= w_start:
                return True
        return False


@dataclass(frozen=True)
class WorkloadSpec:
    """Periodic publishing workload."""

    publish_rate_hz: float
    sample_size_bytes: int
    sample_count: int
    start_time_s: float = 0.0

    def __post_init__(self) -> None:
        if self.publish_rate_hz <= 0:
            raise ValueError("publish_rate_hz must be > 0")
        if self.sample_size_bytes < 1:
            raise ValueError("sample_size_bytes must be >= 1")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.start_time_s < 0:
            raise ValueError("start_time_s must be >= 0")


@dataclass(frozen=True)
class ScenarioSpec:
    """One fully-specified simulation run; a fixed seed makes it deterministic."""

    workload: WorkloadSpec
    link: LinkModel
    qos: QosProfile
    duration_s: float
    rng_seed: int
    name: str = "scenario"

    def __post_init__(self) -> None:
        if self.duration_s <= self.workload.start_time_s:
            raise ValueError("duration_s must cover the workload start")


@dataclass
class SampleRecord:
    """Lifecycle of one published sample."""

    sequence_number: int
    publish_time_s: float
    delivery_time_s: float | None = None
    acknowledged: bool = False

    @property
    def delivered(self) -> bool:
        return self.delivery_time_s is not None


@dataclass(frozen=True)
class MetricsReport:
    """Run-level statistics computed from sample records and link counters.

    ``reception_rate_hz`` is received count over the span between first and
    last reception, defined only when at least two samples arrived.
    """

    reception_rate_hz: float | None
    avg_latency_s: float | None
    jitter_s: float | None
    delivery_ratio: float
    max_burst_bytes: float
    received_count: int
