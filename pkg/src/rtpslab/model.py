"""Closed-form model of reliable publish/subscribe traffic over a lossy link.

Pure functions only: application publish rate, layer bottleneck, hierarchical
fragmentation counts, the per-round retransmission recursion and its steady
state, worst-case burst size, the history-cache sizing rule, and the
best-effort delivery-rate table. Everything operates in bytes and seconds;
bit-rate conversions live at the CLI boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field


class NumericDomainError(ValueError):
    """Raised when a formula's denominator degenerates for the given inputs."""


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FragmentationPlan:
    """How one sample splits into middleware messages and link packets.

    ``packets_per_message[i]`` is the IP packet count of the i-th middleware
    message; ``total_packets`` is their sum.
    """

    sample_size_bytes: int
    max_rtps_message_bytes: int
    mtu_bytes: int
    n_rtps_messages: int
    packets_per_message: tuple[int, ...]
    total_packets: int


@dataclass(frozen=True)
class TrafficParams:
    """Workload and loss parameters of one writer/reader pair.

    ``unit_packets`` is the packet count of the retransmission unit; the
    derived ``unit_delivery_prob`` is the probability that the whole unit
    arrives intact (p raised to that count).
    """

    publish_rate_hz: float
    sample_size_bytes: int
    retransmission_rate_hz: float
    packet_delivery_prob: float
    unit_packets: int
    unit_delivery_prob: float = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.packet_delivery_prob <= 1.0:
            raise ValueError(f"packet_delivery_prob out of [0,1]: {self.packet_delivery_prob}")
        if self.publish_rate_hz <= 0:
            raise ValueError(f"publish_rate_hz must be > 0: {self.publish_rate_hz}")
        if self.retransmission_rate_hz <= 0:
            raise ValueError(f"retransmission_rate_hz must be > 0: {self.retransmission_rate_hz}")
        if self.sample_size_bytes < 1:
            raise ValueError(f"sample_size_bytes must be >= 1: {self.sample_size_bytes}")
        if self.unit_packets < 1:
            raise ValueError(f"unit_packets must be >= 1: {self.unit_packets}")
        object.__setattr__(
            self, "unit_delivery_prob", self.packet_delivery_prob ** self.unit_packets
        )


@dataclass(frozen=True)
class LayerThroughputs:
    """Per-boundary capacities of the app -> middleware -> OS -> link path, B/s."""

    app_to_dds: float
    dds_to_os: float
    os_to_link: float

    def __post_init__(self) -> None:
        for name in ("app_to_dds", "dds_to_os", "os_to_link"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


# ---------------------------------------------------------------------------
# Rates and fragmentation
# ---------------------------------------------------------------------------

def publish_rate(rate_hz: float, sample_size_bytes: float) -> float:
    """Application-layer byte rate: rate times sample size."""
    if rate_hz <= 0:
        raise ValueError(f"rate_hz must be > 0: {rate_hz}")
    if sample_size_bytes < 1:
        raise ValueError(f"sample_size_bytes must be >= 1: {sample_size_bytes}")
    return rate_hz * sample_size_bytes


def bottleneck_throughput(layers: LayerThroughputs) -> float:
    """Achievable end-to-end throughput: the minimum layer-boundary capacity."""
    return min(layers.app_to_dds, layers.dds_to_os, layers.os_to_link)


def fragmentation_plan(
    sample_size_bytes: int, max_rtps_message_bytes: int, mtu_bytes: int
) -> FragmentationPlan:
    """Split a sample into middleware messages, then each message into packets.

    Packet counts use the simple ceil(size/MTU) rule; header bytes are not
    added. The last message carries only the remainder, so its packet count
    can be smaller.
    """
    if sample_size_bytes < 1:
        raise ValueError(f"sample_size_bytes must be >= 1: {sample_size_bytes}")
    if max_rtps_message_bytes < 1:
        raise ValueError(f"max_rtps_message_bytes must be >= 1: {max_rtps_message_bytes}")
    if mtu_bytes < 1:
        raise ValueError(f"mtu_bytes must be >= 1: {mtu_bytes}")

    n_messages = math.ceil(sample_size_bytes / max_rtps_message_bytes)
    packets = []
    remaining = sample_size_bytes
    for _ in range(n_messages):
        chunk = min(max_rtps_message_bytes, remaining)
        packets.append(math.ceil(chunk / mtu_bytes))
        remaining -= chunk
    return FragmentationPlan(
        sample_size_bytes=sample_size_bytes,
        max_rtps_message_bytes=max_rtps_message_bytes,
        mtu_bytes=mtu_bytes,
        n_rtps_messages=n_messages,
        packets_per_message=tuple(packets),
        total_packets=sum(packets),
    )


def unit_delivery_prob(packet_delivery_prob: float, packet_count: int) -> float:
    """Probability that all packets of one retransmission unit arrive intact."""
    if not 0.0 <= packet_delivery_prob <= 1.0:
        raise ValueError(f"packet_delivery_prob out of [0,1]: {packet_delivery_prob}")
    if packet_count < 1:
        raise ValueError(f"packet_count must be >= 1: {packet_count}")
    return packet_delivery_prob ** packet_count


# ---------------------------------------------------------------------------
# Per-round retransmission recursion and its steady state
# ---------------------------------------------------------------------------

def staircase_delta(rate_hz: float, retx_rate_hz: float, round_index: int) -> int:
    """Fresh samples available at a given retransmission round.

    Publishing at ``rate_hz`` sampled at round boundaries spaced 1/retx_rate
    apart yields the floor-difference staircase; its long-run mean is
    rate/retx_rate.
    """
    if rate_hz <= 0 or retx_rate_hz <= 0:
        raise ValueError("rates must be > 0")
    if round_index < 1:
        raise ValueError(f"round_index must be >= 1: {round_index}")
    ratio = rate_hz / retx_rate_hz
    return math.floor(ratio * round_index) - math.floor(ratio * (round_index - 1))


def round_traffic_recursion(
    prev_round_bytes: float,
    delta_samples: float,
    sample_size_bytes: float,
    packet_delivery_prob: float,
    unit_prob: float,
) -> float:
    """One step of the per-round traffic recursion (the brute-force oracle).

    A round carries the fresh samples plus the fraction of the previous
    round's bytes that was lost and whose control exchange succeeded.
    """
    p = packet_delivery_prob
    return delta_samples * sample_size_bytes + p * p * (1.0 - unit_prob) * prev_round_bytes


def iterate_round_traffic(
    rate_hz: float,
    sample_size_bytes: float,
    retx_rate_hz: float,
    packet_delivery_prob: float,
    unit_prob: float,
    rounds: int = 1000,
) -> float:
    """Fixed-point iteration of the round recursion from an empty backlog."""
    delta = rate_hz / retx_rate_hz
    x = 0.0
    for _ in range(rounds):
        x = round_traffic_recursion(
            x, delta, sample_size_bytes, packet_delivery_prob, unit_prob
        )
    return x


def steady_state_round_traffic(
    rate_hz: float,
    sample_size_bytes: float,
    retx_rate_hz: float,
    packet_delivery_prob: float,
    unit_prob: float,
) -> float:
    """Closed-form fixed point of the per-round traffic recursion, in bytes."""
    p = packet_delivery_prob
    contraction = p * p * (1.0 - unit_prob)
    assert contraction < 1.0, "recursion does not contract"
    denom = retx_rate_hz * (1.0 - contraction)
    if denom <= 0.0 or not math.isfinite(denom):
        raise NumericDomainError(f"degenerate denominator: {denom}")
    return rate_hz * sample_size_bytes / denom


def steady_state_rate(
    publish_bytes_per_s: float, packet_delivery_prob: float, unit_packets: int
) -> float:
    """Steady-state byte rate offered to the link, retransmissions included.

    Independent of the retransmission rate: equals the per-round traffic
    times rounds per second for every round rate.
    """
    if not 0.0 <= packet_delivery_prob <= 1.0:
        raise ValueError(f"packet_delivery_prob out of [0,1]: {packet_delivery_prob}")
    if unit_packets < 1:
        raise ValueError(f"unit_packets must be >= 1: {unit_packets}")
    p = packet_delivery_prob
    denom = 1.0 - p * p * (1.0 - p ** unit_packets)
    if denom <= 0.0 or not math.isfinite(denom):
        raise NumericDomainError(f"degenerate denominator: {denom}")
    return publish_bytes_per_s / denom


def burst_size(
    sample_size_bytes: float,
    rate_hz: float,
    retx_rate_hz: float,
    packet_delivery_prob: float,
    unit_prob: float,
) -> float:
    """Worst-case back-to-back bytes entering the link in one round.

    One fresh sample coincides with the retransmission of the previous
    round's surviving backlog.
    """
    p = packet_delivery_prob
    x = steady_state_round_traffic(
        rate_hz, sample_size_bytes, retx_rate_hz, packet_delivery_prob, unit_prob
    )
    return sample_size_bytes + p * p * (1.0 - unit_prob) * x


# ---------------------------------------------------------------------------
# Cache sizing and best-effort delivery
# ---------------------------------------------------------------------------

def history_cache_limit(
    link_bytes_per_s: float, utilization: float, sample_size_bytes: float
) -> int:
    """Largest writer-cache sample count whose full flush fits the link budget.

    Floor of budget/sample-size; a zero result is clamped to one (an empty
    cache is unusable) with a warning.
    """
    if link_bytes_per_s <= 0:
        raise ValueError(f"link_bytes_per_s must be > 0: {link_bytes_per_s}")
    if not 0.0 < utilization <= 1.0:
        raise ValueError(f"utilization must be in (0,1]: {utilization}")
    if sample_size_bytes <= 0:
        raise ValueError(f"sample_size_bytes must be > 0: {sample_size_bytes}")
    limit = math.floor(link_bytes_per_s * utilization / sample_size_bytes)
    if limit < 1:
        warnings.warn(
            "link budget smaller than one sample; clamping cache limit to 1",
            RuntimeWarning,
            stacklevel=2,
        )
        return 1
    return limit


def delivery_rate_table(
    payloads: list[int],
    packet_error_rates: list[float],
    max_rtps_message_bytes: int = 65536,
    mtu_bytes: int = 1500,
) -> dict[tuple[int, float], float]:
    """Best-effort sample delivery probability per (payload, PER) cell.

    A sample is delivered only when every one of its packets arrives, so the
    cell value is (1 - PER) raised to the sample's total packet count.
    """
    if not payloads or not packet_error_rates:
        raise ValueError("payloads and packet_error_rates must be non-empty")
    table: dict[tuple[int, float], float] = {}
    for per in packet_error_rates:
        if not 0.0 <= per <= 1.0:
            raise ValueError(f"packet error rate out of [0,1]: {per}")
        for u in payloads:
            plan = fragmentation_plan(u, max_rtps_message_bytes, mtu_bytes)
            table[(u, per)] = (1.0 - per) ** plan.total_packets
    return table
