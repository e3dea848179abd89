"""Single-server FIFO link with per-packet loss, outages and optional congestion.

Data messages serialize through one queue at the link capacity; a message
larger than the MTU is fragmented into MTU-sized packets and the whole
message is lost if any fragment is. Control messages consume no capacity
(they only see propagation delay, loss and outages), which keeps the
capacity budget aligned with data traffic.

Randomness comes from two Mersenne Twister streams keyed off the scenario
seed, one per link direction: forward = Random(seed * 2), reverse =
Random(seed * 2 + 1). The rule is part of the reproducibility contract.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .types import LinkModel

FORWARD = 0  # writer -> reader (data and heartbeats)
REVERSE = 1  # reader -> writer (acknacks)


@dataclass(frozen=True)
class DataOutcome:
    """Fate of one data message decided at enqueue time."""

    arrival_time_s: float
    delivered: bool
    fragment_count: int


class LinkQueue:
    """Deterministic link state for one scenario run."""

    def __init__(self, model: LinkModel, seed: int):
        self.model = model
        self._rng = {
            FORWARD: random.Random(seed * 2),
            REVERSE: random.Random(seed * 2 + 1),
        }
        self._busy_until = 0.0

    def queue_depth_bytes(self, now: float) -> float:
        """Bytes currently backlogged in the capacity queue."""
        return max(0.0, self._busy_until - now) * self.model.capacity_bytes_per_s

    def queue_empty(self, now: float) -> bool:
        return self._busy_until <= now

    def send_data(self, now: float, size_bytes: int) -> DataOutcome:
        """Enqueue one data message; returns its (pre-drawn) fate.

        Fragment drain times follow from the FIFO schedule known at enqueue,
        so loss draws and outage checks happen here and the caller only has
        to schedule the arrival event.
        """
        m = self.model
        rng = self._rng[FORWARD]
        congested = (
            m.congestion.enabled
            and self.queue_depth_bytes(now) > m.congestion.threshold_bytes
        )
        p = m.delivery_prob
        if congested:
            p *= m.congestion.congested_delivery_factor

        fragments = self._fragment_sizes(size_bytes)
        start = max(now, self._busy_until)
        delivered = True
        drain = start
        for frag in fragments:
            drain += frag / m.capacity_bytes_per_s
            ok = True if p >= 1.0 else rng.random() < p
            if m.in_outage(drain, drain + m.propagation_delay_s):
                ok = False
            delivered = delivered and ok
        self._busy_until = drain
        return DataOutcome(
            arrival_time_s=drain + m.propagation_delay_s,
            delivered=delivered,
            fragment_count=len(fragments),
        )

    def send_control(self, now: float, direction: int) -> tuple[float, bool]:
        """Send one control packet; returns (arrival time, delivered)."""
        m = self.model
        rng = self._rng[direction]
        arrival = now + m.propagation_delay_s
        ok = True if m.delivery_prob >= 1.0 else rng.random() < m.delivery_prob
        if m.in_outage(now, arrival):
            ok = False
        return arrival, ok

    def _fragment_sizes(self, size_bytes: int) -> list[int]:
        mtu = self.model.mtu_bytes
        if size_bytes <= mtu:
            return [size_bytes]
        full, rest = divmod(size_bytes, mtu)
        sizes = [mtu] * full
        if rest:
            sizes.append(rest)
        return sizes
