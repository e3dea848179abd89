"""Deterministic discrete-event loop driving one writer/reader scenario.

Time is continuous double-precision seconds. Ties at equal timestamps are
broken by a fixed rank (link deliveries, then publish timers, then heartbeat
timers) and then by insertion order, so a (scenario, seed) pair always
yields a byte-identical trace.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .link import FORWARD, REVERSE, LinkQueue
from .metrics import compute_metrics
from .protocol import AckNack, Reader, Writer
from .types import (
    MetricsReport,
    ReliabilityKind,
    RetransmitPolicy,
    SampleRecord,
    ScenarioSpec,
)

# Event ranks: deliveries beat protocol timers; publish beats heartbeat.
RANK_DELIVERY = 0
RANK_PUBLISH = 1
RANK_HEARTBEAT = 2

EV_MSG_ARRIVE = "msg"
EV_CTRL_ARRIVE = "ctrl"
EV_TICK = "tick"
EV_HEARTBEAT = "hb"

TRACE_HEADER = ("time_s", "entity", "event", "seq", "bytes", "detail")


@dataclass
class RoundStats:
    """Per-heartbeat-round byte accounting used by the model validation.

    ``offered_bytes_per_round[k]`` is everything enqueued to the link between
    consecutive heartbeat events; only its mean is meaningful (window
    boundaries straddle the per-round recursion's rounds, the sums agree).
    ``burst_bytes[k]`` is the byte volume that entered the link at the exact
    instant of heartbeat k (coincident fresh publish plus the repair volume
    the round triggered); with zero propagation delay the whole control
    exchange resolves at the heartbeat timestamp.
    """

    hb_times: list[float] = field(default_factory=list)
    offered_bytes_per_round: list[float] = field(default_factory=list)
    burst_bytes: list[float] = field(default_factory=list)


@dataclass
class SimulationResult:
    metrics: MetricsReport
    records: list[SampleRecord]
    trace: list[tuple]
    complete: bool
    end_time_s: float
    offered_count: int
    offered_bytes: float
    round_stats: RoundStats | None = None


class _Engine:
    def __init__(self, spec: ScenarioSpec, collect_trace: bool, collect_round_stats: bool):
        self.spec = spec
        self.qos = spec.qos
        self.workload = spec.workload
        self.link = LinkQueue(spec.link, spec.rng_seed)

        sizes = []
        remaining = self.workload.sample_size_bytes
        while remaining > 0:
            chunk = min(self.qos.max_rtps_message_bytes, remaining)
            sizes.append(chunk)
            remaining -= chunk
        self.writer = Writer(qos=self.qos, message_sizes=sizes)
        self.reader = Reader(messages_per_sample=len(sizes))
        self.reliable = self.qos.reliability_kind is ReliabilityKind.RELIABLE

        self.heap: list[tuple] = []
        self._eid = 0
        self.now = 0.0
        self.records: dict[int, SampleRecord] = {}
        self.trace: list[tuple] | None = [] if collect_trace else None
        self.round_stats = RoundStats() if collect_round_stats else None

        self.ticks_fired = 0
        self.in_flight = 0
        self.offered_bytes = 0.0
        self.max_burst = 0.0
        self._cluster_t = -1.0
        self._cluster_bytes = 0.0
        self._round_t = -1.0
        self._round_bytes = 0.0
        self._offered_since_hb = 0.0
        self._hb_count = 0
        self._prev_hb_t: float | None = None
        self._hb_period = self.qos.heartbeat_period_s
        self.end_time = spec.duration_s

    # -- plumbing ----------------------------------------------------------

    def push(self, t: float, rank: int, kind: str, payload) -> None:
        self._eid += 1
        heapq.heappush(self.heap, (t, rank, self._eid, kind, payload))

    def _hb_time(self, k: int) -> float:
        return self.workload.start_time_s + k / self.qos.retransmission_rate_hz

    def log(self, entity: str, event: str, seq, nbytes, detail: str = "") -> None:
        if self.trace is not None:
            self.trace.append((self.now, entity, event, seq, nbytes, detail))

    def _track_burst(self, nbytes: int) -> None:
        if self.now == self._cluster_t:
            self._cluster_bytes += nbytes
        else:
            self._cluster_t = self.now
            self._cluster_bytes = float(nbytes)
        if self._cluster_bytes > self.max_burst:
            self.max_burst = self._cluster_bytes
        if self.now == self._round_t:
            self._round_bytes += nbytes

    # -- transmission ------------------------------------------------------

    def transmit(self, seq: int, idx: int, size: int, event: str) -> None:
        outcome = self.link.send_data(self.now, size)
        entry = self.writer.cache.get(seq)
        if entry is not None:
            entry.idle.discard(idx)
            entry.last_transmit_s = self.now
        self.in_flight += 1
        self.offered_bytes += size
        self._offered_since_hb += size
        self._track_burst(size)
        self.log("link", event, seq, size, f"msg={idx}")
        self.push(
            outcome.arrival_time_s,
            RANK_DELIVERY,
            EV_MSG_ARRIVE,
            (seq, idx, size, outcome.delivered),
        )

    def publish_sample(self, seq: int, tick_t: float) -> None:
        """Hand a sample to the writer; fresh messages go to the link at once."""
        if seq not in self.records:
            self.records[seq] = SampleRecord(sequence_number=seq, publish_time_s=tick_t)
        if self.reliable:
            entry, evicted = self.writer.admit(seq)
            if evicted is not None:
                self.log("writer", "evict", evicted, 0, "keep_last")
            if entry is None:
                if self.writer.blocks_when_full():
                    self.writer.deferred.append((seq, tick_t))
                    self.log("writer", "defer", seq, 0, "cache_full")
                else:
                    self.log("writer", "drop", seq, 0, "cache_full")
                return
        self.log("writer", "publish", seq, self.workload.sample_size_bytes, "")
        for idx, size in enumerate(self.writer.message_sizes):
            self.transmit(seq, idx, size, "transmit")

    def unblock_deferred(self) -> None:
        while self.writer.deferred and not self.writer.cache_full():
            seq, tick_t = self.writer.deferred.popleft()
            self.log("writer", "unblock", seq, 0, f"deferred_from={tick_t:.9f}")
            self.publish_sample(seq, tick_t)

    # -- event handlers ----------------------------------------------------

    def on_tick(self, seq: int) -> None:
        self.ticks_fired += 1
        self.publish_sample(seq, self.now)
        if self.ticks_fired < self.workload.sample_count:
            self.push(
                self.workload.start_time_s + self.ticks_fired / self.workload.publish_rate_hz,
                RANK_PUBLISH,
                EV_TICK,
                seq + 1,
            )

    def on_heartbeat(self) -> None:
        if self.round_stats is not None:
            if self._round_t >= 0.0:
                self.round_stats.burst_bytes.append(self._round_bytes)
            self.round_stats.offered_bytes_per_round.append(self._offered_since_hb)
            self._offered_since_hb = 0.0
        if (
            self.qos.retransmit_policy is RetransmitPolicy.SINGLE_ROUND
            and self._prev_hb_t is not None
        ):
            for seq in self.writer.abandon_stale(self._prev_hb_t):
                self.log("writer", "abandon", seq, 0, "round_control_failed")
            self.unblock_deferred()
        self._prev_hb_t = self.now
        if self.round_stats is not None:
            self.round_stats.hb_times.append(self.now)
            # Start this round's burst window; a same-instant fresh publish
            # already sits in the current cluster.
            self._round_t = self.now
            self._round_bytes = self._cluster_bytes if self._cluster_t == self.now else 0.0
        hb = self.writer.heartbeat()
        if hb is not None:
            self.log("writer", "heartbeat", hb.min_seq, 0, f"range={hb.min_seq}..{hb.max_seq}")
            arrival, ok = self.link.send_control(self.now, FORWARD)
            if ok:
                self.push(arrival, RANK_DELIVERY, EV_CTRL_ARRIVE, ("hb", hb))
            else:
                self.log("link", "heartbeat_lost", hb.min_seq, 0, "")
        # Timer times derive from the count (divided, not accumulated): a
        # heartbeat that mathematically coincides with a publish tick must
        # get the bitwise-identical timestamp so the tie rank applies.
        self._hb_count += 1
        next_t = self._hb_time(self._hb_count + 1)
        if next_t <= self.spec.duration_s:
            self.push(next_t, RANK_HEARTBEAT, EV_HEARTBEAT, None)

    def on_ctrl_arrive(self, payload) -> None:
        kind, body = payload
        if kind == "hb":
            an = self.reader.handle_heartbeat(body)
            self.log("reader", "acknack", body.max_seq, 0,
                     f"acked={len(an.acked)} nacked={len(an.missing)}")
            arrival, ok = self.link.send_control(self.now, REVERSE)
            if ok:
                self.push(arrival, RANK_DELIVERY, EV_CTRL_ARRIVE, ("an", an))
            else:
                self.log("link", "acknack_lost", body.max_seq, 0, "")
        else:
            self.on_acknack(body)

    def on_acknack(self, an: AckNack) -> None:
        purged, resend, unknown = self.writer.handle_acknack(an)
        for seq in purged:
            rec = self.records.get(seq)
            if rec is not None:
                rec.acknowledged = True
            self.log("writer", "ack_purge", seq, 0, "")
        for seq in unknown:
            self.log("writer", "nack_unknown", seq, 0, "ignored")
        for seq, idx in resend:
            self.transmit(seq, idx, self.writer.message_sizes[idx], "retransmit")
        if purged:
            self.unblock_deferred()

    def on_msg_arrive(self, payload) -> None:
        seq, idx, size, delivered = payload
        self.in_flight -= 1
        entry = self.writer.cache.get(seq)
        if entry is not None:
            entry.idle.add(idx)
        if not delivered:
            self.log("link", "lost", seq, size, f"msg={idx}")
            return
        completed, duplicate = self.reader.on_message(seq, idx)
        if duplicate:
            self.log("reader", "duplicate", seq, size, f"msg={idx}")
            return
        self.log("reader", "deliver_msg", seq, size, f"msg={idx}")
        if completed:
            rec = self.records[seq]
            if rec.delivery_time_s is None:
                rec.delivery_time_s = self.now
            self.log("reader", "deliver", seq, self.workload.sample_size_bytes, "")

    # -- main loop ---------------------------------------------------------

    def finished_early(self) -> bool:
        if self.ticks_fired < self.workload.sample_count:
            return False
        if self.reliable:
            return not self.writer.cache and not self.writer.deferred
        return self.in_flight == 0

    def run(self) -> SimulationResult:
        w = self.workload
        self.push(w.start_time_s, RANK_PUBLISH, EV_TICK, 1)
        first_hb = self._hb_time(1)
        if self.reliable and first_hb <= self.spec.duration_s:
            self.push(first_hb, RANK_HEARTBEAT, EV_HEARTBEAT, None)

        while self.heap:
            t, _rank, _eid, kind, payload = heapq.heappop(self.heap)
            if t > self.spec.duration_s:
                break
            self.now = t
            if kind == EV_MSG_ARRIVE:
                self.on_msg_arrive(payload)
            elif kind == EV_CTRL_ARRIVE:
                self.on_ctrl_arrive(payload)
            elif kind == EV_TICK:
                self.on_tick(payload)
            else:
                self.on_heartbeat()
            if self.finished_early():
                self.end_time = self.now
                break

        records = [self.records[k] for k in sorted(self.records)]
        complete = (
            self.ticks_fired == w.sample_count
            and not self.writer.deferred
            and all(
                r.delivered and (r.acknowledged or not self.reliable) for r in records
            )
        )
        metrics = compute_metrics(records, self.max_burst)
        return SimulationResult(
            metrics=metrics,
            records=records,
            trace=self.trace if self.trace is not None else [],
            complete=complete,
            end_time_s=self.end_time,
            offered_count=self.ticks_fired,
            offered_bytes=self.offered_bytes,
            round_stats=self.round_stats,
        )


def run_scenario(
    spec: ScenarioSpec,
    collect_trace: bool = True,
    collect_round_stats: bool = False,
) -> SimulationResult:
    """Simulate one scenario to completion or until its duration elapses.

    Identical specs (seed included) produce identical results, traces and
    metrics. Runs that end with unacknowledged or undelivered samples are
    reported with ``complete=False``.
    """
    return _Engine(spec, collect_trace, collect_round_stats).run()
