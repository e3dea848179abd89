"""Writer and reader state machines for the Heartbeat/AckNack repair loop.

The writer keeps published samples in its history cache until the reader
acknowledges them; it periodically advertises the cached sequence range via
heartbeats. The reader answers every heartbeat with an AckNack that acks
complete samples and nacks the message indices still missing from
incomplete ones. Nacked messages are retransmitted whole: losing one IP
fragment loses the message at reassembly.

A message is never re-offered while a previous copy is still queued or in
flight; the writer's pacing queue already holds it, so a second nack for it
is a no-op. Without that rule a fast heartbeat over a backlogged queue would
duplicate the entire backlog every round. Each cache entry keeps an ``idle``
index set (messages whose last copy has left the link) for this purpose.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .types import HistoryKind, OnFullCache, QosProfile


@dataclass
class CachedSample:
    """Writer history cache entry. ``idle`` holds the message indices whose
    last transmission has resolved (delivered or lost), i.e. re-sendable."""

    seq: int
    idle: set[int] = field(default_factory=set)
    last_transmit_s: float = -1.0


@dataclass(frozen=True)
class Heartbeat:
    min_seq: int
    max_seq: int


@dataclass(frozen=True)
class AckNack:
    """Acked = samples the reader holds completely. ``missing`` pairs each
    incomplete sample with the reader's missing-index set, or None meaning
    every message (nothing received yet)."""

    acked: tuple[int, ...]
    missing: tuple[tuple[int, set | None], ...]


class Writer:
    def __init__(self, qos: QosProfile, message_sizes: list[int]):
        self.qos = qos
        self.message_sizes = message_sizes
        self.cache: dict[int, CachedSample] = {}
        self.deferred: deque[tuple[int, float]] = deque()

    def cache_full(self) -> bool:
        cap = self.qos.history_cache_capacity
        if self.qos.history_kind is HistoryKind.KEEP_LAST:
            depth = self.qos.history_depth
            cap = depth if cap is None else min(cap, depth)
        return cap is not None and len(self.cache) >= cap

    def admit(self, seq: int) -> tuple[CachedSample | None, int | None]:
        """Place a fresh sample in the cache.

        Returns (entry, evicted_seq); entry is None when the writer must
        defer or drop instead, evicted_seq reports a KEEP_LAST eviction.
        """
        evicted = None
        if self.cache_full():
            if self.qos.history_kind is HistoryKind.KEEP_LAST:
                evicted = min(self.cache)
                del self.cache[evicted]
            else:
                return None, None
        entry = CachedSample(seq=seq)
        self.cache[seq] = entry
        return entry, evicted

    def blocks_when_full(self) -> bool:
        return (
            self.qos.history_kind is HistoryKind.KEEP_ALL
            and self.qos.on_full is OnFullCache.BLOCK
        )

    def heartbeat(self) -> Heartbeat | None:
        """Advertise the cached sequence range; nothing to say when empty."""
        if not self.cache:
            return None
        return Heartbeat(min_seq=min(self.cache), max_seq=max(self.cache))

    def handle_acknack(
        self, an: AckNack
    ) -> tuple[list[int], list[tuple[int, int]], list[int]]:
        """Apply an AckNack: purge acked samples, pick messages to retransmit.

        Returns (purged seqs, (seq, message index) pairs to resend in
        sequence order, unknown nacked seqs). Pipelined messages are skipped.
        """
        purged = []
        for seq in an.acked:
            if seq in self.cache:
                del self.cache[seq]
                purged.append(seq)
        resend: list[tuple[int, int]] = []
        unknown = []
        for seq, missing in an.missing:
            entry = self.cache.get(seq)
            if entry is None:
                unknown.append(seq)
                continue
            if missing is None:
                idxs = sorted(entry.idle)
            else:
                idxs = sorted(entry.idle & missing)
            resend.extend((seq, idx) for idx in idxs)
        return purged, resend, unknown

    def abandon_stale(self, before_s: float) -> list[int]:
        """Drop samples not (re)transmitted since ``before_s``.

        Single-round accounting: a sample whose repair round failed is
        forgotten instead of carried, matching the per-round traffic
        recursion. Never called under the persistent (real) policy.
        """
        stale = [seq for seq, e in self.cache.items() if e.last_transmit_s < before_s]
        for seq in stale:
            del self.cache[seq]
        return stale


class Reader:
    """Reassembly and acknowledgement state of the single subscriber."""

    def __init__(self, messages_per_sample: int):
        self.messages_per_sample = messages_per_sample
        # seq -> set of missing message indices; absent + not complete means
        # nothing received yet (all missing).
        self.missing: dict[int, set[int]] = {}
        self.complete: set[int] = set()

    def on_message(self, seq: int, index: int) -> tuple[bool, bool]:
        """Register one arrived message. Returns (completed_now, duplicate)."""
        if seq in self.complete:
            return False, True
        miss = self.missing.get(seq)
        if miss is None:
            if self.messages_per_sample == 1:
                self.complete.add(seq)
                return True, False
            miss = set(range(self.messages_per_sample))
            miss.discard(index)
            self.missing[seq] = miss
            return False, False
        if index not in miss:
            return False, True
        miss.discard(index)
        if not miss:
            del self.missing[seq]
            self.complete.add(seq)
            return True, False
        return False, False

    def handle_heartbeat(self, hb: Heartbeat) -> AckNack:
        """Answer a heartbeat: ack complete samples, nack missing messages.

        Missing sets are shared by reference (the in-process reply arrives
        with zero staleness); a heartbeat entirely below the high-water mark
        yields a positive ack with no nacks.
        """
        acked = []
        nacks = []
        for seq in range(hb.min_seq, hb.max_seq + 1):
            if seq in self.complete:
                acked.append(seq)
            elif seq in self.missing:
                nacks.append((seq, self.missing[seq]))
            else:
                nacks.append((seq, None))
        return AckNack(acked=tuple(acked), missing=tuple(nacks))
