"""Run statistics derived from sample records."""

from __future__ import annotations

import statistics

from .types import MetricsReport, SampleRecord


def compute_metrics(records: list[SampleRecord], max_burst_bytes: float = 0.0) -> MetricsReport:
    """Summarize a finished run.

    Reception rate is received count over the span between the first and
    last reception, so it needs at least two deliveries; latency averages
    publish-to-delivery over delivered samples; jitter is the population
    standard deviation of those latencies.
    """
    delivered = [r for r in records if r.delivery_time_s is not None]
    received = len(delivered)

    reception_rate = None
    if received >= 2:
        times = [r.delivery_time_s for r in delivered]
        span = max(times) - min(times)
        if span > 0.0:
            reception_rate = received / span

    avg_latency = None
    jitter = None
    if received >= 1:
        latencies = [r.delivery_time_s - r.publish_time_s for r in delivered]
        avg_latency = statistics.fmean(latencies)
        jitter = statistics.pstdev(latencies) if received >= 2 else 0.0

    ratio = received / len(records) if records else 0.0
    return MetricsReport(
        reception_rate_hz=reception_rate,
        avg_latency_s=avg_latency,
        jitter_s=jitter,
        delivery_ratio=ratio,
        max_burst_bytes=max_burst_bytes,
        received_count=received,
    )
