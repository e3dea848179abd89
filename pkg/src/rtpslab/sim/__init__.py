"""Deterministic discrete-event simulation of one writer/reader pair."""

from .engine import RoundStats, SimulationResult, run_scenario
from .metrics import compute_metrics
from .protocol import AckNack, CachedSample, Heartbeat, Reader, Writer
from .types import (
    UNBOUNDED,
    CongestionModel,
    HistoryKind,
    LinkModel,
    MetricsReport,
    OnFullCache,
    QosProfile,
    ReliabilityKind,
    RetransmitPolicy,
    SampleRecord,
    ScenarioSpec,
    WorkloadSpec,
)

__all__ = [
    "AckNack",
    "CachedSample",
    "CongestionModel",
    "Heartbeat",
    "HistoryKind",
    "LinkModel",
    "MetricsReport",
    "OnFullCache",
    "QosProfile",
    "Reader",
    "ReliabilityKind",
    "RetransmitPolicy",
    "RoundStats",
    "SampleRecord",
    "ScenarioSpec",
    "SimulationResult",
    "UNBOUNDED",
    "WorkloadSpec",
    "Writer",
    "compute_metrics",
    "run_scenario",
]
