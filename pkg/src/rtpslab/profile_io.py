"""Serialization boundary: QoS profile XML, scenario JSON, metrics/trace CSV.

The emitted XML follows the publicly documented Fast DDS profile layout
(transport descriptor, participant, data writer, data reader) so the file is
drop-in usable; output is byte-stable (fixed element order, two-space
indentation, UTF-8, trailing newline) and pinned by a golden file.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

from .sim.types import (
    CongestionModel,
    HistoryKind,
    LinkModel,
    MetricsReport,
    OnFullCache,
    QosProfile,
    ReliabilityKind,
    RetransmitPolicy,
    ScenarioSpec,
    WorkloadSpec,
)

METRICS_HEADER = (
    "scenario,payload_bytes,mode,reception_rate_hz,avg_latency_ms,"
    "jitter_ms,delivery_ratio,max_burst_bytes,complete"
)


class ScenarioError(ValueError):
    """Raised when a scenario document is missing or out of range; the
    message names the offending key."""


@dataclass(frozen=True)
class ProfileNames:
    transport: str = "wireless_udp_transport"
    participant: str = "wireless_participant"
    writer: str = "wireless_writer"
    reader: str = "wireless_reader"


def split_heartbeat_period(retransmission_rate_hz: float) -> tuple[int, int]:
    """Split the heartbeat period into whole seconds and nanoseconds.

    Nanoseconds round to nearest, ties away from zero, and carry into the
    seconds field when they round up to a full second.
    """
    period = 1.0 / retransmission_rate_hz
    sec = int(period)
    nanosec = int(math.floor((period - sec) * 1e9 + 0.5))
    if nanosec >= 1_000_000_000:
        sec += 1
        nanosec -= 1_000_000_000
    return sec, nanosec


def emit_profile_xml(profile: QosProfile, names: ProfileNames = ProfileNames()) -> str:
    """Render a QoS profile as a deterministic Fast-DDS-style XML document."""
    sec, nanosec = split_heartbeat_period(profile.retransmission_rate_hz)
    history_kind = profile.history_kind.value
    reliability = profile.reliability_kind.value

    out = io.StringIO()
    w = out.write
    w('<?xml version="1.0" encoding="UTF-8"?>\n')
    w('<profiles xmlns="http://www.eprosima.com/XMLSchemas/fastRTPS_Profiles">\n')
    w("  <transport_descriptors>\n")
    w("    <transport_descriptor>\n")
    w(f"      <transport_id>{names.transport}</transport_id>\n")
    w("      <type>UDPv4</type>\n")
    w(f"      <maxMessageSize>{profile.max_rtps_message_bytes}</maxMessageSize>\n")
    w("    </transport_descriptor>\n")
    w("  </transport_descriptors>\n")
    w(f'  <participant profile_name="{names.participant}" is_default_profile="true">\n')
    w("    <rtps>\n")
    w("      <userTransports>\n")
    w(f"        <transport_id>{names.transport}</transport_id>\n")
    w("      </userTransports>\n")
    w("      <useBuiltinTransports>false</useBuiltinTransports>\n")
    w("    </rtps>\n")
    w("  </participant>\n")
    w(f'  <data_writer profile_name="{names.writer}" is_default_profile="true">\n')
    w("    <qos>\n")
    w("      <reliability>\n")
    w(f"        <kind>{reliability}</kind>\n")
    w("      </reliability>\n")
    w("    </qos>\n")
    w("    <times>\n")
    w("      <heartbeatPeriod>\n")
    w(f"        <sec>{sec}</sec>\n")
    w(f"        <nanosec>{nanosec}</nanosec>\n")
    w("      </heartbeatPeriod>\n")
    w("    </times>\n")
    w("    <topic>\n")
    w("      <historyQos>\n")
    w(f"        <kind>{history_kind}</kind>\n")
    w("      </historyQos>\n")
    if profile.history_cache_capacity is not None:
        w("      <resourceLimitsQos>\n")
        w(f"        <max_samples>{profile.history_cache_capacity}</max_samples>\n")
        w("      </resourceLimitsQos>\n")
    else:
        w("      <!-- unbounded history: resource limits left at defaults -->\n")
    w("    </topic>\n")
    w("  </data_writer>\n")
    w(f'  <data_reader profile_name="{names.reader}" is_default_profile="true">\n')
    w("    <qos>\n")
    w("      <reliability>\n")
    w(f"        <kind>{reliability}</kind>\n")
    w("      </reliability>\n")
    w("    </qos>\n")
    w("    <topic>\n")
    w("      <historyQos>\n")
    w(f"        <kind>{history_kind}</kind>\n")
    w("      </historyQos>\n")
    w("    </topic>\n")
    w("  </data_reader>\n")
    w("</profiles>\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Scenario JSON
# ---------------------------------------------------------------------------

def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ScenarioError(f"missing key: {context}{key}")
    return mapping[key]


def parse_scenario(text: str, name: str = "scenario") -> ScenarioSpec:
    """Parse and validate a scenario JSON document.

    ``link.per`` becomes a delivery probability, ``link.capacity_bps`` (bits
    per second) becomes bytes per second. Optional keys: ``workload.start_s``,
    ``link.congestion{threshold_bytes,delivery_factor}``, ``qos.history_depth``,
    ``qos.on_full`` (BLOCK|DROP), ``qos.retransmit_policy``
    (PERSISTENT|SINGLE_ROUND).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}") from exc

    wl = _require(doc, "workload", "")
    link = _require(doc, "link", "")
    qos = _require(doc, "qos", "")
    duration = _require(doc, "duration_s", "")
    seed = _require(doc, "seed", "")

    per = _require(link, "per", "link.")
    if not 0.0 <= per <= 1.0:
        raise ScenarioError(f"link.per out of range: {per}")
    outages = _require(link, "outages", "link.")
    windows = []
    for pair in outages:
        if len(pair) != 2 or pair[1] <= pair[0]:
            raise ScenarioError(f"link.outages window malformed: {pair}")
        windows.append((float(pair[0]), float(pair[1])))
    windows.sort()
    for (s0, e0), (s1, _e1) in zip(windows, windows[1:]):
        if s1 < e0:
            raise ScenarioError(f"link.outages windows overlap at {s1}")

    congestion = CongestionModel()
    if "congestion" in link:
        cg = link["congestion"]
        congestion = CongestionModel(
            threshold_bytes=float(_require(cg, "threshold_bytes", "link.congestion.")),
            congested_delivery_factor=float(
                _require(cg, "delivery_factor", "link.congestion.")
            ),
        )

    try:
        link_model = LinkModel(
            delivery_prob=1.0 - per,
            capacity_bytes_per_s=float(_require(link, "capacity_bps", "link.")) / 8.0,
            mtu_bytes=int(_require(link, "mtu", "link.")),
            propagation_delay_s=float(_require(link, "prop_delay_s", "link.")),
            outage_windows=tuple(windows),
            congestion=congestion,
        )
        workload = WorkloadSpec(
            publish_rate_hz=float(_require(wl, "rate_hz", "workload.")),
            sample_size_bytes=int(_require(wl, "payload_bytes", "workload.")),
            sample_count=int(_require(wl, "count", "workload.")),
            start_time_s=float(wl.get("start_s", 0.0)),
        )
        capacity = _require(qos, "history_capacity", "qos.")
        if isinstance(capacity, str):
            if capacity.upper() != "UNBOUNDED":
                raise ScenarioError(f"qos.history_capacity invalid: {capacity}")
            capacity = None
        reliability = ReliabilityKind(_require(qos, "reliability", "qos."))
        history = HistoryKind(_require(qos, "history", "qos."))
        qos_profile = QosProfile(
            max_rtps_message_bytes=int(_require(qos, "max_message_bytes", "qos.")),
            retransmission_rate_hz=float(_require(qos, "retx_rate_hz", "qos.")),
            history_cache_capacity=capacity,
            reliability_kind=reliability,
            history_kind=history,
            history_depth=int(qos.get("history_depth", 1)),
            on_full=OnFullCache(qos.get("on_full", "BLOCK")),
            retransmit_policy=RetransmitPolicy(qos.get("retransmit_policy", "PERSISTENT")),
        )
        return ScenarioSpec(
            workload=workload,
            link=link_model,
            qos=qos_profile,
            duration_s=float(duration),
            rng_seed=int(seed),
            name=name,
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def render_scenario(spec: ScenarioSpec) -> str:
    """Inverse of parse_scenario, used for fixture generation and round-trips."""
    capacity = spec.qos.history_cache_capacity
    doc = {
        "workload": {
            "rate_hz": spec.workload.publish_rate_hz,
            "payload_bytes": spec.workload.sample_size_bytes,
            "count": spec.workload.sample_count,
            "start_s": spec.workload.start_time_s,
        },
        "link": {
            "per": 1.0 - spec.link.delivery_prob,
            "capacity_bps": spec.link.capacity_bytes_per_s * 8.0,
            "mtu": spec.link.mtu_bytes,
            "prop_delay_s": spec.link.propagation_delay_s,
            "outages": [[s, e] for s, e in spec.link.outage_windows],
        },
        "qos": {
            "max_message_bytes": spec.qos.max_rtps_message_bytes,
            "retx_rate_hz": spec.qos.retransmission_rate_hz,
            "history_capacity": "UNBOUNDED" if capacity is None else capacity,
            "reliability": spec.qos.reliability_kind.value,
            "history": spec.qos.history_kind.value,
            "history_depth": spec.qos.history_depth,
            "on_full": spec.qos.on_full.value,
            "retransmit_policy": spec.qos.retransmit_policy.value,
        },
        "duration_s": spec.duration_s,
        "seed": spec.rng_seed,
    }
    if spec.link.congestion.enabled:
        doc["link"]["congestion"] = {
            "threshold_bytes": spec.link.congestion.threshold_bytes,
            "delivery_factor": spec.link.congestion.congested_delivery_factor,
        }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Metrics and trace CSV
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsRow:
    """One metrics CSV row: a labelled report plus the CSV-only context."""

    scenario: str
    payload_bytes: int
    mode: str
    report: MetricsReport
    publish_interval_s: float
    complete: bool


def write_metrics_csv(rows: list[MetricsRow]) -> str:
    """Render metrics rows; unavailable values become empty fields.

    Average latency beyond one hundred publish intervals blanks the latency
    and jitter columns (the run is effectively stalled, matching the dashes
    convention in degraded-mode reporting).
    """
    if not rows:
        raise ValueError("rows must be non-empty")
    lines = [METRICS_HEADER]
    for row in rows:
        rep = row.report
        rate = "" if rep.reception_rate_hz is None else f"{rep.reception_rate_hz:.3f}"
        latency = ""
        jitter = ""
        if rep.avg_latency_s is not None:
            stalled = rep.avg_latency_s > 100.0 * row.publish_interval_s
            if not stalled:
                latency = f"{rep.avg_latency_s * 1e3:.3f}"
                if rep.jitter_s is not None:
                    jitter = f"{rep.jitter_s * 1e3:.3f}"
        lines.append(
            f"{row.scenario},{row.payload_bytes},{row.mode},{rate},{latency},"
            f"{jitter},{rep.delivery_ratio:.6f},{rep.max_burst_bytes:.0f},"
            f"{'true' if row.complete else 'false'}"
        )
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: list[tuple]) -> str:
    """Render an event trace as CSV: time_s,entity,event,seq,bytes,detail."""
    lines = ["time_s,entity,event,seq,bytes,detail"]
    for t, entity, event, seq, nbytes, detail in trace:
        lines.append(f"{t:.9f},{entity},{event},{seq},{nbytes},{detail}")
    return "\n".join(lines) + "\n"
