"""Command-line front door: model curves, profile tuning, simulation, validation.

Human-facing units live here only: ``--link-mbps`` is decimal megabits per
second, byte arguments accept a ``k`` (x1000) or ``m`` (x1e6) suffix, and
payload sweeps use ``start..stop[:step]`` with the step defaulting to the
start. Internally everything is bytes and seconds.

Exit codes: 0 ok, 1 usage error, 2 validation tolerance breach, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .model import (
    burst_size,
    delivery_rate_table,
    fragmentation_plan,
    steady_state_rate,
)
from .optimizer import OptimizationInput, feasibility, optimize_profile
from .profile_io import (
    MetricsRow,
    emit_profile_xml,
    parse_scenario,
    write_metrics_csv,
    write_trace_csv,
)
from .sim import MetricsReport, run_scenario
from .validate import run_agreement_grid

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TOLERANCE = 2
EXIT_IO = 3

DEFAULT_RETX_RATES = "0.3333333333333333,1,3,10,30,60"
DEFAULT_DDS_RETX_HZ = 1.0 / 3.0


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class UsageError(ValueError):
    pass


def parse_bytes(text: str) -> int:
    """Parse a byte count with optional k (x1000) or m (x1e6) suffix."""
    raw = text.strip().lower()
    factor = 1
    if raw.endswith("k"):
        factor, raw = 1000, raw[:-1]
    elif raw.endswith("m"):
        factor, raw = 1_000_000, raw[:-1]
    try:
        return int(round(float(raw) * factor))
    except ValueError as exc:
        raise UsageError(f"bad byte value: {text!r}") from exc


def parse_byte_list(text: str) -> list[int]:
    """Comma list or start..stop[:step] range of byte counts (step: start)."""
    if ".." in text:
        head, _, tail = text.partition("..")
        step_text = None
        if ":" in tail:
            tail, _, step_text = tail.partition(":")
        start = parse_bytes(head)
        stop = parse_bytes(tail)
        step = parse_bytes(step_text) if step_text else start
        if step <= 0 or stop < start:
            raise UsageError(f"bad range: {text!r}")
        return list(range(start, stop + 1, step))
    return [parse_bytes(part) for part in text.split(",") if part.strip()]


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list: {text!r}") from exc


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list: {text!r}") from exc


def default_seed(explicit: int | None, fallback: int = 1) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("RTPSLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"RTPSLAB_SEED is not an integer: {env!r}") from exc
    return fallback


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        print(f"I/O error writing {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from exc


def _maybe_plot(enabled: bool, render, *args) -> None:
    if not enabled:
        return
    from . import figures  # lazy: keeps matplotlib out of pure-CSV runs

    render_fn = getattr(figures, render)
    try:
        render_fn(*args)
    except OSError as exc:
        print(f"I/O error writing figure: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from exc


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

def cmd_model(args) -> int:
    rows: list[dict] = []
    if args.kind == "rdds":
        payloads = parse_byte_list(args.payloads)
        nips = parse_int_list(args.nip)
        if not payloads or not nips:
            raise UsageError("empty grid")
        header = "payload_bytes,n_ip,per,publish_rate_bytes_per_s,steady_rate_bytes_per_s,amplification"
        lines = [header]
        p = 1.0 - args.per
        for u in payloads:
            for nip in nips:
                r_pub = args.rate * u
                r_dds = steady_state_rate(r_pub, p, nip)
                rows.append(
                    {
                        "payload_bytes": u,
                        "n_ip": nip,
                        "per": args.per,
                        "publish_rate_bytes_per_s": r_pub,
                        "steady_rate_bytes_per_s": r_dds,
                    }
                )
                lines.append(f"{u},{nip},{args.per:g},{r_pub:.3f},{r_dds:.3f},{r_dds / r_pub:.6f}")
        figure = "model_rdds_figure"
    elif args.kind == "burst":
        pub_rates = parse_float_list(args.pub_rates)
        retx_rates = parse_float_list(args.retx_rates)
        if not pub_rates or not retx_rates:
            raise UsageError("empty grid")
        pub_bytes = args.pub_rate_mbps * 1e6 / 8.0
        p = 1.0 - args.per
        header = "publish_rate_hz,retx_rate_hz,sample_bytes,burst_bytes,burst_mbps_over_1s,default_retx"
        lines = [header]
        for r in pub_rates:
            u = pub_bytes / r
            plan = fragmentation_plan(int(round(u)), args.max_message, args.mtu)
            q = p**plan.total_packets
            for n in retx_rates:
                burst = burst_size(u, r, n, p, q)
                is_default = abs(n - DEFAULT_DDS_RETX_HZ) < 1e-9
                rows.append(
                    {
                        "publish_rate_hz": r,
                        "retx_rate_hz": n,
                        "burst_bytes": burst,
                        "default_retx": is_default,
                    }
                )
                lines.append(
                    f"{r:g},{n:.6g},{u:.0f},{burst:.3f},{burst * 8 / 1e6:.3f},"
                    f"{'true' if is_default else 'false'}"
                )
        figure = "model_burst_figure"
    else:  # delivery
        payloads = parse_byte_list(args.payloads)
        pers = parse_float_list(args.per_list)
        if not payloads or not pers:
            raise UsageError("empty grid")
        table = delivery_rate_table(payloads, pers, args.max_message, args.mtu)
        header = "payload_bytes,per,total_packets,delivery_prob,delivery_pct"
        lines = [header]
        for per in pers:
            for u in payloads:
                plan = fragmentation_plan(u, args.max_message, args.mtu)
                prob = table[(u, per)]
                rows.append({"payload_bytes": u, "per": per, "delivery_prob": prob})
                lines.append(f"{u},{per:g},{plan.total_packets},{prob:.6f},{prob * 100:.2f}")
        figure = "model_delivery_figure"

    csv_text = "\n".join(lines) + "\n"
    if args.output:
        out = Path(args.output)
        _write_text(out, csv_text)
        print(f"wrote {out}")
        _maybe_plot(args.plot, figure, rows, str(out.with_suffix(".png")))
        if args.plot:
            print(f"wrote {out.with_suffix('.png')}")
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------

def cmd_optimize(args) -> int:
    if not 0.0 < args.util <= 1.0:
        raise UsageError(f"--util must be in (0, 1]: {args.util}")
    link_bytes = args.link_mbps * 1e6 / 8.0
    inp = OptimizationInput(
        publish_rate_hz=args.rate,
        sample_size_bytes=parse_bytes(args.payload),
        link_throughput_bytes_per_s=link_bytes,
        utilization=args.util,
    )
    profile = optimize_profile(inp, mtu_bytes=args.mtu)
    xml = emit_profile_xml(profile)
    out = Path(args.output)
    _write_text(out, xml)

    print(f"max RTPS message : {profile.max_rtps_message_bytes} B")
    print(f"retransmission   : {profile.retransmission_rate_hz:g} Hz (2x publish rate)")
    print(f"history cache    : {profile.history_cache_capacity} samples")
    print(f"link budget      : {link_bytes * args.util:.0f} B/s ({args.link_mbps * args.util:g} Mb/s)")
    if args.per is not None:
        rep = feasibility(inp, 1.0 - args.per)
        verdict = "FEASIBLE" if rep.feasible else "INFEASIBLE"
        print(
            f"feasibility @PER {args.per:g}: offered {rep.offered_rate_bytes_per_s:.0f} B/s "
            f"vs budget {rep.link_budget_bytes_per_s:.0f} B/s -> {verdict}"
        )
        print(f"predicted worst-case burst: {rep.predicted_burst_bytes:.0f} B")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _mean_or_none(values: list[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return sum(present) / len(present) if present else None


def cmd_simulate(args) -> int:
    path = Path(args.scenario)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"I/O error reading {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    spec = parse_scenario(text, name=path.stem)
    base_seed = default_seed(args.seed, fallback=spec.rng_seed)
    out_dir = Path(args.out_dir)

    rows: list[MetricsRow] = []
    timelines = []
    interval = 1.0 / spec.workload.publish_rate_hz
    for trial in range(args.trials):
        seed = base_seed + trial
        trial_spec = dataclasses.replace(spec, rng_seed=seed)
        result = run_scenario(trial_spec)
        rows.append(
            MetricsRow(
                scenario=f"{spec.name}[trial={trial},seed={seed}]",
                payload_bytes=spec.workload.sample_size_bytes,
                mode=spec.qos.reliability_kind.value,
                report=result.metrics,
                publish_interval_s=interval,
                complete=result.complete,
            )
        )
        timelines.append(
            (seed, [r.delivery_time_s for r in result.records if r.delivery_time_s is not None])
        )
        _write_text(out_dir / f"trace_trial{trial}.csv", write_trace_csv(result.trace))
        status = "complete" if result.complete else "INCOMPLETE"
        rate = result.metrics.reception_rate_hz
        print(
            f"trial {trial} seed {seed}: received {result.metrics.received_count}"
            f"/{result.offered_count}, reception "
            f"{'n/a' if rate is None else f'{rate:.2f} Hz'}, {status}"
        )

    reports = [r.report for r in rows]
    aggregate = MetricsReport(
        reception_rate_hz=_mean_or_none([m.reception_rate_hz for m in reports]),
        avg_latency_s=_mean_or_none([m.avg_latency_s for m in reports]),
        jitter_s=_mean_or_none([m.jitter_s for m in reports]),
        delivery_ratio=sum(m.delivery_ratio for m in reports) / len(reports),
        max_burst_bytes=max(m.max_burst_bytes for m in reports),
        received_count=round(sum(m.received_count for m in reports) / len(reports)),
    )
    rows.append(
        MetricsRow(
            scenario=f"{spec.name}[aggregate:mean]",
            payload_bytes=spec.workload.sample_size_bytes,
            mode=spec.qos.reliability_kind.value,
            report=aggregate,
            publish_interval_s=interval,
            complete=all(r.complete for r in rows),
        )
    )
    _write_text(out_dir / "metrics.csv", write_metrics_csv(rows))
    print(f"wrote {out_dir / 'metrics.csv'}")
    _maybe_plot(
        args.plot, "simulation_timeline_figure", timelines, str(out_dir / "reception_timeline.png")
    )
    if args.plot:
        print(f"wrote {out_dir / 'reception_timeline.png'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    seed = default_seed(args.seed)
    cells = run_agreement_grid(
        ps=tuple(parse_float_list(args.ps)),
        n_ips=tuple(parse_int_list(args.nips)),
        rounds=args.rounds,
        seed=seed,
    )
    lines = [
        "p,n_ip,retx_rate_hz,rounds,rate_sim,rate_model,rate_dev,"
        "burst_sim,burst_model,burst_dev,passed"
    ]
    worst = 0.0
    for c in cells:
        worst = max(worst, c.rate_deviation, c.burst_deviation or 0.0)
        burst_sim = "" if c.burst_sim is None else f"{c.burst_sim:.1f}"
        burst_model = "" if c.burst_model is None else f"{c.burst_model:.1f}"
        burst_dev = "" if c.burst_deviation is None else f"{c.burst_deviation:.6f}"
        lines.append(
            f"{c.p:g},{c.n_ip},{c.retx_rate_hz:g},{c.rounds},{c.offered_rate_sim:.1f},"
            f"{c.offered_rate_model:.1f},{c.rate_deviation:.6f},{burst_sim},"
            f"{burst_model},{burst_dev},{'true' if c.passed else 'false'}"
        )
        burst_part = "" if c.burst_deviation is None else f", burst dev {c.burst_deviation:.2%}"
        print(
            f"[{'PASS' if c.passed else 'FAIL'}] p={c.p:g} n_ip={c.n_ip} "
            f"n={c.retx_rate_hz:g} Hz: rate dev {c.rate_deviation:.2%}{burst_part}"
        )
    if args.out_dir:
        out_dir = Path(args.out_dir)
        _write_text(out_dir / "agreement.csv", "\n".join(lines) + "\n")
        print(f"wrote {out_dir / 'agreement.csv'}")
        _maybe_plot(args.plot, "validation_figure", cells, str(out_dir / "agreement.png"))
        if args.plot:
            print(f"wrote {out_dir / 'agreement.png'}")
    ok = all(c.passed for c in cells)
    print(f"max relative deviation: {worst:.2%} -> {'OK' if ok else 'TOLERANCE BREACH'}")
    return EXIT_OK if ok else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rtpslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_model = sub.add_parser("model", help="evaluate closed-form surfaces to CSV")
    model_sub = p_model.add_subparsers(dest="kind", required=True)

    p_rdds = model_sub.add_parser("rdds", help="steady link load vs payload and fragmentation")
    p_rdds.add_argument("--per", type=float, default=0.1, help="packet error rate")
    p_rdds.add_argument("--payloads", default="33k..330k", help="byte list or start..stop[:step]")
    p_rdds.add_argument("--nip", default="1,5,44", help="fragmentation levels (packets per unit)")
    p_rdds.add_argument("--rate", type=float, default=30.0, help="publish rate in Hz")
    p_rdds.add_argument("-o", "--output", help="CSV output path (stdout when omitted)")
    p_rdds.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True)
    p_rdds.set_defaults(func=cmd_model)

    p_burst = model_sub.add_parser("burst", help="worst-case burst vs publish and repair rates")
    p_burst.add_argument("--pub-rate-mbps", type=float, default=480.0,
                         help="fixed application byte rate, in decimal Mb/s")
    p_burst.add_argument("--per", type=float, default=0.1)
    p_burst.add_argument("--pub-rates", default="1,3,10,30,100", help="publish rates in Hz")
    p_burst.add_argument("--retx-rates", default=DEFAULT_RETX_RATES, help="repair rates in Hz")
    p_burst.add_argument("--max-message", type=parse_bytes, default=65536)
    p_burst.add_argument("--mtu", type=parse_bytes, default=1500)
    p_burst.add_argument("-o", "--output")
    p_burst.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True)
    p_burst.set_defaults(func=cmd_model)

    p_del = model_sub.add_parser("delivery", help="best-effort delivery-rate table")
    p_del.add_argument("--per", dest="per_list", default="0.001,0.01", help="PER list")
    p_del.add_argument("--payloads", default="33k..330k")
    p_del.add_argument("--max-message", type=parse_bytes, default=65536)
    p_del.add_argument("--mtu", type=parse_bytes, default=1500)
    p_del.add_argument("-o", "--output")
    p_del.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True)
    p_del.set_defaults(func=cmd_model)

    p_opt = sub.add_parser("optimize", help="emit a tuned XML QoS profile")
    p_opt.add_argument("-r", "--rate", type=float, required=True, help="publish rate in Hz")
    p_opt.add_argument("-u", "--payload", required=True, help="sample size in bytes (k suffix ok)")
    p_opt.add_argument("--link-mbps", type=float, required=True, help="link throughput, decimal Mb/s")
    p_opt.add_argument("--util", type=float, default=0.6, help="link utilization budget share")
    p_opt.add_argument("--mtu", type=parse_bytes, default=1500)
    p_opt.add_argument("--per", type=float, help="optional PER for a feasibility check")
    p_opt.add_argument("-o", "--output", required=True, help="XML output path")
    p_opt.set_defaults(func=cmd_optimize)

    p_sim = sub.add_parser("simulate", help="run a scenario file for N trials")
    p_sim.add_argument("scenario", help="scenario JSON path")
    p_sim.add_argument("--trials", type=int, default=5)
    p_sim.add_argument("--seed", type=int, help="base seed (default: RTPSLAB_SEED or file seed)")
    p_sim.add_argument("--out-dir", default="out")
    p_sim.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_val = sub.add_parser("validate", help="simulator vs closed-form agreement grid")
    p_val.add_argument("--rounds", type=int, default=10_000)
    p_val.add_argument("--seed", type=int, help="base seed (default: RTPSLAB_SEED or 1)")
    p_val.add_argument("--ps", default="1,0.99,0.9", help="delivery probabilities to test")
    p_val.add_argument("--nips", default="1,44", help="fragmentation levels to test")
    p_val.add_argument("--out-dir", help="optional directory for agreement.csv and figure")
    p_val.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rtpslab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"rtpslab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
