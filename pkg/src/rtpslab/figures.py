"""Figure rendering for the CLI report paths.

Every renderer takes the same row dictionaries the CSV writers consume and
saves a PNG next to the delimited output. Import stays lazy at the CLI so
library users without a display stack pay nothing.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def model_rdds_figure(rows: list[dict], path: str) -> None:
    """Steady link load vs payload, one curve per fragmentation level."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    nips = sorted({r["n_ip"] for r in rows})
    for nip in nips:
        sub = [r for r in rows if r["n_ip"] == nip]
        sub.sort(key=lambda r: r["payload_bytes"])
        ax.plot(
            [r["payload_bytes"] / 1e3 for r in sub],
            [r["steady_rate_bytes_per_s"] * 8 / 1e6 for r in sub],
            marker="o",
            label=f"N_IP={nip}",
        )
    ax.set_xlabel("payload (KB)")
    ax.set_ylabel("steady link load (Mb/s)")
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    ax.set_title(f"Retransmission-amplified load, PER {rows[0]['per']:.3%}")
    _save(fig, path)


def model_burst_figure(rows: list[dict], path: str) -> None:
    """Worst-case round burst vs repair rate, one curve per publish rate."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    rates = sorted({r["publish_rate_hz"] for r in rows})
    for rate in rates:
        sub = [r for r in rows if r["publish_rate_hz"] == rate]
        sub.sort(key=lambda r: r["retx_rate_hz"])
        ax.plot(
            [r["retx_rate_hz"] for r in sub],
            [r["burst_bytes"] * 8 / 1e6 for r in sub],
            marker="o",
            label=f"r={rate:g} Hz",
        )
    default = next((r["retx_rate_hz"] for r in rows if r["default_retx"]), None)
    if default is not None:
        ax.axvline(default, color="red", linestyle="--", linewidth=1, label="default repair rate")
    ax.set_xlabel("retransmission rate (Hz)")
    ax.set_ylabel("worst-case burst (Mb)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    ax.set_title("Burst size vs publish and retransmission rate")
    _save(fig, path)


def model_delivery_figure(rows: list[dict], path: str) -> None:
    """Best-effort delivery probability vs payload, one curve per PER."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    pers = sorted({r["per"] for r in rows})
    for per in pers:
        sub = [r for r in rows if r["per"] == per]
        sub.sort(key=lambda r: r["payload_bytes"])
        ax.plot(
            [r["payload_bytes"] / 1e3 for r in sub],
            [r["delivery_prob"] * 100 for r in sub],
            marker="o",
            label=f"PER {per:.3%}",
        )
    ax.set_xlabel("payload (KB)")
    ax.set_ylabel("sample delivery rate (%)")
    ax.set_ylim(0, 105)
    ax.grid(True, alpha=0.3)
    ax.legend()
    ax.set_title("Best-effort delivery vs payload")
    _save(fig, path)


def simulation_timeline_figure(trials: list[tuple[int, list[float]]], path: str, window_s: float = 1.0) -> None:
    """Reception rate over time per trial, in fixed windows."""
    fig, ax = plt.subplots(figsize=(7.2, 4.0))
    for seed, times in trials:
        if not times:
            continue
        end = max(times)
        n_bins = int(end / window_s) + 1
        counts = [0] * n_bins
        for t in times:
            counts[min(int(t / window_s), n_bins - 1)] += 1
        xs = [(i + 0.5) * window_s for i in range(n_bins)]
        ax.plot(xs, [c / window_s for c in counts], label=f"seed {seed}", alpha=0.8)
    ax.set_xlabel("time (s)")
    ax.set_ylabel(f"reception rate (Hz, {window_s:g} s windows)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title("Reception timeline")
    _save(fig, path)


def validation_figure(cells, path: str) -> None:
    """Per-cell relative deviation of the simulator from the closed forms."""
    fig, ax = plt.subplots(figsize=(7.6, 4.2))
    labels = [f"p={c.p:g}\nN={c.n_ip},n={c.retx_rate_hz:g}" for c in cells]
    xs = range(len(cells))
    ax.bar(xs, [c.rate_deviation * 100 for c in cells], width=0.38, label="rate dev")
    burst_xs = [i for i, c in enumerate(cells) if c.burst_deviation is not None]
    ax.bar(
        [i + 0.4 for i in burst_xs],
        [cells[i].burst_deviation * 100 for i in burst_xs],
        width=0.38,
        label="burst dev",
    )
    ax.axhline(5.0, color="orange", linestyle="--", linewidth=1, label="rate tolerance")
    ax.axhline(10.0, color="red", linestyle=":", linewidth=1, label="burst tolerance")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("relative deviation (%)")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title("Simulator vs closed-form agreement")
    _save(fig, path)
