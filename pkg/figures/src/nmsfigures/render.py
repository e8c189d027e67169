"""Render figures from the analytics engine's CSV exports.

Consumes only the documented file formats (segments.csv, histogram.csv,
nodes/edges.csv, aggregate.csv); no dependency on the engine's internals.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

US_PER_S = 1_000_000
E4_PER_USD = 10_000


def _read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return rows


def _require(rows, columns, path):
    missing = [c for c in columns if rows and c not in rows[0]]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")


def duration_hist(segments_csv, out_path, bins: int = 50) -> int:
    """Log-log histogram of segment durations in seconds."""
    rows = _read_csv(segments_csv)
    _require(rows, ["duration_us"], segments_csv)
    durations = [int(r["duration_us"]) / US_PER_S for r in rows
                 if int(r["duration_us"]) > 0]
    fig, ax = plt.subplots(figsize=(6, 4))
    if durations:
        lo, hi = min(durations), max(durations)
        if lo == hi:
            edges = [lo * 0.9, hi * 1.1]
        else:
            edges = [10 ** (math.log10(lo) + i * (math.log10(hi) - math.log10(lo)) / bins)
                     for i in range(bins + 1)]
        ax.hist(durations, bins=edges, color="tab:blue", edgecolor="black",
                linewidth=0.3)
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("segment duration (s)")
    ax.set_ylabel("count")
    ax.set_title("Dislocation segment durations")
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)
    return len(durations)


def start_time_hist(histogram_csv, out_path) -> int:
    """Per-minute-of-day segment start counts, one series per tier."""
    rows = _read_csv(histogram_csv)
    _require(rows, ["tier", "minute_of_day", "count"], histogram_csv)
    tiers: dict[str, dict[int, int]] = {}
    for r in rows:
        tiers.setdefault(r["tier"], {})[int(r["minute_of_day"])] = int(r["count"])
    fig, ax = plt.subplots(figsize=(8, 4))
    for name, by_minute in tiers.items():
        minutes = sorted(by_minute)
        ax.plot(minutes, [by_minute[m] for m in minutes],
                drawstyle="steps-mid", label=name)
    ax.set_xlabel("minute of day")
    ax.set_ylabel("segment starts")
    ax.set_title("Dislocation start times")
    if tiers:
        ax.legend()
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)
    return sum(len(v) for v in tiers.values())


def circle_plot(nodes_csv, edges_csv, out_path) -> int:
    """Chord-style plot: nodes on the unit circle, edges as interior lines.

    Returns the number of nodes drawn (equals the nodes CSV row count).
    """
    nodes = _read_csv(nodes_csv)
    edges = _read_csv(edges_csv)
    _require(nodes, ["index", "angle"], nodes_csv)
    _require(edges, ["i", "j", "weight_e4"], edges_csv)
    pos = {}
    for r in nodes:
        a = float(r["angle"])
        pos[int(r["index"])] = (math.cos(a), math.sin(a))
    fig, ax = plt.subplots(figsize=(6, 6))
    max_w = max((int(r["weight_e4"]) for r in edges), default=1) or 1
    for r in edges:
        (x1, y1), (x2, y2) = pos[int(r["i"])], pos[int(r["j"])]
        w = int(r["weight_e4"]) / max_w
        ax.plot([x1, x2], [y1, y2], color="tab:red",
                linewidth=0.3 + 2.0 * w, alpha=0.35 + 0.5 * w, zorder=1)
    if pos:
        xs, ys = zip(*pos.values())
        ax.scatter(xs, ys, s=12, color="tab:blue", zorder=2)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_title("Ordered network of dislocation segments")
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)
    return len(nodes)


def daily_roc_bars(aggregate_csv, out_path) -> int:
    """Net realized opportunity cost per date, summed over symbols/venues."""
    rows = _read_csv(aggregate_csv)
    _require(rows, ["date", "net_roc_e4"], aggregate_csv)
    by_date: dict[str, int] = {}
    for r in rows:
        by_date[r["date"]] = by_date.get(r["date"], 0) + int(r["net_roc_e4"])
    dates = sorted(by_date)
    values = [by_date[d] / E4_PER_USD for d in dates]
    fig, ax = plt.subplots(figsize=(8, 4))
    colors = ["tab:green" if v >= 0 else "tab:red" for v in values]
    ax.bar(range(len(dates)), values, color=colors)
    ax.set_xticks(range(len(dates)))
    ax.set_xticklabels(dates, rotation=45, ha="right")
    ax.axhline(0, color="black", linewidth=0.5)
    ax.set_ylabel("net opportunity cost ($)")
    ax.set_title("Daily net realized opportunity cost")
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)
    return len(dates)


KINDS = {
    "duration-hist": (duration_hist, 1),
    "start-time-hist": (start_time_hist, 1),
    "circle": (circle_plot, 2),
    "daily-roc": (daily_roc_bars, 1),
}


def render(kind: str, inputs: list[str], out_path: str) -> int:
    """Dispatch by kind; returns the renderer's element count."""
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind: {kind}")
    fn, arity = KINDS[kind]
    if len(inputs) != arity:
        raise ValueError(f"{kind} takes {arity} input file(s), got {len(inputs)}")
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    return fn(*inputs, out_path)
