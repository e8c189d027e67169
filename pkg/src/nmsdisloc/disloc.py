"""Dislocation segments: constant-sign runs of the Delta-p stream, their
classification, and summary statistics.

Intervals are half-open ``[start, end)``; a sign flip assigns the flip
instant to the new segment.  Segments still open at end of stream are closed
at the last sample timestamp and flagged truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .consolidate import DeltaSample
from .core import PRICE_SCALE, Side

DEFAULT_ACTIONABLE_US = 545     # rounded fiber round trip, Carteret-Mahwah
DEFAULT_LARGE_MIN_MAG_E4 = 100  # one cent

SEGMENT_CSV_HEADER = (
    "symbol,side,start_us,end_us,duration_us,direction,min_dp_e4,max_dp_e4,"
    "min_mag_e4,max_mag_e4,actionable,large,truncated,large_by_max"
)


@dataclass(slots=True)
class DislocationSegment:
    symbol: str
    side: Side
    start: int
    end: int
    direction: int              # +1 or -1, the sign of every sample inside
    min_dp: int
    max_dp: int
    truncated: bool = False

    @property
    def duration(self) -> int:
        return self.end - self.start

    @property
    def min_mag(self) -> int:
        return min(abs(self.min_dp), abs(self.max_dp))

    @property
    def max_mag(self) -> int:
        return max(abs(self.min_dp), abs(self.max_dp))

    @property
    def mean_mag(self) -> Fraction:
        return Fraction(self.min_mag + self.max_mag, 2)

    def to_csv_row(self, actionable_us: int = DEFAULT_ACTIONABLE_US,
                   large_min_mag_e4: int = DEFAULT_LARGE_MIN_MAG_E4) -> str:
        flags = classify(self, actionable_us, large_min_mag_e4)
        return (
            f"{self.symbol},{self.side.value},{self.start},{self.end},"
            f"{self.duration},{self.direction},{self.min_dp},{self.max_dp},"
            f"{self.min_mag},{self.max_mag},{int(flags.actionable)},"
            f"{int(flags.large)},{int(self.truncated)},{int(flags.large_by_max)}"
        )


@dataclass(slots=True)
class Dislocation:
    """Maximal interval with Delta-p != 0, partitioned into sign runs."""

    symbol: str
    side: Side
    start: int
    end: int
    segments: list[DislocationSegment]


@dataclass(slots=True)
class SegmentFlags:
    actionable: bool
    large: bool
    large_by_max: bool


def detect(samples: Iterable[DeltaSample], symbol: str = "",
           side: Optional[Side] = None) -> list[DislocationSegment]:
    """Turn an ordered piecewise-constant Delta-p stream into segments.

    Each sample is the new Delta-p value from its timestamp onward (``None``
    for undefined).  Samples must be time-ordered; equal timestamps keep
    stream order, which is how zero-duration segments arise.
    """
    segments: list[DislocationSegment] = []
    cur: Optional[DislocationSegment] = None
    cur_side = side
    last_ts: Optional[int] = None

    for sample in samples:
        last_ts = sample.ts
        if cur_side is None:
            cur_side = sample.side
        dp = sample.dp
        sign = 0 if dp is None or dp == 0 else (1 if dp > 0 else -1)
        if cur is not None:
            if sign == cur.direction:
                cur.min_dp = min(cur.min_dp, dp)
                cur.max_dp = max(cur.max_dp, dp)
                continue
            cur.end = sample.ts
            segments.append(cur)
            cur = None
        if sign != 0:
            cur = DislocationSegment(symbol=symbol, side=cur_side,
                                     start=sample.ts, end=sample.ts,
                                     direction=sign, min_dp=dp, max_dp=dp)
    if cur is not None:
        cur.end = last_ts
        cur.truncated = True
        segments.append(cur)
    return segments


def detect_events(events, venues=None, coalesce_ts: bool = True
                  ) -> dict[tuple[str, Side], list[DislocationSegment]]:
    """Full slow-path pipeline: consolidate an event stream and detect
    segments per (symbol, side)."""
    from .consolidate import MarketView, delta_stream

    events = list(events)
    if venues is None:
        venues = {ev.venue for ev in events}
    view = MarketView(venues)
    routed: dict[tuple[str, Side], list[DeltaSample]] = {}
    for symbol, sample in delta_stream(view, events, coalesce_ts=coalesce_ts):
        routed.setdefault((symbol, sample.side), []).append(sample)
    return {
        (symbol, side): detect(samples, symbol=symbol, side=side)
        for (symbol, side), samples in routed.items()
    }


def segment_from_csv_row(line: str) -> DislocationSegment:
    """Inverse of ``DislocationSegment.to_csv_row`` (flag columns ignored
    except truncated, which is stored state)."""
    parts = line.rstrip("\n").split(",")
    if len(parts) != len(SEGMENT_CSV_HEADER.split(",")):
        raise ValueError(f"bad segment row: {line!r}")
    return DislocationSegment(
        symbol=parts[0], side=Side(parts[1]), start=int(parts[2]),
        end=int(parts[3]), direction=int(parts[5]), min_dp=int(parts[6]),
        max_dp=int(parts[7]), truncated=bool(int(parts[12])),
    )


def group_dislocations(segments: Sequence[DislocationSegment]) -> list[Dislocation]:
    """Merge adjacent opposite-direction segments into dislocations."""
    out: list[Dislocation] = []
    for seg in segments:
        if out and out[-1].end == seg.start and out[-1].segments[-1].direction != seg.direction:
            out[-1].segments.append(seg)
            out[-1].end = seg.end
        else:
            out.append(Dislocation(symbol=seg.symbol, side=seg.side,
                                   start=seg.start, end=seg.end, segments=[seg]))
    return out


def classify(seg: DislocationSegment,
             actionable_threshold_us: int = DEFAULT_ACTIONABLE_US,
             large_min_mag_e4: int = DEFAULT_LARGE_MIN_MAG_E4) -> SegmentFlags:
    """Strict-inequality flags: actionable on duration, large on minimum
    magnitude (large_by_max uses the maximum-magnitude reading instead)."""
    return SegmentFlags(
        actionable=seg.duration > actionable_threshold_us,
        large=seg.min_mag > large_min_mag_e4,
        large_by_max=seg.max_mag > large_min_mag_e4,
    )


def per_second_rate(count: int, trading_days: int) -> Fraction:
    """Average segments per second over 6.5-hour sessions."""
    if count < 0 or trading_days <= 0:
        raise ValueError("count must be >= 0 and trading_days > 0")
    return Fraction(count, trading_days * 6 * 3600 + trading_days * 1800)


# -- Table-style summary statistics -----------------------------------------

STAT_NAMES = ("mean", "std", "min", "25%", "50%", "75%", "max")
ATTR_NAMES = ("duration_s", "min_value", "max_value", "min_mag", "mean_mag", "max_mag")
TIER_NAMES = ("none", "actionable", "actionable_large")


def _quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear-interpolation quantile of an ascending sequence."""
    n = len(sorted_values)
    if n == 1:
        return sorted_values[0]
    pos = q * (n - 1)
    lo = math.floor(pos)
    frac = pos - lo
    if frac == 0.0:
        return sorted_values[lo]
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo])


def _describe(values: Sequence[float]) -> dict[str, float]:
    ordered = sorted(values)
    n = len(ordered)
    mean = sum(ordered) / n
    if n > 1:
        var = sum((v - mean) ** 2 for v in ordered) / (n - 1)
        std = math.sqrt(var)
    else:
        std = float("nan")
    return {
        "mean": mean,
        "std": std,
        "min": ordered[0],
        "25%": _quantile(ordered, 0.25),
        "50%": _quantile(ordered, 0.50),
        "75%": _quantile(ordered, 0.75),
        "max": ordered[-1],
    }


@dataclass
class StatsTier:
    name: str
    count: int
    stats: dict[str, dict[str, float]]  # attribute -> statistic -> value


@dataclass
class StatsTable:
    tiers: list[StatsTier]

    def tier(self, name: str) -> StatsTier:
        for t in self.tiers:
            if t.name == name:
                return t
        raise KeyError(name)


def _attributes(seg: DislocationSegment) -> dict[str, float]:
    return {
        "duration_s": seg.duration / 1e6,
        "min_value": seg.min_dp / PRICE_SCALE,
        "max_value": seg.max_dp / PRICE_SCALE,
        "min_mag": seg.min_mag / PRICE_SCALE,
        "mean_mag": float(seg.mean_mag) / PRICE_SCALE,
        "max_mag": seg.max_mag / PRICE_SCALE,
    }


def summarize(segments: Sequence[DislocationSegment],
              actionable_threshold_us: int = DEFAULT_ACTIONABLE_US,
              large_min_mag_e4: int = DEFAULT_LARGE_MIN_MAG_E4) -> StatsTable:
    """Count and describe segments for the three standard filter tiers."""
    tiers = []
    for name in TIER_NAMES:
        selected = []
        for seg in segments:
            flags = classify(seg, actionable_threshold_us, large_min_mag_e4)
            if name == "actionable" and not flags.actionable:
                continue
            if name == "actionable_large" and not (flags.actionable and flags.large):
                continue
            selected.append(seg)
        stats: dict[str, dict[str, float]] = {}
        if selected:
            rows = [_attributes(s) for s in selected]
            for attr in ATTR_NAMES:
                stats[attr] = _describe([r[attr] for r in rows])
        tiers.append(StatsTier(name=name, count=len(selected), stats=stats))
    return StatsTable(tiers=tiers)


def minute_histogram(segments: Sequence[DislocationSegment]) -> dict[int, int]:
    """Segment starts binned by minute of day."""
    counts: dict[int, int] = {}
    for seg in segments:
        minute = (seg.start // 60_000_000) % 1440
        counts[minute] = counts.get(minute, 0) + 1
    return counts
