"""Parse, validate, and order the single-observer event stream.

File schema (CSV, header required, empty string = absent field):

    obs_ts_us,feed,kind,symbol,venue,bid_px_e4,bid_sz,ask_px_e4,ask_sz,trade_px_e4,trade_sz,side_hint,origin_ts_us

feed is ``SIP`` or ``D.<venue>``; kind is ``Q`` or ``T``; side_hint is
``B``/``S``/``U``.  An NDJSON mirror with the same field names is accepted.
Price fields hold e4 integers; a decimal-dollar literal is also accepted and
converted exactly (sub-1e-4 precision is rejected).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, TextIO

from .core import (
    ParseError,
    ValidationError,
    feed_is_sip,
    feed_venue,
    price_from_decimal,
    validate_symbol,
)

CSV_HEADER = (
    "obs_ts_us,feed,kind,symbol,venue,bid_px_e4,bid_sz,ask_px_e4,ask_sz,"
    "trade_px_e4,trade_sz,side_hint,origin_ts_us"
)
_FIELDS = CSV_HEADER.split(",")


@dataclass(slots=True)
class ObserverEvent:
    """One timestamped quote or trade message as seen at the observer."""

    obs_ts: int
    feed: str
    kind: str                       # 'Q' or 'T'
    symbol: str
    venue: int
    bid: Optional[tuple[int, int]] = None     # (px_e4, size)
    offer: Optional[tuple[int, int]] = None
    trade: Optional[tuple[int, int]] = None
    side_hint: str = "U"
    origin_ts: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind == "Q":
            if self.bid is None and self.offer is None:
                raise ValidationError("quote event with neither bid nor offer")
            if self.trade is not None:
                raise ValidationError("quote event carrying a trade")
        elif self.kind == "T":
            if self.trade is None:
                raise ValidationError("trade event without a trade")
            if self.bid is not None or self.offer is not None:
                raise ValidationError("trade event carrying quote sides")
        else:
            raise ValidationError(f"bad event kind {self.kind!r}")
        for pair in (self.bid, self.offer, self.trade):
            if pair is not None and pair[1] <= 0:
                raise ValidationError(f"non-positive size in {pair}")
        if self.trade is not None and self.trade[0] < 0:
            raise ValidationError("negative trade price")


def _parse_px(text: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return price_from_decimal(text)
    except ParseError as exc:
        raise ParseError(f"line {lineno}: {exc}") from exc


def _parse_int(text: str, name: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ParseError(f"line {lineno}: bad {name} {text!r}") from exc


def _pair(px: str, sz: str, name: str, lineno: int) -> Optional[tuple[int, int]]:
    if px == "" and sz == "":
        return None
    if px == "" or sz == "":
        raise ParseError(f"line {lineno}: half-present {name} pair")
    value = (_parse_px(px, lineno), _parse_int(sz, name + " size", lineno))
    if value[0] < 0 or value[1] < 0:
        raise ValidationError(f"line {lineno}: negative {name} price or size")
    return value


def parse_event(line: str, lineno: int = 0) -> ObserverEvent:
    """Parse one CSV record into an exact-valued ObserverEvent."""
    parts = line.rstrip("\n").split(",")
    if len(parts) != len(_FIELDS):
        raise ParseError(f"line {lineno}: expected {len(_FIELDS)} fields, got {len(parts)}")
    (ts, feed, kind, symbol, venue, bpx, bsz, apx, asz, tpx, tsz, hint, ots) = parts
    if feed != "SIP":
        feed_venue(feed)  # raises on malformed labels
    if hint not in ("B", "S", "U"):
        raise ParseError(f"line {lineno}: bad side_hint {hint!r}")
    try:
        return ObserverEvent(
            obs_ts=_parse_int(ts, "obs_ts_us", lineno),
            feed=feed,
            kind=kind,
            symbol=validate_symbol(symbol),
            venue=_parse_int(venue, "venue", lineno),
            bid=_pair(bpx, bsz, "bid", lineno),
            offer=_pair(apx, asz, "ask", lineno),
            trade=_pair(tpx, tsz, "trade", lineno),
            side_hint=hint,
            origin_ts=None if ots == "" else _parse_int(ots, "origin_ts_us", lineno),
        )
    except ValidationError as exc:
        raise ValidationError(f"line {lineno}: {exc}") from exc


def serialize_event(ev: ObserverEvent) -> str:
    def pair(p: Optional[tuple[int, int]]) -> tuple[str, str]:
        return ("", "") if p is None else (str(p[0]), str(p[1]))

    bpx, bsz = pair(ev.bid)
    apx, asz = pair(ev.offer)
    tpx, tsz = pair(ev.trade)
    ots = "" if ev.origin_ts is None else str(ev.origin_ts)
    return (
        f"{ev.obs_ts},{ev.feed},{ev.kind},{ev.symbol},{ev.venue},"
        f"{bpx},{bsz},{apx},{asz},{tpx},{tsz},{ev.side_hint},{ots}"
    )


def _event_from_json(obj: dict, lineno: int) -> ObserverEvent:
    row = [str(obj.get(k, "")) if obj.get(k, "") is not None else "" for k in _FIELDS]
    return parse_event(",".join(row), lineno)


def read_events(path: str | Path) -> Iterator[ObserverEvent]:
    """Stream events from a CSV or NDJSON file (chosen by first byte)."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        first = fh.readline()
        if first.startswith("{"):
            yield _event_from_json(json.loads(first), 1)
            for lineno, line in enumerate(fh, start=2):
                if line.strip():
                    yield _event_from_json(json.loads(line), lineno)
        else:
            if first.rstrip("\n") != CSV_HEADER:
                raise ParseError(f"{path}: missing or bad header")
            for lineno, line in enumerate(fh, start=2):
                if line.strip():
                    yield parse_event(line, lineno)


def write_events(events: Iterable[ObserverEvent], fh: TextIO) -> None:
    fh.write(CSV_HEADER + "\n")
    for ev in events:
        fh.write(serialize_event(ev) + "\n")


@dataclass
class ValidationReport:
    events: int = 0
    regressions: int = 0            # pairs of events out of timestamp order
    ties: int = 0                   # adjacent events at the same obs_ts
    symbols: dict[str, int] = field(default_factory=dict)
    venue_label_anomalies: int = 0  # direct quote whose feed venue != venue field

    @property
    def ok(self) -> bool:
        return self.regressions == 0


def _count_inversions(ts: list[int]) -> int:
    """Number of index pairs i<j with ts[i] > ts[j] (merge-sort count)."""

    def rec(a: list[int]) -> tuple[list[int], int]:
        if len(a) <= 1:
            return a, 0
        mid = len(a) // 2
        left, nl = rec(a[:mid])
        right, nr = rec(a[mid:])
        merged: list[int] = []
        inv = nl + nr
        i = j = 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                inv += len(left) - i
                merged.append(right[j])
                j += 1
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, inv

    return rec(ts)[1]


def validate_stream(events: Iterable[ObserverEvent]) -> ValidationReport:
    """Report-only pass: timestamp order, ties, feed-label sanity, coverage.

    Analytics require regressions == 0; ties are legal and kept in file order.
    """
    report = ValidationReport()
    stamps: list[int] = []
    prev: Optional[int] = None
    for ev in events:
        report.events += 1
        stamps.append(ev.obs_ts)
        if prev is not None and ev.obs_ts == prev:
            report.ties += 1
        prev = ev.obs_ts
        report.symbols[ev.symbol] = report.symbols.get(ev.symbol, 0) + 1
        if ev.kind == "Q" and not feed_is_sip(ev.feed) and feed_venue(ev.feed) != ev.venue:
            report.venue_label_anomalies += 1
    report.regressions = _count_inversions(stamps)
    return report
