"""Realized opportunity cost: classify differing trades and price the gap
between the SIP and direct views for trades executing at the NBBO.

Sign convention: positive ROC favors the SIP feed (Direct ROC), negative
favors the consolidated direct feeds (SIP ROC).  ROC is depth-free: quote
sizes never enter the arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from .consolidate import BboPair, MarketView
from .core import Side
from .ingest import ObserverEvent

TRADE_CSV_HEADER = "ts_us,symbol,venue,exec_px_e4,shares,side,differing,roc_e4,flavor"
AGG_CSV_HEADER = (
    "date,symbol,venue,trades,differing_trades,traded_value_e4,"
    "differing_traded_value_e4,sip_roc_e4,direct_roc_e4,net_roc_e4,total_roc_e4"
)


class InferredSide(Enum):
    ACTIVE_BID = "active_bid"
    ACTIVE_OFFER = "active_offer"
    BOTH = "both"
    NONE = "none"


class RocFlavor(Enum):
    DIRECT = "direct"   # positive: the SIP displayed the better price
    SIP = "sip"         # negative: the direct feeds displayed the better price


@dataclass(slots=True)
class RocRecord:
    ts: int
    symbol: str
    venue: int
    exec_px: int
    shares: int
    inferred_side: InferredSide
    roc_e4: int

    @property
    def flavor(self) -> RocFlavor:
        return RocFlavor.DIRECT if self.roc_e4 > 0 else RocFlavor.SIP


@dataclass(slots=True)
class TradeInfo:
    """One trade with its differing flag and any ROC records it produced."""

    ts: int
    symbol: str
    venue: int
    exec_px: int
    shares: int
    differing: bool
    side_label: str                  # 'B', 'S', or 'U' after inference
    records: list[RocRecord] = field(default_factory=list)


@dataclass
class RocAggregate:
    trades: int = 0
    differing_trades: int = 0
    traded_value_e4: int = 0
    differing_traded_value_e4: int = 0
    sip_roc_e4: int = 0              # sum of negative records
    direct_roc_e4: int = 0           # sum of positive records

    @property
    def net_roc_e4(self) -> int:
        return self.direct_roc_e4 + self.sip_roc_e4

    @property
    def total_roc_e4(self) -> int:
        return self.direct_roc_e4 - self.sip_roc_e4


@dataclass
class RocReport:
    by_key: dict[tuple[str, str, int], RocAggregate] = field(default_factory=dict)
    overall: RocAggregate = field(default_factory=RocAggregate)
    skipped_missing_dbbo: int = 0

    @property
    def fraction_differing_trades(self) -> float:
        if self.overall.trades == 0:
            return 0.0
        return self.overall.differing_trades / self.overall.trades

    @property
    def fraction_differing_value(self) -> float:
        if self.overall.traded_value_e4 == 0:
            return 0.0
        return self.overall.differing_traded_value_e4 / self.overall.traded_value_e4

    @property
    def value_concentration(self) -> float:
        """Ratio of the value fraction to the trade fraction."""
        if self.fraction_differing_trades == 0.0:
            return 0.0
        return self.fraction_differing_value / self.fraction_differing_trades


def infer_side(exec_px: int, sip: BboPair) -> InferredSide:
    """Which side demanded liquidity, judged from the NBBO prices alone.

    A trade at the bid was hit by an active offer (seller) and vice versa; a
    locked SIP at the execution price is ambiguous; any other price is
    unattributable and gets discarded upstream.
    """
    nbb, nbo = sip.px(Side.BID), sip.px(Side.OFFER)
    at_bid = nbb is not None and exec_px == nbb
    at_offer = nbo is not None and exec_px == nbo
    if at_bid and at_offer:
        return InferredSide.BOTH
    if at_bid:
        return InferredSide.ACTIVE_OFFER
    if at_offer:
        return InferredSide.ACTIVE_BID
    return InferredSide.NONE


def trade_roc(ev: ObserverEvent, sip: BboPair, dbbo: BboPair) -> tuple[list[RocRecord], int]:
    """Zero, one, or two ROC records for one trade against the prevailing
    quotes, plus a count of entries skipped for a missing DBBO side.

    Zero-valued entries are dropped; a locked SIP yields both sides.
    """
    assert ev.trade is not None
    exec_px, shares = ev.trade
    inferred = infer_side(exec_px, sip)
    sides: list[InferredSide] = []
    if inferred in (InferredSide.ACTIVE_OFFER, InferredSide.BOTH):
        sides.append(InferredSide.ACTIVE_OFFER)
    if inferred in (InferredSide.ACTIVE_BID, InferredSide.BOTH):
        sides.append(InferredSide.ACTIVE_BID)

    records: list[RocRecord] = []
    skipped = 0
    for side in sides:
        if side is InferredSide.ACTIVE_OFFER:
            nbb, dbb = sip.px(Side.BID), dbbo.px(Side.BID)
            if dbb is None:
                skipped += 1
                continue
            roc = (nbb - dbb) * shares
        else:
            nbo, dbo = sip.px(Side.OFFER), dbbo.px(Side.OFFER)
            if dbo is None:
                skipped += 1
                continue
            roc = (dbo - nbo) * shares
        if roc != 0:
            records.append(RocRecord(ts=ev.obs_ts, symbol=ev.symbol, venue=ev.venue,
                                     exec_px=exec_px, shares=shares,
                                     inferred_side=side, roc_e4=roc))
    return records, skipped


def classify_differing(ev: ObserverEvent, inferred: InferredSide,
                       sip: BboPair, dbbo: BboPair) -> bool:
    """Differing trade: the relevant side's SIP and direct prices disagree.

    Side comes from the explicit hint when present, else from inference;
    with no determinable side, either side differing counts.
    """
    def differs(side: Side) -> bool:
        a, b = sip.px(side), dbbo.px(side)
        if a is None and b is None:
            return False
        return a != b

    if ev.side_hint == "B":
        return differs(Side.BID)
    if ev.side_hint == "S":
        return differs(Side.OFFER)
    if inferred is InferredSide.ACTIVE_BID:     # active buyer
        return differs(Side.BID)
    if inferred is InferredSide.ACTIVE_OFFER:   # active seller
        return differs(Side.OFFER)
    return differs(Side.BID) or differs(Side.OFFER)


def compute(events: Iterable[ObserverEvent], date: str = "",
            venues: Optional[Iterable[int]] = None
            ) -> tuple[list[RocRecord], list[TradeInfo], RocReport]:
    """Run the ROC pipeline over a validated stream.

    The prevailing quote for a trade is the consolidated state after every
    event strictly earlier in stream order, including earlier rows at the
    same microsecond.
    """
    events = list(events)
    venue_set = set(venues) if venues is not None else {ev.venue for ev in events}
    view = MarketView(venue_set)
    records: list[RocRecord] = []
    trades: list[TradeInfo] = []
    skipped = 0
    for ev in events:
        if ev.kind == "Q":
            view.apply_event(ev)
            continue
        try:
            sip, dbbo = view.snapshot(ev.symbol)
        except KeyError:
            sip, dbbo = BboPair(), BboPair()
        inferred = infer_side(ev.trade[0], sip)
        new_records, n_skipped = trade_roc(ev, sip, dbbo)
        skipped += n_skipped
        records.extend(new_records)
        label = ev.side_hint
        if label == "U":
            label = {InferredSide.ACTIVE_BID: "B",
                     InferredSide.ACTIVE_OFFER: "S"}.get(inferred, "U")
        trades.append(TradeInfo(ts=ev.obs_ts, symbol=ev.symbol, venue=ev.venue,
                                exec_px=ev.trade[0], shares=ev.trade[1],
                                differing=classify_differing(ev, inferred, sip, dbbo),
                                side_label=label, records=new_records))
    report = aggregate(records, trades, date)
    report.skipped_missing_dbbo = skipped
    return records, trades, report


def aggregate(records: Iterable[RocRecord], trades: Iterable[TradeInfo] = (),
              date: str = "") -> RocReport:
    """Per-(date, symbol, venue) sums: signed cancellation for net ROC,
    absolute sums for total ROC, trade counts and notional from trades."""
    report = RocReport()
    for info in trades:
        agg = report.by_key.setdefault((date, info.symbol, info.venue), RocAggregate())
        value = info.exec_px * info.shares
        for target in (agg, report.overall):
            target.trades += 1
            target.traded_value_e4 += value
            if info.differing:
                target.differing_trades += 1
                target.differing_traded_value_e4 += value
    for rec in records:
        agg = report.by_key.setdefault((date, rec.symbol, rec.venue), RocAggregate())
        for target in (agg, report.overall):
            if rec.roc_e4 > 0:
                target.direct_roc_e4 += rec.roc_e4
            else:
                target.sip_roc_e4 += rec.roc_e4
    return report


def trade_csv_rows(trades: Sequence[TradeInfo]) -> Iterator[str]:
    """Per-trade export: one row per ROC record, or one record-less row."""
    for info in trades:
        if not info.records:
            yield (f"{info.ts},{info.symbol},{info.venue},{info.exec_px},"
                   f"{info.shares},{info.side_label},{int(info.differing)},,")
            continue
        for rec in info.records:
            side = "B" if rec.inferred_side is InferredSide.ACTIVE_BID else "S"
            yield (f"{rec.ts},{rec.symbol},{rec.venue},{rec.exec_px},"
                   f"{rec.shares},{side},{int(info.differing)},{rec.roc_e4},"
                   f"{rec.flavor.value}")


def aggregate_csv_rows(report: RocReport) -> Iterator[str]:
    for (date, symbol, venue), agg in sorted(report.by_key.items()):
        yield (f"{date},{symbol},{venue},{agg.trades},{agg.differing_trades},"
               f"{agg.traded_value_e4},{agg.differing_traded_value_e4},"
               f"{agg.sip_roc_e4},{agg.direct_roc_e4},"
               f"{agg.net_roc_e4},{agg.total_roc_e4}")
