"""Observer-side market view: per-venue LBBOs, consolidated DBBO, SIP NBBO.

The difference stream Delta-p is price-only and signed as SIP minus DBBO on
each side.  When either feed lacks a quote on a side, Delta-p is undefined
there (carried as ``None``) rather than faked with a sentinel price, so
pre-open and halted states cannot fabricate dislocations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional

from .core import NotFoundError, Side, ValidationError, feed_is_sip, feed_venue
from .ingest import ObserverEvent


@dataclass(slots=True, frozen=True)
class BboPair:
    """(price, size) per side; locked/crossed states are representable."""

    bid: Optional[tuple[int, int]] = None
    offer: Optional[tuple[int, int]] = None

    def side(self, side: Side) -> Optional[tuple[int, int]]:
        return self.bid if side is Side.BID else self.offer

    def px(self, side: Side) -> Optional[int]:
        pair = self.side(side)
        return None if pair is None else pair[0]


@dataclass(slots=True, frozen=True)
class DeltaSample:
    """New piecewise-constant Delta-p value on one side; None = undefined."""

    ts: int
    side: Side
    dp: Optional[int]


@dataclass
class _SymbolView:
    venues: dict[int, BboPair] = field(default_factory=dict)
    sip: BboPair = BboPair()
    dbbo: BboPair = BboPair()
    best_venue: dict[Side, Optional[int]] = field(
        default_factory=lambda: {Side.BID: None, Side.OFFER: None}
    )
    last_dp: dict[Side, Optional[int]] = field(
        default_factory=lambda: {Side.BID: None, Side.OFFER: None}
    )
    last_change_ts: int = 0


class MarketView:
    """Single-writer consolidated state for a set of symbols.

    ``venues`` fixes the venue universe; events for unknown venues are
    rejected rather than silently widening the DBBO.
    """

    def __init__(self, venues: Iterable[int]):
        self._venues = frozenset(venues)
        self._symbols: dict[str, _SymbolView] = {}

    def _symbol(self, symbol: str) -> _SymbolView:
        view = self._symbols.get(symbol)
        if view is None:
            view = self._symbols[symbol] = _SymbolView()
        return view

    def apply_event(self, ev: ObserverEvent) -> list[DeltaSample]:
        """Apply one quote event; trades pass through untouched.

        Returns one DeltaSample per side whose Delta-p value changed
        (including transitions to or from undefined).
        """
        if ev.kind != "Q":
            return []
        view = self._symbol(ev.symbol)
        if feed_is_sip(ev.feed):
            sip = view.sip
            view.sip = BboPair(
                bid=ev.bid if ev.bid is not None else sip.bid,
                offer=ev.offer if ev.offer is not None else sip.offer,
            )
        else:
            venue = feed_venue(ev.feed)
            if venue not in self._venues:
                raise ValidationError(f"event for unknown venue {venue}")
            old = view.venues.get(venue, BboPair())
            new = BboPair(
                bid=ev.bid if ev.bid is not None else old.bid,
                offer=ev.offer if ev.offer is not None else old.offer,
            )
            view.venues[venue] = new
            self._refresh_dbbo(view, venue, old, new)

        deltas: list[DeltaSample] = []
        for side in (Side.BID, Side.OFFER):
            dp = self._delta(view, side)
            if dp != view.last_dp[side]:
                view.last_dp[side] = dp
                view.last_change_ts = ev.obs_ts
                deltas.append(DeltaSample(ts=ev.obs_ts, side=side, dp=dp))
        return deltas

    def snapshot(self, symbol: str) -> tuple[BboPair, BboPair]:
        """(sip, dbbo) as of all events applied so far."""
        view = self._symbols.get(symbol)
        if view is None:
            raise NotFoundError(symbol)
        return view.sip, view.dbbo

    def delta(self, symbol: str, side: Side) -> Optional[int]:
        view = self._symbols.get(symbol)
        if view is None:
            raise NotFoundError(symbol)
        return self._delta(view, side)

    def current_dp(self, symbol: str, side: Side) -> Optional[int]:
        """Last emitted Delta-p value; None for undefined or unseen symbols."""
        view = self._symbols.get(symbol)
        return None if view is None else view.last_dp[side]

    def symbols(self) -> list[str]:
        return sorted(self._symbols)

    @staticmethod
    def _delta(view: _SymbolView, side: Side) -> Optional[int]:
        sip_px = view.sip.px(side)
        dbbo_px = view.dbbo.px(side)
        if sip_px is None or dbbo_px is None:
            return None
        return sip_px - dbbo_px

    # -- incremental DBBO maintenance ---------------------------------------

    def _refresh_dbbo(self, view: _SymbolView, venue: int,
                      old: BboPair, new: BboPair) -> None:
        for side in (Side.BID, Side.OFFER):
            if old.side(side) == new.side(side):
                continue
            best = view.best_venue[side]
            quote = new.side(side)
            if best is None:
                if quote is not None:
                    view.best_venue[side] = venue
            elif venue == best:
                # the extreme venue changed: a worse or absent quote forces a rescan
                view.best_venue[side] = self._scan_best(view, side)
            elif quote is not None and self._improves(side, quote[0],
                                                      view.venues[best].side(side)[0], venue, best):
                view.best_venue[side] = venue
            self._store_dbbo_side(view, side)

    @staticmethod
    def _improves(side: Side, px: int, best_px: int, venue: int, best_venue: int) -> bool:
        if px == best_px:
            return venue < best_venue      # price ties go to the lowest venue id
        return px > best_px if side is Side.BID else px < best_px

    def _scan_best(self, view: _SymbolView, side: Side) -> Optional[int]:
        best: Optional[int] = None
        for venue in sorted(view.venues):
            quote = view.venues[venue].side(side)
            if quote is None:
                continue
            if best is None or self._improves(side, quote[0],
                                              view.venues[best].side(side)[0], venue, best):
                best = venue
        return best

    def _store_dbbo_side(self, view: _SymbolView, side: Side) -> None:
        best = view.best_venue[side]
        quote = None if best is None else view.venues[best].side(side)
        if side is Side.BID:
            view.dbbo = replace(view.dbbo, bid=quote)
        else:
            view.dbbo = replace(view.dbbo, offer=quote)


def delta_stream(view: MarketView, events: Iterable[ObserverEvent],
                 coalesce_ts: bool = True) -> Iterator[tuple[str, DeltaSample]]:
    """Apply events in stream order and yield (symbol, Delta-p sample) pairs.

    With ``coalesce_ts`` (the default) Delta-p is single-valued per
    microsecond: all events sharing one obs_ts are applied before sampling, so
    intra-microsecond serialization transients (e.g. the SIP message of a
    quote change landing one row before its direct twin) emit nothing.
    """
    if not coalesce_ts:
        for ev in events:
            for sample in view.apply_event(ev):
                yield ev.symbol, sample
        return

    pending: dict[tuple[str, Side], Optional[int]] = {}
    baseline: dict[tuple[str, Side], Optional[int]] = {}
    group_ts: Optional[int] = None

    def flush() -> Iterator[tuple[str, DeltaSample]]:
        for (symbol, side), dp in pending.items():
            if dp != baseline[(symbol, side)]:
                yield symbol, DeltaSample(ts=group_ts, side=side, dp=dp)
        pending.clear()
        baseline.clear()

    for ev in events:
        if group_ts is not None and ev.obs_ts != group_ts:
            yield from flush()
        group_ts = ev.obs_ts
        if ev.kind == "Q":
            for side in (Side.BID, Side.OFFER):
                key = (ev.symbol, side)
                if key not in baseline:
                    # Delta-p value before the first event of this ts group
                    baseline[key] = view.current_dp(ev.symbol, side)
        for sample in view.apply_event(ev):
            pending[(ev.symbol, sample.side)] = sample.dp
    if group_ts is not None:
        yield from flush()
