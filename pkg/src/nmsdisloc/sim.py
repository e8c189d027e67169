"""Discrete-event simulator of a geographically fragmented market.

Scripted orders drive per-venue books; every LBBO change travels to the
observer twice — directly (venue site → observer) and via the SIP (venue
site → tape site, processing, tape site → observer).  The emitted stream is
bit-compatible with the ingest schema, and a ground-truth segment list is
derived from the same delivery schedule by an independent scan.
"""

from __future__ import annotations

import configparser
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .book import Fill, LocalBook, Order, PegKind
from .consolidate import BboPair
from .core import ConfigError, DomainError, Side, direct_feed
from .disloc import DislocationSegment
from .ingest import ObserverEvent

LIGHT_MI_PER_S = 186_000
FIBER_US_PER_KM = Fraction(49, 10)
KM_PER_MI = Fraction(1_609_344, 1_000_000)


class MediumKind(Enum):
    LIGHT_VACUUM = "light"
    FIBER = "fiber"
    HYBRID_LASER = "hybrid"


@dataclass(frozen=True, slots=True)
class Medium:
    kind: MediumKind
    one_way_us: Optional[Fraction] = None   # HybridLaser only

    def __post_init__(self) -> None:
        if self.kind is MediumKind.HYBRID_LASER and self.one_way_us is None:
            raise ConfigError("hybrid laser medium needs a one-way delay")


LIGHT = Medium(MediumKind.LIGHT_VACUUM)
FIBER = Medium(MediumKind.FIBER)


def propagation_delay(distance_mi: Fraction | int | float, medium: Medium) -> Fraction:
    """One-way delay in microseconds, exact rational arithmetic."""
    distance = Fraction(str(distance_mi)) if isinstance(distance_mi, float) \
        else Fraction(distance_mi)
    if distance < 0:
        raise DomainError("negative distance")
    if medium.kind is MediumKind.LIGHT_VACUUM:
        return distance * 1_000_000 / LIGHT_MI_PER_S
    if medium.kind is MediumKind.FIBER:
        return distance * KM_PER_MI * FIBER_US_PER_KM
    return medium.one_way_us


def fiber_delay_from_km(distance_km: Fraction | int | float) -> Fraction:
    """Fiber delay straight from a kilometre figure (no mile conversion)."""
    distance = Fraction(str(distance_km)) if isinstance(distance_km, float) \
        else Fraction(distance_km)
    if distance < 0:
        raise DomainError("negative distance")
    return distance * FIBER_US_PER_KM


def _link(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass
class SimTopology:
    distance_mi: dict[tuple[str, str], Fraction]
    venues: dict[int, str]              # venue id -> site
    sip_tapes: dict[str, str]           # tape name -> site
    symbol_tape: dict[str, str]         # symbol -> tape; '*' = fallback
    observer_site: str
    sip_processing_us: int = 0
    default_medium: Medium = FIBER
    link_medium: dict[tuple[str, str], Medium] = field(default_factory=dict)

    def __post_init__(self) -> None:
        sites = {s for pair in self.distance_mi for s in pair}
        sites.update(self.venues.values())
        sites.update(self.sip_tapes.values())
        sites.add(self.observer_site)
        for venue, site in self.venues.items():
            if site not in sites:
                raise ConfigError(f"venue {venue} at undefined site {site!r}")
        for (a, b), d in self.distance_mi.items():
            if a == b or d <= 0:
                raise ConfigError(f"bad distance for link {a}-{b}")
        if self.sip_processing_us < 0:
            raise ConfigError("sip_processing_us must be >= 0")

    def delay_us(self, a: str, b: str) -> Fraction:
        if a == b:
            return Fraction(0)
        link = _link(a, b)
        try:
            distance = self.distance_mi[link]
        except KeyError as exc:
            raise ConfigError(f"no distance for link {a}-{b}") from exc
        return propagation_delay(distance, self.link_medium.get(link, self.default_medium))

    def tape_for(self, symbol: str) -> str:
        tape = self.symbol_tape.get(symbol, self.symbol_tape.get("*"))
        if tape is None or tape not in self.sip_tapes:
            raise ConfigError(f"no SIP tape mapped for symbol {symbol!r}")
        return tape

    def venue_site(self, venue: int) -> str:
        try:
            return self.venues[venue]
        except KeyError as exc:
            raise ConfigError(f"unmapped venue {venue}") from exc

    def direct_delay_us(self, venue: int) -> int:
        return round(self.delay_us(self.venue_site(venue), self.observer_site))

    def venue_to_tape_us(self, venue: int, symbol: str) -> int:
        tape_site = self.sip_tapes[self.tape_for(symbol)]
        return round(self.delay_us(self.venue_site(venue), tape_site))

    def tape_to_observer_us(self, symbol: str) -> int:
        tape_site = self.sip_tapes[self.tape_for(symbol)]
        return round(self.delay_us(tape_site, self.observer_site))


def default_topology(sip_processing_us: int = 0) -> SimTopology:
    """Four-site NJ layout; tapes A and B at the NYSE data center, tape C
    and the observer at the Nasdaq data center."""
    distances = {
        _link("Carteret", "Mahwah"): Fraction("34.55"),
        _link("Mahwah", "Secaucus"): Fraction("21.31"),
        _link("Carteret", "Secaucus"): Fraction("16.22"),
        _link("Secaucus", "Weehawken"): Fraction("2.56"),
        # not tabulated anywhere authoritative; routed via Secaucus
        _link("Carteret", "Weehawken"): Fraction("18.78"),
        _link("Mahwah", "Weehawken"): Fraction("23.87"),
    }
    return SimTopology(
        distance_mi=distances,
        venues={1: "Carteret", 2: "Mahwah", 3: "Secaucus", 4: "Weehawken"},
        sip_tapes={"A": "Mahwah", "B": "Mahwah", "C": "Carteret"},
        symbol_tape={"*": "C"},
        observer_site="Carteret",
        sip_processing_us=sip_processing_us,
    )


# -- scenario ----------------------------------------------------------------

@dataclass(slots=True)
class ScenarioOrder:
    """One scripted order: `t_us venue symbol side px_e4 qty flags`.

    px_e4 of ``M`` means market; flags is ``-`` or a comma list drawn from
    {ioc, hidden, mid}.
    """

    t: int
    venue: int
    symbol: str
    side: Side
    px: Optional[int]
    qty: int
    displayed: bool = True
    ioc: bool = False
    peg: PegKind = PegKind.NONE


def parse_scenario(text: str) -> list[ScenarioOrder]:
    orders: list[ScenarioOrder] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or "=" in line:
            continue
        parts = line.split()
        if len(parts) != 7:
            raise ConfigError(f"scenario line {lineno}: expected 7 fields")
        t, venue, symbol, side, px, qty, flags = parts
        flag_set = set() if flags == "-" else set(flags.split(","))
        unknown = flag_set - {"ioc", "hidden", "mid"}
        if unknown:
            raise ConfigError(f"scenario line {lineno}: unknown flags {sorted(unknown)}")
        try:
            orders.append(ScenarioOrder(
                t=int(t), venue=int(venue), symbol=symbol,
                side=Side.BID if side == "B" else Side.OFFER,
                px=None if px == "M" else int(px), qty=int(qty),
                displayed="hidden" not in flag_set and "mid" not in flag_set,
                ioc="ioc" in flag_set,
                peg=PegKind.MIDPOINT if "mid" in flag_set else PegKind.NONE,
            ))
        except ValueError as exc:
            raise ConfigError(f"scenario line {lineno}: {exc}") from exc
    orders.sort(key=lambda o: o.t)
    return orders


def topology_from_config(text: str) -> SimTopology:
    """Sectioned key=value topology file.

    Sections: [sites] ``A-B = miles``; [venues] ``id = site``; [tapes]
    ``name = site``; [symbols] ``SYM = tape`` ('*' allowed); [general]
    ``observer``, ``sip_processing_us``, ``medium``; [media] per-link
    ``A-B = light|fiber|hybrid:<one_way_us>``.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_string(text)

    def medium_of(spec: str) -> Medium:
        if spec == "light":
            return LIGHT
        if spec == "fiber":
            return FIBER
        if spec.startswith("hybrid:"):
            return Medium(MediumKind.HYBRID_LASER, Fraction(spec.split(":", 1)[1]))
        raise ConfigError(f"unknown medium {spec!r}")

    try:
        distances = {_link(*key.split("-", 1)): Fraction(val)
                     for key, val in cp["sites"].items()}
        venues = {int(k): v for k, v in cp["venues"].items()}
        tapes = dict(cp["tapes"].items())
        symbol_tape = dict(cp["symbols"].items()) if cp.has_section("symbols") else {"*": next(iter(tapes))}
        general = cp["general"]
        link_medium = {_link(*k.split("-", 1)): medium_of(v)
                       for k, v in cp["media"].items()} if cp.has_section("media") else {}
        return SimTopology(
            distance_mi=distances,
            venues=venues,
            sip_tapes=tapes,
            symbol_tape=symbol_tape,
            observer_site=general["observer"],
            sip_processing_us=general.getint("sip_processing_us", 0),
            default_medium=medium_of(general.get("medium", "fiber")),
            link_medium=link_medium,
        )
    except (KeyError, ValueError, configparser.Error) as exc:
        raise ConfigError(f"bad topology config: {exc}") from exc


# -- simulation --------------------------------------------------------------

@dataclass
class GroundTruth:
    """Segments implied by the delivery schedule, computed independently of
    the analytics pipeline."""

    segments: dict[tuple[str, Side], list[DislocationSegment]] = field(default_factory=dict)

    def total_segments(self) -> int:
        return sum(len(v) for v in self.segments.values())

    def dislocated_us(self, symbol: str, side: Side) -> int:
        return sum(s.duration for s in self.segments.get((symbol, side), []))


@dataclass(slots=True)
class _Delivery:
    obs_ts: int
    is_sip: bool
    venue: int
    symbol: str
    bid: Optional[tuple[int, int]]
    offer: Optional[tuple[int, int]]
    trade: Optional[tuple[int, int]] = None
    origin_ts: int = 0
    seq: int = 0


def run(topology: SimTopology, scenario: Sequence[ScenarioOrder],
        horizon_us: int) -> tuple[list[ObserverEvent], GroundTruth]:
    """Execute the scripted order flow and emit the observer stream.

    Tapes consolidate venue LBBOs in tape-arrival order and publish NBBO
    changes; simultaneous observer arrivals order SIP before direct, then by
    venue id, then by schedule sequence.
    """
    books: dict[tuple[int, str], LocalBook] = {}
    last_lbbo: dict[tuple[int, str], BboPair] = {}
    deliveries: list[_Delivery] = []
    tape_inbox: dict[str, list[tuple[int, int, int, BboPair]]] = {}  # symbol -> (tape_ts, seq, venue, lbbo)
    next_order_id = 1
    seq = 0

    for order in scenario:
        if order.t > horizon_us:
            continue
        topology.venue_site(order.venue)  # raises ConfigError on unmapped venue
        topology.tape_for(order.symbol)
        key = (order.venue, order.symbol)
        book = books.setdefault(key, LocalBook())
        nbbo = book.lbbo() if order.peg is PegKind.MIDPOINT else None
        events = book.submit(Order(id=next_order_id, side=order.side, qty=order.qty,
                                   limit_px=order.px, displayed=order.displayed,
                                   ioc=order.ioc, peg=order.peg), nbbo=nbbo)
        next_order_id += 1

        for fill in events:
            if not isinstance(fill, Fill):
                continue
            seq += 1
            deliveries.append(_Delivery(
                obs_ts=order.t + topology.venue_to_tape_us(order.venue, order.symbol)
                + topology.sip_processing_us + topology.tape_to_observer_us(order.symbol),
                is_sip=True, venue=order.venue, symbol=order.symbol,
                bid=None, offer=None, trade=(fill.price, fill.qty),
                origin_ts=order.t, seq=seq))

        lbbo = book.lbbo()
        if lbbo == last_lbbo.get(key, BboPair()):
            continue
        last_lbbo[key] = lbbo
        if lbbo.bid is None and lbbo.offer is None:
            continue    # the schema cannot express a fully cleared book
        seq += 1
        deliveries.append(_Delivery(
            obs_ts=order.t + topology.direct_delay_us(order.venue),
            is_sip=False, venue=order.venue, symbol=order.symbol,
            bid=lbbo.bid, offer=lbbo.offer, origin_ts=order.t, seq=seq))
        tape_inbox.setdefault(order.symbol, []).append(
            (order.t + topology.venue_to_tape_us(order.venue, order.symbol),
             seq, order.venue, lbbo))

    # tape-side NBBO consolidation, in arrival order at each tape
    for symbol, inbox in tape_inbox.items():
        inbox.sort(key=lambda item: (item[0], item[1]))
        venue_quotes: dict[int, BboPair] = {}
        last_nbbo = BboPair()
        sip_lag = topology.sip_processing_us + topology.tape_to_observer_us(symbol)
        for tape_ts, _, venue, lbbo in inbox:
            venue_quotes[venue] = lbbo
            nbbo = _consolidate(venue_quotes)
            if nbbo == last_nbbo or (nbbo.bid is None and nbbo.offer is None):
                continue
            last_nbbo = nbbo
            seq += 1
            deliveries.append(_Delivery(
                obs_ts=tape_ts + sip_lag, is_sip=True, venue=venue,
                symbol=symbol, bid=nbbo.bid, offer=nbbo.offer,
                origin_ts=tape_ts, seq=seq))

    deliveries = [d for d in deliveries if d.obs_ts <= horizon_us]
    deliveries.sort(key=lambda d: (d.obs_ts, not d.is_sip, d.venue, d.seq))

    events = [ObserverEvent(
        obs_ts=d.obs_ts,
        feed="SIP" if d.is_sip else direct_feed(d.venue),
        kind="T" if d.trade is not None else "Q",
        symbol=d.symbol, venue=d.venue,
        bid=d.bid, offer=d.offer, trade=d.trade,
        side_hint="U", origin_ts=d.origin_ts,
    ) for d in deliveries]
    return events, _ground_truth(deliveries)


def _consolidate(venue_quotes: dict[int, BboPair]) -> BboPair:
    """Max bid / min offer over venues; price ties go to the lowest venue id."""
    best: dict[Side, Optional[tuple[int, int]]] = {Side.BID: None, Side.OFFER: None}
    for venue in sorted(venue_quotes):
        for side in (Side.BID, Side.OFFER):
            quote = venue_quotes[venue].side(side)
            if quote is None:
                continue
            cur = best[side]
            if cur is None or (quote[0] > cur[0] if side is Side.BID else quote[0] < cur[0]):
                best[side] = quote
    return BboPair(bid=best[Side.BID], offer=best[Side.OFFER])


def _ground_truth(deliveries: Sequence[_Delivery]) -> GroundTruth:
    """Independent scan of the delivery schedule.

    Coalesces all deliveries sharing a microsecond, tracks the per-side
    Delta-p step function, and closes constant-sign runs exactly as the
    detector defines them (half-open, flip to the new run, truncation at the
    last change instant).
    """
    # per-symbol feed state
    sip: dict[str, dict[Side, Optional[int]]] = {}
    venue_px: dict[str, dict[int, dict[Side, Optional[int]]]] = {}
    changes: dict[tuple[str, Side], list[tuple[int, Optional[int]]]] = {}
    last_dp: dict[tuple[str, Side], Optional[int]] = {}

    def flush(ts: int, symbols: set[str]) -> None:
        for symbol in symbols:
            for side in (Side.BID, Side.OFFER):
                sip_px = sip.get(symbol, {}).get(side)
                quotes = [px[side] for px in venue_px.get(symbol, {}).values()
                          if px[side] is not None]
                if sip_px is None or not quotes:
                    dp = None
                else:
                    best = max(quotes) if side is Side.BID else min(quotes)
                    dp = sip_px - best
                key = (symbol, side)
                if dp != last_dp.get(key):
                    last_dp[key] = dp
                    changes.setdefault(key, []).append((ts, dp))

    group_ts: Optional[int] = None
    touched: set[str] = set()
    for d in deliveries:
        if d.trade is not None:
            continue
        if group_ts is not None and d.obs_ts != group_ts:
            flush(group_ts, touched)
            touched = set()
        group_ts = d.obs_ts
        touched.add(d.symbol)
        target = sip.setdefault(d.symbol, {Side.BID: None, Side.OFFER: None}) \
            if d.is_sip else \
            venue_px.setdefault(d.symbol, {}).setdefault(
                d.venue, {Side.BID: None, Side.OFFER: None})
        if d.bid is not None:
            target[Side.BID] = d.bid[0]
        if d.offer is not None:
            target[Side.OFFER] = d.offer[0]
    if group_ts is not None:
        flush(group_ts, touched)

    truth = GroundTruth()
    for (symbol, side), steps in changes.items():
        segments: list[DislocationSegment] = []
        cur: Optional[DislocationSegment] = None
        last_ts = steps[-1][0]
        for ts, dp in steps:
            sign = 0 if dp is None or dp == 0 else (1 if dp > 0 else -1)
            if cur is not None:
                if sign == cur.direction:
                    cur.min_dp = min(cur.min_dp, dp)
                    cur.max_dp = max(cur.max_dp, dp)
                    continue
                cur.end = ts
                segments.append(cur)
                cur = None
            if sign != 0:
                cur = DislocationSegment(symbol=symbol, side=side, start=ts,
                                         end=ts, direction=sign,
                                         min_dp=dp, max_dp=dp)
        if cur is not None:
            cur.end = last_ts
            cur.truncated = True
            segments.append(cur)
        if segments:
            truth.segments[(symbol, side)] = segments
    return truth


def random_scenario(rng: random.Random, venues: Sequence[int], symbol: str,
                    n_orders: int, horizon_us: int,
                    base_px: int = 1_000_000, gap_us: int = 2_000) -> list[ScenarioOrder]:
    """Resting-only random order flow with isolated, well-spaced changes.

    Orders improve or refresh displayed quotes without crossing, so every
    order is an LBBO change and the delivery schedule stays simple.
    """
    orders: list[ScenarioOrder] = []
    t = rng.randrange(1, gap_us)
    bid_px = {v: base_px - 100 * rng.randrange(1, 10) for v in venues}
    ask_px = {v: base_px + 100 * rng.randrange(1, 10) for v in venues}
    while len(orders) < n_orders and t < horizon_us:
        venue = rng.choice(list(venues))
        side = rng.choice((Side.BID, Side.OFFER))
        if side is Side.BID:
            bid_px[venue] = min(bid_px[venue] + 100 * rng.randrange(1, 4), base_px - 100)
            px = bid_px[venue]
        else:
            ask_px[venue] = max(ask_px[venue] - 100 * rng.randrange(1, 4), base_px + 100)
            px = ask_px[venue]
        orders.append(ScenarioOrder(t=t, venue=venue, symbol=symbol, side=side,
                                    px=px, qty=100 * rng.randrange(1, 5)))
        t += rng.randrange(gap_us // 2, gap_us * 2)
    return orders
