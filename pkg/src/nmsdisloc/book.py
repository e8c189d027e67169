"""Single-venue limit order book with price-time priority matching.

Displayed orders rest in FIFO queues per price level; hidden orders rest
behind displayed orders at the same price; midpoint pegs rest hidden with a
floating price tied to the consolidated best bid/offer at execution time.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .consolidate import BboPair
from .core import NotFoundError, Side, ValidationError, midpoint


class PegKind(Enum):
    NONE = "none"
    MIDPOINT = "midpoint"


@dataclass(slots=True)
class Order:
    id: int
    side: Side
    qty: int
    limit_px: Optional[int] = None      # None = market order
    displayed: bool = True
    ioc: bool = False
    peg: PegKind = PegKind.NONE

    def __post_init__(self) -> None:
        if self.qty <= 0:
            raise ValidationError("order qty must be positive")
        if self.limit_px is None and self.peg is PegKind.NONE:
            self.ioc = True             # market orders never rest
        if self.peg is PegKind.MIDPOINT:
            self.displayed = False


@dataclass(slots=True)
class Fill:
    price: int
    qty: int
    maker_id: int
    taker_id: int


@dataclass(slots=True)
class Rest:
    order_id: int
    price: Optional[int]
    qty: int


@dataclass(slots=True)
class Cancel:
    order_id: int
    qty: int


class RejectedOrder(ValidationError):
    """Order refused outright (e.g. midpoint peg without a usable NBBO)."""


@dataclass(slots=True)
class _Resting:
    order: Order
    remaining: int
    seq: int


class LocalBook:
    """Order book for one (venue, symbol)."""

    def __init__(self) -> None:
        # side -> price -> FIFO list of resting orders (displayed and hidden)
        self._levels: dict[Side, dict[int, list[_Resting]]] = {
            Side.BID: {},
            Side.OFFER: {},
        }
        self._pegs: dict[Side, list[_Resting]] = {Side.BID: [], Side.OFFER: []}
        self._index: dict[int, _Resting] = {}
        self._seq = 0
        # lazily-cleaned price heaps (negated for bids) so best-level lookup
        # is O(log levels) instead of a full scan
        self._level_heap: dict[Side, list[int]] = {Side.BID: [], Side.OFFER: []}
        self._disp_heap: dict[Side, list[int]] = {Side.BID: [], Side.OFFER: []}
        self._disp_count: dict[Side, dict[int, int]] = {Side.BID: {}, Side.OFFER: {}}

    # -- queries ------------------------------------------------------------

    def lbbo(self) -> BboPair:
        """Best displayed bid/offer with size aggregated at the level."""
        return BboPair(bid=self._best_displayed(Side.BID),
                       offer=self._best_displayed(Side.OFFER))

    def _best_displayed(self, side: Side) -> Optional[tuple[int, int]]:
        best = self._peek(self._disp_heap[side], side,
                          lambda px: self._disp_count[side].get(px, 0) > 0)
        if best is None:
            return None
        size = sum(r.remaining for r in self._levels[side][best] if r.order.displayed)
        return (best, size)

    def _peek(self, heap: list[int], side: Side, valid) -> Optional[int]:
        """Best live price on a lazy heap; stale entries are popped."""
        while heap:
            px = -heap[0] if side is Side.BID else heap[0]
            if valid(px):
                return px
            heapq.heappop(heap)
        return None

    @staticmethod
    def _better(side: Side, a: int, b: int) -> bool:
        return a > b if side is Side.BID else a < b

    def order_qty(self, order_id: int) -> int:
        try:
            return self._index[order_id].remaining
        except KeyError as exc:
            raise NotFoundError(order_id) from exc

    # -- mutations ----------------------------------------------------------

    def submit(self, order: Order, nbbo: Optional[BboPair] = None) -> list[Fill | Rest | Cancel]:
        """Match, then rest or cancel the residual.  Returns emitted events."""
        if order.id in self._index:
            raise ValidationError(f"duplicate order id {order.id}")
        mid = self._midpoint_price(nbbo)
        if order.peg is PegKind.MIDPOINT and mid is None:
            raise RejectedOrder("midpoint peg needs an uncrossed two-sided NBBO")

        events: list[Fill | Rest | Cancel] = []
        remaining = order.qty
        opp = order.side.opposite
        while remaining > 0:
            resting, exec_px = self._best_candidate(opp, mid)
            if resting is None:
                break
            if order.peg is PegKind.MIDPOINT:
                # a resting peg would execute at the midpoint regardless
                exec_px = mid if resting.order.peg is PegKind.MIDPOINT else exec_px
                if not self._acceptable(order.side, mid, exec_px):
                    break
            elif not self._acceptable(order.side, order.limit_px, exec_px):
                break
            take = min(remaining, resting.remaining)
            events.append(Fill(price=exec_px, qty=take,
                               maker_id=resting.order.id, taker_id=order.id))
            remaining -= take
            resting.remaining -= take
            if resting.remaining == 0:
                self._remove(resting)

        if remaining > 0:
            if order.ioc or order.limit_px is None and order.peg is PegKind.NONE:
                events.append(Cancel(order_id=order.id, qty=remaining))
            else:
                self._rest(order, remaining)
                events.append(Rest(order_id=order.id, price=order.limit_px, qty=remaining))
        return events

    def cancel(self, order_id: int) -> None:
        try:
            resting = self._index[order_id]
        except KeyError as exc:
            raise NotFoundError(order_id) from exc
        self._remove(resting)

    def modify(self, order_id: int, new_qty: int) -> None:
        """Change quantity in place, preserving queue position."""
        if new_qty <= 0:
            raise ValidationError("modify qty must be positive")
        try:
            resting = self._index[order_id]
        except KeyError as exc:
            raise NotFoundError(order_id) from exc
        resting.remaining = new_qty

    # -- internals ----------------------------------------------------------

    @staticmethod
    def _midpoint_price(nbbo: Optional[BboPair]) -> Optional[int]:
        if nbbo is None or nbbo.bid is None or nbbo.offer is None:
            return None
        if nbbo.bid[0] > nbbo.offer[0]:     # crossed NBBO: no meaningful midpoint
            return None
        return midpoint(nbbo.bid[0], nbbo.offer[0])

    @staticmethod
    def _acceptable(side: Side, limit_px: Optional[int], exec_px: int) -> bool:
        if limit_px is None:
            return True
        return exec_px <= limit_px if side is Side.BID else exec_px >= limit_px

    def _best_candidate(self, side: Side, mid: Optional[int]) -> tuple[Optional[_Resting], int]:
        """Head of the best opposite queue: displayed before hidden at equal
        price, pegs priced at the current midpoint, FIFO within a class."""
        best: Optional[_Resting] = None
        best_key: Optional[tuple] = None
        best_px = 0
        px = self._peek(self._level_heap[side], side,
                        lambda p: bool(self._levels[side].get(p)))
        if px is not None:
            queue = self._levels[side][px]
            head = next((r for r in queue if r.order.displayed), None)
            hidden = head is None
            if hidden:
                head = queue[0]
            best, best_px = head, px
            best_key = (px if side is Side.OFFER else -px, hidden, head.seq)
        if mid is not None and self._pegs[side]:
            head = min(self._pegs[side], key=lambda r: r.seq)
            key = (mid if side is Side.OFFER else -mid, True, head.seq)
            if best_key is None or key < best_key:
                best, best_key, best_px = head, key, mid
        return best, best_px

    def _rest(self, order: Order, remaining: int) -> None:
        self._seq += 1
        resting = _Resting(order=order, remaining=remaining, seq=self._seq)
        if order.peg is PegKind.MIDPOINT:
            self._pegs[order.side].append(resting)
        else:
            px = order.limit_px
            key = -px if order.side is Side.BID else px
            queue = self._levels[order.side].setdefault(px, [])
            if not queue:
                heapq.heappush(self._level_heap[order.side], key)
            queue.append(resting)
            if order.displayed:
                counts = self._disp_count[order.side]
                counts[px] = counts.get(px, 0) + 1
                if counts[px] == 1:
                    heapq.heappush(self._disp_heap[order.side], key)
        self._index[order.id] = resting

    def _remove(self, resting: _Resting) -> None:
        order = resting.order
        if order.peg is PegKind.MIDPOINT:
            self._pegs[order.side].remove(resting)
        else:
            px = order.limit_px
            queue = self._levels[order.side][px]
            queue.remove(resting)
            if not queue:
                del self._levels[order.side][px]
            if order.displayed:
                counts = self._disp_count[order.side]
                counts[px] -= 1
                if counts[px] == 0:
                    del counts[px]
        del self._index[order.id]
