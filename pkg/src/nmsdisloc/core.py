"""Shared domain vocabulary: exact integer prices, microsecond times, sides, feeds.

Prices are signed integer counts of 1e-4 USD so that sub-dollar quotes
(0.0001 increments) and half-cent midpoint executions are all exactly
representable in one unit.  No float ever touches money until report
formatting.
"""

from __future__ import annotations

import re
from enum import Enum

PRICE_SCALE = 10_000        # units of 1e-4 USD per dollar
CENT_E4 = 100               # one cent in price units
DOLLAR_E4 = PRICE_SCALE
US_PER_DAY = 86_400_000_000
SESSION_US = int(6.5 * 3600) * 1_000_000  # regular trading session length


class ParseError(ValueError):
    """Malformed textual input."""


class ValidationError(ValueError):
    """Structurally valid input violating a domain constraint."""


class NotFoundError(KeyError):
    """Lookup of an unknown order / symbol / key."""


class ConfigError(ValueError):
    """Bad topology, scenario, or run configuration."""


class DomainError(ValueError):
    """Argument outside an operation's domain (e.g. negative distance)."""


class Side(Enum):
    BID = "bid"
    OFFER = "offer"

    @property
    def opposite(self) -> "Side":
        return Side.OFFER if self is Side.BID else Side.BID


SIP_FEED = "SIP"

_SYMBOL_RE = re.compile(r"^[A-Z0-9.]{1,8}$")
_DECIMAL_RE = re.compile(r"^([+-]?)(\d+)(?:\.(\d*))?$")


def feed_is_sip(feed: str) -> bool:
    return feed == SIP_FEED


def feed_venue(feed: str) -> int:
    """Venue id of a direct feed label 'D.<venue>'."""
    if not feed.startswith("D."):
        raise ParseError(f"not a direct feed label: {feed!r}")
    try:
        return int(feed[2:])
    except ValueError as exc:
        raise ParseError(f"bad venue in feed label: {feed!r}") from exc


def direct_feed(venue: int) -> str:
    return f"D.{venue}"


def validate_symbol(ticker: str) -> str:
    if not _SYMBOL_RE.match(ticker):
        raise ValidationError(f"bad symbol: {ticker!r}")
    return ticker


def price_from_decimal(text: str) -> int:
    """Parse a decimal dollar string to exact 1e-4 units.

    More than four fraction digits would lose precision and is rejected.
    """
    m = _DECIMAL_RE.match(text.strip())
    if m is None:
        raise ParseError(f"bad price literal: {text!r}")
    sign, whole, frac = m.group(1), m.group(2), m.group(3) or ""
    if len(frac) > 4:
        raise ParseError(f"price {text!r} has sub-1e-4 precision")
    value = int(whole) * PRICE_SCALE + int(frac.ljust(4, "0") or "0")
    return -value if sign == "-" else value


def price_to_decimal(value: int, min_places: int = 2) -> str:
    """Exact decimal dollars for an e4 price; never scientific notation."""
    sign = "-" if value < 0 else ""
    whole, frac = divmod(abs(value), PRICE_SCALE)
    digits = f"{frac:04d}"
    while len(digits) > min_places and digits.endswith("0"):
        digits = digits[:-1]
    if min_places == 0 and digits == "":
        return f"{sign}{whole}"
    return f"{sign}{whole}.{digits}"


def quote_increment(px_e4: int) -> int:
    """Minimum displayed-quote increment at this price level (sub-penny rule)."""
    return CENT_E4 if abs(px_e4) >= DOLLAR_E4 else 1


def is_quote_aligned(px_e4: int) -> bool:
    return px_e4 % quote_increment(px_e4) == 0


def midpoint(bid_px: int, offer_px: int) -> int:
    """Midpoint price in e4 units; exact because cent-quantized sides sum even."""
    total = bid_px + offer_px
    if total % 2 != 0:
        raise ValidationError(
            f"midpoint of {bid_px} and {offer_px} not representable in 1e-4 units"
        )
    return total // 2
