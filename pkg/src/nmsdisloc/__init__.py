"""Streaming analytics for SIP-vs-direct feed dislocations, realized
opportunity cost, ordered-network exports, and a fragmented-market simulator.
"""

from .consolidate import BboPair, DeltaSample, MarketView, delta_stream
from .core import (
    PRICE_SCALE,
    ConfigError,
    DomainError,
    NotFoundError,
    ParseError,
    Side,
    ValidationError,
    price_from_decimal,
    price_to_decimal,
)
from .disloc import (
    DislocationSegment,
    classify,
    detect,
    detect_events,
    per_second_rate,
    summarize,
)
from .ingest import ObserverEvent, parse_event, read_events, validate_stream
from .roc import RocRecord, aggregate, compute, infer_side, trade_roc

__version__ = "0.1.0"

__all__ = [
    "BboPair", "DeltaSample", "MarketView", "delta_stream",
    "PRICE_SCALE", "Side",
    "ConfigError", "DomainError", "NotFoundError", "ParseError", "ValidationError",
    "price_from_decimal", "price_to_decimal",
    "DislocationSegment", "classify", "detect", "detect_events",
    "per_second_rate", "summarize",
    "ObserverEvent", "parse_event", "read_events", "validate_stream",
    "RocRecord", "aggregate", "compute", "infer_side", "trade_roc",
    "__version__",
]
