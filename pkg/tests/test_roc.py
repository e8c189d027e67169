from pathlib import Path

from nmsdisloc import ingest, roc
from nmsdisloc.consolidate import BboPair
from nmsdisloc.ingest import ObserverEvent
from nmsdisloc.roc import InferredSide, RocFlavor, RocRecord, TradeInfo

DATA_DIR = Path(__file__).parent / "data"
BASE = 35_335_000_000       # 09:48:55


def _trade(ts, px, shares, venue=1, hint="U"):
    return ObserverEvent(obs_ts=ts, feed="SIP", kind="T", symbol="AAPL",
                         venue=venue, trade=(px, shares), side_hint=hint)


def _bbo(bid, offer):
    return BboPair(bid=(bid, 100) if bid else None,
                   offer=(offer, 100) if offer else None)


def test_infer_side():
    sip = _bbo(991300, 991500)
    assert roc.infer_side(991300, sip) is InferredSide.ACTIVE_OFFER
    assert roc.infer_side(991500, sip) is InferredSide.ACTIVE_BID
    assert roc.infer_side(991350, sip) is InferredSide.NONE
    assert roc.infer_side(991400, _bbo(991400, 991400)) is InferredSide.BOTH
    assert roc.infer_side(991300, _bbo(None, 991500)) is InferredSide.NONE


def test_trade_roc_active_offer_sip_flavor():
    records, skipped = roc.trade_roc(_trade(1, 991300, 100),
                                     _bbo(991300, 991500), _bbo(991600, 991700))
    assert skipped == 0
    assert [(r.roc_e4, r.inferred_side, r.flavor) for r in records] == [
        (-30000, InferredSide.ACTIVE_OFFER, RocFlavor.SIP)]


def test_trade_roc_active_bid_direct_flavor():
    records, _ = roc.trade_roc(_trade(1, 991100, 395),
                               _bbo(991000, 991100), _bbo(991400, 991500))
    assert [(r.roc_e4, r.flavor) for r in records] == [(158000, RocFlavor.DIRECT)]


def test_trade_roc_locked_sip_emits_both_sides():
    records, _ = roc.trade_roc(_trade(1, 991400, 100),
                               _bbo(991400, 991400), _bbo(991600, 991700))
    got = {(r.inferred_side, r.roc_e4) for r in records}
    assert got == {(InferredSide.ACTIVE_OFFER, -20000),
                   (InferredSide.ACTIVE_BID, 30000)}


def test_trade_roc_zero_entries_dropped():
    records, _ = roc.trade_roc(_trade(1, 991300, 100),
                               _bbo(991300, 991500), _bbo(991300, 991500))
    assert records == []


def test_trade_roc_missing_dbbo_side_skipped_and_counted():
    records, skipped = roc.trade_roc(_trade(1, 991300, 100),
                                     _bbo(991300, 991500), _bbo(None, 991700))
    assert records == [] and skipped == 1


def test_classify_differing():
    sip, dbbo = _bbo(991300, 991500), _bbo(991300, 991700)
    sell = _trade(1, 991300, 100, hint="S")
    buy = _trade(1, 991300, 100, hint="B")
    unk = _trade(1, 991350, 100)
    assert roc.classify_differing(sell, InferredSide.NONE, sip, dbbo)     # offers differ
    assert not roc.classify_differing(buy, InferredSide.NONE, sip, dbbo)  # bids equal
    assert roc.classify_differing(unk, InferredSide.NONE, sip, dbbo)      # either side
    synced = _bbo(991300, 991500)
    assert not roc.classify_differing(unk, InferredSide.NONE, synced, synced)


def test_toy_cancellation_matches_worked_narrative():
    records = [
        RocRecord(ts=1, symbol="X", venue=1, exec_px=991400, shares=100,
                  inferred_side=InferredSide.ACTIVE_OFFER, roc_e4=-10000),
        RocRecord(ts=2, symbol="X", venue=1, exec_px=991400, shares=100,
                  inferred_side=InferredSide.ACTIVE_BID, roc_e4=20000),
    ]
    report = roc.aggregate(records)
    assert report.overall.net_roc_e4 == 10000       # $1.00
    assert report.overall.total_roc_e4 == 30000     # $3.00


def test_aggregate_empty():
    report = roc.aggregate([])
    assert report.overall.net_roc_e4 == 0
    assert report.overall.total_roc_e4 == 0
    assert report.by_key == {}


def test_aggregate_invariants_per_key():
    records, trades, report = _run_golden()
    for agg in list(report.by_key.values()) + [report.overall]:
        assert agg.net_roc_e4 == agg.direct_roc_e4 + agg.sip_roc_e4
        assert agg.total_roc_e4 == agg.direct_roc_e4 - agg.sip_roc_e4
        assert abs(agg.net_roc_e4) <= agg.total_roc_e4
    for rec in records:
        assert (rec.roc_e4 > 0) == (rec.flavor is RocFlavor.DIRECT)
        assert rec.roc_e4 != 0


def _run_golden():
    events = list(ingest.read_events(DATA_DIR / "roc_golden.csv"))
    return roc.compute(events, date="2016-01-07")


def test_golden_record_set():
    records, trades, report = _run_golden()
    assert len(trades) == 97
    positives = [r.roc_e4 for r in records if r.roc_e4 > 0]
    negatives = [r.roc_e4 for r in records if r.roc_e4 < 0]
    assert positives == [30000, 158000, 30000, 30000, 20000, 30000]
    assert negatives == [-40000, -30000, -20000, -10000, -20000]
    for r in records:
        if r.roc_e4 > 0:
            assert r.inferred_side is InferredSide.ACTIVE_BID
        else:
            assert r.inferred_side is InferredSide.ACTIVE_OFFER


def test_golden_venue5_aggregate():
    _, _, report = _run_golden()
    agg = report.by_key[("2016-01-07", "AAPL", 5)]
    assert agg.net_roc_e4 == -90000     # -$9.00
    assert agg.total_roc_e4 == 150000   # $15.00


def test_trade_csv_rows_shape():
    records, trades, _ = _run_golden()
    rows = list(roc.trade_csv_rows(trades))
    # one row per record plus one per record-less trade
    with_records = sum(1 for t in trades if t.records)
    assert len(rows) == len(records) + (len(trades) - with_records)
    header_cols = len(roc.TRADE_CSV_HEADER.split(","))
    assert all(len(r.split(",")) == header_cols for r in rows)


def test_differing_fraction_ratios():
    _, _, report = _run_golden()
    assert 0.0 < report.fraction_differing_trades <= 1.0
    assert 0.0 < report.fraction_differing_value <= 1.0
    assert report.value_concentration == (
        report.fraction_differing_value / report.fraction_differing_trades)
