"""Acceptance gate: one test per headline criterion, each printing a PASS line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion lines.
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest

from pathlib import Path

from oracles import (
    brute_force_segments,
    describe_reference,
    random_delta_stream,
    segment_tuples,
)

from nmsdisloc import fast, ingest, roc
from nmsdisloc.core import Side
from nmsdisloc.disloc import (
    DislocationSegment,
    classify,
    detect,
    detect_events,
    per_second_rate,
    summarize,
)
from nmsdisloc.ingest import ObserverEvent
from nmsdisloc.netviz import build, components, walk
from nmsdisloc.roc import InferredSide, RocFlavor, RocRecord
from nmsdisloc.sim import (
    FIBER,
    LIGHT,
    Medium,
    MediumKind,
    ScenarioOrder,
    SimTopology,
    default_topology,
    fiber_delay_from_km,
    propagation_delay,
    random_scenario,
    run,
)


DATA_DIR = Path(__file__).parent / "data"


def _ok(name):
    print(f"PASS: {name}")


def test_acceptance_roc_golden():
    """Hand-built 97-trade day: exactly 6 positive and 5 negative records."""
    t0 = time.perf_counter()
    events = list(ingest.read_events(DATA_DIR / "roc_golden.csv"))
    records, trades, report = roc.compute(events, date="2016-01-07")
    elapsed = time.perf_counter() - t0

    assert len(trades) == 97
    positives = [r for r in records if r.roc_e4 > 0]
    negatives = [r for r in records if r.roc_e4 < 0]
    assert [r.roc_e4 for r in positives] == [30000, 158000, 30000, 30000, 20000, 30000]
    assert [r.roc_e4 for r in negatives] == [-40000, -30000, -20000, -10000, -20000]
    assert all(r.inferred_side is InferredSide.ACTIVE_BID and
               r.flavor is RocFlavor.DIRECT for r in positives)
    assert all(r.inferred_side is InferredSide.ACTIVE_OFFER and
               r.flavor is RocFlavor.SIP for r in negatives)
    assert len(records) == 11           # every other trade produced no record
    agg = report.by_key[("2016-01-07", "AAPL", 5)]
    assert agg.net_roc_e4 == -90000 and agg.total_roc_e4 == 150000
    assert elapsed < 1.0
    _ok(f"roc-golden (11 records, venue-5 net -$9.00 / total $15.00, {elapsed:.3f}s)")


def test_acceptance_toy_cancellation():
    records = [
        RocRecord(ts=1, symbol="X", venue=1, exec_px=991400, shares=100,
                  inferred_side=InferredSide.ACTIVE_OFFER, roc_e4=-10000),
        RocRecord(ts=2, symbol="X", venue=1, exec_px=991400, shares=100,
                  inferred_side=InferredSide.ACTIVE_BID, roc_e4=20000),
    ]
    report = roc.aggregate(records)
    assert report.overall.net_roc_e4 == 10000
    assert report.overall.total_roc_e4 == 30000
    _ok("toy-cancellation (net $1.00, total $3.00)")


def test_acceptance_narrative_segment():
    """Offer-side feed divergence held for 1863 us, peaking at $0.06."""
    base = 35_335_000_000       # 09:48:55
    def q(off, feed, bid, ask):
        venue = None if feed == "SIP" else int(feed[2:])
        return ObserverEvent(obs_ts=base + off, feed=feed, kind="Q",
                             symbol="AAPL", venue=venue,
                             bid=(bid, 100), offer=(ask, 100))
    events = [
        q(396000, "SIP", 991000, 991100),
        q(396000, "D.1", 991000, 991100),
        q(396886, "D.1", 991000, 991300),
        q(397644, "D.1", 991000, 991700),
        q(398027, "D.1", 991000, 991500),
        q(398749, "D.1", 991000, 991100),
    ]
    by_key = detect_events(events)
    assert ("AAPL", Side.BID) not in by_key or by_key[("AAPL", Side.BID)] == []
    segs = by_key[("AAPL", Side.OFFER)]
    assert len(segs) == 1
    seg = segs[0]
    assert seg.start == base + 396886 and seg.end == base + 398749
    assert seg.duration == 1863
    assert seg.max_mag == 600
    assert seg.direction == -1 and not seg.truncated
    assert classify(seg).actionable
    _ok("narrative-segment (1863 us, max_mag $0.06, actionable)")


def test_acceptance_detector_oracle_equivalence():
    rng = random.Random(20161107)
    for i in range(1000):
        horizon = rng.choice((10_000, 50_000, 200_000, 1_000_000))
        samples = random_delta_stream(rng, max_transitions=1000, horizon=horizon)
        assert segment_tuples(detect(samples)) == brute_force_segments(samples), i
    _ok("detector-oracle-equivalence (1000 randomized streams)")


def _null_topology():
    return SimTopology(distance_mi={}, venues={1: "Here"},
                       sip_tapes={"C": "Here"}, symbol_tape={"*": "C"},
                       observer_site="Here", sip_processing_us=0)


def _ladder(n, venue=1, gap=50):
    return [ScenarioOrder(t=1_000 + i * gap, venue=venue, symbol="TEST",
                          side=Side.BID, px=1_000_000 + 100 * i, qty=100)
            for i in range(n)]


def test_acceptance_null_model():
    # coincident SIP/direct delivery: zero dislocation over >= 1e5 quote changes
    n_changes = 100_000
    events, truth = run(_null_topology(), _ladder(n_changes), horizon_us=10**9)
    assert sum(1 for e in events if e.kind == "Q" and e.feed == "SIP") >= n_changes
    assert truth.total_segments() == 0
    assert sum(len(v) for v in detect_events(events).values()) == 0

    # positive SIP processing delay: one segment per isolated quote change
    topo = default_topology(sip_processing_us=100)
    scenario = ([ScenarioOrder(t=500, venue=2, symbol="TEST", side=Side.OFFER,
                               px=1_010_000, qty=100)]
                + _ladder(51, venue=2, gap=10_000))
    events, truth = run(topo, scenario, horizon_us=10**9)
    segs = truth.segments[("TEST", Side.BID)]
    assert len(segs) == 50      # first quote defines Delta-p; the rest dislocate
    assert detect_events(events)[("TEST", Side.BID)] == segs

    # detector equals ground truth on 100 random scenarios
    rng = random.Random(41)
    for _ in range(100):
        topo = default_topology(sip_processing_us=rng.choice((0, 37, 100, 450)))
        scn = random_scenario(rng, sorted(topo.venues), "TEST",
                              n_orders=rng.randrange(10, 120), horizon_us=10**8)
        events, truth = run(topo, scn, horizon_us=10**9)
        detected = {k: segment_tuples(v)
                    for k, v in detect_events(events).items() if v}
        assert detected == {k: segment_tuples(v) for k, v in truth.segments.items()}
    _ok("null-model (0 segments coincident; 1 per change delayed; 100 truth matches)")


# (miles, km, light one-way, light two-way, fiber one-way, fiber two-way)
_DELAY_TABLE = [
    ("34.55", "55.6", "185.75", "371.5", "272.44", "544.88"),
    ("21.31", "34.3", "114.57", "229.14", "168.07", "336.14"),
    ("16.22", "26.1", "87.2", "174.4", "127.89", "255.78"),
    ("2.56", "4.12", "13.76", "27.52", "20.19", "40.38"),
]


def test_acceptance_delay_table():
    tol = Fraction(1, 100)
    cells = 0
    for mi, km, l1, l2, f1, f2 in _DELAY_TABLE:
        light = propagation_delay(Fraction(mi), LIGHT)
        fiber = fiber_delay_from_km(Fraction(km))
        for got, want in ((light, l1), (2 * light, l2), (fiber, f1), (2 * fiber, f2)):
            assert abs(got - Fraction(want)) <= tol, (mi, want)
            cells += 1
    hybrid = Medium(MediumKind.HYBRID_LASER, Fraction("94.5"))
    assert propagation_delay(Fraction("16.22"), hybrid) == Fraction("94.5")
    assert 2 * propagation_delay(Fraction("16.22"), hybrid) == 189
    cells += 2
    _ok(f"delay-table ({cells} cells within ±0.01 us)")


def test_acceptance_rate_arithmetic():
    r1 = float(per_second_rate(120355462, 252))
    r2 = float(per_second_rate(65073196, 252))
    assert 20.35 <= r1 <= 20.45
    assert 10.95 <= r2 <= 11.05
    _ok(f"rate-arithmetic ({r1:.3f}/s and {r2:.3f}/s in range)")


def _random_segment_set(rng):
    segs = []
    for _ in range(rng.randrange(1, 30)):
        start = rng.randrange(0, 5_000)
        segs.append(DislocationSegment(
            symbol="X", side=Side.BID, start=start,
            end=start + rng.randrange(0, 400), direction=1,
            min_dp=100, max_dp=100 * rng.randrange(1, 9)))
    return segs


def test_acceptance_walk_properties():
    rng = random.Random(17)
    for _ in range(10_000):
        net = build(_random_segment_set(rng))
        for comp in components(net):
            w = walk(net, comp)
            assert w.tied and w.non_negative
    # the worked 4-component: two interleaved segments
    net = build([DislocationSegment(symbol="X", side=Side.BID, start=10, end=30,
                                    direction=1, min_dp=100, max_dp=100),
                 DislocationSegment(symbol="X", side=Side.BID, start=20, end=40,
                                    direction=1, min_dp=100, max_dp=100)])
    comps = components(net)
    assert len(comps) == 1
    w = walk(net, comps[0])
    assert w.steps == [1, 1, -1, -1]
    assert w.values == [0, 1, 2, 1, 0]
    _ok("walk-properties (1e4 random sets tied+non-negative; 4-component exact)")


def test_acceptance_stats_schema():
    rng = random.Random(23)
    segments = []
    for _ in range(2_000):
        start = rng.randrange(0, 10**9)
        duration = rng.randrange(0, 10**7)
        direction = rng.choice((1, -1))
        mags = sorted(100 * rng.randrange(1, 60) for _ in range(2))
        min_dp, max_dp = ((mags[0], mags[1]) if direction > 0
                          else (-mags[1], -mags[0]))
        segments.append(DislocationSegment(
            symbol="X", side=Side.BID, start=start, end=start + duration,
            direction=direction, min_dp=min_dp, max_dp=max_dp))
    table = summarize(segments)
    tier = table.tier("none")
    expected = {
        "duration_s": [s.duration / 1e6 for s in segments],
        "min_value": [s.min_dp / 10**4 for s in segments],
        "max_value": [s.max_dp / 10**4 for s in segments],
        "min_mag": [s.min_mag / 10**4 for s in segments],
        "mean_mag": [float(s.mean_mag) / 10**4 for s in segments],
        "max_mag": [s.max_mag / 10**4 for s in segments],
    }
    for attr, values in expected.items():
        for stat, want in describe_reference(values).items():
            assert tier.stats[attr][stat] == pytest.approx(want, abs=1e-12)
    counts = [t.count for t in table.tiers]
    assert counts[0] >= counts[1] >= counts[2]
    _ok(f"stats-schema (oracle-exact; tier counts {counts} monotone)")


def _write_synthetic_stream(path, n_events):
    """Random-walk quotes from one venue echoed by the SIP.

    Most echoes land in the same microsecond (synchronized feeds); ~0.1% are
    delayed, producing realistically rare dislocation segments.
    """
    rng = np.random.default_rng(7)
    m = n_events // 2
    upd_ts = np.cumsum(rng.integers(2, 40, size=m)).astype(np.int64)
    mid = 1_000_000 + 100 * np.cumsum(rng.integers(-1, 2, size=m)).astype(np.int64)
    sip_delay = np.where(rng.random(m) < 0.001, 150, 0).astype(np.int64)

    ts = np.concatenate([upd_ts, upd_ts + sip_delay])
    is_sip = np.repeat(np.array([0, 1], np.int64), m)
    bid = np.concatenate([mid, mid]) - 100
    ask = bid + 200
    order = np.argsort(ts, kind="stable")
    import polars as pl

    df = pl.DataFrame({
        "obs_ts_us": ts[order], "v": is_sip[order], "kind": "Q", "symbol": "SYN",
        "bid_px_e4": bid[order], "bid_sz": 100, "ask_px_e4": ask[order],
        "ask_sz": 100, "trade_px_e4": None, "trade_sz": None, "side_hint": "",
        "origin_ts_us": ts[order],
    }).with_columns(
        pl.when(pl.col("v") == 1).then(pl.lit("SIP"))
        .otherwise(pl.lit("D.1")).alias("feed"),
        pl.when(pl.col("v") == 1).then(None)
        .otherwise(1).cast(pl.Int64).alias("venue"),
    ).select("obs_ts_us", "feed", "kind", "symbol", "venue",
             "bid_px_e4", "bid_sz", "ask_px_e4", "ask_sz",
             "trade_px_e4", "trade_sz", "side_hint", "origin_ts_us")
    df.write_csv(path)
    return 2 * m


def test_acceptance_throughput(tmp_path):
    n = 10_000_000
    path = tmp_path / "synthetic.csv"
    _write_synthetic_stream(path, n)
    fast.warm_up()
    t0 = time.perf_counter()
    result = fast.detect_csv(path)
    elapsed = time.perf_counter() - t0
    assert sum(len(v) for v in result.values()) > 0
    rate = n / elapsed
    assert rate >= 1_000_000, f"{rate:.0f} events/s"
    _ok(f"throughput ({rate / 1e6:.2f}M events/s on {n:.0e}-event stream)")
