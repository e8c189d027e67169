"""Generate golden CSV inputs by driving the analytics CLI as a subprocess."""

import subprocess

import pytest

SCENARIO = """\
# resting quotes on two venues, then marketable bids that print trades
100 1 TEST S 1000200 500 -
200 2 TEST S 1000300 500 -
300 1 TEST B 1000000 500 -
50000 3 TEST B 1000100 100 -
120000 1 TEST B 1000200 100 -
250000 2 TEST B 1000300 150 -
400000 1 TEST B 1000200 200 -
"""


def _cli(*args):
    subprocess.run(["nmsdisloc", *args], check=True, capture_output=True)


@pytest.fixture(scope="session")
def golden(tmp_path_factory):
    root = tmp_path_factory.mktemp("golden")
    sim = root / "sim"
    _cli("simulate", "--seed", "3", "--orders", "150",
         "--horizon-us", "100000000", "--sip-processing-us", "150",
         "--out-dir", str(sim))
    out = root / "out"
    _cli("detect", "--input", str(sim / "events.csv"), "--out-dir", str(out))
    _cli("circle", "--segments", str(out / "segments.csv"),
         "--layout", "event_space", "--out-dir", str(out))

    trade_sim = root / "trades"
    scenario = root / "scenario.txt"
    scenario.write_text(SCENARIO)
    _cli("simulate", "--scenario", str(scenario), "--horizon-us", "100000000",
         "--sip-processing-us", "150", "--out-dir", str(trade_sim))
    _cli("roc", "--input", str(trade_sim / "events.csv"),
         "--date", "2016-01-07", "--out-dir", str(out))
    return out
