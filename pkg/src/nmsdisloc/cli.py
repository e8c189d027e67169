"""Command-line front end: ingestion -> analytics -> CSV exports.

Subcommands: detect, roc, circle, stats, simulate.  A ``--config`` file of
``key=value`` lines supplies defaults for any long flag (dashes or
underscores); explicit flags win.  ``NMS_DISLOC_THREADS`` (or ``--threads``)
caps worker parallelism.  Exit codes: 2 usage, 1 data error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import disloc, ingest, netviz, roc, sim
from .core import ConfigError, ParseError, ValidationError, price_to_decimal


def _read_config(path: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, raw_value = line.split("=", 1)
        value: object = raw_value.strip()
        if value in ("true", "false"):
            value = value == "true"
        else:
            try:
                value = int(value)
            except ValueError:
                pass
        values[key.strip().replace("-", "_")] = value
    return values


def _apply_threads(threads: Optional[int]) -> None:
    if threads is None:
        threads = int(os.environ.get("NMS_DISLOC_THREADS", "0")) or None
    if threads is not None:
        os.environ["POLARS_MAX_THREADS"] = str(threads)


def _load_events(path: str):
    return list(ingest.read_events(path))


def _write_lines(path: Path, header: str, rows) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _detect_segments(args) -> dict:
    if args.fast:
        from . import fast

        return fast.detect_csv(args.input)
    return disloc.detect_events(_load_events(args.input))


# -- subcommands -------------------------------------------------------------

def cmd_detect(args) -> int:
    by_key = _detect_segments(args)
    segments = []
    for (symbol, _side), segs in sorted(by_key.items(),
                                        key=lambda kv: (kv[0][0], kv[0][1].value)):
        if args.symbol and symbol != args.symbol:
            continue
        segments.extend(segs)
    segments.sort(key=lambda s: (s.symbol, s.side.value, s.start, s.end))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_lines(out / "segments.csv", disloc.SEGMENT_CSV_HEADER,
                 (s.to_csv_row(args.threshold_us, args.large_min_mag_e4)
                  for s in segments))

    tiers = {
        "none": segments,
        "actionable": [s for s in segments
                       if disloc.classify(s, args.threshold_us, args.large_min_mag_e4).actionable],
    }
    tiers["actionable_large"] = [
        s for s in tiers["actionable"]
        if disloc.classify(s, args.threshold_us, args.large_min_mag_e4).large]
    rows = []
    for tier, segs in tiers.items():
        for minute, count in sorted(disloc.minute_histogram(segs).items()):
            rows.append(f"{tier},{minute},{count}")
    _write_lines(out / "histogram.csv", "tier,minute_of_day,count", rows)
    return 0


def cmd_roc(args) -> int:
    events = _load_events(args.input)
    _records, trades, report = roc.compute(events, date=args.date)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_lines(out / "trades_roc.csv", roc.TRADE_CSV_HEADER, roc.trade_csv_rows(trades))
    _write_lines(out / "aggregate.csv", roc.AGG_CSV_HEADER, roc.aggregate_csv_rows(report))
    overall = report.overall
    summary = [
        f"trades,{overall.trades}",
        f"differing_trades,{overall.differing_trades}",
        f"traded_value,{price_to_decimal(overall.traded_value_e4)}",
        f"differing_traded_value,{price_to_decimal(overall.differing_traded_value_e4)}",
        f"sip_roc,{price_to_decimal(overall.sip_roc_e4)}",
        f"direct_roc,{price_to_decimal(overall.direct_roc_e4)}",
        f"net_roc,{price_to_decimal(overall.net_roc_e4)}",
        f"total_roc,{price_to_decimal(overall.total_roc_e4)}",
        f"fraction_differing_trades,{report.fraction_differing_trades:.9f}",
        f"fraction_differing_value,{report.fraction_differing_value:.9f}",
        f"value_concentration,{report.value_concentration:.9f}",
    ]
    _write_lines(out / "roc_summary.csv", "name,value", summary)
    return 0


def cmd_circle(args) -> int:
    with open(args.segments, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != disloc.SEGMENT_CSV_HEADER:
            raise ParseError(f"{args.segments}: unexpected header")
        segments = [disloc.segment_from_csv_row(line) for line in fh if line.strip()]
    if args.filter != "none":
        kept = []
        for seg in segments:
            flags = disloc.classify(seg, args.threshold_us, args.large_min_mag_e4)
            if args.filter == "actionable" and not flags.actionable:
                continue
            if args.filter == "actionable-large" and not (flags.actionable and flags.large):
                continue
            kept.append(seg)
        segments = kept
    net = netviz.build(segments, modulo_day=args.modulo_day)
    layout = netviz.renormalize(net, mode=args.layout)
    comps = netviz.components(net)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_lines(out / "nodes.csv", netviz.NODES_CSV_HEADER, netviz.nodes_csv_rows(layout))
    _write_lines(out / "edges.csv", netviz.EDGES_CSV_HEADER, netviz.edges_csv_rows(net))
    _write_lines(out / "components.csv", netviz.COMPONENTS_CSV_HEADER,
                 netviz.components_csv_rows(net, comps))
    return 0


def cmd_stats(args) -> int:
    by_key = _detect_segments(args)
    segments = [s for segs in by_key.values() for s in segs]
    segments.sort(key=lambda s: (s.symbol, s.side.value, s.start, s.end))
    table = disloc.summarize(segments, args.threshold_us, args.large_min_mag_e4)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for tier in table.tiers:
        rows.append(f"{tier.name},count,,{tier.count}")
        for attr in disloc.ATTR_NAMES:
            if attr not in tier.stats:
                continue
            for stat in disloc.STAT_NAMES:
                rows.append(f"{tier.name},{attr},{stat},{tier.stats[attr][stat]:.9g}")
    _write_lines(out / "stats.csv", "tier,attribute,stat,value", rows)
    return 0


def cmd_simulate(args) -> int:
    if args.topology:
        topology = sim.topology_from_config(Path(args.topology).read_text(encoding="utf-8"))
    else:
        topology = sim.default_topology(sip_processing_us=args.sip_processing_us)
    if args.scenario:
        scenario = sim.parse_scenario(Path(args.scenario).read_text(encoding="utf-8"))
    else:
        import random

        rng = random.Random(args.seed)
        scenario = sim.random_scenario(rng, sorted(topology.venues), args.symbol,
                                       n_orders=args.orders, horizon_us=args.horizon_us)
    events, truth = sim.run(topology, scenario, horizon_us=args.horizon_us)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "events.csv").open("w", encoding="utf-8") as fh:
        ingest.write_events(events, fh)
    rows = []
    for (symbol, side), segs in sorted(truth.segments.items(),
                                       key=lambda kv: (kv[0][0], kv[0][1].value)):
        rows.extend(s.to_csv_row() for s in segs)
    _write_lines(out / "truth.csv", disloc.SEGMENT_CSV_HEADER, rows)
    return 0


# -- argument plumbing -------------------------------------------------------

def _add_threshold_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold-us", type=int, default=disloc.DEFAULT_ACTIONABLE_US)
    p.add_argument("--large-min-mag-e4", type=int, default=disloc.DEFAULT_LARGE_MIN_MAG_E4)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmsdisloc",
                                     description="Feed-dislocation analytics and simulator")
    parser.add_argument("--config", help="key=value file of default flag values")
    parser.add_argument("--threads", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="segments + start-time histogram")
    p.add_argument("--input", required=True)
    p.add_argument("--symbol", default=None)
    p.add_argument("--fast", action="store_true")
    p.add_argument("--out-dir", default=".")
    _add_threshold_flags(p)
    p.set_defaults(fn=cmd_detect)

    p = sub.add_parser("roc", help="per-trade + aggregated realized opportunity cost")
    p.add_argument("--input", required=True)
    p.add_argument("--date", default="")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(fn=cmd_roc)

    p = sub.add_parser("circle", help="ordered-network graph exports")
    p.add_argument("--segments", required=True)
    p.add_argument("--layout", choices=("event_space", "real_time"), default="event_space")
    p.add_argument("--modulo-day", action="store_true")
    p.add_argument("--filter", choices=("none", "actionable", "actionable-large"),
                   default="none")
    p.add_argument("--out-dir", default=".")
    _add_threshold_flags(p)
    p.set_defaults(fn=cmd_circle)

    p = sub.add_parser("stats", help="tiered summary statistics table")
    p.add_argument("--input", required=True)
    p.add_argument("--fast", action="store_true")
    p.add_argument("--out-dir", default=".")
    _add_threshold_flags(p)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("simulate", help="emit an observer stream with ground truth")
    p.add_argument("--topology", default=None)
    p.add_argument("--scenario", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--symbol", default="TEST")
    p.add_argument("--orders", type=int, default=100)
    p.add_argument("--horizon-us", type=int, default=10_000_000)
    p.add_argument("--sip-processing-us", type=int, default=100)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(fn=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            overrides = _read_config(args.config)
            parser.set_defaults(**overrides)
            for action in parser._actions:
                if isinstance(action, argparse._SubParsersAction):
                    for sub_parser in action.choices.values():
                        sub_parser.set_defaults(**overrides)
            args = parser.parse_args(argv)
        _apply_threads(args.threads)
        return args.fn(args)
    except (ParseError, ValidationError, ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
