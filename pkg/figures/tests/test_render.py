import csv

import pytest

from nmsfigures import cli, render


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_duration_hist_renders(golden, tmp_path):
    out = tmp_path / "durations.png"
    n = render.render("duration-hist", [str(golden / "segments.csv")], str(out))
    assert out.stat().st_size > 0
    assert n == sum(1 for r in _rows(golden / "segments.csv")
                    if int(r["duration_us"]) > 0)


def test_start_time_hist_renders(golden, tmp_path):
    out = tmp_path / "starts.svg"
    render.render("start-time-hist", [str(golden / "histogram.csv")], str(out))
    assert out.stat().st_size > 0


def test_circle_node_count_matches_nodes_csv(golden, tmp_path):
    out = tmp_path / "circle.png"
    drawn = render.render("circle", [str(golden / "nodes.csv"),
                                     str(golden / "edges.csv")], str(out))
    assert out.stat().st_size > 0
    assert drawn == len(_rows(golden / "nodes.csv"))


def test_daily_roc_renders(golden, tmp_path):
    out = tmp_path / "roc.png"
    n = render.render("daily-roc", [str(golden / "aggregate.csv")], str(out))
    assert out.stat().st_size > 0
    assert n == len({r["date"] for r in _rows(golden / "aggregate.csv")})
    assert n >= 1        # the scenario prints trades, so the export is non-empty


def test_all_kinds_render_without_error(golden, tmp_path):
    jobs = {
        "duration-hist": [golden / "segments.csv"],
        "start-time-hist": [golden / "histogram.csv"],
        "circle": [golden / "nodes.csv", golden / "edges.csv"],
        "daily-roc": [golden / "aggregate.csv"],
    }
    for kind, inputs in jobs.items():
        out = tmp_path / f"{kind}.png"
        render.render(kind, [str(p) for p in inputs], str(out))
        assert out.exists()


def test_cli_render_and_errors(golden, tmp_path):
    out = tmp_path / "cli.png"
    rc = cli.main(["render", "--kind", "duration-hist",
                   "--in", str(golden / "segments.csv"), "--out", str(out)])
    assert rc == 0 and out.exists()
    assert cli.main(["render", "--kind", "circle",
                     "--in", str(golden / "nodes.csv"), "--out", str(out)]) == 1
    assert cli.main(["render", "--kind", "duration-hist",
                     "--in", str(tmp_path / "missing.csv"), "--out", str(out)]) == 1
    with pytest.raises(SystemExit):
        cli.main(["render", "--kind", "pie", "--in", "x", "--out", "y"])


def test_render_rejects_wrong_column_schema(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        render.duration_hist(str(bad), str(tmp_path / "x.png"))


def test_empty_inputs_still_render(tmp_path):
    seg = tmp_path / "segments.csv"
    seg.write_text("symbol,side,start_us,end_us,duration_us,direction,"
                   "min_dp_e4,max_dp_e4,min_mag_e4,max_mag_e4,actionable,"
                   "large,truncated,large_by_max\n")
    assert render.duration_hist(str(seg), str(tmp_path / "d.png")) == 0
    nodes = tmp_path / "nodes.csv"
    nodes.write_text("index,ts_us,starts,stops,ray,pos_in_ray,angle\n")
    edges = tmp_path / "edges.csv"
    edges.write_text("i,j,weight_e4,count\n")
    assert render.circle_plot(str(nodes), str(edges), str(tmp_path / "c.png")) == 0
