import csv
import io
import json
from fractions import Fraction

import pytest

from sharpthresh.cli import build_parser, load_graph, main, parse_number
from sharpthresh.measure import PositiveMeasure


def _run(capsys, *argv):
    assert main(list(argv)) == 0
    return capsys.readouterr().out


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_number():
    assert parse_number("1/2") == Fraction(1, 2)
    assert parse_number("2") == Fraction(2)
    assert isinstance(parse_number("0.5"), float)


def test_load_graph(tmp_path):
    assert load_graph("triangle").edge_count == 3
    assert load_graph("grid:3x2").vertex_count == 6
    assert load_graph("torus:2").edge_count == 8
    f = tmp_path / "g.txt"
    f.write_text("3 2\n0 1\n1 2\n")
    assert load_graph(str(f)).edge_count == 2
    with pytest.raises(SystemExit):
        load_graph("nonsense")


def test_rc_exact(capsys):
    rows = _rows(_run(capsys, "rc-exact", "--graph", "triangle", "--p", "1/2", "--q", "2"))
    assert [r["marginal"] for r in rows] == ["5/14"] * 3
    assert rows[0]["lower_bound"] == "1/3" and rows[0]["upper_bound"] == "1/2"


def test_sidecar_written(tmp_path):
    out = tmp_path / "rc.csv"
    main(["rc-exact", "--out", str(out)])
    meta = json.loads((tmp_path / "rc.csv.meta.json").read_text())
    assert meta["command"] == "rc-exact" and meta["exact"] is True
    assert out.read_text().startswith("edge,")


def test_rc_sample(tmp_path, capsys):
    samples = tmp_path / "s.bin"
    rows = _rows(_run(capsys, "rc-sample", "--sweeps", "2000", "--burn-in", "10", "--seed", "3",
                      "--samples-out", str(samples)))
    assert len(rows) == 3
    assert abs(float(rows[0]["empirical_marginal"]) - 5 / 14) < 0.05
    assert (tmp_path / "s.bin.json").exists()


def test_influence_commands(tmp_path, capsys):
    rows = _rows(_run(capsys, "influence", "--mixture", "101"))
    assert abs(float(rows[0]["conditional_influence"]) - 1 / 3) < 0.02
    m = tmp_path / "mu.json"
    m.write_text(PositiveMeasure(2, [1, 1, 1, 3]).to_json())
    e = tmp_path / "A.json"
    e.write_text(json.dumps(["11"]))
    rows = _rows(_run(capsys, "influence", "--measure", str(m), "--event", str(e)))
    assert len(rows) == 2
    js = json.loads(_run(capsys, "influence", "--measure", str(m), "--format", "json"))
    assert "conditional" in js[0]


def test_encode_verify(tmp_path, capsys):
    cells = tmp_path / "cells.json"
    rows = _rows(_run(capsys, "encode-verify", "--samples", "20000", "--pairs", "500",
                      "--cells", str(cells)))
    assert rows[0]["exact_match"] == "True" and rows[0]["monotone_map"] == "True"
    assert len(json.loads(cells.read_text())) == 8


def test_torus_commands(capsys):
    rows = _rows(_run(capsys, "torus-crossing", "--n", "2", "--k", "2", "--sweeps", "300",
                      "--burn-in", "30"))
    assert rows[0]["event"] == "LW_2"
    rows = _rows(_run(capsys, "threshold-curve", "--n", "2", "--k", "3", "--points", "3",
                      "--sweeps", "200", "--burn-in", "20"))
    assert len(rows) == 3
    rows = _rows(_run(capsys, "pk-scan", "--k", "1", "--sweeps", "200", "--burn-in", "20"))
    assert rows[0]["torus_side"] == "8"


def test_counterexample_command(capsys):
    rows = _rows(_run(capsys, "counterexample", "--N", "4", "--p-grid", "0.5", "--samples", "1000"))
    assert float(rows[0]["exact"]) == pytest.approx(0.31640625)


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
