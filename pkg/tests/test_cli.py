import json

import pytest

from pentalab.cli import main
from pentalab.polygon import polygon_from_json, random_twisted


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gen_deterministic_stdout(capsys):
    code1, out1, _ = run(capsys, "gen", "--d", "2", "--n", "11", "--seed", "5")
    code2, out2, _ = run(capsys, "gen", "--d", "2", "--n", "11", "--seed", "5")
    assert code1 == code2 == 0
    assert out1 == out2
    p = polygon_from_json(json.loads(out1))
    q = random_twisted(2, 11, seed=5)
    assert p.vertices == q.vertices and p.monodromy == q.monodromy


def test_gen_out_file(tmp_path, capsys):
    path = tmp_path / "poly.json"
    code, out, _ = run(
        capsys, "gen", "--d", "3", "--n", "11", "--seed", "2", "--out", str(path)
    )
    assert code == 0 and out == ""
    doc = json.loads(path.read_text())
    assert doc["d"] == 3 and doc["n"] == 11


def test_gen_degenerate_exit(capsys):
    code, _, err = run(
        capsys, "gen", "--d", "2", "--n", "11", "--coord-range", "1,1"
    )
    assert code == 3
    assert "error:" in err


def test_trace_text_and_csv(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    code, out, _ = run(
        capsys,
        "trace", "--map", "T:2/1", "--d", "2", "--n", "11",
        "--iters", "8", "--seed", "1", "--out", str(path),
    )
    assert code == 0
    assert "polynomial-log-height" in out
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,log10_height,digits,elapsed_ms"
    assert len(lines) == 10


def test_trace_json(capsys):
    code, out, _ = run(
        capsys,
        "trace", "--map", "T:2/1", "--d", "2", "--n", "11",
        "--iters", "8", "--seed", "1", "--format", "json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["label"] == "polynomial-log-height"
    # canonical name: jumps of 2 with unit intersections is the classical map
    assert doc["map"] == "T_sh"
    assert doc["seed_used"] == 1
    assert doc["truncated"] is False
    assert len(doc["records"]) == 9
    assert doc["records"][0]["t"] == 0
    assert doc["final_t"] == 8
    assert doc["final_log10_height"] == doc["records"][-1]["log10_height"]


def test_trace_bad_map_usage_exit(capsys):
    code, _, err = run(
        capsys,
        "trace", "--map", "nonsense", "--d", "2", "--n", "11", "--iters", "4",
    )
    assert code == 2
    assert "error:" in err


def test_check_duality_small(capsys):
    code, out, _ = run(
        capsys,
        "check", "duality", "--d", "2", "--I", "2", "--J", "1",
        "--trials", "3", "--format", "json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] is True
    assert doc["shift"] == 3
    assert doc["passed"] == 3


def test_check_universal_duality_small(capsys):
    code, out, _ = run(
        capsys,
        "check", "universal-duality", "--d", "2", "--trials", "2",
        "--format", "json",
    )
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_check_corrugated_small(capsys):
    code, out, _ = run(
        capsys,
        "check", "corrugated", "--d", "3", "--trials", "2", "--format", "json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] is True
    # both dented maps agree with the corrugated map at fixed lags
    assert doc["shifts"]["T_m:1"] == -1
    assert doc["shifts"]["T_m:2"] == -2


def test_check_lax_small(capsys):
    code, out, _ = run(
        capsys,
        "check", "lax", "--map", "T_st", "--d", "2", "--n", "11",
        "--seed", "1", "--format", "json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] is True
    assert doc["seed_used"] == 1
    assert doc["max_rel_dev"] < 1e-20


def test_check_lax_gcd_exit(capsys):
    code, _, err = run(
        capsys, "check", "lax", "--map", "T_sh", "--d", "3", "--n", "12"
    )
    assert code == 3
    assert "gcd" in err


def test_tables_subset(tmp_path, capsys):
    out_dir = tmp_path / "rep"
    code, out, _ = run(
        capsys,
        "tables", "--rows", "2d:1", "--seeds", "1", "--iters-2d", "6",
        "--quiet", "--out-dir", str(out_dir), "--format", "json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["all_match"] is True
    on_disk = json.loads((out_dir / "report.json").read_text())
    assert on_disk == doc
    row = doc["rows"][0]
    assert row["row_id"] == "2d:1"
    assert row["match"] is True


def test_tables_row_ranges(capsys):
    code, out, _ = run(
        capsys,
        "tables", "--rows", "2d:1-2", "--seeds", "1", "--iters-2d", "5",
        "--quiet",
    )
    assert code == 0
    assert "2d:1" in out and "2d:2" in out
    assert "all rows match: yes" in out


def test_tables_unknown_row_usage_exit(capsys):
    code, _, err = run(capsys, "tables", "--rows", "4d:9", "--quiet")
    assert code == 2
    assert "error:" in err


def test_bad_flag_value_usage_exit(capsys):
    # argparse rejects the malformed range itself, so this one exits hard
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--d", "2", "--n", "11", "--coord-range", "9,2"])
    assert exc.value.code == 2
    capsys.readouterr()
