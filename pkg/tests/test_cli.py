import json
from fractions import Fraction

import pytest

from homflow.cli import EXIT_CHECK, EXIT_OK, EXIT_USAGE, UsageError, parse_config_file, resolve, run


def _read(d, name):
    return (d / name).read_bytes()


def test_dioph_artifacts(tmp_path):
    out = tmp_path / "dioph"
    assert run(["dioph", "--grid", "8", "--qmax", "2000", "--out", str(out)]) == EXIT_OK
    csv = _read(out, "data.csv").decode()
    lines = csv.split("\r\n")
    assert lines[0] == "s,s_float,margin"
    assert len([x for x in lines[1:] if x]) == 8
    for row in lines[1:9]:
        s, f, m = row.split(",")
        assert float(Fraction(s)) == pytest.approx(float(f))
        assert float(m) > 0
    summary = json.loads(_read(out, "summary.json"))
    assert summary["config"]["grid"] == 8
    assert "version" in summary
    assert (out / "report.txt").exists()


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["dioph", "--grid", "6", "--qmax", "1000", "--seed", "7"]
    assert run(args + ["--out", str(a)]) == EXIT_OK
    assert run(args + ["--out", str(b)]) == EXIT_OK
    assert _read(a, "data.csv") == _read(b, "data.csv")
    sa, sb = json.loads(_read(a, "summary.json")), json.loads(_read(b, "summary.json"))
    sa["config"].pop("out"), sb["config"].pop("out")
    assert sa == sb


def test_seed_changes_points(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["dioph", "--grid", "4", "--qmax", "500", "--seed", "1", "--out", str(a)]) == EXIT_OK
    assert run(["dioph", "--grid", "4", "--qmax", "500", "--seed", "2", "--out", str(b)]) == EXIT_OK
    assert _read(a, "data.csv") != _read(b, "data.csv")


def test_malformed_config_writes_nothing(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("grid = 4\nthis line has no equals sign\n")
    out = tmp_path / "out"
    assert run(["dioph", "--config", str(cfg), "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()


def test_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("grid = 4\nbogus = 1\n")
    out = tmp_path / "out"
    assert run(["dioph", "--config", str(cfg), "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()
    with pytest.raises(UsageError):
        resolve("dioph", {}, {"bogus": "1"})


def test_unknown_flag_and_bad_value(tmp_path):
    assert run(["dioph", "--nonsense", "1"]) == EXIT_USAGE
    assert run(["dioph", "--grid", "four", "--out", str(tmp_path / "o")]) == EXIT_USAGE
    assert run(["no-such-experiment"]) == EXIT_USAGE


def test_flags_override_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment line\ngrid = 4   # trailing comment\nqmax = 700\n")
    vals = parse_config_file(str(cfg))
    assert vals == {"grid": "4", "qmax": "700"}
    c = resolve("dioph", vals, {"grid": "5"})
    assert c["grid"] == 5 and c["qmax"] == 700 and c["qmin"] == 10
    out = tmp_path / "o"
    assert run(["dioph", "--config", str(cfg), "--grid", "3", "--out", str(out)]) == EXIT_OK
    assert json.loads(_read(out, "summary.json"))["config"]["grid"] == 3


def test_exponents_output(tmp_path):
    out = tmp_path / "e"
    assert run(["exponents", "--real", "1,1", "--beta", "1/2", "--out", str(out)]) == EXIT_OK
    s = json.loads(_read(out, "summary.json"))["summary"]
    assert set(s) >= {"char", "delta_x", "beta_phi", "dimension_bound", "label", "max_condition"}
    rows = _read(out, "data.csv").decode().split("\r\n")
    assert rows[0] == "quantity,value"


def test_failed_check_exit_code(tmp_path):
    # a ratio bound no run can meet must give the failed-check exit code, artifacts still written
    out = tmp_path / "s"
    code = run(["shrinking", "--t-max", "4", "--max-ratio", "0", "--out", str(out)])
    assert code == EXIT_CHECK
    assert not json.loads(_read(out, "summary.json"))["passed"]
