import csv
import io
import json
import math

import pytest

from kruglab.cli import RunConfig, UsageError, main, parse_law
from kruglab.dist import bernoulli, binomial, delta, symmetric_two_point
from kruglab.harness import _fixture_dir


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bounds_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--p", "2,4,8,16,32,64", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# kruglab.bounds/")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert len(rows) == 6
    assert all(float(r["lower"]) <= float(r["upper"]) for r in rows)


def test_transform_reports_sqrt2(capsys):
    code, out, _ = run(capsys, "transform", "--law", "delta:1", "--tail-tol", "1e-12", "--space", "lp:2")
    assert code == 0
    res = json.loads(out)
    assert res["norm"] == pytest.approx(math.sqrt(2), abs=1e-9)
    assert res["norm"] <= res["norm_upper"]


def test_norm_step(capsys):
    code, out, _ = run(capsys, "norm", "--space", "lorentz:2", "--step", "[[0.25, 2], [0.75, 1]]")
    assert code == 0 and json.loads(out)["norm"] == pytest.approx(1.5)


def test_ratio_and_extremal(capsys):
    code, out, _ = run(capsys, "ratio", "--space", "lp:1")
    assert code == 0 and json.loads(out)["estimate"] == pytest.approx(1.0, abs=1e-9)
    code, out, _ = run(capsys, "extremal", "--n", "2", "--u", "1", "--q", "2", "--p", "2")
    res = json.loads(out)
    assert res["taus"] == [0.75, 0.25] and res["fstar"] == [[0.25, 2], [0.5, 1]]
    assert res["profiles"][0]["profile_norm"] == pytest.approx(1.0)


def test_rosenthal_command(capsys, tmp_path):
    path = _fixture_dir("ensembles") / "coins.json"
    code, out, _ = run(capsys, "rosenthal", "--ensemble", str(path), "--space", "lp:4")
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = run(capsys, "rosenthal", "--ensemble", str(path), "--space", "lp:4", "--constant", "0.01")
    assert code == 1 and not json.loads(out)["passed"]


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "norm", "--space", "nope:1", "--law", "delta:1")[0] == 2
    assert run(capsys, "transform", "--law", "weird:3")[0] == 2
    assert run(capsys, "transform")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_unreachable_tail_tol_is_a_config_error(capsys):
    code, _, err = run(capsys, "transform", "--law", "delta:1", "--tail-tol", "1e-320")
    assert code == 2 and "n_max" in err


def test_numerical_failure_exits_1(capsys, monkeypatch):
    import kruglab.spaces

    def boom(self, fs):
        raise ArithmeticError("could not bracket")
    monkeypatch.setattr(kruglab.spaces.OrliczNq, "_norm_decreasing", boom)
    code, _, err = run(capsys, "norm", "--space", "orlicz:1", "--law", "delta:1")
    assert code == 1 and "numerical failure" in err


def test_audit_byte_identical(tmp_path, monkeypatch):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    args = ["audit", "--corpus", "fixtures/", "--seed", "7", "--n-random", "30", "--trials", "10000"]
    assert main(args + ["-o", str(a)]) == 0
    assert main(args + ["-o", str(b)]) == 0
    monkeypatch.setenv("KRUGLOV_THREADS", "2")
    assert main(args + ["--workers", "8", "-o", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_audit_csv_header(capsys):
    code, out, _ = run(capsys, "audit", "--seed", "1", "--n-random", "5", "--trials", "10000", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "# kruglab.audit/1"
    assert lines[1] == "name,ensemble,mode,lhs,rhs,constant_used,margin,passed"


def test_run_config_round_trip(capsys, tmp_path):
    cfg = RunConfig("bounds", p_grid=(2, 3), seed=4, format="csv")
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    code, out, _ = run(capsys, "bounds", "--config", str(path), "--dump-config")
    assert code == 0 and RunConfig.from_dict(json.loads(out)) == cfg
    code, out, _ = run(capsys, "bounds", "--config", str(path), "--format", "json", "--dump-config")
    assert json.loads(out)["format"] == "json"
    with pytest.raises(UsageError):
        RunConfig.from_dict({"command": "bounds", "colour": 1})
    with pytest.raises(UsageError):
        RunConfig("norm", format="xml")


def test_parse_law_forms(tmp_path):
    assert parse_law("delta:2") == delta(2.0)
    assert parse_law("indicator:0.25") == bernoulli(0.25)
    assert parse_law("sym:0.5,3") == symmetric_two_point(0.5, 3.0)
    assert parse_law("binomial:4,0.5") == binomial(4, 0.5)
    assert parse_law('{"atoms": [[1, 1]], "deficit": 0}') == delta(1)
    f = tmp_path / "law.json"
    f.write_text('{"atoms": [[0, 0.5], [2, 0.5]]}')
    assert parse_law(str(f)).mean() == 1
    with pytest.raises(UsageError):
        parse_law("binomial:4")


def test_packaged_fixture_paths_resolve_from_any_directory(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    law = parse_law("fixtures/laws/point_one.json")
    assert math.fsum(law.masses) + float(law.deficit) == pytest.approx(1.0)
    code, out, _ = run(capsys, "rosenthal", "--ensemble", "fixtures/ensembles/coins.json", "--space", "lp:4")
    assert code == 0 and json.loads(out)["detail"]["ensemble"] == "coins"
    code, _, err = run(capsys, "rosenthal", "--ensemble", "fixtures/ensembles", "--space", "lp:4")
    assert code == 2 and "one ensemble file" in err
