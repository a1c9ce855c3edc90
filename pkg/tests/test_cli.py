import json
from fractions import Fraction

import pytest

from genexp.cli import run
from genexp.exprsystem import STANDARD_S_DOC, ExprError, ExprSystem, parse_expr
from genexp.reports import ReportError, dumps, emit_table, read_json
from genexp.spacemodel import SpaceError, truncate, validate_space
from genexp.winding import s_coord


def build(tmp_path, family, *extra):
    out = tmp_path / f"{family}.json"
    assert run(["build", "--family", family, "--out", str(out), *extra]) == 0
    return out


def analyze(tmp_path, sysfile, analysis, *extra):
    out = tmp_path / f"{analysis}.json"
    code = run(["analyze", analysis, "--sys", str(sysfile), "--out", str(out), *extra])
    return code, (read_json(out) if code == 0 else None)


def test_build_writes_a_loadable_config(tmp_path):
    cfg = read_json(build(tmp_path, "denjoy", "--n", "3"))
    assert cfg["kind"] == "system" and cfg["family"] == "denjoy"
    assert cfg["metadata"]["rotation"] == "-1/1+1/1*sqrt2"
    assert cfg["metadata"]["arc_lengths"]["0"] == "1/3"


def test_build_usage_errors(tmp_path):
    out = str(tmp_path / "x.json")
    assert run(["build", "--family", "nope", "--out", out]) == 2
    assert run(["build", "--family", "tower", "--alpha", "w", "--out", out]) == 2
    assert run(["build", "--family", "denjoy", "--n", "1", "--out", out]) == 2
    assert not (tmp_path / "x.json").exists()


def test_analyze_rank_and_depth(tmp_path):
    x2 = build(tmp_path, "x2")
    code, rep = analyze(tmp_path, x2, "rank")
    assert code == 0 and rep["rank"] == "2"
    code, rep = analyze(tmp_path, x2, "depth")
    assert code == 0 and rep["kind"] == "omega-chain" and rep["depth"] == "2"


def test_analyze_companions_profile(tmp_path):
    h = build(tmp_path, "harmonic")
    code, rep = analyze(tmp_path, h, "companions", "--bounds", "N=32", "--delta", "1/8", "--decimals", "6")
    assert code == 0 and rep["kind"] == "companion-profile"
    table = emit_table(rep, "companion-profile")
    assert table.splitlines()[0] == "horizon\tmax_card\twitness_id"
    assert len(table.splitlines()) > 1


def test_analyze_fix_and_refute(tmp_path):
    h = build(tmp_path, "harmonic")
    code, rep = analyze(tmp_path, h, "fix", "--bounds", "N=16")
    assert code == 0 and "h0" in json.dumps(rep)
    code, rep = analyze(tmp_path, h, "refute", "--n", "3")
    assert code == 0 and rep["refuted"]
    d = build(tmp_path, "denjoy")
    code, _ = analyze(tmp_path, d, "refute", "--bounds", "k=2", "--bounds", "cantor=2", "--horizon", "4")
    assert code == 1  # uncountable space


def test_analyze_rejects_bad_arguments(tmp_path):
    s = build(tmp_path, "s")
    assert run(["analyze", "companions", "--sys", str(s), "--bounds", "index"]) == 2
    assert run(["analyze", "companions", "--sys", str(s), "--delta", "x"]) == 2
    assert run(["analyze", "rank", "--sys", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "system"}')
    assert run(["analyze", "rank", "--sys", str(bad)]) == 2


def test_verify_exit_codes(tmp_path):
    out = tmp_path / "claim.json"
    assert run(["verify", "--claim", "limit-glue", "--out", str(out)]) == 0
    assert read_json(out)["ok"] is True
    assert run(["verify", "--claim", "no-such-claim"]) == 2


def test_emit_arc_diameter(tmp_path, capsys):
    assert run(["emit", "--kind", "arc-diameter", "--k", "0", "--m-from", "-5", "--m-to", "10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k\tm\tdiameter" and len(lines) == 17
    assert lines[6] == "0\t0\t1/3"


def test_emit_kind_mismatch_and_empty_report(tmp_path):
    x2 = build(tmp_path, "x2")
    _, rep = analyze(tmp_path, x2, "rank")
    with pytest.raises(ReportError):
        emit_table(rep, "omega-chain")
    assert run(["emit", "--kind", "omega-chain", "--report", str(tmp_path / "rank.json")]) == 2
    assert emit_table({}, "arc-diameter") == "k\tm\tdiameter\n"
    assert run(["emit", "--kind", "pie-chart"]) == 2


def test_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    for d in (a, b):
        sysfile = build(d, "x2", "--n", "3")
        analyze(d, sysfile, "companions", "--bounds", "levels=1", "--bounds", "index=2", "--delta", "1/16")
    for name in ("x2.json", "companions.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_precision_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("GENEXP_PRECISION", "80")
    cfg = read_json(build(tmp_path, "denjoy"))
    assert cfg["params"]["precision"] == 80
    out = tmp_path / "p.json"
    assert run(["--precision", "96", "build", "--family", "denjoy", "--out", str(out)]) == 0
    assert read_json(out)["params"]["precision"] == 96


def test_dumps_sorts_keys():
    assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')


# closed-form systems


def test_expr_system_reproduces_S():
    E = ExprSystem(STANDARD_S_DOC)
    for j in range(-10, 11):
        assert E.coord(("m", "S", j)) == s_coord(j)
    assert E.apply(("m", "S", 3), 2) == ("m", "S", 5)
    assert E.apply(("b", "inf")) == ("b", "inf")
    assert validate_space(E, 20, Fraction(1, 8)).ok


@pytest.mark.parametrize("text", ["3^j", "j**j", "import os", "1.5", "abs(j)", "j % 2", "x + 1"])
def test_expr_grammar_rejects(text):
    with pytest.raises(ExprError):
        parse_expr(text)(2)


def test_expr_grammar_accepts():
    assert parse_expr("1/(j+1)")(3) == Fraction(1, 4)
    assert parse_expr("2^-j")(3) == Fraction(1, 8)
    assert parse_expr("sqrt2*sqrt2")(0) == 2
    with pytest.raises(ExprError):
        parse_expr("1/(j-1)")(1)


def test_expr_N_family_cannot_go_negative():
    doc = json.loads(json.dumps(STANDARD_S_DOC))
    fam = doc["schemas"][0]["family"]
    fam["index"] = "N"
    fam["coord"] = ["2^-j", "0"]
    fam["tail_bound"] = "2^-j"
    E = ExprSystem(doc)
    with pytest.raises(SpaceError):
        E.apply(("m", "S", 0), -1)
    with pytest.raises(SpaceError):
        truncate(E, {"index": 3}, 1)


def test_expr_system_through_the_cli(tmp_path):
    path = tmp_path / "expr.json"
    path.write_text(json.dumps(STANDARD_S_DOC))
    code, rep = analyze(tmp_path, path, "rank")
    assert code == 0 and rep["rank"] == "1"
