"""End-to-end checks of the command-line driver (all offline)."""
from __future__ import annotations

import json
import os
import pathlib
import stat

import pytest

from strongpost.cli import main

ASSETS = pathlib.Path(__file__).parents[1] / "src" / "strongpost" / "assets"
REVERSE = str(ASSETS / "reverse.mfun")
MODEL = str(ASSETS / "reverse_model.smt2")


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    """translate + transform artifacts shared by the downstream tests."""
    d = tmp_path_factory.mktemp("cli")
    assert main(["translate", REVERSE, "-o", str(d / "rev.chc")]) == 0
    assert main(["transform", str(d / "rev.chc"), "-o", str(d / "rev.bundle")]) == 0
    return d


def _fake_solver(tmp_path: pathlib.Path, body: str) -> str:
    exe = tmp_path / "solver.sh"
    exe.write_text("#!/bin/sh\n" + body + "\n")
    exe.chmod(exe.stat().st_mode | stat.S_IXUSR)
    return str(exe)


def test_translate_report_and_sidecar(tmp_path, capsys):
    out = tmp_path / "r.chc"
    assert main(["translate", REVERSE, "-o", str(out)]) == 0
    text = capsys.readouterr().out
    assert "functions=6" in text
    assert "predicates=6" in text
    assert "clauses=12" in text
    assert "goals=2" in text
    assert text.strip().endswith("VERDICT: translated")
    assert out.is_file()
    smap = json.loads((tmp_path / "r.chc.map.json").read_text())
    assert "rev" in json.dumps(smap)


def test_translate_missing_file_exits_3(capsys):
    assert main(["translate", "nope.mfun", "-o", "x.chc"]) == 3
    assert "error:" in capsys.readouterr().err


def test_translate_empty_program_exits_3(tmp_path, capsys):
    src = tmp_path / "empty.mfun"
    src.write_text("  \n")
    assert main(["translate", str(src), "-o", str(tmp_path / "e.chc")]) == 3
    assert "no functions" in capsys.readouterr().err


def test_translate_parse_error_exits_3(tmp_path, capsys):
    src = tmp_path / "bad.mfun"
    src.write_text("def f(: Int = 1\n")
    assert main(["translate", str(src), "-o", str(tmp_path / "b.chc")]) == 3
    assert "error:" in capsys.readouterr().err


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_transform_report(work, tmp_path, capsys):
    assert main(["transform", str(work / "rev.chc"),
                 "-o", str(tmp_path / "t.bundle")]) == 0
    text = capsys.readouterr().out
    assert "catamorphisms=hd,is_asorted,is_dsorted,leq_all" in text
    assert "rejected=rev (ADT-sorted result" in text
    assert "VERDICT: basic-sorted clause system emitted" in text


def test_transform_non_cata_goal_exits_1(tmp_path, capsys):
    chc = tmp_path / "bad.chc"
    chc.write_text(
        "rev([], []).\n"
        "rev([X|Xs], R) :- rev(Xs, R).\n"
        "false :- rev(L, R), rev(R, L2).\n")
    assert main(["transform", str(chc), "-o", str(tmp_path / "t.bundle")]) == 1
    assert "VERDICT: not transformable" in capsys.readouterr().out


def test_solve_with_fixture_model(work, capsys):
    code = main(["solve", str(work / "rev.bundle"),
                 "--model-in", MODEL, "--int-range=-2:2"])
    assert code == 0
    text = capsys.readouterr().out
    assert "model_predicates=new1,new2,new3" in text
    assert "checked_assignments=" in text
    assert "VERDICT: model ok" in text


def test_solve_bad_model_exits_1(work, tmp_path, capsys):
    weak = tmp_path / "weak.smt2"
    # an all-false model can never satisfy the definition clauses
    weak.write_text(pathlib.Path(MODEL).read_text()
                    .replace("(and", "(and false"))
    code = main(["solve", str(work / "rev.bundle"),
                 "--model-in", str(weak), "--int-range=-2:2"])
    assert code == 1
    text = capsys.readouterr().out
    assert "failed_clause=" in text
    assert "witness=" in text
    assert "VERDICT: model invalid" in text


def test_solve_without_solver_exits_3(work, capsys, monkeypatch):
    monkeypatch.delenv("STRONGPOST_SOLVER", raising=False)
    assert main(["solve", str(work / "rev.bundle")]) == 3
    assert "error:" in capsys.readouterr().err


def test_solve_fake_solver_sat(work, tmp_path, capsys):
    exe = _fake_solver(tmp_path, "echo sat\ncat %s" % MODEL)
    out = tmp_path / "m.smt2"
    code = main(["solve", str(work / "rev.bundle"), "--solver", exe,
                 "--int-range=-2:2", "--model-out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "solver_status=sat" in text
    assert out.is_file() and "define-fun" in out.read_text()


def test_solve_fake_solver_unsat(work, tmp_path, capsys):
    exe = _fake_solver(tmp_path, "echo unsat")
    code = main(["solve", str(work / "rev.bundle"), "--solver", exe])
    assert code == 1
    assert "VERDICT: unsat" in capsys.readouterr().out


def test_strengthen_full(work, tmp_path, capsys):
    out = tmp_path / "rev_strong.mfun"
    code = main(["strengthen", str(work / "rev.bundle"),
                 "--model", MODEL, "--program", REVERSE, "-o", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert ("added_rev=forall((n: Int) => (!hd(l)._1 ==> leq_all(n,res)) && "
            "(hd(l)._2 >= n ==> leq_all(n,res)))") in text
    assert "added_snoc=forall((j1: Int) => x >= j1 ==> leq_all(j1,res))" in text
    assert "recheck_violations=0" in text
    assert "VERDICT: strengthened contracts emitted" in text
    emitted = out.read_text()
    assert "is_dsorted(res) && forall" in emitted


def test_strengthen_partial(work, tmp_path, capsys):
    out = tmp_path / "rev_min.mfun"
    code = main(["strengthen", str(work / "rev.bundle"),
                 "--model", MODEL, "--program", REVERSE,
                 "-o", str(out), "--partial"])
    assert code == 0
    text = capsys.readouterr().out
    assert "added_rev=forall((n: Int) => hd(l)._2 >= n ==> leq_all(n,res))" in text


def test_verify_with_fixture_model(tmp_path, capsys):
    out = tmp_path / "vout"
    code = main(["verify", REVERSE, "--model-in", MODEL,
                 "--out-dir", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "solver_status=fixture" in text
    assert "VERDICT: contracts valid; strengthened contracts emitted" in text
    for name in ("report.txt", "program.chc", "transformed.bundle",
                 "model.smt2", "strengthened.mfun"):
        assert (out / name).is_file(), name
    assert "VERDICT:" in (out / "report.txt").read_text()


def test_verify_counterexample_exits_1(tmp_path, capsys):
    src = tmp_path / "inc.mfun"
    src.write_text(
        "def inc(x: Int): Int = {\n"
        "  x + 1\n"
        "} ensuring { res => res > 0 }\n")
    code = main(["verify", str(src), "--out-dir", str(tmp_path / "o")])
    assert code == 1
    text = capsys.readouterr().out
    assert "counterexample=inc(" in text
    assert "VERDICT: contracts violated (bounded counterexample)" in text


def test_verify_contract_free_trivially_valid(tmp_path, capsys):
    src = tmp_path / "plain.mfun"
    src.write_text("def double(x: Int): Int = {\n  x + x\n}\n")
    code = main(["verify", str(src), "--out-dir", str(tmp_path / "o")])
    assert code == 0
    assert "trivially valid" in capsys.readouterr().out


def test_verify_no_solver_reports_unknown(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("STRONGPOST_SOLVER", raising=False)
    code = main(["verify", REVERSE, "--out-dir", str(tmp_path / "o")])
    assert code == 1
    assert "no solver configured" in capsys.readouterr().out


def test_default_stdout_deterministic(work, tmp_path, capsys):
    args = ["strengthen", str(work / "rev.bundle"), "--model", MODEL,
            "--program", REVERSE, "-o", str(tmp_path / "s.mfun")]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_timings_opt_in(work, tmp_path, capsys):
    base = ["translate", REVERSE, "-o", str(tmp_path / "r.chc")]
    assert main(base) == 0
    assert "time_" not in capsys.readouterr().out
    assert main(base + ["--timings"]) == 0
    assert "time_" in capsys.readouterr().out
