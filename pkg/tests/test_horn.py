"""Wire-format emission, solver subprocess handling, model parsing/checking."""
from __future__ import annotations

import os
import pathlib
import stat
import tempfile

import pytest

from strongpost.chc_text import parse_chc
from strongpost.horn import (
    ModelError, PredModel, SolverConfig, SolverError, atom_formula,
    check_model, emit_horn, format_model, invoke, parse_model, parse_sexprs,
)
from strongpost.ir import (
    BOOL, INT, And, BoolConst, ChcSystem, Cmp, Implies, Not, Var,
)

ASSETS = pathlib.Path(__file__).parents[1] / "src" / "strongpost" / "assets"


def _fake_solver(tmp_path, body: str) -> SolverConfig:
    script = tmp_path / "fake-solver.sh"
    script.write_text("#!/bin/sh\n" + body)
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    return SolverConfig((str(script),), timeout=5.0)


# ---------------------------------------------------------------------------
# emit_horn
# ---------------------------------------------------------------------------

def test_emit_empty_system():
    text = emit_horn(ChcSystem({}, {}, [], []))
    assert "(set-logic HORN)" in text
    assert "(check-sat)" in text
    assert "declare-fun" not in text and "assert" not in text


def test_emit_transformed_system(transform_result):
    text = emit_horn(transform_result.system)
    assert text.count("(declare-fun") == 3
    assert text.count("(assert") == 8
    arities = {}
    for line in text.splitlines():
        if line.startswith("(declare-fun"):
            name = line.split()[1]
            arities[name] = line.count("Bool") + line.count("Int") - 1
    assert sorted(arities.values()) == [6, 9, 11]


def test_emit_single_fact():
    sys = parse_chc("p(X) :- X=0.")
    text = emit_horn(sys)
    assert text.count("(declare-fun") == 1
    assert text.count("(assert") == 1
    assert "forall" in text and "(= X 0)" in text


def test_emit_rejects_adt_variables(golden_clauses):
    with pytest.raises(SolverError):
        emit_horn(golden_clauses)


def test_emit_deterministic(transform_result):
    assert emit_horn(transform_result.system) == emit_horn(transform_result.system)


# ---------------------------------------------------------------------------
# invoke (fake subprocess solvers)
# ---------------------------------------------------------------------------

def test_invoke_sat_with_model(tmp_path):
    cfg = _fake_solver(tmp_path, 'echo sat\necho "(define-fun p ((A Int)) Bool (= A 0))"\n')
    res = invoke("(set-logic HORN)(check-sat)", cfg)
    assert res.status == "sat"
    model = parse_model(res.model_text())
    assert "p" in model


def test_invoke_unsat(tmp_path):
    cfg = _fake_solver(tmp_path, "echo unsat\n")
    assert invoke("x", cfg).status == "unsat"


def test_invoke_unknown(tmp_path):
    cfg = _fake_solver(tmp_path, "echo unknown\n")
    assert invoke("x", cfg).status == "unknown"


def test_invoke_error_on_garbage(tmp_path):
    cfg = _fake_solver(tmp_path, "echo whatever\nexit 3\n")
    assert invoke("x", cfg).status == "error"


def test_invoke_missing_executable():
    cfg = SolverConfig(("/nonexistent/solver-binary",), timeout=1.0)
    with pytest.raises(SolverError):
        invoke("x", cfg)


def test_invoke_timeout_enforced(tmp_path):
    cfg = _fake_solver(tmp_path, "sleep 30\n")
    cfg = SolverConfig(cfg.command, timeout=1.0)
    res = invoke("x", cfg)
    assert res.status == "timeout"
    assert res.elapsed < 2.0  # within a second of the requested limit


def test_invoke_hermetic(tmp_path):
    before = set(os.listdir(tempfile.gettempdir()))
    cfg = _fake_solver(tmp_path, "echo unsat\n")
    invoke("(check-sat)", cfg)
    after = set(os.listdir(tempfile.gettempdir()))
    assert not {f for f in after - before if f.endswith(".smt2")}


def test_solver_config_from_env(monkeypatch):
    monkeypatch.delenv("STRONGPOST_SOLVER", raising=False)
    assert SolverConfig.from_env() is None
    monkeypatch.setenv("STRONGPOST_SOLVER", "z3 fp.engine=spacer")
    cfg = SolverConfig.from_env(timeout=7.0)
    assert cfg.command == ("z3", "fp.engine=spacer")
    assert cfg.timeout == 7.0


# ---------------------------------------------------------------------------
# parse_model
# ---------------------------------------------------------------------------

def test_parse_fixture_model_shapes(transform_result, fixture_model):
    assert sorted(fixture_model) == ["new1", "new2", "new3"]
    m1 = fixture_model["new1"]
    A, B, C, D, E, F = [v.name for v in m1.params]
    # (~IsDef => (BR & Leq)) & (BL => (BR & (Hd>=N => Leq)))
    assert m1.body == And((
        Implies(Not(Var(C, BOOL)), And((Var(B, BOOL), Var(F, BOOL)))),
        Implies(Var(A, BOOL),
                And((Var(B, BOOL),
                     Implies(Cmp(">=", Var(D, INT), Var(E, INT)), Var(F, BOOL))))),
    ))
    m3 = fixture_model["new3"]
    p = [v.name for v in m3.params]
    # (BE & X>=J1) => K1
    assert m3.body == Implies(
        And((Var(p[3], BOOL), Cmp(">=", Var(p[0], INT), Var(p[9], INT)))),
        Var(p[10], BOOL))


def test_parse_model_trivial_true():
    model = parse_model("(define-fun q ((A Int)) Bool true)")
    assert model["q"].body == BoolConst(True)  # type: ignore[comparison-overlap]


def test_parse_model_inlines_lets():
    text = "(define-fun p ((A Int) (B Int)) Bool (let ((x (>= A B))) (and x x)))"
    model = parse_model(text)
    assert model["p"].body == And((Cmp(">=", Var("A", INT), Var("B", INT)),
                                   Cmp(">=", Var("A", INT), Var("B", INT))))


def test_parse_model_bad_text():
    with pytest.raises(ModelError):
        parse_model("(define-fun p ((A Int)) Bool (= A")


def test_format_model_round_trips(fixture_model, transform_result):
    text = format_model(fixture_model)
    again = parse_model(text, transform_result.system)
    assert {k: (v.params, v.body) for k, v in again.items()} == \
        {k: (v.params, v.body) for k, v in fixture_model.items()}


def test_atom_formula_arity_mismatch(fixture_model, transform_result):
    goal = transform_result.system.goals[0]
    atom = goal.body[0]
    with pytest.raises(ModelError):
        atom_formula(fixture_model, type(atom)(atom.pred, atom.args[:2]))


# ---------------------------------------------------------------------------
# check_model
# ---------------------------------------------------------------------------

def test_check_model_accepts_fixture(transform_result, fixture_model):
    res = check_model(transform_result.system, fixture_model, mode="bounded",
                      int_range=(-2, 2))
    assert res.ok and res.checked_assignments > 0


def test_check_model_rejects_mutation(transform_result, fixture_model):
    m1 = fixture_model["new1"]
    c1, c2 = m1.body.args
    weakened = And((c1, Implies(c2.left, c2.right.args[1])))  # drop the BR conjunct
    mutated = dict(fixture_model)
    mutated["new1"] = PredModel(m1.pred, m1.params, weakened)
    res = check_model(transform_result.system, mutated, mode="bounded",
                      int_range=(-4, 4))
    assert not res.ok
    assert [(f.kind, f.index) for f in res.failures] == [("goal", 0)]
    assert res.failures[0].env  # concrete witness valuation


def test_check_model_all_false_vs_fact():
    sys = parse_chc("p(X) :- X=0.")
    model = {"p": PredModel("p", (Var("A", INT),), BoolConst(False))}
    res = check_model(sys, model, mode="bounded", int_range=(-1, 1))
    assert not res.ok
    assert res.failures[0].kind == "clause"


def test_check_model_exact_needs_solver(transform_result, fixture_model, monkeypatch):
    monkeypatch.delenv("STRONGPOST_SOLVER", raising=False)
    with pytest.raises(SolverError):
        check_model(transform_result.system, fixture_model, mode="exact")


def test_sexpr_parser_comments_and_nesting():
    out = parse_sexprs("; note\n(a (b c) d)")
    assert out == [["a", ["b", "c"], "d"]]
