"""Definition introduction, unfold/fold, generalization, and the driver."""
from __future__ import annotations

import pathlib

import pytest

from strongpost.cata import recognize_all
from strongpost.chc_text import format_clause, parse_chc, print_chc
from strongpost.ir import ChcSystem, Ctor, Var
from strongpost.match import clauses_alpha_equivalent, match_systems
from strongpost.transform import (
    Definition, TransformError, fold, generalize, introduce_definition,
    read_bundle, t_cata, trace_systems, unfold, write_bundle,
)

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def _defs_fixture(context: str):
    text = (FIXTURES / "reverse_definitions.chc").read_text()
    sys = parse_chc(context + text)
    return {c.head.pred: c for c in sys.clauses if c.head.pred.startswith("new")}


# ---------------------------------------------------------------------------
# unfold
# ---------------------------------------------------------------------------

def test_unfold_goal_at_rev(golden_clauses):
    gr = golden_clauses.goals[0]
    idx = next(i for i, a in enumerate(gr.body) if a.pred == "rev")
    out = unfold(golden_clauses, gr, idx)
    assert len(out) == 2
    nil_case = [c for c in out if not any(a.pred == "rev" for a in c.body)]
    cons_case = [c for c in out if any(a.pred == "rev" for a in c.body)]
    assert len(nil_case) == 1 and len(cons_case) == 1
    assert any(a.pred == "snoc" for a in cons_case[0].body)


def test_unfold_no_clauses_empty(golden_clauses):
    sys = parse_chc("false :- p(X).\n")
    g = sys.goals[0]
    assert unfold(sys, g, 0) == []


def test_unfold_leq_all_nil(golden_clauses):
    sys = parse_chc("leq_all(N,[],B) :- B.\nleq_all(N,[X|Xs],B) :- B = (N=<X & B1), leq_all(N,Xs,B1).\nfalse :- N>0, leq_all(N,[],B).")
    g = sys.goals[0]
    out = unfold(sys, g, 0)
    assert len(out) == 1 and not out[0].body  # only the nil clause unifies
    from strongpost.ir import eval_constraint
    # B=true got conjoined onto the goal constraint
    assert eval_constraint(out[0].constraint, {"B": True, "N": 1})
    assert not eval_constraint(out[0].constraint, {"B": False, "N": 1})


def test_unfold_bad_index(golden_clauses):
    gr = golden_clauses.goals[0]
    with pytest.raises(IndexError):
        unfold(golden_clauses, gr, 99)


# ---------------------------------------------------------------------------
# introduce_definition / fold
# ---------------------------------------------------------------------------

def test_introduce_definition_head_covers_basic_vars(golden_clauses):
    gr = golden_clauses.goals[0]
    subject = next(a for a in gr.body if a.pred == "rev")
    catas = [a for a in gr.body if a.pred != "rev"]
    d = introduce_definition("newX", subject, catas)
    head_names = {v.name for v in d.head_vars}
    assert head_names == {"BL", "BR"}
    basic_body = {v.name for a in d.body for v in a.vars() if v.sort.is_basic()}
    assert head_names == basic_body


def test_definition_heads_cover_basic_vars_in_driver(transform_result):
    for d in transform_result.definitions.values():
        head_names = [v.name for v in d.head_vars]
        body_basic = {v.name for a in d.body for v in a.vars() if v.sort.is_basic()}
        assert set(head_names) == body_basic
        adt_in_head = [v for v in d.head_vars if not v.sort.is_basic()]
        assert not adt_in_head


def test_driver_definitions_match_committed_bodies(transform_result, golden_clauses):
    context = (FIXTURES / "reverse_clauses.chc").read_text()
    gold = _defs_fixture(context)
    d_goal = transform_result.definitions["new1"].as_clause()
    d_wide = transform_result.definitions["new3"].as_clause()
    assert clauses_alpha_equivalent(d_goal, gold["new3"], flexible=("new1", "new3"))
    assert clauses_alpha_equivalent(d_wide, gold["new7"], flexible=("new3", "new7"))


def _saturate(clause, extra_text, context):
    """Add the definition's extra catamorphism atoms to a goal body by hand.

    fold is pure matching; the driver materializes total-catamorphism atoms
    before folding, so the test mirrors that step explicitly.
    """
    sys = parse_chc(context + extra_text)
    extra = sys.goals[-1].body
    from strongpost.ir import Clause
    return Clause(clause.head, clause.constraint, clause.body + extra)


def test_fold_goal_with_driver_definition(transform_result, golden_clauses):
    catas, _ = recognize_all(golden_clauses)
    context = (FIXTURES / "reverse_clauses.chc").read_text()
    gr = _saturate(golden_clauses.goals[0],
                   "false :- hd(L,IsDef,Hd), leq_all(N,R,B2).", context)
    folded = fold(gr, transform_result.definitions["new1"], catas)
    assert folded is not None
    assert [a.pred for a in folded.body] == ["new1"]
    got = transform_result.system.goals[0]
    assert clauses_alpha_equivalent(folded, got)


def test_fold_gs_with_snoc_definition(transform_result, golden_clauses):
    catas, _ = recognize_all(golden_clauses)
    context = (FIXTURES / "reverse_clauses.chc").read_text()
    gs = _saturate(golden_clauses.goals[1],
                   "false :- hd(A,I1,H1), hd(C,I2,H2).", context)
    folded = fold(gs, transform_result.definitions["new2"], catas)
    assert folded is not None
    assert [a.pred for a in folded.body] == ["new2"]
    assert clauses_alpha_equivalent(folded, transform_result.system.goals[1])


def test_fold_unrelated_definition_no_match(transform_result, golden_clauses):
    catas, _ = recognize_all(golden_clauses)
    gs = golden_clauses.goals[1]  # subject snoc, definition subject rev
    assert fold(gs, transform_result.definitions["new1"], catas) is None


# ---------------------------------------------------------------------------
# generalize
# ---------------------------------------------------------------------------

def test_generalize_subsumes_constrained_variant(transform_result):
    base = transform_result.definitions["new2"]
    wide = transform_result.definitions["new3"]
    again = generalize(base, wide, "newZ")
    assert {a.pred for a in again.body} == {a.pred for a in wide.body}
    assert len(again.head_vars) == len(wide.head_vars)


def test_generalize_identity_on_same_skeleton(transform_result):
    d = transform_result.definitions["new1"]
    out = generalize(d, d, "newZ")
    assert [a.pred for a in out.body] == [a.pred for a in d.body]
    assert len(out.head_vars) == len(d.head_vars)


def test_generalize_different_subjects_incomparable(transform_result):
    with pytest.raises(TransformError):
        generalize(transform_result.definitions["new1"],
                   transform_result.definitions["new2"], "newZ")


# ---------------------------------------------------------------------------
# t_cata driver
# ---------------------------------------------------------------------------

def test_output_is_basic_sorted(transform_result):
    for c in transform_result.system.clauses + transform_result.system.goals:
        for a in c.body + ((c.head,) if c.head else ()):
            for t in a.args:
                assert isinstance(t, Var) and t.sort.is_basic()


def test_output_shape_against_fixture(transform_result, golden_transformed):
    st = match_systems(transform_result.system, golden_transformed)
    assert st is not None
    assert st.pred_map == {"new1": "new3", "new2": "new2", "new3": "new7"}


def test_eight_output_clauses(transform_result):
    assert len(transform_result.system.clauses) == 6
    assert len(transform_result.system.goals) == 2
    assert transform_result.statistics["emitted_clauses"] == 6
    assert transform_result.statistics["folded_goals"] == 2


def test_goal_correspondence(transform_result):
    assert transform_result.goal_defs == {0: "new1", 1: "new2"}


def test_identity_on_basic_goals():
    sys = parse_chc("p(X) :- X=0.\nfalse :- X>0, p(X).\n")
    r = t_cata(sys)
    assert not r.definitions
    assert print_chc(r.system) == print_chc(sys)
    assert all(v == 0 for v in r.statistics.values())


def test_gr_only_two_surviving_definitions(golden_clauses):
    gr_only = ChcSystem(dict(golden_clauses.adts), dict(golden_clauses.preds),
                        list(golden_clauses.clauses), [golden_clauses.goals[0]])
    r = t_cata(gr_only)
    emitted = {c.head.pred for c in r.system.clauses}
    assert len(emitted) == 2
    subjects = {r.definitions[n].subject_pred for n in emitted}
    assert subjects == {"rev", "snoc"}


def test_non_catamorphism_goal_rejected():
    sys = parse_chc(
        "rev([],[]).\nrev([H|T],R) :- rev(T,S), snoc(S,H,R).\n"
        "snoc([],X,[X]).\nsnoc([X|Xs],Y,[X|Zs]) :- snoc(Xs,Y,Zs).\n"
        "false :- rev(L,R), snoc(L,X,R2).\n")
    with pytest.raises(TransformError):
        t_cata(sys)


def test_deterministic(golden_clauses):
    r1 = t_cata(golden_clauses)
    r2 = t_cata(golden_clauses)
    assert print_chc(r1.system) == print_chc(r2.system)
    assert r1.statistics == r2.statistics


def test_budget_guard(golden_clauses):
    with pytest.raises(TransformError):
        t_cata(golden_clauses, budget=1)


# ---------------------------------------------------------------------------
# bundle serialization
# ---------------------------------------------------------------------------

def test_bundle_round_trip(transform_result, golden_clauses):
    text = write_bundle(transform_result)
    again = read_bundle(text, context=print_chc(golden_clauses))
    assert print_chc(again.system) == print_chc(transform_result.system)
    assert sorted(again.definitions) == sorted(transform_result.definitions)
    for name, d in transform_result.definitions.items():
        d2 = again.definitions[name]
        assert d2.subject_pred == d.subject_pred
        assert d2.extends == d.extends
        assert [v.name for v in d2.head_vars] == [v.name for v in d.head_vars]
        assert format_clause(d2.as_clause()) == format_clause(d.as_clause())
    assert again.goal_defs == transform_result.goal_defs
    assert again.statistics == transform_result.statistics


def test_bundle_requires_clause_section():
    with pytest.raises(TransformError):
        read_bundle("[definitions]\n")


# ---------------------------------------------------------------------------
# trace replay scaffolding
# ---------------------------------------------------------------------------

def test_trace_systems_labels(transform_result, golden_clauses):
    steps = trace_systems(golden_clauses, transform_result)
    assert steps[0][0] == "input"
    assert len(steps) >= 3
    # each staged system parses/validates and keeps the original clauses
    for _, sys in steps:
        assert len(sys.clauses) >= len(golden_clauses.clauses)
