"""Clause IR, text format, and the bounded least-model oracle."""
from __future__ import annotations

import itertools

import pytest

from strongpost.chc_text import ChcParseError, parse_chc, parse_system, print_chc
from strongpost.ir import (
    BOOL, INT, Atom, BoolConst, Clause, Cmp, Ctor, IntConst, Iff, Not, Var,
    And, compile_constraint, eval_constraint, substitute,
)
from strongpost.lfp import (
    LfpBudgetError, bounded_lfp, check_goals, match_term, term_value,
    value_universe,
)

def _list_sort():
    sys = parse_chc("rev([],[]).")
    return sys.preds["rev"][0]


# ---------------------------------------------------------------------------
# parse / print
# ---------------------------------------------------------------------------

def test_parse_single_fact():
    sys = parse_chc("rev([],[]).")
    assert list(sys.preds) == ["rev"]
    assert len(sys.clauses) == 1 and not sys.goals
    c = sys.clauses[0]
    assert c.head is not None and c.head.pred == "rev"
    assert all(isinstance(t, Ctor) and t.name == "nil" for t in c.head.args)


def test_parse_empty_text_gives_empty_system():
    sys = parse_chc("")
    assert not sys.clauses and not sys.goals and not sys.preds
    assert print_chc(sys) == ""


def test_boolean_sugar_desugars_to_equalities():
    sys = parse_chc("false :- (BL & ~BR), rev(L,R), is_asorted(L,BL), is_dsorted(R,BR).")
    (g,) = sys.goals
    assert g.head is None
    # BL / ~BR turn into BL=true / BR=false in the IR
    assert eval_constraint(g.constraint, {"BL": True, "BR": False})
    assert not eval_constraint(g.constraint, {"BL": True, "BR": True})
    assert {a.pred for a in g.body} == {"rev", "is_asorted", "is_dsorted"}


def test_print_round_trip_on_reverse(golden_clauses):
    text = print_chc(golden_clauses)
    again = parse_chc(text)
    assert print_chc(again) == text
    assert {p: s for p, s in again.preds.items()} == dict(golden_clauses.preds)


def test_parse_reports_positions():
    with pytest.raises(ChcParseError) as e:
        parse_chc("rev([],[]")
    assert any(ch.isdigit() for ch in str(e.value))


def test_implication_binds_weaker_than_conjunction():
    sys = parse_chc("p(A,B,C) :- A & B => C.")
    c = sys.clauses[0].constraint
    # the whole constraint is one implication, not a conjunction
    assert not eval_constraint(c, {"A": True, "B": True, "C": False})
    assert eval_constraint(c, {"A": False, "B": True, "C": False})
    sys2 = parse_chc("p(A,B,C) :- A & (B => C).")
    c2 = sys2.clauses[0].constraint
    assert not eval_constraint(c2, {"A": False, "B": True, "C": False})


def test_comments_are_ignored():
    sys = parse_chc("// leading note\nrev([],[]). /* inline */\n")
    assert len(sys.clauses) == 1


def test_list_sugar_forms():
    sys = parse_chc("p([1,2],X) :- X=0.\nq([H|T]).")
    t = sys.clauses[0].head.args[0]
    assert isinstance(t, Ctor) and t.name == "cons"
    assert isinstance(t.args[0], IntConst) and t.args[0].value == 1


# ---------------------------------------------------------------------------
# substitution
# ---------------------------------------------------------------------------

def test_substitute_identity():
    sys = parse_chc("false :- rev(L,R).")
    g = sys.goals[0]
    assert substitute(g, {}) == g


def test_substitute_into_atom():
    sys = parse_chc("false :- rev(L,R).")
    g = sys.goals[0]
    out = substitute(g, {"L": Ctor("list", "nil", ())})
    assert out.body[0].args[0] == Ctor("list", "nil", ())
    assert out.body[0].args[1] == g.body[0].args[1]


def test_substitute_goal_with_cons(golden_clauses):
    gr = golden_clauses.goals[0]
    lsort = _list_sort()
    h, t = Var("H9", INT), Var("T9", lsort)
    out = substitute(gr, {"L": Ctor("list", "cons", (h, t))})
    rev_atoms = [a for a in out.body if a.pred == "rev"]
    assert rev_atoms[0].args[0] == Ctor("list", "cons", (h, t))
    # hand-expanded form: is_asorted also sees the new term
    asored = [a for a in out.body if a.pred == "is_asorted"]
    assert asored[0].args[0] == Ctor("list", "cons", (h, t))


# ---------------------------------------------------------------------------
# eval_constraint
# ---------------------------------------------------------------------------

def test_eval_leq():
    c = Cmp("=<", Var("X", INT), Var("Y", INT))
    assert eval_constraint(c, {"X": 1, "Y": 2})


def test_eval_step_constraint():
    sys = parse_chc("leq_all(N,[],B) :- B.\nleq_all(N,[X|Xs],B) :- B = (N=<X & B1), leq_all(N,Xs,B1).")
    c = sys.clauses[1].constraint
    assert eval_constraint(c, {"B": True, "N": 0, "X": 1, "B1": True})
    assert not eval_constraint(c, {"B": True, "N": 2, "X": 1, "B1": True})


def test_eval_hd_nil_constraint():
    sys = parse_chc("hd([],IsDef,Hd) :- ~IsDef & Hd=0.")
    c = sys.clauses[0].constraint
    assert eval_constraint(c, {"IsDef": False, "Hd": 0})
    assert not eval_constraint(c, {"IsDef": True, "Hd": 0})


def test_eval_unbound_variable_errors():
    c = Cmp("=<", Var("X", INT), Var("Y", INT))
    with pytest.raises(Exception):
        eval_constraint(c, {"X": 1})


def test_constraint_and_negation_disagree():
    c = Iff(Var("B", BOOL), And((Cmp("=<", Var("N", INT), Var("X", INT)),
                                 Var("B1", BOOL))))
    n = Not(c)
    for env in ({"B": b, "N": n_, "X": x, "B1": b1}
                for b in (False, True) for b1 in (False, True)
                for n_ in (-1, 0, 1) for x in (-1, 0, 1)):
        assert eval_constraint(c, env) != eval_constraint(n, env)


# ---------------------------------------------------------------------------
# bounded_lfp / check_goals
# ---------------------------------------------------------------------------

def _naive_lfp(sys, depth, int_range):
    """Reference consequence operator: enumerate every clause valuation."""
    universes = {}

    def univ(sort):
        if sort.name not in universes:
            universes[sort.name] = value_universe(sort, depth, int_range)
        return universes[sort.name]

    def in_universe(v, sort):
        return v in univ(sort)

    atoms = {p: set() for p in sys.preds}
    changed = True
    while changed:
        changed = False
        for c in sys.clauses:
            names = {}
            for a in c.body + (c.head,):
                for v in a.vars():
                    names[v.name] = v.sort
            from strongpost.ir import expr_vars
            for v in expr_vars(c.constraint):
                names.setdefault(v.name, v.sort)
            keys = sorted(names)
            check = compile_constraint(c.constraint)
            for combo in itertools.product(*(univ(names[k]) for k in keys)):
                env = dict(zip(keys, combo))
                if not check(env):
                    continue
                if not all(tuple(term_value(t, env) for t in a.args) in atoms[a.pred]
                           for a in c.body):
                    continue
                tup = tuple(term_value(t, env) for t in c.head.args)
                sig = sys.preds[c.head.pred]
                if all(in_universe(v, s) for v, s in zip(tup, sig)):
                    if tup not in atoms[c.head.pred]:
                        atoms[c.head.pred].add(tup)
                        changed = True
    return atoms


def test_lfp_single_fact():
    sys = parse_chc("rev([],[]).")
    res = bounded_lfp(sys, depth=2, int_range=(0, 1))
    assert res.atoms["rev"] == {((), ())}


def test_lfp_contains_reversal(golden_clauses):
    res = bounded_lfp(golden_clauses, depth=3, int_range=(0, 2))
    assert ((1, 2), (2, 1)) in res.atoms["rev"]


def test_lfp_sortedness_atoms(golden_clauses):
    res = bounded_lfp(golden_clauses, depth=3, int_range=(0, 2))
    assert ((1, 2), True) in res.atoms["is_asorted"]
    assert ((2, 1), False) in res.atoms["is_asorted"]


def test_lfp_agrees_with_naive_reference(golden_clauses):
    got = bounded_lfp(golden_clauses, depth=2, int_range=(0, 1))
    want = _naive_lfp(golden_clauses, 2, (0, 1))
    assert {p: s for p, s in got.atoms.items()} == want


def test_lfp_monotone_in_bounds(golden_clauses):
    small = bounded_lfp(golden_clauses, depth=2, int_range=(0, 1))
    big = bounded_lfp(golden_clauses, depth=3, int_range=(0, 2))
    for p, atoms in small.atoms.items():
        assert atoms <= big.atoms[p]


def test_lfp_budget_guard(golden_clauses):
    with pytest.raises(LfpBudgetError):
        bounded_lfp(golden_clauses, depth=6, int_range=(-8, 8), cap=10**4)


def test_lfp_deterministic(golden_clauses):
    a = bounded_lfp(golden_clauses, depth=2, int_range=(-1, 1))
    b = bounded_lfp(golden_clauses, depth=2, int_range=(-1, 1))
    assert a.atoms == b.atoms


def test_check_goals_clean_on_reverse(golden_clauses):
    assert check_goals(golden_clauses, depth=3, int_range=(0, 2)) == []


@pytest.mark.parametrize("depth,int_range", [(2, (-1, 1)), (3, (0, 2)), (4, (-2, 2))])
def test_check_goals_clean_at_multiple_bounds(golden_clauses, depth, int_range):
    assert check_goals(golden_clauses, depth=depth, int_range=int_range, cap=10**7) == []


def test_check_goals_flags_negated_goal(golden_clauses):
    # negate GS's constraint: a violated instance must exist
    sys = golden_clauses
    gs = sys.goals[1]
    bad = Clause(None, Not(gs.constraint), gs.body)
    from strongpost.ir import ChcSystem
    mutated = ChcSystem(dict(sys.adts), dict(sys.preds), list(sys.clauses),
                        [sys.goals[0], bad])
    vs = check_goals(mutated, depth=2, int_range=(0, 1))
    assert vs and all(v.goal_index == 1 for v in vs)


def test_check_goals_no_goals():
    sys = parse_chc("rev([],[]).")
    assert check_goals(sys, depth=2, int_range=(0, 1)) == []


def test_match_term_and_value_round_trip():
    lsort = _list_sort()
    pat = Ctor("list", "cons", (Var("H", INT), Var("T", lsort)))
    env = match_term(pat, (3, 1), {})
    assert env == {"H": 3, "T": (1,)}
    assert match_term(pat, (), {}) is None
    assert term_value(pat, env) == (3, 1)
