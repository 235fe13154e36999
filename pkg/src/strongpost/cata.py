"""Recognition of list catamorphisms among the predicates of a clause system.

A predicate fits the shape when its clauses are exactly

    h(X..., [], Res...)    :- base_constraint.
    h(X..., [H|T], Res...) :- step_constraint, aux(..., T, ...), h(X..., T, R...).

where X... are basic-sorted extra arguments repeated unchanged in the
recursive call, Res... are basic-sorted result slots, the optional aux atom
applies another predicate to the tail, and the recursive atom may be absent
(a degenerate fold such as a head probe).  Predicates whose non-scrutinee
slots include an ADT sort are rejected: they compute lists, not summaries.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .ir import (
    BOOL, INT, LIST_SORT, Atom, ChcSystem, Clause, Ctor, Expr, Sort, Var,
    compile_constraint, expr_vars,
)


class NotACatamorphism(Exception):
    def __init__(self, pred: str, reason: str, message: str):
        super().__init__("%s: %s" % (pred, message))
        self.pred = pred
        self.reason = reason
        self.message = message


def _reject(pred: str, reason: str, message: str) -> NotACatamorphism:
    return NotACatamorphism(pred, reason, message)


@dataclass
class CatamorphismInfo:
    pred: str
    list_pos: int
    extra_pos: Tuple[int, ...]
    result_pos: Tuple[int, ...]
    nil_clause: Clause
    cons_clause: Clause
    rec_index: Optional[int]   # index of the recursive atom in cons_clause.body
    aux_index: Optional[int]   # index of the helper atom, if any
    aux_pred: Optional[str]

    @property
    def base_constraint(self) -> Expr:
        return self.nil_clause.constraint

    @property
    def step_constraint(self) -> Expr:
        return self.cons_clause.constraint

    def arity(self) -> int:
        return len(self.extra_pos) + len(self.result_pos) + 1


def recognize(system: ChcSystem, pred: str) -> CatamorphismInfo:
    """Return the schema of pred or raise NotACatamorphism with a reason slug."""
    if pred not in system.preds:
        raise _reject(pred, "unknown-predicate", "not declared in the system")
    sig = system.preds[pred]
    clauses = system.clauses_of(pred)
    if len(clauses) != 2:
        raise _reject(pred, "clause-count", "needs exactly two defining clauses, has %d" % len(clauses))

    def head_arg(c: Clause, i: int):
        assert c.head is not None
        return c.head.args[i]

    # the scrutinee is the unique position that is [] in one clause, [_|_] in the other
    cands = []
    for i in range(len(sig)):
        pair = {("nil" if (isinstance(head_arg(c, i), Ctor) and head_arg(c, i).name == "nil") else
                 "cons" if isinstance(head_arg(c, i), Ctor) else "var") for c in clauses}
        if pair == {"nil", "cons"}:
            cands.append(i)
    if not cands:
        raise _reject(pred, "no-scrutinee", "no argument is matched against both [] and [_|_]")
    if len(cands) > 1:
        raise _reject(pred, "multiple-scrutinees", "several arguments look like scrutinees")
    p = cands[0]

    # ADT-sorted slots beside the scrutinee mean the predicate builds lists
    for i, s in enumerate(sig):
        if i != p and not s.is_basic():
            raise _reject(pred, "adt-result", "ADT-sorted result (argument %d has sort %s)" % (i + 1, s))

    nil_clause = next(c for c in clauses if isinstance(head_arg(c, p), Ctor) and head_arg(c, p).name == "nil")
    cons_clause = next(c for c in clauses if c is not nil_clause)
    cons_pat = head_arg(cons_clause, p)
    assert isinstance(cons_pat, Ctor)
    if not all(isinstance(a, Var) for a in cons_pat.args):
        raise _reject(pred, "head-pattern", "cons pattern must bind plain variables")

    for c in (nil_clause, cons_clause):
        others = [head_arg(c, i) for i in range(len(sig)) if i != p]
        if not all(isinstance(a, Var) for a in others):
            raise _reject(pred, "head-pattern", "non-scrutinee head arguments must be variables")
        if len({a.name for a in others}) != len(others):  # type: ignore[union-attr]
            raise _reject(pred, "head-pattern", "non-scrutinee head arguments must be distinct")

    if nil_clause.body:
        raise _reject(pred, "base-atoms", "the [] clause may not call anything")

    tail = cons_pat.args[1]
    assert isinstance(tail, Var)
    rec_index: Optional[int] = None
    aux_index: Optional[int] = None
    for idx, a in enumerate(cons_clause.body):
        if a.pred == pred:
            if rec_index is not None:
                raise _reject(pred, "rec-shape", "more than one recursive call")
            rec_index = idx
        else:
            if aux_index is not None:
                raise _reject(pred, "step-atoms", "more than one helper call")
            aux_index = idx

    extra: List[int] = []
    results: List[int] = []
    if rec_index is not None:
        rec = cons_clause.body[rec_index]
        if len(rec.args) != len(sig):
            raise _reject(pred, "rec-shape", "recursive call has the wrong arity")
        if rec.args[p] != tail:
            raise _reject(pred, "rec-shape", "recursive call must be on the tail")
        for i in range(len(sig)):
            if i == p:
                continue
            if rec.args[i] == head_arg(cons_clause, i):
                extra.append(i)
            else:
                if not isinstance(rec.args[i], Var):
                    raise _reject(pred, "rec-shape", "recursive result slots must be variables")
                results.append(i)
    else:
        results = [i for i in range(len(sig)) if i != p]

    if aux_index is not None:
        aux = cons_clause.body[aux_index]
        if tail not in aux.args:
            raise _reject(pred, "aux-shape", "helper call must take the tail")
        aux_pred: Optional[str] = aux.pred
    else:
        aux_pred = None

    # extra args of the nil clause must agree positionally with the cons clause
    return CatamorphismInfo(pred, p, tuple(extra), tuple(results),
                            nil_clause, cons_clause, rec_index, aux_index, aux_pred)


def recognize_all(system: ChcSystem) -> Tuple[Dict[str, CatamorphismInfo], Dict[str, NotACatamorphism]]:
    """Classify every predicate; helper references must themselves be recognized."""
    infos: Dict[str, CatamorphismInfo] = {}
    rejected: Dict[str, NotACatamorphism] = {}
    for pred in system.preds:
        try:
            infos[pred] = recognize(system, pred)
        except NotACatamorphism as e:
            rejected[pred] = e
    # drop recognitions whose helper is not itself a catamorphism
    changed = True
    while changed:
        changed = False
        for pred, info in list(infos.items()):
            if info.aux_pred is not None and info.aux_pred not in infos:
                rejected[pred] = _reject(pred, "aux-not-catamorphism",
                                         "helper %s is not a catamorphism" % info.aux_pred)
                del infos[pred]
                changed = True
    return infos, rejected


# ---------------------------------------------------------------------------
# bounded totality: each case constraint determines the result slots uniquely
# ---------------------------------------------------------------------------

@dataclass
class TotalityReport:
    pred: str
    total: bool
    failure_env: Optional[Dict[str, object]] = None
    failure_count: int = 0
    case: str = ""


def _basic_universe(sort: Sort, int_range: Tuple[int, int]) -> List[object]:
    if sort == BOOL:
        return [False, True]
    lo, hi = int_range
    return list(range(lo, hi + 1))


def totality_check(system: ChcSystem, info: CatamorphismInfo,
                   int_range: Tuple[int, int] = (-4, 4)) -> TotalityReport:
    """Check each constraint admits exactly one result valuation per input valuation.

    Inputs of the step case include the cons head, helper results and
    recursive results, swept over the whole bounded window.
    """
    sig = system.preds[info.pred]

    def split_case(clause: Clause, input_vars: List[Var], result_vars: List[Var], case: str) -> Optional[TotalityReport]:
        check = compile_constraint(clause.constraint)
        in_doms = [_basic_universe(v.sort, int_range) for v in input_vars]
        res_doms = [_basic_universe(v.sort, int_range) for v in result_vars]
        for combo in itertools.product(*in_doms):
            env = {v.name: val for v, val in zip(input_vars, combo)}
            count = 0
            for rcombo in itertools.product(*res_doms):
                env2 = dict(env)
                env2.update({v.name: val for v, val in zip(result_vars, rcombo)})
                if check(env2):
                    count += 1
                    if count > 1:
                        break
            if count != 1:
                return TotalityReport(info.pred, False, env, count, case)
        return None

    nil_head = info.nil_clause.head
    assert nil_head is not None
    nil_results = [nil_head.args[i] for i in info.result_pos]
    nil_inputs = [nil_head.args[i] for i in info.extra_pos]
    bad = split_case(info.nil_clause, nil_inputs, nil_results, "base")  # type: ignore[arg-type]
    if bad:
        return bad

    cons_head = info.cons_clause.head
    assert cons_head is not None
    pat = cons_head.args[info.list_pos]
    assert isinstance(pat, Ctor)
    inputs: List[Var] = [cons_head.args[i] for i in info.extra_pos]  # type: ignore[misc]
    inputs.append(pat.args[0])  # type: ignore[arg-type]
    for idx in (info.aux_index, info.rec_index):
        if idx is not None:
            for a in info.cons_clause.body[idx].args:
                if isinstance(a, Var) and a.sort.is_basic() and a not in inputs:
                    inputs.append(a)
    results = [cons_head.args[i] for i in info.result_pos]
    inputs = [v for v in inputs if v not in results]
    bad = split_case(info.cons_clause, inputs, results, "step")  # type: ignore[arg-type]
    if bad:
        return bad
    return TotalityReport(info.pred, True)
