"""Structural equivalence of clause systems modulo renaming.

Two systems are matched up to: a bijection between predicate names, a
per-predicate permutation of argument slots, per-clause variable renaming,
clause and conjunct order, and constraint normalization (negation pushed
inward, `x = true/false` collapsed, chains of variable equalities inlined,
comparisons oriented canonically).  This is the comparison the golden tests
use: clause systems that print differently but denote the same constraints
must match.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from .ir import (
    BOOL, FALSE, INT, TRUE, Add, And, Atom, BoolConst, ChcSystem, Clause, Cmp, Ctor,
    Expr, Iff, Implies, IntConst, Ite, Mul, Not, Or, Sub, Term, Var, conj, conjuncts,
    subst_atom,
)

VarMap = Dict[str, str]


# ---------------------------------------------------------------------------
# constraint normalization
# ---------------------------------------------------------------------------

def _nnf(e: Expr, neg: bool = False) -> Expr:
    if isinstance(e, BoolConst):
        return BoolConst(e.value != neg)
    if isinstance(e, Var):
        return Not(e) if neg else e
    if isinstance(e, Not):
        return _nnf(e.arg, not neg)
    if isinstance(e, And):
        parts = tuple(_nnf(a, neg) for a in e.args)
        return Or(parts) if neg else And(parts)
    if isinstance(e, Or):
        parts = tuple(_nnf(a, neg) for a in e.args)
        return And(parts) if neg else Or(parts)
    if isinstance(e, Implies):
        if neg:  # ~(p => q)  ==  p & ~q
            return And((_nnf(e.left), _nnf(e.right, True)))
        return Implies(_nnf(e.left), _nnf(e.right))
    if isinstance(e, Iff):
        l, r = _nnf(e.left), _nnf(e.right)
        if isinstance(r, BoolConst):
            l, r = r, l
        if isinstance(l, BoolConst):
            out = r if l.value else _nnf(r, True)
            return _nnf(out, neg) if neg else out
        out = Iff(l, r)
        return Not(out) if neg else out
    if isinstance(e, Cmp):
        op, l, r = e.op, e.left, e.right
        if neg:
            op = {"=": "!=", "!=": "=", "=<": ">", ">": "=<", ">=": "<", "<": ">="}[op]
        if op in (">", ">="):  # orient less-than-wards
            op = {">": "<", ">=": "=<"}[op]
            l, r = r, l
        return Cmp(op, l, r)
    if isinstance(e, Ite):
        out2: Expr = Ite(_nnf(e.cond), _nnf(e.then), _nnf(e.other))
        return Not(out2) if neg else out2
    raise TypeError("cannot normalize %r" % (e,))


class _UnionFind:
    def __init__(self) -> None:
        self.parent: Dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass
class NormClause:
    head: Optional[Atom]
    body: Tuple[Atom, ...]
    conjs: Tuple[Expr, ...]


def normalize_clause(c: Clause) -> NormClause:
    """NNF the constraint, inline variable-equality conjuncts, dedupe."""
    parts = conjuncts(_nnf(c.constraint))
    uf = _UnionFind()
    consts: Dict[str, Term] = {}
    rest: List[Expr] = []
    for p in parts:  # unions first so const keys use final roots
        if isinstance(p, Cmp) and p.op == "=" and isinstance(p.left, Var) and isinstance(p.right, Var):
            uf.union(p.left.name, p.right.name)
        elif isinstance(p, Iff) and isinstance(p.left, Var) and isinstance(p.right, Var):
            uf.union(p.left.name, p.right.name)
        else:
            rest.append(p)
    for p in rest:
        if isinstance(p, Cmp) and p.op == "=" and isinstance(p.left, Var) and isinstance(p.right, IntConst):
            consts.setdefault(uf.find(p.left.name), p.right)
        elif isinstance(p, Cmp) and p.op == "=" and isinstance(p.right, Var) and isinstance(p.left, IntConst):
            consts.setdefault(uf.find(p.right.name), p.left)

    def rep(v: Var) -> Term:
        r = uf.find(v.name)
        got = consts.get(r)
        if got is not None:
            return got
        return Var(r, v.sort)

    def sub_expr(e: Expr) -> Expr:
        if isinstance(e, Var):
            r = rep(e)
            return r  # type: ignore[return-value]
        if isinstance(e, (IntConst, BoolConst)):
            return e
        if isinstance(e, Add):
            return Add(sub_expr(e.left), sub_expr(e.right))
        if isinstance(e, Sub):
            return Sub(sub_expr(e.left), sub_expr(e.right))
        if isinstance(e, Mul):
            return Mul(e.coeff, sub_expr(e.arg))
        if isinstance(e, Cmp):
            return Cmp(e.op, sub_expr(e.left), sub_expr(e.right))
        if isinstance(e, Not):
            return Not(sub_expr(e.arg))
        if isinstance(e, And):
            return And(tuple(sub_expr(a) for a in e.args))
        if isinstance(e, Or):
            return Or(tuple(sub_expr(a) for a in e.args))
        if isinstance(e, Implies):
            return Implies(sub_expr(e.left), sub_expr(e.right))
        if isinstance(e, Iff):
            return Iff(sub_expr(e.left), sub_expr(e.right))
        if isinstance(e, Ite):
            return Ite(sub_expr(e.cond), sub_expr(e.then), sub_expr(e.other))
        raise TypeError("cannot substitute in %r" % (e,))

    out: List[Expr] = []
    seen: Set[str] = set()
    for p in rest:
        q = sub_expr(p)
        if isinstance(q, Cmp) and q.op == "=" and q.left == q.right:
            continue
        if isinstance(q, BoolConst) and q.value:
            continue
        key = repr(q)
        if key in seen:
            continue
        seen.add(key)
        out.append(q)
    head = None
    if c.head is not None:
        head = Atom(c.head.pred, tuple(_apply_names(t, uf, consts) for t in c.head.args))
    body = tuple(Atom(a.pred, tuple(_apply_names(t, uf, consts) for t in a.args)) for a in c.body)
    return NormClause(head, body, tuple(out))


def _apply_names(t: Term, uf: _UnionFind, consts: Dict[str, Term]) -> Term:
    if isinstance(t, Var):
        r = uf.find(t.name)
        got = consts.get(r)
        if got is not None:
            return got
        return Var(r, t.sort)
    if isinstance(t, Ctor):
        return Ctor(t.adt, t.name, tuple(_apply_names(a, uf, consts) for a in t.args))
    return t


# ---------------------------------------------------------------------------
# matching state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchState:
    pred_map: Dict[str, str]
    flexible: frozenset
    perms: Dict[str, Dict[int, int]]

    def with_perm(self, pred: str, i: int, j: int) -> "MatchState":
        perms = {p: dict(m) for p, m in self.perms.items()}
        perms.setdefault(pred, {})[i] = j
        return MatchState(self.pred_map, self.flexible, perms)


def _match_var(n1: str, n2: str, vm: VarMap, rv: VarMap) -> Optional[Tuple[VarMap, VarMap]]:
    if n1 in vm:
        return (vm, rv) if vm[n1] == n2 else None
    if n2 in rv:
        return None
    vm2, rv2 = dict(vm), dict(rv)
    vm2[n1] = n2
    rv2[n2] = n1
    return vm2, rv2


def _match_term(t1: Term, t2: Term, vm: VarMap, rv: VarMap) -> Optional[Tuple[VarMap, VarMap]]:
    if isinstance(t1, Var) and isinstance(t2, Var):
        if t1.sort.is_basic() and t2.sort.is_basic() and t1.sort != t2.sort:
            return None
        return _match_var(t1.name, t2.name, vm, rv)
    if isinstance(t1, IntConst) and isinstance(t2, IntConst):
        return (vm, rv) if t1.value == t2.value else None
    if isinstance(t1, BoolConst) and isinstance(t2, BoolConst):
        return (vm, rv) if t1.value == t2.value else None
    if isinstance(t1, Ctor) and isinstance(t2, Ctor) and t1.name == t2.name:
        for a1, a2 in zip(t1.args, t2.args):
            got = _match_term(a1, a2, vm, rv)
            if got is None:
                return None
            vm, rv = got
        return vm, rv
    return None


def _match_expr(e1: Expr, e2: Expr, vm: VarMap, rv: VarMap) -> Iterator[Tuple[VarMap, VarMap]]:
    if isinstance(e1, Var) and isinstance(e2, Var):
        got = _match_var(e1.name, e2.name, vm, rv)
        if got:
            yield got
        return
    if isinstance(e1, (IntConst, BoolConst)) or isinstance(e2, (IntConst, BoolConst)):
        got = _match_term(e1, e2, vm, rv) if type(e1) == type(e2) else None
        if got:
            yield got
        return
    if isinstance(e1, Not) and isinstance(e2, Not):
        yield from _match_expr(e1.arg, e2.arg, vm, rv)
        return
    if isinstance(e1, And) and isinstance(e2, And):
        yield from _match_multiset(list(e1.args), list(e2.args), vm, rv)
        return
    if isinstance(e1, Or) and isinstance(e2, Or):
        yield from _match_multiset(list(e1.args), list(e2.args), vm, rv)
        return
    if isinstance(e1, Implies) and isinstance(e2, Implies):
        for vm1, rv1 in _match_expr(e1.left, e2.left, vm, rv):
            yield from _match_expr(e1.right, e2.right, vm1, rv1)
        return
    if isinstance(e1, Iff) and isinstance(e2, Iff):
        for l1, r1 in ((e1.left, e1.right), (e1.right, e1.left)):
            for vm1, rv1 in _match_expr(l1, e2.left, vm, rv):
                yield from _match_expr(r1, e2.right, vm1, rv1)
        return
    if isinstance(e1, Cmp) and isinstance(e2, Cmp):
        if e1.op != e2.op:
            return
        pairs = [((e1.left, e1.right),)]
        if e1.op in ("=", "!="):
            pairs = [((e1.left, e1.right),), ((e1.right, e1.left),)]
        for ((l1, r1),) in pairs:
            for vm1, rv1 in _match_expr(l1, e2.left, vm, rv):
                yield from _match_expr(r1, e2.right, vm1, rv1)
        return
    if isinstance(e1, Add) and isinstance(e2, Add):
        for ((l1, r1)) in ((e1.left, e1.right), (e1.right, e1.left)):
            for vm1, rv1 in _match_expr(l1, e2.left, vm, rv):
                yield from _match_expr(r1, e2.right, vm1, rv1)
        return
    if isinstance(e1, Sub) and isinstance(e2, Sub):
        for vm1, rv1 in _match_expr(e1.left, e2.left, vm, rv):
            yield from _match_expr(e1.right, e2.right, vm1, rv1)
        return
    if isinstance(e1, Mul) and isinstance(e2, Mul) and e1.coeff == e2.coeff:
        yield from _match_expr(e1.arg, e2.arg, vm, rv)
        return
    if isinstance(e1, Ite) and isinstance(e2, Ite):
        for vm1, rv1 in _match_expr(e1.cond, e2.cond, vm, rv):
            for vm2, rv2 in _match_expr(e1.then, e2.then, vm1, rv1):
                yield from _match_expr(e1.other, e2.other, vm2, rv2)
        return


def _match_multiset(xs: List[Expr], ys: List[Expr], vm: VarMap, rv: VarMap) -> Iterator[Tuple[VarMap, VarMap]]:
    if len(xs) != len(ys):
        return
    if not xs:
        yield vm, rv
        return
    x = xs[0]
    for k, y in enumerate(ys):
        for vm1, rv1 in _match_expr(x, y, vm, rv):
            yield from _match_multiset(xs[1:], ys[:k] + ys[k + 1:], vm1, rv1)


def _match_atom(a1: Atom, a2: Atom, st: MatchState, vm: VarMap, rv: VarMap
                ) -> Iterator[Tuple[MatchState, VarMap, VarMap]]:
    if st.pred_map.get(a1.pred) != a2.pred or len(a1.args) != len(a2.args):
        return
    if a1.pred not in st.flexible:
        state = (st, vm, rv)
        for t1, t2 in zip(a1.args, a2.args):
            got = _match_term(t1, t2, state[1], state[2])
            if got is None:
                return
            state = (st, got[0], got[1])
        yield state
        return

    def go(i: int, st2: MatchState, vm2: VarMap, rv2: VarMap, used: frozenset
           ) -> Iterator[Tuple[MatchState, VarMap, VarMap]]:
        if i == len(a1.args):
            yield st2, vm2, rv2
            return
        perm = st2.perms.get(a1.pred, {})
        targets = [perm[i]] if i in perm else [j for j in range(len(a2.args))
                                               if j not in perm.values()]
        for j in targets:
            if j in used:
                continue
            got = _match_term(a1.args[i], a2.args[j], vm2, rv2)
            if got is None:
                continue
            st3 = st2 if i in perm else st2.with_perm(a1.pred, i, j)
            yield from go(i + 1, st3, got[0], got[1], used | {j})

    yield from go(0, st, vm, rv, frozenset())


def _match_atoms(xs: Sequence[Atom], ys: Sequence[Atom], st: MatchState, vm: VarMap,
                 rv: VarMap) -> Iterator[Tuple[MatchState, VarMap, VarMap]]:
    if len(xs) != len(ys):
        return
    if not xs:
        yield st, vm, rv
        return
    x = xs[0]
    for k, y in enumerate(ys):
        for st1, vm1, rv1 in _match_atom(x, y, st, vm, rv):
            yield from _match_atoms(xs[1:], list(ys[:k]) + list(ys[k + 1:]), st1, vm1, rv1)


def match_clause(c1: Clause, c2: Clause, st: MatchState) -> Iterator[MatchState]:
    n1, n2 = normalize_clause(c1), normalize_clause(c2)
    if (n1.head is None) != (n2.head is None):
        return
    if len(n1.body) != len(n2.body) or len(n1.conjs) != len(n2.conjs):
        return
    # conjuncts first: they pin most variable correspondences, making the
    # slot-permutation search on atoms nearly deterministic
    for vm1, rv1 in _match_multiset(list(n1.conjs), list(n2.conjs), {}, {}):
        for st2, vm2, rv2 in _match_atoms(n1.body, n2.body, st, vm1, rv1):
            if n1.head is not None:
                for st3, _vm3, _rv3 in _match_atom(n1.head, n2.head, st2, vm2, rv2):
                    yield st3
            else:
                yield st2


# ---------------------------------------------------------------------------
# system matching
# ---------------------------------------------------------------------------

def _clause_groups(sys: ChcSystem) -> Dict[str, List[Clause]]:
    out: Dict[str, List[Clause]] = {}
    for c in sys.clauses:
        assert c.head is not None
        out.setdefault(c.head.pred, []).append(c)
    return out


def match_systems(s1: ChcSystem, s2: ChcSystem,
                  fixed: Optional[Dict[str, str]] = None) -> Optional[MatchState]:
    """A full correspondence between two systems, or None.

    `fixed` pins predicate pairs (identity slots); remaining predicates are
    matched by a searched bijection with searched slot permutations.
    """
    fixed = dict(fixed or {})
    if len(s1.clauses) != len(s2.clauses) or len(s1.goals) != len(s2.goals):
        return None
    g1, g2 = _clause_groups(s1), _clause_groups(s2)
    free1 = [p for p in s1.preds if p not in fixed]
    used2 = set(fixed.values())

    def invariant(sys: ChcSystem, groups: Dict[str, List[Clause]], p: str) -> Tuple[int, int]:
        return (len(sys.preds[p]), len(groups.get(p, [])))

    def assign(i: int, pred_map: Dict[str, str], taken: Set[str]) -> Iterator[Dict[str, str]]:
        if i == len(free1):
            yield dict(pred_map)
            return
        p1 = free1[i]
        for p2 in s2.preds:
            if p2 in taken:
                continue
            if invariant(s1, g1, p1) != invariant(s2, g2, p2):
                continue
            pred_map[p1] = p2
            taken.add(p2)
            yield from assign(i + 1, pred_map, taken)
            del pred_map[p1]
            taken.discard(p2)

    def match_all(st: MatchState) -> Optional[MatchState]:
        def go(cls1: List[Clause], cls2: List[Clause], st2: MatchState,
               goals: bool) -> Iterator[MatchState]:
            if not cls1:
                yield st2
                return
            c1 = cls1[0]
            for k, c2 in enumerate(cls2):
                if not goals:
                    assert c1.head is not None and c2.head is not None
                    if st2.pred_map.get(c1.head.pred) != c2.head.pred:
                        continue
                for st3 in match_clause(c1, c2, st2):
                    yield from go(cls1[1:], cls2[:k] + cls2[k + 1:], st3, goals)

        for st2 in go(list(s1.clauses), list(s2.clauses), st, False):
            for st3 in go(list(s1.goals), list(s2.goals), st2, True):
                return st3
        return None

    for pm in assign(0, dict(fixed), set(used2)):
        flexible = frozenset(p for p in pm if p not in fixed)
        got = match_all(MatchState(pm, flexible, {}))
        if got is not None:
            return got
    return None


def clauses_alpha_equivalent(c1: Clause, c2: Clause,
                             flexible: Sequence[str] = ()) -> Optional[MatchState]:
    """Match two single clauses; predicate names map identically except those
    listed in `flexible`, which may permute slots (head-to-head)."""
    preds1 = {a.pred for a in (c1.body + ((c1.head,) if c1.head else ()))}
    preds2 = {a.pred for a in (c2.body + ((c2.head,) if c2.head else ()))}
    pm = {p: p for p in preds1 if p not in flexible}
    if len(flexible) == 0:
        if preds1 != preds2:
            return None
        st = MatchState(pm, frozenset(), {})
    else:
        flex1 = [p for p in preds1 if p in flexible]
        flex2 = [p for p in preds2 if p not in pm.values()]
        if len(flex1) != 1 or len(flex2) != 1:
            return None
        pm[flex1[0]] = flex2[0]
        st = MatchState(pm, frozenset(flex1), {})
    for got in match_clause(c1, c2, st):
        return got
    return None
