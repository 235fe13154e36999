"""Bounded least-fixpoint evaluation of clause systems.

This is the solver-independent semantics used everywhere as an oracle: ground
the system over a finite universe (integers in a window, lists up to a depth
bound) and compute the least model of the definite clauses bottom-up.  A goal
clause is violated when its body is satisfiable in that model.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from .ir import (
    BOOL,
    INT,
    Atom,
    BoolConst,
    ChcSystem,
    Clause,
    Ctor,
    IntConst,
    IrError,
    Sort,
    Term,
    Var,
    compile_constraint,
)

Value = object  # int | bool | tuple (lists are tuples of ints)
Env = Dict[str, Value]


class LfpBudgetError(IrError):
    pass


def value_universe(sort: Sort, depth: int, int_range: Tuple[int, int], sys: Optional[ChcSystem] = None) -> List[Value]:
    lo, hi = int_range
    if sort == INT:
        return list(range(lo, hi + 1))
    if sort == BOOL:
        return [False, True]
    if sort.name == "list":
        ints = range(lo, hi + 1)
        out: List[Value] = []
        for n in range(depth + 1):
            out.extend(itertools.product(ints, repeat=n))
        return out
    raise IrError("no finite universe for sort %s" % sort)


def term_value(t: Term, env: Env) -> Value:
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, IntConst):
        return t.value
    if isinstance(t, BoolConst):
        return t.value
    if isinstance(t, Ctor):
        if t.name == "nil":
            return ()
        if t.name == "cons":
            head = term_value(t.args[0], env)
            tail = term_value(t.args[1], env)
            return (head,) + tail  # type: ignore[operator]
    raise IrError("cannot evaluate term %r" % (t,))


def match_term(pattern: Term, value: Value, env: Env) -> Optional[Env]:
    """Match a ground value against a pattern, extending env (copy on write)."""
    if isinstance(pattern, Var):
        if pattern.name in env:
            return env if env[pattern.name] == value else None
        env = dict(env)
        env[pattern.name] = value
        return env
    if isinstance(pattern, IntConst):
        return env if value == pattern.value else None
    if isinstance(pattern, BoolConst):
        return env if value == pattern.value else None
    if isinstance(pattern, Ctor):
        if pattern.name == "nil":
            return env if value == () else None
        if pattern.name == "cons":
            if not isinstance(value, tuple) or not value:
                return None
            env2 = match_term(pattern.args[0], value[0], env)
            if env2 is None:
                return None
            return match_term(pattern.args[1], value[1:], env2)
    raise IrError("bad pattern %r" % (pattern,))


def _term_var_names(t: Term) -> Set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Ctor):
        out: Set[str] = set()
        for a in t.args:
            out |= _term_var_names(a)
        return out
    return set()


@dataclass
class _ClausePlan:
    """Precomputed join order and index positions for one clause."""

    order: List[Atom]
    key_positions: List[List[int]]
    free_vars: List[Var]  # enumerated after the body join
    check: object  # compiled constraint


@dataclass
class LfpResult:
    atoms: Dict[str, Set[Tuple[Value, ...]]]
    rounds: int
    depth: int = 0
    int_range: Tuple[int, int] = (0, 0)

    def restrict(self, preds: Sequence[str]) -> Dict[str, Set[Tuple[Value, ...]]]:
        return {p: set(self.atoms.get(p, set())) for p in preds}


@dataclass
class GoalViolation:
    goal_index: int
    clause: Clause
    env: Env


class _Evaluator:
    def __init__(self, sys: ChcSystem, depth: int, int_range: Tuple[int, int], cap: int):
        self.sys = sys
        self.depth = depth
        self.int_range = int_range
        self.cap = cap
        self.universes: Dict[str, List[Value]] = {}
        self.plans: Dict[int, _ClausePlan] = {}
        self.atoms: Dict[str, Set[Tuple[Value, ...]]] = {p: set() for p in sys.preds}
        total = 0
        for pred, sig in sys.preds.items():
            n = 1
            for s in sig:
                n *= len(self.universe(s))
            total += n
            if total > cap:
                raise LfpBudgetError(
                    "ground atom universe exceeds %d (at predicate %s); lower depth or the int window" % (cap, pred)
                )

    def universe(self, sort: Sort) -> List[Value]:
        key = sort.name
        if key not in self.universes:
            self.universes[key] = value_universe(sort, self.depth, self.int_range, self.sys)
        return self.universes[key]

    def in_universe(self, v: Value, sort: Sort) -> bool:
        lo, hi = self.int_range
        if sort == INT:
            return isinstance(v, int) and lo <= v <= hi
        if sort == BOOL:
            return isinstance(v, bool)
        # list values: element window and depth bound both apply
        return isinstance(v, tuple) and len(v) <= self.depth and all(lo <= e <= hi for e in v)

    def plan(self, c: Clause) -> _ClausePlan:
        p = self.plans.get(id(c))
        if p is not None:
            return p
        bound: Set[str] = set()
        remaining = list(c.body)
        order: List[Atom] = []
        key_positions: List[List[int]] = []
        while remaining:
            def score(a: Atom) -> Tuple[int, int]:
                ground = sum(1 for t in a.args if _term_var_names(t) <= bound)
                return (ground, -len(a.args))

            best = max(remaining, key=score)
            remaining.remove(best)
            order.append(best)
            key_positions.append([i for i, t in enumerate(best.args) if _term_var_names(t) <= bound])
            for t in best.args:
                bound |= _term_var_names(t)
        free = [v for v in c.vars() if v.name not in bound]
        seen: Set[str] = set()
        uniq: List[Var] = []
        for v in free:
            if v.name not in seen:
                seen.add(v.name)
                uniq.append(v)
        p = _ClausePlan(order, key_positions, uniq, compile_constraint(c.constraint))
        self.plans[id(c)] = p
        return p

    def clause_envs(self, c: Clause) -> Iterator[Env]:
        plan = self.plan(c)
        envs: List[Env] = [{}]
        for atom, keypos in zip(plan.order, plan.key_positions):
            tuples = self.atoms.get(atom.pred, set())
            if not tuples:
                return
            index: Dict[Tuple[Value, ...], List[Tuple[Value, ...]]] = {}
            for tup in tuples:
                index.setdefault(tuple(tup[i] for i in keypos), []).append(tup)
            nonkey = [i for i in range(len(atom.args)) if i not in keypos]
            new_envs: List[Env] = []
            for env in envs:
                key = tuple(term_value(atom.args[i], env) for i in keypos)
                for tup in index.get(key, ()):
                    env2: Optional[Env] = env
                    for i in nonkey:
                        env2 = match_term(atom.args[i], tup[i], env2)
                        if env2 is None:
                            break
                    if env2 is not None:
                        new_envs.append(env2)
            envs = new_envs
            if not envs:
                return
        if plan.free_vars:
            doms = [self.universe(v.sort) for v in plan.free_vars]
            n = len(envs)
            for d in doms:
                n *= len(d)
            if n > self.cap:
                raise LfpBudgetError(
                    "free-variable enumeration for clause needs %d cases (cap %d)" % (n, self.cap)
                )
            names = [v.name for v in plan.free_vars]
            check = plan.check
            for env in envs:
                for combo in itertools.product(*doms):
                    env2 = dict(env)
                    for nm, val in zip(names, combo):
                        env2[nm] = val
                    if check(env2):
                        yield env2
        else:
            check = plan.check
            for env in envs:
                if check(env):
                    yield env

    def run(self) -> LfpResult:
        rounds = 0
        changed = True
        while changed:
            rounds += 1
            changed = False
            for c in self.sys.clauses:
                assert c.head is not None
                target = self.atoms[c.head.pred]
                sig = self.sys.preds[c.head.pred]
                for env in self.clause_envs(c):
                    tup = tuple(term_value(t, env) for t in c.head.args)
                    if tup in target:
                        continue
                    if all(self.in_universe(v, s) for v, s in zip(tup, sig)):
                        target.add(tup)
                        changed = True
        return LfpResult(self.atoms, rounds, self.depth, self.int_range)


def bounded_lfp(sys: ChcSystem, depth: int = 3, int_range: Tuple[int, int] = (-2, 2), cap: int = 10**6) -> LfpResult:
    return _Evaluator(sys, depth, int_range, cap).run()


def check_goals(
    sys: ChcSystem,
    result: Optional[LfpResult] = None,
    depth: int = 3,
    int_range: Tuple[int, int] = (-2, 2),
    cap: int = 10**6,
    max_witnesses: int = 1,
) -> List[GoalViolation]:
    """Violated goals in the bounded least model; empty list means bounded-safe."""
    ev = _Evaluator(sys, depth, int_range, cap)
    if result is not None:
        ev.atoms = {p: set(result.atoms.get(p, set())) for p in sys.preds}
    else:
        ev.run()
    out: List[GoalViolation] = []
    for gi, g in enumerate(sys.goals):
        found = 0
        for env in ev.clause_envs(g):
            out.append(GoalViolation(gi, g, env))
            found += 1
            if found >= max_witnesses:
                break
    return out
