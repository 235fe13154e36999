"""Translation from MiniFun programs to constrained Horn clauses.

Each function f(p1,...,pk): T becomes a predicate f/(k+m) where the m result
slots flatten T (a tuple result contributes one slot per component).  A
top-level match on a List parameter becomes one clause per case, with the
constructor pattern in the head.  Function calls become body atoms with fresh
result variables; repeated calls with identical arguments share one atom.

Each function with a postcondition also yields a goal clause

    false :- pre' & ~post', f(params, res), <pre call atoms>, <post call atoms>

whose satisfiability (as part of the full system) certifies the contract.

A SourceMap records, per predicate and goal, how slots relate to surface
parameters and contract text; the back-translation stage consumes it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import minifun as mf
from .ir import (
    BOOL, FALSE, INT, LIST, LIST_SORT, TRUE, And, Atom, BoolConst, ChcSystem, Clause, Cmp,
    Ctor, Expr, Iff, Implies, IntConst, Ite, NameSupply, Not, Or, Sort, Term, Var, conj,
    expr_sort, negate,
)


class TranslateError(Exception):
    def __init__(self, msg: str, reason: str = "unsupported-shape"):
        super().__init__(msg)
        self.reason = reason


# ---------------------------------------------------------------------------
# sorts and slots
# ---------------------------------------------------------------------------

def sort_of_type(t: mf.Type) -> Optional[Sort]:
    if isinstance(t, mf.TInt):
        return INT
    if isinstance(t, mf.TBool):
        return BOOL
    if isinstance(t, mf.TList):
        return LIST_SORT
    return None  # tuples flatten into several slots


def result_slots(t: mf.Type) -> List[Sort]:
    if isinstance(t, mf.TTuple):
        out: List[Sort] = []
        for item in t.items:
            s = sort_of_type(item)
            if s is None or not s.is_basic():
                raise TranslateError("tuple results may only contain basic types", "unsupported-shape")
            out.append(s)
        return out
    s = sort_of_type(t)
    assert s is not None
    return [s]


@dataclass
class FunSlots:
    """Predicate layout of one function: parameter slots then result slots."""
    name: str
    param_sorts: List[Sort]
    result_sorts: List[Sort]

    @property
    def arity(self) -> int:
        return len(self.param_sorts) + len(self.result_sorts)


def fun_slots(f: mf.FunDef) -> FunSlots:
    params: List[Sort] = []
    for pname, pt in f.params:
        s = sort_of_type(pt)
        if s is None:
            raise TranslateError(
                "function %s: tuple-typed parameter %s is not supported" % (f.name, pname),
                "unsupported-shape")
        params.append(s)
    return FunSlots(f.name, params, result_slots(f.ret))


# ---------------------------------------------------------------------------
# source map
# ---------------------------------------------------------------------------

@dataclass
class FunInfo:
    pred: str
    params: List[Tuple[str, str]]  # (surface name, type text)
    result: List[str]              # slot type texts
    result_is_adt: bool
    result_is_tuple: bool


@dataclass
class GoalInfo:
    index: int
    function: str
    pre: List[str]   # printed conjuncts of the precondition
    post: str        # printed postcondition


@dataclass
class SourceMap:
    functions: Dict[str, FunInfo]
    goals: List[GoalInfo]

    def to_json(self) -> str:
        doc = {
            "version": 1,
            "functions": {
                name: {
                    "pred": fi.pred,
                    "params": [[p, t] for p, t in fi.params],
                    "result": fi.result,
                    "result_is_adt": fi.result_is_adt,
                    "result_is_tuple": fi.result_is_tuple,
                }
                for name, fi in self.functions.items()
            },
            "goals": [
                {"index": g.index, "function": g.function, "pre": g.pre, "post": g.post}
                for g in self.goals
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "SourceMap":
        doc = json.loads(text)
        funs = {
            name: FunInfo(
                pred=obj["pred"],
                params=[(p, t) for p, t in obj["params"]],
                result=list(obj["result"]),
                result_is_adt=bool(obj["result_is_adt"]),
                result_is_tuple=bool(obj["result_is_tuple"]),
            )
            for name, obj in doc["functions"].items()
        }
        goals = [GoalInfo(g["index"], g["function"], list(g["pre"]), g["post"]) for g in doc["goals"]]
        return SourceMap(funs, goals)


def _conjunct_texts(e: Optional[mf.Expr]) -> List[str]:
    if e is None:
        return []
    if isinstance(e, mf.EBin) and e.op == "&&":
        return _conjunct_texts(e.left) + _conjunct_texts(e.right)
    return [mf.format_expr(e)]


# ---------------------------------------------------------------------------
# expression translation
# ---------------------------------------------------------------------------

def _cap(name: str) -> str:
    return name[0].upper() + name[1:]


class _ClauseBuilder:
    """Accumulates atoms and constraint conjuncts for one clause."""

    def __init__(self, slots: Dict[str, FunSlots], supply: NameSupply, env: Dict[str, Term]):
        self.slots = slots
        self.supply = supply
        self.env = env
        self.atoms: List[Atom] = []
        self.constraints: List[Expr] = []
        self.memo: Dict[str, List[Var]] = {}

    def fresh(self, sort: Sort, base: Optional[str] = None) -> Var:
        if base is None:
            base = {"Bool": "B", "Int": "V"}.get(sort.name, "R")
        return Var(self.supply.fresh(base), sort)

    # -- helpers ------------------------------------------------------------

    def as_term(self, e: Union[Term, Expr]) -> Term:
        """Coerce a translated value into an atom/ctor argument term."""
        if isinstance(e, (Var, IntConst, BoolConst, Ctor)):
            return e
        sort = expr_sort(e)
        v = self.fresh(sort)
        self.constraints.append(Iff(v, e) if sort == BOOL else Cmp("=", v, e))
        return v

    def call(self, fn: str, args: Sequence[Union[Term, Expr]]) -> List[Var]:
        if fn not in self.slots:
            raise TranslateError("call to unknown function %s" % fn)
        fs = self.slots[fn]
        arg_terms = [self.as_term(a) for a in args]
        key = "%s(%s)" % (fn, ",".join(repr(t) for t in arg_terms))
        if key in self.memo:
            return self.memo[key]
        results = [self.fresh(s) for s in fs.result_sorts]
        self.atoms.append(Atom(fn, tuple(arg_terms) + tuple(results)))
        self.memo[key] = results
        return results

    # -- ADT-valued expressions ----------------------------------------------

    def tr_adt(self, e: mf.Expr) -> Term:
        if isinstance(e, mf.EVar):
            return self.env[e.name]
        if isinstance(e, mf.ECtor):
            if e.name == "nil":
                return Ctor("list", "nil", ())
            h = self.as_term(self.tr_int(e.args[0]))
            t = self.tr_adt(e.args[1])
            return Ctor("list", "cons", (h, t))
        if isinstance(e, mf.ECall):
            rs = self.call(e.fn, self.tr_args(e))
            if len(rs) != 1:
                raise TranslateError("call %s used where a list is expected" % e.fn)
            return rs[0]
        raise TranslateError(
            "only variables, constructors and calls can build list results "
            "(conditionals and nested matches are not supported here)")

    def tr_args(self, e: mf.ECall) -> List[Union[Term, Expr]]:
        fs = self.slots.get(e.fn)
        if fs is None:
            raise TranslateError("call to unknown function %s" % e.fn)
        out: List[Union[Term, Expr]] = []
        for a, s in zip(e.args, fs.param_sorts):
            if s == LIST_SORT:
                out.append(self.tr_adt(a))
            elif s == INT:
                out.append(self.tr_int(a))
            else:
                out.append(self.tr_bool(a))
        return out

    # -- basic-valued expressions ---------------------------------------------

    def tr_int(self, e: mf.Expr) -> Expr:
        if isinstance(e, mf.EInt):
            return IntConst(e.value)
        if isinstance(e, mf.EVar):
            t = self.env[e.name]
            assert isinstance(t, Var)
            return t
        if isinstance(e, mf.EProj):
            return self.tr_proj(e)
        if isinstance(e, mf.ECall):
            rs = self.call(e.fn, self.tr_args(e))
            if len(rs) != 1:
                raise TranslateError("call %s used where an integer is expected" % e.fn)
            return rs[0]
        if isinstance(e, mf.EUnary) and e.op == "-":
            from .ir import Mul
            return Mul(-1, self.tr_int(e.arg))
        if isinstance(e, mf.EBin) and e.op in ("+", "-", "*"):
            from .ir import Add, Mul, Sub
            l, r = self.tr_int(e.left), self.tr_int(e.right)
            if e.op == "+":
                return Add(l, r)
            if e.op == "-":
                return Sub(l, r)
            if isinstance(l, IntConst):
                return Mul(l.value, r)
            if isinstance(r, IntConst):
                return Mul(r.value, l)
            raise TranslateError("nonlinear multiplication is not supported")
        if isinstance(e, mf.EIf):
            return Ite(self.tr_bool(e.cond), self.tr_int(e.then), self.tr_int(e.other))
        raise TranslateError("unsupported integer expression")

    def tr_proj(self, e: mf.EProj) -> Var:
        if not isinstance(e.base, mf.ECall):
            raise TranslateError("._%d is only supported directly on call results" % e.index)
        rs = self.call(e.base.fn, self.tr_args(e.base))
        if not 1 <= e.index <= len(rs):
            raise TranslateError("call %s has no component %d" % (e.base.fn, e.index))
        return rs[e.index - 1]

    def tr_bool(self, e: mf.Expr) -> Expr:
        if isinstance(e, mf.EBool):
            return TRUE if e.value else FALSE
        if isinstance(e, mf.EVar):
            t = self.env[e.name]
            assert isinstance(t, Var)
            return t
        if isinstance(e, mf.EProj):
            return self.tr_proj(e)
        if isinstance(e, mf.ECall):
            rs = self.call(e.fn, self.tr_args(e))
            if len(rs) != 1:
                raise TranslateError("call %s used where a boolean is expected" % e.fn)
            return rs[0]
        if isinstance(e, mf.EUnary) and e.op == "!":
            return negate(self.tr_bool(e.arg))
        if isinstance(e, mf.EBin):
            if e.op in ("&&", "||", "==>"):
                l, r = self.tr_bool(e.left), self.tr_bool(e.right)
                if e.op == "&&":
                    return conj([l, r])
                if e.op == "==>":
                    return Implies(l, r)
                # !p || q reads as an implication
                if isinstance(l, Not):
                    return Implies(l.arg, r)
                return Or((l, r))
            if e.op in ("==", "!="):
                lt = mf_operand_is_bool(e)
                if lt:
                    l, r = self.tr_bool(e.left), self.tr_bool(e.right)
                    out: Expr = Iff(l, r)
                else:
                    out = Cmp("=", self.tr_int(e.left), self.tr_int(e.right))
                return negate(out) if e.op == "!=" else out
            if e.op in ("<=", ">=", "<", ">"):
                op = {"<=": "=<", ">=": ">=", "<": "<", ">": ">"}[e.op]
                return Cmp(op, self.tr_int(e.left), self.tr_int(e.right))
        if isinstance(e, mf.EIf):
            c = self.tr_bool(e.cond)
            t = self.tr_bool(e.then)
            o = self.tr_bool(e.other)
            return _norm_ite(c, t, o)
        if isinstance(e, mf.EForall):
            raise TranslateError(
                "quantifiers are not supported in input contracts", "unsupported-contract-shape")
        raise TranslateError("unsupported boolean expression")


def _norm_ite(c: Expr, t: Expr, o: Expr) -> Expr:
    if t == FALSE:
        return conj([negate(c), o])
    if t == TRUE:
        return Or((c, o))
    if o == FALSE:
        return conj([c, t])
    if o == TRUE:
        return Implies(c, t)
    return Ite(c, t, o)


def mf_operand_is_bool(e: mf.EBin) -> bool:
    """Crude but sufficient: ==/!= operands already typechecked to agree."""
    probe = e.left
    if isinstance(probe, mf.EBool) or (isinstance(probe, mf.EBin) and probe.op in
                                       ("&&", "||", "==>", "==", "!=", "<=", ">=", "<", ">")):
        return True
    if isinstance(probe, mf.EUnary) and probe.op == "!":
        return True
    return False


# ---------------------------------------------------------------------------
# function and goal translation
# ---------------------------------------------------------------------------

def _result_constraint(b: _ClauseBuilder, v: Var, e: Expr) -> None:
    if v.sort == BOOL:
        if e == TRUE:
            b.constraints.append(v)
        elif e == FALSE:
            b.constraints.append(Not(v))
        else:
            b.constraints.append(Iff(v, e))
    else:
        b.constraints.append(Cmp("=", v, e))


def _translate_body(slots: Dict[str, FunSlots], f: mf.FunDef, body: mf.Expr,
                    env: Dict[str, Term], supply: NameSupply,
                    head_params: List[Term]) -> Clause:
    b = _ClauseBuilder(slots, supply, env)
    fs = slots[f.name]
    if fs.result_sorts == [LIST_SORT]:
        res_term = b.tr_adt(body)
        head = Atom(f.name, tuple(head_params) + (res_term,))
    elif isinstance(f.ret, mf.TTuple):
        if not isinstance(body, mf.ETuple) or len(body.items) != len(fs.result_sorts):
            raise TranslateError("function %s must return a literal tuple in each case" % f.name)
        res_vars = [b.fresh(s, "Res") for s in fs.result_sorts]
        for v, item in zip(res_vars, body.items):
            e = b.tr_bool(item) if v.sort == BOOL else b.tr_int(item)
            _result_constraint(b, v, e)
        head = Atom(f.name, tuple(head_params) + tuple(res_vars))
    else:
        sort = fs.result_sorts[0]
        e = b.tr_bool(body) if sort == BOOL else b.tr_int(body)
        if isinstance(e, Var) and e in (env.get(p) for p, _ in f.params):
            head = Atom(f.name, tuple(head_params) + (e,))
        else:
            v = b.fresh(sort, "Res")
            _result_constraint(b, v, e)
            head = Atom(f.name, tuple(head_params) + (v,))
    return Clause(head, conj(b.constraints), tuple(b.atoms))


def _translate_function(slots: Dict[str, FunSlots], f: mf.FunDef) -> List[Clause]:
    body = f.body
    base_env: Dict[str, Term] = {}
    used = {_cap(p) for p, _ in f.params}
    for p, pt in f.params:
        s = sort_of_type(pt)
        assert s is not None
        base_env[p] = Var(_cap(p), s)

    if isinstance(body, mf.EMatch):
        if not isinstance(body.scrutinee, mf.EVar) or body.scrutinee.name not in base_env:
            raise TranslateError(
                "function %s: match must scrutinise a parameter" % f.name)
        pvar = body.scrutinee.name
        out = []
        for case in body.cases:
            supply = NameSupply()
            env = dict(base_env)
            names = set(used)
            if case.ctor == "nil":
                env[pvar] = Ctor("list", "nil", ())
            else:
                h = Var(_cap(case.binders[0]), INT)
                t = Var(_cap(case.binders[1]), LIST_SORT)
                env[case.binders[0]] = h
                env[case.binders[1]] = t
                env[pvar] = Ctor("list", "cons", (h, t))
                names |= {h.name, t.name}
            supply.reserve(names)
            head_params = [env[p] for p, _ in f.params]
            out.append(_translate_body(slots, f, case.body, env, supply, head_params))
        return out

    supply = NameSupply(used)
    head_params = [base_env[p] for p, _ in f.params]
    return [_translate_body(slots, f, body, base_env, supply, head_params)]


def _translate_goal(slots: Dict[str, FunSlots], f: mf.FunDef) -> Clause:
    supply = NameSupply()
    env: Dict[str, Term] = {}
    for p, pt in f.params:
        s = sort_of_type(pt)
        assert s is not None
        env[p] = Var(_cap(p), s)
        supply.reserve([_cap(p)])
    fs = slots[f.name]
    res_vars: List[Var] = []
    for s in fs.result_sorts:
        base = "R" if s == LIST_SORT else "Res"
        v = Var(supply.fresh(base), s)
        res_vars.append(v)
    if len(res_vars) == 1:
        env["res"] = res_vars[0]

    b = _ClauseBuilder(slots, supply, env)
    pre_expr = TRUE if f.pre is None else b.tr_bool(f.pre)
    pre_atoms = list(b.atoms)
    b.atoms = []
    assert f.post is not None
    if isinstance(f.ret, mf.TTuple):
        raise TranslateError("contracts on tuple-returning functions are not supported")
    post_expr = b.tr_bool(f.post)
    post_atoms = list(b.atoms)
    constraint = conj([pre_expr, negate(post_expr)])
    atoms = [Atom(f.name, tuple(env[p] for p, _ in f.params) + tuple(res_vars))] + pre_atoms + post_atoms
    return Clause(None, constraint, tuple(atoms))


def translate_to_chcs(prog: mf.Program) -> Tuple[ChcSystem, SourceMap]:
    """Translate a typechecked program; raises TranslateError on unsupported shapes."""
    slots = {f.name: fun_slots(f) for f in prog.functions.values()}
    for f in prog.functions.values():
        for contract in (f.pre, f.post):
            if contract is not None and _mentions_forall(contract):
                raise TranslateError(
                    "function %s: quantifiers are not supported in input contracts" % f.name,
                    "unsupported-contract-shape")

    clauses: List[Clause] = []
    for f in prog.functions.values():
        clauses.extend(_translate_function(slots, f))

    goals: List[Clause] = []
    goal_infos: List[GoalInfo] = []
    for f in prog.functions.values():
        if f.post is None:
            continue
        goals.append(_translate_goal(slots, f))
        goal_infos.append(GoalInfo(len(goals) - 1, f.name,
                                   _conjunct_texts(f.pre), mf.format_expr(f.post)))

    preds = {fs.name: tuple(fs.param_sorts + fs.result_sorts) for fs in slots.values()}
    system = ChcSystem({LIST.name: LIST}, preds, clauses, goals)
    system.validate()

    funs = {
        f.name: FunInfo(
            pred=f.name,
            params=[(p, str(t)) for p, t in f.params],
            result=[str(t) for t in (f.ret.items if isinstance(f.ret, mf.TTuple) else (f.ret,))],
            result_is_adt=isinstance(f.ret, mf.TList),
            result_is_tuple=isinstance(f.ret, mf.TTuple),
        )
        for f in prog.functions.values()
    }
    return system, SourceMap(funs, goal_infos)


def _mentions_forall(e: mf.Expr) -> bool:
    if isinstance(e, mf.EForall):
        return True
    kids: Tuple[mf.Expr, ...] = ()
    if isinstance(e, (mf.EUnary,)):
        kids = (e.arg,)
    elif isinstance(e, mf.EBin):
        kids = (e.left, e.right)
    elif isinstance(e, mf.EIf):
        kids = (e.cond, e.then, e.other)
    elif isinstance(e, mf.ECall):
        kids = e.args
    elif isinstance(e, mf.ECtor):
        kids = e.args
    elif isinstance(e, mf.ETuple):
        kids = e.items
    elif isinstance(e, mf.EProj):
        kids = (e.base,)
    elif isinstance(e, mf.EMatch):
        kids = (e.scrutinee,) + tuple(c.body for c in e.cases)
    return any(_mentions_forall(k) for k in kids)
