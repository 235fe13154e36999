"""Back-translation of clause-system models into strengthened contracts.

A satisfying model assigns each introduced predicate a constraint over its
head slots.  Every slot of a definition corresponds to a surface-level
expression: a catamorphism result over an input (``is_asorted(l)``, a
``hd(l)._1`` projection), a catamorphism result over the function's result
(``is_dsorted(res)``), a basic parameter of the function, or a free variable
that parameterizes a catamorphism (the ``N`` of ``leq_all(N,Res,B)``).
Substituting those expressions into the model constraint and universally
quantifying the free slots yields a formula over the function's parameters
and ``res`` that provably holds on every run -- a strengthening of the
declared postcondition.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from . import ir
from .horn import Model, PredModel
from .minifun import (
    DEFAULT_FUEL, EBin, EBool, ECall, ECtor, EForall, EInt, EProj, ETuple, EUnary, EVar,
    Expr, FunDef, Program, TBool, TInt, TList, Type, eval_expr_in, expr_structurally_equal,
    format_expr, parse_expr_text, parse_program, splice_posts, type_universe, typecheck,
)
from .transform import Definition, TransformResult
from .translate import FunInfo, SourceMap


class StrengthenError(Exception):
    pass


# ---------------------------------------------------------------------------
# conjunct utilities (surface syntax)
# ---------------------------------------------------------------------------

def mf_conjuncts(e: Expr) -> List[Expr]:
    if isinstance(e, EBin) and e.op == "&&":
        return mf_conjuncts(e.left) + mf_conjuncts(e.right)
    return [e]


def mf_conj(cs: Sequence[Expr]) -> Expr:
    if not cs:
        return EBool(True)
    out = cs[0]
    for c in cs[1:]:
        out = EBin("&&", out, c)
    return out


def free_vars(e: Expr) -> Set[str]:
    if isinstance(e, EVar):
        return {e.name}
    if isinstance(e, (EInt, EBool)):
        return set()
    if isinstance(e, ECtor):
        return set().union(*(free_vars(a) for a in e.args)) if e.args else set()
    if isinstance(e, ETuple):
        return set().union(*(free_vars(a) for a in e.items)) if e.items else set()
    if isinstance(e, EProj):
        return free_vars(e.base)
    if isinstance(e, ECall):
        return set().union(*(free_vars(a) for a in e.args)) if e.args else set()
    if isinstance(e, EUnary):
        return free_vars(e.arg)
    if isinstance(e, EBin):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, EForall):
        return free_vars(e.body) - {e.binder}
    # EIf / EMatch do not occur in contract formulas we build, but stay total
    out: Set[str] = set()
    for f in getattr(e, "__dataclass_fields__", {}):
        v = getattr(e, f)
        if isinstance(v, tuple):
            for x in v:
                if hasattr(x, "__dataclass_fields__"):
                    out |= free_vars(x)
        elif hasattr(v, "__dataclass_fields__"):
            out |= free_vars(v)
    return out


def _is_true(e: Expr) -> bool:
    return isinstance(e, EBool) and e.value


# ---------------------------------------------------------------------------
# slot roles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlotRole:
    kind: str                 # input | output | free
    expr: Expr                # surface rendering of the slot
    binder: Optional[Tuple[str, Type]] = None  # set for free slots
    pre_conjunct: bool = False    # rendering is verbatim a precondition conjunct
    mentions_param: bool = False  # rendering mentions a basic-sorted parameter


def _surface_type(sort: ir.Sort) -> Type:
    return TInt() if sort == ir.INT else TBool()


def slot_roles(defn: Definition, source_map: SourceMap) -> Tuple[Dict[str, SlotRole], List[Tuple[str, str]]]:
    """Map every definition-head variable to its surface role.

    Returns the role map and the quantifier order (head var, surface name)
    for free slots, in order of first appearance in the definition body.
    """
    pred2fun: Dict[str, Tuple[str, FunInfo]] = {
        fi.pred: (name, fi) for name, fi in source_map.functions.items()
    }
    subject = None
    for a in defn.body:
        if a.pred == defn.subject_pred:
            subject = a
            break
    if subject is None:
        raise StrengthenError("definition %s has no subject atom" % defn.name)
    sname, sinfo = pred2fun[subject.pred]
    basic_params = {p for p, t in sinfo.params if t in ("Int", "Bool")}

    bind: Dict[str, Expr] = {}

    def bind_var(t: ir.Term, e: Expr) -> None:
        if isinstance(t, ir.Var) and t.name not in bind:
            bind[t.name] = e

    # subject arguments carry the parameter/result names
    for i, (pname, _ptype) in enumerate(sinfo.params):
        bind_var(subject.args[i], EVar(pname))
    nres = len(subject.args) - len(sinfo.params)
    for k in range(nres):
        e: Expr = EVar("res") if nres == 1 else EProj(EVar("res"), k + 1)
        bind_var(subject.args[len(sinfo.params) + k], e)

    roles: Dict[str, SlotRole] = {}
    binders: List[Tuple[str, str]] = []
    taken = {p for p, _ in sinfo.params} | {"res", sname}

    def render_term(t: ir.Term, origin: str) -> Expr:
        if isinstance(t, ir.IntConst):
            return EInt(t.value)
        if isinstance(t, ir.BoolConst):
            return EBool(t.value)
        if isinstance(t, ir.Ctor):
            if t.name == "nil":
                return ECtor("nil", ())
            return ECtor("cons", tuple(render_term(a, origin) for a in t.args))
        assert isinstance(t, ir.Var)
        if t.name in bind:
            return bind[t.name]
        if not t.sort.is_basic():
            raise StrengthenError(
                "unmapped head variable %s of %s: ADT argument of %s has no surface name"
                % (t.name, defn.name, origin))
        # a fresh slot: universally quantified in the surface formula
        base = t.name.lower()
        name = base
        i = 1
        while name in taken:
            name = "%s%d" % (base, i)
            i += 1
        taken.add(name)
        bind[t.name] = EVar(name)
        binders.append((t.name, name))
        roles[t.name] = SlotRole("free", EVar(name), (name, _surface_type(t.sort)))
        return bind[t.name]

    # walk catamorphism atoms in body order so quantifier order is stable
    for a in defn.body:
        if a is subject:
            continue
        if a.pred not in pred2fun:
            raise StrengthenError("atom %s of %s has no surface counterpart" % (a.pred, defn.name))
        qname, qi = pred2fun[a.pred]
        nparams = len(qi.params)
        args = tuple(render_term(t, qname) for t in a.args[:nparams])
        call = ECall(qname, args)
        out_slots = a.args[nparams:]
        for k, t in enumerate(out_slots):
            e = call if len(out_slots) == 1 else EProj(call, k + 1)
            bind_var(t, e)

    # classify the head slots
    for v in defn.head_vars:
        if v.name in roles:
            continue
        if v.name not in bind:
            raise StrengthenError("unmapped head variable %s of %s" % (v.name, defn.name))
        e = bind[v.name]
        fv = free_vars(e)
        kind = "output" if "res" in fv else "input"
        roles[v.name] = SlotRole(
            kind, e,
            pre_conjunct=False,
            mentions_param=bool(fv & basic_params),
        )
    return roles, binders


# ---------------------------------------------------------------------------
# model constraint -> surface formula
# ---------------------------------------------------------------------------

_CMP_TO_SURFACE = {"=": "==", "!=": "!=", "=<": "<=", ">=": ">=", "<": "<", ">": ">"}


def _chc_to_surface(e: ir.Expr, sub: Dict[str, Expr]) -> Expr:
    if isinstance(e, ir.Var):
        if e.name not in sub:
            raise StrengthenError("unmapped head variable %s in model constraint" % e.name)
        return sub[e.name]
    if isinstance(e, ir.IntConst):
        return EInt(e.value)
    if isinstance(e, ir.BoolConst):
        return EBool(e.value)
    if isinstance(e, ir.Add):
        return EBin("+", _chc_to_surface(e.left, sub), _chc_to_surface(e.right, sub))
    if isinstance(e, ir.Sub):
        return EBin("-", _chc_to_surface(e.left, sub), _chc_to_surface(e.right, sub))
    if isinstance(e, ir.Mul):
        return EBin("*", EInt(e.coeff), _chc_to_surface(e.arg, sub))
    if isinstance(e, ir.Cmp):
        return EBin(_CMP_TO_SURFACE[e.op], _chc_to_surface(e.left, sub), _chc_to_surface(e.right, sub))
    if isinstance(e, ir.Not):
        return EUnary("!", _chc_to_surface(e.arg, sub))
    if isinstance(e, ir.And):
        return mf_conj([_chc_to_surface(a, sub) for a in e.args])
    if isinstance(e, ir.Or):
        parts = [_chc_to_surface(a, sub) for a in e.args]
        if not parts:
            return EBool(False)
        out = parts[0]
        for p in parts[1:]:
            out = EBin("||", out, p)
        return out
    if isinstance(e, ir.Implies):
        return EBin("==>", _chc_to_surface(e.left, sub), _chc_to_surface(e.right, sub))
    if isinstance(e, ir.Iff):
        return EBin("==", _chc_to_surface(e.left, sub), _chc_to_surface(e.right, sub))
    if isinstance(e, ir.Ite):
        from .minifun import EIf
        return EIf(_chc_to_surface(e.cond, sub), _chc_to_surface(e.then, sub),
                   _chc_to_surface(e.other, sub))
    raise StrengthenError("cannot render %r in the surface syntax" % (e,))


# ---------------------------------------------------------------------------
# contracts
# ---------------------------------------------------------------------------

@dataclass
class StrengthenedContract:
    function: str
    original: Expr               # the declared postcondition
    added: Tuple[Expr, ...]      # new top-level conjuncts (quantified where needed)

    @property
    def added_formula(self) -> Expr:
        return mf_conj(_merge_foralls(list(self.added)))

    @property
    def combined(self) -> Expr:
        parts = mf_conjuncts(self.original) + _merge_foralls(list(self.added))
        return mf_conj(parts)


def _merge_foralls(conjs: List[Expr]) -> List[Expr]:
    """Fuse adjacent universally quantified conjuncts with the same binder."""
    out: List[Expr] = []
    for c in conjs:
        if (out and isinstance(c, EForall) and isinstance(out[-1], EForall)
                and out[-1].binder == c.binder and out[-1].btype == c.btype):
            prev = out.pop()
            out.append(EForall(prev.binder, prev.btype, EBin("&&", prev.body, c.body)))
        else:
            out.append(c)
    return out


def _definitions_for(defs: Dict[str, Definition], subject_pred: str,
                     model: Model) -> List[Definition]:
    """The maximal (widest) modeled definition of each extension chain."""
    candidates = [d for d in defs.values() if d.subject_pred == subject_pred]
    extended = {d.extends for d in candidates if d.extends}
    out = []
    for d in candidates:
        if d.name in extended:
            continue
        # fall back down the chain when the solver model lacks the widest one
        cur: Optional[Definition] = d
        while cur is not None and cur.name not in model:
            cur = defs.get(cur.extends) if cur.extends else None
        if cur is None:
            raise StrengthenError("model does not constrain %s (subject %s)"
                                  % (d.name, subject_pred))
        if all(cur.name != o.name for o in out):
            out.append(cur)
    return out


def backtranslate(model: Model, defs: Dict[str, Definition], source_map: SourceMap,
                  fn: str) -> StrengthenedContract:
    """Instantiate the model constraints of fn's definitions over surface syntax."""
    goal = next((g for g in source_map.goals if g.function == fn), None)
    if goal is None:
        raise StrengthenError("function %s has no contract goal" % fn)
    original = parse_expr_text(goal.post)
    pre_conjs = [parse_expr_text(s) for s in goal.pre]
    subject_pred = source_map.functions[fn].pred

    added: List[Expr] = []
    for defn in _definitions_for(defs, subject_pred, model):
        roles, binders = slot_roles(defn, source_map)
        pm: PredModel = model[defn.name]
        if len(pm.params) != len(defn.head_vars):
            raise StrengthenError("model arity mismatch for %s" % defn.name)
        sub: Dict[str, Expr] = {}
        for p, slot in zip(pm.params, defn.head_vars):
            role = roles[slot.name]
            e = role.expr
            # a boolean catamorphism fact repeated verbatim by the precondition
            # is known to hold; only facts tying a basic parameter to the data
            # are folded in here, the rest is left to precondition-aware
            # simplification
            if (role.kind == "input" and role.mentions_param
                    and any(expr_structurally_equal(e, pc) for pc in pre_conjs)):
                e = EBool(True)
            sub[p.name] = e
        formula = _simp_bool(_chc_to_surface(pm.body, sub))
        for c in mf_conjuncts(formula):
            if _is_true(c):
                continue
            used = [(bn, src) for bn, src in binders if src in free_vars(c)]
            for bn, src in reversed(used):
                c = EForall(src, _surface_type(next(v.sort for v in defn.head_vars if v.name == bn)), c)
            added.append(c)
    return StrengthenedContract(fn, original, tuple(added))


# ---------------------------------------------------------------------------
# simplification
# ---------------------------------------------------------------------------

def _simp_bool(e: Expr) -> Expr:
    """Local boolean rewrites: true/false units, double negation."""
    if isinstance(e, EBin):
        l, r = _simp_bool(e.left), _simp_bool(e.right)
        if e.op == "&&":
            if _is_true(l):
                return r
            if _is_true(r):
                return l
            if isinstance(l, EBool):
                return EBool(False)
            if isinstance(r, EBool):
                return EBool(False)
        if e.op == "||":
            if isinstance(l, EBool):
                return EBool(True) if l.value else r
            if isinstance(r, EBool):
                return EBool(True) if r.value else l
        if e.op == "==>":
            if _is_true(l):
                return r
            if isinstance(l, EBool):
                return EBool(True)
            if isinstance(r, EBool) and r.value:
                return EBool(True)
        return EBin(e.op, l, r)
    if isinstance(e, EUnary) and e.op == "!":
        a = _simp_bool(e.arg)
        if isinstance(a, EBool):
            return EBool(not a.value)
        if isinstance(a, EUnary) and a.op == "!":
            return a.arg
        return EUnary("!", a)
    if isinstance(e, EForall):
        b = _simp_bool(e.body)
        if isinstance(b, EBool):
            return b
        return EForall(e.binder, e.btype, b)
    return e


def _expand(e: Expr, assumed: Sequence[Expr]) -> List[Expr]:
    """Rewrite a conjunct into a list of simpler conjuncts.

    Splits conjunctions (also under a quantifier or in an implication's
    consequent), drops quantifiers whose binder is unused, and removes
    implication antecedents that restate an assumption conjunct.
    """
    e = _simp_bool(e)
    if _is_true(e):
        return []
    if isinstance(e, EBin) and e.op == "&&":
        return _expand(e.left, assumed) + _expand(e.right, assumed)
    if isinstance(e, EForall):
        parts = _expand(e.body, assumed)
        out: List[Expr] = []
        for p in parts:
            if e.binder in free_vars(p):
                out.append(EForall(e.binder, e.btype, p))
            else:
                out.append(p)
        return out
    if isinstance(e, EBin) and e.op == "==>":
        ante = [a for a in mf_conjuncts(e.left)
                if not any(expr_structurally_equal(a, s) for s in assumed)]
        cons = mf_conjuncts(e.right)
        if not ante:
            return [c for part in cons for c in _expand(part, assumed)]
        if len(cons) > 1:
            left = mf_conj(ante)
            return [c for part in cons
                    for c in _expand(EBin("==>", left, part), assumed)]
        rebuilt = EBin("==>", mf_conj(ante), cons[0])
        return [rebuilt]
    return [e]


def _expand_fixpoint(conjs: List[Expr], assumed: Sequence[Expr]) -> List[Expr]:
    for _ in range(10):
        out = [c for e in conjs for c in _expand(e, assumed)]
        if len(out) == len(conjs) and all(
                expr_structurally_equal(a, b) for a, b in zip(out, conjs)):
            return out
        conjs = out
    return conjs


def _scope_universe(scope: Dict[str, Type], depth: int,
                    int_range: Tuple[int, int]) -> Iterable[Dict[str, object]]:
    names = list(scope)
    doms = [type_universe(scope[n], depth, int_range) for n in names]
    for combo in itertools.product(*doms):
        yield dict(zip(names, combo))


def _holds_everywhere(prog: Program, given: Sequence[Expr], goal: Expr,
                      scope: Dict[str, Type], depth: int, int_range: Tuple[int, int],
                      fuel: int) -> bool:
    """given |= goal over the bounded universe (interpreter-backed)."""
    for env in _scope_universe(scope, depth, int_range):
        if all(eval_expr_in(prog, g, dict(env), fuel, int_range) for g in given):
            if not eval_expr_in(prog, goal, dict(env), fuel, int_range):
                return False
    return True


def simplify_conjuncts(conjs: List[Expr], assumption: Sequence[Expr], *,
                       prog: Program, scope: Dict[str, Type],
                       depth: int = 2, int_range: Tuple[int, int] = (-2, 2),
                       fuel: int = DEFAULT_FUEL, keep: Sequence[Expr] = (),
                       verify: bool = True) -> List[Expr]:
    """Simplify a conjunct list under an assumption; bounded-truth preserving.

    `keep` conjuncts are exempt from rewriting and dropping (the declared
    postcondition, which the combined contract must repeat verbatim).
    """
    original = list(conjs)

    def kept(e: Expr) -> bool:
        return any(expr_structurally_equal(e, k) for k in keep)

    out: List[Expr] = []
    for c in conjs:
        if kept(c):
            out.append(c)
        else:
            out.extend(_expand_fixpoint([c], assumption))
    # structural dedup, first occurrence wins
    dedup: List[Expr] = []
    for c in out:
        if not any(expr_structurally_equal(c, d) for d in dedup):
            dedup.append(c)
    # assumption-aware dropping: a conjunct implied (boundedly) by the
    # assumption plus the remaining conjuncts is redundant
    i = 0
    while i < len(dedup):
        c = dedup[i]
        if kept(c):
            i += 1
            continue
        rest = dedup[:i] + dedup[i + 1:]
        if _holds_everywhere(prog, list(assumption) + rest, c, scope, depth, int_range, fuel):
            dedup = rest
            continue
        i += 1
    # ground conjuncts first, then quantified ones (stable), so related
    # quantifiers become adjacent and fuse
    plain = [c for c in dedup if not isinstance(c, EForall)]
    quant = [c for c in dedup if isinstance(c, EForall)]
    result = plain + quant
    if verify:
        before, after = mf_conj(original), mf_conj(_merge_foralls(list(result)))
        if not _bounded_equivalent(prog, assumption, before, after, scope, depth, int_range, fuel):
            raise StrengthenError("simplification changed bounded truth value")
    return result


def _bounded_equivalent(prog: Program, assumption: Sequence[Expr], a: Expr, b: Expr,
                        scope: Dict[str, Type], depth: int, int_range: Tuple[int, int],
                        fuel: int) -> bool:
    for env in _scope_universe(scope, depth, int_range):
        if not all(eval_expr_in(prog, g, dict(env), fuel, int_range) for g in assumption):
            continue
        if bool(eval_expr_in(prog, a, dict(env), fuel, int_range)) != \
                bool(eval_expr_in(prog, b, dict(env), fuel, int_range)):
            return False
    return True


def simplify(formula: Expr, assumption: Expr, *, prog: Program,
             scope: Dict[str, Type], depth: int = 2,
             int_range: Tuple[int, int] = (-2, 2), fuel: int = DEFAULT_FUEL,
             keep: Sequence[Expr] = (), verify: bool = True) -> Expr:
    """Simplify a surface formula under an assumption (bounded-truth preserving)."""
    assumed = [c for c in mf_conjuncts(assumption) if not _is_true(c)]
    conjs = simplify_conjuncts(mf_conjuncts(formula), assumed, prog=prog, scope=scope,
                               depth=depth, int_range=int_range, fuel=fuel,
                               keep=keep, verify=verify)
    return mf_conj(_merge_foralls(conjs))


def _contract_scope(fun: FunDef) -> Dict[str, Type]:
    scope = {p: t for p, t in fun.params}
    scope["res"] = fun.ret
    return scope


def simplify_contract(prog: Program, contract: StrengthenedContract, *,
                      depth: int = 2, int_range: Tuple[int, int] = (-2, 2),
                      fuel: int = DEFAULT_FUEL, verify: bool = True) -> StrengthenedContract:
    """Simplify the added formula under the function's precondition."""
    fun = prog.fun(contract.function)
    assumed = mf_conjuncts(fun.pre) if fun.pre is not None else []
    originals = mf_conjuncts(contract.original)
    conjs = simplify_conjuncts(originals + list(contract.added), assumed,
                               prog=prog, scope=_contract_scope(fun), depth=depth,
                               int_range=int_range, fuel=fuel, keep=originals,
                               verify=verify)
    for o in originals:
        if not any(expr_structurally_equal(o, c) for c in conjs):
            raise StrengthenError("declared postcondition lost during simplification")
    added = conjs[len(originals):]
    return StrengthenedContract(contract.function, contract.original, tuple(added))


# ---------------------------------------------------------------------------
# partial strengthening
# ---------------------------------------------------------------------------

def strictly_strengthening(prog: Program, fn: str, added: Sequence[Expr], *,
                           depth: int = 2, int_range: Tuple[int, int] = (-2, 2),
                           fuel: int = DEFAULT_FUEL) -> bool:
    """Some bounded valuation satisfies pre and the old post but not `added`."""
    if not added:
        return False
    fun = prog.fun(fn)
    goal = mf_conj(_merge_foralls(list(added)))
    given = ([fun.pre] if fun.pre is not None else []) + \
            ([fun.post] if fun.post is not None else [])
    return not _holds_everywhere(prog, given, goal, _contract_scope(fun),
                                 depth, int_range, fuel)


Selector = Union[str, Sequence[int]]


def partial_strengthen(contract: StrengthenedContract, selector: Selector, *,
                       recheck: Optional[Callable[[StrengthenedContract], bool]] = None
                       ) -> StrengthenedContract:
    """Restrict the added formula to a selection of its top-level conjuncts.

    `selector` is a list of conjunct indices, or "min" for a greedy mode that
    drops conjuncts left to right while `recheck` accepts the result.
    """
    if isinstance(selector, str):
        if selector != "min":
            raise StrengthenError("unknown selector %r" % selector)
        if recheck is None:
            raise StrengthenError("greedy partial strengthening needs a re-check")
        added = list(contract.added)
        i = 0
        while i < len(added):
            candidate = added[:i] + added[i + 1:]
            if recheck(replace(contract, added=tuple(candidate))):
                added = candidate
            else:
                i += 1
        result = replace(contract, added=tuple(added))
    else:
        idx = list(selector)
        bad = [i for i in idx if not 0 <= i < len(contract.added)]
        if bad:
            raise StrengthenError("selector index out of range: %r" % bad)
        result = replace(contract, added=tuple(contract.added[i] for i in idx))
    if not result.added:
        warnings.warn("partial strengthening of %s selected nothing; contract unchanged"
                      % contract.function)
    return result


def default_partial_recheck(prog: Program, *, depth: int = 2,
                            int_range: Tuple[int, int] = (-2, 2),
                            fuel: int = DEFAULT_FUEL) -> Callable[[StrengthenedContract], bool]:
    """Accept a drop only while the contract stays bounded-valid and the
    added formula still rules out some bounded valuation (otherwise greedy
    dropping would always degenerate to the original contract)."""
    from .minifun import check_contracts_bounded

    def ok(c: StrengthenedContract) -> bool:
        if not strictly_strengthening(prog, c.function, c.added, depth=depth,
                                      int_range=int_range, fuel=fuel):
            return False
        trial = parse_program(splice_posts(prog, {c.function: c.combined}))
        return not check_contracts_bounded(trial, depth=depth, int_range=int_range,
                                           fuel=fuel, functions=[c.function],
                                           max_violations=1)

    return ok


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def emit_annotated_program(program: Program, contracts: Sequence[StrengthenedContract]) -> str:
    """Source text with each contract's ensuring replaced by its combined post."""
    text = splice_posts(program, {c.function: c.combined for c in contracts})
    try:
        reparsed = parse_program(text)
        typecheck(reparsed)
    except Exception as exc:  # surface a backtranslation bug, not user error
        raise StrengthenError("emitted program is ill-formed: %s" % exc) from exc
    for c in contracts:
        got = reparsed.fun(c.function).post
        if got is None or not expr_structurally_equal(got, c.combined):
            raise StrengthenError("round-trip mismatch for %s" % c.function)
    return text


def diff_report(program: Program, contracts: Sequence[StrengthenedContract]) -> str:
    lines: List[str] = []
    for c in contracts:
        old = program.fun(c.function).post
        lines.append("%s:" % c.function)
        lines.append("  - %s" % (format_expr(old) if old is not None else "(none)"))
        lines.append("  + %s" % format_expr(c.combined))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# whole-program driver
# ---------------------------------------------------------------------------

@dataclass
class StrengthenOutcome:
    contracts: List[StrengthenedContract]
    source: str


def strengthen_program(prog: Program, result: TransformResult, model: Model,
                       source_map: SourceMap, *, partial: Optional[str] = None,
                       depth: int = 2, int_range: Tuple[int, int] = (-2, 2),
                       fuel: int = DEFAULT_FUEL, verify: bool = True) -> StrengthenOutcome:
    contracts: List[StrengthenedContract] = []
    seen: Set[str] = set()
    for goal in source_map.goals:
        if goal.function in seen:
            continue
        seen.add(goal.function)
        c = backtranslate(model, result.definitions, source_map, goal.function)
        c = simplify_contract(prog, c, depth=depth, int_range=int_range,
                              fuel=fuel, verify=verify)
        if partial == "min":
            c = partial_strengthen(
                c, "min",
                recheck=default_partial_recheck(prog, depth=depth,
                                                int_range=int_range, fuel=fuel))
        elif partial is not None:
            raise StrengthenError("unknown partial mode %r" % partial)
        contracts.append(c)
    return StrengthenOutcome(contracts, emit_annotated_program(prog, contracts))
