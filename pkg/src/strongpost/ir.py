"""Core IR for constrained Horn clauses over Bool/Int and list-like data types."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union


class IrError(Exception):
    pass


class SortError(IrError):
    pass


# ---------------------------------------------------------------------------
# sorts
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Sort:
    name: str

    def is_basic(self) -> bool:
        return self.name in ("Bool", "Int")

    def __str__(self) -> str:
        return self.name


BOOL = Sort("Bool")
INT = Sort("Int")


@dataclass(frozen=True)
class AdtDecl:
    """A declared algebraic data type with its constructor signatures."""

    name: str
    constructors: Tuple[Tuple[str, Tuple[Sort, ...]], ...]

    def validate(self) -> None:
        if not self.constructors:
            raise IrError("adt %s has no constructors" % self.name)
        # a well-founded ADT needs at least one non-recursive constructor
        if not any(all(s.name != self.name for s in args) for _, args in self.constructors):
            raise IrError("adt %s has no non-recursive constructor" % self.name)
        names = [c for c, _ in self.constructors]
        if len(set(names)) != len(names):
            raise IrError("adt %s repeats a constructor name" % self.name)

    def ctor_args(self, cname: str) -> Tuple[Sort, ...]:
        for c, args in self.constructors:
            if c == cname:
                return args
        raise IrError("unknown constructor %s of %s" % (cname, self.name))

    @property
    def sort(self) -> Sort:
        return Sort(self.name)


# the built-in monomorphic integer list
LIST = AdtDecl("list", (("nil", ()), ("cons", (INT, Sort("list")))))
LIST_SORT = LIST.sort


# ---------------------------------------------------------------------------
# terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class IntConst:
    value: int

    sort: Sort = INT

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class BoolConst:
    value: bool

    sort: Sort = BOOL

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Ctor:
    adt: str
    name: str
    args: Tuple["Term", ...]

    @property
    def sort(self) -> Sort:
        return Sort(self.adt)


Term = Union[Var, IntConst, BoolConst, Ctor]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif isinstance(t, Ctor):
        for a in t.args:
            yield from term_vars(a)


# ---------------------------------------------------------------------------
# constraints: boolean formulas over linear integer arithmetic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"

    sort: Sort = INT


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"

    sort: Sort = INT


@dataclass(frozen=True)
class Mul:
    """Multiplication by an integer literal; keeps the arithmetic linear."""

    coeff: int
    arg: "Expr"

    sort: Sort = INT


@dataclass(frozen=True)
class Cmp:
    op: str  # = != =< >= < >
    left: "Expr"
    right: "Expr"

    sort: Sort = BOOL


@dataclass(frozen=True)
class Not:
    arg: "Expr"

    sort: Sort = BOOL


@dataclass(frozen=True)
class And:
    args: Tuple["Expr", ...]

    sort: Sort = BOOL


@dataclass(frozen=True)
class Or:
    args: Tuple["Expr", ...]

    sort: Sort = BOOL


@dataclass(frozen=True)
class Implies:
    left: "Expr"
    right: "Expr"

    sort: Sort = BOOL


@dataclass(frozen=True)
class Iff:
    left: "Expr"
    right: "Expr"

    sort: Sort = BOOL


@dataclass(frozen=True)
class Ite:
    cond: "Expr"
    then: "Expr"
    other: "Expr"

    @property
    def sort(self) -> Sort:
        return expr_sort(self.then)


Expr = Union[Var, IntConst, BoolConst, Add, Sub, Mul, Cmp, Not, And, Or, Implies, Iff, Ite]
Constraint = Expr

CMP_OPS = ("=", "!=", "=<", ">=", "<", ">")
NEG_CMP = {"=": "!=", "!=": "=", "=<": ">", ">": "=<", ">=": "<", "<": ">="}


def expr_sort(e: Expr) -> Sort:
    return e.sort


def conj(parts: Sequence[Expr]) -> Expr:
    """Conjunction with flattening; an empty conjunction is true."""
    flat: List[Expr] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.args)
        elif isinstance(p, BoolConst) and p.value:
            continue
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def conjuncts(e: Expr) -> List[Expr]:
    if isinstance(e, And):
        out: List[Expr] = []
        for a in e.args:
            out.extend(conjuncts(a))
        return out
    if isinstance(e, BoolConst) and e.value:
        return []
    return [e]


def negate(e: Expr) -> Expr:
    """Negation with comparisons flipped and double negation removed."""
    if isinstance(e, BoolConst):
        return BoolConst(not e.value)
    if isinstance(e, Not):
        return e.arg
    if isinstance(e, Cmp):
        return Cmp(NEG_CMP[e.op], e.left, e.right)
    return Not(e)


def expr_vars(e: Expr) -> Iterator[Var]:
    if isinstance(e, Var):
        yield e
    elif isinstance(e, (IntConst, BoolConst)):
        return
    elif isinstance(e, (Add, Sub, Cmp, Implies, Iff)):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)
    elif isinstance(e, Mul):
        yield from expr_vars(e.arg)
    elif isinstance(e, Not):
        yield from expr_vars(e.arg)
    elif isinstance(e, (And, Or)):
        for a in e.args:
            yield from expr_vars(a)
    elif isinstance(e, Ite):
        yield from expr_vars(e.cond)
        yield from expr_vars(e.then)
        yield from expr_vars(e.other)
    elif isinstance(e, Ctor):
        raise IrError("constructor term inside a constraint")
    else:
        raise IrError("unknown expression node %r" % (e,))


# ---------------------------------------------------------------------------
# atoms, clauses, systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    pred: str
    args: Tuple[Term, ...]

    def vars(self) -> Iterator[Var]:
        for a in self.args:
            yield from term_vars(a)


@dataclass(frozen=True)
class Clause:
    """head :- constraint, body.  A goal clause has head None (printed false)."""

    head: Optional[Atom]
    constraint: Expr
    body: Tuple[Atom, ...]

    def is_goal(self) -> bool:
        return self.head is None

    def vars(self) -> List[Var]:
        seen: Dict[Var, None] = {}
        if self.head is not None:
            for v in self.head.vars():
                seen.setdefault(v)
        for v in expr_vars(self.constraint):
            seen.setdefault(v)
        for a in self.body:
            for v in a.vars():
                seen.setdefault(v)
        return list(seen)


@dataclass
class ChcSystem:
    adts: Dict[str, AdtDecl] = field(default_factory=dict)
    preds: Dict[str, Tuple[Sort, ...]] = field(default_factory=dict)
    clauses: List[Clause] = field(default_factory=list)
    goals: List[Clause] = field(default_factory=list)

    def all_clauses(self) -> List[Clause]:
        return self.clauses + self.goals

    def clauses_of(self, pred: str) -> List[Clause]:
        return [c for c in self.clauses if c.head is not None and c.head.pred == pred]

    def sort_decl(self, sort: Sort) -> AdtDecl:
        if sort.name not in self.adts:
            raise IrError("unknown adt sort %s" % sort)
        return self.adts[sort.name]

    def validate(self) -> None:
        for adt in self.adts.values():
            adt.validate()
        for c in self.all_clauses():
            self._validate_clause(c)

    def _validate_clause(self, c: Clause) -> None:
        env: Dict[str, Sort] = {}

        def see(v: Var) -> None:
            prev = env.setdefault(v.name, v.sort)
            if prev != v.sort:
                raise SortError("variable %s used at sorts %s and %s" % (v.name, prev, v.sort))

        def check_term(t: Term, want: Sort, where: str) -> None:
            if isinstance(t, Var):
                if t.sort != want:
                    raise SortError("in %s: %s has sort %s, expected %s" % (where, t.name, t.sort, want))
                see(t)
            elif isinstance(t, IntConst):
                if want != INT:
                    raise SortError("in %s: integer literal where %s expected" % (where, want))
            elif isinstance(t, BoolConst):
                if want != BOOL:
                    raise SortError("in %s: boolean literal where %s expected" % (where, want))
            elif isinstance(t, Ctor):
                decl = self.sort_decl(Sort(t.adt))
                if Sort(t.adt) != want:
                    raise SortError("in %s: %s term where %s expected" % (where, t.adt, want))
                argsorts = decl.ctor_args(t.name)
                if len(argsorts) != len(t.args):
                    raise SortError("in %s: constructor %s arity" % (where, t.name))
                for a, s in zip(t.args, argsorts):
                    check_term(a, s, where)

        def check_atom(a: Atom) -> None:
            if a.pred not in self.preds:
                raise SortError("undeclared predicate %s" % a.pred)
            sig = self.preds[a.pred]
            if len(sig) != len(a.args):
                raise SortError("atom %s/%d used with %d args" % (a.pred, len(sig), len(a.args)))
            for t, s in zip(a.args, sig):
                check_term(t, s, "atom " + a.pred)

        if c.head is not None:
            check_atom(c.head)
        for a in c.body:
            check_atom(a)
        s = check_expr_sort(c.constraint, see)
        if s != BOOL:
            raise SortError("clause constraint is not boolean")


def check_expr_sort(e: Expr, see=None) -> Sort:
    def go(e: Expr) -> Sort:
        if isinstance(e, Var):
            if not e.sort.is_basic():
                raise SortError("constraint variable %s has non-basic sort %s" % (e.name, e.sort))
            if see is not None:
                see(e)
            return e.sort
        if isinstance(e, IntConst):
            return INT
        if isinstance(e, BoolConst):
            return BOOL
        if isinstance(e, (Add, Sub)):
            if go(e.left) != INT or go(e.right) != INT:
                raise SortError("arithmetic on non-integers")
            return INT
        if isinstance(e, Mul):
            if go(e.arg) != INT:
                raise SortError("arithmetic on non-integers")
            return INT
        if isinstance(e, Cmp):
            ls, rs = go(e.left), go(e.right)
            if ls != rs:
                raise SortError("comparison between %s and %s" % (ls, rs))
            if e.op not in ("=", "!=") and ls != INT:
                raise SortError("ordering on non-integers")
            return BOOL
        if isinstance(e, Not):
            if go(e.arg) != BOOL:
                raise SortError("negation of non-boolean")
            return BOOL
        if isinstance(e, (And, Or)):
            for a in e.args:
                if go(a) != BOOL:
                    raise SortError("connective over non-boolean")
            return BOOL
        if isinstance(e, (Implies, Iff)):
            if go(e.left) != BOOL or go(e.right) != BOOL:
                raise SortError("connective over non-boolean")
            return BOOL
        if isinstance(e, Ite):
            if go(e.cond) != BOOL:
                raise SortError("ite condition not boolean")
            ts, os_ = go(e.then), go(e.other)
            if ts != os_:
                raise SortError("ite branches disagree")
            return ts
        raise IrError("unknown expression node %r" % (e,))

    return go(e)


# ---------------------------------------------------------------------------
# substitution and unification
# ---------------------------------------------------------------------------

Binding = Dict[str, Term]


def subst_term(t: Term, b: Binding) -> Term:
    if isinstance(t, Var):
        r = b.get(t.name)
        return r if r is not None else t
    if isinstance(t, Ctor):
        return Ctor(t.adt, t.name, tuple(subst_term(a, b) for a in t.args))
    return t


def subst_expr(e: Expr, b: Binding) -> Expr:
    if isinstance(e, Var):
        r = b.get(e.name)
        if r is None:
            return e
        if isinstance(r, Ctor):
            raise IrError("cannot substitute constructor term for constraint variable %s" % e.name)
        return r
    if isinstance(e, (IntConst, BoolConst)):
        return e
    if isinstance(e, Add):
        return Add(subst_expr(e.left, b), subst_expr(e.right, b))
    if isinstance(e, Sub):
        return Sub(subst_expr(e.left, b), subst_expr(e.right, b))
    if isinstance(e, Mul):
        return Mul(e.coeff, subst_expr(e.arg, b))
    if isinstance(e, Cmp):
        return Cmp(e.op, subst_expr(e.left, b), subst_expr(e.right, b))
    if isinstance(e, Not):
        return Not(subst_expr(e.arg, b))
    if isinstance(e, And):
        return And(tuple(subst_expr(a, b) for a in e.args))
    if isinstance(e, Or):
        return Or(tuple(subst_expr(a, b) for a in e.args))
    if isinstance(e, Implies):
        return Implies(subst_expr(e.left, b), subst_expr(e.right, b))
    if isinstance(e, Iff):
        return Iff(subst_expr(e.left, b), subst_expr(e.right, b))
    if isinstance(e, Ite):
        return Ite(subst_expr(e.cond, b), subst_expr(e.then, b), subst_expr(e.other, b))
    raise IrError("unknown expression node %r" % (e,))


def subst_atom(a: Atom, b: Binding) -> Atom:
    return Atom(a.pred, tuple(subst_term(t, b) for t in a.args))


def substitute(c: Clause, b: Binding) -> Clause:
    """Simultaneous substitution over a clause; all clause vars are free."""
    head = None if c.head is None else subst_atom(c.head, b)
    return Clause(head, subst_expr(c.constraint, b), tuple(subst_atom(a, b) for a in c.body))


def unify_terms(t1: Term, t2: Term, env: Binding) -> Optional[Binding]:
    """Syntactic unification; both sides may contain variables."""

    def walk(t: Term) -> Term:
        while isinstance(t, Var) and t.name in env:
            t = env[t.name]
        return t

    def occurs(name: str, t: Term) -> bool:
        t = walk(t)
        if isinstance(t, Var):
            return t.name == name
        if isinstance(t, Ctor):
            return any(occurs(name, a) for a in t.args)
        return False

    def go(a: Term, b2: Term) -> bool:
        a, b2 = walk(a), walk(b2)
        if isinstance(a, Var) and isinstance(b2, Var) and a.name == b2.name:
            return True
        if isinstance(a, Var):
            if a.sort != b2.sort:
                return False
            if occurs(a.name, b2):
                return False
            env[a.name] = b2
            return True
        if isinstance(b2, Var):
            return go(b2, a)
        if isinstance(a, IntConst) and isinstance(b2, IntConst):
            return a.value == b2.value
        if isinstance(a, BoolConst) and isinstance(b2, BoolConst):
            return a.value == b2.value
        if isinstance(a, Ctor) and isinstance(b2, Ctor):
            if a.adt != b2.adt or a.name != b2.name:
                return False
            return all(go(x, y) for x, y in zip(a.args, b2.args))
        return False

    env = dict(env)
    if go(t1, t2):
        return env
    return None


def resolve(b: Binding) -> Binding:
    """Chase variable chains so every image is fully substituted."""
    out: Binding = {}
    for k in b:
        t = b[k]
        prev = None
        while prev != t:
            prev = t
            t = subst_term(t, b)
        out[k] = t
    return out


# ---------------------------------------------------------------------------
# constraint evaluation
# ---------------------------------------------------------------------------

def eval_expr(e: Expr, env: Dict[str, object]):
    """Reference evaluator for ground constraint instances."""
    if isinstance(e, Var):
        if e.name not in env:
            raise IrError("unbound variable %s" % e.name)
        return env[e.name]
    if isinstance(e, IntConst):
        return e.value
    if isinstance(e, BoolConst):
        return e.value
    if isinstance(e, Add):
        return eval_expr(e.left, env) + eval_expr(e.right, env)
    if isinstance(e, Sub):
        return eval_expr(e.left, env) - eval_expr(e.right, env)
    if isinstance(e, Mul):
        return e.coeff * eval_expr(e.arg, env)
    if isinstance(e, Cmp):
        l, r = eval_expr(e.left, env), eval_expr(e.right, env)
        if e.op == "=":
            return l == r
        if e.op == "!=":
            return l != r
        if e.op == "=<":
            return l <= r
        if e.op == ">=":
            return l >= r
        if e.op == "<":
            return l < r
        if e.op == ">":
            return l > r
        raise IrError("bad comparison op %s" % e.op)
    if isinstance(e, Not):
        return not eval_expr(e.arg, env)
    if isinstance(e, And):
        return all(eval_expr(a, env) for a in e.args)
    if isinstance(e, Or):
        return any(eval_expr(a, env) for a in e.args)
    if isinstance(e, Implies):
        return (not eval_expr(e.left, env)) or eval_expr(e.right, env)
    if isinstance(e, Iff):
        return eval_expr(e.left, env) == eval_expr(e.right, env)
    if isinstance(e, Ite):
        return eval_expr(e.then, env) if eval_expr(e.cond, env) else eval_expr(e.other, env)
    raise IrError("unknown expression node %r" % (e,))


def eval_constraint(c: Expr, env: Dict[str, object]) -> bool:
    v = eval_expr(c, env)
    if not isinstance(v, bool):
        raise SortError("constraint evaluated to a non-boolean")
    return v


_PY_CMP = {"=": "==", "!=": "!=", "=<": "<=", ">=": ">=", "<": "<", ">": ">"}


def _expr_to_py(e: Expr) -> str:
    if isinstance(e, Var):
        return "env[%r]" % e.name
    if isinstance(e, IntConst):
        return "(%d)" % e.value
    if isinstance(e, BoolConst):
        return "True" if e.value else "False"
    if isinstance(e, Add):
        return "(%s + %s)" % (_expr_to_py(e.left), _expr_to_py(e.right))
    if isinstance(e, Sub):
        return "(%s - %s)" % (_expr_to_py(e.left), _expr_to_py(e.right))
    if isinstance(e, Mul):
        return "(%d * %s)" % (e.coeff, _expr_to_py(e.arg))
    if isinstance(e, Cmp):
        return "(%s %s %s)" % (_expr_to_py(e.left), _PY_CMP[e.op], _expr_to_py(e.right))
    if isinstance(e, Not):
        return "(not %s)" % _expr_to_py(e.arg)
    if isinstance(e, And):
        if not e.args:
            return "True"
        return "(" + " and ".join(_expr_to_py(a) for a in e.args) + ")"
    if isinstance(e, Or):
        if not e.args:
            return "False"
        return "(" + " or ".join(_expr_to_py(a) for a in e.args) + ")"
    if isinstance(e, Implies):
        return "((not %s) or %s)" % (_expr_to_py(e.left), _expr_to_py(e.right))
    if isinstance(e, Iff):
        return "(%s == %s)" % (_expr_to_py(e.left), _expr_to_py(e.right))
    if isinstance(e, Ite):
        return "(%s if %s else %s)" % (_expr_to_py(e.then), _expr_to_py(e.cond), _expr_to_py(e.other))
    raise IrError("unknown expression node %r" % (e,))


def compile_constraint(c: Expr):
    """Compile a constraint into a fast env -> bool function."""
    code = "lambda env: bool(%s)" % _expr_to_py(c)
    return eval(code, {}, {})  # noqa: S307 - code is generated from the IR only


# ---------------------------------------------------------------------------
# fresh names
# ---------------------------------------------------------------------------

class NameSupply:
    """Deterministic fresh-name generator that avoids a set of taken names."""

    def __init__(self, taken: Iterable[str] = ()):  # noqa: D401
        self.taken: Set[str] = set(taken)

    def reserve(self, names: Iterable[str]) -> None:
        self.taken.update(names)

    def fresh(self, base: str) -> str:
        base = re.sub(r"\d+$", "", base) or "V"
        if base not in self.taken:
            self.taken.add(base)
            return base
        i = 1
        while "%s%d" % (base, i) in self.taken:
            i += 1
        name = "%s%d" % (base, i)
        self.taken.add(name)
        return name


def clause_var_names(c: Clause) -> Set[str]:
    return {v.name for v in c.vars()}


def rename_apart(c: Clause, supply: NameSupply) -> Clause:
    b: Binding = {}
    for v in c.vars():
        b[v.name] = Var(supply.fresh(v.name), v.sort)
    return substitute(c, b)
