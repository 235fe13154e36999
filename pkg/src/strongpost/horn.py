"""Horn solver interface: SMT-LIB2 emission, model parsing, model checking.

A basic-sort clause system is printed in the HORN fragment, handed to an
external solver subprocess (configured explicitly or through the
STRONGPOST_SOLVER environment variable), and the resulting model — one
define-fun per predicate — is parsed back into constraint expressions.

check_model validates a candidate model against the clause system without
trusting the solver: in bounded mode every clause is checked over a finite
integer window (exhaustively while the assignment count is small, by
fixed-seed sampling beyond that); in exact mode each clause yields one
validity query discharged by the solver.
"""
from __future__ import annotations

import os
import random
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from .ir import (
    BOOL, INT, TRUE, Add, And, Atom, BoolConst, ChcSystem, Clause, Cmp, Ctor, Expr,
    Iff, Implies, IntConst, IrError, Ite, Mul, Not, Or, Sort, Sub, Term, Var,
    compile_constraint, conj, subst_expr,
)


class SolverError(IrError):
    pass


class ModelError(IrError):
    pass


# ---------------------------------------------------------------------------
# SMT-LIB2 emission
# ---------------------------------------------------------------------------

_SMT_CMP = {"=": "=", "!=": "distinct", "=<": "<=", ">=": ">=", "<": "<", ">": ">"}


def smt_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntConst):
        return str(t.value) if t.value >= 0 else "(- %d)" % -t.value
    if isinstance(t, BoolConst):
        return "true" if t.value else "false"
    raise SolverError("constructor terms cannot be emitted: %s" % (t,))


def smt_expr(e: Expr) -> str:
    if isinstance(e, (Var, IntConst, BoolConst)):
        return smt_term(e)
    if isinstance(e, Add):
        return "(+ %s %s)" % (smt_expr(e.left), smt_expr(e.right))
    if isinstance(e, Sub):
        return "(- %s %s)" % (smt_expr(e.left), smt_expr(e.right))
    if isinstance(e, Mul):
        return "(* %d %s)" % (e.coeff, smt_expr(e.arg))
    if isinstance(e, Cmp):
        s = "(%s %s %s)" % (_SMT_CMP[e.op], smt_expr(e.left), smt_expr(e.right))
        return s
    if isinstance(e, Not):
        return "(not %s)" % smt_expr(e.arg)
    if isinstance(e, And):
        if not e.args:
            return "true"
        return "(and %s)" % " ".join(smt_expr(a) for a in e.args)
    if isinstance(e, Or):
        if not e.args:
            return "false"
        return "(or %s)" % " ".join(smt_expr(a) for a in e.args)
    if isinstance(e, Implies):
        return "(=> %s %s)" % (smt_expr(e.left), smt_expr(e.right))
    if isinstance(e, Iff):
        return "(= %s %s)" % (smt_expr(e.left), smt_expr(e.right))
    if isinstance(e, Ite):
        return "(ite %s %s %s)" % (smt_expr(e.cond), smt_expr(e.then), smt_expr(e.other))
    raise SolverError("unknown expression node %r" % (e,))


def _smt_atom(a: Atom) -> str:
    if not a.args:
        return a.pred
    return "(%s %s)" % (a.pred, " ".join(smt_term(t) for t in a.args))


def _smt_clause(c: Clause) -> str:
    vs = c.vars()
    body_parts = [smt_expr(c.constraint)] if c.constraint != TRUE else []
    body_parts += [_smt_atom(a) for a in c.body]
    head = _smt_atom(c.head) if c.head is not None else "false"
    if not body_parts:
        inner = head
    elif len(body_parts) == 1:
        inner = "(=> %s %s)" % (body_parts[0], head)
    else:
        inner = "(=> (and %s) %s)" % (" ".join(body_parts), head)
    if not vs:
        return "(assert %s)" % inner
    binders = " ".join("(%s %s)" % (v.name, v.sort.name) for v in vs)
    return "(assert (forall (%s) %s))" % (binders, inner)


def emit_horn(sys: ChcSystem, get_model: bool = True) -> str:
    """Print the system as an SMT-LIB2 script in the HORN fragment."""
    for pred, sig in sys.preds.items():
        for s in sig:
            if not s.is_basic():
                raise SolverError("predicate %s has non-basic argument sort %s" % (pred, s))
    lines = ["(set-logic HORN)"]
    for pred, sig in sys.preds.items():
        lines.append("(declare-fun %s (%s) Bool)" % (pred, " ".join(s.name for s in sig)))
    for c in sys.clauses:
        lines.append(_smt_clause(c))
    for g in sys.goals:
        lines.append(_smt_clause(g))
    lines.append("(check-sat)")
    if get_model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# solver subprocess
# ---------------------------------------------------------------------------

@dataclass
class SolverConfig:
    command: Tuple[str, ...]
    timeout: float = 120.0

    @staticmethod
    def from_env(timeout: float = 120.0) -> Optional["SolverConfig"]:
        raw = os.environ.get("STRONGPOST_SOLVER", "").strip()
        if not raw:
            return None
        return SolverConfig(tuple(shlex.split(raw)), timeout)


@dataclass
class SolveResult:
    status: str  # sat | unsat | unknown | timeout | error
    output: str
    elapsed: float

    def model_text(self) -> str:
        lines = self.output.splitlines()
        while lines and lines[0].strip() in ("sat", "unsat", "unknown", "timeout", ""):
            lines = lines[1:]
        return "\n".join(lines)


def run_solver(script: str, config: SolverConfig) -> SolveResult:
    """Feed the script to the solver as a file argument; first token is the verdict."""
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as f:
        f.write(script)
        path = f.name
    t0 = time.monotonic()
    try:
        proc = subprocess.run(
            list(config.command) + [path],
            capture_output=True, text=True, timeout=config.timeout)
    except FileNotFoundError as e:
        raise SolverError("solver executable not found: %s" % e)
    except subprocess.TimeoutExpired:
        return SolveResult("timeout", "timeout after %.0fs" % config.timeout,
                           time.monotonic() - t0)
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass
    elapsed = time.monotonic() - t0
    out = proc.stdout.strip()
    first = out.splitlines()[0].strip() if out else ""
    if first in ("sat", "unsat", "unknown"):
        return SolveResult(first, proc.stdout, elapsed)
    return SolveResult("error", proc.stdout + proc.stderr, elapsed)


invoke = run_solver


def solve_system(sys: ChcSystem, config: SolverConfig) -> SolveResult:
    return run_solver(emit_horn(sys), config)


# ---------------------------------------------------------------------------
# model parsing
# ---------------------------------------------------------------------------

Sexpr = Union[str, List["Sexpr"]]


def parse_sexprs(text: str) -> List[Sexpr]:
    # strip ;-comments, then tokenize parens and atoms
    lines = []
    for line in text.splitlines():
        if ";" in line:
            line = line.split(";", 1)[0]
        lines.append(line)
    text = "\n".join(lines)
    tokens: List[str] = []
    cur = ""
    for ch in text:
        if ch in "()":
            if cur:
                tokens.append(cur)
                cur = ""
            tokens.append(ch)
        elif ch.isspace():
            if cur:
                tokens.append(cur)
                cur = ""
        else:
            cur += ch
    if cur:
        tokens.append(cur)
    out: List[Sexpr] = []
    stack: List[List[Sexpr]] = []
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise ModelError("unbalanced ')' in model text")
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(tok)
    if stack:
        raise ModelError("unbalanced '(' in model text")
    return out


def _inline_lets(e: Sexpr, env: Dict[str, Sexpr]) -> Sexpr:
    if isinstance(e, str):
        return env.get(e, e)
    if e and e[0] == "let":
        if len(e) != 3 or not isinstance(e[1], list):
            raise ModelError("malformed let binding")
        inner = dict(env)
        for b in e[1]:
            if not (isinstance(b, list) and len(b) == 2 and isinstance(b[0], str)):
                raise ModelError("malformed let binding")
            inner[b[0]] = _inline_lets(b[1], env)
        return _inline_lets(e[2], inner)
    return [_inline_lets(x, env) for x in e]


@dataclass
class PredModel:
    pred: str
    params: Tuple[Var, ...]
    body: Expr


Model = Dict[str, PredModel]

_SORT_NAMES = {"Int": INT, "Bool": BOOL}


def _sexpr_to_expr(e: Sexpr, sorts: Dict[str, Sort]) -> Tuple[Expr, Sort]:
    if isinstance(e, str):
        if e == "true":
            return BoolConst(True), BOOL
        if e == "false":
            return BoolConst(False), BOOL
        if e.lstrip("-").isdigit():
            return IntConst(int(e)), INT
        if e in sorts:
            return Var(e, sorts[e]), sorts[e]
        raise ModelError("unbound symbol %r in model body" % e)
    if not e or not isinstance(e[0], str):
        raise ModelError("malformed application %r" % (e,))
    op, args = e[0], e[1:]
    if op == "-" and len(args) == 1:
        inner, s = _sexpr_to_expr(args[0], sorts)
        if isinstance(inner, IntConst):
            return IntConst(-inner.value), INT
        return Sub(IntConst(0), inner), INT
    sub = [_sexpr_to_expr(a, sorts) for a in args]
    if op == "and":
        return conj([x for x, _ in sub]), BOOL
    if op == "or":
        return Or(tuple(x for x, _ in sub)), BOOL
    if op == "not":
        return Not(sub[0][0]), BOOL
    if op == "=>":
        out = sub[-1][0]
        for x, _ in reversed(sub[:-1]):
            out = Implies(x, out)
        return out, BOOL
    if op == "ite":
        return Ite(sub[0][0], sub[1][0], sub[2][0]), sub[1][1]
    if op in ("=", "distinct"):
        x, sx = sub[0]
        y, _ = sub[1]
        if sx == BOOL:
            out2: Expr = Iff(x, y)
        else:
            out2 = Cmp("=", x, y)
        if op == "distinct":
            out2 = Not(out2)
        return out2, BOOL
    if op in ("<=", ">=", "<", ">"):
        mapped = {"<=": "=<", ">=": ">=", "<": "<", ">": ">"}[op]
        return Cmp(mapped, sub[0][0], sub[1][0]), BOOL
    if op == "+":
        out3 = sub[0][0]
        for x, _ in sub[1:]:
            out3 = Add(out3, x)
        return out3, INT
    if op == "-":
        out4 = sub[0][0]
        for x, _ in sub[1:]:
            out4 = Sub(out4, x)
        return out4, INT
    if op == "*":
        x, sx = sub[0]
        y, sy = sub[1]
        if isinstance(x, IntConst):
            return Mul(x.value, y), INT
        if isinstance(y, IntConst):
            return Mul(y.value, x), INT
        raise ModelError("nonlinear multiplication in model body")
    raise ModelError("unsupported operator %r in model body" % op)


def parse_model(text: str, sys: Optional[ChcSystem] = None) -> Model:
    """Parse solver model output: a (model ...) wrapper or a bare define-fun list."""
    forms = parse_sexprs(text)
    defs: List[Sexpr] = []
    for form in forms:
        if isinstance(form, list) and form and form[0] == "model":
            defs.extend(form[1:])
        elif isinstance(form, list) and form and form[0] == "define-fun":
            defs.append(form)
        elif isinstance(form, list) and all(
                isinstance(x, list) and x and x[0] == "define-fun" for x in form):
            defs.extend(form)
    out: Model = {}
    for d in defs:
        if not (isinstance(d, list) and len(d) == 5 and d[0] == "define-fun"):
            raise ModelError("malformed define-fun %r" % (d,))
        _, name, params, ret, body = d
        if not isinstance(name, str) or ret != "Bool" or not isinstance(params, list):
            raise ModelError("model entry %r is not a Bool predicate definition" % (name,))
        pvars: List[Var] = []
        sorts: Dict[str, Sort] = {}
        for p in params:
            if not (isinstance(p, list) and len(p) == 2 and isinstance(p[0], str)
                    and isinstance(p[1], str) and p[1] in _SORT_NAMES):
                raise ModelError("malformed parameter %r in define-fun %s" % (p, name))
            v = Var(p[0], _SORT_NAMES[p[1]])
            pvars.append(v)
            sorts[v.name] = v.sort
        expr, s = _sexpr_to_expr(_inline_lets(body, {}), sorts)
        if s != BOOL:
            raise ModelError("model body for %s is not boolean" % name)
        out[name] = PredModel(name, tuple(pvars), expr)
    if sys is not None:
        for pred, sig in sys.preds.items():
            pm = out.get(pred)
            if pm is None:
                raise ModelError("model is missing predicate %s" % pred)
            if tuple(v.sort for v in pm.params) != tuple(sig):
                raise ModelError("model for %s has signature %s, expected %s"
                                 % (pred, [v.sort.name for v in pm.params],
                                    [s.name for s in sig]))
    return out


def format_model(model: Model) -> str:
    lines = []
    for pm in model.values():
        params = " ".join("(%s %s)" % (v.name, v.sort.name) for v in pm.params)
        lines.append("(define-fun %s (%s) Bool\n  %s)" % (pm.pred, params, smt_expr(pm.body)))
    return "\n".join(lines) + "\n"


def atom_formula(model: Model, a: Atom) -> Expr:
    """The model's constraint for one atom, with arguments substituted in."""
    pm = model.get(a.pred)
    if pm is None:
        raise ModelError("model is missing predicate %s" % a.pred)
    if len(pm.params) != len(a.args):
        raise ModelError("model for %s has arity %d, atom has %d"
                         % (a.pred, len(pm.params), len(a.args)))
    return subst_expr(pm.body, {v.name: t for v, t in zip(pm.params, a.args)})


# ---------------------------------------------------------------------------
# model checking
# ---------------------------------------------------------------------------

@dataclass
class ClauseFailure:
    kind: str  # clause | goal
    index: int
    clause: Clause
    env: Optional[Dict[str, object]] = None  # bounded-mode witness


@dataclass
class ModelCheckResult:
    ok: bool
    mode: str
    failures: List[ClauseFailure]
    checked_assignments: int = 0


def _clause_obligation(c: Clause, model: Model) -> Tuple[List[Expr], Optional[Expr]]:
    """Premises (constraint + body formulas) and head formula (None for goals)."""
    premises = [c.constraint] + [atom_formula(model, a) for a in c.body]
    head = atom_formula(model, c.head) if c.head is not None else None
    return premises, head


def check_model_bounded(sys: ChcSystem, model: Model, int_range: Tuple[int, int] = (-4, 4),
                        cap: int = 10**6, samples: int = 20000, seed: int = 0) -> ModelCheckResult:
    """Every clause must be valid over the integer window; goals must have
    unsatisfiable bodies.  Exhaustive when the assignment space fits the cap."""
    lo, hi = int_range
    failures: List[ClauseFailure] = []
    total = 0
    all_clauses = [("clause", i, c) for i, c in enumerate(sys.clauses)]
    all_clauses += [("goal", i, g) for i, g in enumerate(sys.goals)]
    for kind, idx, c in all_clauses:
        premises, head = _clause_obligation(c, model)
        pre_fns = [compile_constraint(p) for p in premises]
        head_fn = compile_constraint(head) if head is not None else None
        vs = c.vars()
        space = 1
        for v in vs:
            space *= (hi - lo + 1) if v.sort == INT else 2
            if space > cap:
                break

        def envs() -> Iterator[Dict[str, object]]:
            if space <= cap:
                domains = [list(range(lo, hi + 1)) if v.sort == INT else [False, True]
                           for v in vs]
                import itertools
                for combo in itertools.product(*domains):
                    yield dict(zip([v.name for v in vs], combo))
            else:
                rng = random.Random(seed)
                for _ in range(samples):
                    yield {v.name: (rng.randint(lo, hi) if v.sort == INT
                                    else rng.random() < 0.5) for v in vs}

        bad: Optional[Dict[str, object]] = None
        for env in envs():
            total += 1
            if not all(fn(env) for fn in pre_fns):
                continue
            if head_fn is None or not head_fn(env):
                bad = env
                break
        if bad is not None:
            failures.append(ClauseFailure(kind, idx, c, bad))
    return ModelCheckResult(not failures, "bounded", failures, total)


def check_model_exact(sys: ChcSystem, model: Model, config: SolverConfig) -> ModelCheckResult:
    """One validity query per clause: premises ∧ ¬head must be unsatisfiable."""
    failures: List[ClauseFailure] = []
    all_clauses = [("clause", i, c) for i, c in enumerate(sys.clauses)]
    all_clauses += [("goal", i, g) for i, g in enumerate(sys.goals)]
    for kind, idx, c in all_clauses:
        premises, head = _clause_obligation(c, model)
        lines = ["(set-logic ALL)"]
        for v in c.vars():
            lines.append("(declare-const %s %s)" % (v.name, v.sort.name))
        for p in premises:
            if p != TRUE:
                lines.append("(assert %s)" % smt_expr(p))
        if head is not None:
            lines.append("(assert (not %s))" % smt_expr(head))
        lines.append("(check-sat)")
        res = run_solver("\n".join(lines) + "\n", config)
        if res.status != "unsat":
            failures.append(ClauseFailure(kind, idx, c))
    return ModelCheckResult(not failures, "exact", failures)


def check_model(sys: ChcSystem, model: Model, mode: str = "bounded",
                int_range: Tuple[int, int] = (-4, 4), cap: int = 10**6,
                samples: int = 20000, seed: int = 0,
                config: Optional[SolverConfig] = None) -> ModelCheckResult:
    if mode == "bounded":
        return check_model_bounded(sys, model, int_range, cap, samples, seed)
    if mode == "exact":
        if config is None:
            config = SolverConfig.from_env()
        if config is None:
            raise SolverError("exact model checking needs a solver (set STRONGPOST_SOLVER)")
        return check_model_exact(sys, model, config)
    raise ValueError("unknown check mode %r" % mode)
