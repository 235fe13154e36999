"""MiniFun: a small call-by-value functional language with function contracts.

Grammar sketch::

    def name(p: T, ...): T = {
      require(expr)        // optional precondition
      expr                 // body
    } ensuring { res => expr }   // optional postcondition

Types: Int, Bool, List (a built-in list of Int), and 2+-tuples of these.
Expressions: literals, variables, nil/cons, tuples and ._k projections,
if/else, match over nil/cons, calls, ! - * + - comparisons && || ==>, and
`forall((n: Int) => e)` — the quantifier form used by emitted contracts.

The interpreter ignores contracts (pure semantics, fuel-bounded);
check_contracts_bounded enumerates bounded inputs and checks pre => post.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union


class MiniFunError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        if line:
            msg = "%d:%d: %s" % (line, col, msg)
        super().__init__(msg)
        self.line = line
        self.col = col


class ParseError(MiniFunError):
    pass


class TypeError_(MiniFunError):
    pass


class EvalError(MiniFunError):
    pass


class Diverged(Exception):
    """Raised when the fuel budget is exhausted."""


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TInt:
    def __str__(self) -> str:
        return "Int"


@dataclass(frozen=True)
class TBool:
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class TList:
    def __str__(self) -> str:
        return "List"


@dataclass(frozen=True)
class TTuple:
    items: Tuple["Type", ...]

    def __str__(self) -> str:
        return "(%s)" % ", ".join(str(t) for t in self.items)


Type = Union[TInt, TBool, TList, TTuple]
INT_T, BOOL_T, LIST_T = TInt(), TBool(), TList()


# ---------------------------------------------------------------------------
# ast (every node carries a source span for diagnostics and splicing)
# ---------------------------------------------------------------------------

Span = Tuple[int, int]


@dataclass(frozen=True)
class EInt:
    value: int
    span: Span = (0, 0)


@dataclass(frozen=True)
class EBool:
    value: bool
    span: Span = (0, 0)


@dataclass(frozen=True)
class EVar:
    name: str
    span: Span = (0, 0)


@dataclass(frozen=True)
class ECtor:
    name: str  # nil | cons
    args: Tuple["Expr", ...]
    span: Span = (0, 0)


@dataclass(frozen=True)
class ETuple:
    items: Tuple["Expr", ...]
    span: Span = (0, 0)


@dataclass(frozen=True)
class EProj:
    base: "Expr"
    index: int  # 1-based, as written (._1)
    span: Span = (0, 0)


@dataclass(frozen=True)
class ECall:
    fn: str
    args: Tuple["Expr", ...]
    span: Span = (0, 0)


@dataclass(frozen=True)
class EUnary:
    op: str  # ! -
    arg: "Expr"
    span: Span = (0, 0)


@dataclass(frozen=True)
class EBin:
    op: str  # && || ==> == != <= >= < > + - *
    left: "Expr"
    right: "Expr"
    span: Span = (0, 0)


@dataclass(frozen=True)
class EIf:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    span: Span = (0, 0)


@dataclass(frozen=True)
class ECase:
    ctor: str  # nil | cons
    binders: Tuple[str, ...]
    body: "Expr"


@dataclass(frozen=True)
class EMatch:
    scrutinee: "Expr"
    cases: Tuple[ECase, ...]
    span: Span = (0, 0)


@dataclass(frozen=True)
class EForall:
    binder: str
    btype: Type
    body: "Expr"
    span: Span = (0, 0)


Expr = Union[EInt, EBool, EVar, ECtor, ETuple, EProj, ECall, EUnary, EBin, EIf, EMatch, EForall]


@dataclass
class FunDef:
    name: str
    params: List[Tuple[str, Type]]
    ret: Type
    pre: Optional[Expr]
    body: Expr
    post: Optional[Expr]  # over params and `res`
    span: Span = (0, 0)
    post_span: Optional[Span] = None  # span of the post expression text


@dataclass
class Program:
    functions: Dict[str, FunDef]
    source: str = ""

    def fun(self, name: str) -> FunDef:
        if name not in self.functions:
            raise MiniFunError("unknown function %s" % name)
        return self.functions[name]


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_MF_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<proj>\._\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==>|==|!=|<=|>=|&&|\|\||=>|[(){}:,=<>!+\-*])
    """,
    re.VERBOSE | re.DOTALL,
)

_KEYWORDS = {
    "def", "require", "ensuring", "match", "case", "if", "else",
    "true", "false", "nil", "cons", "forall", "Int", "Bool", "List",
}


@dataclass(frozen=True)
class MfToken:
    kind: str  # int ident proj op eof
    text: str
    start: int
    end: int


def _mf_tokenize(text: str) -> List[MfToken]:
    toks: List[MfToken] = []
    pos = 0
    while pos < len(text):
        m = _MF_TOKEN_RE.match(text, pos)
        if m is None:
            line = text.count("\n", 0, pos) + 1
            col = pos - text.rfind("\n", 0, pos)
            raise ParseError("unexpected character %r" % text[pos], line, col)
        kind = m.lastgroup or ""
        if kind not in ("ws", "lcomment", "bcomment"):
            toks.append(MfToken(kind, m.group(), pos, m.end()))
        pos = m.end()
    toks.append(MfToken("eof", "", len(text), len(text)))
    return toks


def _pos_of(text: str, offset: int) -> Tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - text.rfind("\n", 0, offset)
    return line, col


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _MfParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _mf_tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> MfToken:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> MfToken:
        t = self.toks[self.i]
        self.i += 1
        return t

    def err(self, msg: str, tok: Optional[MfToken] = None) -> ParseError:
        tok = tok or self.peek()
        line, col = _pos_of(self.text, tok.start)
        return ParseError(msg, line, col)

    def expect(self, text: str) -> MfToken:
        t = self.next()
        if t.text != text:
            raise self.err("expected %r, found %r" % (text, t.text or "end of input"), t)
        return t

    def expect_ident(self) -> MfToken:
        t = self.next()
        if t.kind != "ident" or t.text in _KEYWORDS:
            raise self.err("expected an identifier, found %r" % (t.text or "end of input"), t)
        if not t.text[0].islower():
            raise self.err("identifiers must start with a lowercase letter: %r" % t.text, t)
        return t

    # -- program ------------------------------------------------------------

    def parse_program(self) -> Program:
        funs: Dict[str, FunDef] = {}
        while self.peek().kind != "eof":
            f = self.parse_fundef()
            if f.name in funs:
                raise self.err("function %s defined twice" % f.name)
            funs[f.name] = f
        return Program(funs, self.text)

    def parse_fundef(self) -> FunDef:
        start = self.expect("def")
        name = self.expect_ident().text
        self.expect("(")
        params: List[Tuple[str, Type]] = []
        if self.peek().text != ")":
            while True:
                pname = self.expect_ident().text
                self.expect(":")
                params.append((pname, self.parse_type()))
                if self.peek().text != ",":
                    break
                self.next()
        self.expect(")")
        self.expect(":")
        ret = self.parse_type()
        self.expect("=")
        self.expect("{")
        pre: Optional[Expr] = None
        if self.peek().text == "require":
            self.next()
            self.expect("(")
            pre = self.parse_expr()
            self.expect(")")
        body = self.parse_expr()
        self.expect("}")
        post: Optional[Expr] = None
        post_span: Optional[Span] = None
        end = self.toks[self.i - 1].end
        if self.peek().text == "ensuring":
            self.next()
            self.expect("{")
            binder = self.expect_ident()
            if binder.text != "res":
                raise self.err("the postcondition binder must be named res", binder)
            self.expect("=>")
            post = self.parse_expr()
            post_span = post.span
            end = self.expect("}").end
        return FunDef(name, params, ret, pre, body, post, (start.start, end), post_span)

    def parse_type(self) -> Type:
        t = self.next()
        if t.text == "Int":
            return INT_T
        if t.text == "Bool":
            return BOOL_T
        if t.text == "List":
            return LIST_T
        if t.text == "(":
            items = [self.parse_type()]
            while self.peek().text == ",":
                self.next()
                items.append(self.parse_type())
            self.expect(")")
            if len(items) < 2:
                raise self.err("tuple types need at least two components", t)
            return TTuple(tuple(items))
        raise self.err("expected a type, found %r" % t.text, t)

    # -- expressions ----------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self.parse_implies()

    def parse_implies(self) -> Expr:
        e = self.parse_or()
        if self.peek().text == "==>":
            t = self.next()
            rhs = self.parse_implies()
            return EBin("==>", e, rhs, (e.span[0], rhs.span[1]))
        return e

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.peek().text == "||":
            self.next()
            r = self.parse_and()
            e = EBin("||", e, r, (e.span[0], r.span[1]))
        return e

    def parse_and(self) -> Expr:
        e = self.parse_cmp()
        while self.peek().text == "&&":
            self.next()
            r = self.parse_cmp()
            e = EBin("&&", e, r, (e.span[0], r.span[1]))
        return e

    def parse_cmp(self) -> Expr:
        e = self.parse_add()
        if self.peek().text in ("==", "!=", "<=", ">=", "<", ">"):
            op = self.next().text
            r = self.parse_add()
            return EBin(op, e, r, (e.span[0], r.span[1]))
        return e

    def parse_add(self) -> Expr:
        e = self.parse_mul()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            r = self.parse_mul()
            e = EBin(op, e, r, (e.span[0], r.span[1]))
        return e

    def parse_mul(self) -> Expr:
        e = self.parse_unary()
        while self.peek().text == "*":
            self.next()
            r = self.parse_unary()
            e = EBin("*", e, r, (e.span[0], r.span[1]))
        return e

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.text in ("!", "-"):
            self.next()
            arg = self.parse_unary()
            if t.text == "-" and isinstance(arg, EInt):
                return EInt(-arg.value, (t.start, arg.span[1]))
            return EUnary(t.text, arg, (t.start, arg.span[1]))
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while self.peek().kind == "proj":
            t = self.next()
            e = EProj(e, int(t.text[2:]), (e.span[0], t.end))
        return e

    def parse_primary(self) -> Expr:
        t = self.next()
        if t.kind == "int":
            return EInt(int(t.text), (t.start, t.end))
        if t.text == "true":
            return EBool(True, (t.start, t.end))
        if t.text == "false":
            return EBool(False, (t.start, t.end))
        if t.text == "nil":
            return ECtor("nil", (), (t.start, t.end))
        if t.text == "cons":
            self.expect("(")
            a = self.parse_expr()
            self.expect(",")
            b = self.parse_expr()
            end = self.expect(")").end
            return ECtor("cons", (a, b), (t.start, end))
        if t.text == "if":
            self.expect("(")
            c = self.parse_expr()
            self.expect(")")
            then = self.parse_expr()
            self.expect("else")
            other = self.parse_expr()
            return EIf(c, then, other, (t.start, other.span[1]))
        if t.text == "match":
            scrut = self.parse_expr()
            self.expect("{")
            cases: List[ECase] = []
            while self.peek().text == "case":
                self.next()
                pt = self.next()
                if pt.text == "nil":
                    binders: Tuple[str, ...] = ()
                elif pt.text == "cons":
                    self.expect("(")
                    b1 = self.expect_ident().text
                    self.expect(",")
                    b2 = self.expect_ident().text
                    self.expect(")")
                    if b1 == b2:
                        raise self.err("pattern binders must be distinct", pt)
                    binders = (b1, b2)
                else:
                    raise self.err("expected a nil or cons pattern, found %r" % pt.text, pt)
                self.expect("=>")
                cases.append(ECase(pt.text, binders, self.parse_expr()))
            end = self.expect("}").end
            return EMatch(scrut, tuple(cases), (t.start, end))
        if t.text == "forall":
            self.expect("(")
            self.expect("(")
            binder = self.expect_ident().text
            self.expect(":")
            btype = self.parse_type()
            self.expect(")")
            self.expect("=>")
            body = self.parse_expr()
            end = self.expect(")").end
            return EForall(binder, btype, body, (t.start, end))
        if t.kind == "ident" and t.text not in _KEYWORDS:
            if self.peek().text == "(":
                self.next()
                args: List[Expr] = []
                if self.peek().text != ")":
                    args.append(self.parse_expr())
                    while self.peek().text == ",":
                        self.next()
                        args.append(self.parse_expr())
                end = self.expect(")").end
                return ECall(t.text, tuple(args), (t.start, end))
            return EVar(t.text, (t.start, t.end))
        if t.text == "(":
            items = [self.parse_expr()]
            while self.peek().text == ",":
                self.next()
                items.append(self.parse_expr())
            end = self.expect(")").end
            if len(items) == 1:
                return items[0]
            return ETuple(tuple(items), (t.start, end))
        raise self.err("unexpected token %r" % (t.text or "end of input"), t)


def parse_program(text: str) -> Program:
    prog = _MfParser(text).parse_program()
    typecheck(prog)
    return prog


def parse_expr_text(text: str) -> Expr:
    """Parse a standalone expression (used for golden comparisons)."""
    p = _MfParser(text)
    e = p.parse_expr()
    if p.peek().kind != "eof":
        raise p.err("trailing input after expression")
    return e


# ---------------------------------------------------------------------------
# typechecker
# ---------------------------------------------------------------------------

def typecheck(prog: Program) -> None:
    sigs = {f.name: f for f in prog.functions.values()}
    for f in prog.functions.values():
        seen: Set[str] = set()
        for p, _ in f.params:
            if p in seen:
                raise TypeError_("function %s repeats parameter %s" % (f.name, p))
            seen.add(p)
        env = dict(f.params)
        tc = _TypeChecker(prog, sigs)
        got = tc.check(f.body, env)
        if got != f.ret:
            raise TypeError_("function %s declares %s but its body has type %s" % (f.name, f.ret, got))
        if f.pre is not None and tc.check(f.pre, env) != BOOL_T:
            raise TypeError_("precondition of %s is not boolean" % f.name)
        if f.post is not None:
            env_post = dict(env)
            env_post["res"] = f.ret
            if tc.check(f.post, env_post) != BOOL_T:
                raise TypeError_("postcondition of %s is not boolean" % f.name)


class _TypeChecker:
    def __init__(self, prog: Program, sigs: Dict[str, FunDef]):
        self.prog = prog
        self.sigs = sigs

    def fail(self, msg: str, e: Expr) -> TypeError_:
        line, col = _pos_of(self.prog.source, e.span[0]) if self.prog.source else (0, 0)
        return TypeError_(msg, line, col)

    def check(self, e: Expr, env: Dict[str, Type]) -> Type:
        if isinstance(e, EInt):
            return INT_T
        if isinstance(e, EBool):
            return BOOL_T
        if isinstance(e, EVar):
            if e.name not in env:
                raise self.fail("unknown identifier %s" % e.name, e)
            return env[e.name]
        if isinstance(e, ECtor):
            if e.name == "nil":
                return LIST_T
            if self.check(e.args[0], env) != INT_T:
                raise self.fail("cons head must be Int", e)
            if self.check(e.args[1], env) != LIST_T:
                raise self.fail("cons tail must be List", e)
            return LIST_T
        if isinstance(e, ETuple):
            return TTuple(tuple(self.check(x, env) for x in e.items))
        if isinstance(e, EProj):
            bt = self.check(e.base, env)
            if not isinstance(bt, TTuple):
                raise self.fail("._%d applied to non-tuple (%s)" % (e.index, bt), e)
            if not 1 <= e.index <= len(bt.items):
                raise self.fail("tuple has no component %d" % e.index, e)
            return bt.items[e.index - 1]
        if isinstance(e, ECall):
            if e.fn not in self.sigs:
                raise self.fail("unknown identifier %s" % e.fn, e)
            sig = self.sigs[e.fn]
            if len(e.args) != len(sig.params):
                raise self.fail("%s takes %d arguments, got %d" % (e.fn, len(sig.params), len(e.args)), e)
            for a, (pn, pt) in zip(e.args, sig.params):
                at = self.check(a, env)
                if at != pt:
                    raise self.fail("argument %s of %s expects %s, got %s" % (pn, e.fn, pt, at), e)
            return sig.ret
        if isinstance(e, EUnary):
            at = self.check(e.arg, env)
            if e.op == "!":
                if at != BOOL_T:
                    raise self.fail("! applied to %s" % at, e)
                return BOOL_T
            if at != INT_T:
                raise self.fail("unary - applied to %s" % at, e)
            return INT_T
        if isinstance(e, EBin):
            lt, rt = self.check(e.left, env), self.check(e.right, env)
            if e.op in ("&&", "||", "==>"):
                if lt != BOOL_T or rt != BOOL_T:
                    raise self.fail("%s needs boolean operands" % e.op, e)
                return BOOL_T
            if e.op in ("==", "!="):
                if lt != rt or not isinstance(lt, (TInt, TBool)):
                    raise self.fail("%s compares values of the same basic type (got %s, %s)" % (e.op, lt, rt), e)
                return BOOL_T
            if e.op in ("<=", ">=", "<", ">"):
                if lt != INT_T or rt != INT_T:
                    raise self.fail("%s needs integer operands" % e.op, e)
                return BOOL_T
            if lt != INT_T or rt != INT_T:
                raise self.fail("%s needs integer operands" % e.op, e)
            return INT_T
        if isinstance(e, EIf):
            if self.check(e.cond, env) != BOOL_T:
                raise self.fail("if condition must be Bool", e)
            tt, ot = self.check(e.then, env), self.check(e.other, env)
            if tt != ot:
                raise self.fail("if branches have types %s and %s" % (tt, ot), e)
            return tt
        if isinstance(e, EMatch):
            if self.check(e.scrutinee, env) != LIST_T:
                raise self.fail("match scrutinee must be List", e)
            ctors = [c.ctor for c in e.cases]
            if len(set(ctors)) != len(ctors):
                raise self.fail("match has overlapping patterns", e)
            if set(ctors) != {"nil", "cons"}:
                missing = {"nil", "cons"} - set(ctors)
                raise self.fail("non-exhaustive match: missing %s" % ", ".join(sorted(missing)), e)
            result: Optional[Type] = None
            for c in e.cases:
                env2 = dict(env)
                if c.ctor == "cons":
                    env2[c.binders[0]] = INT_T
                    env2[c.binders[1]] = LIST_T
                ct = self.check(c.body, env2)
                if result is None:
                    result = ct
                elif ct != result:
                    raise self.fail("match arms have types %s and %s" % (result, ct), e)
            assert result is not None
            return result
        if isinstance(e, EForall):
            if e.btype != INT_T:
                raise self.fail("forall binders must have type Int", e)
            env2 = dict(env)
            env2[e.binder] = INT_T
            if self.check(e.body, env2) != BOOL_T:
                raise self.fail("forall body must be Bool", e)
            return BOOL_T
        raise self.fail("bad expression", e)  # pragma: no cover


def expr_type(prog: Program, fn: str, e: Expr, with_res: bool = False) -> Type:
    f = prog.fun(fn)
    env = dict(f.params)
    if with_res:
        env["res"] = f.ret
    return _TypeChecker(prog, {g.name: g for g in prog.functions.values()}).check(e, env)


# ---------------------------------------------------------------------------
# interpreter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VTuple:
    items: Tuple["Value", ...]


Value = Union[int, bool, Tuple[int, ...], VTuple]

DEFAULT_FUEL = 10**5
QUANT_RANGE = (-2, 2)  # window used when eval meets a forall


class _Interp:
    def __init__(self, prog: Program, fuel: int, quant_range: Tuple[int, int] = QUANT_RANGE):
        self.prog = prog
        self.fuel = fuel
        self.quant_range = quant_range

    def call(self, fn: str, args: Sequence[Value]) -> Value:
        f = self.prog.fun(fn)
        if len(args) != len(f.params):
            raise EvalError("%s takes %d arguments" % (fn, len(f.params)))
        self.fuel -= 1
        if self.fuel < 0:
            raise Diverged()
        env = {p: v for (p, _), v in zip(f.params, args)}
        return self.eval(f.body, env)

    def eval(self, e: Expr, env: Dict[str, Value]) -> Value:
        if isinstance(e, EInt):
            return e.value
        if isinstance(e, EBool):
            return e.value
        if isinstance(e, EVar):
            if e.name not in env:
                raise EvalError("unbound variable %s" % e.name)
            return env[e.name]
        if isinstance(e, ECtor):
            if e.name == "nil":
                return ()
            h = self.eval(e.args[0], env)
            t = self.eval(e.args[1], env)
            return (h,) + t  # type: ignore[operator]
        if isinstance(e, ETuple):
            return VTuple(tuple(self.eval(x, env) for x in e.items))
        if isinstance(e, EProj):
            v = self.eval(e.base, env)
            assert isinstance(v, VTuple)
            return v.items[e.index - 1]
        if isinstance(e, ECall):
            args = [self.eval(a, env) for a in e.args]
            return self.call(e.fn, args)
        if isinstance(e, EUnary):
            v = self.eval(e.arg, env)
            return (not v) if e.op == "!" else -v  # type: ignore[operator]
        if isinstance(e, EBin):
            # && and || short-circuit; everything else is strict
            if e.op == "&&":
                return self.eval(e.left, env) and self.eval(e.right, env)
            if e.op == "||":
                return self.eval(e.left, env) or self.eval(e.right, env)
            if e.op == "==>":
                return (not self.eval(e.left, env)) or self.eval(e.right, env)
            l, r = self.eval(e.left, env), self.eval(e.right, env)
            if e.op == "==":
                return l == r
            if e.op == "!=":
                return l != r
            if e.op == "<=":
                return l <= r  # type: ignore[operator]
            if e.op == ">=":
                return l >= r  # type: ignore[operator]
            if e.op == "<":
                return l < r  # type: ignore[operator]
            if e.op == ">":
                return l > r  # type: ignore[operator]
            if e.op == "+":
                return l + r  # type: ignore[operator]
            if e.op == "-":
                return l - r  # type: ignore[operator]
            return l * r  # type: ignore[operator]
        if isinstance(e, EIf):
            if self.eval(e.cond, env):
                return self.eval(e.then, env)
            return self.eval(e.other, env)
        if isinstance(e, EMatch):
            v = self.eval(e.scrutinee, env)
            assert isinstance(v, tuple)
            for c in e.cases:
                if c.ctor == "nil" and v == ():
                    return self.eval(c.body, env)
                if c.ctor == "cons" and v != ():
                    env2 = dict(env)
                    env2[c.binders[0]] = v[0]
                    env2[c.binders[1]] = v[1:]
                    return self.eval(c.body, env2)
            raise EvalError("match fell through")  # pragma: no cover - exhaustiveness checked
        if isinstance(e, EForall):
            lo, hi = self.quant_range
            for n in range(lo, hi + 1):
                env2 = dict(env)
                env2[e.binder] = n
                if not self.eval(e.body, env2):
                    return False
            return True
        raise EvalError("bad expression")  # pragma: no cover


def eval_fun(prog: Program, fname: str, args: Sequence[Value], fuel: int = DEFAULT_FUEL,
             quant_range: Tuple[int, int] = QUANT_RANGE) -> Value:
    """Call-by-value evaluation; contracts are ignored; raises Diverged on fuel exhaustion."""
    return _Interp(prog, fuel, quant_range).call(fname, list(args))


def eval_expr_in(prog: Program, e: Expr, env: Dict[str, Value], fuel: int = DEFAULT_FUEL,
                 quant_range: Tuple[int, int] = QUANT_RANGE) -> Value:
    return _Interp(prog, fuel, quant_range).eval(e, env)


# ---------------------------------------------------------------------------
# bounded contract checking
# ---------------------------------------------------------------------------

def type_universe(t: Type, depth: int, int_range: Tuple[int, int]) -> List[Value]:
    lo, hi = int_range
    if isinstance(t, TInt):
        return list(range(lo, hi + 1))
    if isinstance(t, TBool):
        return [False, True]
    if isinstance(t, TList):
        out: List[Value] = []
        for n in range(depth + 1):
            out.extend(itertools.product(range(lo, hi + 1), repeat=n))
        return out
    return [VTuple(c) for c in itertools.product(*(type_universe(i, depth, int_range) for i in t.items))]


@dataclass
class ContractViolation:
    function: str
    args: Tuple[Value, ...]
    result: Optional[Value]
    reason: str  # "post-false" | "diverged"


def check_contracts_bounded(
    prog: Program,
    depth: int = 3,
    int_range: Tuple[int, int] = (-2, 2),
    fuel: int = DEFAULT_FUEL,
    functions: Optional[Sequence[str]] = None,
    max_violations: int = 10,
) -> List[ContractViolation]:
    """Enumerate bounded inputs per function and check pre => post via eval.

    The quantifier window for forall in contracts equals int_range.
    """
    out: List[ContractViolation] = []
    names = list(functions) if functions is not None else list(prog.functions)
    for name in names:
        f = prog.fun(name)
        if f.post is None:
            continue
        doms = [type_universe(t, depth, int_range) for _, t in f.params]
        for combo in itertools.product(*doms):
            interp = _Interp(prog, fuel, int_range)
            env: Dict[str, Value] = {p: v for (p, _), v in zip(f.params, combo)}
            if f.pre is not None and not interp.eval(f.pre, env):
                continue
            try:
                res = interp.call(name, list(combo))
            except Diverged:
                out.append(ContractViolation(name, tuple(combo), None, "diverged"))
                if len(out) >= max_violations:
                    return out
                continue
            env2 = dict(env)
            env2["res"] = res
            if not interp.eval(f.post, env2):
                out.append(ContractViolation(name, tuple(combo), res, "post-false"))
                if len(out) >= max_violations:
                    return out
    return out


# ---------------------------------------------------------------------------
# printer and contract splicing
# ---------------------------------------------------------------------------

def format_type(t: Type) -> str:
    return str(t)


# precedence: ==> 1, || 2, && 3, cmp 4, +- 5, * 6, unary 7, postfix/atom 8
_BIN_PREC = {"==>": 1, "||": 2, "&&": 3, "==": 4, "!=": 4, "<=": 4, ">=": 4, "<": 4, ">": 4,
             "+": 5, "-": 5, "*": 6}


def format_expr(e: Expr, prec: int = 0) -> str:
    def wrap(s: str, my: int) -> str:
        return "(%s)" % s if my < prec else s

    if isinstance(e, EInt):
        return str(e.value) if e.value >= 0 else wrap(str(e.value), 7)
    if isinstance(e, EBool):
        return "true" if e.value else "false"
    if isinstance(e, EVar):
        return e.name
    if isinstance(e, ECtor):
        if e.name == "nil":
            return "nil"
        return "cons(%s, %s)" % (format_expr(e.args[0]), format_expr(e.args[1]))
    if isinstance(e, ETuple):
        return "(%s)" % ", ".join(format_expr(x) for x in e.items)
    if isinstance(e, EProj):
        return "%s._%d" % (format_expr(e.base, 8), e.index)
    if isinstance(e, ECall):
        return "%s(%s)" % (e.fn, ",".join(format_expr(a) for a in e.args))
    if isinstance(e, EUnary):
        return wrap("%s%s" % (e.op, format_expr(e.arg, 8)), 7)
    if isinstance(e, EBin):
        my = _BIN_PREC[e.op]
        right = format_expr(e.right, my) if e.op == "==>" else format_expr(e.right, my + 1)
        return wrap("%s %s %s" % (format_expr(e.left, my + 1), e.op, right), my)
    if isinstance(e, EIf):
        s = "if (%s) %s else %s" % (format_expr(e.cond), format_expr(e.then, 1), format_expr(e.other, 1))
        return wrap(s, 0)
    if isinstance(e, EMatch):
        cases = []
        for c in e.cases:
            pat = "nil" if c.ctor == "nil" else "cons(%s, %s)" % c.binders
            cases.append("    case %s => %s" % (pat, format_expr(c.body)))
        return "match %s {\n%s\n  }" % (format_expr(e.scrutinee), "\n".join(cases))
    if isinstance(e, EForall):
        return "forall((%s: %s) => %s)" % (e.binder, e.btype, format_expr(e.body))
    raise MiniFunError("bad expression")  # pragma: no cover


def splice_posts(prog: Program, new_posts: Dict[str, Expr]) -> str:
    """Rewrite the given functions' ensuring expressions in the original source.

    Functions must already carry a postcondition (the span to replace).
    Everything outside the replaced spans is byte-identical.
    """
    edits: List[Tuple[Span, str]] = []
    for name, post in new_posts.items():
        f = prog.fun(name)
        if f.post_span is None:
            raise MiniFunError("function %s has no ensuring clause to rewrite" % name)
        edits.append((f.post_span, format_expr(post)))
    edits.sort(key=lambda p: p[0][0])
    out: List[str] = []
    pos = 0
    for (s, epos), text in edits:
        out.append(prog.source[pos:s])
        out.append(text)
        pos = epos
    out.append(prog.source[pos:])
    return "".join(out)


def expr_structurally_equal(a: Expr, b: Expr) -> bool:
    """Equality modulo spans (the golden-comparison normalization)."""

    def strip(e: Expr):
        if isinstance(e, (EInt, EBool, EVar)):
            return (type(e).__name__, getattr(e, "value", None) if not isinstance(e, EVar) else e.name)
        if isinstance(e, ECtor):
            return ("ctor", e.name, tuple(strip(a2) for a2 in e.args))
        if isinstance(e, ETuple):
            return ("tuple", tuple(strip(a2) for a2 in e.items))
        if isinstance(e, EProj):
            return ("proj", e.index, strip(e.base))
        if isinstance(e, ECall):
            return ("call", e.fn, tuple(strip(a2) for a2 in e.args))
        if isinstance(e, EUnary):
            return ("un", e.op, strip(e.arg))
        if isinstance(e, EBin):
            return ("bin", e.op, strip(e.left), strip(e.right))
        if isinstance(e, EIf):
            return ("if", strip(e.cond), strip(e.then), strip(e.other))
        if isinstance(e, EMatch):
            return ("match", strip(e.scrutinee), tuple((c.ctor, c.binders, strip(c.body)) for c in e.cases))
        if isinstance(e, EForall):
            return ("forall", e.binder, str(e.btype), strip(e.body))
        raise MiniFunError("bad expression")

    return strip(a) == strip(b)
