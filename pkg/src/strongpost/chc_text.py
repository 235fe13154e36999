"""Textual clause format: parser with sort inference, and a printer.

Clauses look like Prolog with an explicit constraint part::

    rev([],[]).
    rev([H|T],R) :- rev(T,S), snoc(S,H,R).
    hd([],IsDef,Hd) :- ~IsDef & Hd=0.
    false :- (BL & ~BR), rev(L,R), is_asorted(L,BL), is_dsorted(R,BR).

Uppercase names are variables, lowercase names are predicates or the list
constructors nil/cons (usually written with [] sugar).  There are no sort
declarations: sorts are inferred per predicate position, defaulting to Int.
Booleans appear bare (``B``, ``~B``); ``=<`` and ``<=`` both mean less-equal;
``=`` between booleans is equivalence.  Comments: ``// ...`` and ``/* ... */``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from .ir import (
    BOOL,
    INT,
    LIST,
    LIST_SORT,
    Add,
    And,
    Atom,
    BoolConst,
    ChcSystem,
    Clause,
    Cmp,
    Ctor,
    Expr,
    Iff,
    Implies,
    IntConst,
    IrError,
    Ite,
    Mul,
    Not,
    Or,
    Sort,
    Sub,
    Term,
    TRUE,
    Var,
    conj,
)


class ChcParseError(IrError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        if line:
            msg = "%d:%d: %s" % (line, col, msg)
        super().__init__(msg)
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_']*)
  | (?P<name>[a-z][A-Za-z0-9_']*)
  | (?P<op>:-|<=>|=>|=<|<=|>=|!=|[().,\[\]|&~=<>+\-*])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # int var name op eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    toks: List[Token] = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ChcParseError("unexpected character %r" % text[pos], line, col)
        kind = m.lastgroup or ""
        lexeme = m.group()
        if kind not in ("ws", "lcomment", "bcomment"):
            toks.append(Token(kind, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# untyped syntax trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UVar:
    name: str
    line: int
    col: int


@dataclass(frozen=True)
class UInt:
    value: int
    line: int
    col: int


@dataclass(frozen=True)
class UBool:
    value: bool
    line: int
    col: int


@dataclass(frozen=True)
class UApp:
    name: str
    args: Tuple["UNode", ...]
    line: int
    col: int


@dataclass(frozen=True)
class UList:
    items: Tuple["UNode", ...]
    tail: Optional["UNode"]
    line: int
    col: int


@dataclass(frozen=True)
class UNot:
    arg: "UNode"
    line: int
    col: int


@dataclass(frozen=True)
class UBin:
    op: str
    left: "UNode"
    right: "UNode"
    line: int
    col: int


@dataclass(frozen=True)
class UIte:
    cond: "UNode"
    then: "UNode"
    other: "UNode"
    line: int
    col: int


UNode = Union[UVar, UInt, UBool, UApp, UList, UNot, UBin, UIte]


@dataclass
class RawClause:
    head: Optional[UApp]  # None for goal clauses
    items: List[UNode]
    line: int


class _Parser:
    def __init__(self, toks: List[Token]):
        self.toks = toks
        self.i = 0
        # while parsing a list's elements a bare | is the tail separator
        self.no_or = [False]

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text or t.kind not in ("op", "name"):
            raise ChcParseError("expected %r, found %r" % (text, t.text or "end of input"), t.line, t.col)
        return t

    # -- clauses ------------------------------------------------------------

    def parse_system(self) -> List[RawClause]:
        out = []
        while self.peek().kind != "eof":
            out.append(self.parse_clause())
        return out

    def parse_clause(self) -> RawClause:
        t = self.peek()
        head: Optional[UApp]
        if t.kind == "name" and t.text == "false":
            self.next()
            head = None
        else:
            if t.kind != "name":
                raise ChcParseError("expected a clause head, found %r" % t.text, t.line, t.col)
            e = self.parse_primary()
            if not isinstance(e, UApp):
                raise ChcParseError("clause head must be an application", t.line, t.col)
            head = e
        items: List[UNode] = []
        nxt = self.next()
        if nxt.text == ":-":
            while True:
                items.append(self.parse_expr())
                sep = self.next()
                if sep.text == ".":
                    break
                if sep.text != ",":
                    raise ChcParseError("expected ',' or '.', found %r" % sep.text, sep.line, sep.col)
        elif nxt.text != ".":
            raise ChcParseError("expected ':-' or '.', found %r" % nxt.text, nxt.line, nxt.col)
        if head is None and not items:
            raise ChcParseError("goal clause has an empty body", t.line, t.col)
        return RawClause(head, items, t.line)

    # -- expressions ----------------------------------------------------------
    # precedence: <=>  =>  |  &  ~  cmp  +/-  *  primary

    def parse_expr(self) -> UNode:
        return self.parse_iff()

    def parse_iff(self) -> UNode:
        e = self.parse_imp()
        while self.peek().text == "<=>":
            t = self.next()
            e = UBin("<=>", e, self.parse_imp(), t.line, t.col)
        return e

    def parse_imp(self) -> UNode:
        e = self.parse_or()
        if self.peek().text == "=>":
            t = self.next()
            return UBin("=>", e, self.parse_imp(), t.line, t.col)
        return e

    def parse_or(self) -> UNode:
        e = self.parse_and()
        while self.peek().text == "|" and not self.no_or[-1]:
            t = self.next()
            e = UBin("|", e, self.parse_and(), t.line, t.col)
        return e

    def parse_and(self) -> UNode:
        e = self.parse_not()
        while self.peek().text == "&":
            t = self.next()
            e = UBin("&", e, self.parse_not(), t.line, t.col)
        return e

    def parse_not(self) -> UNode:
        if self.peek().text == "~":
            t = self.next()
            return UNot(self.parse_not(), t.line, t.col)
        return self.parse_cmp()

    def parse_cmp(self) -> UNode:
        e = self.parse_sum()
        t = self.peek()
        if t.text in ("=", "!=", "=<", "<=", ">=", "<", ">"):
            self.next()
            op = "=<" if t.text == "<=" else t.text
            return UBin(op, e, self.parse_sum(), t.line, t.col)
        return e

    def parse_sum(self) -> UNode:
        e = self.parse_product()
        while self.peek().text in ("+", "-"):
            t = self.next()
            e = UBin(t.text, e, self.parse_product(), t.line, t.col)
        return e

    def parse_product(self) -> UNode:
        e = self.parse_unary()
        while self.peek().text == "*":
            t = self.next()
            e = UBin("*", e, self.parse_unary(), t.line, t.col)
        return e

    def parse_unary(self) -> UNode:
        if self.peek().text == "-":
            t = self.next()
            arg = self.parse_unary()
            if isinstance(arg, UInt):
                return UInt(-arg.value, t.line, t.col)
            return UBin("-", UInt(0, t.line, t.col), arg, t.line, t.col)
        return self.parse_primary()

    def parse_primary(self) -> UNode:
        t = self.next()
        if t.kind == "int":
            return UInt(int(t.text), t.line, t.col)
        if t.kind == "var":
            return UVar(t.text, t.line, t.col)
        if t.kind == "name":
            if t.text == "true":
                return UBool(True, t.line, t.col)
            if t.text == "false":
                return UBool(False, t.line, t.col)
            if self.peek().text == "(":
                self.next()
                self.no_or.append(False)
                args = [self.parse_expr()]
                while self.peek().text == ",":
                    self.next()
                    args.append(self.parse_expr())
                self.expect(")")
                self.no_or.pop()
                if t.text == "ite":
                    if len(args) != 3:
                        raise ChcParseError("ite takes three arguments", t.line, t.col)
                    return UIte(args[0], args[1], args[2], t.line, t.col)
                return UApp(t.text, tuple(args), t.line, t.col)
            return UApp(t.text, (), t.line, t.col)
        if t.text == "(":
            self.no_or.append(False)
            e = self.parse_expr()
            self.expect(")")
            self.no_or.pop()
            return e
        if t.text == "[":
            return self.parse_list(t)
        raise ChcParseError("unexpected token %r" % (t.text or "end of input"), t.line, t.col)

    def parse_list(self, t: Token) -> UNode:
        if self.peek().text == "]":
            self.next()
            return UList((), None, t.line, t.col)
        self.no_or.append(True)
        items = [self.parse_expr()]
        while self.peek().text == ",":
            self.next()
            items.append(self.parse_expr())
        tail = None
        if self.peek().text == "|":
            self.next()
            tail = self.parse_expr()
        self.no_or.pop()
        self.expect("]")
        return UList(tuple(items), tail, t.line, t.col)


# ---------------------------------------------------------------------------
# sort inference (union-find over per-variable and per-position cells)
# ---------------------------------------------------------------------------

class _Sorts:
    def __init__(self) -> None:
        self.parent: Dict[object, object] = {}
        self.sort: Dict[object, Optional[Sort]] = {}

    def cell(self, key: object) -> object:
        if key not in self.parent:
            self.parent[key] = key
            self.sort[key] = None
        return self.find(key)

    def find(self, key: object) -> object:
        root = key
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[key] != root:
            self.parent[key], key = root, self.parent[key]
        return root

    def get(self, key: object) -> Optional[Sort]:
        return self.sort[self.find(key)]

    def assign(self, key: object, s: Sort, where: str) -> None:
        root = self.find(self.cell(key))
        cur = self.sort[root]
        if cur is None:
            self.sort[root] = s
        elif cur != s:
            raise ChcParseError("sort mismatch in %s: %s vs %s" % (where, cur, s))

    def union(self, a: object, b: object, where: str) -> None:
        ra, rb = self.find(self.cell(a)), self.find(self.cell(b))
        if ra == rb:
            return
        sa, sb = self.sort[ra], self.sort[rb]
        if sa is not None and sb is not None and sa != sb:
            raise ChcParseError("sort mismatch in %s: %s vs %s" % (where, sa, sb))
        self.parent[ra] = rb
        self.sort[rb] = sb if sb is not None else sa


_CTOR_SORTS = {"nil": (), "cons": (INT, LIST_SORT)}


class _Inference:
    """Two passes: collect sort constraints, then build the typed system."""

    def __init__(self, raw: List[RawClause]):
        self.raw = raw
        self.sorts = _Sorts()
        self.arity: Dict[str, int] = {}

    # pass 1 -----------------------------------------------------------------

    def run(self) -> ChcSystem:
        for idx, rc in enumerate(self.raw):
            self.collect_clause(idx, rc)
        sys = ChcSystem(adts={"list": LIST})
        for pred, n in sorted(self.arity.items()):
            sig = []
            for i in range(n):
                s = self.sorts.get(self.sorts.cell(("p", pred, i))) or INT
                sig.append(s)
            sys.preds[pred] = tuple(sig)
        for idx, rc in enumerate(self.raw):
            cl = self.build_clause(idx, rc)
            (sys.goals if cl.head is None else sys.clauses).append(cl)
        sys.validate()
        return sys

    def note_pred(self, app: UApp) -> None:
        n = self.arity.setdefault(app.name, len(app.args))
        if n != len(app.args):
            raise ChcParseError(
                "predicate %s used with %d and %d arguments" % (app.name, n, len(app.args)),
                app.line,
                app.col,
            )

    def collect_clause(self, idx: int, rc: RawClause) -> None:
        atoms, constr = split_items(rc)
        for app in ([rc.head] if rc.head else []) + atoms:
            self.note_pred(app)
            where = "atom %s" % app.name
            for i, arg in enumerate(app.args):
                self.collect_term(idx, arg, ("p", app.name, i), "%s, argument %d" % (where, i + 1))
        for e in constr:
            self.collect_bool(idx, e, "constraint in clause %d" % (idx + 1))

    def collect_term(self, idx: int, t: UNode, cell: object, where: str) -> None:
        if isinstance(t, UVar):
            self.sorts.union(("v", idx, t.name), cell, where + " (variable %s)" % t.name)
        elif isinstance(t, UInt):
            self.sorts.assign(cell, INT, where)
        elif isinstance(t, UBool):
            self.sorts.assign(cell, BOOL, where)
        elif isinstance(t, UList):
            self.sorts.assign(cell, LIST_SORT, where)
            for item in t.items:
                self.collect_term(idx, item, ("k", id(item)), where)
                self.sorts.assign(("k", id(item)), INT, where + " (list element)")
            if t.tail is not None:
                self.collect_term(idx, t.tail, ("k", id(t.tail)), where)
                self.sorts.assign(("k", id(t.tail)), LIST_SORT, where + " (list tail)")
        elif isinstance(t, UApp):
            if t.name not in _CTOR_SORTS:
                raise ChcParseError("unknown constructor %s in %s" % (t.name, where), t.line, t.col)
            sig = _CTOR_SORTS[t.name]
            if len(sig) != len(t.args):
                raise ChcParseError("constructor %s takes %d arguments" % (t.name, len(sig)), t.line, t.col)
            self.sorts.assign(cell, LIST_SORT, where)
            for arg, s in zip(t.args, sig):
                self.collect_term(idx, arg, ("k", id(arg)), where)
                self.sorts.assign(("k", id(arg)), s, where)
        else:
            raise ChcParseError("expression used as a %s" % where, t.line, t.col)

    def collect_bool(self, idx: int, e: UNode, where: str) -> None:
        self.collect_expr(idx, e, where)
        self.sorts.assign(("k", id(e)), BOOL, where)

    def collect_expr(self, idx: int, e: UNode, where: str) -> None:
        """Constrain subexpression sorts; each node gets cell ("k", id(node))."""
        cell = ("k", id(e))
        if isinstance(e, UVar):
            self.sorts.union(("v", idx, e.name), cell, where)
        elif isinstance(e, UInt):
            self.sorts.assign(cell, INT, where)
        elif isinstance(e, UBool):
            self.sorts.assign(cell, BOOL, where)
        elif isinstance(e, UNot):
            self.collect_bool(idx, e.arg, where)
            self.sorts.assign(cell, BOOL, where)
        elif isinstance(e, UBin):
            if e.op in ("&", "|", "=>", "<=>"):
                self.collect_bool(idx, e.left, where)
                self.collect_bool(idx, e.right, where)
                self.sorts.assign(cell, BOOL, where)
            elif e.op in ("+", "-", "*"):
                self.collect_expr(idx, e.left, where)
                self.collect_expr(idx, e.right, where)
                self.sorts.assign(("k", id(e.left)), INT, where)
                self.sorts.assign(("k", id(e.right)), INT, where)
                self.sorts.assign(cell, INT, where)
            elif e.op in ("=<", ">=", "<", ">"):
                self.collect_expr(idx, e.left, where)
                self.collect_expr(idx, e.right, where)
                self.sorts.assign(("k", id(e.left)), INT, where)
                self.sorts.assign(("k", id(e.right)), INT, where)
                self.sorts.assign(cell, BOOL, where)
            elif e.op in ("=", "!="):
                self.collect_expr(idx, e.left, where)
                self.collect_expr(idx, e.right, where)
                self.sorts.union(("k", id(e.left)), ("k", id(e.right)), where)
                self.sorts.assign(cell, BOOL, where)
            else:  # pragma: no cover - lexer admits no other ops
                raise ChcParseError("bad operator %s" % e.op, e.line, e.col)
        elif isinstance(e, UIte):
            self.collect_bool(idx, e.cond, where)
            self.collect_expr(idx, e.then, where)
            self.collect_expr(idx, e.other, where)
            self.sorts.union(("k", id(e.then)), ("k", id(e.other)), where)
            self.sorts.union(cell, ("k", id(e.then)), where)
        elif isinstance(e, (UApp, UList)):
            raise ChcParseError("data term inside a constraint (%s)" % where, e.line, e.col)
        else:  # pragma: no cover
            raise ChcParseError("bad expression", e.line, e.col)

    # pass 2 -----------------------------------------------------------------

    def var_sort(self, idx: int, name: str) -> Sort:
        return self.sorts.get(self.sorts.cell(("v", idx, name))) or INT

    def node_sort(self, node: UNode) -> Sort:
        return self.sorts.get(self.sorts.cell(("k", id(node)))) or INT

    def build_clause(self, idx: int, rc: RawClause) -> Clause:
        atoms, constr = split_items(rc)
        head = None if rc.head is None else self.build_atom(idx, rc.head)
        body = tuple(self.build_atom(idx, a) for a in atoms)
        c = conj([self.build_expr(idx, e) for e in constr])
        return Clause(head, c, body)

    def build_atom(self, idx: int, app: UApp) -> Atom:
        return Atom(app.name, tuple(self.build_term(idx, t) for t in app.args))

    def build_term(self, idx: int, t: UNode) -> Term:
        if isinstance(t, UVar):
            return Var(t.name, self.var_sort(idx, t.name))
        if isinstance(t, UInt):
            return IntConst(t.value)
        if isinstance(t, UBool):
            return BoolConst(t.value)
        if isinstance(t, UList):
            tail: Term = self.build_term(idx, t.tail) if t.tail is not None else Ctor("list", "nil", ())
            for item in reversed(t.items):
                tail = Ctor("list", "cons", (self.build_term(idx, item), tail))
            return tail
        if isinstance(t, UApp):
            return Ctor("list", t.name, tuple(self.build_term(idx, a) for a in t.args))
        raise ChcParseError("expression used as a term", t.line, t.col)  # pragma: no cover

    def build_expr(self, idx: int, e: UNode) -> Expr:
        if isinstance(e, UVar):
            s = self.var_sort(idx, e.name)
            if not s.is_basic():
                raise ChcParseError(
                    "variable %s has sort %s but occurs in a constraint" % (e.name, s), e.line, e.col
                )
            return Var(e.name, s)
        if isinstance(e, UInt):
            return IntConst(e.value)
        if isinstance(e, UBool):
            return BoolConst(e.value)
        if isinstance(e, UNot):
            return Not(self.build_expr(idx, e.arg))
        if isinstance(e, UIte):
            return Ite(self.build_expr(idx, e.cond), self.build_expr(idx, e.then), self.build_expr(idx, e.other))
        if isinstance(e, UBin):
            l, r = self.build_expr(idx, e.left), self.build_expr(idx, e.right)
            if e.op == "&":
                return conj([l, r])
            if e.op == "|":
                return Or((l, r))
            if e.op == "=>":
                return Implies(l, r)
            if e.op == "<=>":
                return Iff(l, r)
            if e.op == "+":
                return Add(l, r)
            if e.op == "-":
                return self.build_sub(l, r)
            if e.op == "*":
                return self.build_mul(l, r, e)
            if e.op in ("=", "!="):
                if self.node_sort(e.left) == BOOL:
                    out: Expr = Iff(l, r)
                    return Not(out) if e.op == "!=" else out
                return Cmp(e.op, l, r)
            return Cmp(e.op, l, r)
        raise ChcParseError("data term inside a constraint", e.line, e.col)

    @staticmethod
    def build_sub(l: Expr, r: Expr) -> Expr:
        if isinstance(l, IntConst) and l.value == 0 and isinstance(r, IntConst):
            return IntConst(-r.value)
        return Sub(l, r)

    @staticmethod
    def build_mul(l: Expr, r: Expr, e: UBin) -> Expr:
        if isinstance(l, IntConst):
            return Mul(l.value, r)
        if isinstance(r, IntConst):
            return Mul(r.value, l)
        raise ChcParseError("nonlinear multiplication", e.line, e.col)


def split_items(rc: RawClause) -> Tuple[List[UApp], List[UNode]]:
    """Body items that are applications are atoms; the rest is the constraint."""
    atoms: List[UApp] = []
    constr: List[UNode] = []
    for item in rc.items:
        if isinstance(item, UApp) and item.name not in _CTOR_SORTS and item.name != "ite":
            atoms.append(item)
        else:
            constr.append(item)
    return atoms, constr


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def parse_system(text: str) -> ChcSystem:
    raw = _Parser(tokenize(text)).parse_system()
    return _Inference(raw).run()


def parse_clause(text: str) -> Clause:
    """Parse a single clause (with trailing dot) in isolation."""
    sys = parse_system(text)
    cls = sys.all_clauses()
    if len(cls) != 1:
        raise ChcParseError("expected exactly one clause")
    return cls[0]


# ---------------------------------------------------------------------------
# printer
# ---------------------------------------------------------------------------

def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntConst):
        return str(t.value)
    if isinstance(t, BoolConst):
        return "true" if t.value else "false"
    if isinstance(t, Ctor):
        if t.adt == "list":
            items: List[str] = []
            cur: Term = t
            while isinstance(cur, Ctor) and cur.name == "cons":
                items.append(format_term(cur.args[0]))
                cur = cur.args[1]
            if isinstance(cur, Ctor) and cur.name == "nil":
                return "[%s]" % ",".join(items)
            return "[%s|%s]" % (",".join(items), format_term(cur))
        if not t.args:
            return t.name
        return "%s(%s)" % (t.name, ",".join(format_term(a) for a in t.args))
    raise IrError("unknown term %r" % (t,))


# precedence levels used by the expression printer
_PREC_IFF, _PREC_IMP, _PREC_OR, _PREC_AND, _PREC_NOT, _PREC_CMP, _PREC_SUM, _PREC_MUL, _PREC_ATOM = range(1, 10)


def format_expr(e: Expr, prec: int = 0) -> str:
    def wrap(s: str, my: int) -> str:
        return "(%s)" % s if my < prec else s

    if isinstance(e, Var):
        return e.name
    if isinstance(e, IntConst):
        return str(e.value) if e.value >= 0 else wrap(str(e.value), _PREC_SUM)
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, Iff):
        return wrap("%s = %s" % (format_expr(e.left, _PREC_CMP + 1), format_expr(e.right, _PREC_CMP + 1)), _PREC_CMP)
    if isinstance(e, Implies):
        return wrap("%s => %s" % (format_expr(e.left, _PREC_IMP + 1), format_expr(e.right, _PREC_IMP)), _PREC_IMP)
    if isinstance(e, Or):
        if not e.args:
            return "false"
        # non-first args at higher precedence: a right-nested Or keeps its
        # parens so the left-associative parser rebuilds the same tree
        return wrap(" | ".join(format_expr(a, _PREC_OR + (i > 0)) for i, a in enumerate(e.args)), _PREC_OR)
    if isinstance(e, And):
        if not e.args:
            return "true"
        return wrap(" & ".join(format_expr(a, _PREC_AND + (i > 0)) for i, a in enumerate(e.args)), _PREC_AND)
    if isinstance(e, Not):
        return wrap("~%s" % format_expr(e.arg, _PREC_NOT + 1), _PREC_NOT)
    if isinstance(e, Cmp):
        return wrap("%s %s %s" % (format_expr(e.left, _PREC_CMP + 1), e.op, format_expr(e.right, _PREC_CMP + 1)), _PREC_CMP)
    if isinstance(e, Add):
        return wrap("%s + %s" % (format_expr(e.left, _PREC_SUM), format_expr(e.right, _PREC_SUM + 1)), _PREC_SUM)
    if isinstance(e, Sub):
        return wrap("%s - %s" % (format_expr(e.left, _PREC_SUM), format_expr(e.right, _PREC_SUM + 1)), _PREC_SUM)
    if isinstance(e, Mul):
        # arg at higher precedence: a nested product must keep its parens
        return wrap("%d*%s" % (e.coeff, format_expr(e.arg, _PREC_MUL + 1)), _PREC_MUL)
    if isinstance(e, Ite):
        return "ite(%s, %s, %s)" % (format_expr(e.cond), format_expr(e.then), format_expr(e.other))
    raise IrError("unknown expression %r" % (e,))


def format_atom(a: Atom) -> str:
    if not a.args:
        return a.pred
    return "%s(%s)" % (a.pred, ",".join(format_term(t) for t in a.args))


def format_clause(c: Clause) -> str:
    head = "false" if c.head is None else format_atom(c.head)
    parts: List[str] = []
    if not (isinstance(c.constraint, BoolConst) and c.constraint.value):
        parts.append(format_expr(c.constraint))
    parts.extend(format_atom(a) for a in c.body)
    if not parts:
        return head + "."
    return "%s :- %s." % (head, ", ".join(parts))


def format_system(sys: ChcSystem) -> str:
    lines = [format_clause(c) for c in sys.clauses]
    if sys.goals:
        if lines:
            lines.append("")
        lines.extend(format_clause(g) for g in sys.goals)
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


# canonical entry points for the clause text format
parse_chc = parse_system
print_chc = format_system
