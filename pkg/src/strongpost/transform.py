"""Removal of ADT arguments from a clause system by unfold/fold transformation.

Predicates that merely summarise lists (the recognized catamorphisms) are
compiled away: every remaining predicate occurrence is folded into a fresh
definition whose head collects only the basic-sorted slots of its body atoms.
The result is a clause system over Int/Bool slots whose satisfiability implies
satisfiability of the input, and whose solver models translate back into
quantified facts about the original functions.

Definition bodies are built from three sources:
  * the atoms already present around the subject occurrence,
  * helper probes (e.g. a head probe accompanying a sortedness fold) on every
    argument the subject's clauses match against a non-empty constructor,
  * for goal-derived definitions, folds named in the contracts of functions
    the subject (properly) calls, applied to the subject's output slots.

When a clause presents a fold on some variable that the chosen definition
cannot absorb, the definition is generalized: a wider definition is introduced
that extends it with the missing pattern, and folding restarts.

Side constraints of the original goals are propagated: whenever a clause body
contains an instance of a goal's atoms, the negation of that goal's constraint
is a sound additional conjunct (any model must satisfy the goals), and it is
what makes the residual systems solvable in practice.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .cata import CatamorphismInfo, recognize_all
from .ir import (
    BOOL, INT, TRUE, Atom, Binding, ChcSystem, Clause, Cmp, Ctor, Expr, Iff, Implies,
    IntConst, NameSupply, Not, Sort, Term, Var, clause_var_names, conj, conjuncts,
    negate, rename_apart, resolve, subst_atom, subst_expr, subst_term, unify_terms,
)


class TransformError(Exception):
    pass


class TransformBudgetError(TransformError):
    pass


# ---------------------------------------------------------------------------
# definitions
# ---------------------------------------------------------------------------

@dataclass
class Definition:
    """A named conjunction of one subject atom plus catamorphism atoms.

    The head collects every basic-sorted argument of the body atoms, in body
    order; a variable shared between atoms therefore may occupy two slots.
    """
    name: str
    subject_pred: str
    body: Tuple[Atom, ...]
    head_vars: Tuple[Var, ...]
    extends: Optional[str] = None
    origin: str = ""

    @property
    def subject(self) -> Atom:
        return self.body[0]

    def signature(self) -> Tuple[Sort, ...]:
        return tuple(v.sort for v in self.head_vars)

    def as_clause(self) -> Clause:
        return Clause(Atom(self.name, self.head_vars), TRUE, self.body)


def _clause_has_adt(c: Clause) -> bool:
    atoms = c.body + ((c.head,) if c.head else ())
    for a in atoms:
        for t in a.args:
            if isinstance(t, Ctor):
                return True
        for v in a.vars():
            if not v.sort.is_basic():
                return True
    return False


def definition_head_vars(body: Sequence[Atom]) -> Tuple[Var, ...]:
    out: List[Var] = []
    for a in body:
        for t in a.args:
            if isinstance(t, Var) and t.sort.is_basic():
                out.append(t)
    return tuple(out)


def _slot_letter(pos: int) -> str:
    return chr(ord("A") + (pos - 1) % 26) + "1"


def _fresh_slot(supply: NameSupply, pos: int) -> str:
    # keep the letter+digit shape (J1, K1) when free; it survives into the
    # strengthened contract as a quantifier name
    name = _slot_letter(pos)
    if name not in supply.taken:
        supply.reserve([name])
        return name
    return supply.fresh(name)


@dataclass
class TraceStep:
    kind: str  # introduce | fold_goal | emit | prune
    def_name: str = ""
    goal_index: int = -1
    case_index: int = -1
    clause: Optional[Clause] = None


@dataclass
class TransformResult:
    system: ChcSystem
    definitions: Dict[str, Definition]
    goal_defs: Dict[int, str]
    trace: List[TraceStep]
    statistics: Dict[str, int]


# ---------------------------------------------------------------------------
# matching pool
# ---------------------------------------------------------------------------

@dataclass
class _Pool:
    atoms: List[Atom]
    supply: NameSupply
    instantiable: Set[str] = field(default_factory=set)
    theta: Binding = field(default_factory=dict)
    consumed: Set[int] = field(default_factory=set)

    def copy(self) -> "_Pool":
        return _Pool(list(self.atoms), NameSupply(set(self.supply.taken)),
                     set(self.instantiable), dict(self.theta), set(self.consumed))

    def resolve(self, t: Term) -> Term:
        while isinstance(t, Var) and t.name in self.theta:
            t = self.theta[t.name]
        if isinstance(t, Ctor):
            return Ctor(t.adt, t.name, tuple(self.resolve(a) for a in t.args))
        return t

    def current(self, i: int) -> Atom:
        a = self.atoms[i]
        return Atom(a.pred, tuple(self.resolve(t) for t in a.args))

    def cata_atoms(self, catas: Dict[str, CatamorphismInfo]) -> List[int]:
        return [i for i, a in enumerate(self.atoms) if a.pred in catas]


@dataclass
class _FoldPlan:
    def_name: str
    head_terms: List[Term]
    consumed: List[int]


# ---------------------------------------------------------------------------
# the driver
# ---------------------------------------------------------------------------

class _Transformer:
    def __init__(self, system: ChcSystem, catas: Dict[str, CatamorphismInfo], budget: int):
        self.sys = system
        self.catas = catas
        self.budget = budget
        self.defs: Dict[str, Definition] = {}
        self.by_subject: Dict[str, List[str]] = {}
        self.worklist: deque = deque()
        self.emitted: List[Clause] = []
        self.folded_goals: List[Optional[Clause]] = [None] * len(system.goals)
        self.goal_defs: Dict[int, str] = {}
        self.trace: List[TraceStep] = []
        self.stats: Dict[str, int] = {
            "definitions": 0, "extensions": 0, "generalizations": 0,
            "unfold_steps": 0, "fold_steps": 0,
            "materialized_atoms": 0, "propagated_constraints": 0, "pruned_cases": 0,
            "emitted_clauses": 0, "folded_goals": 0,
        }
        self._counter = 0
        # structural facts about subject predicates
        self.case_split: Dict[str, Set[int]] = {}
        self.scrutinee: Dict[str, Optional[int]] = {}
        for pred, sig in system.preds.items():
            if pred in catas:
                continue
            cls = system.clauses_of(pred)
            split: Set[int] = set()
            scrut: Optional[int] = None
            for i, s in enumerate(sig):
                if s.is_basic():
                    continue
                pats = set()
                for c in cls:
                    assert c.head is not None
                    t = c.head.args[i]
                    pats.add(t.name if isinstance(t, Ctor) else "_var")
                if any(p == "cons" for p in pats):
                    split.add(i)
                if pats == {"nil", "cons"} and scrut is None:
                    scrut = i
            self.case_split[pred] = split
            self.scrutinee[pred] = scrut
        # call graph over non-cata predicates
        self.calls: Dict[str, Set[str]] = {}
        for pred in system.preds:
            if pred in catas:
                continue
            tgts: Set[str] = set()
            for c in system.clauses_of(pred):
                for a in c.body:
                    if a.pred not in catas:
                        tgts.add(a.pred)
            self.calls[pred] = tgts
        self.goal_subjects: Dict[int, str] = {}
        for gi, g in enumerate(system.goals):
            subs = [a for a in g.body if a.pred not in catas]
            if len(subs) != 1:
                raise TransformError(
                    "goal %d must contain exactly one non-catamorphism atom" % gi)
            self.goal_subjects[gi] = subs[0].pred

    # -- bookkeeping ---------------------------------------------------------

    def _new_name(self) -> str:
        self._counter += 1
        if self._counter > self.budget:
            raise TransformBudgetError("definition budget (%d) exceeded" % self.budget)
        return "new%d" % self._counter

    def _register(self, d: Definition) -> None:
        self.defs[d.name] = d
        self.by_subject.setdefault(d.subject_pred, []).append(d.name)
        self.worklist.append(d.name)
        self.trace.append(TraceStep("introduce", def_name=d.name))
        self.stats["definitions"] += 1
        if d.extends:
            self.stats["extensions"] += 1
            self.stats["generalizations"] += 1

    def _properly_reachable(self, pred: str) -> List[str]:
        seen: Set[str] = set()
        frontier = list(self.calls.get(pred, ()))
        while frontier:
            nxt = frontier.pop(0)
            if nxt in seen:
                continue
            seen.add(nxt)
            frontier.extend(self.calls.get(nxt, ()))
        seen.discard(pred)
        return sorted(seen)

    # -- definition construction ----------------------------------------------

    def _adt_positions(self, atom: Atom) -> List[int]:
        return [i for i, t in enumerate(atom.args) if isinstance(t, Var) and not t.sort.is_basic()]

    def _fresh_cata_atom(self, q: str, v: Var, supply: NameSupply,
                         extra_base: str = "N") -> Atom:
        """A q-atom on list v with fresh extra/result variables."""
        info = self.catas[q]
        sig = self.sys.preds[q]
        nil_head = info.nil_clause.head
        assert nil_head is not None
        args: List[Term] = []
        for i, s in enumerate(sig):
            if i == info.list_pos:
                args.append(v)
            elif i in info.extra_pos:
                args.append(Var(supply.fresh(extra_base), s))
            else:
                base = nil_head.args[i].name if isinstance(nil_head.args[i], Var) else "Res"
                args.append(Var(supply.fresh(base), s))
        return Atom(q, tuple(args))

    def _close_and_import(self, subject: Atom, body: List[Atom], origin: str,
                          supply: NameSupply) -> List[Atom]:
        """Helper closure on case-split arguments; contract imports on outputs."""
        pred = subject.pred

        def has_atom(q: str, v: Var) -> bool:
            info = self.catas[q]
            return any(a.pred == q and a.args[info.list_pos] == v for a in body)

        # helper closure: a probe accompanies each fold over a case-split slot
        changed = True
        while changed:
            changed = False
            for a in list(body[1:]):
                info = self.catas.get(a.pred)
                if info is None or info.aux_pred is None:
                    continue
                v = a.args[info.list_pos]
                if not isinstance(v, Var):
                    continue
                try:
                    pos = subject.args.index(v)
                except ValueError:
                    continue
                if pos not in self.case_split.get(pred, set()):
                    continue
                if not has_atom(info.aux_pred, v):
                    body.append(self._fresh_cata_atom(info.aux_pred, v, supply))
                    changed = True

        if origin.startswith("goal"):
            scrut = self.scrutinee.get(pred)
            outputs = [subject.args[i] for i in self._adt_positions(subject) if i != scrut]
            imports: List[str] = []
            for gi, g in enumerate(self.sys.goals):
                if self.goal_subjects[gi] in self._properly_reachable(pred):
                    for a in g.body:
                        if a.pred in self.catas and a.pred not in imports:
                            imports.append(a.pred)
            for q in imports:
                for v in outputs:
                    assert isinstance(v, Var)
                    if not has_atom(q, v):
                        body.append(self._fresh_cata_atom(q, v, supply))
        return body

    def _introduce_from_context(self, subject: Atom, pool: _Pool, origin: str) -> Definition:
        sub_vars = {t.name for t in subject.args if isinstance(t, Var) and not t.sort.is_basic()}
        present: List[Atom] = []
        for i in pool.cata_atoms(self.catas):
            a = pool.current(i)
            info = self.catas[a.pred]
            lv = a.args[info.list_pos]
            if isinstance(lv, Var) and lv.name in sub_vars:
                present.append(a)
        names: Set[str] = set()
        for a in [subject] + present:
            names |= {v.name for v in a.vars()}
        supply = NameSupply(names | set(pool.supply.taken))
        body = self._close_and_import(subject, [subject] + present, origin, supply)
        for a in body:
            for t in a.args:
                if not isinstance(t, Var):
                    raise TransformError("definition bodies need variable arguments")
        d = Definition(self._new_name(), subject.pred, tuple(body),
                       definition_head_vars(body), None, origin)
        self._register(d)
        return d

    def _extend(self, base: Definition, extra: List[Atom]) -> Definition:
        """A wider definition absorbing the given extra patterns (def namespace)."""
        body = list(base.body) + extra
        d = Definition(self._new_name(), base.subject_pred, tuple(body),
                       definition_head_vars(body), base.name, "extension")
        self._register(d)
        return d

    # -- matching -------------------------------------------------------------

    def _try_match(self, d: Definition, subject_idx: int, pool: _Pool,
                   require_cover: bool, subjects: List[int]) -> Optional[Tuple[_FoldPlan, _Pool]]:
        """Match d's patterns around the given subject atom; missing patterns
        materialize fresh atoms (holes that later folds may refine)."""
        work = pool.copy()
        s = work.current(subject_idx)
        # keep the definition's namespace apart from the clause's
        ren: Binding = {}
        for a in d.body:
            for v in a.vars():
                if v.name not in ren:
                    ren[v.name] = Var(work.supply.fresh(v.name), v.sort)
        defvars = {t.name for t in ren.values() if isinstance(t, Var)}
        pats = [subst_atom(a, ren) for a in d.body]
        head_pat = [subst_term(v, ren) for v in d.head_vars]
        sigma: Dict[str, Term] = {}

        def dres(t: Term) -> Term:
            while isinstance(t, Var):
                if t.name in sigma:
                    t = sigma[t.name]
                elif t.name in work.theta:
                    t = work.theta[t.name]
                else:
                    break
            if isinstance(t, Ctor):
                return Ctor(t.adt, t.name, tuple(dres(a) for a in t.args))
            return t

        def unify(pat: Term, tgt: Term) -> bool:
            pat, tgt = dres(pat), dres(tgt)
            if pat == tgt:
                return True
            if isinstance(pat, Var):
                if pat.name in work.instantiable:
                    work.theta[pat.name] = tgt
                    return True
                if pat.name in defvars:
                    sigma[pat.name] = tgt
                    return True
            if isinstance(tgt, Var) and tgt.name in work.instantiable:
                work.theta[tgt.name] = pat
                return True
            if isinstance(pat, Ctor) and isinstance(tgt, Ctor) and pat.name == tgt.name:
                return all(unify(a, b) for a, b in zip(pat.args, tgt.args))
            return False

        for da, sa in zip(pats[0].args, s.args):
            if not unify(da, sa):
                return None
        consumed: List[int] = []
        for pat in pats[1:]:
            hit: Optional[int] = None
            saved_sigma, saved_theta = dict(sigma), dict(work.theta)
            # atoms folded by an earlier plan stay matchable: two folds may
            # share an atom (each definition body is implied by the clause)
            for i, a in enumerate(work.atoms):
                if i in consumed or a.pred != pat.pred:
                    continue
                if all(unify(pa, ta) for pa, ta in zip(pat.args, a.args)):
                    hit = i
                    break
                sigma.clear(); sigma.update(saved_sigma)
                work.theta.clear(); work.theta.update(saved_theta)
            if hit is None:
                args: List[Term] = []
                for pa in pat.args:
                    t = dres(pa)
                    if isinstance(t, Var) and t.name in defvars:
                        # unbound definition slot: materialize a hole
                        work.instantiable.add(t.name)
                    args.append(t)
                work.atoms.append(Atom(pat.pred, tuple(args)))
                hit = len(work.atoms) - 1
            consumed.append(hit)
        if require_cover:
            other_vars: Set[str] = set()
            for j in subjects:
                if j != subject_idx:
                    other_vars |= {t.name for t in work.current(j).args
                                   if isinstance(t, Var) and not t.sort.is_basic()}
            my_vars = {t.name for t in s.args if isinstance(t, Var) and not t.sort.is_basic()}
            exclusive = my_vars - other_vars
            for i in work.cata_atoms(self.catas):
                if i in work.consumed or i in consumed:
                    continue
                a = work.current(i)
                lv = a.args[self.catas[a.pred].list_pos]
                if isinstance(lv, Var) and lv.name in exclusive:
                    return None
        head_terms = [dres(hv) for hv in head_pat]
        work.consumed.update(consumed)
        return _FoldPlan(d.name, head_terms, consumed), work

    def _plan_folds(self, base_pool: _Pool, subject_idxs: List[int], origin: str) -> Tuple[List[_FoldPlan], _Pool]:
        for _attempt in range(self.budget):
            pool = base_pool.copy()
            plans: List[_FoldPlan] = []
            extended = False
            for si in subject_idxs:
                chosen: Optional[Tuple[_FoldPlan, _Pool]] = None
                pred = pool.atoms[si].pred
                for dname in self.by_subject.get(pred, []):
                    got = self._try_match(self.defs[dname], si, pool, True, subject_idxs)
                    if got:
                        chosen = got
                        break
                if chosen is None:
                    base_match: Optional[Tuple[str, _FoldPlan, _Pool]] = None
                    for dname in self.by_subject.get(pred, []):
                        got = self._try_match(self.defs[dname], si, pool, False, subject_idxs)
                        if got:
                            base_match = (dname, got[0], got[1])
                            break
                    if base_match is None:
                        self._introduce_from_context(pool.current(si), pool, origin)
                    else:
                        self._extend_for_uncovered(base_match, si, pool, subject_idxs)
                    extended = True
                    break
                plans.append(chosen[0])
                pool = chosen[1]
            if extended:
                continue
            leftovers = [i for i in pool.cata_atoms(self.catas) if i not in pool.consumed]
            if leftovers:
                raise TransformError("unconsumed catamorphism atoms remain after folding")
            self.stats["fold_steps"] += len(plans)
            self.stats["materialized_atoms"] += len(pool.atoms) - len(base_pool.atoms)
            return plans, pool
        raise TransformBudgetError("fold planning did not converge within budget")

    def _extend_for_uncovered(self, base_match: Tuple[str, _FoldPlan, _Pool],
                              subject_idx: int, pool: _Pool, subjects: List[int]) -> None:
        dname, plan, work = base_match
        d = self.defs[dname]
        s = work.current(subject_idx)
        # invert the subject binding so pool atoms can be rephrased in def terms
        inv: Dict[str, Term] = {}
        for da, sa in zip(d.subject.args, s.args):
            sa = work.resolve(sa)
            if isinstance(sa, Var) and sa.name not in inv:
                inv[sa.name] = da
        my_vars = {t.name for t in s.args if isinstance(t, Var) and not t.sort.is_basic()}
        supply = NameSupply({v.name for a in d.body for v in a.vars()})
        pos = len(d.head_vars)
        extra: List[Atom] = []
        for i in work.cata_atoms(self.catas):
            if i in work.consumed:
                continue
            a = work.current(i)
            lv = a.args[self.catas[a.pred].list_pos]
            if not (isinstance(lv, Var) and lv.name in my_vars):
                continue
            args: List[Term] = []
            for t in a.args:
                if isinstance(t, Var) and t.name in inv:
                    args.append(inv[t.name])
                    if t.sort.is_basic():
                        pos += 1
                elif isinstance(t, Var) and t.sort.is_basic():
                    pos += 1
                    args.append(Var(_fresh_slot(supply, pos), t.sort))
                elif isinstance(t, Var):
                    raise TransformError("cannot widen %s: pattern variable %s is not a subject slot"
                                         % (d.name, t.name))
                else:
                    pos += 1
                    args.append(Var(_fresh_slot(supply, pos),
                                    INT if isinstance(t, IntConst) else BOOL))
            extra.append(Atom(a.pred, tuple(args)))
        if not extra:
            raise TransformError("fold coverage failed but no pattern is missing (%s)" % dname)
        self._extend(d, extra)

    # -- goal propagation ------------------------------------------------------

    def _embeddings(self, goal: Clause, pool: _Pool) -> List[Binding]:
        atoms = [pool.current(i) for i in range(len(pool.atoms))]
        out: List[Binding] = []

        def match_term(g: Term, t: Term, binding: Binding) -> Optional[Binding]:
            if isinstance(g, Var):
                seen = binding.get(g.name)
                if seen is None:
                    b2 = dict(binding)
                    b2[g.name] = t
                    return b2
                return binding if seen == t else None
            if isinstance(g, Ctor) and isinstance(t, Ctor) and g.name == t.name:
                for ga, ta in zip(g.args, t.args):
                    nxt = match_term(ga, ta, binding)
                    if nxt is None:
                        return None
                    binding = nxt
                return binding
            return binding if g == t else None

        def go(i: int, binding: Binding) -> None:
            if i == len(goal.body):
                out.append(binding)
                return
            ga = goal.body[i]
            for a in atoms:
                if a.pred != ga.pred or len(a.args) != len(ga.args):
                    continue
                b: Optional[Binding] = binding
                for gt, at in zip(ga.args, a.args):
                    b = match_term(gt, at, b)
                    if b is None:
                        break
                if b is not None:
                    go(i + 1, b)

        go(0, {})
        return out

    def _propagate(self, pool: _Pool) -> List[Expr]:
        found: List[Expr] = []
        seen: Set[str] = set()
        for g in self.sys.goals:
            for binding in self._embeddings(g, pool):
                e = subst_expr(g.constraint, binding)
                parts = conjuncts(e)
                negs = [p for p in parts if isinstance(p, Not)]
                pos = [p for p in parts if not isinstance(p, Not)]
                if len(negs) == 1:
                    rendered: Expr = Implies(conj(pos), negs[0].arg) if pos else negs[0].arg
                else:
                    rendered = negate(e)
                key = repr(rendered)
                if key not in seen:
                    seen.add(key)
                    found.append(rendered)
                    self.stats["propagated_constraints"] += 1
        return found

    # -- clause processing -------------------------------------------------------

    def _unfold_cata_atoms(self, atoms: List[Atom], constraints: List[Expr],
                           head_terms: List[Term], supply: NameSupply) -> Optional[bool]:
        """Unfold every catamorphism atom applied to a constructor term."""
        changed = True
        while changed:
            changed = False
            for i, a in enumerate(atoms):
                info = self.catas.get(a.pred)
                if info is None or not isinstance(a.args[info.list_pos], Ctor):
                    continue
                resolvent = None
                for c2 in self.sys.clauses_of(a.pred):
                    ren = rename_apart(c2, supply)
                    assert ren.head is not None
                    env: Optional[Binding] = {}
                    for pa, ta in zip(ren.head.args, a.args):
                        env = unify_terms(pa, ta, env)
                        if env is None:
                            break
                    if env is not None:
                        resolvent = (ren, resolve(env))
                        break
                if resolvent is None:
                    return None  # no case applies: the clause is vacuous
                ren, binding = resolvent
                del atoms[i]
                atoms.extend(subst_atom(b, binding) for b in ren.body)
                constraints.append(subst_expr(ren.constraint, binding))
                # the binding may touch the rest of the clause
                atoms[:] = [subst_atom(b, binding) for b in atoms]
                constraints[:] = [subst_expr(c, binding) for c in constraints]
                head_terms[:] = [subst_term(t, binding) for t in head_terms]
                self.stats["unfold_steps"] += 1
                changed = True
                break
        return True

    def _dedup_head(self, terms: List[Term], supply: NameSupply) -> Tuple[List[Var], List[Expr]]:
        seen: Set[str] = set()
        vars_out: List[Var] = []
        eqs: List[Expr] = []
        for t in terms:
            if isinstance(t, Var) and t.name not in seen:
                seen.add(t.name)
                vars_out.append(t)
                continue
            sort = t.sort if isinstance(t, Var) else (INT if isinstance(t, IntConst) else BOOL)
            base = t.name if isinstance(t, Var) else ("V" if sort == INT else "B")
            v = Var(supply.fresh(base), sort)
            seen.add(v.name)
            vars_out.append(v)
            eqs.append(Iff(v, t) if sort == BOOL else Cmp("=", v, t))
        return vars_out, eqs

    def _process_definition(self, d: Definition) -> None:
        for case_i, dc in enumerate(self.sys.clauses_of(d.subject_pred)):
            names = {v.name for a in d.body for v in a.vars()} | {v.name for v in d.head_vars}
            supply = NameSupply(names)
            ren = rename_apart(dc, supply)
            assert ren.head is not None
            env: Optional[Binding] = {}
            for da, ra in zip(d.subject.args, ren.head.args):
                env = unify_terms(da, ra, env)
                if env is None:
                    break
            if env is None:
                self.stats["pruned_cases"] += 1
                self.trace.append(TraceStep("prune", def_name=d.name, case_index=case_i))
                continue
            binding = resolve(env)
            atoms = [subst_atom(a, binding) for a in d.body[1:]]
            atoms += [subst_atom(a, binding) for a in ren.body]
            constraints = [subst_expr(ren.constraint, binding)]
            head_terms: List[Term] = [subst_term(v, binding) for v in d.head_vars]
            self.stats["unfold_steps"] += 1

            if self._unfold_cata_atoms(atoms, constraints, head_terms, supply) is None:
                self.stats["pruned_cases"] += 1
                self.trace.append(TraceStep("prune", def_name=d.name, case_index=case_i))
                continue

            pool = _Pool(list(atoms), supply)
            subject_idxs = [i for i, a in enumerate(pool.atoms) if a.pred not in self.catas]
            plans, pool = self._plan_folds(pool, subject_idxs, origin="clause")
            extra = self._propagate(pool)

            head_vars, eqs = self._dedup_head([pool.resolve(t) for t in head_terms], pool.supply)
            body = tuple(Atom(p.def_name, tuple(pool.resolve(t) for t in p.head_terms))
                         for p in plans)
            parts = eqs + [c for c in constraints if c != TRUE] + extra
            out = Clause(Atom(d.name, tuple(head_vars)), conj(parts), body)
            self._check_basic(out)
            self.emitted.append(out)
            self.stats["emitted_clauses"] += 1
            self.trace.append(TraceStep("emit", def_name=d.name, case_index=case_i, clause=out))

    def _fold_goal(self, gi: int, g: Clause) -> None:
        pool = _Pool(list(g.body), NameSupply(clause_var_names(g)))
        subject_idxs = [i for i, a in enumerate(pool.atoms) if a.pred not in self.catas]
        plans, pool = self._plan_folds(pool, subject_idxs, origin="goal:%d" % gi)
        eqs: List[Expr] = []
        body: List[Atom] = []
        for p in plans:
            vars_out, atom_eqs = self._dedup_head([pool.resolve(t) for t in p.head_terms], pool.supply)
            eqs.extend(atom_eqs)
            body.append(Atom(p.def_name, tuple(vars_out)))
        out = Clause(None, conj(eqs + [g.constraint]), tuple(body))
        self._check_basic(out)
        self.folded_goals[gi] = out
        self.goal_defs[gi] = plans[0].def_name
        self.stats["folded_goals"] += 1
        self.trace.append(TraceStep("fold_goal", goal_index=gi, clause=out,
                                    def_name=plans[0].def_name))

    @staticmethod
    def _check_basic(c: Clause) -> None:
        for v in c.vars():
            if not v.sort.is_basic():
                raise TransformError("ADT variable %s escaped into an output clause" % v.name)
        for a in ((c.head,) if c.head else ()) + c.body:
            for t in a.args:
                if isinstance(t, (Ctor,)):
                    raise TransformError("constructor term escaped into an output clause")

    def run(self) -> TransformResult:
        if not any(_clause_has_adt(g) for g in self.sys.goals):
            # already basic-sorted at every goal: nothing to remove
            return TransformResult(self.sys, {}, {}, [], dict(self.stats))
        for gi, g in enumerate(self.sys.goals):
            self._fold_goal(gi, g)
        while self.worklist:
            self._process_definition(self.defs[self.worklist.popleft()])
        preds = {d.name: d.signature() for d in self.defs.values()}
        out = ChcSystem({}, preds, list(self.emitted),
                        [g for g in self.folded_goals if g is not None])
        out.validate()
        return TransformResult(out, dict(self.defs), dict(self.goal_defs),
                               list(self.trace), dict(self.stats))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def t_cata(system: ChcSystem, catas: Optional[Dict[str, CatamorphismInfo]] = None,
           budget: int = 64) -> TransformResult:
    """Eliminate ADT arguments from the system; see the module docstring."""
    if catas is None:
        catas, _ = recognize_all(system)
    return _Transformer(system, catas, budget).run()


def unfold(system: ChcSystem, clause: Clause, atom_index: int) -> List[Clause]:
    """Resolve the given body atom against each of its defining clauses."""
    target = clause.body[atom_index]
    rest = clause.body[:atom_index] + clause.body[atom_index + 1:]
    out: List[Clause] = []
    supply = NameSupply(clause_var_names(clause))
    for dc in system.clauses_of(target.pred):
        ren = rename_apart(dc, supply)
        assert ren.head is not None
        env: Optional[Binding] = {}
        for pa, ta in zip(ren.head.args, target.args):
            env = unify_terms(pa, ta, env)
            if env is None:
                break
        if env is None:
            continue
        binding = resolve(env)
        body = tuple(subst_atom(a, binding) for a in rest + ren.body)
        constraint = conj([subst_expr(clause.constraint, binding),
                           subst_expr(ren.constraint, binding)])
        head = subst_atom(clause.head, binding) if clause.head else None
        out.append(Clause(head, constraint, body))
    return out


def fold(clause: Clause, definition: Definition,
         catas: Dict[str, CatamorphismInfo]) -> Optional[Clause]:
    """Replace one instance of the definition's body atoms by its head atom.

    Pure matching (no materialization); returns None when the clause does not
    contain an instance.
    """
    for si, s in enumerate(clause.body):
        if s.pred != definition.subject_pred:
            continue
        sigma: Dict[str, Term] = {}

        def dres(t: Term) -> Term:
            while isinstance(t, Var) and t.name in sigma:
                t = sigma[t.name]
            return t

        def unify(pat: Term, tgt: Term) -> bool:
            pat = dres(pat)
            if pat == tgt:
                return True
            if isinstance(pat, Var):
                sigma[pat.name] = tgt
                return True
            if isinstance(pat, Ctor) and isinstance(tgt, Ctor) and pat.name == tgt.name:
                return all(unify(a, b) for a, b in zip(pat.args, tgt.args))
            return False

        if not all(unify(pa, ta) for pa, ta in zip(definition.subject.args, s.args)):
            continue
        consumed = [si]
        ok = True
        for pat in definition.body[1:]:
            hit = None
            saved = dict(sigma)
            for i, a in enumerate(clause.body):
                if i in consumed or a.pred != pat.pred:
                    continue
                if all(unify(pa, ta) for pa, ta in zip(pat.args, a.args)):
                    hit = i
                    break
                sigma.clear(); sigma.update(saved)
            if hit is None:
                ok = False
                break
            consumed.append(hit)
        if not ok:
            continue
        head_terms = tuple(dres(v) for v in definition.head_vars)
        body = tuple(a for i, a in enumerate(clause.body) if i not in consumed)
        return Clause(clause.head, clause.constraint,
                      body + (Atom(definition.name, head_terms),))
    return None


def introduce_definition(name: str, subject: Atom, cata_atoms: Sequence[Atom],
                         subject_pred: Optional[str] = None, extends: Optional[str] = None,
                         origin: str = "manual") -> Definition:
    body = (subject,) + tuple(cata_atoms)
    return Definition(name, subject_pred or subject.pred, body,
                      definition_head_vars(body), extends, origin)


def generalize(d1: Definition, d2: Definition, name: str) -> Definition:
    """The least widening of d1 absorbing every pattern of d2 (same subject)."""
    if d1.subject_pred != d2.subject_pred:
        raise TransformError("cannot generalize definitions of different subjects")
    # rephrase d2 in d1's subject namespace
    env: Optional[Binding] = {}
    for a2, a1 in zip(d2.subject.args, d1.subject.args):
        env = unify_terms(a2, a1, env)
        if env is None:
            raise TransformError("subjects do not unify")
    binding = resolve(env)
    have = {(a.pred, tuple(a.args)) for a in d1.body}
    extra: List[Atom] = []
    supply = NameSupply({v.name for a in d1.body for v in a.vars()})
    pos = len(d1.head_vars)
    for a in d2.body[1:]:
        moved = subst_atom(a, binding)
        info_args: List[Term] = []
        matched = any(h[0] == moved.pred and
                      all((x == y) or (isinstance(x, Var) and isinstance(y, Var) and
                          x.sort.is_basic() and y.sort.is_basic())
                          for x, y in zip(h[1], moved.args))
                      for h in have)
        if matched:
            continue
        for t in moved.args:
            if isinstance(t, Var) and t.sort.is_basic():
                pos += 1
                info_args.append(Var(_fresh_slot(supply, pos), t.sort))
            else:
                info_args.append(t)
        extra.append(Atom(moved.pred, tuple(info_args)))
    body = d1.body + tuple(extra)
    return Definition(name, d1.subject_pred, body, definition_head_vars(body),
                      d1.name, "generalization")


# ---------------------------------------------------------------------------
# trace replay
# ---------------------------------------------------------------------------

def trace_systems(original: ChcSystem, result: TransformResult) -> List[Tuple[str, ChcSystem]]:
    """Materialize the transformation as a sequence of full systems.

    Each step keeps the original clauses, adds definition clauses as they are
    introduced, swaps goals for their folded forms, and appends emitted
    clauses; the least model restricted to the original predicates must be
    invariant across steps (checked by the replay test).
    """
    preds = dict(original.preds)
    clauses = list(original.clauses)
    goals = list(original.goals)
    out: List[Tuple[str, ChcSystem]] = [("input", ChcSystem(dict(original.adts), dict(preds),
                                                            list(clauses), list(goals)))]
    for step in result.trace:
        if step.kind == "introduce":
            d = result.definitions[step.def_name]
            preds[d.name] = d.signature()
            clauses.append(d.as_clause())
            label = "introduce %s" % d.name
        elif step.kind == "fold_goal":
            assert step.clause is not None
            goals[step.goal_index] = step.clause
            label = "fold goal %d with %s" % (step.goal_index, step.def_name)
        elif step.kind == "emit":
            assert step.clause is not None
            clauses.append(step.clause)
            label = "emit %s case %d" % (step.def_name, step.case_index)
        else:
            label = "prune %s case %d" % (step.def_name, step.case_index)
        out.append((label, ChcSystem(dict(original.adts), dict(preds), list(clauses), list(goals))))
    return out


# ---------------------------------------------------------------------------
# bundle serialization (the hand-off format between pipeline stages)
# ---------------------------------------------------------------------------

def write_bundle(result: TransformResult) -> str:
    """Self-contained text form: output clauses, definitions, provenance, stats."""
    from .chc_text import format_clause, format_system
    lines: List[str] = ["[clauses]"]
    lines.append(format_system(result.system).rstrip("\n"))
    lines.append("")
    lines.append("[definitions]")
    for d in result.definitions.values():
        lines.append("def %s subject=%s extends=%s origin=%s"
                     % (d.name, d.subject_pred, d.extends or "-", d.origin))
        lines.append(format_clause(d.as_clause()))
    lines.append("")
    lines.append("[provenance]")
    for idx in sorted(result.goal_defs):
        lines.append("goal %d folded with %s" % (idx, result.goal_defs[idx]))
    lines.append("")
    lines.append("[statistics]")
    for k in sorted(result.statistics):
        lines.append("%s=%d" % (k, result.statistics[k]))
    return "\n".join(lines) + "\n"


def read_bundle(text: str, context: str = "") -> TransformResult:
    """Parse a bundle back into a TransformResult (without the step trace).

    Definition bodies mention the original predicates, whose argument sorts
    are not inferable from the definitions alone; `context` supplies the
    original clause text when definitions are needed.
    """
    from .chc_text import parse_system
    sections: Dict[str, List[str]] = {}
    current: Optional[str] = None
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1]
            sections[current] = []
        elif current is not None:
            sections[current].append(line)
    if "clauses" not in sections:
        raise TransformError("bundle has no [clauses] section")
    system = parse_system("\n".join(sections["clauses"]))

    definitions: Dict[str, Definition] = {}
    meta: List[Tuple[str, str, Optional[str], str]] = []
    clause_lines: List[str] = []
    for line in sections.get("definitions", []):
        s = line.strip()
        if not s:
            continue
        if s.startswith("def "):
            fields = dict(part.split("=", 1) for part in s.split()[2:])
            name = s.split()[1]
            meta.append((name, fields["subject"], None if fields["extends"] == "-" else fields["extends"],
                         fields.get("origin", "?")))
        else:
            clause_lines.append(s)
    if meta:
        ctx_sys = parse_system(context + "\n" + "\n".join(clause_lines))
        by_name = {}
        for c in ctx_sys.clauses:
            assert c.head is not None
            by_name.setdefault(c.head.pred, c)
        for name, subject, extends, origin in meta:
            if name not in by_name:
                raise TransformError("bundle definition %s has no clause" % name)
            c = by_name[name]
            head_vars = tuple(t for t in c.head.args if isinstance(t, Var))
            if len(head_vars) != len(c.head.args):
                raise TransformError("definition %s head must contain only variables" % name)
            definitions[name] = Definition(name, subject, tuple(c.body), head_vars,
                                           extends, origin)

    goal_defs: Dict[int, str] = {}
    for line in sections.get("provenance", []):
        s = line.split()
        if len(s) == 5 and s[0] == "goal" and s[2] == "folded":
            goal_defs[int(s[1])] = s[4]

    statistics: Dict[str, int] = {}
    for line in sections.get("statistics", []):
        s = line.strip()
        if "=" in s:
            k, v = s.split("=", 1)
            statistics[k] = int(v)
    return TransformResult(system, definitions, goal_defs, [], statistics)
