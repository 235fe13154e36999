"""Model back-translation, simplification, partial mode, program emission."""
from __future__ import annotations

import pytest

from strongpost import minifun as mf
from strongpost.horn import PredModel
from strongpost.ir import BoolConst
from strongpost.strengthen import (
    StrengthenedContract, backtranslate, default_partial_recheck, diff_report,
    emit_annotated_program, mf_conj, mf_conjuncts, partial_strengthen,
    simplify, simplify_contract, strengthen_program, strictly_strengthening,
)

RAW_REV = ("forall((n: Int) => (!(hd(l)._1) ==> (is_dsorted(res) && leq_all(n,res)))) && "
           "forall((n: Int) => (is_asorted(l) ==> (is_dsorted(res) && ((hd(l)._2 >= n) ==> leq_all(n,res)))))")
RAW_SNOC = "forall((j1: Int) => ((x >= j1) ==> leq_all(j1,res)))"
FULL_REV_POST = ("is_dsorted(res) && forall((n: Int) => ((!(hd(l)._1) ==> leq_all(n,res)) && "
        "((hd(l)._2 >= n) ==> leq_all(n,res))))")
FULL_SNOC_POST = "is_dsorted(res) && forall((j1: Int) => ((x >= j1) ==> leq_all(j1,res)))"
MIN_REV_POST = "is_dsorted(res) && forall((n: Int) => (((hd(l)._2 >= n) ==> leq_all(n,res))))"


def _same(e, text: str) -> bool:
    want = mf.parse_expr_text(text)
    return (mf.expr_structurally_equal(e, want)
            and mf.format_expr(e) == mf.format_expr(want))


def _scope(prog, fn):
    f = prog.fun(fn)
    scope = dict(f.params)
    scope["res"] = f.ret
    return scope


# ---------------------------------------------------------------------------
# backtranslate
# ---------------------------------------------------------------------------

def test_backtranslate_rev_raw(transform_result, fixture_model, reverse_smap):
    c = backtranslate(fixture_model, transform_result.definitions,
                      reverse_smap, "rev")
    assert c.function == "rev"
    # one top-level conjunct per modeled definition, before any merging
    assert _same(mf_conj(list(c.added)), RAW_REV)
    assert _same(c.original, "is_dsorted(res)")


def test_backtranslate_snoc_replaces_pre_conjunct(transform_result, fixture_model,
                                                  reverse_smap):
    c = backtranslate(fixture_model, transform_result.definitions,
                      reverse_smap, "snoc")
    assert _same(c.added_formula, RAW_SNOC)


def test_backtranslate_trivial_model(transform_result, fixture_model, reverse_smap,
                                     reverse_prog):
    trivial = {name: PredModel(pm.pred, pm.params, BoolConst(True))
               for name, pm in fixture_model.items()}
    c = backtranslate(trivial, transform_result.definitions, reverse_smap, "rev")
    assert _same(c.added_formula, "true")
    c = simplify_contract(reverse_prog, c)
    assert _same(c.combined, "is_dsorted(res)")  # combined post = original


def test_combined_is_conjunction(transform_result, fixture_model, reverse_smap):
    c = backtranslate(fixture_model, transform_result.definitions,
                      reverse_smap, "rev")
    parts = mf_conjuncts(c.combined)
    originals = mf_conjuncts(c.original)
    assert parts[:len(originals)] == originals


# ---------------------------------------------------------------------------
# simplify
# ---------------------------------------------------------------------------

def test_simplify_duplicate_conjunct(reverse_prog):
    out = simplify(mf.parse_expr_text("is_dsorted(res) && is_dsorted(res)"),
                   mf.parse_expr_text("true"),
                   prog=reverse_prog, scope=_scope(reverse_prog, "rev"))
    assert _same(out, "is_dsorted(res)")


def test_simplify_assumed_antecedent(reverse_prog):
    out = simplify(mf.parse_expr_text("is_asorted(l) ==> is_dsorted(res)"),
                   mf.parse_expr_text("is_asorted(l)"),
                   prog=reverse_prog, scope=_scope(reverse_prog, "rev"))
    assert _same(out, "is_dsorted(res)")


def test_simplify_reaches_first_strengthened_form(reverse_prog):
    formula = mf.parse_expr_text("(%s) && is_dsorted(res)" % RAW_REV)
    out = simplify(formula, mf.parse_expr_text("is_asorted(l)"),
                   prog=reverse_prog, scope=_scope(reverse_prog, "rev"))
    assert _same(out, FULL_REV_POST)


def test_simplify_preserves_bounded_truth_guard(reverse_prog):
    # the verifier runs by default; a no-op simplification stays equivalent
    e = mf.parse_expr_text("leq_all(0,res) || !leq_all(0,res)")
    out = simplify(e, mf.parse_expr_text("true"),
                   prog=reverse_prog, scope=_scope(reverse_prog, "rev"))
    from strongpost.strengthen import _holds_everywhere
    scope = _scope(reverse_prog, "rev")
    assert _holds_everywhere(reverse_prog, [mf.parse_expr_text("true")],
                             mf.EBin("==", e, out), scope,
                             2, (-2, 2), mf.DEFAULT_FUEL)


# ---------------------------------------------------------------------------
# contract-level pipeline
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def contracts(transform_result, fixture_model, reverse_smap, reverse_prog):
    out = {}
    for fn in ("rev", "snoc"):
        c = backtranslate(fixture_model, transform_result.definitions,
                          reverse_smap, fn)
        out[fn] = simplify_contract(reverse_prog, c)
    return out


def test_simplified_rev_matches_first_version(contracts):
    assert _same(contracts["rev"].combined, FULL_REV_POST)


def test_simplified_snoc(contracts):
    assert _same(contracts["snoc"].combined, FULL_SNOC_POST)


def test_partial_select_index(contracts):
    c = partial_strengthen(contracts["rev"], [1])
    assert _same(c.combined, MIN_REV_POST)


def test_partial_select_all_identity(contracts):
    c = partial_strengthen(contracts["rev"], [0, 1])
    assert _same(c.combined, FULL_REV_POST)


def test_partial_empty_selection_warns(contracts):
    with pytest.warns(UserWarning):
        c = partial_strengthen(contracts["rev"], [])
    assert _same(c.combined, "is_dsorted(res)")


def test_partial_greedy_min(contracts, reverse_prog):
    recheck = default_partial_recheck(reverse_prog)
    c = partial_strengthen(contracts["rev"], "min", recheck=recheck)
    assert _same(c.combined, MIN_REV_POST)
    assert len(c.added) <= len(contracts["rev"].added)
    assert mf.check_contracts_bounded(
        mf.parse_program(emit_annotated_program(reverse_prog, [c])),
        depth=3, int_range=(-2, 2)) == []
    # snoc's single added conjunct survives greedy mode
    c2 = partial_strengthen(contracts["snoc"], "min", recheck=recheck)
    assert _same(c2.combined, FULL_SNOC_POST)


def test_strictly_strengthening(contracts, reverse_prog):
    assert strictly_strengthening(reverse_prog, "rev", contracts["rev"].added)
    # the original post alone does not strengthen anything
    assert not strictly_strengthening(
        reverse_prog, "rev", [mf.parse_expr_text("is_dsorted(res)")])


# ---------------------------------------------------------------------------
# emit_annotated_program
# ---------------------------------------------------------------------------

def test_emit_empty_contract_list(reverse_prog, reverse_text):
    assert emit_annotated_program(reverse_prog, []) == reverse_text


def test_emit_only_touches_targeted_function(reverse_prog, reverse_text, contracts):
    c = partial_strengthen(contracts["rev"], [1])
    out = emit_annotated_program(reverse_prog, [c])
    for line_old, line_new in zip(reverse_text.splitlines(), out.splitlines()):
        if "ensuring" in line_old and "is_dsorted(res)" in line_old and "forall" in line_new:
            continue
        assert line_old == line_new


def test_emit_reparses_idempotent(reverse_prog, contracts):
    out = emit_annotated_program(reverse_prog, [contracts["rev"], contracts["snoc"]])
    prog2 = mf.parse_program(out)
    again = emit_annotated_program(prog2, [])
    assert again == out


def test_emit_rejects_ill_typed_contract(reverse_prog):
    bad = StrengthenedContract("rev", mf.parse_expr_text("is_dsorted(res)"),
                               (mf.parse_expr_text("res + 1"),))
    with pytest.raises(Exception):
        emit_annotated_program(reverse_prog, [bad])


def test_diff_report_mentions_functions(reverse_prog, contracts):
    text = diff_report(reverse_prog, [contracts["rev"], contracts["snoc"]])
    assert "rev" in text and "snoc" in text
    assert "forall" in text


# ---------------------------------------------------------------------------
# whole-program driver
# ---------------------------------------------------------------------------

def test_strengthen_program_produces_expected_posts(reverse_prog, transform_result,
                                                    fixture_model, reverse_smap):
    out = strengthen_program(reverse_prog, transform_result, fixture_model,
                             reverse_smap)
    by_fn = {c.function: c for c in out.contracts}
    assert _same(by_fn["rev"].combined, FULL_REV_POST)
    assert _same(by_fn["snoc"].combined, FULL_SNOC_POST)
    prog2 = mf.parse_program(out.source)
    posts = {f: mf.format_expr(prog2.fun(f).post) for f in ("rev", "snoc")}
    assert posts["rev"] == mf.format_expr(mf.parse_expr_text(FULL_REV_POST))
    assert posts["snoc"] == mf.format_expr(mf.parse_expr_text(FULL_SNOC_POST))


def test_strengthen_program_partial(reverse_prog, transform_result, fixture_model,
                                    reverse_smap):
    out = strengthen_program(reverse_prog, transform_result, fixture_model,
                             reverse_smap, partial="min")
    by_fn = {c.function: c for c in out.contracts}
    assert _same(by_fn["rev"].combined, MIN_REV_POST)
    assert _same(by_fn["snoc"].combined, FULL_SNOC_POST)
