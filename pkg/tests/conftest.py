from __future__ import annotations

import pathlib

import pytest

from strongpost import minifun as mf
from strongpost.chc_text import parse_chc
from strongpost.horn import parse_model
from strongpost.transform import t_cata
from strongpost.translate import translate_to_chcs

HERE = pathlib.Path(__file__).parent
FIXTURES = HERE / "fixtures"
ASSETS = pathlib.Path(__file__).parents[1] / "src" / "strongpost" / "assets"


@pytest.fixture(scope="session")
def reverse_text() -> str:
    return (ASSETS / "reverse.mfun").read_text()


@pytest.fixture(scope="session")
def reverse_prog(reverse_text):
    prog = mf.parse_program(reverse_text)
    mf.typecheck(prog)
    return prog


@pytest.fixture(scope="session")
def reverse_translated(reverse_prog):
    return translate_to_chcs(reverse_prog)


@pytest.fixture(scope="session")
def reverse_system(reverse_translated):
    return reverse_translated[0]


@pytest.fixture(scope="session")
def reverse_smap(reverse_translated):
    return reverse_translated[1]


@pytest.fixture(scope="session")
def transform_result(reverse_system):
    return t_cata(reverse_system)


@pytest.fixture(scope="session")
def fixture_model(transform_result):
    text = (ASSETS / "reverse_model.smt2").read_text()
    return parse_model(text, transform_result.system)


@pytest.fixture(scope="session")
def golden_clauses():
    return parse_chc((FIXTURES / "reverse_clauses.chc").read_text())


@pytest.fixture(scope="session")
def golden_transformed():
    return parse_chc((FIXTURES / "reverse_transformed.chc").read_text())
