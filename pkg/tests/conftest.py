"""Fixtures partagées des tests hahnforge"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from src.order.monomials import MonomialGroup  # noqa: E402
from src.series.budget import observation  # noqa: E402

FIXTURES = ROOT / "fixtures"


@pytest.fixture
def line():
    """Groupe de rang 1 engendré par t"""
    return MonomialGroup.of('t')


@pytest.fixture
def plane():
    """Groupe de rang 2, u plus grossier que t"""
    return MonomialGroup.of('u', 't')


@pytest.fixture
def t(line):
    return line.generator('t')


@pytest.fixture
def budget():
    """Budget d'observation ouvert pour la durée du test"""
    with observation(100_000) as active:
        yield active


@pytest.fixture
def corpus_dir():
    return FIXTURES / "corpus"


@pytest.fixture
def closure_dir():
    return FIXTURES / "closure"
