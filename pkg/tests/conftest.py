from __future__ import annotations

from pathlib import Path

import pytest

from ra_kit import derive_algebra, parse_algebra, parse_representation

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def point():
    return parse_algebra(corpus_text("point.ra"))


@pytest.fixture(scope="session")
def leftlinear():
    return parse_algebra(corpus_text("leftlinear.ra"))


@pytest.fixture(scope="session")
def b9_rep():
    return parse_representation(corpus_text("b9.rep"))


@pytest.fixture(scope="session")
def b9(b9_rep):
    return derive_algebra(b9_rep)
