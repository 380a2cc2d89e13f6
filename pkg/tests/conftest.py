from pathlib import Path

import pytest

from pickdecomp.stablepoly import StablePolynomial, affine, gen_corpus, separable

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("PICKDECOMP_CACHE", str(tmp_path / "cache"))


def corpus_d2():
    return {
        "affine": affine(4, [1, 1]),
        "separable": separable([[1, -0.5], [1, -1 / 3]]),
        "determinantal": gen_corpus("determinantal", 2, seed=1),
    }


def corpus_d3():
    return {
        "affine3": affine(8, [1, 1, 1]),
        "determinantal3": gen_corpus("determinantal", 3, seed=3),
    }


@pytest.fixture
def one2():
    return StablePolynomial.constant(1, (1, 1))
