import json

import numpy as np
import pytest

from pickdecomp.errors import DimensionError, DomainError
from pickdecomp.stablepoly import (StablePolynomial, affine, check_stability, determinantal,
                                   evaluate, gen_corpus, inner_eval, reflect, separable,
                                   torus_abs_extrema, univariate_from_roots)

from conftest import corpus_d2, corpus_d3

HALF = StablePolynomial((1,), {(0,): 1, (1,): -0.5})


def test_evaluate_examples():
    assert evaluate(affine(4, [1, 1]), (1, 1)) == pytest.approx(2)
    one = StablePolynomial.constant(1, (1, 1))
    assert evaluate(one, (0.3 + 0.1j, -0.7)) == 1
    assert evaluate(HALF, 0) == 1


def test_evaluate_batch_and_dimension_check():
    p = affine(4, [1, 1])
    vals = evaluate(p, np.array([[0, 0], [1, 1], [0.5, 0]]))
    assert np.allclose(vals, [4, 2, 3.5])
    with pytest.raises(DimensionError):
        evaluate(p, (1, 2, 3))


def test_reflect_examples():
    one = StablePolynomial.constant(1, (1, 1))
    assert reflect(one, (1, 1)).coefficients == {(1, 1): 1}
    pt = reflect(affine(4, [1, 1]), (1, 1))
    assert pt.coefficients == {(1, 1): 4, (1, 0): -1, (0, 1): -1}
    ph = reflect(HALF, (1,))
    assert ph.coefficients == {(1,): 1, (0,): -0.5}
    assert reflect(ph, (1,)).coefficients == HALF.coefficients


def test_reflect_complex_involution_and_torus_modulus():
    p = gen_corpus("determinantal", 2, seed=5)
    q = reflect(reflect(p))
    assert q.coefficients.keys() == p.coefficients.keys()
    assert all(abs(q.coefficients[a] - c) < 1e-15 for a, c in p.coefficients.items())
    rng = np.random.default_rng(0)
    torus = np.exp(2j * np.pi * rng.uniform(size=(50, 2)))
    assert np.allclose(np.abs(evaluate(p, torus)), np.abs(evaluate(reflect(p), torus)), atol=1e-12)


def test_reflect_rejects_small_bound():
    with pytest.raises(ValueError):
        reflect(affine(4, [1, 1]), (0, 1))


def test_inner_eval_examples():
    one = StablePolynomial.constant(1, (1, 1))
    assert inner_eval(one, (1, 1), (0.5, 0.5)) == pytest.approx(0.25)
    assert inner_eval(HALF, (1,), 0) == pytest.approx(-0.5)
    th = np.exp(1j * np.array([0.4, 2.1]))
    assert abs(inner_eval(one, (1, 1), th)) == pytest.approx(1, abs=1e-14)
    with pytest.raises(DomainError):
        inner_eval(one, (1, 1), (1.2, 0))


@pytest.mark.parametrize("p", list(corpus_d2().values()) + list(corpus_d3().values()))
def test_inner_function_bounded_in_polydisk(p):
    rng = np.random.default_rng(1)
    z = np.sqrt(rng.uniform(size=(100, p.d))) * np.exp(2j * np.pi * rng.uniform(size=(100, p.d)))
    z *= 0.999
    assert np.max(np.abs(inner_eval(p, None, z))) <= 1 + 1e-9


def test_stability_examples():
    v = check_stability(affine(4, [1, 1]))
    assert v.stable and v.margin >= 2 - 1e-12
    assert not check_stability(affine(2, [1, 1])).stable
    assert not check_stability(StablePolynomial((1,), {(0,): 1, (1,): -2})).stable


def test_stability_rejects_interior_zero_missed_by_slices():
    # zero at z = (0.9 i, 0.9 i) region: 1 + z1 z2 / 0.81 has zeros inside
    p = StablePolynomial((1, 1), {(0, 0): 1, (1, 1): 1 / 0.81})
    assert not check_stability(p).stable


def test_stability_grid_minimum():
    with pytest.raises(ValueError):
        check_stability(affine(4, [1, 1]), grid=8)


def test_stability_transcript():
    v = check_stability(affine(8, [1, 1, 1]))
    assert v.stable and v.grid == 64 and len(v.stages) == 3
    assert json.loads(json.dumps(v.to_json_dict()))["stable"] is True


def test_corpus_examples():
    p = gen_corpus("affine", 2, {"c": 4, "a": [1, 1]})
    assert p.coefficients == affine(4, [1, 1]).coefficients
    s = gen_corpus("separable", 2, {"factors": [[1, -0.5], [1, -1 / 3]]})
    expected = {(0, 0): 1, (1, 0): -0.5, (0, 1): -1 / 3, (1, 1): 1 / 6}
    assert s.coefficients.keys() == expected.keys()
    assert all(abs(s.coefficients[a] - c) < 1e-15 for a, c in expected.items())
    d = determinantal(np.zeros((2, 2)))
    assert d.coefficients == {(0, 0): 1}


def test_corpus_parameter_validation():
    with pytest.raises(ValueError):
        gen_corpus("affine", 2, {"c": 2, "a": [1, 1]})
    with pytest.raises(ValueError):
        gen_corpus("separable", 1, {"factors": [[1, -2]]})
    with pytest.raises(ValueError):
        gen_corpus("determinantal", 2, {"matrix": [[1.5, 0], [0, 0]]})


@pytest.mark.parametrize("kind", ["affine", "separable", "determinantal"])
@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_generated_corpus_is_stable(kind, d, seed):
    assert check_stability(gen_corpus(kind, d, seed=seed)).stable


def test_determinantal_matches_direct_determinant():
    rng = np.random.default_rng(3)
    K = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    K *= 0.5 / np.linalg.norm(K, 2)
    p = determinantal(K, [2, 1])
    assert p.degree == (2, 1)
    for z in rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2)):
        direct = np.linalg.det(np.eye(3) - K @ np.diag([z[0], z[0], z[1]]))
        assert evaluate(p, z) == pytest.approx(direct, rel=1e-12, abs=1e-12)


def test_univariate_from_roots():
    c = univariate_from_roots([2, -3])
    assert np.allclose(c, [1, -0.5 + 1 / 3, -1 / 6])


def test_json_roundtrip_and_validation():
    p = gen_corpus("determinantal", 2, seed=4)
    q = StablePolynomial.from_json_dict(json.loads(json.dumps(p.to_json_dict())))
    assert q.coefficients == p.coefficients and q.degree == p.degree
    assert q.content_hash() == p.content_hash()
    bad = p.to_json_dict()
    bad["coefficients"].append(dict(bad["coefficients"][0]))
    with pytest.raises(ValueError):
        StablePolynomial.from_json_dict(bad)
    with pytest.raises(ValueError):
        StablePolynomial((1, 1), {(2, 0): 1})


def test_torus_extrema_affine():
    lo, hi = torus_abs_extrema(affine(4, [1, 1]), 64)
    assert lo == pytest.approx(2) and hi == pytest.approx(6)


def test_separable_builds_product():
    p = separable([[2, 1], [1, 0, 0.25]])
    assert p.degree == (1, 2)
    assert evaluate(p, (0.5, 0.5)) == pytest.approx(2.5 * 1.0625)
