import json

import numpy as np
import pytest

from pickdecomp.errors import RangeError, UnstablePolynomialError
from pickdecomp.moments import (CONVENTION, MomentCache, MomentTable, RootForm, compute_moments,
                                default_M, inner_product, ptilde_orthogonality_residual,
                                separable_oracle, univariate_moment)
from pickdecomp.stablepoly import StablePolynomial, affine, separable, univariate_from_roots

from conftest import corpus_d2, corpus_d3

HALF = StablePolynomial((1,), {(0,): 1, (1,): -0.5})


def test_univariate_oracle_examples():
    f = RootForm((2,))
    assert univariate_moment(f, 0) == pytest.approx(4 / 3, abs=1e-15)
    assert univariate_moment(f, 3) == pytest.approx(1 / 6, abs=1e-15)
    assert univariate_moment(f, -3) == pytest.approx(1 / 6, abs=1e-15)
    assert separable_oracle([RootForm((2,)), RootForm((3,))], (0, 0)) == pytest.approx(1.5)


def test_univariate_oracle_matches_fft_for_complex_roots():
    roots = (1.3 * np.exp(0.4j), -2.0 + 0.5j, 1.8j)
    lead = 0.7 - 0.2j
    f = RootForm(roots, lead)
    p = StablePolynomial.from_dense(univariate_from_roots(roots, lead))
    coarse = compute_moments(p, (8,))
    assert coarse.aliasing_error_estimate > 1e-9  # modulus 1.3 decays slowly at M = 64
    table = compute_moments(p, (8,), tol=1e-14)
    for k in range(-8, 9):
        assert table[(k,)] == pytest.approx(univariate_moment(f, k), abs=1e-13)


def test_rootform_rejects_bad_roots():
    with pytest.raises(ValueError):
        RootForm((0.5,))
    with pytest.raises(ValueError):
        RootForm((2, 2))


def test_separable_oracle_agreement_default_M():
    p = separable([[1, -0.5], [1, -1 / 3]])
    table = compute_moments(p, (8, 8))
    assert table.M == default_M((8, 8)) == 64
    facs = [RootForm((2,)), RootForm((3,))]
    for k in range(-8, 9):
        for l in range(-8, 9):
            assert abs(table[(k, l)] - separable_oracle(facs, (k, l))) < 1e-10


def test_inner_product_convention():
    table = compute_moments(HALF, (3,))
    assert inner_product(table, (2,), (0,)) == pytest.approx(table[(2,)])
    assert inner_product(table, (0,), (2,)) == pytest.approx(np.conj(table[(2,)]))
    assert inner_product(table, (1,), (1,)) == pytest.approx(4 / 3)


@pytest.mark.parametrize("p", list(corpus_d2().values()) + list(corpus_d3().values()),
                         ids=list(corpus_d2()) + list(corpus_d3()))
def test_hermitian_symmetry(p):
    R = (6,) * p.d
    table = compute_moments(p, R)
    v = table.values
    assert np.max(np.abs(v - np.conj(np.flip(v)))) <= 1e-12 * abs(table[(0,) * p.d])


@pytest.mark.parametrize("p", list(corpus_d2().values()), ids=list(corpus_d2()))
def test_aliasing_estimate_decays(p):
    e16 = compute_moments(p, (7, 7), 16).aliasing_error_estimate
    e32 = compute_moments(p, (7, 7), 32).aliasing_error_estimate
    assert e32 * 10 <= e16 or e32 < 1e-15


def test_aliasing_estimate_is_realistic():
    p = affine(4, [1, 1])
    coarse = compute_moments(p, (6, 6), 16)
    fine = compute_moments(p, (6, 6), 256)
    actual = np.max(np.abs(coarse.values - fine.values))
    assert actual <= 2 * coarse.aliasing_error_estimate + 1e-16


def test_adaptive_M():
    p = affine(2.2, [1, 1])
    table = compute_moments(p, (4, 4), 16, tol=1e-12)
    assert table.M > 16 and table.aliasing_error_estimate <= 1e-12


def test_grid_validation():
    with pytest.raises(ValueError):
        compute_moments(HALF, (4,), 48)
    with pytest.raises(ValueError):
        compute_moments(HALF, (40,), 64)


def test_unstable_refused():
    with pytest.raises(UnstablePolynomialError):
        compute_moments(affine(2, [1, 1]), (2, 2))


def test_lookup_range_error():
    table = compute_moments(HALF, (3,))
    with pytest.raises(RangeError):
        table[(4,)]


def test_ptilde_examples():
    one = StablePolynomial.constant(1, (1, 1))
    assert ptilde_orthogonality_residual(one, (1, 1), compute_moments(one, (2, 2)), (2, 2)) == 0
    t = compute_moments(HALF, (2,))
    # alpha = 0, beta = 0: conj(-1/2) C_0 + C_{-1}
    assert abs(-0.5 * t[(0,)] + t[(-1,)]) < 1e-14
    assert ptilde_orthogonality_residual(HALF, (1,), t, (1,), (1,)) < 1e-14
    p = affine(4, [1, 1])
    assert ptilde_orthogonality_residual(p, (1, 1), compute_moments(p, (2, 2), 256), (2, 2)) < 1e-8


def test_ptilde_not_orthogonal_inside_shifted_orthant():
    # alpha >= n + beta is excluded from the claim, and the inner product is nonzero there
    t = compute_moments(HALF, (2,))
    val = np.conj(1.0) * t[(1 - 0 - 1,)] + np.conj(-0.5) * t[(1 - 0 - 0,)]
    assert abs(val) > 0.1


def test_json_roundtrip_and_convention_check():
    table = compute_moments(affine(4, [1, 1]), (3, 2))
    data = json.loads(json.dumps(table.to_json_dict()))
    assert data["header"]["convention"] == CONVENTION
    back = MomentTable.from_json_dict(data)
    assert np.array_equal(back.values, table.values) and back.R == table.R
    data["header"]["convention"] = "C_gamma = int conj(z)^gamma dmu"
    with pytest.raises(ValueError):
        MomentTable.from_json_dict(data)


def test_cache_reuse(tmp_path):
    cache = MomentCache(tmp_path / "c")
    p = affine(4, [1, 1])
    t1 = compute_moments(p, (3, 3), cache=cache)
    files = list((tmp_path / "c").iterdir())
    assert len(files) == 1 and files[0].suffix == ".json"
    assert not any(f.name.endswith(".tmp") for f in files)
    t2 = compute_moments(p, (3, 3), cache=cache)
    assert np.array_equal(t1.values, t2.values)
    assert t2.aliasing_error_estimate == t1.aliasing_error_estimate
