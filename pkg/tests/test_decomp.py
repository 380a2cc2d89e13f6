import numpy as np
import pytest

from pickdecomp.decomp import (DecompositionSpec, KernelFactory, agler_pair, build_KS, build_LS,
                               complement, decompose, exact_difference_identity, gkvw_pair,
                               min_eigenvalue, proper_subsets, truncation_sweep)
from pickdecomp.errors import DimensionError
from pickdecomp.kernels import Difference
from pickdecomp.pointsets import PointSet
from pickdecomp.stablepoly import StablePolynomial, affine

from conftest import corpus_d2, corpus_d3

ONE2 = StablePolynomial.constant(1, (1, 1))
HALFPT = PointSet.explicit([[0.5, 0.5]], 0.5)


def tail(N):
    return 2 * 0.25 ** N / 0.75


def test_build_KS_trivial():
    K = build_KS(DecompositionSpec(ONE2, {1}, 16))
    assert K((0.5, 0.5), (0.5, 0.5)) == pytest.approx(4 / 3 - 4 * 0.25 ** 16 / 3, abs=1e-14)


def test_build_LS_trivial():
    # L_T with T = {2} is the kernel of span{z_2^l : 1 <= l < N}
    L = build_LS(DecompositionSpec(ONE2, {2}, 16))
    assert L((0.5, 0.5), (0.5, 0.5)) == pytest.approx((0.25 - 0.25 ** 16) / 0.75, abs=1e-14)
    L40 = build_LS(DecompositionSpec(ONE2, {2}, 40), KernelFactory.build(ONE2, 40, M=128))
    assert L40((0.5, 0.5), (0.5, 0.5)) == pytest.approx(1 / 3, abs=1e-14)


@pytest.mark.parametrize("N", [4, 8, 16])
def test_decompose_trivial_residual(N):
    res = decompose(DecompositionSpec(ONE2, {1}, N), points=HALFPT)
    assert res.P((0.5, 0.5), (0.5, 0.5)) == pytest.approx(5 / 3)
    assert res.max_residual == pytest.approx(tail(N), abs=1e-12)
    assert abs(res.max_residual - tail(N)) < 1e-10


def test_decompose_trivial_values():
    assert tail(4) == pytest.approx(1.04e-2, rel=2e-3)
    assert tail(8) == pytest.approx(4.07e-5, rel=2e-3)


def test_spec_validation():
    with pytest.raises(ValueError):
        DecompositionSpec(ONE2, set(), 4)
    with pytest.raises(ValueError):
        DecompositionSpec(ONE2, {1, 2}, 4)
    with pytest.raises(DimensionError):
        DecompositionSpec(StablePolynomial.constant(1, (1,)), {1}, 4)
    with pytest.raises(ValueError):
        DecompositionSpec(ONE2, {1}, 0)


def test_subsets_and_complement():
    assert proper_subsets(3) == [frozenset(s) for s in ({1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3})]
    assert complement({1, 3}, 3) == {2}


def all_cases():
    return list(corpus_d2().items()) + list(corpus_d3().items())


@pytest.mark.parametrize("name,p", all_cases(), ids=[c[0] for c in all_cases()])
def test_exact_identities_every_N(name, p):
    pts = PointSet.random(p.d, 12, 0.6, 0)
    fac = KernelFactory.build(p, 8)
    for N in (4, 8):
        for S in proper_subsets(p.d):
            spec = DecompositionSpec(p, S, N)
            scale = np.max(np.abs(fac.K(S, N).diagonal(pts.points)))
            assert exact_difference_identity(spec, pts, fac) < 1e-9 * scale
            for S2 in proper_subsets(p.d):
                if S < S2:
                    D = Difference(fac.K(S, N), fac.K(S2, N))
                    assert min_eigenvalue(D, pts) >= -1e-9 * scale
            for K in (fac.K(S, N), fac.L(S, N)):
                M = K.matrix(pts.points)
                assert np.linalg.eigvalsh(M)[0] >= -1e-9 * scale


@pytest.mark.parametrize("name,p", list(corpus_d2().items()), ids=list(corpus_d2()))
def test_ladder_drops(name, p):
    pts = PointSet.random(2, 12, 0.5, 0)
    rows = truncation_sweep(p, {1}, (4, 8, 16), pts)
    r = [row.max_residual for row in rows]
    assert r[0] >= 10 * r[1] and r[1] >= 10 * r[2] and r[2] < 1e-5
    diag = np.array([row.diagonal_K_S for row in rows])
    assert np.all(np.diff(diag, axis=0) >= -1e-10)


def test_sweep_trivial_closed_form():
    rows = truncation_sweep(ONE2, {1}, (4, 8, 16), HALFPT)
    for row in rows:
        assert abs(row.max_residual - tail(row.N)) < 1e-10
    with pytest.raises(ValueError):
        truncation_sweep(ONE2, {1}, (8, 4), HALFPT)


def test_contractivity_at_top():
    p = affine(4, [1, 1])
    pts = PointSet.random(2, 12, 0.6, 0)
    rows = truncation_sweep(p, {1}, (4, 8, 16), pts)
    assert rows[-1].min_contractivity_eig >= -1e-6


def test_agler_pair_trivial_and_affine():
    pts = PointSet.random(2, 12, 0.5, 0)
    g = agler_pair(ONE2, None, 24, KernelFactory.build(ONE2, 24, M=64))
    assert g.identity_residual(pts) < 1e-12
    p = affine(4, [1, 1])
    pair = agler_pair(p, None, 16)
    assert pair.identity_residual(pts) < 1e-5
    assert all(min_eigenvalue(K, pts) >= -1e-6 for K in pair)
    with pytest.raises(DimensionError):
        agler_pair(affine(8, [1, 1, 1]))


def test_gkvw_pair_validation():
    p = affine(8, [1, 1, 1])
    with pytest.raises(ValueError):
        gkvw_pair(p, j=1, k=1)
    with pytest.raises(ValueError):
        gkvw_pair(p, j=1, k=2, S={1, 2})
    with pytest.raises(DimensionError):
        gkvw_pair(p, j=4, k=1)


def test_gkvw_general_S():
    p = affine(8, [1, 1, 1])
    pts = PointSet.random(3, 12, 0.5, 0)
    fac = KernelFactory.build(p, 16)
    pair = gkvw_pair(p, None, 2, 3, 16, S={1, 2}, factory=fac)
    assert pair.identity_residual(pts) < 1e-5
    assert all(min_eigenvalue(K, pts) >= -1e-6 for K in pair)


def test_factory_range_check():
    fac = KernelFactory.build(ONE2, 4)
    with pytest.raises(ValueError):
        fac.K({1}, 8)
