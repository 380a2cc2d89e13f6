"""
Truncated decompositions of the Pick kernel ``P`` for ``f = p~/p``.

For a nontrivial partition ``S | T`` of the variables {1..d}:

* ``K_S`` is the reproducing kernel of ``L^2_mu(X_T)`` (the roles of S
  and T really are swapped here), approximated by the Gram kernel of the
  monomials in ``X_T cap [0, N)^d``;
* ``L_S`` is the kernel of ``L^2_mu(X_T) (-) L^2_mu(X_S cap X_T)``,
  approximated by the difference of the two truncated Gram kernels, which
  is exactly PSD at every N because the subspaces are nested.

``P = K_S + L_T`` holds in the limit ``N -> oo``; the identities
``K_S - L_S = K_T - L_T`` and the orderings ``K_S >= K_S'`` for ``S <= S'``
already hold at every finite N.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError
from .gram import GramMatrix
from .kernels import (Difference, ExplicitP, GramSubspace, Kernel, PNormalized,
                      ProductFactor, SchurDefect, ShiftFactor, Sum)
from .lattice import IndexSet, MultiIndex, XUnion, as_index, enumerate_array
from .moments import MomentCache, MomentTable, compute_moments
from .pointsets import PointSet
from .stablepoly import StablePolynomial

DEFAULT_LADDER = (4, 8, 16)


def _fmt(S) -> str:
    return "{" + ",".join(str(j) for j in sorted(S)) + "}"


def proper_subsets(d: int) -> list[frozenset]:
    """Nonempty proper subsets of {1..d}, ordered by size then lexicographically."""
    out = []
    for k in range(1, d):
        out.extend(frozenset(c) for c in itertools.combinations(range(1, d + 1), k))
    return out


def complement(S, d: int) -> frozenset:
    return frozenset(range(1, d + 1)) - frozenset(S)


@dataclass
class DecompositionSpec:
    p: StablePolynomial
    S: frozenset
    N: int
    n: MultiIndex | None = None
    points: PointSet | None = None

    def __post_init__(self):
        self.S = frozenset(int(j) for j in self.S)
        self.n = self.p.degree if self.n is None else as_index(self.n)
        d = self.p.d
        if d < 2:
            raise DimensionError("decompositions need d >= 2")
        if len(self.n) != d:
            raise DimensionError("degree bound dimension mismatch")
        if not self.S or not self.S < frozenset(range(1, d + 1)):
            raise ValueError(f"S = {_fmt(self.S)} must be a nonempty proper subset of 1..{d}")
        if int(self.N) < 1:
            raise ValueError("truncation N must be positive")
        self.N = int(self.N)

    @property
    def d(self) -> int:
        return self.p.d

    @property
    def T(self) -> frozenset:
        return complement(self.S, self.d)


class KernelFactory:
    """Truncated subspace kernels for one polynomial, sharing a moment table.

    Gram matrices are cached per (index set, N), so kernels that share a
    subspace at the same truncation reuse one factorization.
    """

    def __init__(self, p: StablePolynomial, table: MomentTable, n=None):
        self.p = p
        self.n = p.degree if n is None else as_index(n)
        self.table = table
        self._grams: dict = {}
        self.P = ExplicitP(p, self.n)

    @classmethod
    def build(cls, p: StablePolynomial, N_max: int, n=None, M: int | None = None,
              cache: MomentCache | None = None, tol: float | None = None) -> "KernelFactory":
        R = (N_max - 1,) * p.d
        return cls(p, compute_moments(p, R, M, cache=cache, tol=tol), n)

    def gram(self, expr: IndexSet, N: int) -> GramMatrix | None:
        key = (expr, N)
        if key not in self._grams:
            if not self.table.covers((N - 1,) * self.p.d):
                raise ValueError(f"moment table range {self.table.R} does not cover N = {N}")
            idx = enumerate_array(expr, (N,) * self.p.d)
            self._grams[key] = GramMatrix(self.table, idx) if idx.shape[0] else None
        return self._grams[key]

    def subspace(self, expr: IndexSet, N: int, label: str | None = None) -> Kernel:
        g = self.gram(expr, N)
        if g is None:
            return _Zero(self.p.d, label)
        return GramSubspace(g, label)

    def grams(self):
        return [g for g in self._grams.values() if g is not None]

    def X(self, S) -> XUnion:
        return XUnion(S, self.n)

    def K(self, S, N: int) -> Kernel:
        """Truncation of ``K_S``: the Gram kernel of ``X_T``."""
        T = complement(S, self.p.d)
        return self.subspace(self.X(T), N, f"K_{_fmt(S)}^{N}")

    def intersection(self, S, N: int) -> Kernel:
        T = complement(S, self.p.d)
        return self.subspace(self.X(S) & self.X(T), N, f"K(X{_fmt(S)}&X{_fmt(T)})^{N}")

    def L(self, S, N: int) -> Kernel:
        """Truncation of ``L_S``: Gram kernel of ``X_T`` minus that of ``X_S cap X_T``."""
        T = complement(S, self.p.d)
        # the intersection is enumerated from the T side so the two Grams of
        # K_S - L_S = K_T - L_T come from separately built index sets
        inter = self.subspace(self.X(T) & self.X(S), N)
        out = Difference(self.K(S, N), inter)
        out.label = f"L_{_fmt(S)}^{N}"
        return out


class _Zero(Kernel):
    def __init__(self, d, label=None):
        self.d = d
        self.label = label

    def _matrix(self, Z, W):
        return np.zeros((Z.shape[0], W.shape[0]), dtype=complex)

    def describe(self):
        return self.label or "0"


def _label(K: Kernel) -> str:
    return getattr(K, "label", None) or K.describe()


def _factory_for(spec: DecompositionSpec, factory: KernelFactory | None) -> KernelFactory:
    if factory is None:
        return KernelFactory.build(spec.p, spec.N, spec.n)
    return factory


def build_KS(spec: DecompositionSpec, factory: KernelFactory | None = None) -> Kernel:
    return _factory_for(spec, factory).K(spec.S, spec.N)


def build_LS(spec: DecompositionSpec, factory: KernelFactory | None = None) -> Kernel:
    return _factory_for(spec, factory).L(spec.S, spec.N)


@dataclass
class DecompositionResult:
    spec: DecompositionSpec
    P: Kernel
    K_S: Kernel
    L_S: Kernel
    K_T: Kernel
    L_T: Kernel
    max_residual: float | None = None
    residual_matrix: np.ndarray | None = field(default=None, repr=False)

    def residual_kernel(self) -> Kernel:
        """``P - K_S - L_T``."""
        return Difference(self.P, Sum(self.K_S, self.L_T))


def decompose(spec: DecompositionSpec, factory: KernelFactory | None = None,
              points: PointSet | None = None) -> DecompositionResult:
    """Truncated kernels for ``P = K_S + L_T``, with the residual on ``points``."""
    fac = _factory_for(spec, factory)
    res = DecompositionResult(spec, fac.P, fac.K(spec.S, spec.N), fac.L(spec.S, spec.N),
                              fac.K(spec.T, spec.N), fac.L(spec.T, spec.N))
    pts = points if points is not None else spec.points
    if pts is not None:
        R = res.residual_kernel().matrix(pts.points)
        res.residual_matrix = R
        res.max_residual = float(np.max(np.abs(R)))
    return res


def exact_difference_identity(spec: DecompositionSpec, points: PointSet,
                              factory: KernelFactory | None = None) -> float:
    """``max |(K_S - L_S) - (K_T - L_T)|`` over point pairs."""
    fac = _factory_for(spec, factory)
    lhs = Difference(fac.K(spec.S, spec.N), fac.L(spec.S, spec.N))
    rhs = Difference(fac.K(spec.T, spec.N), fac.L(spec.T, spec.N))
    return float(np.max(np.abs(lhs.matrix(points.points) - rhs.matrix(points.points))))


# -- Schur-normalized pairs ------------------------------------------------


@dataclass
class KernelPair:
    """Two kernels with the variable products multiplying them in the identity

        1 - f(z) conj f(w) = prod_{r in V1}(1 - z_r w_r*) A + prod_{r in V2}(1 - z_r w_r*) B.
    """

    first: Kernel
    second: Kernel
    first_vars: tuple
    second_vars: tuple
    defect: Kernel

    def __iter__(self):
        return iter((self.first, self.second))

    def residual_kernel(self) -> Kernel:
        rhs = Sum(ProductFactor(self.first_vars, self.first),
                  ProductFactor(self.second_vars, self.second))
        return Difference(self.defect, rhs)

    def identity_residual(self, points: PointSet) -> float:
        return float(np.max(np.abs(self.residual_kernel().matrix(points.points))))


def agler_pair(p: StablePolynomial, n=None, N: int = 16,
               factory: KernelFactory | None = None) -> KernelPair:
    """Agler kernels ``(Gamma_1, Gamma_2)`` for d = 2:

    ``1 - f f* = (1 - z_1 w_1*) Gamma_1 + (1 - z_2 w_2*) Gamma_2`` with
    ``Gamma_2 = (1 - z_1 w_1*) K_{1} / pp*`` and ``Gamma_1 = (1 - z_2 w_2*) L_{2} / pp*``.
    """
    if p.d != 2:
        raise DimensionError("Agler pairs are built for d = 2 only")
    fac = factory or KernelFactory.build(p, N, n)
    g2 = PNormalized(ShiftFactor(1, fac.K({1}, N)), p)
    g1 = PNormalized(ShiftFactor(2, fac.L({2}, N)), p)
    return KernelPair(g1, g2, (1,), (2,), SchurDefect(p, fac.n))


def gkvw_pair(p: StablePolynomial, n=None, j: int = 1, k: int = 2, N: int = 16,
              S=None, factory: KernelFactory | None = None) -> KernelPair:
    """Two-term decomposition with products over all variables but one:

    ``1 - f f* = prod_{r != j}(1 - z_r w_r*) K + prod_{r != k}(1 - z_r w_r*) K'``,
    ``K = (1 - z_j w_j*) K_S / pp*``, ``K' = (1 - z_k w_k*) L_T / pp*``
    for ``j in S``, ``k in T``; ``S`` defaults to ``{j}``.
    """
    d = p.d
    if d < 2:
        raise DimensionError("GKVW pairs need d >= 2")
    if j == k:
        raise ValueError("j and k must differ")
    if not (1 <= j <= d and 1 <= k <= d):
        raise DimensionError(f"variables must lie in 1..{d}")
    S = frozenset({j}) if S is None else frozenset(S)
    T = complement(S, d)
    if j not in S or k not in T:
        raise ValueError("need j in S and k in the complement of S")
    fac = factory or KernelFactory.build(p, N, n)
    K = PNormalized(ShiftFactor(j, fac.K(S, N)), p)
    Kp = PNormalized(ShiftFactor(k, fac.L(T, N)), p)
    others_j = tuple(r for r in range(1, d + 1) if r != j)
    others_k = tuple(r for r in range(1, d + 1) if r != k)
    return KernelPair(K, Kp, others_j, others_k, SchurDefect(p, fac.n))


# -- truncation ladders ----------------------------------------------------


def min_eigenvalue(K: Kernel, points: PointSet) -> float:
    M = K.matrix(points.points)
    return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])


@dataclass
class SweepRow:
    N: int
    max_residual: float
    min_contractivity_eig: float
    diagonal_K_S: list

    def to_json_dict(self):
        return {"N": self.N, "max_residual": self.max_residual,
                "min_contractivity_eig": self.min_contractivity_eig,
                "diagonal_K_S": self.diagonal_K_S}


def truncation_sweep(p: StablePolynomial, S, ladder: Sequence[int] = DEFAULT_LADDER,
                     points: PointSet | None = None, n=None,
                     factory: KernelFactory | None = None) -> list[SweepRow]:
    """Residual of ``P = K_S + L_T`` and the worst contractivity eigenvalue
    of ``(1 - z_j w_j*) K_S^N``, ``(1 - z_j w_j*) L_S^N`` (j in S) per N."""
    ladder = [int(N) for N in ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be strictly increasing")
    points = points or PointSet.random(p.d)
    fac = factory or KernelFactory.build(p, ladder[-1], n)
    rows = []
    for N in ladder:
        spec = DecompositionSpec(p, S, N, fac.n)
        res = decompose(spec, fac, points)
        worst = min(min_eigenvalue(ShiftFactor(j, K), points)
                    for j in sorted(spec.S) for K in (res.K_S, res.L_S))
        diag = res.K_S.diagonal(points.points).real.tolist()
        rows.append(SweepRow(N, res.max_residual, worst, diag))
    return rows
