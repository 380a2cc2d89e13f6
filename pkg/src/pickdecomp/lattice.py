"""
Multi-indices and symbolic subsets of the integer lattice Z^d.

Multi-indices are plain tuples of ints.  Variables are labelled 1..d in
every public signature (so ``XSingle(1, n)`` constrains the first
coordinate), matching the usual mathematical convention.

Every set expression decides membership directly from its defining
predicate; :func:`enumerate_set` only ever lists the finite part inside a
box ``[0, box)``, in graded lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError

MultiIndex = tuple[int, ...]


def as_index(alpha: Iterable[int]) -> MultiIndex:
    return tuple(int(a) for a in alpha)


def _check_same_dim(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise DimensionError(f"dimension mismatch: {len(a)} vs {len(b)}")


def leq(alpha: Sequence[int], beta: Sequence[int]) -> bool:
    """Componentwise partial order ``alpha <= beta``."""
    _check_same_dim(alpha, beta)
    return all(a <= b for a, b in zip(alpha, beta))


def graded_lex_key(alpha: Sequence[int]):
    return (sum(alpha), tuple(alpha))


def sort_graded_lex(indices: Iterable[Sequence[int]]) -> list[MultiIndex]:
    return sorted({as_index(a) for a in indices}, key=graded_lex_key)


class IndexSet:
    """Base class for lattice set expressions.

    Subclasses implement ``_mask`` (vectorized membership for an ``(m, d)``
    integer array) and ``dim`` (``None`` when the set adapts to any d).
    """

    dim: int | None = None

    def _mask(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mask(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.int64))
        d = self.dim
        if d is not None and pts.shape[1] != d:
            raise DimensionError(
                f"set has dimension {d}, indices have dimension {pts.shape[1]}")
        return self._mask(pts)

    def __contains__(self, alpha) -> bool:
        return bool(self.mask([as_index(alpha)])[0])

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return Union(self, other)

    def __and__(self, other: "IndexSet") -> "IndexSet":
        return Intersect(self, other)

    def __sub__(self, other: "IndexSet") -> "IndexSet":
        return Diff(self, other)


def _merge_dims(*dims):
    known = {d for d in dims if d is not None}
    if len(known) > 1:
        raise DimensionError(f"cannot combine sets of dimensions {sorted(known)}")
    return known.pop() if known else None


@dataclass(frozen=True)
class Orthant(IndexSet):
    """The non-negative orthant Z_+^d."""

    d: int

    @property
    def dim(self):
        return self.d

    def _mask(self, pts):
        return np.all(pts >= 0, axis=1)


@dataclass(frozen=True)
class ShiftedOrthant(IndexSet):
    """``{alpha : alpha >= n}``."""

    n: MultiIndex

    @property
    def dim(self):
        return len(self.n)

    def _mask(self, pts):
        return np.all(pts >= np.asarray(self.n), axis=1)


@dataclass(frozen=True)
class BSet(IndexSet):
    """``B = {alpha >= 0 : alpha not >= n}``, i.e. some alpha_j < n_j."""

    n: MultiIndex

    @property
    def dim(self):
        return len(self.n)

    def _mask(self, pts):
        return np.all(pts >= 0, axis=1) & np.any(pts < np.asarray(self.n), axis=1)


@dataclass(frozen=True)
class XSingle(IndexSet):
    """``X_j = {alpha >= 0 : alpha_j < n_j}`` (j is 1-based)."""

    j: int
    n: MultiIndex

    def __post_init__(self):
        if not 1 <= self.j <= len(self.n):
            raise DimensionError(f"variable {self.j} out of range 1..{len(self.n)}")

    @property
    def dim(self):
        return len(self.n)

    def _mask(self, pts):
        return np.all(pts >= 0, axis=1) & (pts[:, self.j - 1] < self.n[self.j - 1])


@dataclass(frozen=True)
class XUnion(IndexSet):
    """``X_S``: union of ``X_j`` over ``j in S``; the empty union is ``{0}``."""

    S: frozenset
    n: MultiIndex

    def __init__(self, S, n):
        object.__setattr__(self, "S", frozenset(int(j) for j in S))
        object.__setattr__(self, "n", as_index(n))
        for j in self.S:
            if not 1 <= j <= len(self.n):
                raise DimensionError(f"variable {j} out of range 1..{len(self.n)}")

    @property
    def dim(self):
        return len(self.n)

    def _mask(self, pts):
        if not self.S:
            return np.all(pts == 0, axis=1)
        cols = sorted(j - 1 for j in self.S)
        n = np.asarray(self.n)[cols]
        return np.all(pts >= 0, axis=1) & np.any(pts[:, cols] < n, axis=1)


@dataclass(frozen=True)
class Box(IndexSet):
    """``{alpha : 0 <= alpha < upper}``."""

    upper: MultiIndex

    @property
    def dim(self):
        return len(self.upper)

    def _mask(self, pts):
        return np.all((pts >= 0) & (pts < np.asarray(self.upper)), axis=1)


@dataclass(frozen=True)
class Singleton(IndexSet):
    alpha: MultiIndex

    @property
    def dim(self):
        return len(self.alpha)

    def _mask(self, pts):
        return np.all(pts == np.asarray(self.alpha), axis=1)


@dataclass(frozen=True)
class Union(IndexSet):
    a: IndexSet
    b: IndexSet

    @property
    def dim(self):
        return _merge_dims(self.a.dim, self.b.dim)

    def _mask(self, pts):
        return self.a._mask(pts) | self.b._mask(pts)


@dataclass(frozen=True)
class Intersect(IndexSet):
    a: IndexSet
    b: IndexSet

    @property
    def dim(self):
        return _merge_dims(self.a.dim, self.b.dim)

    def _mask(self, pts):
        return self.a._mask(pts) & self.b._mask(pts)


@dataclass(frozen=True)
class Diff(IndexSet):
    a: IndexSet
    b: IndexSet

    @property
    def dim(self):
        return _merge_dims(self.a.dim, self.b.dim)

    def _mask(self, pts):
        return self.a._mask(pts) & ~self.b._mask(pts)


def contains(expr: IndexSet, alpha: Sequence[int]) -> bool:
    return as_index(alpha) in expr


def box_points(box: Sequence[int]) -> np.ndarray:
    """All points of ``[0, box)`` as an ``(m, d)`` array in graded-lex order."""
    box = as_index(box)
    if not box or any(b < 1 for b in box):
        raise ValueError(f"box components must be >= 1, got {box}")
    grids = np.meshgrid(*[np.arange(b) for b in box], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    # lexsort uses the last key as primary
    order = np.lexsort(tuple(pts[:, k] for k in reversed(range(len(box)))) + (pts.sum(axis=1),))
    return pts[order]


def enumerate_array(expr: IndexSet, box: Sequence[int]) -> np.ndarray:
    pts = box_points(box)
    if expr.dim is not None and expr.dim != pts.shape[1]:
        raise DimensionError(f"set has dimension {expr.dim}, box has {pts.shape[1]}")
    return pts[expr.mask(pts)]


def enumerate_set(expr: IndexSet, box: Sequence[int]) -> list[MultiIndex]:
    """Members of ``expr`` inside ``[0, box)``, graded lexicographic order."""
    return [tuple(int(v) for v in row) for row in enumerate_array(expr, box)]


def unit(j: int, d: int) -> MultiIndex:
    """Unit multi-index ``e_j`` (1-based)."""
    return tuple(1 if k == j - 1 else 0 for k in range(d))
