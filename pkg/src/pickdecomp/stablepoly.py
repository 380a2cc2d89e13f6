"""
Polynomials without zeros on the closed polydisk.

A :class:`StablePolynomial` stores complex coefficients sparsely together
with a degree bound ``n`` (the multi-degree box ``[0, n]`` that the
reflection ``p~(z) = z^n conj(p(1/conj z))`` refers to).  Stability is
never assumed: :func:`check_stability` runs a staged numerical test and
returns a :class:`StabilityVerdict`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, DomainError, UnstablePolynomialError
from .lattice import MultiIndex, as_index, sort_graded_lex

_COEFF_DROP = 1e-14


@dataclass(frozen=True, eq=False)
class StablePolynomial:
    """Complex polynomial in d variables with multi-degree bounded by ``degree``.

    ``coefficients`` maps multi-indices to complex numbers; entries must
    lie in the box ``0 <= alpha <= degree``.
    """

    degree: MultiIndex
    coefficients: Mapping[MultiIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        degree = as_index(self.degree)
        if not degree or any(k < 0 for k in degree):
            raise ValueError(f"invalid degree bound {degree}")
        coeffs = {}
        for alpha, c in self.coefficients.items():
            alpha = as_index(alpha)
            if len(alpha) != len(degree):
                raise DimensionError(f"index {alpha} does not match dimension {len(degree)}")
            if any(a < 0 or a > n for a, n in zip(alpha, degree)):
                raise ValueError(f"index {alpha} outside degree box {degree}")
            c = complex(c)
            if c != 0:
                coeffs[alpha] = coeffs.get(alpha, 0) + c
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def d(self) -> int:
        return len(self.degree)

    @classmethod
    def from_dense(cls, array, degree=None, drop=_COEFF_DROP) -> "StablePolynomial":
        """Build from a dense coefficient array indexed by exponent."""
        array = np.asarray(array, dtype=complex)
        if degree is None:
            degree = tuple(s - 1 for s in array.shape)
        scale = np.max(np.abs(array)) if array.size else 0.0
        coeffs = {}
        for alpha in zip(*np.nonzero(np.abs(array) > drop * scale)):
            coeffs[as_index(alpha)] = complex(array[alpha])
        return cls(as_index(degree), coeffs)

    @classmethod
    def constant(cls, value, degree) -> "StablePolynomial":
        degree = as_index(degree)
        return cls(degree, {(0,) * len(degree): value})

    def dense(self) -> np.ndarray:
        out = np.zeros(tuple(k + 1 for k in self.degree), dtype=complex)
        for alpha, c in self.coefficients.items():
            out[alpha] = c
        return out

    def actual_degree(self) -> MultiIndex:
        if not self.coefficients:
            return (0,) * self.d
        return tuple(max(a[k] for a in self.coefficients) for k in range(self.d))

    def with_degree(self, degree) -> "StablePolynomial":
        return StablePolynomial(as_index(degree), self.coefficients)

    def __call__(self, z):
        return evaluate(self, z)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "degree": list(self.degree),
            "coefficients": [
                {"index": list(alpha), "re": c.real, "im": c.imag}
                for alpha, c in ((a, self.coefficients[a])
                                 for a in sort_graded_lex(self.coefficients))
            ],
        }

    @classmethod
    def from_json_dict(cls, data) -> "StablePolynomial":
        if not isinstance(data, dict):
            raise ValueError("polynomial JSON must be an object")
        try:
            d = int(data["d"])
            degree = as_index(data["degree"])
            entries = data["coefficients"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"polynomial JSON missing field: {exc}") from None
        if len(degree) != d:
            raise ValueError(f"degree has length {len(degree)} but d = {d}")
        coeffs = {}
        for entry in entries:
            try:
                alpha = as_index(entry["index"])
                value = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"bad coefficient entry {entry!r}: {exc}") from None
            if alpha in coeffs:
                raise ValueError(f"duplicate coefficient index {list(alpha)}")
            coeffs[alpha] = value
        return cls(degree, coeffs)

    def content_hash(self) -> str:
        payload = json.dumps(self.to_json_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def __repr__(self):
        terms = " + ".join(f"({c:.6g})z^{list(a)}"
                           for a, c in ((a, self.coefficients[a])
                                        for a in sort_graded_lex(self.coefficients)))
        return f"StablePolynomial(n={list(self.degree)}: {terms or '0'})"


def as_points(z, d):
    """Normalize to an ``(m, d)`` complex array; returns ``(pts, single)``.

    A scalar (d = 1) or a 1-D array of length d is a single point; a 2-D
    array is a batch of points.
    """
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z, single = z.reshape(1, 1), True
    elif z.ndim == 1:
        z, single = z[None, :], True
    elif z.ndim == 2:
        single = False
    else:
        raise DimensionError(f"points must be 1-D or 2-D, got shape {z.shape}")
    if z.shape[1] != d:
        raise DimensionError(f"points of dimension {z.shape[1]} for {d} variables")
    return z, single


def monomials(pts: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """``out[i, a] = pts[i] ** alphas[a]`` in multi-index notation."""
    pts = np.asarray(pts, dtype=complex)
    alphas = np.asarray(alphas, dtype=np.int64)
    if alphas.size == 0:
        return np.ones((pts.shape[0], 0), dtype=complex)
    top = int(alphas.max()) + 1
    # powers[i, k, e] = pts[i, k] ** e
    powers = pts[:, :, None] ** np.arange(top)[None, None, :]
    out = np.ones((pts.shape[0], alphas.shape[0]), dtype=complex)
    for k in range(pts.shape[1]):
        out *= powers[:, k, alphas[:, k]]
    return out


def evaluate(p: StablePolynomial, z):
    """Evaluate ``p`` at one point (d-tuple) or an ``(m, d)`` array of points."""
    pts, single = as_points(z, p.d)
    if not p.coefficients:
        vals = np.zeros(pts.shape[0], dtype=complex)
    else:
        alphas = np.array(list(p.coefficients), dtype=np.int64)
        coeffs = np.array(list(p.coefficients.values()), dtype=complex)
        vals = monomials(pts, alphas) @ coeffs
    return complex(vals[0]) if single else vals


def reflect(p: StablePolynomial, n=None) -> StablePolynomial:
    """``p~(z) = z^n conj(p(1/conj z))``; coefficientwise ``conj(p_{n - alpha})``."""
    n = p.degree if n is None else as_index(n)
    if len(n) != p.d:
        raise DimensionError(f"degree bound {n} does not match dimension {p.d}")
    actual = p.actual_degree()
    if any(a > k for a, k in zip(actual, n)):
        raise ValueError(f"degree bound {n} smaller than actual degree {actual}")
    coeffs = {tuple(k - a for k, a in zip(n, alpha)): c.conjugate()
              for alpha, c in p.coefficients.items()}
    return StablePolynomial(n, coeffs)


def inner_eval(p: StablePolynomial, n, z):
    """Rational inner function ``p~(z) / p(z)``.

    Torus points are accepted (``|f| = 1`` there); anything outside the
    closed polydisk is a domain error.
    """
    n = p.degree if n is None else as_index(n)
    z_arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(z_arr) > 1 + 1e-12):
        raise DomainError("inner_eval requires points in the closed polydisk")
    num = evaluate(reflect(p, n), z)
    den = evaluate(p, z)
    if np.any(np.abs(den) < 1e-300):
        raise UnstablePolynomialError("p vanishes at an evaluation point")
    return num / den


# -- torus sampling --------------------------------------------------------


def torus_values(p: StablePolynomial, M: int, shift=None) -> np.ndarray:
    """Values on the grid ``theta_j = 2 pi (j + shift) / M`` of the d-torus.

    Returns a complex array of shape ``(M,) * d``.  ``shift`` is a d-vector
    in grid units (``None`` for the unshifted grid).
    """
    d = p.d
    shift = np.zeros(d) if shift is None else np.asarray(shift, dtype=float)
    grid = np.zeros((M,) * d, dtype=complex)
    for alpha, c in p.coefficients.items():
        phase = np.exp(2j * np.pi * np.dot(alpha, shift) / M)
        grid[tuple(a % M for a in alpha)] += c * phase
    return np.fft.ifftn(grid) * M ** d


def torus_abs_extrema(p: StablePolynomial, M: int, max_block: int = 1 << 21):
    """``(min |p|, max |p|)`` over the ``M^d`` torus grid, streamed in slabs."""
    d = p.d
    if d == 1 or M ** d <= max_block:
        vals = np.abs(torus_values(p, M))
        return float(vals.min()), float(vals.max())
    dense = p.dense()
    n0 = dense.shape[0]
    rest = dense.shape[1:]
    lo, hi = np.inf, 0.0
    theta = 2 * np.pi * np.arange(M) / M
    padded = np.zeros((M,) * (d - 1), dtype=complex)
    for t in theta:
        sliced = np.tensordot(np.exp(1j * t * np.arange(n0)), dense, axes=(0, 0))
        padded[...] = 0
        for beta in np.ndindex(*rest):
            padded[tuple(b % M for b in beta)] += sliced[beta]
        vals = np.abs(np.fft.ifftn(padded)) * M ** (d - 1)
        lo = min(lo, float(vals.min()))
        hi = max(hi, float(vals.max()))
    return lo, hi


# -- stability -------------------------------------------------------------


@dataclass
class StageRecord:
    stage: int
    slices: int
    min_root_modulus: float
    passed: bool
    note: str = ""

    def to_json_dict(self):
        return {
            "stage": self.stage,
            "slices": self.slices,
            "min_root_modulus": None if not np.isfinite(self.min_root_modulus)
            else self.min_root_modulus,
            "pass": self.passed,
            "note": self.note,
        }


@dataclass
class StabilityVerdict:
    stable: bool
    margin: float
    grid: int
    threshold: float
    stages: list[StageRecord]

    def to_json_dict(self):
        return {
            "stable": self.stable,
            "margin": self.margin,
            "grid": self.grid,
            "threshold": self.threshold,
            "stages": [s.to_json_dict() for s in self.stages],
        }


def default_grid(d: int) -> int:
    return 256 if d <= 2 else 64 if d == 3 else 16


def _stage(dense: np.ndarray, k: int, G: int, threshold: float) -> StageRecord:
    """Variables before k on the G-point torus grid, after k frozen at 1,
    variable k over the closed disk (k is 0-based here)."""
    d = dense.ndim
    sl = dense.sum(axis=tuple(range(k + 1, d))) if k + 1 < d else dense
    # sl has axes (0..k-1 leading, k swept)
    for ax in range(k):
        m = sl.shape[ax]
        shape = list(sl.shape)
        shape[ax] = G
        padded = np.zeros(shape, dtype=complex)
        idx = [slice(None)] * sl.ndim
        for e in range(m):
            idx[ax] = e % G
            src = [slice(None)] * sl.ndim
            src[ax] = e
            padded[tuple(idx)] += sl[tuple(src)]
        sl = np.fft.ifft(padded, axis=ax) * G
    a = sl.reshape(-1, sl.shape[-1])
    nslices, m1 = a.shape
    scale = np.max(np.abs(a), axis=1)
    a0 = a[:, 0]
    if np.any(scale == 0):
        return StageRecord(k + 1, nslices, 0.0, False, "identically zero slice")
    if np.any(np.abs(a0) <= _COEFF_DROP * scale):
        return StageRecord(k + 1, nslices, 0.0, False, "zero at the origin of a slice")
    m = m1 - 1
    if m == 0:
        return StageRecord(k + 1, nslices, np.inf, True)
    # reciprocal roots w = 1/z solve sum_i a_i w^(m-i) = 0, monic after dividing by a_0
    comp = np.zeros((nslices, m, m), dtype=complex)
    comp[:, 0, :] = -a[:, 1:] / a0[:, None]
    if m > 1:
        comp[:, np.arange(1, m), np.arange(m - 1)] = 1.0
    w = np.linalg.eigvals(comp)
    wmax = float(np.max(np.abs(w)))
    min_mod = np.inf if wmax == 0 else 1.0 / wmax
    return StageRecord(k + 1, nslices, min_mod, bool(min_mod > 1.0 + threshold))


def check_stability(p: StablePolynomial, grid: int | None = None,
                    margin_threshold: float = 1e-6) -> StabilityVerdict:
    """Staged numerical test for absence of zeros on the closed polydisk.

    Stage k puts variables 1..k-1 on a torus grid, freezes variables
    k+1..d at 1 and requires every root of the univariate slice in z_k to
    have modulus above ``1 + margin_threshold``.  A dense torus-grid
    minimum-modulus check supplies the reported margin.
    """
    G = default_grid(p.d) if grid is None else int(grid)
    if G < 16:
        raise ValueError("stability grid must have at least 16 points per circle")
    dense = p.dense()
    stages = [_stage(dense, k, G, margin_threshold) for k in range(p.d)]
    lo, _ = torus_abs_extrema(p, G)
    stable = all(s.passed for s in stages) and lo > margin_threshold
    return StabilityVerdict(stable, lo, G, margin_threshold, stages)


def require_stable(p: StablePolynomial, **kwargs) -> StabilityVerdict:
    verdict = check_stability(p, **kwargs)
    if not verdict.stable:
        raise UnstablePolynomialError(
            f"polynomial is not stable on the closed polydisk (margin {verdict.margin:.3g})",
            verdict)
    return verdict


# -- corpus ----------------------------------------------------------------


def univariate_from_roots(roots, leading=1.0):
    """Coefficients (ascending) of ``leading * prod(1 - z / r)``."""
    coeffs = np.array([complex(leading)])
    for r in roots:
        coeffs = np.convolve(coeffs, [1.0, -1.0 / complex(r)])
    return coeffs


def separable(factors: Sequence[Sequence[complex]]) -> StablePolynomial:
    """Product ``q_1(z_1) ... q_d(z_d)`` from ascending coefficient lists."""
    arrays = [np.asarray(f, dtype=complex) for f in factors]
    dense = arrays[0]
    for f in arrays[1:]:
        dense = np.multiply.outer(dense, f)
    return StablePolynomial.from_dense(dense)


def affine(c, a) -> StablePolynomial:
    """``c - sum_j a_j z_j`` with degree bound (1, ..., 1)."""
    d = len(a)
    coeffs = {(0,) * d: c}
    for j, aj in enumerate(a):
        coeffs[tuple(1 if k == j else 0 for k in range(d))] = -complex(aj)
    return StablePolynomial((1,) * d, coeffs)


def determinantal(K, multiplicities=None) -> StablePolynomial:
    """``det(I - K Z(z))`` with Z diagonal, carrying ``n_j`` copies of ``z_j``."""
    K = np.asarray(K, dtype=complex)
    m = K.shape[0]
    if K.shape != (m, m):
        raise ValueError("determinantal form needs a square matrix")
    mult = [1] * m if multiplicities is None else [int(v) for v in multiplicities]
    if sum(mult) != m or any(v < 0 for v in mult):
        raise ValueError(f"multiplicities {mult} do not partition {m} rows")
    owner = np.repeat(np.arange(len(mult)), mult)
    degree = tuple(mult)
    shape = tuple(k + 1 for k in degree)
    # exact recovery of the coefficients from samples on roots of unity
    grids = np.meshgrid(*[np.exp(2j * np.pi * np.arange(s) / s) for s in shape], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    Z = pts[:, owner]
    mats = np.eye(m)[None, :, :] - K[None, :, :] * Z[:, None, :]
    vals = np.linalg.det(mats).reshape(shape)
    dense = np.fft.fftn(vals) / np.prod(shape)
    return StablePolynomial.from_dense(dense, degree)


def gen_corpus(kind: str, d: int, params: dict | None = None, seed: int = 0) -> StablePolynomial:
    """Generate a polynomial that satisfies a sufficient stability condition.

    kind='affine': ``c - sum a_j z_j`` with ``sum |a_j| < c``.
    kind='separable': product of univariate factors with roots outside
    the closed disk (``params['factors']`` ascending coefficient lists).
    kind='determinantal': ``det(I - K Z)`` for ``||K||_2 < 1``.
    Missing parameters are drawn from ``numpy.random.default_rng(seed)``.
    """
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    if kind == "affine":
        c = float(params.get("c", 4.0))
        if "a" in params:
            a = [complex(v) for v in params["a"]]
        else:
            raw = rng.normal(size=d) + 1j * rng.normal(size=d)
            a = list(0.5 * c * raw / np.sum(np.abs(raw)))
        if len(a) != d:
            raise DimensionError(f"expected {d} affine coefficients, got {len(a)}")
        if not np.sum(np.abs(a)) < c:
            raise ValueError("affine corpus needs sum |a_j| < c")
        return affine(c, a)
    if kind == "separable":
        if "factors" in params:
            factors = [np.asarray(f, dtype=complex) for f in params["factors"]]
        else:
            deg = int(params.get("degree", 1))
            factors = []
            for _ in range(d):
                roots = rng.uniform(1.5, 3.0, size=deg) * np.exp(2j * np.pi * rng.uniform(size=deg))
                factors.append(univariate_from_roots(roots))
        if len(factors) != d:
            raise DimensionError(f"expected {d} factors, got {len(factors)}")
        for f in factors:
            f = np.trim_zeros(np.asarray(f, dtype=complex), "b")
            if f.size == 0:
                raise ValueError("zero factor")
            roots = np.roots(f[::-1]) if f.size > 1 else np.array([])
            if np.any(np.abs(roots) <= 1.0):
                raise ValueError("separable factor has a root in the closed disk")
        return separable(factors)
    if kind == "determinantal":
        mult = params.get("multiplicities")
        m = sum(mult) if mult is not None else d
        if "matrix" in params:
            K = np.asarray(params["matrix"], dtype=complex)
        else:
            raw = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
            K = float(params.get("norm", 0.5)) * raw / np.linalg.norm(raw, 2)
        if K.shape != (m, m):
            raise ValueError(f"matrix must be {m}x{m}")
        if not np.linalg.norm(K, 2) < 1.0:
            raise ValueError("determinantal corpus needs a strict contraction")
        return determinantal(K, mult)
    raise ValueError(f"unknown corpus kind {kind!r}")
