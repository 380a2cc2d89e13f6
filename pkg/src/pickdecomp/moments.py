"""
Fourier moments of the Bernstein-Szego measure ``dmu = |p|^-2 dsigma``.

Convention used throughout the package::

    C_gamma = int z^gamma dmu,   so   <z^alpha, z^beta>_mu = C_{alpha - beta}.

Moments come from an FFT of ``1/|p|^2`` sampled on an ``M^d`` torus grid.
The aliasing error is estimated by recomputing on the ``2M`` grid, which
is assembled from the ``2^d`` half-shifted copies of the ``M`` grid so the
peak memory stays at one ``M^d`` array.
"""

from __future__ import annotations

import itertools
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, RangeError
from .lattice import BSet, MultiIndex, as_index, box_points, enumerate_array
from .stablepoly import StablePolynomial, reflect, require_stable, torus_values

CONVENTION = "C_gamma = int z^gamma dmu"


@dataclass
class MomentTable:
    """Moments ``C_gamma`` for ``gamma`` in ``[-R, R]^d``; ``values[gamma + R]``."""

    poly_hash: str
    R: MultiIndex
    M: int
    values: np.ndarray
    aliasing_error_estimate: float = float("nan")
    margin_bound: float | None = None

    @property
    def d(self) -> int:
        return len(self.R)

    def covers(self, R) -> bool:
        return all(a >= b for a, b in zip(self.R, as_index(R)))

    def lookup(self, gammas) -> np.ndarray:
        """Vectorized lookup; ``gammas`` has trailing axis d."""
        g = np.asarray(gammas, dtype=np.int64)
        if g.shape[-1] != self.d:
            raise DimensionError(f"moment index of dimension {g.shape[-1]}, table has {self.d}")
        R = np.asarray(self.R)
        if np.any(np.abs(g) > R):
            worst = np.max(np.abs(g).reshape(-1, self.d), axis=0)
            raise RangeError(f"moment index up to {worst.tolist()} outside table range {list(self.R)}")
        shifted = g + R
        return self.values[tuple(shifted[..., k] for k in range(self.d))]

    def __getitem__(self, gamma) -> complex:
        return complex(self.lookup(np.asarray(as_index(gamma))))

    # -- serialization -----------------------------------------------------

    def header(self) -> dict:
        return {
            "poly_hash": self.poly_hash,
            "d": self.d,
            "R": list(self.R),
            "M": self.M,
            "convention": CONVENTION,
            "aliasing_error_estimate": self.aliasing_error_estimate,
        }

    def to_json_dict(self) -> dict:
        order = box_points(tuple(2 * r + 1 for r in self.R))
        flat = self.values[tuple(order[:, k] for k in range(self.d))]
        return {"header": self.header(),
                "re": flat.real.tolist(), "im": flat.imag.tolist()}

    @classmethod
    def from_json_dict(cls, data) -> "MomentTable":
        head = data["header"]
        if head.get("convention") != CONVENTION:
            raise ValueError(f"moment convention mismatch: {head.get('convention')!r}")
        R = as_index(head["R"])
        shape = tuple(2 * r + 1 for r in R)
        order = box_points(shape)
        values = np.zeros(shape, dtype=complex)
        values[tuple(order[:, k] for k in range(len(R)))] = (
            np.asarray(data["re"]) + 1j * np.asarray(data["im"]))
        return cls(head["poly_hash"], R, int(head["M"]), values,
                   float(head.get("aliasing_error_estimate", float("nan"))))


def _is_pow2(M: int) -> bool:
    return M > 0 and (M & (M - 1)) == 0


def default_M(R) -> int:
    top = max(as_index(R)) if R else 0
    need = 1
    while need < 8 * top:
        need *= 2
    return max(64, need)


def _grid_moments(p: StablePolynomial, R: MultiIndex, M: int, shift=None) -> np.ndarray:
    weight = 1.0 / np.abs(torus_values(p, M, shift)) ** 2
    coeffs = np.fft.ifftn(weight)
    idx = [np.arange(-r, r + 1) % M for r in R]
    out = coeffs[np.ix_(*idx)]
    if shift is not None and np.any(shift):
        phase = 1.0
        for k, r in enumerate(R):
            g = np.arange(-r, r + 1)
            shape = [1] * len(R)
            shape[k] = -1
            phase = phase * np.exp(2j * np.pi * g * shift[k] / M).reshape(shape)
        out = out * phase
    return out


def _doubled_grid_moments(p, R, M):
    d = len(R)
    acc = np.zeros(tuple(2 * r + 1 for r in R), dtype=complex)
    for s in itertools.product((0.0, 0.5), repeat=d):
        acc += _grid_moments(p, R, M, np.array(s))
    return acc / 2 ** d


class MomentCache:
    """On-disk moment tables keyed by (polynomial hash, R, M)."""

    def __init__(self, directory=None):
        if directory is None:
            directory = os.environ.get("PICKDECOMP_CACHE",
                                       Path.home() / ".cache" / "pickdecomp")
        self.directory = Path(directory)

    def path(self, poly_hash: str, R, M: int) -> Path:
        rtag = "x".join(str(r) for r in R)
        return self.directory / f"{poly_hash}_R{rtag}_M{M}.json"

    def load(self, poly_hash, R, M):
        path = self.path(poly_hash, R, M)
        if not path.exists():
            return None
        try:
            with open(path) as fh:
                return MomentTable.from_json_dict(json.load(fh))
        except (OSError, ValueError, KeyError):
            return None

    def store(self, table: MomentTable) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(table.poly_hash, table.R, table.M)
        write_json_atomic(path, table.to_json_dict())
        return path


def write_json_atomic(path, payload) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=1)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def compute_moments(p: StablePolynomial, R, M: int | None = None, *,
                    check: bool = True, tol: float | None = None,
                    max_M: int = 1 << 14, cache: MomentCache | None = None) -> MomentTable:
    """Moment table of ``|p|^-2 dsigma`` on ``[-R, R]^d``.

    ``M`` defaults to ``max(64, next power of two >= 8 max R)``.  With
    ``tol`` set, ``M`` is doubled until the M-vs-2M aliasing estimate
    drops below ``tol`` (or ``max_M`` is reached).  Unstable ``p`` is
    refused when ``check`` is true.
    """
    R = as_index(R)
    if len(R) != p.d:
        raise DimensionError(f"range {R} does not match dimension {p.d}")
    if any(r < 0 for r in R):
        raise ValueError("moment range must be non-negative")
    margin = None
    if check:
        margin = require_stable(p).margin
    M = default_M(R) if M is None else int(M)
    if not _is_pow2(M):
        raise ValueError(f"grid size M={M} must be a power of two")
    if M < 2 * max(R) + 2:
        raise ValueError(f"grid size M={M} too small for range {R}")
    poly_hash = p.content_hash()
    while True:
        table = cache.load(poly_hash, R, M) if cache is not None else None
        if table is None:
            values = _grid_moments(p, R, M)
            finer = _doubled_grid_moments(p, R, M)
            err = float(np.max(np.abs(values - finer)))
            table = MomentTable(poly_hash, R, M, values, err)
            if cache is not None:
                cache.store(table)
        table.margin_bound = None if margin is None else margin ** -2
        if tol is None or table.aliasing_error_estimate <= tol or 2 * M > max_M:
            return table
        M *= 2


def inner_product(table: MomentTable, alpha, beta) -> complex:
    """``<z^alpha, z^beta>_mu = C_{alpha - beta}``."""
    alpha, beta = as_index(alpha), as_index(beta)
    if len(alpha) != len(beta):
        raise DimensionError("dimension mismatch")
    return table[tuple(a - b for a, b in zip(alpha, beta))]


@dataclass(frozen=True)
class RootForm:
    """Univariate ``leading * prod(1 - z / r)`` with roots outside the closed disk."""

    roots: tuple = ()
    leading: complex = 1.0

    def __post_init__(self):
        roots = tuple(complex(r) for r in self.roots)
        if any(abs(r) <= 1.0 for r in roots):
            raise ValueError("root on or inside the closed unit disk")
        if len(set(roots)) != len(roots):
            raise ValueError("repeated roots are not supported by the closed form")
        object.__setattr__(self, "roots", roots)

    def coefficients(self) -> np.ndarray:
        coeffs = np.array([complex(self.leading)])
        for r in self.roots:
            coeffs = np.convolve(coeffs, [1.0, -1.0 / r])
        return coeffs


def univariate_moment(factor: RootForm, k: int) -> complex:
    """Exact ``int z^k |q|^-2 dsigma`` by partial fractions of ``1/q``."""
    if k < 0:
        return univariate_moment(factor, -k).conjugate()
    u = np.array([1.0 / r for r in factor.roots])
    A = np.array([1.0 / np.prod([1.0 - u[j] / u[i] for j in range(len(u)) if j != i])
                  for i in range(len(u))])
    # 1/q = (1/leading) sum_i A_i / (1 - u_i z)
    total = 0.0 if len(u) else (1.0 if k == 0 else 0.0)
    for i in range(len(u)):
        for j in range(len(u)):
            total += A[i] * np.conj(A[j]) * np.conj(u[j]) ** k / (1.0 - u[i] * np.conj(u[j]))
    return complex(total / abs(complex(factor.leading)) ** 2)


def separable_oracle(factors: Sequence[RootForm], gamma) -> complex:
    """Moment of a separable measure as a product of univariate closed forms."""
    gamma = as_index(gamma)
    if len(gamma) != len(factors):
        raise DimensionError("one factor per variable is required")
    out = 1.0 + 0j
    for f, g in zip(factors, gamma):
        out *= univariate_moment(f, g)
    return out


def ptilde_orthogonality_residual(p: StablePolynomial, n, table: MomentTable,
                                  box, beta_box=None) -> float:
    """``max |<z^alpha, z^beta p~>_mu|`` over ``alpha in B cap [0, box)``,
    ``beta in [0, beta_box)`` (``beta_box`` defaults to ``box``)."""
    n = p.degree if n is None else as_index(n)
    beta_box = as_index(box) if beta_box is None else as_index(beta_box)
    alphas = enumerate_array(BSet(n), box)
    if alphas.shape[0] == 0:
        return 0.0
    betas = box_points(beta_box)
    pt = reflect(p, n)
    gammas = np.array(list(pt.coefficients), dtype=np.int64)
    cbar = np.conj(np.array(list(pt.coefficients.values())))
    diffs = alphas[:, None, None, :] - betas[None, :, None, :] - gammas[None, None, :, :]
    vals = table.lookup(diffs) @ cbar
    return float(np.max(np.abs(vals)))


def required_range(*boxes) -> MultiIndex:
    """Moment range covering all pairwise differences inside the given boxes."""
    d = len(boxes[0])
    return tuple(max(b[k] for b in boxes) - 1 for k in range(d))
