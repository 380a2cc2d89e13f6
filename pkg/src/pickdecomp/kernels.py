"""
Evaluable Hermitian kernels on the open polydisk.

Every kernel maps two point batches ``Z`` (m x d) and ``W`` (k x d) to the
matrix ``K(z_i, w_j)``.  Composite kernels (sums, differences, the
``(1 - z_j conj(w_j))`` shift factor, division by ``p(z) conj(p(w))``) are
lazy and evaluate their children on demand; positivity of a difference is
never assumed, only checked by :mod:`pickdecomp.certify`.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, DomainError
from .lattice import as_index
from .stablepoly import StablePolynomial, as_points, evaluate, reflect


def check_domain(pts: np.ndarray) -> None:
    if np.any(np.abs(pts) >= 1.0):
        bad = int(np.argmax(np.max(np.abs(pts), axis=1)))
        raise DomainError(f"point {bad} is outside the open polydisk")


class Kernel:
    """Base class; subclasses implement ``_matrix(Z, W)`` on validated points."""

    d: int | None = None

    def matrix(self, Z, W=None) -> np.ndarray:
        Zp = self._prepare(Z)
        Wp = Zp if W is None else self._prepare(W)
        return self._matrix(Zp, Wp)

    def _prepare(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=complex)
        if pts.ndim == 1:
            pts = pts[None, :]
        if self.d is not None and pts.shape[1] != self.d:
            raise DimensionError(f"kernel on {self.d} variables, points have {pts.shape[1]}")
        check_domain(pts)
        return pts

    def _matrix(self, Z, W) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, z, zeta) -> complex:
        d = self.d if self.d is not None else np.atleast_1d(z).shape[-1]
        zp, _ = as_points(z, d)
        wp, _ = as_points(zeta, d)
        return complex(self.matrix(zp, wp)[0, 0])

    def diagonal(self, Z) -> np.ndarray:
        Zp = self._prepare(Z)
        return np.array([self._matrix(Zp[i:i + 1], Zp[i:i + 1])[0, 0]
                         for i in range(Zp.shape[0])])

    def __add__(self, other):
        return Sum(self, other)

    def __sub__(self, other):
        return Difference(self, other)

    def __rmul__(self, c):
        return Scaled(c, self)

    def describe(self) -> str:
        return type(self).__name__


def _merge(*dims):
    known = {d for d in dims if d is not None}
    if len(known) > 1:
        raise DimensionError(f"cannot combine kernels on {sorted(known)} variables")
    return known.pop() if known else None


class Constant(Kernel):
    def __init__(self, c, d=None):
        self.c = complex(c)
        self.d = d

    def _matrix(self, Z, W):
        return np.full((Z.shape[0], W.shape[0]), self.c)

    def describe(self):
        return f"Constant({self.c.real:g})" if self.c.imag == 0 else f"Constant({self.c})"


def szego_matrix(Z, W) -> np.ndarray:
    """``prod_j 1 / (1 - z_j conj(w_j))``."""
    return np.prod(1.0 / (1.0 - Z[:, None, :] * np.conj(W[None, :, :])), axis=2)


class SzegoProduct(Kernel):
    """``p(z) conj(p(w)) S_d(z, w)``; with ``p = None`` the plain Szego kernel."""

    def __init__(self, d, p: StablePolynomial | None = None):
        if p is not None and p.d != d:
            raise DimensionError("polynomial dimension mismatch")
        self.d = d
        self.p = p

    def _matrix(self, Z, W):
        S = szego_matrix(Z, W)
        if self.p is None:
            return S
        return evaluate(self.p, Z)[:, None] * np.conj(evaluate(self.p, W))[None, :] * S

    def describe(self):
        return "Szego" if self.p is None else "p p* Szego"


class ExplicitP(Kernel):
    """Closed form ``(p(z) conj p(w) - p~(z) conj p~(w)) S_d(z, w)``."""

    def __init__(self, p: StablePolynomial, n=None):
        self.p = p
        self.n = p.degree if n is None else as_index(n)
        self.ptilde = reflect(p, self.n)
        self.d = p.d

    def _matrix(self, Z, W):
        pz, pw = evaluate(self.p, Z), evaluate(self.p, W)
        qz, qw = evaluate(self.ptilde, Z), evaluate(self.ptilde, W)
        num = pz[:, None] * np.conj(pw)[None, :] - qz[:, None] * np.conj(qw)[None, :]
        return num * szego_matrix(Z, W)

    def describe(self):
        return "P"


def explicit_P(p: StablePolynomial, n=None) -> ExplicitP:
    return ExplicitP(p, n)


class GramSubspace(Kernel):
    """Reproducing kernel of ``span{z^alpha : alpha in indices}`` in ``L^2(mu)``."""

    def __init__(self, gram, label: str | None = None):
        self.gram = gram
        self.d = gram.d
        self.label = label

    def _matrix(self, Z, W):
        BZ = self.gram.whitened(Z)
        BW = BZ if W is Z else self.gram.whitened(W)
        return BZ.T @ np.conj(BW)

    def describe(self):
        return self.label or f"Gram[{len(self.gram.indices)}]"


class Sum(Kernel):
    def __init__(self, a: Kernel, b: Kernel):
        self.a, self.b = a, b
        self.d = _merge(a.d, b.d)

    def _matrix(self, Z, W):
        return self.a._matrix(Z, W) + self.b._matrix(Z, W)

    def describe(self):
        return f"({self.a.describe()} + {self.b.describe()})"


class Difference(Kernel):
    def __init__(self, a: Kernel, b: Kernel):
        self.a, self.b = a, b
        self.d = _merge(a.d, b.d)

    def _matrix(self, Z, W):
        return self.a._matrix(Z, W) - self.b._matrix(Z, W)

    def describe(self):
        return f"({self.a.describe()} - {self.b.describe()})"


class Scaled(Kernel):
    def __init__(self, c, K: Kernel):
        self.c = complex(c)
        self.K = K
        self.d = K.d

    def _matrix(self, Z, W):
        return self.c * self.K._matrix(Z, W)

    def describe(self):
        return f"{self.c.real:g}*{self.K.describe()}"


class ShiftFactor(Kernel):
    """``(1 - z_j conj(w_j)) K(z, w)`` with j 1-based."""

    def __init__(self, j: int, K: Kernel):
        self.j = int(j)
        self.K = K
        self.d = K.d
        if self.d is not None and not 1 <= self.j <= self.d:
            raise DimensionError(f"variable {j} out of range 1..{self.d}")

    def _matrix(self, Z, W):
        zj = Z[:, self.j - 1]
        wj = W[:, self.j - 1]
        return (1.0 - zj[:, None] * np.conj(wj)[None, :]) * self.K._matrix(Z, W)

    def describe(self):
        return f"(1-z{self.j}w{self.j}*){self.K.describe()}"


class ProductFactor(Kernel):
    """``prod_{r in vars} (1 - z_r conj(w_r)) K(z, w)``."""

    def __init__(self, variables, K: Kernel):
        self.variables = tuple(sorted(int(r) for r in variables))
        self.K = K
        self.d = K.d

    def _matrix(self, Z, W):
        out = self.K._matrix(Z, W)
        for r in self.variables:
            out = (1.0 - Z[:, r - 1][:, None] * np.conj(W[:, r - 1])[None, :]) * out
        return out

    def describe(self):
        return f"prod{list(self.variables)}{self.K.describe()}"


class PNormalized(Kernel):
    """``K(z, w) / (p(z) conj(p(w)))``."""

    def __init__(self, K: Kernel, p: StablePolynomial):
        self.K = K
        self.p = p
        self.d = _merge(K.d, p.d)

    def _matrix(self, Z, W):
        pz, pw = evaluate(self.p, Z), evaluate(self.p, W)
        return self.K._matrix(Z, W) / (pz[:, None] * np.conj(pw)[None, :])

    def describe(self):
        return f"{self.K.describe()}/pp*"


class SchurDefect(Kernel):
    """``1 - f(z) conj(f(w))`` for the rational inner function ``f = p~/p``."""

    def __init__(self, p: StablePolynomial, n=None):
        self.p = p
        self.ptilde = reflect(p, n)
        self.d = p.d

    def _matrix(self, Z, W):
        fz = evaluate(self.ptilde, Z) / evaluate(self.p, Z)
        fw = evaluate(self.ptilde, W) / evaluate(self.p, W)
        return 1.0 - fz[:, None] * np.conj(fw)[None, :]

    def describe(self):
        return "1-ff*"


class RankOne(Kernel):
    """``c * g(z) conj(g(w))`` for a kernel section ``g = K(., eta)``."""

    def __init__(self, K: Kernel, eta, c=1.0):
        self.K = K
        self.eta = np.atleast_2d(np.asarray(eta, dtype=complex))
        self.c = float(c)
        self.d = K.d

    def _matrix(self, Z, W):
        gz = self.K._matrix(Z, self.eta)[:, 0]
        gw = self.K._matrix(W, self.eta)[:, 0]
        return self.c * gz[:, None] * np.conj(gw)[None, :]

    def describe(self):
        return f"{self.c:g}*K_eta K_eta*"


def schur_normalize(K: Kernel, p: StablePolynomial) -> PNormalized:
    return PNormalized(K, p)
