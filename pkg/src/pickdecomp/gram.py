"""
Gram (moment) matrices over finite lattice index sets.

For an index list ``alpha_1, ..., alpha_m`` the Gram matrix is
``G[i, j] = C_{alpha_i - alpha_j} = <z^alpha_i, z^alpha_j>_mu``, a
Hermitian multilevel Toeplitz matrix.  With ``G = L L^H`` and the monomial
vector ``v(z)``, the reproducing kernel of the spanned subspace is

    K(z, w) = v(z)^T conj(G^{-1} v(w)) = sum_k b_k(z) conj(b_k(w)),
    b = L^{-1} v,

so sampled kernel matrices are ``B^T conj(B)`` and PSD by construction.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import GramError
from .kernels import GramSubspace, check_domain, explicit_P
from .lattice import as_index
from .moments import MomentTable
from .stablepoly import as_points, monomials

__all__ = ["GramMatrix", "GramSubspace", "build_gram", "explicit_P", "rk_evaluate",
           "reproducing_property_residual"]


class GramMatrix:
    """Hermitian positive definite Gram matrix with its Cholesky factor."""

    def __init__(self, table: MomentTable, indices):
        idx = np.asarray([as_index(a) for a in indices], dtype=np.int64)
        if idx.ndim != 2 or idx.shape[0] == 0:
            raise ValueError("Gram index list must be non-empty")
        if len({tuple(r) for r in idx}) != idx.shape[0]:
            raise ValueError("Gram index list contains duplicates")
        self.table = table
        self.indices = idx
        self.d = idx.shape[1]
        G = table.lookup(idx[:, None, :] - idx[None, :, :])
        scale = float(np.max(np.abs(G)))
        defect = float(np.max(np.abs(G - G.conj().T)))
        if defect > 1e-12 * scale:
            raise GramError(f"moment table is not Hermitian (defect {defect:.2e})")
        self.entries = 0.5 * (G + G.conj().T)
        self.hermitian_defect = defect
        try:
            self.chol = scipy.linalg.cholesky(self.entries, lower=True)
        except np.linalg.LinAlgError as exc:
            raise GramError(f"Cholesky factorization failed: {exc}") from None
        self._eig = None
        self._whiten_cache: dict[bytes, np.ndarray] = {}

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def monomial_vectors(self, pts) -> np.ndarray:
        """``V[a, i] = pts[i]^alpha_a``."""
        return monomials(pts, self.indices).T

    def whitened(self, pts) -> np.ndarray:
        """``L^{-1} v(z)`` for each point (columns)."""
        pts = np.asarray(pts, dtype=complex)
        key = pts.tobytes()
        hit = self._whiten_cache.get(key)
        if hit is None:
            hit = scipy.linalg.solve_triangular(self.chol, self.monomial_vectors(pts), lower=True)
            if len(self._whiten_cache) < 16:
                self._whiten_cache[key] = hit
        return hit

    def solve(self, rhs) -> np.ndarray:
        return scipy.linalg.cho_solve((self.chol, True), rhs)

    def eigenvalues(self) -> np.ndarray:
        if self._eig is None:
            self._eig = scipy.linalg.eigvalsh(self.entries)
        return self._eig


def build_gram(table: MomentTable, indices) -> GramMatrix:
    return GramMatrix(table, indices)


def rk_evaluate(gram: GramMatrix, z, zeta) -> complex:
    """Reproducing kernel of the spanned subspace at ``(z, zeta)``."""
    zp, _ = as_points(z, gram.d)
    wp, _ = as_points(zeta, gram.d)
    check_domain(zp)
    check_domain(wp)
    bz = gram.whitened(zp)
    bw = gram.whitened(wp)
    return complex((bz.T @ np.conj(bw))[0, 0])


def reproducing_property_residual(gram: GramMatrix, table: MomentTable, zeta) -> float:
    """``max_gamma |sum_alpha C_{gamma - alpha} x_alpha - zeta^gamma|``, ``x = G^{-1} v(zeta)``.

    The moments are read back from ``table`` rather than from the stored
    Gram entries.
    """
    wp, _ = as_points(zeta, gram.d)
    v = gram.monomial_vectors(wp)[:, 0]
    x = gram.solve(v)
    idx = gram.indices
    C = table.lookup(idx[:, None, :] - idx[None, :, :])
    return float(np.max(np.abs(C @ x - v)))
