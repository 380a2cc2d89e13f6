"""
Positive semi-definiteness certificates for sampled kernels.

Two tolerance regimes are kept apart:

* exact-at-N claims (Gram kernels, nested differences, orderings, the
  difference identity) must hold to ``tol_exact`` relative to the
  kernel's largest diagonal entry at every truncation level;
* limiting claims (``P = K_S + L_T``, contractivity, Agler/GKVW pairs)
  are checked at the top of the truncation ladder against absolute
  tolerances, together with a trend requirement along the ladder.
"""

from __future__ import annotations

import json
import platform
from dataclasses import asdict, dataclass, field

import numpy as np

from .decomp import (DEFAULT_LADDER, KernelFactory, agler_pair, complement,
                     decompose, DecompositionSpec, gkvw_pair, proper_subsets, _fmt)
from .gram import reproducing_property_residual
from .kernels import Difference, Kernel, RankOne, ShiftFactor
from .lattice import BSet, XUnion, enumerate_array, unit
from .moments import CONVENTION, MomentCache, compute_moments, ptilde_orthogonality_residual
from .pointsets import PointSet
from .stablepoly import StablePolynomial, check_stability, torus_abs_extrema

__all__ = [
    "CheckRecord", "CertificateReport", "SuiteConfig", "PointSet",
    "kernel_matrix", "check_psd", "check_contractive", "check_ordering", "run_suite",
]


@dataclass
class CheckRecord:
    id: str
    paper_anchor: str
    kernel: str
    n_points: int
    min_eig: float | None
    max_residual: float | None
    tol: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {
            "id": self.id,
            "paper_anchor": self.paper_anchor,
            "kernel": self.kernel,
            "n_points": self.n_points,
            "min_eig": _num(self.min_eig),
            "max_residual": _num(self.max_residual),
            "tol": self.tol,
            "pass": bool(self.passed),
        }
        if self.detail:
            out["detail"] = self.detail
        return out


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else None


def kernel_matrix(K: Kernel, pts) -> np.ndarray:
    """``M[i, j] = K(z_i, z_j)`` over a point set (or raw ``(m, d)`` array)."""
    P = pts.points if isinstance(pts, PointSet) else np.atleast_2d(np.asarray(pts, dtype=complex))
    return K.matrix(P)


def hermitian_defect(M: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(M))), 1e-300)
    return float(np.max(np.abs(M - M.conj().T))) / scale


def spectrum(M: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(0.5 * (M + M.conj().T))


def psd_scale(M: np.ndarray, eig: np.ndarray) -> float:
    """Largest absolute diagonal entry; spectral radius if the diagonal vanishes."""
    s = float(np.max(np.abs(np.diag(M)))) if M.size else 0.0
    return s if s > 0 else float(np.max(np.abs(eig))) if eig.size else 0.0


def check_psd(K: Kernel, pts: PointSet, tol: float, relative: bool = True,
              claim: str = "psd", anchor: str = "sampled kernel matrix is PSD") -> CheckRecord:
    """Pass iff ``lambda_min >= -tol * scale`` (``scale = 1`` when not relative)."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    M = kernel_matrix(K, pts)
    eig = spectrum(M)
    scale = psd_scale(M, eig) if relative else 1.0
    lo = float(eig[0])
    return CheckRecord(claim, anchor, _describe(K), len(pts), lo, None, tol,
                       lo >= -tol * scale,
                       {"max_eig": float(eig[-1]), "scale": scale, "relative": relative})


def check_contractive(K: Kernel, S, pts: PointSet, tol: float, relative: bool = True,
                      claim: str = "contractive") -> list[CheckRecord]:
    S = sorted(int(j) for j in S)
    if not S:
        raise ValueError("S must be nonempty")
    return [check_psd(ShiftFactor(j, K), pts, tol, relative, f"{claim}[j={j}]",
                      f"(1 - z_{j} conj w_{j}) K(z, w) >= 0")
            for j in S]


def check_ordering(K1: Kernel, K2: Kernel, pts: PointSet, tol: float, relative: bool = True,
                   claim: str = "ordering") -> CheckRecord:
    return check_psd(Difference(K1, K2), pts, tol, relative, claim, "K1 - K2 >= 0")


def _describe(K: Kernel) -> str:
    return getattr(K, "label", None) or K.describe()


# -- the full suite --------------------------------------------------------


@dataclass
class SuiteConfig:
    M: int | None = None
    ladder: tuple = DEFAULT_LADDER
    count: int = 12
    radius: float = 0.6
    seed: int = 0
    tol_exact: float = 1e-9
    tol_limit: float = 1e-6
    tol_identity: float = 1e-5
    tol_moment: float = 1e-12
    tol_orthogonality: float = 1e-8
    ladder_drop: float = 10.0
    noise_floor: float = 1e-12
    gkvw: tuple = (1, 2)
    extrema_grid: int = 512
    sandwich_eps: float = 1e-6
    stability_grid: int | None = None
    partitions: tuple | None = None

    def to_json_dict(self) -> dict:
        out = asdict(self)
        out["ladder"] = list(self.ladder)
        out["gkvw"] = list(self.gkvw)
        if self.partitions is not None:
            out["partitions"] = [sorted(S) for S in self.partitions]
        return out


@dataclass
class CertificateReport:
    polynomial: dict
    config: dict
    checks: list
    metadata: dict

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "polynomial": self.polynomial,
            "config": self.config,
            "metadata": self.metadata,
            "checks": [c.to_json_dict() for c in self.checks],
            "pass": self.passed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1, sort_keys=False)

    def failures(self) -> list[CheckRecord]:
        return [c for c in self.checks if not c.passed]


def _ladder_ok(values, drop, floor) -> bool:
    return all(b <= floor or a >= drop * b for a, b in zip(values, values[1:]))


def _negativity_ok(eigs, scales, tol_exact) -> bool:
    neg = [min(e, 0.0) for e in eigs]
    return all(b >= a - tol_exact * s for a, b, s in zip(neg, neg[1:], scales[1:]))


def lattice_shift_records(n, S, N) -> list[CheckRecord]:
    """``X_T`` is closed under ``+ e_j`` (j in S) and any ``alpha in B minus X_T``
    leaves ``B`` after adding ``n_j`` in every coordinate of S."""
    d = len(n)
    T = complement(S, d)
    box = (N,) * d
    XT = XUnion(T, n)
    B = BSet(n)
    members = enumerate_array(XT, box)
    records = []
    for j in sorted(S):
        shifted = members + np.array(unit(j, d))
        inside = np.all(shifted < N, axis=1)
        bad = int(np.count_nonzero(~XT.mask(shifted[inside]))) if inside.any() else 0
        records.append(CheckRecord(f"shift_closure[S={_fmt(S)},j={j},N={N}]",
                                   "X_T is invariant under z_j for j in S", f"X{_fmt(T)}",
                                   0, None, float(bad), 0.0, bad == 0))
    m = np.array([n[k] if (k + 1) in S else 0 for k in range(d)])
    outside = enumerate_array(B - XT, box)
    bad = int(np.count_nonzero(B.mask(outside + m))) if outside.shape[0] else 0
    records.append(CheckRecord(f"shift_maximality[S={_fmt(S)},N={N}]",
                               "X_T is the largest subset of B invariant under z_j, j in S",
                               f"X{_fmt(T)}", 0, None, float(bad), 0.0, bad == 0))
    return records


def run_suite(p: StablePolynomial, n=None, config: SuiteConfig | None = None,
              cache: MomentCache | None = None) -> CertificateReport:
    """Certify every claim for ``p`` on seeded points; see :class:`SuiteConfig`."""
    cfg = config or SuiteConfig()
    n = p.degree if n is None else tuple(n)
    d = p.d
    checks: list[CheckRecord] = []
    meta = {"convention": CONVENTION, "seed": cfg.seed, "ladder": list(cfg.ladder),
            "numpy": np.__version__, "python": platform.python_version()}
    report = CertificateReport(p.to_json_dict() | {"degree_bound": list(n)},
                               cfg.to_json_dict(), checks, meta)

    verdict = check_stability(p, cfg.stability_grid)
    checks.append(CheckRecord("stability", "p has no zeros on the closed polydisk", "p", 0,
                              None, None, verdict.threshold, verdict.stable,
                              verdict.to_json_dict()))
    if not verdict.stable:
        return report
    if d < 2:
        raise ValueError("the certificate suite needs d >= 2")

    ladder = sorted(int(N) for N in cfg.ladder)
    top = ladder[-1]
    pts = PointSet.random(d, cfg.count, cfg.radius, cfg.seed)
    fac = KernelFactory.build(p, top, n, M=cfg.M, cache=cache)
    table = fac.table
    meta["M"] = table.M
    meta["n_points"] = len(pts)

    # moments
    checks.append(CheckRecord("moment_aliasing", "moments of |p|^-2 dsigma (M vs 2M)",
                              "C", 0, None, table.aliasing_error_estimate, cfg.tol_moment,
                              table.aliasing_error_estimate <= cfg.tol_moment,
                              {"M": table.M, "R": list(table.R)}))
    vals = table.values
    herm = float(np.max(np.abs(vals - np.conj(np.flip(vals)))))
    c0 = abs(vals[tuple(table.R)])
    checks.append(CheckRecord("moment_hermitian", "C_{-g} = conj C_g", "C", 0, None, herm,
                              1e-12, herm <= 1e-12 * c0))
    orth_R = tuple(2 * k for k in n)
    orth_table = table if table.covers(orth_R) else compute_moments(p, orth_R, cache=cache)
    alpha_box = tuple(max(2 * k, 1) for k in n)
    beta_box = tuple(k + 1 for k in n)
    orth = ptilde_orthogonality_residual(p, n, orth_table, alpha_box, beta_box)
    checks.append(CheckRecord("ptilde_orthogonality", "<z^a, z^b p~>_mu = 0 for a in B, b >= 0",
                              "p~", 0, None, orth, cfg.tol_orthogonality,
                              orth <= cfg.tol_orthogonality))

    subsets = [frozenset(S) for S in (cfg.partitions or proper_subsets(d))]
    all_subsets = proper_subsets(d)

    # exact at every N
    for N in ladder:
        for S in subsets:
            K_S, L_S = fac.K(S, N), fac.L(S, N)
            for K, tag in ((K_S, "K"), (L_S, "L")):
                rec = check_psd(K, pts, cfg.tol_exact, True, f"psd[{tag}_{_fmt(S)},N={N}]",
                                "reproducing kernels of subspaces are PSD")
                checks.append(rec)
                rec = check_ordering(fac.P, K, pts, cfg.tol_exact, True,
                                     f"pkernel_bound[{tag}_{_fmt(S)},N={N}]")
                rec.paper_anchor = "P >= K for kernels of subspaces of L^2_mu(B)"
                checks.append(rec)
            T = complement(S, d)
            lhs = Difference(K_S, L_S).matrix(pts.points)
            rhs = Difference(fac.K(T, N), fac.L(T, N)).matrix(pts.points)
            scale = float(np.max(np.abs(np.diag(K_S.matrix(pts.points)))))
            resid = float(np.max(np.abs(lhs - rhs)))
            checks.append(CheckRecord(f"difference_identity[S={_fmt(S)},N={N}]",
                                      "K_S - L_S = K_T - L_T", f"K_{_fmt(S)}-L_{_fmt(S)}",
                                      len(pts), None, resid, cfg.tol_exact,
                                      resid <= cfg.tol_exact * scale, {"scale": scale}))
            rec = check_ordering(K_S, L_S, pts, cfg.tol_exact, True,
                                 f"K_minus_L_psd[S={_fmt(S)},N={N}]")
            rec.paper_anchor = "K_S - L_S >= 0"
            checks.append(rec)
        # S' may be all of {1..d}, where X_empty = {0}
        for S in all_subsets:
            for S2 in all_subsets + [frozenset(range(1, d + 1))]:
                if S < S2:
                    rec = check_ordering(fac.K(S, N), fac.K(S2, N), pts, cfg.tol_exact, True,
                                         f"ordering[K_{_fmt(S)}>=K_{_fmt(S2)},N={N}]")
                    rec.paper_anchor = "K_S >= K_S' for S subset of S'"
                    checks.append(rec)
    for S in subsets:
        checks.extend(lattice_shift_records(n, S, top))

    # limits along the ladder
    for S in subsets:
        resids = []
        for N in ladder:
            res = decompose(DecompositionSpec(p, S, N, n), fac, pts)
            resids.append(res.max_residual)
        ok = resids[-1] <= cfg.tol_identity and _ladder_ok(resids, cfg.ladder_drop, cfg.noise_floor)
        checks.append(CheckRecord(f"pick_identity[S={_fmt(S)}]", "P = K_S + L_T",
                                  f"P-K_{_fmt(S)}-L_{_fmt(complement(S, d))}", len(pts), None,
                                  resids[-1], cfg.tol_identity, ok,
                                  {"ladder": ladder, "residuals": resids}))
        for tag, build in (("K", fac.K), ("L", fac.L)):
            for j in sorted(S):
                eigs, scales = [], []
                for N in ladder:
                    M = ShiftFactor(j, build(S, N)).matrix(pts.points)
                    e = spectrum(M)
                    eigs.append(float(e[0]))
                    scales.append(psd_scale(M, e))
                ok = eigs[-1] >= -cfg.tol_limit and _negativity_ok(eigs, scales, cfg.tol_exact)
                checks.append(CheckRecord(f"contractive[{tag}_{_fmt(S)},j={j}]",
                                          f"(1 - z_{j} conj w_{j}) {tag}_S >= 0 for j in S",
                                          f"(1-z{j}w{j}*){tag}_{_fmt(S)}^{top}", len(pts),
                                          eigs[-1], None, cfg.tol_limit, ok,
                                          {"ladder": ladder, "min_eigs": eigs}))

    # kernel sections: K >= eps K_eta K_eta* exactly up to eps = 1/K(eta, eta)
    eta = pts.points[-1]
    for S in subsets:
        K = fac.K(S, top)
        k_eta = K(eta, eta).real
        hold = check_psd(Difference(K, RankOne(K, eta, 1.0 / k_eta)), pts, cfg.tol_exact)
        over = check_psd(Difference(K, RankOne(K, eta, 1.01 / k_eta)), pts, cfg.tol_exact)
        checks.append(CheckRecord(f"section_epsilon[K_{_fmt(S)},N={top}]",
                                  "largest eps with K >= eps K_eta K_eta* is 1/K(eta,eta)",
                                  f"K_{_fmt(S)}^{top}", len(pts), hold.min_eig, None,
                                  cfg.tol_exact, hold.passed and not over.passed,
                                  {"min_eig_over": over.min_eig}))

    # Agler and GKVW pairs at the top of the ladder
    pairs = []
    if d == 2:
        pairs.append(("agler", "1 - f f* = sum_j (1 - z_j w_j*) Gamma_j",
                      agler_pair(p, n, top, fac)))
    j, k = cfg.gkvw
    pairs.append((f"gkvw[j={j},k={k}]",
                  "1 - f f* = prod_{r!=j}(1 - z_r w_r*) K + prod_{r!=k}(1 - z_r w_r*) K'",
                  gkvw_pair(p, n, j, k, top, factory=fac)))
    for name, anchor, pair in pairs:
        resid = pair.identity_residual(pts)
        checks.append(CheckRecord(f"{name}_identity", anchor, name, len(pts), None, resid,
                                  cfg.tol_identity, resid <= cfg.tol_identity))
        for idx, K in enumerate(pair):
            rec = check_psd(K, pts, cfg.tol_limit, False, f"{name}_psd[{idx + 1}]",
                            "pair members are PSD")
            rec.kernel = K.describe()
            checks.append(rec)

    # Gram operator bounds and reproducing property
    lo, hi = torus_abs_extrema(p, cfg.extrema_grid)
    b_gram = fac.gram(BSet(n), top)
    grams = [g for g in [b_gram] + fac.grams() if g is not None]
    lower, upper = hi ** -2 - cfg.sandwich_eps, lo ** -2 + cfg.sandwich_eps
    e_min = min(float(g.eigenvalues()[0]) for g in grams)
    e_max = max(float(g.eigenvalues()[-1]) for g in grams)
    checks.append(CheckRecord("gram_sandwich", "sup|p|^-2 <= eig(C_X) <= inf|p|^-2",
                              "Gram", 0, e_min, max(lower - e_min, e_max - upper, 0.0),
                              cfg.sandwich_eps, e_min >= lower and e_max <= upper,
                              {"max_eig": e_max, "bounds": [hi ** -2, lo ** -2],
                               "grams": len(grams), "grid": cfg.extrema_grid}))
    probes = [np.zeros(d), np.full(d, 0.5)]
    rp = max(reproducing_property_residual(g, table, z) for g in grams for z in probes)
    checks.append(CheckRecord("reproducing_property", "<z^g, K_zeta>_mu = zeta^g", "Gram", 2,
                              None, rp, cfg.tol_exact, rp <= cfg.tol_exact))
    return report
