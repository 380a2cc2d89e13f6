"""Pick kernel decompositions for rational inner functions on the polydisk.

Moments of the Bernstein-Szego measure ``|p|^-2 dsigma`` are computed on a
torus grid, Gram matrices over lattice index sets give truncated
reproducing kernels, and :mod:`pickdecomp.certify` checks the resulting
identities, orderings and contractivity on sampled point sets.
"""

from .certify import CertificateReport, CheckRecord, SuiteConfig, check_contractive, check_ordering, check_psd, run_suite
from .decomp import (DecompositionResult, DecompositionSpec, KernelFactory, KernelPair,
                     agler_pair, build_KS, build_LS, decompose, exact_difference_identity,
                     gkvw_pair, truncation_sweep)
from .errors import DimensionError, DomainError, GramError, RangeError, UnstablePolynomialError
from .gram import GramMatrix, build_gram, reproducing_property_residual, rk_evaluate
from .kernels import ExplicitP, GramSubspace, Kernel, explicit_P, schur_normalize
from .lattice import (BSet, Box, Orthant, ShiftedOrthant, XSingle, XUnion, contains,
                      enumerate_set, graded_lex_key)
from .moments import CONVENTION, MomentCache, MomentTable, compute_moments, ptilde_orthogonality_residual
from .pointsets import PointSet
from .stablepoly import StablePolynomial, check_stability, evaluate, gen_corpus, reflect

__version__ = "0.1.0"

__all__ = [
    "CertificateReport",
    "CheckRecord",
    "SuiteConfig",
    "check_contractive",
    "check_ordering",
    "check_psd",
    "run_suite",
    "DecompositionResult",
    "DecompositionSpec",
    "KernelFactory",
    "KernelPair",
    "agler_pair",
    "build_KS",
    "build_LS",
    "decompose",
    "exact_difference_identity",
    "gkvw_pair",
    "truncation_sweep",
    "DimensionError",
    "DomainError",
    "GramError",
    "RangeError",
    "UnstablePolynomialError",
    "GramMatrix",
    "build_gram",
    "reproducing_property_residual",
    "rk_evaluate",
    "ExplicitP",
    "GramSubspace",
    "Kernel",
    "explicit_P",
    "schur_normalize",
    "BSet",
    "Box",
    "Orthant",
    "ShiftedOrthant",
    "XSingle",
    "XUnion",
    "contains",
    "enumerate_set",
    "graded_lex_key",
    "CONVENTION",
    "MomentCache",
    "MomentTable",
    "compute_moments",
    "ptilde_orthogonality_residual",
    "PointSet",
    "StablePolynomial",
    "check_stability",
    "evaluate",
    "gen_corpus",
    "reflect",
]
