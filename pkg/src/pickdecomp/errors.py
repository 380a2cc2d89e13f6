"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Multi-indices, points or polynomials of mismatched dimension."""


class DomainError(ValueError):
    """Evaluation point outside the open polydisk."""


class UnstablePolynomialError(ValueError):
    """Polynomial vanishes (numerically) somewhere on the closed polydisk."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class RangeError(ValueError):
    """A lattice difference falls outside the stored moment range."""


class GramError(ValueError):
    """Cholesky factorization of a Gram matrix failed."""
