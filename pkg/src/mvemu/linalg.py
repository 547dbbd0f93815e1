"""Numerically careful linear algebra helpers shared by the whole package.

All symmetric solves go through Cholesky factors; no matrix is ever
explicitly inverted outside of small posterior scale matrices.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular


class FactorizationError(np.linalg.LinAlgError):
    """Raised when a matrix fails Cholesky factorisation even after jitter."""

    def __init__(self, name: str, detail: str = ""):
        self.matrix_name = name
        msg = f"matrix {name!r} is not positive definite"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


# Jitter escalation: start at 1e-10 * mean diagonal, multiply by 10 up to 1e-6.
_JITTER_START = 1e-10
_JITTER_MAX = 1e-6


def chol_lower(a: np.ndarray, name: str = "matrix", jitter: bool = True) -> np.ndarray:
    """Lower Cholesky factor of a symmetric matrix, with jitter escalation.

    Jitter is added as a multiple of the mean diagonal, escalating by
    factors of 10 from 1e-10 up to 1e-6 before giving up loudly.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise FactorizationError(name, f"not square: shape {a.shape}")
    try:
        return cholesky(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        if not jitter:
            raise FactorizationError(name) from None
    mean_diag = float(np.mean(np.diag(a)))
    if mean_diag <= 0:
        raise FactorizationError(name, "non-positive diagonal")
    level = _JITTER_START
    eye = np.eye(a.shape[0])
    while level <= _JITTER_MAX * (1 + 1e-12):
        try:
            return cholesky(a + level * mean_diag * eye, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            level *= 10.0
    raise FactorizationError(name, f"jitter escalation exhausted at {_JITTER_MAX:g}")


def logdet_from_chol(lower: np.ndarray) -> float:
    """log det of A given its lower Cholesky factor."""
    return 2.0 * float(np.sum(np.log(np.diag(lower))))


def chol_solve(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b given the lower Cholesky factor of A."""
    return cho_solve((lower, True), b, check_finite=False)


def tri_solve(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve L x = b for lower-triangular L."""
    return solve_triangular(lower, b, lower=True, check_finite=False)


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def check_symmetric(a: np.ndarray, name: str, rtol: float = 1e-12) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > rtol * scale:
        raise ValueError(f"matrix {name!r} is not symmetric to tolerance")
    return symmetrize(a)
