"""Matrix-variate distributions: matrix normal, inverse Wishart, matrix t, MNIW.

Inverse-Wishart convention
--------------------------
We write Sigma ~ IW_k(S, delta) for the distribution with density

    p(Sigma) propto |Sigma|^{-(delta + 2k)/2} exp{-tr(Sigma^{-1} S) / 2},

i.e. the degrees-of-freedom-shift convention in which the conjugate update
of the MNIW family is delta_hat = delta + n and E[Sigma] = S / (delta - 2)
for delta > 2.  In terms of scipy's ``invwishart(df, scale)`` this is
df = delta + k - 1, so a draw is proper exactly when delta > 0.  For k = 1
it reduces to InverseGamma(delta / 2, S / 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import invwishart

from .linalg import FactorizationError, check_symmetric, chol_lower

# Scale matrices with mean diagonal below this are rejected as degenerate.
_SCALE_TOL = 1e-10


def _validated_scale(a: np.ndarray, name: str) -> np.ndarray:
    a = check_symmetric(a, name)
    if float(np.mean(np.diag(a))) < _SCALE_TOL:
        raise FactorizationError(name, "scale below SPD tolerance")
    return a


@dataclass(frozen=True)
class MatrixNormalParams:
    """MN(mean, colScale, rowScale): n x k mean, k x k Sigma, n x n A."""

    mean: np.ndarray
    col_scale: np.ndarray
    row_scale: np.ndarray

    def __post_init__(self):
        mean = np.atleast_2d(np.asarray(self.mean, dtype=float))
        col = _validated_scale(np.asarray(self.col_scale, dtype=float), "colScale")
        row = _validated_scale(np.asarray(self.row_scale, dtype=float), "rowScale")
        if mean.shape != (row.shape[0], col.shape[0]):
            raise ValueError(
                f"mean shape {mean.shape} inconsistent with row scale "
                f"{row.shape[0]} and column scale {col.shape[0]}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "col_scale", col)
        object.__setattr__(self, "row_scale", row)


@dataclass(frozen=True)
class InverseWishartParams:
    """IW_k(S, delta) in the shift convention documented in the module docstring.

    delta = -k + 1 is the conventional improper tag value; it may be stored
    but never sampled.
    """

    scale: np.ndarray
    dof: float

    def __post_init__(self):
        scale = _validated_scale(np.asarray(self.scale, dtype=float), "S")
        object.__setattr__(self, "scale", scale)

    @property
    def k(self) -> int:
        return self.scale.shape[0]

    @property
    def is_proper(self) -> bool:
        return self.dof > 0

    def mean(self) -> np.ndarray:
        if self.dof <= 2:
            raise ValueError("inverse-Wishart mean requires dof > 2")
        return self.scale / (self.dof - 2.0)


@dataclass(frozen=True)
class MatrixTParams:
    """MT(Q, S_hat, R, dof): location, SPD column scale, PSD row scale."""

    location: np.ndarray
    col_scale: np.ndarray
    row_scale: np.ndarray
    dof: float
    psd_tol: float = 1e-10

    def __post_init__(self):
        loc = np.atleast_2d(np.asarray(self.location, dtype=float))
        col = _validated_scale(np.asarray(self.col_scale, dtype=float), "col_scale")
        row = check_symmetric(np.asarray(self.row_scale, dtype=float), "row_scale")
        if loc.shape != (row.shape[0], col.shape[0]):
            raise ValueError("location shape inconsistent with scale matrices")
        if self.dof <= 0:
            raise ValueError("matrix t requires dof > 0")
        scale = max(1.0, float(np.max(np.abs(row))))
        if np.min(np.linalg.eigvalsh(row)) < -self.psd_tol * scale:
            raise FactorizationError("row_scale", "not PSD to tolerance")
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "col_scale", col)
        object.__setattr__(self, "row_scale", row)

    @property
    def shape(self) -> tuple[int, int]:
        return self.location.shape


@dataclass(frozen=True)
class MNIWParams:
    """Matrix-normal-inverse-Wishart: B|Sigma ~ MN(M, Sigma, Omega), Sigma ~ IW(S, dof)."""

    m: np.ndarray
    omega: np.ndarray
    s: np.ndarray
    dof: float

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.m, dtype=float))
        omega = _validated_scale(np.asarray(self.omega, dtype=float), "Omega")
        s = _validated_scale(np.asarray(self.s, dtype=float), "S")
        if m.shape != (omega.shape[0], s.shape[0]):
            raise ValueError("M shape inconsistent with Omega and S")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "s", s)


def _psd_factor(a: np.ndarray, name: str, tol: float = 1e-10) -> np.ndarray:
    """A factor G with G G^T = a for PSD a; Cholesky when possible, eigh fallback."""
    try:
        return chol_lower(a, name, jitter=False)
    except FactorizationError:
        pass
    vals, vecs = np.linalg.eigh(a)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.min(vals) < -tol * scale:
        raise FactorizationError(name, "negative eigenvalue beyond PSD tolerance")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def sample_matrix_normal(
    params: MatrixNormalParams, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Draw from MN(mean, Sigma, A); vec of a draw has covariance Sigma (x) A."""
    n, k = params.mean.shape
    la = chol_lower(params.row_scale, "rowScale", jitter=False)
    ls = chol_lower(params.col_scale, "colScale", jitter=False)
    if size is None:
        z = rng.standard_normal((n, k))
        return params.mean + la @ z @ ls.T
    z = rng.standard_normal((size, n, k))
    return params.mean[None] + np.einsum("ij,bjl,kl->bik", la, z, ls)


def sample_inverse_wishart(
    params: InverseWishartParams, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Draw SPD matrices from IW_k(S, delta); requires a proper delta > 0."""
    if not params.is_proper:
        raise ValueError(
            f"improper prior is not sampleable: IW dof {params.dof} <= 0"
        )
    df = params.dof + params.k - 1
    draws = invwishart.rvs(df=df, scale=params.scale, size=size or 1, random_state=rng)
    draws = np.asarray(draws, dtype=float)
    if params.k == 1:
        draws = draws.reshape(-1, 1, 1)
    elif size is None or size == 1:
        draws = draws.reshape(-1, params.k, params.k)
    return draws[0] if size is None else draws


def sample_matrix_t(
    params: MatrixTParams, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Compositional draw: Sigma ~ IW(col_scale, dof), then MN(location, Sigma, row_scale)."""
    n, k = params.shape
    if np.max(np.abs(params.row_scale)) == 0.0:
        if size is None:
            return params.location.copy()
        return np.broadcast_to(params.location, (size, n, k)).copy()
    gr = _psd_factor(params.row_scale, "row_scale", params.psd_tol)
    iw = InverseWishartParams(params.col_scale, params.dof)
    sigmas = sample_inverse_wishart(iw, rng, size=size or 1)
    z = rng.standard_normal((size or 1, n, k))
    ls = np.linalg.cholesky(sigmas)
    out = params.location[None] + np.einsum("ij,bjl,bkl->bik", gr, z, ls)
    return out[0] if size is None else out


def sample_mniw(
    params: MNIWParams, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """One draw (B, Sigma) from the MNIW distribution."""
    sigma = sample_inverse_wishart(InverseWishartParams(params.s, params.dof), rng)
    b = sample_matrix_normal(MatrixNormalParams(params.m, sigma, params.omega), rng)
    return b, sigma


def matrix_t_marginal(
    params: MatrixTParams, row: int, col: int
) -> tuple[float, float, float]:
    """(location, squared scale, dof) of the univariate t marginal of entry (row, col).

    The squared scale is R_uu * S_ss / dof, so the marginal variance is
    R_uu * S_ss / (dof - 2) when dof > 2.
    """
    n, k = params.shape
    if not (0 <= row < n and 0 <= col < k):
        raise IndexError(f"entry ({row}, {col}) out of range for shape ({n}, {k})")
    q = float(params.location[row, col])
    scale2 = float(params.row_scale[row, row] * params.col_scale[col, col] / params.dof)
    return q, scale2, float(params.dof)
