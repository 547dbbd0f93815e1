"""Validation of a fitted emulator against held-out simulator runs.

Standardised individual errors, interval coverage, the omnibus determinant
statistic with its simulated Beta-product reference law, an uncorrelated
error sample for QQ plotting, and RMSE/RRMSE summaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.stats import t as t_dist

from .emulator import FittedEmulator, PredictiveDistribution
from .linalg import FactorizationError, chol_lower


def individual_errors(pred: PredictiveDistribution, y0: np.ndarray) -> np.ndarray:
    """Standardised individual prediction errors D_us = sqrt(dof/(R_uu S_ss)) (y - q).

    Under emulator adequacy each entry follows a standard t with dof_hat
    degrees of freedom.
    """
    y0 = np.atleast_2d(np.asarray(y0, float))
    if y0.shape != pred.q.shape:
        raise ValueError(f"Y0 shape {y0.shape} does not match predictions {pred.q.shape}")
    r_diag = np.diag(pred.r)
    if np.any(r_diag <= -1e-10):
        raise ValueError("negative predictive row-scale diagonal")
    denom = np.sqrt(np.outer(np.clip(r_diag, 0.0, None), np.diag(pred.s_hat)))
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.sqrt(pred.dof_hat) * (y0 - pred.q) / denom
    d[np.asarray(denom == 0.0) & np.asarray(y0 == pred.q)] = 0.0
    return d


def interval_coverage(pred: PredictiveDistribution, y0: np.ndarray, alpha: float) -> float:
    """Fraction of Y0 entries inside their (1 - alpha) predictive intervals."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    y0 = np.atleast_2d(np.asarray(y0, float))
    c = t_dist.ppf(1 - alpha / 2, df=pred.dof_hat)
    half = c * np.sqrt(pred.marginal_scale2())
    inside = np.abs(y0 - pred.q) <= half
    return float(np.mean(inside))


def _standardised_matrix(pred: PredictiveDistribution, y0: np.ndarray) -> np.ndarray:
    """E = G_R^{-1} (Y0 - Q) G_S^{-1}, Cholesky decompositions throughout."""
    y0 = np.atleast_2d(np.asarray(y0, float))
    resid = y0 - pred.q
    if np.max(np.abs(resid)) == 0.0:
        return np.zeros_like(resid)
    gr = chol_lower(pred.r, "R")  # R = G_R G_R'
    ls = chol_lower(pred.s_hat, "S_hat")  # S_hat = L L' = G_S' G_S with G_S = L'
    e = solve_triangular(gr, resid, lower=True, check_finite=False)
    # right-multiply by G_S^{-1} = (L')^{-1}
    e = solve_triangular(ls, e.T, lower=True, check_finite=False).T
    return e


def omnibus_u(pred: PredictiveDistribution, y0: np.ndarray) -> float:
    """Omnibus adequacy statistic U = |I_k + E'E|^{-1}, in (0, 1]."""
    e = _standardised_matrix(pred, y0)
    k = e.shape[1]
    sign, logdet = np.linalg.slogdet(np.eye(k) + e.T @ e)
    if sign <= 0:
        raise FactorizationError("I + E'E", "non-positive determinant")
    return float(np.exp(-logdet))


def uncorrelated_errors(pred: PredictiveDistribution, y0: np.ndarray) -> tuple[np.ndarray, float]:
    """vec of sqrt(dof) * E (column-stacked) plus the reference t dof for QQ plots."""
    e = _standardised_matrix(pred, y0)
    return np.sqrt(pred.dof_hat) * e.ravel(order="F"), float(pred.dof_hat)


@dataclass(frozen=True)
class UReference:
    """Monte Carlo summary of the Beta-product reference law for U."""

    k: int
    n0: int
    dof_hat: float
    mc_size: int
    seed: int
    mean: float
    q025: float
    q975: float
    samples: np.ndarray = field(repr=False)

    def quantile(self, q) -> float | np.ndarray:
        return np.quantile(self.samples, q)

    def contains(self, u: float) -> bool:
        return self.q025 <= u <= self.q975

    def to_dict(self) -> dict:
        return {"k": self.k, "n0": self.n0, "dof_hat": self.dof_hat,
                "mc_size": self.mc_size, "seed": self.seed,
                "mean": self.mean, "q025": self.q025, "q975": self.q975}


def u_reference(k: int, n0: int, dof_hat: float, mc_size: int = 100_000,
                seed: int = 0) -> UReference:
    """Simulate the null law of U: the product of k independent Beta variables
    with parameters ((k + dof_hat - s)/2, n0/2), s = 1..k."""
    if k < 1 or n0 < 1 or dof_hat <= 0 or mc_size < 1:
        raise ValueError("k, n0, dof_hat and mc_size must be positive")
    rng = np.random.default_rng(seed)
    prod = np.ones(mc_size)
    for s in range(1, k + 1):
        a = (k + dof_hat - s) / 2.0
        prod *= rng.beta(a, n0 / 2.0, size=mc_size)
    prod.sort()
    return UReference(k=k, n0=n0, dof_hat=float(dof_hat), mc_size=mc_size, seed=seed,
                      mean=float(prod.mean()),
                      q025=float(np.quantile(prod, 0.025)),
                      q975=float(np.quantile(prod, 0.975)),
                      samples=prod)


def rmse(pred: PredictiveDistribution, y0: np.ndarray) -> float:
    y0 = np.atleast_2d(np.asarray(y0, float))
    return float(np.sqrt(np.mean((y0 - pred.q) ** 2)))


def relative_loss_point_estimates(pred: PredictiveDistribution, mc_size: int = 2000,
                                  seed: int = 0, eps: float | None = None,
                                  y0: np.ndarray | None = None) -> tuple[np.ndarray, bool]:
    """gamma_us = E(Y^{-1}) / E(Y^{-2}) under each marginal t predictive.

    Estimated by seeded Monte Carlo with draws truncated to |y| > eps; the
    inverse moments of a t predictive with mass near zero do not exist, so
    heavy truncation is flagged as unstable.
    """
    scale = np.sqrt(pred.marginal_scale2())
    if eps is None:
        ref = np.median(np.abs(y0)) if y0 is not None else np.median(np.abs(pred.q))
        eps = 1e-6 * max(ref, 1e-300)
    degenerate = scale == 0.0
    rng = np.random.default_rng(seed)
    draws = pred.q[None] + scale[None] * rng.standard_t(pred.dof_hat,
                                                        size=(mc_size,) + pred.q.shape)
    keep = np.abs(draws) > eps
    trunc_frac = 1.0 - keep.mean()
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(keep, 1.0 / draws, 0.0)
        inv2 = np.where(keep, 1.0 / draws**2, 0.0)
    counts = np.maximum(keep.sum(axis=0), 1)
    m1 = inv.sum(axis=0) / counts
    m2 = inv2.sum(axis=0) / counts
    gamma = np.where(degenerate, pred.q, m1 / np.maximum(m2, 1e-300))
    unstable = trunc_frac > 0.01
    return gamma, bool(unstable)


def rrmse(fit_or_pred, y0: np.ndarray, mc_size: int = 2000, seed: int = 0,
          eps: float | None = None) -> tuple[float, bool]:
    """Root relative mean squared error using the relative-loss point estimate.

    Returns (rrmse, unstable_flag).
    """
    pred = fit_or_pred if isinstance(fit_or_pred, PredictiveDistribution) else None
    if pred is None:
        raise TypeError("rrmse expects a PredictiveDistribution")
    y0 = np.atleast_2d(np.asarray(y0, float))
    gamma, unstable = relative_loss_point_estimates(pred, mc_size=mc_size, seed=seed,
                                                    eps=eps, y0=y0)
    if np.any(y0 == 0.0):
        raise ValueError("RRMSE undefined: Y0 contains exact zeros")
    val = float(np.sqrt(np.mean(((y0 - gamma) / y0) ** 2)))
    return val, unstable


@dataclass
class DiagnosticReport:
    """All adequacy diagnostics for one emulator/validation-set pair."""

    errors: np.ndarray
    coverage: float
    alpha: float
    u: float
    reference: UReference
    uncorrelated: np.ndarray
    reference_dof: float
    rmse: float
    rrmse: float
    rrmse_unstable: bool
    flags: list[str]
    mc_size: int
    seed: int

    @property
    def adequate(self) -> bool:
        return "inadequate" not in self.flags

    def to_dict(self) -> dict:
        return {
            "errors": self.errors.tolist(),
            "coverage": self.coverage,
            "alpha": self.alpha,
            "u": self.u,
            "u_reference": self.reference.to_dict(),
            "uncorrelated_errors": self.uncorrelated.tolist(),
            "reference_dof": self.reference_dof,
            "rmse": self.rmse,
            "rrmse": self.rrmse,
            "rrmse_unstable": self.rrmse_unstable,
            "flags": list(self.flags),
            "mc_size": self.mc_size,
            "seed": self.seed,
        }

    def qq_data(self) -> np.ndarray:
        """Two columns: theoretical t quantile, observed uncorrelated error."""
        obs = np.sort(self.uncorrelated)
        n = obs.size
        probs = (np.arange(1, n + 1) - 0.5) / n
        theo = t_dist.ppf(probs, df=self.reference_dof)
        return np.column_stack([theo, obs])


def diagnose(fit: FittedEmulator, test_points: np.ndarray, y0: np.ndarray,
             alpha: float = 0.05, mc_size: int = 100_000, seed: int = 0) -> DiagnosticReport:
    """Run the full diagnostic battery on held-out runs."""
    pred = fit.predict(test_points)
    y0 = np.atleast_2d(np.asarray(y0, float))
    n0, k = y0.shape
    errs = individual_errors(pred, y0)
    cov = interval_coverage(pred, y0, alpha)
    u = omnibus_u(pred, y0)
    ref = u_reference(k, n0, pred.dof_hat, mc_size=mc_size, seed=seed)
    uncorr, dof = uncorrelated_errors(pred, y0)
    rm = rmse(pred, y0)
    try:
        rr, unstable = rrmse(pred, y0, seed=seed)
    except ValueError:
        rr, unstable = float("nan"), True
    flags = []
    if not ref.contains(u):
        flags.append("inadequate")
    se = np.sqrt(alpha * (1 - alpha) / (n0 * k))
    if abs(cov - (1 - alpha)) > 3 * se:
        flags.append("miscalibrated")
    if unstable:
        flags.append("rrmse-unstable")
    return DiagnosticReport(errors=errs, coverage=cov, alpha=alpha, u=u, reference=ref,
                            uncorrelated=uncorr, reference_dof=dof, rmse=rm, rrmse=rr,
                            rrmse_unstable=unstable, flags=flags, mc_size=mc_size,
                            seed=seed)
