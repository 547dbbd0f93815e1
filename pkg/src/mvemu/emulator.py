"""Conjugate fitting and prediction for covariance-separable emulators.

Given the correlation parameters, the regression coefficients and output
scale have a matrix-normal-inverse-Wishart posterior and the predictive
distribution at new points is matrix t.  Correlation parameters are set by
plug-in at the mode of their marginal posterior, found by multistart
Nelder-Mead on the log scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import meanfn as mf
from .data import Dataset
from .kernel import (CorrelationConfig, VariableSchema, build_cross, build_row_scale,
                     corr_matrix, distance_tensor, lightweight_config)
from .linalg import (FactorizationError, chol_lower, chol_solve, logdet_from_chol,
                     symmetrize, tri_solve)
from .matvar import MatrixTParams, matrix_t_marginal


@dataclass(frozen=True)
class PriorSpec:
    """Prior over (B, Sigma): weak, unit-information, or an explicit MNIW.

    weak: M = 0, Omega^{-1} = 0, S = 0, delta = -k + 1 (handled structurally,
    never via large-variance matrices); requires n >= m + k at fit time.
    unit-information: as weak for Sigma, with Omega = n (H' A^{-1} H)^{-1}.
    """

    variant: str = "weak"  # "weak" | "unit-information" | "explicit"
    m: np.ndarray | None = None
    omega: np.ndarray | None = None
    s: np.ndarray | None = None
    dof: float | None = None

    def __post_init__(self):
        if self.variant not in ("weak", "unit-information", "explicit"):
            raise ValueError(f"unknown prior variant {self.variant!r}")
        if self.variant == "explicit":
            if any(v is None for v in (self.m, self.omega, self.s, self.dof)):
                raise ValueError("explicit prior needs M, Omega, S and dof")
            if self.dof <= 0:
                raise ValueError("explicit prior requires proper dof > 0")

    def to_dict(self) -> dict:
        d = {"variant": self.variant}
        if self.variant == "explicit":
            d.update(m=np.asarray(self.m).tolist(), omega=np.asarray(self.omega).tolist(),
                     s=np.asarray(self.s).tolist(), dof=float(self.dof))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PriorSpec":
        if d["variant"] == "explicit":
            return cls("explicit", m=np.asarray(d["m"], float), omega=np.asarray(d["omega"], float),
                       s=np.asarray(d["s"], float), dof=float(d["dof"]))
        return cls(d["variant"])


@dataclass(frozen=True)
class Posterior:
    """Posterior MNIW quantities at the plug-in correlation parameters."""

    m_hat: np.ndarray
    omega_hat: np.ndarray
    s_hat: np.ndarray
    dof_hat: float
    logdet_omega_hat: float
    logdet_s_hat: float


def posterior_update(y: np.ndarray, h: np.ndarray, a: np.ndarray,
                     prior: PriorSpec) -> Posterior:
    """MNIW posterior update given the training row scale A."""
    return _posterior_update_chol(y, h, chol_lower(a, "A"), prior)


def _posterior_update_chol(y: np.ndarray, h: np.ndarray, a_chol: np.ndarray,
                           prior: PriorSpec) -> Posterior:
    y = np.atleast_2d(np.asarray(y, float))
    h = np.atleast_2d(np.asarray(h, float))
    n, k = y.shape
    m = h.shape[1]
    w = tri_solve(a_chol, h)  # L^{-1} H
    z = tri_solve(a_chol, y)  # L^{-1} Y
    g = w.T @ w  # H' A^{-1} H
    wz = w.T @ z  # H' A^{-1} Y

    if prior.variant in ("weak", "unit-information"):
        if prior.variant == "weak" and n < m + k:
            raise ValueError(
                f"weak prior needs n >= m + k for a proper posterior (n={n}, m={m}, k={k})"
            )
        if prior.variant == "unit-information" and n < k:
            raise ValueError(f"unit-information prior needs n >= k (n={n}, k={k})")
        try:
            g_chol = chol_lower(symmetrize(g), "H'A^{-1}H", jitter=False)
        except FactorizationError:
            raise ValueError("design cannot support mean function: H'A^{-1}H is rank deficient") from None
        shrink = 1.0 if prior.variant == "weak" else n / (n + 1.0)
        g_inv_wz = chol_solve(g_chol, wz)
        omega_hat = shrink * chol_solve(g_chol, np.eye(m))
        m_hat = shrink * g_inv_wz
        s_hat = z.T @ z - shrink * (wz.T @ g_inv_wz)
        logdet_omega = -logdet_from_chol(g_chol) + m * np.log(shrink)
        dof_hat = (-k + 1.0) + n
    else:
        omega_prior_chol = chol_lower(prior.omega, "Omega")
        omega_inv = chol_solve(omega_prior_chol, np.eye(m))
        prec = symmetrize(g + omega_inv)
        prec_chol = chol_lower(prec, "H'A^{-1}H + Omega^{-1}", jitter=False)
        rhs = wz + omega_inv @ prior.m
        m_hat = chol_solve(prec_chol, rhs)
        omega_hat = chol_solve(prec_chol, np.eye(m))
        s_hat = (z.T @ z + prior.m.T @ omega_inv @ prior.m + prior.s
                 - m_hat.T @ prec @ m_hat)
        logdet_omega = -logdet_from_chol(prec_chol)
        dof_hat = prior.dof + n

    s_hat = symmetrize(s_hat)
    s_chol = chol_lower(s_hat, "S_hat")
    return Posterior(m_hat=m_hat, omega_hat=symmetrize(omega_hat), s_hat=s_hat,
                     dof_hat=float(dof_hat), logdet_omega_hat=float(logdet_omega),
                     logdet_s_hat=float(logdet_from_chol(s_chol)))


@dataclass(frozen=True)
class PredictiveDistribution:
    """Matrix-t predictive MT(Q, S_hat, R, dof) at a set of prediction points."""

    params: MatrixTParams
    new_points: np.ndarray

    @property
    def q(self) -> np.ndarray:
        return self.params.location

    @property
    def s_hat(self) -> np.ndarray:
        return self.params.col_scale

    @property
    def r(self) -> np.ndarray:
        return self.params.row_scale

    @property
    def dof_hat(self) -> float:
        return self.params.dof

    def marginal(self, u: int, s: int) -> tuple[float, float, float]:
        """(location, squared scale, dof) of the univariate t for entry (u, s)."""
        return matrix_t_marginal(self.params, u, s)

    def marginal_scale2(self) -> np.ndarray:
        """Matrix of squared marginal scales R_uu S_ss / dof."""
        return np.outer(np.diag(self.r), np.diag(self.s_hat)) / self.dof_hat

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        from .matvar import sample_matrix_t

        return sample_matrix_t(self.params, rng, size=size)

    def to_dict(self) -> dict:
        return {
            "q": self.q.tolist(),
            "s_hat": self.s_hat.tolist(),
            "r": self.r.tolist(),
            "dof_hat": float(self.dof_hat),
            "points": np.asarray(self.new_points).tolist(),
        }


# ---------------------------------------------------------------------------
# Marginal posterior of the correlation parameters


def _log_r_prior(r: np.ndarray) -> float:
    # i.i.d. Exponential(1) on each correlation parameter
    return -float(np.sum(r))


def _log_eta_prior(eta: float) -> float:
    return -np.log1p(eta * eta)


class MarginalPosterior:
    """Unnormalised log marginal posterior of (r, eta) for fixed data and mean.

    log pi(r, eta | Y) = log pi_r(r) + log pi_eta(eta)
        - (k/2) log|A| + (k/2) log|Omega_hat| (relative to the prior scale)
        - ((dof_hat + k - 1)/2) log|S_hat|, up to an additive constant.

    Precomputes the model matrix and per-variable distance stack so repeated
    evaluation during optimisation or MCMC is cheap.
    """

    def __init__(self, dataset: Dataset, meanfunc: mf.MeanFunction, prior: PriorSpec,
                 nugget: bool):
        self.dataset = dataset
        self.meanfn = meanfunc
        self.prior = prior
        self.nugget = nugget
        self.h = mf.expand(meanfunc, dataset.points, dataset.schema)
        self.dists = distance_tensor(dataset.points, dataset.points, dataset.schema)
        self.n, self.k = dataset.y.shape
        self.eye = np.eye(self.n)
        self._logdet_omega_prior = None
        if prior.variant == "explicit":
            self._logdet_omega_prior = logdet_from_chol(chol_lower(prior.omega, "Omega"))

    def row_scale(self, r: np.ndarray, eta: float) -> np.ndarray:
        a = corr_matrix(self.dists, r)
        if eta:
            a = a + eta * self.eye
        return a

    def __call__(self, r: np.ndarray, eta: float = 0.0) -> float:
        a_chol = chol_lower(self.row_scale(r, eta), "A")
        post = _posterior_update_chol(self.dataset.y, self.h, a_chol, self.prior)
        k, m = self.k, self.h.shape[1]
        val = (-0.5 * k * logdet_from_chol(a_chol)
               - 0.5 * (post.dof_hat + k - 1) * post.logdet_s_hat)
        if self.prior.variant == "weak":
            val += 0.5 * k * post.logdet_omega_hat
        elif self.prior.variant == "unit-information":
            # |Omega_hat| / |Omega| = (n+1)^{-m}: the ratio is free of r
            val += -0.5 * k * m * np.log(self.n + 1.0)
        else:
            val += 0.5 * k * (post.logdet_omega_hat - self._logdet_omega_prior)
        val += _log_r_prior(r)
        if self.nugget:
            val += _log_eta_prior(eta)
        return float(val)


def log_marginal_posterior_r(dataset: Dataset, meanfunc: mf.MeanFunction,
                             prior: PriorSpec, cfg: CorrelationConfig) -> float:
    """Log marginal posterior density of (r, eta), up to an additive constant."""
    cfg.check(dataset.schema)
    mp = MarginalPosterior(dataset, meanfunc, prior, nugget=cfg.eta > 0)
    return mp(cfg.r, cfg.eta)


# ---------------------------------------------------------------------------
# Fitting


@dataclass(frozen=True)
class FitOptions:
    kind: str = "gp"  # "lightweight" | "gp" | "gp-nugget"
    starts: int = 10
    budget: int = 500  # objective evaluations per start
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("lightweight", "gp", "gp-nugget"):
            raise ValueError(f"unknown emulator kind {self.kind!r}")


@dataclass(frozen=True)
class FittedEmulator:
    """Immutable prediction object: data, plug-in correlation parameters and
    the MNIW posterior evaluated at them."""

    dataset: Dataset
    meanfn: mf.MeanFunction
    cfg: CorrelationConfig
    prior: PriorSpec
    posterior: Posterior
    kind: str
    seed: int
    trace: dict = field(default_factory=dict)
    _a_chol: np.ndarray | None = None

    @property
    def schema(self) -> VariableSchema:
        return self.dataset.schema

    def a_chol(self) -> np.ndarray:
        if self._a_chol is not None:
            return self._a_chol
        a = build_row_scale(self.dataset.points, self.cfg, self.schema)
        chol = chol_lower(a, "A")
        object.__setattr__(self, "_a_chol", chol)
        return chol

    def predict(self, new_points: np.ndarray) -> PredictiveDistribution:
        """Matrix-t predictive distribution at the given internal-coordinate points."""
        new_points = self.schema.validate_points(new_points)
        ds, post = self.dataset, self.posterior
        h0 = mf.expand(self.meanfn, new_points, self.schema)
        t = build_cross(ds.points, new_points, self.cfg, self.schema)
        a0 = build_row_scale(new_points, self.cfg, self.schema)
        a_chol = self.a_chol()
        h = mf.expand(self.meanfn, ds.points, self.schema)
        aj_t = chol_solve(a_chol, t)  # A^{-1} T
        q = h0 @ post.m_hat + aj_t.T @ (ds.y - h @ post.m_hat)
        c = h0 - aj_t.T @ h
        r = a0 - t.T @ aj_t + c @ post.omega_hat @ c.T
        r = symmetrize(r)
        params = MatrixTParams(location=q, col_scale=post.s_hat, row_scale=r,
                               dof=post.dof_hat)
        return PredictiveDistribution(params=params, new_points=new_points)

    def predict_mean(self, new_points: np.ndarray) -> np.ndarray:
        """Posterior predictive mean only; cheap for large point batches."""
        new_points = self.schema.validate_points(new_points)
        ds, post = self.dataset, self.posterior
        h0 = mf.expand(self.meanfn, new_points, self.schema)
        q = h0 @ post.m_hat
        if not self.cfg.lightweight:
            t = build_cross(ds.points, new_points, self.cfg, self.schema)
            h = mf.expand(self.meanfn, ds.points, self.schema)
            q = q + t.T @ chol_solve(self.a_chol(), ds.y - h @ post.m_hat)
        return q

    def conditional_mean_surface(self, b: np.ndarray):
        """Mean surface conditional on a sampled coefficient matrix B."""
        ds = self.dataset
        h = mf.expand(self.meanfn, ds.points, self.schema)
        resid_w = None
        if not self.cfg.lightweight:
            resid_w = chol_solve(self.a_chol(), ds.y - h @ b)

        def surface(new_points: np.ndarray) -> np.ndarray:
            h0 = mf.expand(self.meanfn, new_points, self.schema)
            q = h0 @ b
            if resid_w is not None:
                t = build_cross(ds.points, new_points, self.cfg, self.schema)
                q = q + t.T @ resid_w
            return q

        return surface

    def sample_coefficients(self, rng: np.random.Generator) -> np.ndarray:
        """One draw of B from the MNIW posterior (compositional)."""
        from .matvar import MNIWParams, sample_mniw

        params = MNIWParams(self.posterior.m_hat, self.posterior.omega_hat,
                            self.posterior.s_hat, self.posterior.dof_hat)
        b, _ = sample_mniw(params, rng)
        return b

    def to_dict(self) -> dict:
        return {
            "format": "mvemu-fit",
            "version": 1,
            "kind": self.kind,
            "schema": self.schema.to_dict(),
            "outputs": list(self.dataset.output_names),
            "mean_terms": self.meanfn.to_list(),
            "cfg": self.cfg.to_dict(),
            "prior": self.prior.to_dict(),
            "seed": self.seed,
            "points": self.dataset.points.tolist(),
            "y": self.dataset.y.tolist(),
            "posterior": {
                "m_hat": self.posterior.m_hat.tolist(),
                "omega_hat": self.posterior.omega_hat.tolist(),
                "s_hat": self.posterior.s_hat.tolist(),
                "dof_hat": self.posterior.dof_hat,
                "logdet_omega_hat": self.posterior.logdet_omega_hat,
                "logdet_s_hat": self.posterior.logdet_s_hat,
            },
            "trace": self.trace,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedEmulator":
        if d.get("format") != "mvemu-fit":
            raise ValueError("not a fitted-emulator document")
        schema = VariableSchema.from_dict(d["schema"])
        dataset = Dataset(schema, list(d["outputs"]),
                          np.asarray(d["points"], float), np.asarray(d["y"], float))
        meanfunc = mf.MeanFunction.from_list(d["mean_terms"], schema)
        cfg = CorrelationConfig.from_dict(d["cfg"])
        prior = PriorSpec.from_dict(d["prior"])
        p = d["posterior"]
        post = Posterior(m_hat=np.asarray(p["m_hat"], float),
                         omega_hat=np.asarray(p["omega_hat"], float),
                         s_hat=np.asarray(p["s_hat"], float),
                         dof_hat=float(p["dof_hat"]),
                         logdet_omega_hat=float(p["logdet_omega_hat"]),
                         logdet_s_hat=float(p["logdet_s_hat"]))
        return cls(dataset=dataset, meanfn=meanfunc, cfg=cfg, prior=prior,
                   posterior=post, kind=d["kind"], seed=int(d.get("seed", 0)),
                   trace=d.get("trace", {}))

    def refit_posterior(self) -> Posterior:
        """Recompute the posterior from stored inputs (consistency check)."""
        a = build_row_scale(self.dataset.points, self.cfg, self.schema)
        h = mf.expand(self.meanfn, self.dataset.points, self.schema)
        return posterior_update(self.dataset.y, h, a, self.prior)


def fit(dataset: Dataset, meanfunc: mf.MeanFunction, prior: PriorSpec | None = None,
        options: FitOptions | None = None) -> FittedEmulator:
    """Fit an emulator, optimising (r, eta) at the marginal posterior mode."""
    prior = prior or PriorSpec("weak")
    options = options or FitOptions()
    schema = dataset.schema

    if options.kind == "lightweight":
        cfg = lightweight_config(schema)
        h = mf.expand(meanfunc, dataset.points, schema)
        post = _posterior_update_chol(dataset.y, h, np.eye(dataset.n), prior)
        return FittedEmulator(dataset=dataset, meanfn=meanfunc, cfg=cfg, prior=prior,
                              posterior=post, kind=options.kind, seed=options.seed,
                              trace={"starts": 0, "evaluations": 0})

    nugget = options.kind == "gp-nugget"
    mp = MarginalPosterior(dataset, meanfunc, prior, nugget=nugget)
    p = schema.p
    dim = p + (1 if nugget else 0)

    def objective(theta: np.ndarray) -> float:
        theta = np.clip(theta, -20.0, 20.0)
        r = np.exp(theta[:p])
        eta = float(np.exp(theta[p])) if nugget else 0.0
        try:
            return -mp(r, eta)
        except (FactorizationError, ValueError):
            return 1e10

    rng = np.random.default_rng(options.seed)
    starts = [np.zeros(dim)]  # r = 1 (and eta = 1) as a deterministic start
    for _ in range(max(0, options.starts - 1)):
        r0 = rng.exponential(1.0, size=p)
        theta0 = np.log(np.maximum(r0, 1e-8))
        if nugget:
            theta0 = np.append(theta0, np.log(max(abs(rng.standard_cauchy()), 1e-4)))
        starts.append(theta0)

    best = None
    trace_starts = []
    for theta0 in starts:
        res = minimize(objective, theta0, method="Nelder-Mead",
                       options={"maxfev": options.budget, "xatol": 1e-5, "fatol": 1e-7})
        trace_starts.append({"x0": theta0.tolist(), "fun": float(res.fun),
                             "nfev": int(res.nfev), "success": bool(res.success)})
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None or best.fun >= 1e10:
        raise RuntimeError(
            f"all optimiser starts failed; trace: {trace_starts}"
        )

    theta = np.clip(best.x, -20.0, 20.0)
    r_hat = np.exp(theta[:p])
    eta_hat = float(np.exp(theta[p])) if nugget else 0.0
    cfg = CorrelationConfig(r=r_hat, eta=eta_hat)
    a_chol = chol_lower(mp.row_scale(r_hat, eta_hat), "A")
    post = _posterior_update_chol(dataset.y, mp.h, a_chol, prior)
    trace = {"starts": len(starts), "evaluations": sum(s["nfev"] for s in trace_starts),
             "best_value": float(-best.fun), "per_start": trace_starts}
    return FittedEmulator(dataset=dataset, meanfn=meanfunc, cfg=cfg, prior=prior,
                          posterior=post, kind=options.kind, seed=options.seed,
                          trace=trace, _a_chol=a_chol)


def unit_information_prior() -> PriorSpec:
    return PriorSpec("unit-information")
