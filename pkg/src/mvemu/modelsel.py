"""Bayesian mean-function comparison by MCMC model composition.

Phase 1 proposes a single-term addition or removal (uniform over the legal
moves) with the model accepted by a Metropolis ratio of marginal likelihoods;
for GP emulators, Phase 2 updates the correlation parameters (and nugget) by
random-walk Metropolis on the log scale.  The model prior is uniform over all
marginal sub-models of the maximal mean function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import meanfn as mf
from .data import Dataset
from .emulator import (MarginalPosterior, PriorSpec, _log_eta_prior, _log_r_prior,
                       _posterior_update_chol)
from .kernel import CorrelationConfig, corr_matrix, distance_tensor
from .linalg import FactorizationError, chol_lower, logdet_from_chol


def log_multivariate_gamma(k: int, x: float) -> float:
    """log Gamma_k(x) via the product-of-gammas formula."""
    return k * (k - 1) / 4.0 * math.log(math.pi) + float(
        sum(gammaln(x - s / 2.0) for s in range(k))
    )


def log_marginal_likelihood(dataset: Dataset, meanfunc: mf.MeanFunction,
                            cfg: CorrelationConfig, prior: PriorSpec) -> float:
    """log pi(Y | r, v) for one mean function at fixed correlation parameters.

    Exact for an explicit proper prior.  For the unit-information prior the
    weak-limit hyperparameters S = 0, delta = -k + 1 contribute an improper
    constant shared by every model; that constant is dropped, so values are
    comparable across models but are not absolute log densities.
    """
    cfg.check(dataset.schema)
    y = dataset.y
    n, k = y.shape
    h = mf.expand(meanfunc, dataset.points, dataset.schema)
    m = h.shape[1]
    from .kernel import build_row_scale

    a = build_row_scale(dataset.points, cfg, dataset.schema)
    a_chol = chol_lower(a, "A")
    post = _posterior_update_chol(y, h, a_chol, prior)
    dof_hat = post.dof_hat
    val = (log_multivariate_gamma(k, (k + dof_hat - 1) / 2.0)
           - (n * k / 2.0) * math.log(math.pi)
           - (k / 2.0) * logdet_from_chol(a_chol)
           - ((dof_hat + k - 1) / 2.0) * post.logdet_s_hat)
    if prior.variant == "unit-information":
        val += -(k * m / 2.0) * math.log(n + 1.0)
    elif prior.variant == "explicit":
        logdet_omega = logdet_from_chol(chol_lower(prior.omega, "Omega"))
        logdet_s = logdet_from_chol(chol_lower(prior.s, "S"))
        val += (-log_multivariate_gamma(k, (k + prior.dof - 1) / 2.0)
                + (k / 2.0) * (post.logdet_omega_hat - logdet_omega)
                + ((prior.dof + k - 1) / 2.0) * logdet_s)
    else:
        raise ValueError(
            "weak prior has no usable marginal likelihood; use unit-information"
        )
    return float(val)


@dataclass(frozen=True)
class Mc3Options:
    iters: int = 100_000
    burn_frac: float = 0.1
    seed: int = 0
    kind: str = "lightweight"  # "lightweight" | "gp" | "gp-nugget"
    rw_sigma: float = 0.3

    def __post_init__(self):
        if self.iters < 1000:
            raise ValueError("mc3 needs at least 1000 iterations")
        if self.kind not in ("lightweight", "gp", "gp-nugget"):
            raise ValueError(f"unknown emulator kind {self.kind!r}")


def model_id(meanfunc: mf.MeanFunction) -> str:
    parts = []
    for t in meanfunc.terms:
        if t.kind == "intercept":
            parts.append("1")
        elif t.kind == "linear":
            parts.append(t.vars[0])
        elif t.kind == "quadratic":
            parts.append(f"{t.vars[0]}^2")
        else:
            parts.append(f"{t.vars[0]}:{t.vars[1]}")
    return "+".join(parts)


@dataclass
class ModelPosteriorSummary:
    counts: dict  # model id -> retained visit count
    models: dict  # model id -> MeanFunction
    inclusion: dict  # term label -> probability
    modal: mf.MeanFunction
    accept_rate_phase1: float
    accept_rate_phase2: float | None
    iters: int
    burn: int
    seed: int
    kind: str
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "counts": {mid: int(c) for mid, c in sorted(self.counts.items())},
            "models": {mid: m.to_list() for mid, m in sorted(self.models.items())},
            "inclusion": {lbl: float(p) for lbl, p in sorted(self.inclusion.items())},
            "modal": self.modal.to_list(),
            "accept_rate_phase1": self.accept_rate_phase1,
            "accept_rate_phase2": self.accept_rate_phase2,
            "iters": self.iters,
            "burn": self.burn,
            "seed": self.seed,
            "kind": self.kind,
            "settings": self.settings,
        }


def _term_label(t: mf.Term) -> str:
    if t.kind == "intercept":
        return "1"
    if t.kind == "linear":
        return t.vars[0]
    if t.kind == "quadratic":
        return f"{t.vars[0]}^2"
    return ":".join(t.vars)


class _GpScore:
    """Model-comparison score for GP kinds: r-dependent, cached per (A, model)."""

    def __init__(self, dataset: Dataset, prior: PriorSpec):
        self.dataset = dataset
        self.prior = prior
        self.dists = distance_tensor(dataset.points, dataset.points, dataset.schema)
        self.n, self.k = dataset.y.shape
        self.eye = np.eye(self.n)
        self._h_cache: dict = {}

    def h(self, model: mf.MeanFunction) -> np.ndarray:
        key = model.key()
        if key not in self._h_cache:
            self._h_cache[key] = mf.expand(model, self.dataset.points, self.dataset.schema)
        return self._h_cache[key]

    def a_chol(self, r: np.ndarray, eta: float) -> np.ndarray:
        a = corr_matrix(self.dists, r)
        if eta:
            a = a + eta * self.eye
        return chol_lower(a, "A")

    def score(self, model: mf.MeanFunction, a_chol: np.ndarray) -> float:
        """Model-dependent part of log pi(Y | r, v) under the unit-information prior."""
        post = _posterior_update_chol(self.dataset.y, self.h(model), a_chol, self.prior)
        m = self.h(model).shape[1]
        return float(-(self.k * m / 2.0) * math.log(self.n + 1.0)
                     - ((post.dof_hat + self.k - 1) / 2.0) * post.logdet_s_hat)

    def full_score(self, model: mf.MeanFunction, a_chol: np.ndarray) -> float:
        """score plus the |A| term (needed when comparing different A)."""
        return self.score(model, a_chol) - (self.k / 2.0) * logdet_from_chol(a_chol)


def mc3_run(dataset: Dataset, space: mf.ModelSpace, options: Mc3Options | None = None,
            prior: PriorSpec | None = None) -> ModelPosteriorSummary:
    """Two-phase MCMC over mean functions (and, for GP kinds, correlation parameters)."""
    options = options or Mc3Options()
    prior = prior or PriorSpec("unit-information")
    if prior.variant == "weak":
        raise ValueError("model comparison requires a proper or unit-information prior")
    rng = np.random.default_rng(options.seed)
    n, k = dataset.y.shape
    max_m = space.maximal.m
    if n < max_m + k:
        raise ValueError(
            f"model space needs n >= max m + k (n={n}, max m={max_m}, k={k})"
        )

    gp = options.kind in ("gp", "gp-nugget")
    nugget = options.kind == "gp-nugget"
    p = dataset.schema.p
    engine = _GpScore(dataset, prior)

    nb_cache: dict = {}

    def neighbours_of(model: mf.MeanFunction):
        key = model.key()
        if key not in nb_cache:
            nb_cache[key] = mf.neighbours(model, space)
        return nb_cache[key]

    current = mf.intercept_only(space.schema)
    theta = np.zeros(p + (1 if nugget else 0))  # log r (, log eta)

    def unpack(th):
        r = np.exp(th[:p])
        eta = float(np.exp(th[p])) if nugget else 0.0
        return r, eta

    score_cache: dict = {}

    if gp:
        r_cur, eta_cur = unpack(theta)
        a_chol_cur = engine.a_chol(r_cur, eta_cur)
    else:
        a_chol_cur = np.eye(n)

    def model_score(model: mf.MeanFunction) -> float:
        # lightweight only: A fixed at I, safe to cache per model
        key = model.key()
        if key not in score_cache:
            score_cache[key] = engine.score(model, a_chol_cur)
        return score_cache[key]

    cur_score = (engine.score(current, a_chol_cur) if gp else model_score(current))

    def theta_log_target(th, model, a_chol) -> float:
        r, eta = unpack(th)
        # includes the log-scale Jacobian: sampling theta = log r
        val = engine.full_score(model, a_chol) + _log_r_prior(r) + float(np.sum(th[:p]))
        if nugget:
            val += _log_eta_prior(eta) + float(th[p])
        return val

    burn = int(options.iters * options.burn_frac)
    counts: dict = {}
    models: dict = {}
    term_counts: dict = {}
    retained = 0
    acc1 = prop1 = acc2 = prop2 = 0

    cur_target = theta_log_target(theta, current, a_chol_cur) if gp else None

    for it in range(options.iters):
        # Phase 1: model move, correlation parameters held fixed
        nbs = neighbours_of(current)
        proposal = nbs[rng.integers(len(nbs))]
        prop1 += 1
        try:
            if gp:
                prop_score = engine.score(proposal, a_chol_cur)
            else:
                prop_score = model_score(proposal)
            log_alpha = (prop_score - cur_score
                         + math.log(len(nbs)) - math.log(len(neighbours_of(proposal))))
        except (FactorizationError, ValueError):
            log_alpha = -np.inf
        if np.isfinite(log_alpha) and math.log(rng.random()) < log_alpha:
            current = proposal
            cur_score = prop_score
            acc1 += 1
            if gp:
                cur_target = theta_log_target(theta, current, a_chol_cur)

        # Phase 2: random-walk update of log correlation parameters (GP only)
        if gp:
            prop2 += 1
            theta_prop = theta + options.rw_sigma * rng.standard_normal(theta.shape)
            try:
                r_p, eta_p = unpack(np.clip(theta_prop, -20, 20))
                a_chol_p = engine.a_chol(r_p, eta_p)
                target_p = theta_log_target(theta_prop, current, a_chol_p)
            except (FactorizationError, ValueError):
                target_p = -np.inf
            if np.isfinite(target_p) and math.log(rng.random()) < target_p - cur_target:
                theta = theta_prop
                a_chol_cur = a_chol_p
                cur_target = target_p
                cur_score = engine.score(current, a_chol_cur)
                acc2 += 1

        if it >= burn:
            retained += 1
            mid = model_id(current)
            counts[mid] = counts.get(mid, 0) + 1
            if mid not in models:
                models[mid] = current
            for t in current.terms:
                lbl = _term_label(t)
                term_counts[lbl] = term_counts.get(lbl, 0) + 1

    inclusion = {lbl: c / retained for lbl, c in term_counts.items()}
    modal = _modal_from_counts(counts, models)
    return ModelPosteriorSummary(
        counts=counts, models=models, inclusion=inclusion, modal=modal,
        accept_rate_phase1=acc1 / max(prop1, 1),
        accept_rate_phase2=(acc2 / max(prop2, 1)) if gp else None,
        iters=options.iters, burn=burn, seed=options.seed, kind=options.kind,
        settings={"rw_sigma": options.rw_sigma, "prior": prior.variant},
    )


def _modal_from_counts(counts: dict, models: dict) -> mf.MeanFunction:
    best = None
    for mid, c in counts.items():
        model = models[mid]
        key = (-c, model.m, model.key())
        if best is None or key < best[0]:
            best = (key, model)
    return best[1]


def modal_model(summary: ModelPosteriorSummary) -> mf.MeanFunction:
    """Most-visited model; ties broken by smaller m, then term order."""
    if not summary.counts:
        raise ValueError("empty summary")
    return _modal_from_counts(summary.counts, summary.models)


def enumerate_posterior(dataset: Dataset, space: mf.ModelSpace,
                        cfg: CorrelationConfig | None = None,
                        prior: PriorSpec | None = None) -> dict:
    """Exact posterior model probabilities by exhaustive enumeration (small spaces)."""
    from .kernel import lightweight_config

    cfg = cfg or lightweight_config(dataset.schema)
    prior = prior or PriorSpec("unit-information")
    logs = {}
    for model in space.enumerate():
        logs[model_id(model)] = log_marginal_likelihood(dataset, model, cfg, prior)
    mx = max(logs.values())
    w = {mid: math.exp(v - mx) for mid, v in logs.items()}
    z = sum(w.values())
    return {mid: v / z for mid, v in w.items()}
