"""Reference-distribution variable selection.

Each repetition appends freshly generated inert input variables (one
continuous, one categorical) to the design, samples the marginal posterior of
the correlation parameters of an intercept-mean GP with nugget by random-walk
Metropolis, and records the posterior medians of the inert parameters.  Real
variables are classified as important when their posterior median (pooled
over all repetitions) exceeds a quantile of the matching null sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import meanfn as mf
from .data import Dataset
from .emulator import MarginalPosterior, PriorSpec, _log_eta_prior, _log_r_prior
from .kernel import Variable, VariableSchema
from .linalg import FactorizationError


@dataclass(frozen=True)
class RdvsOptions:
    b_rep: int = 100
    iters: int = 2000  # per-repetition MCMC length; first half is burn-in
    seed: int = 0
    rw_sigma: float = 0.3
    null_quantile: float = 0.95
    thin: int = 2


@dataclass
class RdvsResult:
    medians: dict  # variable name -> posterior median of log r (union of samples)
    null_continuous: np.ndarray  # B_rep posterior medians of log r*_1
    null_categorical: np.ndarray  # B_rep posterior medians of log r*_2
    important: dict  # variable name -> bool
    null_quantile: float
    b_rep: int
    iters: int
    seed: int
    warnings: list = field(default_factory=list)

    def thresholds(self) -> dict:
        out = {}
        if self.null_continuous.size:
            out["continuous"] = float(np.quantile(self.null_continuous, self.null_quantile))
        if self.null_categorical.size:
            out["categorical"] = float(np.quantile(self.null_categorical, self.null_quantile))
        return out

    def to_dict(self) -> dict:
        return {
            "medians": {k: float(v) for k, v in self.medians.items()},
            "null_continuous": self.null_continuous.tolist(),
            "null_categorical": self.null_categorical.tolist(),
            "important": {k: bool(v) for k, v in self.important.items()},
            "null_quantile": self.null_quantile,
            "thresholds": self.thresholds(),
            "b_rep": self.b_rep,
            "iters": self.iters,
            "seed": self.seed,
            "warnings": list(self.warnings),
        }


def _augmented(dataset: Dataset, rng: np.random.Generator,
               add_cont: bool, add_cat: bool) -> Dataset:
    """Dataset with fresh inert columns appended (in internal coordinates)."""
    n = dataset.n
    schema = dataset.schema
    vars_new = list(schema.variables)
    cols = []
    if add_cont:
        vars_new.append(Variable("__inert_cont", "continuous", range=(0.0, 1.0)))
        cols.append(rng.uniform(0.0, 1.0, size=n))
    if add_cat:
        vars_new.append(Variable("__inert_cat", "categorical", levels=("0", "1")))
        cols.append(rng.integers(0, 2, size=n).astype(float))
    aug_schema = VariableSchema(vars_new)
    # internal layout: continuous block then categorical block
    p1 = schema.p1
    cont = dataset.points[:, :p1]
    cat = dataset.points[:, p1:]
    blocks = [cont]
    if add_cont:
        blocks.append(cols[0][:, None])
    blocks.append(cat)
    if add_cat:
        blocks.append(cols[-1][:, None])
    pts = np.column_stack(blocks)
    return Dataset(aug_schema, dataset.output_names, pts, dataset.y)


def _mcmc_log_r_samples(aug: Dataset, options: RdvsOptions,
                        rng: np.random.Generator, warnings: list) -> np.ndarray:
    """Retained samples of log r (shape draws x p_aug) from the augmented posterior."""
    mp = MarginalPosterior(aug, mf.intercept_only(aug.schema), PriorSpec("weak"),
                           nugget=True)
    p = aug.schema.p
    theta = np.zeros(p + 1)  # log r, log eta

    def target(th):
        th = np.clip(th, -20, 20)
        r = np.exp(th[:p])
        eta = float(np.exp(th[p]))
        # log-scale Jacobian terms for r and eta
        return mp(r, eta) + float(np.sum(th))

    cur = target(theta)
    burn = options.iters // 2
    kept = []
    accepted = 0
    for it in range(options.iters):
        prop = theta + options.rw_sigma * rng.standard_normal(theta.shape)
        try:
            val = target(prop)
        except (FactorizationError, ValueError):
            val = -np.inf
        if np.isfinite(val) and np.log(rng.random()) < val - cur:
            theta, cur = prop, val
            accepted += 1
        if it >= burn and (it - burn) % options.thin == 0:
            kept.append(theta[:p].copy())
    rate = accepted / options.iters
    if rate < 0.01 or rate > 0.90:
        warnings.append(f"acceptance rate {rate:.3f} outside [0.01, 0.90]")
    return np.asarray(kept)


def rdvs_run(dataset: Dataset, options: RdvsOptions | None = None) -> RdvsResult:
    """Screen variables against inert-variable null distributions."""
    options = options or RdvsOptions()
    schema = dataset.schema
    has_cont = schema.p1 > 0
    has_cat = schema.p1 < schema.p
    if not (has_cont or has_cat):
        raise ValueError("dataset has no variables to screen")

    ss = np.random.SeedSequence(options.seed)
    streams = [np.random.default_rng(s) for s in ss.spawn(options.b_rep)]
    warnings: list = []

    null_cont = []
    null_cat = []
    union_samples = [[] for _ in range(schema.p)]  # per real variable, internal order

    for rng in streams:
        aug = _augmented(dataset, rng, add_cont=has_cont, add_cat=has_cat)
        samples = _mcmc_log_r_samples(aug, options, rng, warnings)
        # augmented internal order: real continuous, inert cont, real categorical, inert cat
        p1 = schema.p1
        idx_real = list(range(p1)) + list(range(p1 + (1 if has_cont else 0),
                                                 p1 + (1 if has_cont else 0) + (schema.p - p1)))
        for j_real, j_aug in enumerate(idx_real):
            union_samples[j_real].append(samples[:, j_aug])
        if has_cont:
            null_cont.append(float(np.median(samples[:, p1])))
        if has_cat:
            null_cat.append(float(np.median(samples[:, -1])))

    null_cont = np.asarray(null_cont)
    null_cat = np.asarray(null_cat)
    thr_cont = float(np.quantile(null_cont, options.null_quantile)) if has_cont else np.inf
    thr_cat = float(np.quantile(null_cat, options.null_quantile)) if has_cat else np.inf

    medians = {}
    important = {}
    internal_vars = schema.internal_variables()
    for j, var in enumerate(internal_vars):
        med = float(np.median(np.concatenate(union_samples[j])))
        medians[var.name] = med
        thr = thr_cont if var.kind == "continuous" else thr_cat
        important[var.name] = med > thr

    # report in user variable order
    medians = {v.name: medians[v.name] for v in schema.variables}
    important = {v.name: important[v.name] for v in schema.variables}
    return RdvsResult(medians=medians, null_continuous=null_cont,
                      null_categorical=null_cat, important=important,
                      null_quantile=options.null_quantile, b_rep=options.b_rep,
                      iters=options.iters, seed=options.seed, warnings=warnings)
