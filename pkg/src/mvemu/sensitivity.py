"""Variance-based sensitivity analysis of an aggregate emulator output.

The quantity analysed is the row-sum of the predictive mean surface (the
plug-in surface); an optional posterior-averaged mode repeats the estimators
over surfaces drawn from the coefficient posterior.  Conditional-variance
terms are estimated by pick-freeze Monte Carlo with common random numbers;
standard errors come from 20 batch means.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .emulator import FittedEmulator
from .kernel import VariableSchema

_N_BATCHES = 20


@dataclass(frozen=True)
class InputDistribution:
    """Independent inputs: uniform over each continuous range; per-level
    probabilities for categoricals (default uniform over the levels)."""

    schema: VariableSchema
    level_probs: dict = field(default_factory=dict)  # name -> list of probabilities

    def __post_init__(self):
        for name, probs in self.level_probs.items():
            var = next((v for v in self.schema.variables if v.name == name), None)
            if var is None or var.kind != "categorical":
                raise ValueError(f"level probabilities given for non-categorical {name!r}")
            if len(probs) != len(var.levels) or abs(sum(probs) - 1.0) > 1e-9:
                raise ValueError(f"probabilities for {name!r} must sum to 1 over its levels")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n points in internal coordinates."""
        out = np.empty((n, self.schema.p))
        for j, var in enumerate(self.schema.internal_variables()):
            if var.kind == "continuous":
                out[:, j] = rng.uniform(0.0, 1.0, size=n)
            else:
                probs = self.level_probs.get(var.name)
                levels = len(var.levels)
                if probs is None:
                    probs = [1.0 / levels] * levels
                out[:, j] = rng.choice(levels, size=n, p=probs).astype(float)
        return out

    def internal_index(self, name: str) -> int:
        for j, var in enumerate(self.schema.internal_variables()):
            if var.name == name:
                return j
        raise ValueError(f"unknown variable {name!r}")


def aggregate_output(fit: FittedEmulator, x, surface=None) -> float:
    """Posterior predictive mean of the output row-sum at one point."""
    pts = fit.schema.validate_points(np.atleast_2d(x))
    g = surface if surface is not None else plugin_surface(fit)
    return float(g(pts)[0])


def plugin_surface(fit: FittedEmulator):
    """Scalar surface: row-sum of the plug-in predictive mean."""

    def g(points: np.ndarray) -> np.ndarray:
        return fit.predict_mean(points).sum(axis=1)

    return g


def sampled_surfaces(fit: FittedEmulator, n_outer: int, rng: np.random.Generator):
    """Row-sum surfaces conditional on coefficient draws from the posterior."""
    out = []
    for _ in range(n_outer):
        b = fit.sample_coefficients(rng)
        cond = fit.conditional_mean_surface(b)
        out.append(lambda pts, cond=cond: cond(pts).sum(axis=1))
    return out


def main_effect(fit: FittedEmulator, dist: InputDistribution, var: str, grid,
                n_mc: int = 10_000, seed: int = 0, surface=None) -> np.ndarray:
    """Main-effect curve: E[g(x) | x_var = t] - E[g(x)] over the grid.

    ``grid`` holds raw values for continuous variables or level names for
    categoricals; returns the curve values in grid order.
    """
    g = surface if surface is not None else plugin_surface(fit)
    rng = np.random.default_rng(seed)
    base = dist.sample(rng, n_mc)
    g0 = float(np.mean(g(base)))
    j = dist.internal_index(var)
    vals = []
    for t in _encode_grid(fit.schema, var, grid):
        pts = base.copy()
        pts[:, j] = t
        vals.append(float(np.mean(g(pts))) - g0)
    return np.asarray(vals)


def _encode_grid(schema: VariableSchema, var: str, grid) -> list[float]:
    v = next(v for v in schema.variables if v.name == var)
    out = []
    for t in grid:
        if v.kind == "continuous":
            lo, hi = v.range
            x = float(t)
            if not lo <= x <= hi:
                raise ValueError(f"grid value {x} outside range of {var!r}")
            out.append((x - lo) / (hi - lo))
        else:
            out.append(float(v.levels.index(str(t))))
    return out


def default_grid(schema: VariableSchema, var: str, points: int = 21) -> list:
    v = next(v for v in schema.variables if v.name == var)
    if v.kind == "continuous":
        lo, hi = v.range
        return list(np.linspace(lo, hi, points))
    return list(v.levels)


def conditional_main_effects(fit: FittedEmulator, dist: InputDistribution, var: str,
                             cond_var: str, levels, grid, n_mc: int = 10_000,
                             seed: int = 0, surface=None) -> dict:
    """E[g(x) | x_var = t, x_cond = l] - g0 for each conditioning level l."""
    g = surface if surface is not None else plugin_surface(fit)
    rng = np.random.default_rng(seed)
    base = dist.sample(rng, n_mc)
    g0 = float(np.mean(g(base)))
    ji = dist.internal_index(var)
    jj = dist.internal_index(cond_var)
    grid_t = _encode_grid(fit.schema, var, grid)
    out = {}
    for level, lv in zip(levels, _encode_grid(fit.schema, cond_var, levels)):
        curve = []
        for t in grid_t:
            pts = base.copy()
            pts[:, ji] = t
            pts[:, jj] = lv
            curve.append(float(np.mean(g(pts))) - g0)
        out[level] = np.asarray(curve)
    return out


@dataclass
class SensitivityResult:
    total_variance: float
    first_order: dict  # name -> (index, se)
    second_order: dict  # (name, name) -> (index, se)
    n_mc: int
    seed: int
    mode: str
    n_outer: int | None = None

    def to_dict(self) -> dict:
        return {
            "total_variance": self.total_variance,
            "first_order": {n: {"index": v[0], "se": v[1]}
                            for n, v in self.first_order.items()},
            "second_order": {f"{a}:{b}": {"index": v[0], "se": v[1]}
                             for (a, b), v in self.second_order.items()},
            "n_mc": self.n_mc,
            "seed": self.seed,
            "mode": self.mode,
            "n_outer": self.n_outer,
        }


@dataclass(frozen=True)
class SobolOptions:
    n_mc: int = 100_000
    seed: int = 0
    mode: str = "plugin"  # "plugin" | "posterior-averaged"
    n_outer: int = 50
    pairs: list | None = None  # list of (name, name); default all pairs

    def __post_init__(self):
        if self.n_mc < 1000:
            raise ValueError("n_mc must be at least 1000")
        if self.mode not in ("plugin", "posterior-averaged"):
            raise ValueError(f"unknown mode {self.mode!r}")


def _batched(values: np.ndarray) -> tuple[float, float]:
    """(mean, batch-means standard error)."""
    batches = np.array_split(values, _N_BATCHES)
    means = np.array([b.mean() for b in batches])
    return float(values.mean()), float(means.std(ddof=1) / np.sqrt(len(means)))


def _pick_freeze(g, a_pts, b_pts, var_idx: list[int], pair_idx: list[tuple[int, int]]):
    """Raw pick-freeze variance terms for one surface.

    Returns (V, V_se, per-variable arrays, per-pair closed arrays); the
    per-sample products are kept so batch standard errors can be formed.
    """
    ga = g(a_pts)
    gb = g(b_pts)
    both = np.concatenate([ga, gb])
    v = float(both.var(ddof=1))
    g_ab = {}
    vi_terms = {}
    for j in var_idx:
        pts = a_pts.copy()
        pts[:, j] = b_pts[:, j]
        gj = g(pts)
        g_ab[j] = gj
        vi_terms[j] = gb * (gj - ga)
    vij_terms = {}
    for i, j in pair_idx:
        pts = a_pts.copy()
        pts[:, i] = b_pts[:, i]
        pts[:, j] = b_pts[:, j]
        gij = g(pts)
        vij_terms[(i, j)] = gb * (gij - ga)
    return v, vi_terms, vij_terms


def sobol_indices(fit: FittedEmulator, dist: InputDistribution,
                  options: SobolOptions | None = None) -> SensitivityResult:
    """First- and second-order sensitivity indices of the aggregate output."""
    options = options or SobolOptions()
    schema = fit.schema
    names = schema.names
    var_idx = [dist.internal_index(n) for n in names]
    idx_to_name = dict(zip(var_idx, names))
    if options.pairs is None:
        pairs = list(combinations(names, 2))
    else:
        pairs = [tuple(p) for p in options.pairs]
    pair_idx = [(dist.internal_index(a), dist.internal_index(b)) for a, b in pairs]

    rng = np.random.default_rng(options.seed)
    a_pts = dist.sample(rng, options.n_mc)
    b_pts = dist.sample(rng, options.n_mc)

    if options.mode == "plugin":
        surfaces = [plugin_surface(fit)]
    else:
        surfaces = sampled_surfaces(fit, options.n_outer, rng)

    # accumulate per-sample terms averaged over surfaces (approximates the
    # posterior expectation of each variance component)
    v_total = 0.0
    vi_acc = {j: np.zeros(options.n_mc) for j in var_idx}
    vij_acc = {ij: np.zeros(options.n_mc) for ij in pair_idx}
    for g in surfaces:
        v, vi_terms, vij_terms = _pick_freeze(g, a_pts, b_pts, var_idx, pair_idx)
        v_total += v / len(surfaces)
        for j in var_idx:
            vi_acc[j] += vi_terms[j] / len(surfaces)
        for ij in pair_idx:
            vij_acc[ij] += vij_terms[ij] / len(surfaces)

    if not np.isfinite(v_total) or v_total <= 0.0:
        raise ValueError("degenerate surface: total variance estimate is not positive")

    first = {}
    vi_means = {}
    for j in var_idx:
        mean, se = _batched(vi_acc[j])
        vi_means[j] = mean
        first[idx_to_name[j]] = (mean / v_total, se / v_total)
    second = {}
    for (i, j), name_pair in zip(pair_idx, pairs):
        mean, se = _batched(vij_acc[(i, j)])
        vij = mean - vi_means[i] - vi_means[j]
        second[name_pair] = (vij / v_total, se / v_total)

    return SensitivityResult(total_variance=v_total, first_order=first,
                             second_order=second, n_mc=options.n_mc,
                             seed=options.seed, mode=options.mode,
                             n_outer=options.n_outer if options.mode != "plugin" else None)
