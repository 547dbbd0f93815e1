"""Space-filling designs for mixed continuous/categorical inputs.

Sliced Latin hypercube construction by nested stratification: the design is
split equally across the categorical level combinations ("slices"); within
each slice every continuous column is a Latin hypercube on the coarse
n/slices grid, and the union of slices is a Latin hypercube on the fine
n-level grid.  An optional maximin pass improves the minimum pairwise
distance by within-slice value swaps, which preserve both properties.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.spatial.distance import pdist

from .kernel import VariableSchema


@dataclass(frozen=True)
class DesignSpec:
    schema: VariableSchema
    n: int
    criterion: str = "random-lhs"  # "random-lhs" | "maximin-lhs"
    budget: int | None = None  # maximin swap proposals; default 10 n
    seed: int = 0

    def __post_init__(self):
        if self.criterion not in ("random-lhs", "maximin-lhs"):
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.n < 1:
            raise ValueError("n must be positive")


def slice_combinations(schema: VariableSchema) -> list[tuple[int, ...]]:
    """All categorical level-index combinations, in internal variable order."""
    cats = [v for v in schema.internal_variables() if v.kind == "categorical"]
    if not cats:
        return [()]
    return list(product(*[range(len(v.levels)) for v in cats]))


def generate(spec: DesignSpec) -> np.ndarray:
    """n design points (internal coordinates), grouped by slice."""
    schema = spec.schema
    combos = slice_combinations(schema)
    c = len(combos)
    if spec.n % c != 0:
        raise ValueError(
            f"n={spec.n} is not divisible by the {c} categorical level combinations"
        )
    n_slice = spec.n // c
    rng = np.random.default_rng(spec.seed)
    p1 = schema.p1

    # continuous columns: nested stratification
    cont = np.empty((spec.n, p1))
    for j in range(p1):
        # coarse stratum of each within-slice point
        coarse = np.stack([rng.permutation(n_slice) for _ in range(c)])  # c x n_slice
        # fine offset within each coarse stratum, balanced across slices
        fine = np.empty((c, n_slice), dtype=int)
        for v in range(n_slice):
            offsets = rng.permutation(c)
            for t in range(c):
                pos = int(np.where(coarse[t] == v)[0][0])
                fine[t, pos] = coarse[t, pos] * c + offsets[t]
        u = rng.uniform(0.0, 1.0, size=(c, n_slice))
        cont[:, j] = ((fine + u) / spec.n).ravel()

    cat = np.empty((spec.n, schema.p - p1))
    for t, combo in enumerate(combos):
        cat[t * n_slice:(t + 1) * n_slice] = np.asarray(combo, dtype=float)

    points = np.column_stack([cont, cat]) if schema.p > p1 else cont
    if spec.criterion == "maximin-lhs" and p1 > 0 and spec.n > 1:
        points = _maximin_improve(points, schema, n_slice, rng,
                                  spec.budget if spec.budget is not None else 10 * spec.n)
    return points


def _min_distance(points: np.ndarray, p1: int) -> float:
    return float(np.min(pdist(points[:, :p1])))


def _maximin_improve(points: np.ndarray, schema: VariableSchema, n_slice: int,
                     rng: np.random.Generator, budget: int) -> np.ndarray:
    """Within-slice column-value swaps accepted when they raise the minimum
    pairwise distance over the continuous coordinates."""
    p1 = schema.p1
    c = points.shape[0] // n_slice
    best = points.copy()
    best_d = _min_distance(best, p1)
    for _ in range(budget):
        j = int(rng.integers(p1))
        t = int(rng.integers(c))
        i1, i2 = rng.choice(n_slice, size=2, replace=False) + t * n_slice
        cand = best.copy()
        cand[[i1, i2], j] = cand[[i2, i1], j]
        d = _min_distance(cand, p1)
        if d > best_d:
            best, best_d = cand, d
    return best
