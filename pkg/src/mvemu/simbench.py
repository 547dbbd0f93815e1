"""Synthetic multivariate simulators with machine-readable ground truth.

These stand in for an external simulator in tests and end-to-end pipelines:
each is deterministic (same input, same output) and documents its true
structure (active terms, analytic sensitivity indices) alongside the
evaluation rule.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import Dataset
from .kernel import Variable, VariableSchema


@dataclass(frozen=True)
class SyntheticSimulator:
    name: str
    schema: VariableSchema
    output_names: tuple[str, ...]
    rule: Callable[[np.ndarray], np.ndarray]
    ground_truth: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.output_names)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """k-vector output at one internal-coordinate point."""
        pts = self.schema.validate_points(np.atleast_2d(x))
        out = self.rule(pts)
        return out[0] if np.asarray(x).ndim == 1 else out

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        return self.rule(self.schema.validate_points(points))

    def dataset(self, points: np.ndarray) -> Dataset:
        return Dataset(self.schema, list(self.output_names), points,
                       self.evaluate_batch(points))


def _hash_noise(x_row: np.ndarray, k: int, tag: str, scale: float) -> np.ndarray:
    """Deterministic pseudo-noise keyed on the input point."""
    key = hashlib.sha256(tag.encode() + np.round(x_row, 12).tobytes()).digest()
    rng = np.random.default_rng(int.from_bytes(key[:8], "little"))
    return scale * rng.standard_normal(k)


def _linear_truth() -> SyntheticSimulator:
    schema = VariableSchema([
        Variable("x1", "continuous", range=(0.0, 1.0)),
        Variable("x2", "continuous", range=(0.0, 1.0)),
        Variable("x3", "continuous", range=(0.0, 1.0)),
        Variable("c1", "categorical", levels=("a", "b")),
    ])
    # rows of B': one column of coefficients per output, terms (1, x1, x2, c1)
    coef = np.array([
        [1.0, 0.3, -0.5],   # intercept
        [2.0, 1.5, 0.0],    # x1
        [-1.5, 0.0, 2.0],   # x2
        [1.0, -2.0, 1.0],   # c1 corner-point
    ])

    def rule(pts: np.ndarray) -> np.ndarray:
        h = np.column_stack([np.ones(len(pts)), pts[:, 0], pts[:, 1], pts[:, 3]])
        y = h @ coef
        noise = np.stack([_hash_noise(row, coef.shape[1], "linear-truth", 0.05)
                          for row in pts])
        return y + noise

    truth = {
        "true_terms": [
            {"kind": "linear", "vars": ["x1"]},
            {"kind": "linear", "vars": ["x2"]},
            {"kind": "linear", "vars": ["c1"]},
        ],
        "noise_sd": 0.05,
    }
    return SyntheticSimulator("linear-truth", schema, ("y1", "y2", "y3"), rule, truth)


def _smooth_gp() -> SyntheticSimulator:
    schema = VariableSchema([
        Variable("x1", "continuous", range=(0.0, 1.0)),
        Variable("x2", "continuous", range=(0.0, 1.0)),
        Variable("x3", "continuous", range=(0.0, 1.0)),
        Variable("c1", "categorical", levels=("lo", "hi")),
    ])

    def rule(pts: np.ndarray) -> np.ndarray:
        x1, x2, x3, c = pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3]
        cols = [
            np.sin(2 * np.pi * x1) + 0.5 * x2 + 0.3 * c,
            np.cos(np.pi * x2) + (x1 - 0.5) ** 2,
            x1 * x2 + 0.4 * np.sin(3 * x3),
            0.8 * x3**2 + 0.2 * np.cos(2 * np.pi * x1) - 0.5 * c,
            0.5 * (x1 + x2 + x3) + 0.1 * np.sin(4 * x2) * (1 + c),
        ]
        return np.column_stack(cols)

    truth = {"active": ["x1", "x2", "x3", "c1"]}
    return SyntheticSimulator("smooth-gp", schema, tuple(f"y{i}" for i in range(1, 6)),
                              rule, truth)


def _interaction_bench() -> SyntheticSimulator:
    schema = VariableSchema([
        Variable("x1", "continuous", range=(0.0, 1.0)),
        Variable("x2", "continuous", range=(0.0, 1.0)),
    ])

    def rule(pts: np.ndarray) -> np.ndarray:
        x1, x2 = pts[:, 0], pts[:, 1]
        return np.column_stack([(x1 - 0.5) * (x2 - 0.5), x1 + x2])

    # Analytic decomposition for x ~ U[0,1]^2 (derivations in the docstrings
    # of tests that consume them):
    #   y1 = (x1 - 1/2)(x2 - 1/2): V = 1/144, pure interaction, S12 = 1.
    #   y2 = x1 + x2: V = 1/6, additive, S1 = S2 = 1/2.
    truth = {
        "per_output_sobol": {
            "y1": {"S1": 0.0, "S2": 0.0, "S12": 1.0, "V": 1.0 / 144.0},
            "y2": {"S1": 0.5, "S2": 0.5, "S12": 0.0, "V": 1.0 / 6.0},
        },
        "aggregate_sobol": _interaction_bench_aggregate(),
    }
    return SyntheticSimulator("interaction-bench", schema, ("y1", "y2"), rule, truth)


def _interaction_bench_aggregate() -> dict:
    # g(x) = (x1 - .5)(x2 - .5) + x1 + x2 = x1 x2 + .5 x1 + .5 x2 + .25
    # E[g|x1] = x1 E[x2] + .5 x1 + .5 E[x2] + .25 = x1 + .5
    # g0 = 1.25 -> g_1 = x1 - .5, V1 = 1/12 (and symmetrically V2)
    # g_12 = (x1-.5)(x2-.5) -> V12 = 1/144
    v1 = 1.0 / 12.0
    v12 = 1.0 / 144.0
    v = 2 * v1 + v12
    return {"V": v, "S1": v1 / v, "S2": v1 / v, "S12": v12 / v}


def _noise() -> SyntheticSimulator:
    schema = VariableSchema([
        Variable("x1", "continuous", range=(0.0, 1.0)),
        Variable("x2", "continuous", range=(0.0, 1.0)),
    ])
    # output ignores the inputs entirely: a fixed draw from an internal seed
    const = np.random.default_rng(170_530).standard_normal(2)

    def rule(pts: np.ndarray) -> np.ndarray:
        return np.tile(const, (len(pts), 1))

    return SyntheticSimulator("noise", schema, ("y1", "y2"), rule,
                              {"constant": const.tolist()})


_REGISTRY = {
    "linear-truth": _linear_truth,
    "smooth-gp": _smooth_gp,
    "interaction-bench": _interaction_bench,
    "noise": _noise,
}


def simulator_names() -> list[str]:
    return sorted(_REGISTRY)


def get_simulator(name: str) -> SyntheticSimulator:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ValueError(f"unknown simulator {name!r}; known: {simulator_names()}") from None
