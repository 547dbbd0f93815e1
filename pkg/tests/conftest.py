import numpy as np
import pytest

from mvemu.data import Dataset
from mvemu.kernel import Variable, VariableSchema


def random_spd(rng, n, scale=1.0):
    a = rng.standard_normal((n, n + 2))
    return scale * (a @ a.T / (n + 2) + 0.5 * np.eye(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20260824)


@pytest.fixture
def mixed_schema():
    return VariableSchema([
        Variable("x1", "continuous", range=(0.0, 1.0)),
        Variable("x2", "continuous", range=(-2.0, 3.0)),
        Variable("c1", "categorical", levels=("a", "b")),
    ])


@pytest.fixture
def cont_schema():
    return VariableSchema([
        Variable("x1", "continuous", range=(0.0, 1.0)),
        Variable("x2", "continuous", range=(0.0, 1.0)),
    ])


def make_dataset(schema, n, k, seed=0, fn=None):
    """Random internal-coordinate dataset with a smooth default response."""
    rng = np.random.default_rng(seed)
    p1 = schema.p1
    pts = np.empty((n, schema.p))
    pts[:, :p1] = rng.uniform(size=(n, p1))
    for j, var in enumerate(schema.internal_variables()[p1:]):
        pts[:, p1 + j] = rng.integers(0, len(var.levels), size=n)
    if fn is None:
        def fn(x):
            base = np.sin(2 * x[:, 0]) + x.sum(axis=1)
            return np.column_stack([base * (s + 1) + 0.1 * s for s in range(k)])
    y = fn(pts)
    names = [f"y{s + 1}" for s in range(k)]
    return Dataset(schema, names, pts, y)
