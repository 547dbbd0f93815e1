"""Correlation structure over mixed continuous/categorical inputs.

Continuous variables contribute squared-distance terms with fixed exponent 2;
categorical variables contribute mismatch-indicator terms, exchangeable in
the levels.  The nugget is applied only on the diagonals of the training and
prediction row-scale matrices, never to cross-correlations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import chol_lower


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "continuous" | "categorical"
    range: tuple[float, float] | None = None
    levels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind == "continuous":
            if self.range is None or len(self.range) != 2:
                raise ValueError(f"continuous variable {self.name!r} needs a [lo, hi] range")
            lo, hi = self.range
            if not lo < hi:
                raise ValueError(f"variable {self.name!r}: range must have lo < hi")
            object.__setattr__(self, "range", (float(lo), float(hi)))
        elif self.kind == "categorical":
            if self.levels is None or len(self.levels) < 2:
                raise ValueError(f"categorical variable {self.name!r} needs >= 2 levels")
            object.__setattr__(self, "levels", tuple(str(v) for v in self.levels))
        else:
            raise ValueError(f"unknown variable kind {self.kind!r}")


class VariableSchema:
    """Ordered variable descriptors with an internal continuous-first ordering.

    User order is preserved at all I/O boundaries; internally, points are
    stored with the p1 continuous variables first (scaled to [0, 1]) and
    categorical variables after (encoded as level indices).
    """

    def __init__(self, variables: list[Variable]):
        if not variables:
            raise ValueError("schema needs at least one variable")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names in schema")
        self.variables = list(variables)
        cont = [i for i, v in enumerate(variables) if v.kind == "continuous"]
        cat = [i for i, v in enumerate(variables) if v.kind == "categorical"]
        # internal index j holds user variable internal_order[j]
        self.internal_order = cont + cat
        self.p = len(variables)
        self.p1 = len(cont)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def internal_variables(self) -> list[Variable]:
        return [self.variables[i] for i in self.internal_order]

    def encode(self, raw_rows: list[list]) -> np.ndarray:
        """Raw user-order rows -> internal array (continuous scaled to [0,1])."""
        out = np.empty((len(raw_rows), self.p), dtype=float)
        for r, row in enumerate(raw_rows):
            if len(row) != self.p:
                raise ValueError(f"row {r}: expected {self.p} values, got {len(row)}")
            for j, ui in enumerate(self.internal_order):
                var = self.variables[ui]
                cell = row[ui]
                if var.kind == "continuous":
                    x = float(cell)
                    lo, hi = var.range
                    if not (lo - 1e-9 * (hi - lo) <= x <= hi + 1e-9 * (hi - lo)):
                        raise ValueError(
                            f"row {r}, variable {var.name!r}: value {x} outside range [{lo}, {hi}]"
                        )
                    out[r, j] = (x - lo) / (hi - lo)
                else:
                    try:
                        out[r, j] = var.levels.index(str(cell))
                    except ValueError:
                        raise ValueError(
                            f"row {r}, variable {var.name!r}: unknown level {cell!r}"
                        ) from None
        return out

    def decode(self, points: np.ndarray) -> list[list]:
        """Internal array -> raw user-order rows."""
        rows = []
        for pt in np.atleast_2d(points):
            row: list = [None] * self.p
            for j, ui in enumerate(self.internal_order):
                var = self.variables[ui]
                if var.kind == "continuous":
                    lo, hi = var.range
                    row[ui] = lo + float(pt[j]) * (hi - lo)
                else:
                    row[ui] = var.levels[int(round(pt[j]))]
            return_row = row
            rows.append(return_row)
        return rows

    def validate_points(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.p:
            raise ValueError(
                f"points have {points.shape[1]} coordinates, schema has p={self.p}"
            )
        return points

    def to_dict(self) -> dict:
        out = []
        for v in self.variables:
            if v.kind == "continuous":
                out.append({"name": v.name, "kind": v.kind, "range": list(v.range)})
            else:
                out.append({"name": v.name, "kind": v.kind, "levels": list(v.levels)})
        return {"variables": out}

    @classmethod
    def from_dict(cls, d: dict) -> "VariableSchema":
        vs = []
        for item in d["variables"]:
            vs.append(
                Variable(
                    name=item["name"],
                    kind=item["kind"],
                    range=tuple(item["range"]) if item.get("range") else None,
                    levels=tuple(item["levels"]) if item.get("levels") else None,
                )
            )
        return cls(vs)

    def __eq__(self, other):
        return isinstance(other, VariableSchema) and self.to_dict() == other.to_dict()


@dataclass(frozen=True)
class CorrelationConfig:
    """Correlation parameters r (internal variable order), nugget eta.

    ``lightweight=True`` selects the independent-runs special case in which
    the training row scale is the identity and all cross-correlations with
    new points are exactly zero; r must then be empty.
    """

    r: np.ndarray = field(default_factory=lambda: np.empty(0))
    eta: float = 0.0
    lightweight: bool = False
    power: float = 2.0  # fixed; exponents are not estimated

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).ravel()
        if np.any(r < 0):
            raise ValueError("correlation parameters must be non-negative")
        if self.eta < 0:
            raise ValueError("nugget must be non-negative")
        if self.lightweight and r.size:
            raise ValueError("lightweight mode has no correlation parameters")
        object.__setattr__(self, "r", r)

    def check(self, schema: VariableSchema) -> None:
        if not self.lightweight and self.r.size != schema.p:
            raise ValueError(
                f"config has {self.r.size} correlation parameters, schema has p={schema.p}"
            )

    def to_dict(self) -> dict:
        return {
            "r": [float(v) for v in self.r],
            "eta": float(self.eta),
            "lightweight": bool(self.lightweight),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorrelationConfig":
        return cls(r=np.asarray(d.get("r", []), dtype=float), eta=float(d.get("eta", 0.0)),
                   lightweight=bool(d.get("lightweight", False)))


def lightweight_config(schema: VariableSchema) -> CorrelationConfig:
    """Configuration making A = I and T = 0 exactly (an explicit mode)."""
    return CorrelationConfig(r=np.empty(0), lightweight=True)


def distance_tensor(points: np.ndarray, new_points: np.ndarray, schema: VariableSchema) -> np.ndarray:
    """Per-variable distance stack D with shape (p, n, n0).

    D[l] holds squared differences for continuous variables and mismatch
    indicators for categorical ones, in internal variable order; the
    correlation matrix is exp(-sum_l r_l D[l]).
    """
    points = schema.validate_points(points)
    new_points = schema.validate_points(new_points)
    p1 = schema.p1
    d = np.empty((schema.p, points.shape[0], new_points.shape[0]))
    diff = points[:, None, :p1] - new_points[None, :, :p1]
    d[:p1] = np.moveaxis(diff**2, 2, 0)
    neq = points[:, None, p1:] != new_points[None, :, p1:]
    d[p1:] = np.moveaxis(neq.astype(float), 2, 0)
    return d


def correlation(x1, x2, cfg: CorrelationConfig, schema: VariableSchema) -> float:
    """Correlation between two internal-coordinate points, in (0, 1]."""
    cfg.check(schema)
    if cfg.lightweight:
        raise ValueError("pointwise correlation is undefined in lightweight mode")
    d = distance_tensor(np.atleast_2d(x1), np.atleast_2d(x2), schema)[:, 0, 0]
    return float(np.exp(-np.dot(cfg.r, d)))


def corr_matrix(dists: np.ndarray, r: np.ndarray) -> np.ndarray:
    """exp(-sum_l r_l D[l]) for a precomputed distance stack."""
    return np.exp(-np.tensordot(r, dists, axes=1))


def build_row_scale(points: np.ndarray, cfg: CorrelationConfig, schema: VariableSchema) -> np.ndarray:
    """Training row scale A: correlations plus the nugget on the diagonal."""
    cfg.check(schema)
    points = schema.validate_points(points)
    n = points.shape[0]
    if cfg.lightweight:
        return np.eye(n)
    a = corr_matrix(distance_tensor(points, points, schema), cfg.r)
    if cfg.eta:
        a = a + cfg.eta * np.eye(n)
    return 0.5 * (a + a.T)


def build_cross(points: np.ndarray, new_points: np.ndarray, cfg: CorrelationConfig,
                schema: VariableSchema) -> np.ndarray:
    """Cross-correlation T (n x n0) between training and prediction points; no nugget."""
    cfg.check(schema)
    points = schema.validate_points(points)
    new_points = schema.validate_points(new_points)
    if cfg.lightweight:
        return np.zeros((points.shape[0], new_points.shape[0]))
    return corr_matrix(distance_tensor(points, new_points, schema), cfg.r)


def row_scale_chol(points: np.ndarray, cfg: CorrelationConfig, schema: VariableSchema) -> np.ndarray:
    """Lower Cholesky factor of A, with the shared jitter escalation policy."""
    return chol_lower(build_row_scale(points, cfg, schema), "A")
