"""Mean-function term algebra: term sets under marginality, model-matrix
expansion and single-term neighbourhood moves for model search.

Marginality: a quadratic or interaction term may only be present when all of
its parent linear terms are; the intercept is always present.  Categorical
variables are corner-point coded {0, 1} (two-level factors only).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .kernel import VariableSchema


@dataclass(frozen=True)
class Term:
    kind: str  # "intercept" | "linear" | "quadratic" | "interaction"
    vars: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind == "intercept":
            if self.vars:
                raise ValueError("intercept takes no variables")
        elif self.kind in ("linear", "quadratic"):
            if len(self.vars) != 1:
                raise ValueError(f"{self.kind} term takes exactly one variable")
        elif self.kind == "interaction":
            if len(self.vars) != 2 or self.vars[0] == self.vars[1]:
                raise ValueError("interaction takes two distinct variables")
        else:
            raise ValueError(f"unknown term kind {self.kind!r}")
        object.__setattr__(self, "vars", tuple(self.vars))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "vars": list(self.vars)}

    @classmethod
    def from_dict(cls, d: dict) -> "Term":
        return cls(kind=d["kind"], vars=tuple(d.get("vars", ())))


INTERCEPT = Term("intercept")


def _term_sort_key(term: Term, schema: VariableSchema):
    order = {name: i for i, name in enumerate(schema.names)}
    kind_rank = {"intercept": 0, "linear": 1, "quadratic": 2, "interaction": 3}
    idx = tuple(sorted(order[v] for v in term.vars))
    return (kind_rank[term.kind], idx)


class MeanFunction:
    """An ordered, marginality-respecting set of polynomial terms.

    Column order is fixed: intercept, linear terms in schema variable order,
    quadratics in variable order, interactions lexicographic by variable
    index pair.  Serialized models therefore round-trip exactly.
    """

    def __init__(self, terms, schema: VariableSchema):
        term_set = set(terms) | {INTERCEPT}
        self.schema = schema
        names = set(schema.names)
        by_name = {v.name: v for v in schema.variables}
        for t in term_set:
            for v in t.vars:
                if v not in names:
                    raise ValueError(f"term references unknown variable {v!r}")
            if t.kind == "quadratic" and by_name[t.vars[0]].kind != "continuous":
                raise ValueError(f"quadratic term on non-continuous variable {t.vars[0]!r}")
        # canonicalise interaction variable order to schema order
        canon = set()
        order = {name: i for i, name in enumerate(schema.names)}
        for t in term_set:
            if t.kind == "interaction":
                a, b = sorted(t.vars, key=order.get)
                canon.add(Term("interaction", (a, b)))
            else:
                canon.add(t)
        if not _is_marginal(canon):
            raise ValueError("term set violates marginality")
        self.terms = tuple(sorted(canon, key=lambda t: _term_sort_key(t, schema)))

    @property
    def m(self) -> int:
        return len(self.terms)

    def key(self) -> tuple:
        return tuple((t.kind, t.vars) for t in self.terms)

    def __eq__(self, other):
        return isinstance(other, MeanFunction) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        names = []
        for t in self.terms:
            if t.kind == "intercept":
                names.append("1")
            elif t.kind == "linear":
                names.append(t.vars[0])
            elif t.kind == "quadratic":
                names.append(f"{t.vars[0]}^2")
            else:
                names.append(f"{t.vars[0]}*{t.vars[1]}")
        return "MeanFunction(" + " + ".join(names) + ")"

    def to_list(self) -> list[dict]:
        return [t.to_dict() for t in self.terms]

    @classmethod
    def from_list(cls, items: list[dict], schema: VariableSchema) -> "MeanFunction":
        return cls([Term.from_dict(d) for d in items], schema)


def _is_marginal(terms: set[Term]) -> bool:
    linears = {t.vars[0] for t in terms if t.kind == "linear"}
    for t in terms:
        if t.kind == "quadratic" and t.vars[0] not in linears:
            return False
        if t.kind == "interaction" and not set(t.vars) <= linears:
            return False
    return True


def intercept_only(schema: VariableSchema) -> MeanFunction:
    return MeanFunction([INTERCEPT], schema)


def linear_model(schema: VariableSchema) -> MeanFunction:
    return MeanFunction([Term("linear", (v.name,)) for v in schema.variables], schema)


def maximal_model(schema: VariableSchema) -> MeanFunction:
    """Intercept, all linear, all quadratic (continuous) and all two-way interactions."""
    terms = [Term("linear", (v.name,)) for v in schema.variables]
    terms += [Term("quadratic", (v.name,)) for v in schema.variables if v.kind == "continuous"]
    terms += [Term("interaction", (a.name, b.name))
              for a, b in combinations(schema.variables, 2)]
    return MeanFunction(terms, schema)


class ModelSpace:
    """All marginality-respecting sub-models of a maximal mean function."""

    def __init__(self, schema: VariableSchema, maximal: MeanFunction | None = None):
        self.schema = schema
        self.maximal = maximal if maximal is not None else maximal_model(schema)

    def contains(self, meanfn: MeanFunction) -> bool:
        return set(meanfn.terms) <= set(self.maximal.terms)

    def enumerate(self, limit: int = 100_000) -> list[MeanFunction]:
        """Exhaustive model list via BFS over single-term additions."""
        start = intercept_only(self.schema)
        seen = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for mf in frontier:
                for nb in neighbours(mf, self):
                    if nb not in seen:
                        if len(seen) >= limit:
                            raise RuntimeError(f"model space larger than limit {limit}")
                        seen.add(nb)
                        nxt.append(nb)
            frontier = nxt
        return sorted(seen, key=lambda m: (m.m, m.key()))


def _column(term: Term, points: np.ndarray, schema: VariableSchema) -> np.ndarray:
    pos = {name: j for j, name in
           enumerate(schema.variables[i].name for i in schema.internal_order)}
    by_name = {v.name: v for v in schema.variables}

    def coding(name: str) -> np.ndarray:
        var = by_name[name]
        col = points[:, pos[name]]
        if var.kind == "categorical" and len(var.levels) != 2:
            raise ValueError(
                f"corner-point coding supports two-level factors only; "
                f"{name!r} has {len(var.levels)} levels"
            )
        return col

    if term.kind == "intercept":
        return np.ones(points.shape[0])
    if term.kind == "linear":
        return coding(term.vars[0])
    if term.kind == "quadratic":
        return coding(term.vars[0]) ** 2
    return coding(term.vars[0]) * coding(term.vars[1])


def expand(meanfn: MeanFunction, points: np.ndarray, schema: VariableSchema) -> np.ndarray:
    """Model matrix H (n x m) over internal-coordinate points."""
    points = schema.validate_points(points)
    return np.column_stack([_column(t, points, schema) for t in meanfn.terms])


def neighbours(meanfn: MeanFunction, space: ModelSpace) -> list[MeanFunction]:
    """All models one legal term addition or removal away, in deterministic order."""
    if not space.contains(meanfn):
        raise ValueError("mean function is not in the model space")
    current = set(meanfn.terms)
    linears_in_use: dict[str, int] = {}
    for t in current:
        if t.kind in ("quadratic", "interaction"):
            for v in t.vars:
                linears_in_use[v] = linears_in_use.get(v, 0) + 1
    out = []
    for t in space.maximal.terms:
        if t.kind == "intercept" or t in current:
            continue
        candidate = current | {t}
        if _is_marginal(candidate):
            out.append(MeanFunction(candidate, space.schema))
    for t in meanfn.terms:
        if t.kind == "intercept":
            continue
        if t.kind == "linear" and linears_in_use.get(t.vars[0], 0) > 0:
            continue  # removal would orphan a higher-order term
        out.append(MeanFunction(current - {t}, space.schema))
    return out
