import numpy as np
import pytest

from mvemu import meanfn as mf
from mvemu.kernel import Variable, VariableSchema


class TestTerm:
    def test_intercept_no_vars(self):
        with pytest.raises(ValueError):
            mf.Term("intercept", ("x",))

    def test_interaction_distinct(self):
        with pytest.raises(ValueError):
            mf.Term("interaction", ("x", "x"))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            mf.Term("cubic", ("x",))


class TestMeanFunction:
    def test_intercept_always_present(self, mixed_schema):
        m = mf.MeanFunction([mf.Term("linear", ("x1",))], mixed_schema)
        assert mf.INTERCEPT in m.terms
        assert m.m == 2

    def test_marginality_enforced(self, mixed_schema):
        with pytest.raises(ValueError, match="marginality"):
            mf.MeanFunction([mf.Term("quadratic", ("x1",))], mixed_schema)
        with pytest.raises(ValueError, match="marginality"):
            mf.MeanFunction([mf.Term("linear", ("x1",)),
                             mf.Term("interaction", ("x1", "x2"))], mixed_schema)

    def test_quadratic_only_on_continuous(self, mixed_schema):
        with pytest.raises(ValueError, match="non-continuous"):
            mf.MeanFunction([mf.Term("linear", ("c1",)),
                             mf.Term("quadratic", ("c1",))], mixed_schema)

    def test_interaction_order_canonicalised(self, mixed_schema):
        terms = [mf.Term("linear", ("x1",)), mf.Term("linear", ("x2",)),
                 mf.Term("interaction", ("x2", "x1"))]
        m = mf.MeanFunction(terms, mixed_schema)
        inter = [t for t in m.terms if t.kind == "interaction"][0]
        assert inter.vars == ("x1", "x2")

    def test_column_order_fixed(self, mixed_schema):
        m = mf.maximal_model(mixed_schema)
        kinds = [t.kind for t in m.terms]
        assert kinds == (["intercept"] + ["linear"] * 3 + ["quadratic"] * 2
                         + ["interaction"] * 3)

    def test_serialisation_roundtrip(self, mixed_schema):
        m = mf.maximal_model(mixed_schema)
        again = mf.MeanFunction.from_list(m.to_list(), mixed_schema)
        assert again == m

    def test_unknown_variable(self, mixed_schema):
        with pytest.raises(ValueError, match="unknown variable"):
            mf.MeanFunction([mf.Term("linear", ("zz",))], mixed_schema)


class TestExpand:
    def test_columns(self, mixed_schema):
        pts = np.array([[0.5, 0.2, 1.0], [0.1, 0.8, 0.0]])
        m = mf.MeanFunction([mf.Term("linear", ("x1",)), mf.Term("linear", ("x2",)),
                             mf.Term("linear", ("c1",)),
                             mf.Term("quadratic", ("x1",)),
                             mf.Term("interaction", ("x1", "c1"))], mixed_schema)
        h = mf.expand(m, pts, mixed_schema)
        # columns: 1, x1, x2, c1, x1^2, x1*c1
        assert np.allclose(h[0], [1.0, 0.5, 0.2, 1.0, 0.25, 0.5])
        assert np.allclose(h[1], [1.0, 0.1, 0.8, 0.0, 0.01, 0.0])

    def test_corner_point_two_level_only(self):
        schema = VariableSchema([
            Variable("x", "continuous", range=(0, 1)),
            Variable("c", "categorical", levels=("a", "b", "c")),
        ])
        m = mf.MeanFunction([mf.Term("linear", ("c",))], schema)
        with pytest.raises(ValueError, match="two-level"):
            mf.expand(m, np.array([[0.5, 2.0]]), schema)


class TestNeighbours:
    def test_hand_enumeration(self, cont_schema):
        # from {1, x1}: add x2, add x1^2; remove x1
        space = mf.ModelSpace(cont_schema)
        m = mf.MeanFunction([mf.Term("linear", ("x1",))], cont_schema)
        nbs = mf.neighbours(m, space)
        ids = sorted(repr(n) for n in nbs)
        assert ids == sorted([
            "MeanFunction(1 + x1 + x2)",
            "MeanFunction(1 + x1 + x1^2)",
            "MeanFunction(1)",
        ])

    def test_linear_not_removable_under_quadratic(self, cont_schema):
        space = mf.ModelSpace(cont_schema)
        m = mf.MeanFunction([mf.Term("linear", ("x1",)),
                             mf.Term("quadratic", ("x1",))], cont_schema)
        nbs = mf.neighbours(m, space)
        # removing x1 would orphan x1^2: only x1^2 is removable, x2 addable
        reprs = {repr(n) for n in nbs}
        assert "MeanFunction(1 + x1)" in reprs
        assert "MeanFunction(1 + x1^2)" not in reprs
        assert "MeanFunction(1 + x1 + x2 + x1^2)" in reprs

    def test_moves_stay_in_space(self, mixed_schema):
        space = mf.ModelSpace(mixed_schema)
        frontier = [mf.intercept_only(mixed_schema)]
        seen = set(frontier)
        for _ in range(3):
            nxt = []
            for m in frontier:
                for nb in mf.neighbours(m, space):
                    assert space.contains(nb)
                    if nb not in seen:
                        seen.add(nb)
                        nxt.append(nb)
            frontier = nxt

    def test_neighbourhood_symmetry(self, cont_schema):
        # w in nb(v) iff v in nb(w): required for the Hastings correction
        space = mf.ModelSpace(cont_schema)
        for v in space.enumerate():
            for w in mf.neighbours(v, space):
                assert v in mf.neighbours(w, space)

    def test_enumerate_count(self, cont_schema):
        # marginality-respecting subsets of {x1, x2, x1^2, x2^2, x1:x2}:
        # model determined by linear set L and higher-order terms with
        # support in L: |L|=0 ->1, {x1} -> 2 (with/without x1^2), {x2} -> 2,
        # {x1,x2} -> 2*2*2 = 8; total 13
        assert len(mf.ModelSpace(cont_schema).enumerate()) == 13


def test_maximal_model_size_matches_paper_scale():
    # 11 continuous + 2 two-level categorical inputs: m = 1 + 13 + 11 + 78
    vs = [Variable(f"x{i}", "continuous", range=(0, 1)) for i in range(11)]
    vs += [Variable(f"c{i}", "categorical", levels=("0", "1")) for i in range(2)]
    schema = VariableSchema(vs)
    assert mf.maximal_model(schema).m == 103
