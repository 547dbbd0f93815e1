import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvemu.kernel import (CorrelationConfig, Variable, VariableSchema, build_cross,
                          build_row_scale, corr_matrix, correlation, distance_tensor,
                          lightweight_config)


class TestVariable:
    def test_continuous_requires_range(self):
        with pytest.raises(ValueError):
            Variable("x", "continuous")
        with pytest.raises(ValueError):
            Variable("x", "continuous", range=(1.0, 1.0))

    def test_categorical_requires_levels(self):
        with pytest.raises(ValueError):
            Variable("c", "categorical", levels=("only",))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Variable("x", "ordinal", range=(0, 1))


class TestSchema:
    def test_internal_order_continuous_first(self):
        schema = VariableSchema([
            Variable("c1", "categorical", levels=("a", "b")),
            Variable("x1", "continuous", range=(0.0, 2.0)),
        ])
        assert [v.name for v in schema.internal_variables()] == ["x1", "c1"]
        assert schema.p1 == 1

    def test_encode_scales_and_decode_inverts(self, mixed_schema):
        raw = [[0.25, -2.0, "b"], [1.0, 3.0, "a"]]
        pts = mixed_schema.encode(raw)
        assert np.allclose(pts, [[0.25, 0.0, 1.0], [1.0, 1.0, 0.0]])
        assert mixed_schema.decode(pts) == raw

    def test_encode_range_violation(self, mixed_schema):
        with pytest.raises(ValueError, match="outside range"):
            mixed_schema.encode([[1.5, 0.0, "a"]])

    def test_encode_unknown_level(self, mixed_schema):
        with pytest.raises(ValueError, match="unknown level"):
            mixed_schema.encode([[0.5, 0.0, "z"]])

    def test_dict_roundtrip(self, mixed_schema):
        again = VariableSchema.from_dict(mixed_schema.to_dict())
        assert again == mixed_schema

    def test_duplicate_names(self):
        with pytest.raises(ValueError, match="duplicate"):
            VariableSchema([Variable("x", "continuous", range=(0, 1)),
                            Variable("x", "continuous", range=(0, 1))])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(-2, 3),
                              st.sampled_from(["a", "b"])), min_size=1, max_size=8))
    def test_encode_decode_roundtrip_property(self, rows):
        schema = VariableSchema([
            Variable("x1", "continuous", range=(0.0, 1.0)),
            Variable("x2", "continuous", range=(-2.0, 3.0)),
            Variable("c1", "categorical", levels=("a", "b")),
        ])
        raw = [list(r) for r in rows]
        back = schema.decode(schema.encode(raw))
        for orig, rec in zip(raw, back):
            assert rec[0] == pytest.approx(orig[0], abs=1e-12)
            assert rec[1] == pytest.approx(orig[1], abs=1e-12)
            assert rec[2] == orig[2]


class TestCorrelation:
    def test_unit_distance_hand_value(self, mixed_schema):
        # r = (1, 1, 1): unit squared distance in x1 gives exp(-1)
        cfg = CorrelationConfig(r=np.ones(3))
        c = correlation([0.0, 0.3, 1.0], [1.0, 0.3, 1.0], cfg, mixed_schema)
        assert c == pytest.approx(0.36787944117144233, abs=1e-15)

    def test_categorical_mismatch(self, mixed_schema):
        cfg = CorrelationConfig(r=np.array([1.0, 1.0, 0.5]))
        c = correlation([0.2, 0.3, 0.0], [0.2, 0.3, 1.0], cfg, mixed_schema)
        assert c == pytest.approx(np.exp(-0.5), abs=1e-15)

    def test_identical_points_have_unit_correlation(self, mixed_schema):
        cfg = CorrelationConfig(r=np.array([2.0, 0.7, 1.3]))
        assert correlation([0.5, 0.1, 1.0], [0.5, 0.1, 1.0], cfg, mixed_schema) == 1.0

    def test_squared_exponential_power(self, cont_schema):
        # doubling the distance quadruples the exponent (g = 2 fixed)
        cfg = CorrelationConfig(r=np.array([1.0, 0.0]))
        c1 = correlation([0.0, 0.0], [0.1, 0.0], cfg, cont_schema)
        c2 = correlation([0.0, 0.0], [0.2, 0.0], cfg, cont_schema)
        assert np.log(c2) == pytest.approx(4 * np.log(c1))

    def test_negative_r_rejected(self):
        with pytest.raises(ValueError):
            CorrelationConfig(r=np.array([-1.0]))

    def test_r_length_checked(self, cont_schema):
        with pytest.raises(ValueError):
            CorrelationConfig(r=np.array([1.0])).check(cont_schema)


class TestRowScale:
    def test_nugget_on_diagonal_only(self, cont_schema):
        pts = np.array([[0.1, 0.2], [0.4, 0.9], [0.8, 0.3]])
        cfg0 = CorrelationConfig(r=np.array([1.0, 2.0]))
        cfg = CorrelationConfig(r=np.array([1.0, 2.0]), eta=0.3)
        a0 = build_row_scale(pts, cfg0, cont_schema)
        a = build_row_scale(pts, cfg, cont_schema)
        assert np.allclose(a - a0, 0.3 * np.eye(3))

    def test_cross_has_no_nugget(self, cont_schema):
        pts = np.array([[0.1, 0.2], [0.4, 0.9]])
        cfg = CorrelationConfig(r=np.array([1.0, 2.0]), eta=0.5)
        t = build_cross(pts, pts, cfg, cont_schema)
        a = build_row_scale(pts, cfg, cont_schema)
        assert np.allclose(a, t + 0.5 * np.eye(2))
        assert np.all(np.diag(t) == 1.0)

    def test_lightweight_identity_and_zero_cross(self, cont_schema):
        cfg = lightweight_config(cont_schema)
        pts = np.random.default_rng(0).uniform(size=(4, 2))
        new = np.random.default_rng(1).uniform(size=(3, 2))
        assert np.array_equal(build_row_scale(pts, cfg, cont_schema), np.eye(4))
        assert np.array_equal(build_cross(pts, new, cfg, cont_schema),
                              np.zeros((4, 3)))

    def test_lightweight_pointwise_correlation_undefined(self, cont_schema):
        cfg = lightweight_config(cont_schema)
        with pytest.raises(ValueError):
            correlation([0, 0], [1, 1], cfg, cont_schema)

    def test_lightweight_rejects_r(self):
        with pytest.raises(ValueError):
            CorrelationConfig(r=np.array([1.0]), lightweight=True)

    def test_corr_matrix_matches_pointwise(self, mixed_schema):
        rng = np.random.default_rng(3)
        pts = np.column_stack([rng.uniform(size=(5, 2)), rng.integers(0, 2, 5)])
        cfg = CorrelationConfig(r=np.array([0.5, 1.5, 0.9]))
        a = corr_matrix(distance_tensor(pts, pts, mixed_schema), cfg.r)
        for i in range(5):
            for j in range(5):
                assert a[i, j] == pytest.approx(
                    correlation(pts[i], pts[j], cfg, mixed_schema), abs=1e-14)

    def test_config_dict_roundtrip(self):
        cfg = CorrelationConfig(r=np.array([0.5, 1.5]), eta=0.01)
        again = CorrelationConfig.from_dict(cfg.to_dict())
        assert np.array_equal(again.r, cfg.r) and again.eta == cfg.eta
