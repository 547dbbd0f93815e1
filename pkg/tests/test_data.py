import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvemu.data import (Dataset, RunManifest, file_sha256, fmt_float, load_dataset,
                        read_inputs_csv, read_json, read_outputs_csv, read_schema,
                        write_inputs_csv, write_json, write_outputs_csv, write_schema)

from conftest import make_dataset


class TestFloatFormat:
    def test_shortest_roundtrip(self):
        assert fmt_float(0.1) == "0.1"
        assert fmt_float(1 / 3) == "0.3333333333333333"

    @settings(max_examples=100, deadline=None)
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_roundtrip_exact(self, x):
        assert float(fmt_float(x)) == x


class TestSchemaFile:
    def test_roundtrip(self, tmp_path, mixed_schema):
        path = tmp_path / "schema.json"
        write_schema(path, mixed_schema, ["y1", "y2"])
        schema, outputs = read_schema(path)
        assert schema == mixed_schema and outputs == ["y1", "y2"]


class TestInputsCsv:
    def test_write_read_roundtrip(self, tmp_path, mixed_schema):
        ds = make_dataset(mixed_schema, 7, 2, seed=1)
        path = tmp_path / "inputs.csv"
        write_inputs_csv(path, mixed_schema, ds.points)
        back = read_inputs_csv(path, mixed_schema)
        assert np.allclose(back, ds.points, atol=1e-14)

    def test_byte_stable(self, tmp_path, mixed_schema):
        ds = make_dataset(mixed_schema, 5, 1, seed=2)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_inputs_csv(p1, mixed_schema, ds.points)
        write_inputs_csv(p2, mixed_schema, read_inputs_csv(p1, mixed_schema))
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_mismatch(self, tmp_path, mixed_schema):
        path = tmp_path / "bad.csv"
        path.write_text("x1,oops,c1\n0.5,0.5,a\n")
        with pytest.raises(ValueError, match="header"):
            read_inputs_csv(path, mixed_schema)

    def test_line_addressed_cell_error(self, tmp_path, mixed_schema):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2,c1\n0.5,0.0,a\n0.5,0.0\n")
        with pytest.raises(ValueError, match="line 3"):
            read_inputs_csv(path, mixed_schema)

    def test_range_violation_reported(self, tmp_path, mixed_schema):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2,c1\n7.0,0.0,a\n")
        with pytest.raises(ValueError, match="outside range"):
            read_inputs_csv(path, mixed_schema)

    def test_empty_file(self, tmp_path, mixed_schema):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            read_inputs_csv(path, mixed_schema)


class TestOutputsCsv:
    def test_roundtrip(self, tmp_path):
        y = np.array([[1.5, -2.25], [0.1, 1 / 3]])
        path = tmp_path / "y.csv"
        write_outputs_csv(path, ["y1", "y2"], y)
        names, back = read_outputs_csv(path, ["y1", "y2"])
        assert names == ["y1", "y2"]
        assert np.array_equal(back, y)

    def test_bad_cell_line_addressed(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("y1\n1.0\nnope\n")
        with pytest.raises(ValueError, match="line 3"):
            read_outputs_csv(path, ["y1"])


class TestDataset:
    def test_row_count_mismatch(self, mixed_schema):
        with pytest.raises(ValueError, match="rows"):
            Dataset(mixed_schema, ["y1"], np.zeros((3, 3)), np.zeros((2, 1)))

    def test_load_dataset(self, tmp_path, mixed_schema):
        ds = make_dataset(mixed_schema, 6, 2, seed=3)
        write_schema(tmp_path / "s.json", mixed_schema, ds.output_names)
        write_inputs_csv(tmp_path / "x.csv", mixed_schema, ds.points)
        write_outputs_csv(tmp_path / "y.csv", ds.output_names, ds.y)
        back = load_dataset(tmp_path / "s.json", tmp_path / "x.csv", tmp_path / "y.csv")
        assert np.allclose(back.points, ds.points, atol=1e-14)
        assert np.array_equal(back.y, ds.y)
        assert back.output_names == ds.output_names


class TestManifest:
    def test_create_and_roundtrip(self, tmp_path):
        src = tmp_path / "in.txt"
        src.write_text("hello")
        man = RunManifest.create("design", {"n": 10}, 3, [src], [tmp_path / "out.csv"])
        path = tmp_path / "man.json"
        man.write(path)
        back = RunManifest.read(path)
        assert back.command == "design" and back.options == {"n": 10}
        assert back.seed == 3
        assert back.inputs[str(src)] == file_sha256(src)

    def test_json_write_stable(self, tmp_path):
        obj = {"a": 1 / 3, "b": [1, 2.5]}
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        write_json(p1, obj)
        write_json(p2, read_json(p1))
        assert p1.read_bytes() == p2.read_bytes()
