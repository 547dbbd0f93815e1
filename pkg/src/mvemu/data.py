"""Dataset files: schema JSON, input/output CSVs and run manifests.

Schema file: {"variables": [...], "outputs": [...]}.  Inputs CSV has a header
row of variable names in user order with raw (unscaled) values; outputs CSV
has a header of output names and is row-aligned with the inputs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kernel import VariableSchema


def fmt_float(x: float) -> str:
    """Shortest round-trip decimal representation of a binary64."""
    return repr(float(x))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


@dataclass
class Dataset:
    """Encoded training (or test) data: internal-coordinate points and outputs."""

    schema: VariableSchema
    output_names: list[str]
    points: np.ndarray  # n x p, internal coordinates
    y: np.ndarray  # n x k

    def __post_init__(self):
        self.points = self.schema.validate_points(self.points)
        self.y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if self.y.shape[0] != self.points.shape[0]:
            raise ValueError(
                f"{self.points.shape[0]} input rows but {self.y.shape[0]} output rows"
            )
        if self.y.shape[1] != len(self.output_names):
            raise ValueError("output column count does not match output names")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return self.y.shape[1]


def write_schema(path, schema: VariableSchema, output_names: list[str]) -> None:
    d = schema.to_dict()
    d["outputs"] = list(output_names)
    write_json(path, d)


def read_schema(path) -> tuple[VariableSchema, list[str]]:
    d = read_json(path)
    return VariableSchema.from_dict(d), list(d.get("outputs", []))


def write_inputs_csv(path, schema: VariableSchema, points: np.ndarray) -> None:
    """Internal-coordinate points to a raw-valued CSV in user variable order."""
    rows = schema.decode(points)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(schema.names)
        for row in rows:
            w.writerow([fmt_float(c) if isinstance(c, float) else c for c in row])


def read_inputs_csv(path, schema: VariableSchema) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty inputs CSV") from None
        if header != schema.names:
            raise ValueError(
                f"{path}: header {header} does not match schema variables {schema.names}"
            )
        raw = []
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != schema.p:
                raise ValueError(f"{path}: line {i}: expected {schema.p} cells, got {len(row)}")
            raw.append(row)
    try:
        return schema.encode(raw)
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from None


def write_outputs_csv(path, output_names: list[str], y: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(output_names)
        for row in np.atleast_2d(y):
            w.writerow([fmt_float(v) for v in row])


def read_outputs_csv(path, output_names: list[str] | None = None) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty outputs CSV") from None
        if output_names is not None and header != list(output_names):
            raise ValueError(f"{path}: header {header} does not match outputs {output_names}")
        rows = []
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as e:
                raise ValueError(f"{path}: line {i}: {e}") from None
    return header, np.asarray(rows, dtype=float)


def load_dataset(schema_path, inputs_path, outputs_path) -> Dataset:
    schema, output_names = read_schema(schema_path)
    points = read_inputs_csv(inputs_path, schema)
    names, y = read_outputs_csv(outputs_path, output_names or None)
    return Dataset(schema, output_names or names, points, y)


def file_sha256(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


@dataclass
class RunManifest:
    """Record of one artifact-producing command, sufficient to re-run it."""

    command: str
    options: dict
    seed: int | None
    inputs: dict = field(default_factory=dict)  # path -> sha256
    outputs: list = field(default_factory=list)
    version: str = ""
    timestamp: str = ""

    @classmethod
    def create(cls, command: str, options: dict, seed: int | None,
               input_paths: list, output_paths: list) -> "RunManifest":
        from . import __version__

        return cls(
            command=command,
            options=options,
            seed=seed,
            inputs={str(p): file_sha256(p) for p in input_paths},
            outputs=[str(p) for p in output_paths],
            version=__version__,
            timestamp=time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        )

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "options": self.options,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "version": self.version,
            "timestamp": self.timestamp,
        }

    def write(self, path) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def read(cls, path) -> "RunManifest":
        d = read_json(path)
        return cls(command=d["command"], options=d["options"], seed=d.get("seed"),
                   inputs=d.get("inputs", {}), outputs=d.get("outputs", []),
                   version=d.get("version", ""), timestamp=d.get("timestamp", ""))
