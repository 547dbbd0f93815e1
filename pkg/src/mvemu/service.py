"""Read-only HTTP prediction service over one fitted emulator.

Endpoints: GET /schema, POST /predict, POST /predict-batch,
POST /conditional-effect, GET /sensitivity, GET /training-runs.  The fit is
immutable, so every response is deterministic and the service is trivially
safe under concurrent requests.  Schema violations (unknown variable, missing
value, unknown level) return 400 with field-level messages; out-of-range
continuous values return 422.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel
from scipy.stats import t as t_dist

from .emulator import FittedEmulator


class PredictRequest(BaseModel):
    inputs: dict[str, Any] | list[Any]


class PredictBatchRequest(BaseModel):
    inputs: list[dict[str, Any] | list[Any]]


class ConditionalEffectRequest(BaseModel):
    var: str
    conditioning: dict[str, Any]
    grid: list[Any]
    alpha: float = 0.05


def _raw_row(fit: FittedEmulator, inputs) -> list:
    """One request input to a raw user-order row, with field-level errors."""
    schema = fit.schema
    if isinstance(inputs, dict):
        unknown = sorted(set(inputs) - set(schema.names))
        missing = sorted(set(schema.names) - set(inputs))
        if unknown or missing:
            detail = []
            detail += [{"field": n, "message": "unknown variable"} for n in unknown]
            detail += [{"field": n, "message": "missing value"} for n in missing]
            raise HTTPException(status_code=400, detail=detail)
        return [inputs[name] for name in schema.names]
    row = list(inputs)
    if len(row) != schema.p:
        raise HTTPException(status_code=400, detail=[{
            "field": "inputs",
            "message": f"expected {schema.p} values, got {len(row)}",
        }])
    return row


def _encode(fit: FittedEmulator, rows: list[list]) -> np.ndarray:
    schema = fit.schema
    points = np.empty((len(rows), schema.p))
    for i, row in enumerate(rows):
        for ui, var in enumerate(schema.variables):
            cell = row[ui]
            if var.kind == "continuous":
                try:
                    x = float(cell)
                except (TypeError, ValueError):
                    raise HTTPException(status_code=400, detail=[{
                        "field": var.name, "message": f"not a number: {cell!r}",
                    }])
                lo, hi = var.range
                if not lo <= x <= hi:
                    raise HTTPException(status_code=422, detail=[{
                        "field": var.name,
                        "message": f"value {x} outside range [{lo}, {hi}]",
                    }])
            elif str(cell) not in var.levels:
                raise HTTPException(status_code=400, detail=[{
                    "field": var.name,
                    "message": f"unknown level {cell!r}; levels: {list(var.levels)}",
                }])
        try:
            points[i] = schema.encode([row])[0]
        except ValueError as e:
            raise HTTPException(status_code=400,
                                detail=[{"field": "inputs", "message": str(e)}])
    return points


def _predictions(fit: FittedEmulator, points: np.ndarray, alpha: float = 0.05) -> list[dict]:
    pred = fit.predict(points)
    scale = np.sqrt(pred.marginal_scale2())
    c = float(t_dist.ppf(1 - alpha / 2, df=pred.dof_hat))
    out = []
    for u in range(points.shape[0]):
        outputs = []
        for s, name in enumerate(fit.dataset.output_names):
            mean = float(pred.q[u, s])
            half = c * float(scale[u, s])
            outputs.append({"name": name, "mean": mean, "scale": float(scale[u, s]),
                            "lower": mean - half, "upper": mean + half})
        out.append({"outputs": outputs, "dof": float(pred.dof_hat), "alpha": alpha})
    return out


def create_app(fit: FittedEmulator, sensitivity: dict | None = None) -> FastAPI:
    """FastAPI application bound to one immutable fit."""
    app = FastAPI(title="mvemu", version="1")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    schema_doc = fit.schema.to_dict()
    schema_doc["outputs"] = list(fit.dataset.output_names)

    @app.get("/schema")
    def get_schema() -> dict:
        return schema_doc

    @app.post("/predict")
    def post_predict(req: PredictRequest) -> dict:
        points = _encode(fit, [_raw_row(fit, req.inputs)])
        return _predictions(fit, points)[0]

    @app.post("/predict-batch")
    def post_predict_batch(req: PredictBatchRequest) -> dict:
        if not req.inputs:
            raise HTTPException(status_code=400, detail=[{
                "field": "inputs", "message": "empty batch"}])
        points = _encode(fit, [_raw_row(fit, row) for row in req.inputs])
        return {"predictions": _predictions(fit, points)}

    @app.post("/conditional-effect")
    def post_conditional_effect(req: ConditionalEffectRequest) -> dict:
        schema = fit.schema
        if req.var not in schema.names:
            raise HTTPException(status_code=400, detail=[{
                "field": "var", "message": f"unknown variable {req.var!r}"}])
        others = [n for n in schema.names if n != req.var]
        missing = sorted(set(others) - set(req.conditioning))
        if missing:
            raise HTTPException(status_code=400, detail=[
                {"field": n, "message": "missing conditioning value"} for n in missing])
        if not req.grid:
            raise HTTPException(status_code=400, detail=[{
                "field": "grid", "message": "empty grid"}])
        rows = []
        for g in req.grid:
            assignment = dict(req.conditioning)
            assignment[req.var] = g
            rows.append([assignment[name] for name in schema.names])
        points = _encode(fit, rows)
        preds = _predictions(fit, points, alpha=req.alpha)
        curves = []
        for s, name in enumerate(fit.dataset.output_names):
            curves.append({
                "name": name,
                "mean": [p["outputs"][s]["mean"] for p in preds],
                "lower": [p["outputs"][s]["lower"] for p in preds],
                "upper": [p["outputs"][s]["upper"] for p in preds],
            })
        return {"var": req.var, "grid": list(req.grid), "outputs": curves,
                "dof": preds[0]["dof"], "alpha": req.alpha}

    @app.get("/sensitivity")
    def get_sensitivity() -> dict:
        if sensitivity is None:
            raise HTTPException(
                status_code=404,
                detail="sensitivity not computed; run the `sensitivity` command "
                       "and pass its JSON to `serve --sensitivity`")
        return sensitivity

    @app.get("/training-runs")
    def get_training_runs() -> dict:
        rows = fit.schema.decode(fit.dataset.points)
        return {
            "inputs": [dict(zip(fit.schema.names, row)) for row in rows],
            "outputs": [[float(v) for v in row] for row in fit.dataset.y],
            "output_names": list(fit.dataset.output_names),
        }

    return app
