"""Command-line interface: designs, synthetic runs, fitting, prediction,
diagnostics, model selection, screening, sensitivity and the HTTP service.

Every artifact-producing command writes a run manifest alongside its outputs;
``mvemu rerun <manifest>`` regenerates the artifacts bit-identically.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import meanfn as mf
from .data import (Dataset, RunManifest, fmt_float, load_dataset, read_inputs_csv,
                   read_json, read_schema, write_inputs_csv, write_json,
                   write_outputs_csv, write_schema)
from .design import DesignSpec, generate
from .diagnostics import diagnose
from .emulator import FitOptions, FittedEmulator, PriorSpec, fit as fit_emulator
from .modelsel import Mc3Options, mc3_run, model_id
from .rdvs import RdvsOptions, rdvs_run
from .sensitivity import (InputDistribution, SensitivityResult, SobolOptions,
                          default_grid, main_effect, sobol_indices)
from .simbench import get_simulator, simulator_names


class CliError(click.ClickException):
    """Contract violation; optionally rendered as machine-readable JSON."""

    def __init__(self, message: str, json_errors: bool = False):
        super().__init__(message)
        self.json_errors = json_errors

    def show(self, file=None):
        if self.json_errors:
            click.echo(json.dumps({"error": self.message}), err=True)
        else:
            super().show(file)


def _resolve(ctx, value, key, default):
    if value is not None:
        return value
    group = ctx.obj or {}
    if group.get(key) is not None:
        return group[key]
    return default


def _load_fit(path, json_errors=False) -> FittedEmulator:
    try:
        return FittedEmulator.from_dict(read_json(path))
    except (ValueError, KeyError, OSError) as e:
        raise CliError(f"{path}: {e}", json_errors)


def _mean_function(spec: str, schema) -> mf.MeanFunction:
    builders = {"intercept": mf.intercept_only, "linear": mf.linear_model,
                "maximal": mf.maximal_model}
    if spec in builders:
        return builders[spec](schema)
    d = read_json(spec)
    terms = d["modal"] if isinstance(d, dict) and "modal" in d else d
    return mf.MeanFunction.from_list(terms, schema)


@click.group()
@click.version_option(__version__)
@click.option("--seed", type=int, default=None, help="Default seed for all subcommands.")
@click.option("--threads", type=int, default=None,
              help="Thread cap exported to BLAS/OpenMP for child computations.")
@click.option("--mc-size", type=int, default=None,
              help="Default Monte Carlo sample size where applicable.")
@click.pass_context
def main(ctx, seed, threads, mc_size):
    """Multivariate emulation toolkit.

    Options may also be set through MVEMU_*-prefixed environment variables
    (e.g. MVEMU_SEED).
    """
    if threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)
    ctx.obj = {"seed": seed, "mc_size": mc_size}


def _manifest(command: str, opts: dict, seed, input_paths, output_paths) -> None:
    man = RunManifest.create(command, opts, seed, input_paths, output_paths)
    man.write(opts["manifest"])


# ---------------------------------------------------------------------------
# design


def _run_design(opts: dict) -> None:
    if opts.get("sim"):
        schema = get_simulator(opts["sim"]).schema
    else:
        schema, _ = read_schema(opts["schema"])
    spec = DesignSpec(schema=schema, n=opts["n"], criterion=opts["criterion"],
                      budget=opts.get("budget"), seed=opts["seed"])
    points = generate(spec)
    write_inputs_csv(opts["out"], schema, points)
    _manifest("design", opts, opts["seed"],
              [opts["schema"]] if opts.get("schema") else [], [opts["out"]])


@main.command()
@click.option("--schema", type=click.Path(exists=True), default=None,
              help="Schema JSON describing the input variables.")
@click.option("--sim", type=click.Choice(simulator_names()), default=None,
              help="Use a synthetic simulator's schema instead of a file.")
@click.option("--n", type=int, required=True, help="Number of design points.")
@click.option("--criterion", type=click.Choice(["random-lhs", "maximin-lhs"]),
              default="random-lhs", show_default=True)
@click.option("--budget", type=int, default=None, help="Maximin swap proposals.")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), required=True, help="Design CSV path.")
@click.option("--manifest", type=click.Path(), default=None)
@click.pass_context
def design(ctx, schema, sim, n, criterion, budget, seed, out, manifest):
    """Generate a sliced Latin hypercube design."""
    if (schema is None) == (sim is None):
        raise CliError("give exactly one of --schema and --sim")
    opts = {"schema": schema, "sim": sim, "n": n, "criterion": criterion,
            "budget": budget, "seed": _resolve(ctx, seed, "seed", 0),
            "out": out, "manifest": manifest or out + ".manifest.json"}
    try:
        _run_design(opts)
    except ValueError as e:
        raise CliError(str(e))


# ---------------------------------------------------------------------------
# simulate


def _run_simulate(opts: dict) -> None:
    sim = get_simulator(opts["sim"])
    points = read_inputs_csv(opts["inputs"], sim.schema)
    y = sim.evaluate_batch(points)
    write_outputs_csv(opts["out"], list(sim.output_names), y)
    outputs = [opts["out"]]
    if opts.get("schema_out"):
        write_schema(opts["schema_out"], sim.schema, list(sim.output_names))
        outputs.append(opts["schema_out"])
    _manifest("simulate", opts, None, [opts["inputs"]], outputs)


@main.command()
@click.option("--sim", type=click.Choice(simulator_names()), required=True)
@click.option("--inputs", type=click.Path(exists=True), required=True,
              help="Design CSV with raw input values.")
@click.option("--out", type=click.Path(), required=True, help="Outputs CSV path.")
@click.option("--schema-out", type=click.Path(), default=None,
              help="Also write the simulator's schema JSON here.")
@click.option("--manifest", type=click.Path(), default=None)
def simulate(sim, inputs, out, schema_out, manifest):
    """Evaluate a synthetic simulator over a design CSV."""
    opts = {"sim": sim, "inputs": inputs, "out": out, "schema_out": schema_out,
            "manifest": manifest or out + ".manifest.json"}
    try:
        _run_simulate(opts)
    except ValueError as e:
        raise CliError(str(e))


# ---------------------------------------------------------------------------
# fit


def _run_fit(opts: dict) -> None:
    ds = load_dataset(opts["schema"], opts["inputs"], opts["outputs"])
    meanfunc = _mean_function(opts["mean"], ds.schema)
    prior = PriorSpec(opts["prior"])
    options = FitOptions(kind=opts["emulator"], starts=opts["starts"],
                         budget=opts["budget"], seed=opts["seed"])
    em = fit_emulator(ds, meanfunc, prior=prior, options=options)
    write_json(opts["out"], em.to_dict())
    inputs = [opts["schema"], opts["inputs"], opts["outputs"]]
    if opts["mean"] not in ("intercept", "linear", "maximal"):
        inputs.append(opts["mean"])
    _manifest("fit", opts, opts["seed"], inputs, [opts["out"]])


@main.command(name="fit")
@click.option("--schema", type=click.Path(exists=True), required=True)
@click.option("--inputs", type=click.Path(exists=True), required=True)
@click.option("--outputs", type=click.Path(exists=True), required=True)
@click.option("--emulator", type=click.Choice(["lightweight", "gp", "gp-nugget"]),
              default="gp", show_default=True)
@click.option("--mean", default="linear", show_default=True,
              help="intercept | linear | maximal | path to a term-list or "
                   "model-selection JSON (modal model).")
@click.option("--prior", type=click.Choice(["weak", "unit-information"]),
              default="weak", show_default=True)
@click.option("--starts", type=int, default=10, show_default=True)
@click.option("--budget", type=int, default=500, show_default=True,
              help="Objective evaluations per optimiser start.")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), required=True, help="Fit JSON path.")
@click.option("--manifest", type=click.Path(), default=None)
@click.pass_context
def fit_cmd(ctx, schema, inputs, outputs, emulator, mean, prior, starts, budget,
            seed, out, manifest):
    """Fit an emulator to a dataset."""
    opts = {"schema": schema, "inputs": inputs, "outputs": outputs,
            "emulator": emulator, "mean": mean, "prior": prior, "starts": starts,
            "budget": budget, "seed": _resolve(ctx, seed, "seed", 0), "out": out,
            "manifest": manifest or out + ".manifest.json"}
    try:
        _run_fit(opts)
    except (ValueError, RuntimeError) as e:
        raise CliError(str(e))


# ---------------------------------------------------------------------------
# predict


def prediction_rows(em: FittedEmulator, points: np.ndarray):
    """(header, rows) of per-cell mean, marginal scale and dof for a CSV."""
    pred = em.predict(points)
    scale = np.sqrt(pred.marginal_scale2())
    header = []
    for name in em.dataset.output_names:
        header += [f"{name}:mean", f"{name}:scale"]
    header.append("dof")
    rows = []
    for u in range(pred.q.shape[0]):
        row = []
        for s in range(pred.q.shape[1]):
            row += [pred.q[u, s], scale[u, s]]
        row.append(pred.dof_hat)
        rows.append(row)
    return header, rows, pred


def _run_predict(opts: dict) -> None:
    em = _load_fit(opts["fit"])
    points = read_inputs_csv(opts["inputs"], em.schema)
    header, rows, pred = prediction_rows(em, points)
    with open(opts["out"], "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_float(v) for v in row])
    outputs = [opts["out"]]
    if opts.get("dist_out"):
        write_json(opts["dist_out"], pred.to_dict())
        outputs.append(opts["dist_out"])
    _manifest("predict", opts, None, [opts["fit"], opts["inputs"]], outputs)


@main.command()
@click.option("--fit", "fit_path", type=click.Path(exists=True), required=True)
@click.option("--inputs", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True, help="Predictions CSV path.")
@click.option("--dist-out", type=click.Path(), default=None,
              help="Full predictive-distribution JSON path.")
@click.option("--manifest", type=click.Path(), default=None)
def predict(fit_path, inputs, out, dist_out, manifest):
    """Predict at new inputs: per-cell mean, marginal scale and dof."""
    opts = {"fit": fit_path, "inputs": inputs, "out": out, "dist_out": dist_out,
            "manifest": manifest or out + ".manifest.json"}
    try:
        _run_predict(opts)
    except ValueError as e:
        raise CliError(str(e))


# ---------------------------------------------------------------------------
# diagnose


def _run_diagnose(opts: dict) -> dict:
    em = _load_fit(opts["fit"])
    points = read_inputs_csv(opts["test_inputs"], em.schema)
    from .data import read_outputs_csv

    _, y0 = read_outputs_csv(opts["test_outputs"], em.dataset.output_names)
    report = diagnose(em, points, y0, alpha=opts["alpha"], mc_size=opts["mc_size"],
                      seed=opts["seed"])
    write_json(opts["out"], report.to_dict())
    outputs = [opts["out"]]
    if opts.get("qq_out"):
        qq = report.qq_data()
        with open(opts["qq_out"], "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["theoretical", "observed"])
            for t, o in qq:
                w.writerow([fmt_float(t), fmt_float(o)])
        outputs.append(opts["qq_out"])
    _manifest("diagnose", opts, opts["seed"],
              [opts["fit"], opts["test_inputs"], opts["test_outputs"]], outputs)
    return report.to_dict()


@main.command()
@click.option("--fit", "fit_path", type=click.Path(exists=True), required=True)
@click.option("--test-inputs", type=click.Path(exists=True), required=True)
@click.option("--test-outputs", type=click.Path(exists=True), required=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--mc-size", type=int, default=None,
              help="Reference-distribution Monte Carlo size.")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), required=True, help="Report JSON path.")
@click.option("--qq-out", type=click.Path(), default=None, help="QQ data CSV path.")
@click.option("--manifest", type=click.Path(), default=None)
@click.pass_context
def diagnose_cmd(ctx, fit_path, test_inputs, test_outputs, alpha, mc_size, seed,
                 out, qq_out, manifest):
    """Validate a fit against held-out runs."""
    opts = {"fit": fit_path, "test_inputs": test_inputs, "test_outputs": test_outputs,
            "alpha": alpha, "mc_size": _resolve(ctx, mc_size, "mc_size", 100_000),
            "seed": _resolve(ctx, seed, "seed", 0), "out": out, "qq_out": qq_out,
            "manifest": manifest or out + ".manifest.json"}
    try:
        d = _run_diagnose(opts)
    except ValueError as e:
        raise CliError(str(e))
    ref = d["u_reference"]
    click.echo(f"U = {d['u']:.4g}  (reference mean {ref['mean']:.4g}, "
               f"band [{ref['q025']:.4g}, {ref['q975']:.4g}])")
    click.echo(f"coverage({1 - alpha:.0%}) = {d['coverage']:.4g}  "
               f"RMSE = {d['rmse']:.4g}  RRMSE = {d['rrmse']:.4g}")
    click.echo("flags: " + (", ".join(d["flags"]) if d["flags"] else "none (adequate)"))


# ---------------------------------------------------------------------------
# select-model


def _run_select_model(opts: dict) -> dict:
    ds = load_dataset(opts["schema"], opts["inputs"], opts["outputs"])
    maximal = _mean_function(opts["maximal"], ds.schema)
    space = mf.ModelSpace(ds.schema, maximal)
    options = Mc3Options(iters=opts["iters"], burn_frac=opts["burn_frac"],
                         seed=opts["seed"], kind=opts["kind"],
                         rw_sigma=opts["rw_sigma"])
    summary = mc3_run(ds, space, options)
    write_json(opts["out"], summary.to_dict())
    _manifest("select-model", opts, opts["seed"],
              [opts["schema"], opts["inputs"], opts["outputs"]], [opts["out"]])
    return summary.to_dict()


@main.command(name="select-model")
@click.option("--schema", type=click.Path(exists=True), required=True)
@click.option("--inputs", type=click.Path(exists=True), required=True)
@click.option("--outputs", type=click.Path(exists=True), required=True)
@click.option("--maximal", default="maximal", show_default=True,
              help="Maximal mean function (keyword or term-list JSON).")
@click.option("--kind", type=click.Choice(["lightweight", "gp", "gp-nugget"]),
              default="lightweight", show_default=True)
@click.option("--iters", type=int, default=100_000, show_default=True)
@click.option("--burn-frac", type=float, default=0.1, show_default=True)
@click.option("--rw-sigma", type=float, default=0.3, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), required=True, help="Summary JSON path.")
@click.option("--top", type=int, default=10, show_default=True,
              help="Models to list on stdout.")
@click.option("--manifest", type=click.Path(), default=None)
@click.pass_context
def select_model(ctx, schema, inputs, outputs, maximal, kind, iters, burn_frac,
                 rw_sigma, seed, out, top, manifest):
    """Compare mean functions by MCMC model composition."""
    opts = {"schema": schema, "inputs": inputs, "outputs": outputs,
            "maximal": maximal, "kind": kind, "iters": iters,
            "burn_frac": burn_frac, "rw_sigma": rw_sigma,
            "seed": _resolve(ctx, seed, "seed", 0), "out": out,
            "manifest": manifest or out + ".manifest.json"}
    try:
        d = _run_select_model(opts)
    except ValueError as e:
        raise CliError(str(e))
    total = sum(d["counts"].values())
    ranked = sorted(d["counts"].items(), key=lambda kv: -kv[1])[:top]
    click.echo(f"{'model':<50} {'posterior':>9}")
    for mid, c in ranked:
        click.echo(f"{mid:<50} {c / total:>9.4f}")
    click.echo("modal: " + model_id(
        mf.MeanFunction.from_list(d["modal"],
                                  load_dataset(schema, inputs, outputs).schema)))


# ---------------------------------------------------------------------------
# rdvs


def _run_rdvs(opts: dict) -> dict:
    ds = load_dataset(opts["schema"], opts["inputs"], opts["outputs"])
    options = RdvsOptions(b_rep=opts["b_rep"], iters=opts["iters"],
                          seed=opts["seed"], null_quantile=opts["null_quantile"])
    result = rdvs_run(ds, options)
    d = result.to_dict()
    write_json(opts["out"], d)
    outputs = [opts["out"]]
    if opts.get("null_out"):
        with open(opts["null_out"], "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["kind", "median_log_r"])
            for v in d["null_continuous"]:
                w.writerow(["continuous", fmt_float(v)])
            for v in d["null_categorical"]:
                w.writerow(["categorical", fmt_float(v)])
        outputs.append(opts["null_out"])
    if opts.get("medians_out"):
        thr = d["thresholds"]
        kinds = {v.name: v.kind for v in ds.schema.variables}
        with open(opts["medians_out"], "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["variable", "median_log_r", "threshold", "important"])
            for name, med in d["medians"].items():
                w.writerow([name, fmt_float(med), fmt_float(thr[kinds[name]]),
                            str(d["important"][name]).lower()])
        outputs.append(opts["medians_out"])
    _manifest("rdvs", opts, opts["seed"],
              [opts["schema"], opts["inputs"], opts["outputs"]], outputs)
    return d


@main.command(name="rdvs")
@click.option("--schema", type=click.Path(exists=True), required=True)
@click.option("--inputs", type=click.Path(exists=True), required=True)
@click.option("--outputs", type=click.Path(exists=True), required=True)
@click.option("--b-rep", type=int, default=100, show_default=True)
@click.option("--iters", type=int, default=2000, show_default=True,
              help="MCMC iterations per repetition.")
@click.option("--null-quantile", type=float, default=0.95, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), required=True, help="Result JSON path.")
@click.option("--null-out", type=click.Path(), default=None,
              help="Null-distribution CSV (kind, median of log r).")
@click.option("--medians-out", type=click.Path(), default=None,
              help="Per-variable medians/threshold/importance CSV.")
@click.option("--manifest", type=click.Path(), default=None)
@click.pass_context
def rdvs_cmd(ctx, schema, inputs, outputs, b_rep, iters, null_quantile, seed,
             out, null_out, medians_out, manifest):
    """Screen input variables against inert reference variables."""
    opts = {"schema": schema, "inputs": inputs, "outputs": outputs,
            "b_rep": b_rep, "iters": iters, "null_quantile": null_quantile,
            "seed": _resolve(ctx, seed, "seed", 0), "out": out,
            "null_out": null_out, "medians_out": medians_out,
            "manifest": manifest or out + ".manifest.json"}
    try:
        d = _run_rdvs(opts)
    except ValueError as e:
        raise CliError(str(e))
    for name, important in d["important"].items():
        mark = "important" if important else "-"
        click.echo(f"{name:<16} median log r = {d['medians'][name]:>8.3f}  {mark}")


# ---------------------------------------------------------------------------
# sensitivity


def _run_sensitivity(opts: dict) -> dict:
    em = _load_fit(opts["fit"])
    dist = InputDistribution(em.schema)
    options = SobolOptions(n_mc=opts["n_mc"], seed=opts["seed"], mode=opts["mode"],
                           n_outer=opts["n_outer"])
    result = sobol_indices(em, dist, options)
    d = result.to_dict()
    write_json(opts["out"], d)
    outputs = [opts["out"]]
    if opts.get("csv_out"):
        with open(opts["csv_out"], "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["order", "variables", "index", "se"])
            for name, v in d["first_order"].items():
                w.writerow(["1", name, fmt_float(v["index"]), fmt_float(v["se"])])
            for pair, v in d["second_order"].items():
                w.writerow(["2", pair, fmt_float(v["index"]), fmt_float(v["se"])])
        outputs.append(opts["csv_out"])
    if opts.get("effects_out"):
        curves = {}
        for var in em.schema.names:
            grid = default_grid(em.schema, var)
            curve = main_effect(em, dist, var, grid, n_mc=min(opts["n_mc"], 20_000),
                                seed=opts["seed"])
            curves[var] = (grid, curve)
        with open(opts["effects_out"], "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["variable", "value", "effect"])
            for var, (grid, curve) in curves.items():
                for g, e in zip(grid, curve):
                    cell = fmt_float(g) if isinstance(g, float) else g
                    w.writerow([var, cell, fmt_float(e)])
        outputs.append(opts["effects_out"])
    _manifest("sensitivity", opts, opts["seed"], [opts["fit"]], outputs)
    return d


@main.command(name="sensitivity")
@click.option("--fit", "fit_path", type=click.Path(exists=True), required=True)
@click.option("--n-mc", type=int, default=None, help="Pick-freeze sample size.")
@click.option("--mode", type=click.Choice(["plugin", "posterior-averaged"]),
              default="plugin", show_default=True)
@click.option("--n-outer", type=int, default=50, show_default=True,
              help="Posterior surface draws in posterior-averaged mode.")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), required=True, help="Result JSON path.")
@click.option("--csv-out", type=click.Path(), default=None,
              help="Index table CSV (order, variables, index, se).")
@click.option("--effects-out", type=click.Path(), default=None,
              help="Main-effect curves CSV (variable, value, effect).")
@click.option("--manifest", type=click.Path(), default=None)
@click.pass_context
def sensitivity_cmd(ctx, fit_path, n_mc, mode, n_outer, seed, out, csv_out,
                    effects_out, manifest):
    """Variance-based sensitivity indices of the aggregate output."""
    opts = {"fit": fit_path, "n_mc": _resolve(ctx, n_mc, "mc_size", 100_000),
            "mode": mode, "n_outer": n_outer,
            "seed": _resolve(ctx, seed, "seed", 0), "out": out,
            "csv_out": csv_out, "effects_out": effects_out,
            "manifest": manifest or out + ".manifest.json"}
    try:
        d = _run_sensitivity(opts)
    except ValueError as e:
        raise CliError(str(e))
    click.echo(f"total variance = {d['total_variance']:.4g}")
    for name, v in sorted(d["first_order"].items(), key=lambda kv: -kv[1]["index"]):
        click.echo(f"S[{name}] = {v['index']:.4f} (se {v['se']:.4f})")
    for pair, v in sorted(d["second_order"].items(), key=lambda kv: -kv[1]["index"]):
        click.echo(f"S[{pair}] = {v['index']:.4f} (se {v['se']:.4f})")


# ---------------------------------------------------------------------------
# serve / rerun


@main.command()
@click.option("--fit", "fit_path", type=click.Path(exists=True), required=True)
@click.option("--sensitivity", "sens_path", type=click.Path(exists=True), default=None,
              help="Cached sensitivity JSON to serve on GET /sensitivity.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(fit_path, sens_path, host, port):
    """Serve predictions over HTTP for the explorer UI."""
    import uvicorn

    from .service import create_app

    em = _load_fit(fit_path)
    sens = read_json(sens_path) if sens_path else None
    uvicorn.run(create_app(em, sensitivity=sens), host=host, port=port)


_RUNNERS = {
    "design": _run_design,
    "simulate": _run_simulate,
    "fit": _run_fit,
    "predict": _run_predict,
    "diagnose": _run_diagnose,
    "select-model": _run_select_model,
    "rdvs": _run_rdvs,
    "sensitivity": _run_sensitivity,
}


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True))
@click.option("--check-inputs/--no-check-inputs", default=True, show_default=True,
              help="Verify input file hashes before re-running.")
def rerun(manifest_path, check_inputs):
    """Regenerate the artifacts of a previous run from its manifest."""
    from .data import file_sha256

    man = RunManifest.read(manifest_path)
    runner = _RUNNERS.get(man.command)
    if runner is None:
        raise CliError(f"manifest names unknown command {man.command!r}")
    if check_inputs:
        for path, digest in man.inputs.items():
            if not Path(path).exists():
                raise CliError(f"input file {path} is missing")
            if file_sha256(path) != digest:
                raise CliError(f"input file {path} has changed since the original run")
    try:
        runner(dict(man.options))
    except (ValueError, RuntimeError) as e:
        raise CliError(str(e))
    click.echo(f"reran {man.command}: " + ", ".join(man.outputs))


if __name__ == "__main__":
    main(auto_envvar_prefix="MVEMU")


def entrypoint():
    main(auto_envvar_prefix="MVEMU")
