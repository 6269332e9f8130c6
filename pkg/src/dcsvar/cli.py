"""Command-line front end for simulation, estimation, identification,
independence testing, impulse responses, and the simulation study.

Every run writes its artifacts plus a ``manifest.json`` echoing the seed and
options into the output directory; outputs are byte-identical across runs
with the same inputs, options, and seed.  On failure all files written by
the run are removed before exiting nonzero.
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np
import pandas as pd
import yaml

from . import __version__
from .errors import DcsvarError, ParameterError
from .ica import OptimizerSettings, estimate_unmixing
from .indep import permutation_test
from .irf import irf_choleski, irf_local_projection, irf_var_implied
from .model import model_from_dict, simulate
from .montecarlo import (CELLS, ExperimentGrid, kurtosis_quantile_table,
                         run_grid, write_report)
from .series import TimeSeriesMatrix, read_csv
from .series import write_csv as write_timeseries_csv
from .var import fit_var, low_frequency_detrend
from .whiten import CholeskiOrdered, CovarianceSvd, DataSvd, kurtosis_order
from .distcov import DistCovConfig

_WHITENERS = {"chol": CholeskiOrdered, "sym": CovarianceSvd, "svd": DataSvd}


class _Run:
    """Tracks files written by one command so failures leave no partial
    output behind."""

    def __init__(self, out_dir: str):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written: list[Path] = []
        self.extra: dict = {}

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.written.append(p)
        return p

    def csv(self, name: str, frame: pd.DataFrame) -> None:
        frame.to_csv(self.path(name), index=False)

    def series(self, name: str, ts: TimeSeriesMatrix) -> None:
        write_timeseries_csv(ts, self.path(name))

    def json(self, name: str, payload: dict) -> None:
        self.path(name).write_text(
            json.dumps(payload, indent=2, sort_keys=True, default=_jsonable)
            + "\n", encoding="utf-8")

    def manifest(self, command: str, params: dict) -> None:
        payload = {
            "command": command,
            "package_version": __version__,
            "config": {k: _jsonable(v) for k, v in params.items()},
            "files": sorted({p.name for p in self.written}
                            | {"manifest.json"}),
        }
        payload.update(self.extra)
        self.json("manifest.json", payload)

    def discard(self) -> None:
        for p in self.written:
            p.unlink(missing_ok=True)


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, tuple):
        return list(value)
    return value


def _guarded(command: str, params: dict, out_dir: str, body) -> None:
    run = _Run(out_dir)
    try:
        body(run)
        run.manifest(command, params)
    except (DcsvarError, OSError, ValueError) as exc:
        run.discard()
        raise click.ClickException(str(exc)) from exc


def _parse_ordering(raw: str | None, n: int, data=None):
    """``None``/'none' -> natural order; 'kurtosis' -> descending sample
    kurtosis of the columns; otherwise comma-separated indices."""
    if raw is None or raw == "none":
        return None
    if raw == "kurtosis":
        return kurtosis_order(data)
    try:
        order = tuple(int(tok) for tok in raw.split(","))
    except ValueError:
        raise ParameterError(
            f"ordering must be 'none', 'kurtosis', or comma-separated "
            f"indices, got {raw!r}")
    if sorted(order) != list(range(n)):
        raise ParameterError(
            f"ordering must be a permutation of 0..{n - 1}, got {order}")
    return order


def _matrix_frame(matrix: np.ndarray, row_label: str,
                  columns: tuple[str, ...]) -> pd.DataFrame:
    frame = pd.DataFrame(matrix, columns=list(columns))
    frame.insert(0, row_label, np.arange(1, matrix.shape[0] + 1))
    return frame


@click.group()
@click.version_option(version=__version__, prog_name="dcsvar")
def main() -> None:
    """Structural VAR identification via distance-covariance ICA."""


@main.command(name="simulate")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="YAML file with lag matrices, mixing matrix, shock laws.")
@click.option("--t", "t_obs", required=True, type=click.IntRange(min=10),
              help="Number of observations to keep after burn-in.")
@click.option("--seed", required=True, type=int)
@click.option("--burn-in", default=200, type=click.IntRange(min=0),
              show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def simulate_cmd(model_path, t_obs, seed, burn_in, out_dir):
    """Draw one sample path from a configured model (y.csv, shocks.csv)."""
    params = dict(model=model_path, t=t_obs, seed=seed, burn_in=burn_in,
                  out_dir=out_dir)

    def body(run: _Run):
        with open(model_path, encoding="utf-8") as fh:
            config = yaml.safe_load(fh)
        if not isinstance(config, dict):
            raise ParameterError(f"model file {model_path} must hold a mapping")
        model = model_from_dict(config)
        sim = simulate(model, t_obs, seed=seed, burn_in=burn_in)
        run.series("y.csv", sim.y)
        run.series("shocks.csv", sim.shocks)

    _guarded("simulate", params, out_dir, body)


@main.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--p", "order", required=True, type=click.IntRange(min=1),
              help="VAR lag order.")
@click.option("--q-cosines", default=0, type=click.IntRange(min=0),
              show_default=True,
              help="Remove this many low-frequency cosine terms first.")
@click.option("--exog", "exog_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="CSV of exogenous regressors entering every equation.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def estimate(input_path, order, q_cosines, exog_path, out_dir):
    """Least-squares VAR fit (coefficients.csv, residuals.csv)."""
    params = dict(input=input_path, p=order, q_cosines=q_cosines,
                  exog=exog_path, out_dir=out_dir)

    def body(run: _Run):
        data = read_csv(input_path)
        if q_cosines:
            data = low_frequency_detrend(data, q_cosines)
        exog = read_csv(exog_path) if exog_path else None
        fit = fit_var(data, order, exog=exog)
        rows = []
        for eq, name in enumerate(data.names):
            rows.append([name, "intercept", fit.intercept[eq]])
            for lag, matrix in enumerate(fit.lag_matrices, start=1):
                for j, src in enumerate(data.names):
                    rows.append([name, f"{src}.l{lag}", matrix[eq, j]])
            if exog is not None:
                for j, src in enumerate(exog.names):
                    rows.append([name, src, fit.exog_coefficients[eq, j]])
        run.csv("coefficients.csv",
                pd.DataFrame(rows, columns=["equation", "term", "value"]))
        run.series("residuals.csv", fit.residuals)
        run.json("summary.json", {
            "nobs": data.nobs,
            "order": order,
            "condition_number": fit.condition_number,
            "residual_covariance": fit.residual_cov,
        })

    _guarded("estimate", params, out_dir, body)


@main.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--p", "order", required=True, type=click.IntRange(min=1))
@click.option("--whitener", default="chol", show_default=True,
              type=click.Choice(sorted(_WHITENERS)))
@click.option("--ordering", default="none", show_default=True,
              help="'none', 'kurtosis', or comma-separated column indices "
                   "(Choleski whitener only).")
@click.option("--np", "n_permutations", default=199, show_default=True,
              type=click.IntRange(min=1))
@click.option("--beta", default=1.0, show_default=True,
              type=click.FloatRange(min=0, max=2, min_open=True,
                                    max_open=True))
@click.option("--q-cosines", default=0, type=click.IntRange(min=0),
              show_default=True)
@click.option("--restarts", default=8, show_default=True,
              type=click.IntRange(min=1))
@click.option("--seed", required=True, type=int)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def identify(input_path, order, whitener, ordering, n_permutations, beta,
             q_cosines, restarts, seed, out_dir):
    """Recover structural shocks: VAR fit, whitening, rotation search, and
    independence tests of both residuals and recovered shocks."""
    params = dict(input=input_path, p=order, whitener=whitener,
                  ordering=ordering, np=n_permutations, beta=beta,
                  q_cosines=q_cosines, restarts=restarts, seed=seed,
                  out_dir=out_dir)

    def body(run: _Run):
        data = read_csv(input_path)
        if q_cosines:
            data = low_frequency_detrend(data, q_cosines)
        fit = fit_var(data, order)
        residuals = fit.residuals
        if whitener == "chol":
            variant = CholeskiOrdered(
                _parse_ordering(ordering, residuals.nvar, residuals))
        else:
            if ordering != "none":
                raise ParameterError(
                    "--ordering applies only to the Choleski whitener")
            variant = _WHITENERS[whitener]()
        config = DistCovConfig(beta=beta)
        root = np.random.SeedSequence(seed)
        opt_seed, test_u, test_e = root.spawn(3)
        result = estimate_unmixing(
            residuals, variant, config=config,
            settings=OptimizerSettings(
                restarts=restarts,
                seed=int(opt_seed.generate_state(1)[0])))
        p_shocks = permutation_test(result.shocks, n_permutations,
                                    config=config, seed=test_u)
        p_resid = permutation_test(residuals, n_permutations,
                                   config=config, seed=test_e)
        names = tuple(result.shocks.names)
        run.csv("unmixing.csv",
                _matrix_frame(result.unmixing, "shock", data.names))
        run.csv("mixing.csv",
                _matrix_frame(result.mixing, "variable", names))
        run.series("shocks.csv", result.shocks)
        run.json("summary.json", {
            "kurtosis": list(result.kurtosis),
            "shock_scales": result.shock_scales,
            "objective_value": result.objective_value,
            "converged": result.report.converged,
            "evaluations": result.report.evaluations,
            "p_value_shocks": p_shocks.p_value,
            "p_value_residuals": p_resid.p_value,
            "statistic_shocks": p_shocks.statistic,
            "statistic_residuals": p_resid.statistic,
        })

    _guarded("identify", params, out_dir, body)


@main.command(name="test")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--np", "n_permutations", default=199, show_default=True,
              type=click.IntRange(min=1))
@click.option("--beta", default=1.0, show_default=True,
              type=click.FloatRange(min=0, max=2, min_open=True,
                                    max_open=True))
@click.option("--seed", required=True, type=int)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def test_cmd(input_path, n_permutations, beta, seed, out_dir):
    """Permutation test of mutual independence of the input columns."""
    params = dict(input=input_path, np=n_permutations, beta=beta, seed=seed,
                  out_dir=out_dir)

    def body(run: _Run):
        data = read_csv(input_path)
        result = permutation_test(data, n_permutations,
                                  config=DistCovConfig(beta=beta), seed=seed)
        run.json("test.json", {
            "statistic": result.statistic,
            "p_value": result.p_value,
            "n_permutations": result.n_permutations,
            "nobs": data.nobs,
            "columns": list(data.names),
        })

    _guarded("test", params, out_dir, body)


@main.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--p", "order", required=True, type=click.IntRange(min=1))
@click.option("--h", "horizons", required=True, type=click.IntRange(min=0),
              help="Largest response horizon (impact is h=1 in the output).")
@click.option("--ordering", default="none", show_default=True,
              help="Whitening order for the rotation search: 'none', "
                   "'kurtosis', or comma-separated indices.")
@click.option("--chol-ordering", default="none", show_default=True,
              help="Recursive ordering for the comparison column; the shock "
                   "is the first variable in this ordering.")
@click.option("--q-cosines", default=0, type=click.IntRange(min=0),
              show_default=True)
@click.option("--restarts", default=8, show_default=True,
              type=click.IntRange(min=1))
@click.option("--seed", required=True, type=int)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def irf(input_path, order, horizons, ordering, chol_ordering, q_cosines,
        restarts, seed, out_dir):
    """Impulse responses to the highest-kurtosis recovered shock, by VAR
    inversion, local projection, and a recursive benchmark (irf.csv)."""
    params = dict(input=input_path, p=order, h=horizons, ordering=ordering,
                  chol_ordering=chol_ordering, q_cosines=q_cosines,
                  restarts=restarts, seed=seed, out_dir=out_dir)

    def body(run: _Run):
        data = read_csv(input_path)
        if q_cosines:
            data = low_frequency_detrend(data, q_cosines)
        fit = fit_var(data, order)
        residuals = fit.residuals
        variant = CholeskiOrdered(
            _parse_ordering(ordering, residuals.nvar, residuals))
        result = estimate_unmixing(
            residuals, variant,
            settings=OptimizerSettings(restarts=restarts, seed=seed))
        var_tab = irf_var_implied(fit.lag_matrices, result.mixing, 0,
                                  horizons, names=data.names)
        lp_tab = irf_local_projection(data, result.shocks, 0, horizons,
                                      order)
        chol_order = _parse_ordering(chol_ordering, data.nvar, residuals)
        chol_tab = irf_choleski(fit.lag_matrices, fit.residual_cov, 0,
                                horizons,
                                ordering=chol_order, names=data.names)
        rows = []
        for j, name in enumerate(data.names):
            for h in range(horizons + 1):
                rows.append([name, h + 1, var_tab.responses[h, j],
                             lp_tab.responses[h, j], lp_tab.se[h, j],
                             chol_tab.responses[h, j]])
        run.csv("irf.csv", pd.DataFrame(
            rows, columns=["response", "h", "var", "lp", "lp.se", "chol"]))
        run.json("summary.json", {
            "kurtosis": list(result.kurtosis),
            "impact_column": result.mixing[:, 0],
            "shock_scales": result.shock_scales,
        })

    _guarded("irf", params, out_dir, body)


@main.command()
@click.option("--reps", required=True, type=click.IntRange(min=1))
@click.option("--seed", required=True, type=int)
@click.option("--t", "t_obs", default=400, show_default=True,
              type=click.IntRange(min=20))
@click.option("--np", "n_permutations", default=199, show_default=True,
              type=click.IntRange(min=1))
@click.option("--burn-in", default=200, show_default=True,
              type=click.IntRange(min=0))
@click.option("--cells", default=None,
              help="Comma-separated subset like 'NLT-HL,LT-LL' "
                   "(default: all four).")
@click.option("--components", default="panels,means", show_default=True,
              help="Comma-separated subset of {panels, means}.")
@click.option("--kurtosis-draws", default=10_000, show_default=True,
              type=click.IntRange(min=100))
@click.option("--workers", default=None, type=click.IntRange(min=1),
              help="Process count (default: DCSVAR_WORKERS or 1).")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def montecarlo(reps, seed, t_obs, n_permutations, burn_in, cells, components,
               kurtosis_draws, workers, out_dir):
    """Full simulation study: rejection-rate panels, recovery error,
    mean estimates, and the kurtosis-quantile reference table."""
    params = dict(reps=reps, seed=seed, t=t_obs, np=n_permutations,
                  burn_in=burn_in, cells=cells, components=components,
                  kurtosis_draws=kurtosis_draws, workers=workers,
                  out_dir=out_dir)

    def body(run: _Run):
        if cells is None:
            cell_list = CELLS
        else:
            cell_list = tuple(
                tuple(tok.split("-", 1)) for tok in cells.split(","))
        kwargs = dict(
            reps=reps, seed=seed, t_obs=t_obs,
            n_permutations=n_permutations, burn_in=burn_in,
            cells=cell_list,
            components=frozenset(t.strip() for t in components.split(",")),
        )
        if workers is not None:
            kwargs["workers"] = workers
        grid = ExperimentGrid(**kwargs)
        report = run_grid(grid)
        kurtosis = kurtosis_quantile_table(draws=kurtosis_draws, seed=seed)
        run.written.extend(write_report(report, run.dir, kurtosis=kurtosis))
        # fold the study's own manifest into this run's manifest
        run.extra["report"] = json.loads(
            (run.dir / "manifest.json").read_text(encoding="utf-8"))

    _guarded("montecarlo", params, out_dir, body)


@main.command(name="kurtosis-table")
@click.option("--t", "t_values", default="500,1000", show_default=True,
              help="Comma-separated sample lengths.")
@click.option("--draws", default=10_000, show_default=True,
              type=click.IntRange(min=100))
@click.option("--tail-index", default=1.0, show_default=True,
              type=click.FloatRange(min=0, min_open=True))
@click.option("--seed", required=True, type=int)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def kurtosis_table(t_values, draws, tail_index, seed, out_dir):
    """Quantiles of sample kurtosis for IID Pareto samples."""
    params = dict(t=t_values, draws=draws, tail_index=tail_index, seed=seed,
                  out_dir=out_dir)

    def body(run: _Run):
        lengths = tuple(int(tok) for tok in t_values.split(","))
        table = kurtosis_quantile_table(lengths, draws=draws,
                                        tail_index=tail_index, seed=seed)
        run.csv("kurtosis_quantiles.csv", table)

    _guarded("kurtosis-table", params, out_dir, body)


if __name__ == "__main__":
    main()
