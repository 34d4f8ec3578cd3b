"""Batch experiment runner.

Subcommands
-----------
simulate   integrate a configured model and write the trajectory
estimate   fit parameters to a trajectory CSV, constant or per-day
sweep      randomized recovery sweep over a parameter box
covid      case counts to compartments, windowed beta, re-simulation
reynolds   Reynolds identification from snapshots or a manufactured field

Every subcommand reads a flat key=value config (--config), writes CSV and
JSON files into --out, and is deterministic for a given config and seed.
Wall-clock timestamps appear only in the sidecar run.log, never in result
files, so reruns produce byte-identical bodies.

Exit codes: 0 success, 2 usage or config error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from .config import get_float, get_floats, get_int, get_ints, get_str, load_config
from .differentiation import TimeSeries
from .epidemic import FixedRates, build_sir_states, load_who_csv
from .errors import (
    ConfigError,
    DimensionMismatch,
    EstimationError,
    MissingColumn,
    MissingField,
    NegativeCompartment,
    NonMonotonicDates,
    NonPhysical,
    NonPositivePopulation,
    ParseError,
    ShapeMismatch,
    TooFewPoints,
)
from .estimation import (
    EstimationWindow,
    NoiseSpec,
    SweepSpec,
    add_noise,
    estimate_constant,
    estimate_time_varying,
    run_sweep,
)
from .integrator import (
    ConstantSchedule,
    PiecewiseSchedule,
    SimulationConfig,
    SinusoidalBetaSchedule,
    simulate,
)
from .models import get_model
from .regression import ParameterPartition
from .vorticity import (
    default_wake_region,
    estimate_inverse_re,
    estimate_reynolds,
    load_snapshot_stack,
    manufactured_diffusion_stack,
)

DATA_ERRORS = (
    ParseError,
    MissingColumn,
    NegativeCompartment,
    NonMonotonicDates,
    DimensionMismatch,
    MissingField,
)


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])


def _jsonable(value):
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(_jsonable(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")


def _ensure_out(directory) -> str:
    os.makedirs(directory, exist_ok=True)
    return directory


def _resolve_seed(args, entries: dict, key: str) -> int:
    if args.seed is not None:
        return args.seed
    return get_int(entries, key, 0)


def _model_from_config(entries: dict):
    name = get_str(entries, "model.name")
    population = get_float(entries, "model.population", None)
    try:
        return get_model(name, population)
    except (ShapeMismatch, NonPositivePopulation) as exc:
        raise ConfigError(str(exc)) from None


def _schedule_from_config(entries: dict, model, allow_absent: bool = False):
    kind = get_str(entries, "schedule.type", "constant")
    if kind == "constant":
        if allow_absent and "schedule.omega" not in entries:
            return ConstantSchedule(np.zeros(model.n_params))
        omega = get_floats(entries, "schedule.omega")
        if len(omega) != model.n_params:
            raise ConfigError(
                f"schedule.omega has {len(omega)} values, "
                f"model {model.name} has {model.n_params} parameters"
            )
        return ConstantSchedule(np.asarray(omega))
    if kind == "sinusoidal":
        base = get_floats(entries, "schedule.base")
        if len(base) != model.n_params:
            raise ConfigError(
                f"schedule.base has {len(base)} values, "
                f"model {model.name} has {model.n_params} parameters"
            )
        name = get_str(entries, "schedule.parameter", model.parameter_names[0])
        try:
            index = model.parameter_index(name)
        except EstimationError:
            raise ConfigError(f"unknown schedule.parameter {name!r}") from None
        return SinusoidalBetaSchedule(
            np.asarray(base),
            mean=get_float(entries, "schedule.mean"),
            amplitude=get_float(entries, "schedule.amplitude"),
            period=get_float(entries, "schedule.period"),
            index=index,
        )
    raise ConfigError(f"unknown schedule.type {kind!r}")


def _sim_config_from(entries: dict, model, allow_default_schedule: bool = False):
    t0 = get_float(entries, "sim.t0", 0.0)
    t_end = get_float(entries, "sim.t_end")
    if "sim.points" in entries:
        points = get_int(entries, "sim.points")
        if points < 2:
            raise ConfigError("sim.points must be at least 2")
        step = (t_end - t0) / (points - 1)
    else:
        step = get_float(entries, "sim.step")
    x0 = np.asarray(get_floats(entries, "sim.x0"), dtype=float)
    if len(x0) != model.n_states:
        raise ConfigError(
            f"sim.x0 has {len(x0)} values, model {model.name} has "
            f"{model.n_states} states"
        )
    schedule = _schedule_from_config(entries, model, allow_absent=allow_default_schedule)
    try:
        return SimulationConfig(
            t0=t0, t_end=t_end, step=step, initial_state=x0, schedule=schedule
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _partition_from_config(entries: dict, model):
    known = {}
    for key, value in entries.items():
        if not key.startswith("known."):
            continue
        name = key[len("known."):]
        try:
            index = model.parameter_index(name)
        except EstimationError:
            raise ConfigError(f"unknown parameter {name!r} in {key}") from None
        try:
            known[index] = float(value)
        except ValueError:
            raise ConfigError(f"{key} is not a number: {value!r}") from None
    if not known:
        return None
    return ParameterPartition.from_known(model.n_params, known)


def _series_rows(series: TimeSeries):
    return [[t, *row] for t, row in zip(series.times, series.states)]


def _read_series_csv(path, model) -> TimeSeries:
    expected = ["t", *model.state_names]
    try:
        handle = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot read data file: {exc}") from None
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        if [h.strip() for h in header] != expected:
            raise ParseError(
                f"{path}: columns {header} do not match model columns {expected}"
            )
        rows = []
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise ParseError(
                    f"{path}:{line_number}: expected {len(expected)} fields"
                )
            try:
                rows.append([float(value) for value in row])
            except ValueError:
                raise ParseError(
                    f"{path}:{line_number}: non-numeric value"
                ) from None
    if len(rows) < 2:
        raise ParseError(f"{path}: need at least 2 data rows")
    data = np.array(rows)
    try:
        return TimeSeries(data[:, 0], data[:, 1:])
    except (ValueError, ShapeMismatch) as exc:
        raise ParseError(f"{path}: {exc}") from None


def _read_truth_csv(path, model) -> np.ndarray:
    expected = list(model.parameter_names)
    try:
        handle = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot read truth file: {exc}") from None
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty truth file")
        if [h.strip() for h in header] != expected:
            raise ParseError(
                f"{path}: truth columns {header} do not match {expected}"
            )
        row = next(reader, None)
        if row is None or len(row) != len(expected):
            raise ParseError(
                f"{path}: need one row of {len(expected)} parameter values"
            )
        try:
            return np.array([float(value) for value in row])
        except ValueError:
            raise ParseError(f"{path}: non-numeric truth value") from None


def cmd_simulate(args) -> list:
    entries = load_config(args.config)
    model = _model_from_config(entries)
    sim_config = _sim_config_from(entries, model)
    series = simulate(model, sim_config)
    epsilon = get_float(entries, "noise.epsilon", 0.0)
    if epsilon > 0:
        series = add_noise(
            series, NoiseSpec(epsilon, _resolve_seed(args, entries, "noise.seed"))
        )
    out = _ensure_out(args.out)
    _write_csv(
        os.path.join(out, "trajectory.csv"),
        ["t", *model.state_names],
        _series_rows(series),
    )
    notes = [f"rows={len(series)}"]
    if model.population is not None:
        totals = series.states.sum(axis=1)
        drift = float(np.max(np.abs(totals - totals[0])))
        print(f"population conservation: max drift {drift:.3e} over {len(series)} rows")
        notes.append(f"conservation_drift={drift!r}")
    return notes


def cmd_estimate(args) -> list:
    entries = load_config(args.config)
    model = _model_from_config(entries)
    series = _read_series_csv(args.data, model)
    truth = _read_truth_csv(args.truth, model) if args.truth else None
    mode = get_str(entries, "estimate.mode", "constant")
    ridge = get_float(entries, "estimate.ridge", 0.0)
    normalize = bool(get_int(entries, "estimate.normalize", 0))
    partition = _partition_from_config(entries, model)
    out = _ensure_out(args.out)
    header = [*model.parameter_names, "residual_norm", "condition"]
    summary = {"model": model.name, "mode": mode}

    if mode == "constant":
        if "estimate.start" in entries or "estimate.stop" in entries:
            window = EstimationWindow.span(
                get_int(entries, "estimate.start"), get_int(entries, "estimate.stop")
            )
        else:
            window = None
        estimate = estimate_constant(
            model,
            series,
            indices=window,
            partition=partition,
            ridge_lambda=ridge,
            derivative=get_str(entries, "estimate.derivative", "interior"),
            normalize=normalize,
        )
        _write_csv(
            os.path.join(out, "estimates.csv"),
            header,
            [[*estimate.values, estimate.residual_norm, estimate.condition_estimate]],
        )
        summary["parameters"] = dict(zip(model.parameter_names, estimate.values))
        summary["residual_norm"] = estimate.residual_norm
        summary["condition"] = estimate.condition_estimate
        if truth is not None:
            errors = {}
            for name, value, true_value in zip(
                model.parameter_names, estimate.values, truth
            ):
                errors[name] = (
                    abs(value - true_value) / abs(true_value)
                    if true_value != 0
                    else None
                )
            summary["relative_errors"] = errors
            valid = [v for v in errors.values() if v is not None]
            summary["max_relative_error"] = max(valid) if valid else None
        notes = ["mode=constant"]
    elif mode == "varying":
        width = get_int(entries, "estimate.window", 14)
        results = estimate_time_varying(
            model,
            series,
            width,
            partition=partition,
            ridge_lambda=ridge,
            normalize=normalize,
        )
        _write_csv(
            os.path.join(out, "estimates.csv"),
            ["t", *header],
            [
                [t, *est.values, est.residual_norm, est.condition_estimate]
                for t, est in results
            ],
        )
        summary["window"] = width
        summary["estimates"] = len(results)
        if truth is not None and results:
            values = np.array([est.values for _, est in results])
            errors = {}
            for k, name in enumerate(model.parameter_names):
                if truth[k] == 0:
                    errors[name] = None
                else:
                    errors[name] = float(
                        np.mean(np.abs(values[:, k] - truth[k]) / abs(truth[k]))
                    )
            summary["mean_relative_errors"] = errors
        notes = [f"mode=varying estimates={len(results)}"]
    else:
        raise ConfigError(f"unknown estimate.mode {mode!r}")

    _write_json(os.path.join(out, "summary.json"), summary)
    return notes


def cmd_sweep(args) -> list:
    entries = load_config(args.config)
    model = _model_from_config(entries)
    sim_config = _sim_config_from(entries, model, allow_default_schedule=True)
    flat = get_floats(entries, "sweep.domain")
    if len(flat) % 2 != 0:
        raise ConfigError("sweep.domain needs lo,hi pairs")
    domain = tuple(
        (flat[2 * k], flat[2 * k + 1]) for k in range(len(flat) // 2)
    )
    partition = _partition_from_config(entries, model)
    if partition is None:
        partition = ParameterPartition.all_unknown(model.n_params)
    try:
        spec = SweepSpec(
            domain=domain,
            sample_count=get_int(entries, "sweep.samples"),
            fixed=partition,
            seed=_resolve_seed(args, entries, "sweep.seed"),
        )
    except (ValueError, ShapeMismatch) as exc:
        raise ConfigError(str(exc)) from None
    normalized = bool(get_int(entries, "sweep.normalized", 0))
    workers = args.workers or get_int(entries, "sweep.workers", 1)
    result = run_sweep(
        model,
        spec,
        sim_config,
        derivative=get_str(entries, "sweep.derivative", "interior"),
        with_normalized=normalized,
        workers=workers,
    )
    out = _ensure_out(args.out)
    failed = dict(result.failures)
    header = ["index", "max_rel_error", "mean_rel_error"]
    if normalized:
        header += ["max_rel_error_normalizing", "mean_rel_error_normalizing"]
    header.append("status")
    rows = []
    for i in range(spec.sample_count):
        row = [i, result.max_errors[i], result.mean_errors[i]]
        if normalized:
            row += [result.max_errors_normalized[i], result.mean_errors_normalized[i]]
        row.append("failed" if i in failed else "ok")
        rows.append(row)
    _write_csv(os.path.join(out, "draws.csv"), header, rows)
    name_map = {
        "max": "max",
        "mean": "mean",
        "max_normalized": "max_normalizing",
        "mean_normalized": "mean_normalizing",
    }
    fractions = {
        name_map[stat]: {repr(thr): frac for thr, frac in table.items()}
        for stat, table in result.threshold_table().items()
    }
    _write_json(
        os.path.join(out, "fractions.json"),
        {
            "samples": spec.sample_count,
            "failures": [[index, reason] for index, reason in result.failures],
            "fraction_below": fractions,
        },
    )
    return [f"samples={spec.sample_count}", f"failures={len(result.failures)}"]


def cmd_covid(args) -> list:
    entries = load_config(args.config)
    population = get_float(entries, "model.population")
    gamma = get_float(entries, "covid.gamma", 1.0 / 9.0)
    width = get_int(entries, "covid.window", 14)
    ridge = get_float(entries, "covid.ridge", 0.0)
    raw = load_who_csv(args.data)
    series = build_sir_states(raw, population, FixedRates(gamma1=gamma))
    model = get_model("sir", population)
    out = _ensure_out(args.out)
    _write_csv(
        os.path.join(out, "states.csv"),
        ["t", *model.state_names],
        _series_rows(series),
    )
    partition = ParameterPartition.from_known(
        model.n_params, {model.parameter_index("gamma"): gamma}
    )
    results = estimate_time_varying(
        model, series, width, partition=partition, ridge_lambda=ridge
    )
    if not results:
        raise TooFewPoints(
            f"{len(series)} days of data give no full {width}-day window"
        )
    beta_index = model.parameter_index("beta")
    _write_csv(
        os.path.join(out, "beta.csv"),
        ["t", "beta", "residual_norm", "condition"],
        [
            [t, est.values[beta_index], est.residual_norm, est.condition_estimate]
            for t, est in results
        ],
    )
    first_day = results[0][0]
    schedule = PiecewiseSchedule(
        [t for t, _ in results], [est.values for _, est in results]
    )
    start_index = int(round(first_day))
    resim = simulate(
        model,
        SimulationConfig(
            t0=first_day,
            t_end=float(series.times[-1]),
            step=1.0,
            initial_state=series.states[start_index],
            schedule=schedule,
        ),
    )
    infected = model.state_names.index("I")
    data_infected = series.states[start_index:, infected]
    resim_infected = resim.states[:, infected]
    with np.errstate(divide="ignore", invalid="ignore"):
        deviation = np.where(
            data_infected > 0,
            np.abs(resim_infected - data_infected) / data_infected,
            np.nan,
        )
    _write_csv(
        os.path.join(out, "resim.csv"),
        ["t", "infected_data", "infected_resim", "rel_deviation"],
        [
            [t, d, r, e]
            for t, d, r, e in zip(resim.times, data_infected, resim_infected, deviation)
        ],
    )
    notes = [f"estimates={len(results)}", f"resim_rows={len(resim)}"]
    if np.any(np.isfinite(deviation)):
        notes.append(f"resim_max_rel={float(np.nanmax(deviation))!r}")
        notes.append(f"resim_mean_rel={float(np.nanmean(deviation))!r}")
    return notes


def cmd_reynolds(args) -> list:
    entries = load_config(args.config) if args.config else {}
    if args.manifest and args.manufactured is not None:
        raise ConfigError("provide either --manifest or --manufactured, not both")
    if args.manifest:
        stack = load_snapshot_stack(args.manifest)
        target = get_float(entries, "reynolds.target", 100.0)
        source = "snapshots"
    elif args.manufactured is not None:
        nu = args.manufactured
        if nu <= 0:
            raise ConfigError("--manufactured viscosity must be positive")
        stack = manufactured_diffusion_stack(
            nu,
            get_int(entries, "reynolds.nx", 129),
            get_int(entries, "reynolds.ny", 129),
            get_int(entries, "reynolds.snapshots", 51),
            get_float(entries, "reynolds.dt", 0.05),
        )
        target = 1.0 / nu
        source = "manufactured"
    else:
        raise ConfigError("provide --manifest PATH or --manufactured NU")
    repeats = get_int(entries, "reynolds.repeats", 20)
    if repeats < 1:
        raise ConfigError("reynolds.repeats must be at least 1")
    counts = get_ints(entries, "reynolds.counts", [4, 8, 16, 32, 64])
    ridge = get_float(entries, "reynolds.ridge", 1e-6)
    seed = _resolve_seed(args, entries, "reynolds.seed")
    region = get_floats(entries, "reynolds.region", None)
    if region is None:
        if stack.cylinder_center is not None and stack.diameter is not None:
            region = default_wake_region(stack)
        else:
            region = (
                0.0,
                (stack.nx - 1) * stack.dx,
                0.0,
                (stack.ny - 1) * stack.dy,
            )
    elif len(region) != 4:
        raise ConfigError("reynolds.region needs x_lo,x_hi,y_lo,y_hi")
    rows = []
    for method, lam in (("plain", 0.0), ("ridge", ridge)):
        for count in counts:
            try:
                est = estimate_reynolds(
                    stack, region, [count], repeats=repeats, ridge_lambda=lam, seed=seed
                )[0]
                rows.append(
                    [
                        method,
                        count,
                        est.re,
                        float(np.std(est.per_seed)),
                        est.inverse_re,
                        abs(est.re - target) / target,
                        "ok",
                    ]
                )
            except NonPhysical:
                rows.append(
                    [method, count, np.nan, np.nan, np.nan, np.nan, "nonphysical"]
                )
    out = _ensure_out(args.out)
    _write_csv(
        os.path.join(out, "convergence.csv"),
        ["method", "sensors", "mean_re", "re_spread", "mean_inverse_re", "rel_error", "status"],
        rows,
    )
    full_field = {}
    for method, lam in (("plain", 0.0), ("ridge", ridge)):
        inverse = estimate_inverse_re(stack, None, lam)
        full_field[method] = {
            "inverse_re": inverse,
            "re": 1.0 / inverse,
            "relative_error": abs(1.0 / inverse - target) / target,
        }
    _write_json(
        os.path.join(out, "summary.json"),
        {
            "source": source,
            "target_re": target,
            "full_field": full_field,
            "curl_rms": stack.curl_rms,
        },
    )
    return [f"source={source}", f"counts={','.join(str(c) for c in counts)}"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="artifact",
        description="Closed-form parameter estimation for parameter-linear dynamical systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def common(p, config_required: bool = True):
        p.add_argument(
            "--config", required=config_required, help="key=value run configuration"
        )
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = sub.add_parser("simulate", help="integrate a configured model")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="fit parameters to a trajectory CSV")
    common(p)
    p.add_argument("--data", required=True, help="trajectory CSV (t plus state columns)")
    p.add_argument("--truth", default=None, help="one-row CSV of true parameters")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="randomized recovery sweep over a parameter box")
    common(p)
    p.add_argument("--workers", type=int, default=None, help="parallel draw workers")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("covid", help="case counts to compartments, beta(t), re-simulation")
    common(p)
    p.add_argument("--data", required=True, help="daily case CSV")
    p.set_defaults(func=cmd_covid)

    p = sub.add_parser("reynolds", help="Reynolds identification from snapshots")
    common(p, config_required=False)
    p.add_argument("--manifest", default=None, help="snapshot manifest path")
    p.add_argument(
        "--manufactured",
        type=float,
        default=None,
        metavar="NU",
        help="use the analytic decaying field with viscosity NU",
    )
    p.set_defaults(func=cmd_reynolds)
    return parser


def _write_run_log(directory, command: str, stamp: str, elapsed: float, notes) -> None:
    _ensure_out(directory)
    lines = [
        f"started={stamp}",
        f"command={command}",
        f"elapsed_seconds={elapsed:.3f}",
        *notes,
    ]
    with open(os.path.join(directory, "run.log"), "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _fail(code: int, exc: BaseException) -> int:
    print(f"error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    started = time.perf_counter()
    try:
        notes = args.func(args) or []
    except ConfigError as exc:
        return _fail(2, exc)
    except DATA_ERRORS as exc:
        return _fail(3, exc)
    except OSError as exc:
        return _fail(3, exc)
    except ValueError as exc:
        return _fail(2, exc)
    except EstimationError as exc:
        return _fail(4, exc)
    _write_run_log(args.out, args.command, stamp, time.perf_counter() - started, notes)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
