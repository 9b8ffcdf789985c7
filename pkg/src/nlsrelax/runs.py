"""Experiment engine: turn a validated configuration into integrations,
CSV tables and metadata files."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import hyperbolic as hyp
from . import nls
from . import operators as op
from . import relaxation as rx
from .config import RunConfig
from .integrators import RunRecord, integrate, plain_step
from .problems import ProblemSpec, fit_growth_rate, get_problem, l2_error
from .tableaux import ImexTableau, get_tableau

FLOAT_FORMAT = "{:.17g}"


def _fmt(x: float) -> str:
    return FLOAT_FORMAT.format(float(x))


def build_operators(config: RunConfig, problem: ProblemSpec) -> op.OperatorSet:
    kind = config.operator_kind
    n = config.operator_n
    order = config.operator_order
    xl, xr = problem.x_left, problem.x_right
    if kind == "fourier":
        return op.make_fourier(n, xl, xr)
    if kind == "central":
        return op.make_central_fd(order, n, xl, xr)
    if kind == "bounded":
        return op.make_bounded_fd_sbp(order, n, xl, xr)
    if kind == "upwind":
        return op.make_upwind_fd(order, n, xl, xr)
    raise ValueError(f"unknown operator kind {kind!r}")


@dataclass
class RunSetup:
    """Everything needed to integrate one configuration."""

    config: RunConfig
    problem: ProblemSpec
    ops: op.OperatorSet
    tableau: ImexTableau
    ode: object
    y0: np.ndarray
    invariants: rx.InvariantPair
    functionals: dict[str, Callable[[np.ndarray], float]]
    beta: float

    @property
    def n(self) -> int:
        return self.ops.n

    def complex_field(self, y: np.ndarray) -> np.ndarray:
        n = self.n
        return y[:n] + 1j * y[n : 2 * n]

    def step_function(self):
        mode = self.config.relaxation
        if mode == "off":
            return plain_step
        rc = self.config.relaxation_config()
        if mode == "energy":
            return rx.standard_relaxation_step(self.invariants, rc)
        return rx.quadratic_preserving_step(self.invariants, rc)


def make_setup(config: RunConfig) -> RunSetup:
    problem = get_problem(config.problem)
    beta = problem.beta if config.beta_override is None else config.beta_override
    ops = build_operators(config, problem)
    tableau = get_tableau(config.tableau)
    u0 = problem.initial(ops.grid.nodes)

    if config.equation == "nls":
        params = nls.NlsParams(beta=beta, ops=ops)
        state0 = nls.NlsState.from_complex(u0)
        y0 = state0.to_array()
        ode = nls.nls_split_ode(params)

        def mass_fn(y):
            return nls.mass(params, nls.NlsState(y[: ops.n], y[ops.n :]))

        def energy_fn(y):
            return nls.energy(params, nls.NlsState(y[: ops.n], y[ops.n :]))

        def naive_fn(y):
            return nls.naive_energy(params, nls.NlsState(y[: ops.n], y[ops.n :]))

        invariants = rx.InvariantPair(
            energy=energy_fn,
            mass=mass_fn,
            project_mass=rx.project_mass_sphere(ops.mass_diag, 2),
        )
        functionals = {"mass": mass_fn, "energy": energy_fn, "naive_energy": naive_fn}
    else:
        params = hyp.HypParams(beta=beta, tau=config.tau, ops=ops)
        state0 = hyp.well_prepared_init(params, np.real(u0), np.imag(u0))
        y0 = state0.to_array()
        ode = hyp.hyp_split_ode(params)

        def mass_fn(y):
            return hyp.hyp_mass(params, hyp.HypState.from_array(y))

        def energy_fn(y):
            return hyp.hyp_energy(params, hyp.HypState.from_array(y))

        invariants = rx.InvariantPair(
            energy=energy_fn,
            mass=mass_fn,
            project_mass=hyp.project_mass_ellipsoid(params),
        )
        functionals = {"mass": mass_fn, "energy": energy_fn}

    return RunSetup(
        config=config,
        problem=problem,
        ops=ops,
        tableau=tableau,
        ode=ode,
        y0=y0,
        invariants=invariants,
        functionals=functionals,
        beta=beta,
    )


@dataclass
class RunResult:
    setup: RunSetup
    y_final: np.ndarray
    record: RunRecord
    final_error: Optional[float] = None

    @property
    def final_time(self) -> float:
        return self.setup.config.t_end


def execute_run(config: RunConfig, setup: Optional[RunSetup] = None) -> RunResult:
    setup = setup or make_setup(config)
    start = time.perf_counter()
    y, record = integrate(
        setup.ode,
        setup.tableau,
        setup.y0,
        (0.0, config.t_end),
        config.dt,
        step=setup.step_function(),
        functionals=setup.functionals,
        snapshot_times=np.asarray(config.snapshot_times) if config.snapshot_times else None,
    )
    record.wall_time = time.perf_counter() - start
    error = None
    if setup.problem.has_exact:
        u_ref = setup.problem.exact(setup.ops.grid.nodes, config.t_end)
        error = l2_error(setup.ops, setup.complex_field(y), u_ref)
    return RunResult(setup=setup, y_final=y, record=record, final_error=error)


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------


def write_invariants_csv(path: Path, result: RunResult):
    record = result.record
    names = list(result.setup.functionals)
    header = ["step", "t", "gamma"] + names
    lines = [",".join(header)]
    # One row per accepted step; the pre-step state is echoed in metadata.
    for step in range(1, len(record.times)):
        row = [str(step), _fmt(record.times[step]), _fmt(record.gammas[step - 1])]
        row += [_fmt(record.functionals[name][step]) for name in names]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def write_snapshots_csv(path: Path, result: RunResult):
    if not result.record.snapshots:
        return
    n = result.setup.n
    fields = ["v", "w"] if result.setup.config.equation == "nls" else ["v", "w", "nu", "omega"]
    header = ["t"]
    for j in range(n):
        header += [f"{name}[{j}]" for name in fields]
    lines = [",".join(header)]
    for t, y in result.record.snapshots:
        blocks = [y[k * n : (k + 1) * n] for k in range(len(fields))]
        interleaved = np.column_stack(blocks).ravel()
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in interleaved]))
    path.write_text("\n".join(lines) + "\n")


def write_metadata(path: Path, result: RunResult):
    record = result.record
    config = result.setup.config
    initial = {name: values[0] for name, values in record.functionals.items()}
    gammas = np.asarray(record.gammas)
    meta = {
        "config": {k: v for k, v in vars(config).items() if v not in (None, [])},
        "steps": record.steps,
        "wall_time_seconds": record.wall_time,
        "initial_invariants": initial,
        "final_error": result.final_error,
        "gamma_minus_one_max": float(np.max(np.abs(gammas - 1.0))) if gammas.size else 0.0,
    }
    path.write_text(json.dumps(meta, indent=2, default=float) + "\n")


def write_run_outputs(result: RunResult, output_dir: str | Path):
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    write_invariants_csv(output_dir / "invariants.csv", result)
    write_snapshots_csv(output_dir / "snapshots.csv", result)
    write_metadata(output_dir / "metadata.json", result)


# ---------------------------------------------------------------------------
# reference solutions
# ---------------------------------------------------------------------------


class ReferenceSolution:
    """Exact solution when available, otherwise a finely resolved run.

    The numerical fallback advances a high-order integration lazily to
    each requested time (requests must come in nondecreasing order) and
    lands on the targets exactly, so relaxed runs with their slightly
    irregular step sequence can be compared at their actual times.
    """

    def __init__(self, setup: RunSetup, dt: float, tableau_name: str = "kc54"):
        self.setup = setup
        self.dt = dt
        self.tableau = get_tableau(tableau_name)
        self._t = 0.0
        self._y = setup.y0.copy()

    def u_at(self, t: float) -> np.ndarray:
        setup = self.setup
        if setup.problem.has_exact:
            return setup.problem.exact(setup.ops.grid.nodes, t)
        if t < self._t - 1e-12:
            raise ValueError("reference times must be requested in increasing order")
        if t > self._t + 1e-12:
            self._y, _ = integrate(
                setup.ode, self.tableau, self._y, (self._t, t), self.dt
            )
            self._t = t
        return setup.complex_field(self._y)


# ---------------------------------------------------------------------------
# convergence sweeps
# ---------------------------------------------------------------------------


@dataclass
class SweepRow:
    resolution: float
    error: float
    observed_order: float


def _observed_orders(resolutions, errors) -> list[float]:
    orders = [float("nan")]
    for i in range(1, len(errors)):
        ratio_h = resolutions[i] / resolutions[i - 1]
        if errors[i] <= 0 or errors[i - 1] <= 0 or ratio_h == 1.0:
            orders.append(float("nan"))
        else:
            orders.append(float(np.log(errors[i] / errors[i - 1]) / np.log(ratio_h)))
    return orders


def run_convergence(config: RunConfig, threads: int = 1) -> list[SweepRow]:
    if config.sweep_axis is None or len(config.sweep_values) < 3:
        raise ValueError("convergence sweeps need sweep_axis and at least 3 sweep_values")
    values = list(config.sweep_values)

    base_setup = make_setup(config)
    reference = None
    if not base_setup.problem.has_exact:
        ref_dt = config.reference_dt or min(min(values), config.dt) / 20.0
        reference = ReferenceSolution(make_setup(config), ref_dt)
        u_ref = reference.u_at(config.t_end)

    def error_for(value: float) -> float:
        if config.sweep_axis == "time":
            run_config = replace(config, dt=value)
        else:
            run_config = replace(config, operator_n=int(value))
        result = execute_run(run_config)
        if result.final_error is not None:
            return result.final_error
        if config.sweep_axis == "space":
            raise ValueError("spatial sweeps need a problem with an exact solution")
        return l2_error(
            result.setup.ops, result.setup.complex_field(result.y_final), u_ref
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = list(pool.map(error_for, values))
    else:
        errors = [error_for(v) for v in values]

    if config.sweep_axis == "time":
        resolutions = values
    else:
        resolutions = [
            (base_setup.problem.x_right - base_setup.problem.x_left) / v for v in values
        ]
    orders = _observed_orders(resolutions, errors)
    return [SweepRow(r, e, o) for r, e, o in zip(resolutions, errors, orders)]


def write_convergence_csv(path: Path, rows: list[SweepRow]):
    lines = ["resolution,error,observed_order"]
    for row in rows:
        lines.append(
            ",".join([_fmt(row.resolution), _fmt(row.error), _fmt(row.observed_order)])
        )
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# error growth
# ---------------------------------------------------------------------------


@dataclass
class GrowthReport:
    sample_times: list[float]
    baseline_errors: list[float]
    relaxed_errors: list[float]
    baseline_slope: float
    relaxed_slope: float
    density_errors: Optional[list[float]] = None
    density_slope: Optional[float] = None


def _snapshot_errors(result: RunResult, reference_fields: dict[float, np.ndarray]):
    times, errors, density_errors = [], [], []
    setup = result.setup
    for t, y in result.record.snapshots:
        u = setup.complex_field(y)
        u_ref = reference_fields[t]
        times.append(t)
        errors.append(l2_error(setup.ops, u, u_ref))
        rho = np.abs(u) ** 2
        rho_ref = np.abs(u_ref) ** 2
        density_errors.append(l2_error(setup.ops, rho, rho_ref))
    return times, errors, density_errors


def run_error_growth(config: RunConfig) -> GrowthReport:
    if not config.sample_times:
        raise ValueError("error-growth runs need sample_times")
    samples = sorted(config.sample_times)
    run_config = replace(config, snapshot_times=samples, t_end=max(samples))

    relaxation = config.relaxation if config.relaxation != "off" else "mass_energy"
    baseline = execute_run(replace(run_config, relaxation="off"))
    relaxed = execute_run(replace(run_config, relaxation=relaxation))

    # One shared reference pass over the union of the two runs' actual
    # snapshot times (they differ slightly because relaxed steps are
    # rescaled by gamma).
    ref_dt = config.reference_dt or config.dt / 20.0
    reference = ReferenceSolution(make_setup(run_config), ref_dt)
    needed = sorted(
        {t for t, _ in baseline.record.snapshots}
        | {t for t, _ in relaxed.record.snapshots}
    )
    reference_fields = {t: reference.u_at(t) for t in needed}

    t_b, e_b, rho_b = _snapshot_errors(baseline, reference_fields)
    t_r, e_r, _ = _snapshot_errors(relaxed, reference_fields)

    try:
        baseline_slope = fit_growth_rate(np.array(t_b), np.array(e_b))
        relaxed_slope = fit_growth_rate(np.array(t_r), np.array(e_r))
        density_slope = fit_growth_rate(np.array(t_b), np.array(rho_b))
    except ValueError:
        baseline_slope = relaxed_slope = density_slope = float("nan")
    return GrowthReport(
        sample_times=t_b,
        baseline_errors=e_b,
        relaxed_errors=e_r,
        baseline_slope=baseline_slope,
        relaxed_slope=relaxed_slope,
        density_errors=rho_b,
        density_slope=density_slope,
    )


def write_growth_csv(path: Path, report: GrowthReport):
    lines = ["t,baseline_error,relaxed_error,baseline_density_error"]
    for i, t in enumerate(report.sample_times):
        lines.append(
            ",".join(
                [
                    _fmt(t),
                    _fmt(report.baseline_errors[i]),
                    _fmt(report.relaxed_errors[i]),
                    _fmt(report.density_errors[i]),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# benchmarking
# ---------------------------------------------------------------------------


@dataclass
class BenchRow:
    label: str
    runtime_seconds: float
    peak_rss_kb: int
    final_error: Optional[float]


def run_bench(configs: list[tuple[str, RunConfig]], repeats: int = 3) -> list[BenchRow]:
    import resource

    rows = []
    for label, config in configs:
        best = float("inf")
        error = None
        # Warm run builds caches; take the minimum over timed repeats.
        setup = make_setup(config)
        execute_run(config, setup=setup)
        for _ in range(repeats):
            result = execute_run(config, setup=setup)
            best = min(best, result.record.wall_time)
            error = result.final_error
        peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
        rows.append(BenchRow(label, best, peak, error))
    return rows


def write_bench_csv(path: Path, rows: list[BenchRow]):
    lines = ["label,runtime_seconds,peak_rss_kb,final_error"]
    for row in rows:
        err = _fmt(row.final_error) if row.final_error is not None else "nan"
        lines.append(",".join([row.label, _fmt(row.runtime_seconds), str(row.peak_rss_kb), err]))
    path.write_text("\n".join(lines) + "\n")
