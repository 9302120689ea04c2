"""
Experiment layer: built-in experiments, simulation-versus-approximation
comparisons, the difference tables and their averaged summary.
"""
import numpy as np
import pandas as pd

from classes.class_errors import DomainError
from classes.class_moments import SolverConfig
from classes.class_profile import TIME_TOLERANCE
from classes.class_report import DIFFERENCE_COLUMNS, ComparisonReport, ExperimentConfig
from resources import parameters
from resources.experiments import LINGERING_EXPERIMENTS, TABLE_METHOD_LABELS
from tools import simulator, solvers

METHODS = ("adjusted", "classic")


def builtin_experiment(exp_id, x0=None):
    config = ExperimentConfig.from_table(exp_id)
    if x0 is None:
        parameters.log.debug(f"experiment {exp_id} starts from the default {config.default_start()}")
    return config.to_model_spec(x0)


def default_report_times(spec):
    start, end = parameters.PARAMETERS['report_start'], parameters.PARAMETERS['report_end']
    return tuple(float(t) for t in range(start, end + 1) if t <= spec.horizon)


def _grid_index(grid, t):
    index = int(np.argmin(np.abs(grid - t)))
    if abs(grid[index] - t) > 1e-9:
        raise DomainError(f"report time {t} is not on the grid")
    return index


def relative_difference(approximation, simulation, eps_rel=None):
    eps_rel = parameters.PARAMETERS['eps_rel'] if eps_rel is None else eps_rel
    return 100.0 * (approximation - simulation) / max(abs(simulation), eps_rel)


def run_comparison(spec, reps, seed, cfg=None, label="custom", report_times=None, max_workers=None):
    cfg = cfg or SolverConfig()
    report_times = tuple(report_times) if report_times is not None else default_report_times(spec)
    if not report_times:
        raise DomainError(f"no report time inside [0, {spec.horizon}] for {label}")
    grid = solvers.build_grid(spec, cfg.grid_spacing)

    parameters.log.info(f"Comparing methods on {label} with {reps} replications (seed {seed})")
    stats = simulator.simulate_ensemble(spec, reps, seed, grid, max_workers=max_workers)
    fluid = solvers.classic_fluid(spec, cfg)
    trajectories = {
        "simulation": stats,
        "adjusted": solvers.adjusted_moments(spec, cfg),
        "classic": solvers.classic_diffusion(spec, cfg, fluid),
    }

    rows = []
    for method in METHODS:
        approx = trajectories[method]
        for quantity in parameters.QUANTITIES:
            sim_values = stats.quantity(quantity)
            approx_values = approx.quantity(quantity)
            for t in report_times:
                index = _grid_index(grid, t)
                sim, value = float(sim_values[index]), float(approx_values[index])
                rows.append((method, quantity, t, sim, value, value - sim, relative_difference(value, sim)))
    differences = pd.DataFrame(rows, columns=list(DIFFERENCE_COLUMNS))
    return ComparisonReport(label=label, report_times=report_times, differences=differences,
                            trajectories=trajectories, spec=spec)


def build_tables(reports, kind="relative"):
    """
    One table per quantity: rows (experiment, method label), columns the report times.
    reports maps an experiment label to its ComparisonReport.
    """
    tables = {}
    for quantity in parameters.QUANTITIES:
        blocks = []
        for exp_label, report in reports.items():
            table = report.table(quantity, kind).loc[list(METHODS)]
            table.index = pd.MultiIndex.from_tuples([(exp_label, TABLE_METHOD_LABELS[m]) for m in METHODS],
                                                    names=["exp", "type"])
            blocks.append(table)
        tables[quantity] = pd.concat(blocks)
        tables[quantity].columns = [f"{t:g}" for t in tables[quantity].columns]
    return tables


def _crossing_sign(spec, traj):
    n = np.array([spec.rates_at(t).n for t in traj.grid])
    return np.sign(traj.mean[:, 0] - n), n


def first_critical_time(spec, traj):
    """first grid time the mean of x1 reaches n_t, None when it never does"""
    sign, _ = _crossing_sign(spec, traj)
    start = sign[0]
    for t, s in zip(traj.grid, sign):
        if s == 0 or s != start:
            return float(t)
    return None


def linger_fraction(spec, traj, band=None):
    """share of grid times where |mean x1 - n_t| <= band * sqrt(n_t)"""
    band = parameters.PARAMETERS['linger_band'] if band is None else band
    _, n = _crossing_sign(spec, traj)
    return float(np.mean(np.abs(traj.mean[:, 0] - n) <= band * np.sqrt(n)))


def critical_report_time(spec, traj, report_times):
    """report time at which the mean of x1 is closest to n_t"""
    gaps = [abs(traj.at("mean_x1", t) - spec.rates_at(t).n) for t in report_times]
    return report_times[int(np.argmin(gaps))]


def spike_ratio(traj, spec, quantity="var_x1", window=None, neighbours=2):
    """
    Largest excursion of a second-difference estimate from the median of its
    neighbours, relative to the median |second difference|. Smooth curvature
    moves little from one stencil to the next, a kink lifts one or two
    stencils far above theirs.

    Stencils with a parameter breakpoint strictly inside are skipped, and a
    neighbourhood never reaches across a breakpoint. window=(start, end)
    keeps only the stencils lying inside [start, end].
    """
    grid = traj.grid
    values = traj.quantity(quantity)
    h1 = grid[1:-1] - grid[:-2]
    h2 = grid[2:] - grid[1:-1]
    second = 2.0 * ((values[2:] - values[1:-1]) / h2 - (values[1:-1] - values[:-2]) / h1) / (h1 + h2)

    left, right = grid[:-2], grid[2:]
    keep = np.ones(len(second), dtype=bool)
    if window is not None:
        start, end = window
        keep &= (left >= start - TIME_TOLERANCE) & (right <= end + TIME_TOLERANCE)
    breakpoints = np.array(spec.breakpoints())
    for b in breakpoints:
        keep &= ~((left < b - TIME_TOLERANCE) & (right > b + TIME_TOLERANCE))
    kept = np.flatnonzero(keep)
    if len(kept) == 0:
        raise DomainError(f"no second difference of {quantity} inside the window {window}")
    segment = np.searchsorted(breakpoints, grid[1:-1], side="right")

    excursions = np.empty(len(kept))
    for j, k in enumerate(kept):
        near = kept[max(0, j - neighbours):j + neighbours + 1]
        near = near[segment[near] == segment[k]]
        excursions[j] = abs(second[k] - np.median(second[near]))
    peak, median = float(np.max(excursions)), float(np.median(np.abs(second[kept])))
    if median == 0.0:
        return 0.0 if peak == 0.0 else float("inf")
    return peak / median


def average_differences(reports, lingering=LINGERING_EXPERIMENTS):
    """
    Mean |relative difference| per method and quantity: over every experiment and
    report time ("all"), and over the lingering experiments at their critically
    loaded report time ("critical").
    reports maps experiment ids to ComparisonReports.
    """
    rows = []
    everything = pd.concat([r.differences for r in reports.values()])
    for method in METHODS:
        subset = everything[everything["method"] == method]
        rows.append(("all", TABLE_METHOD_LABELS[method],
                     *(subset[subset["quantity"] == q]["relative"].abs().mean() for q in parameters.QUANTITIES)))

    critical = {}
    for exp_id, report in reports.items():
        if exp_id in lingering and report.spec is not None:
            critical[exp_id] = critical_report_time(report.spec, report.trajectories["classic"], report.report_times)
    if critical:
        for method in METHODS:
            values = [[abs(reports[e].value(method, q, t)) for e, t in critical.items()] for q in parameters.QUANTITIES]
            rows.append(("critical", TABLE_METHOD_LABELS[method], *(float(np.mean(v)) for v in values)))
    return pd.DataFrame(rows, columns=["scope", "type", *parameters.QUANTITIES])
