import argparse
import logging
import os
import sys

from classes.class_errors import ConfigError, QCloseError
from classes.class_moments import SolverConfig
from resources import parameters
from resources.experiments import EXPERIMENTS_TABLE
from tools import comparison, figures, files, simulator, solvers


def parse_experiment_ids(text):
    """'1-10', '1..10', '2,4,7' or a mix of them"""
    ids = []
    for part in text.split(","):
        part = part.strip()
        bounds = part.replace("..", "-").split("-")
        try:
            if len(bounds) == 2:
                ids.extend(range(int(bounds[0]), int(bounds[1]) + 1))
            else:
                ids.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad experiment list {text!r}") from None
    for exp_id in ids:
        if exp_id not in EXPERIMENTS_TABLE:
            raise argparse.ArgumentTypeError(f"experiment {exp_id} not in 1..{len(EXPERIMENTS_TABLE)}")
    return ids


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=parameters.PARAMETERS['out_dir'],
                        help="output directory (default: QCLOSE_OUT or config.ini)")
    common.add_argument("--step", type=float, default=parameters.PARAMETERS['step'], help="RK4 step")
    common.add_argument("--grid", type=float, default=parameters.PARAMETERS['grid_spacing'],
                        help="output grid spacing")
    common.add_argument("--workers", type=int, default=parameters.PARAMETERS['max_workers'],
                        help="simulation worker processes")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--reps", type=int, default=parameters.PARAMETERS['reps'])
    sampling.add_argument("--seed", type=int, default=parameters.PARAMETERS['seed'])

    methods = [m.value for m in parameters.Methods]
    parser = argparse.ArgumentParser(prog="qclose", description="Mean and covariance of time-varying multi-server queues with abandonments and retrials")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, sampling], help="ensemble simulation of a model file")
    p.add_argument("config")

    p = sub.add_parser("fluid", parents=[common], help="fluid mean of a model file")
    p.add_argument("config")
    p.add_argument("--method", choices=methods, default="classic")

    p = sub.add_parser("diffusion", parents=[common], help="mean and covariance of a model file")
    p.add_argument("config")
    p.add_argument("--method", choices=methods, default="adjusted")

    p = sub.add_parser("compare", parents=[common, sampling], help="compare both methods with simulation")
    p.add_argument("config", nargs="?")
    p.add_argument("--exp", type=int, choices=sorted(EXPERIMENTS_TABLE))

    p = sub.add_parser("tables", parents=[common, sampling], help="difference tables over the built-in experiments")
    p.add_argument("--exps", type=parse_experiment_ids, default=sorted(EXPERIMENTS_TABLE))

    p = sub.add_parser("figures", parents=[common, sampling], help="plot-ready CSV and SVG panels of one experiment")
    p.add_argument("--exp", type=int, choices=sorted(EXPERIMENTS_TABLE), required=True)
    return parser


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def _target(args):
    """(spec, label) from a config path or --exp"""
    if getattr(args, "exp", None) is not None:
        return comparison.builtin_experiment(args.exp), f"exp{args.exp}"
    if getattr(args, "config", None):
        return files.load_model_spec(args.config), _stem(args.config)
    raise ConfigError("give a model file or --exp N", source="command line")


def command_simulate(args, cfg):
    spec, label = _target(args)
    grid = solvers.build_grid(spec, cfg.grid_spacing)
    stats = simulator.simulate_ensemble(spec, args.reps, args.seed, grid, max_workers=args.workers)
    files.save_ensemble(stats, simulator.standard_errors(stats), os.path.join(args.out, f"{label}_simulation.csv"))


def command_fluid(args, cfg):
    spec, label = _target(args)
    if args.method == parameters.Methods.ADJUSTED.value:
        traj = solvers.adjusted_fluid(spec, cfg)
    else:
        traj = solvers.classic_fluid(spec, cfg)
    files.save_trajectory(traj, os.path.join(args.out, f"{label}_fluid_{args.method}.csv"))


def command_diffusion(args, cfg):
    spec, label = _target(args)
    traj = solvers.solve(spec, args.method, cfg)
    files.save_trajectory(traj, os.path.join(args.out, f"{label}_diffusion_{args.method}.csv"))


def command_compare(args, cfg):
    spec, label = _target(args)
    report = comparison.run_comparison(spec, args.reps, args.seed, cfg, label=label, max_workers=args.workers)
    files.save_frame(report.differences, os.path.join(args.out, f"{label}_comparison.csv"))
    for quantity, table in comparison.build_tables({label: report}).items():
        files.save_frame(table, os.path.join(args.out, f"{label}_table_{quantity}.csv"), index=True)
    # a single report time spans no stencil, fall back to the whole grid
    window = (report.report_times[0], report.report_times[-1]) if len(report.report_times) > 1 else None
    for method in comparison.METHODS:
        traj = report.trajectories[method]
        ratio = comparison.spike_ratio(traj, spec, window=window)
        critical = comparison.first_critical_time(spec, traj)
        reached = "never" if critical is None else f"at t={critical:g}"
        parameters.log.info(f"{label} {method}: Var[x1] spike ratio {ratio:.3g}, mean x1 reaches n {reached}, "
                            f"lingers near n {100 * comparison.linger_fraction(spec, traj):.0f}% of the time")


def command_tables(args, cfg):
    reports = {}
    for exp_id in args.exps:
        spec = comparison.builtin_experiment(exp_id)
        reports[exp_id] = comparison.run_comparison(spec, args.reps, args.seed, cfg, label=f"exp{exp_id}",
                                                    max_workers=args.workers)
    for quantity, table in comparison.build_tables(reports).items():
        files.save_frame(table, os.path.join(args.out, f"table_{quantity}.csv"), index=True)
    files.save_frame(comparison.average_differences(reports), os.path.join(args.out, "average_differences.csv"))


def command_figures(args, cfg):
    spec, label = _target(args)
    report = comparison.run_comparison(spec, args.reps, args.seed, cfg, label=label, max_workers=args.workers)
    figures.emit_figures(report, args.out)


COMMANDS = {
    "simulate": command_simulate,
    "fluid": command_fluid,
    "diffusion": command_diffusion,
    "compare": command_compare,
    "tables": command_tables,
    "figures": command_figures,
}


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    if args.verbose:
        parameters.log.setLevel(logging.DEBUG)
    elif args.quiet:
        parameters.log.setLevel(logging.WARNING)

    try:
        cfg = SolverConfig(step=args.step, grid_spacing=args.grid)
        COMMANDS[args.command](args, cfg)
    except FileNotFoundError as e:
        parameters.log.error(f"file not found: {e.filename}")
        return 1
    except (QCloseError, OSError) as e:
        parameters.log.error(str(e))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(cli_main())
