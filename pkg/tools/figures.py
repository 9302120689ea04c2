import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import pandas as pd

from resources import parameters
from tools import files

SERIES = (
    ("simulation", "simulation", "black"),
    ("adjusted", "adjusted", "tab:blue"),
    ("classic", "measure_zero", "tab:red"),
)
TITLES = {
    "mean_x1": "E[x1(t)]",
    "mean_x2": "E[x2(t)]",
    "var_x1": "Var[x1(t)]",
    "cov_x1x2": "Cov[x1(t), x2(t)]",
    "var_x2": "Var[x2(t)]",
}


def panel_frame(trajectories, quantity):
    """t plus one column per method, all on the simulation grid"""
    grid = trajectories["simulation"].grid
    frame = pd.DataFrame({"t": grid})
    for key, column, _ in SERIES:
        frame[column] = trajectories[key].quantity(quantity)
    return frame


def plot_panel(frame, quantity, title, path):
    fig = plt.figure(figsize=(8, 4.5))
    for _, column, color in SERIES:
        plt.plot(frame["t"], frame[column], label=column.replace("_", "-"), color=color, linewidth=1.2)
    plt.xlabel("t")
    plt.ylabel(TITLES[quantity])
    plt.title(title)
    plt.legend()
    tmp_path = path + ".tmp"
    try:
        plt.savefig(tmp_path, format="svg", bbox_inches='tight', pad_inches=0.1)
        os.replace(tmp_path, path)
    except OSError as e:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise OSError(f"could not write {path}: {e}") from e
    finally:
        plt.close(fig)
    parameters.log.info(f"Wrote {path}")
    return path


def emit_figures(report, out_dir, trajectories=None):
    """
    One CSV and one SVG per quantity, named <label>_<quantity>.{csv,svg}.
    Returns the written paths.
    """
    trajectories = trajectories or report.trajectories
    written = []
    for quantity in parameters.QUANTITIES:
        frame = panel_frame(trajectories, quantity)
        stem = os.path.join(out_dir, f"{report.label}_{quantity}")
        written.append(files.save_frame(frame, stem + ".csv"))
        written.append(plot_panel(frame, quantity, f"{report.label}: {TITLES[quantity]}", stem + ".svg"))
    return written
