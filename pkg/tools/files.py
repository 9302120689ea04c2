import os

import pandas as pd

from classes.class_errors import ConfigError, QCloseError
from classes.class_profile import ModelSpec, TimeProfile
from resources import parameters

PROFILE_CONFIG_KEYS = {
    "lambda": "lam",
    "mu1": "mu1",
    "mu2": "mu2",
    "beta": "beta",
    "p": "p",
    "n": "n",
}
SCALAR_CONFIG_KEYS = ("x1_0", "x2_0", "horizon")
REQUIRED_CONFIG_KEYS = tuple(PROFILE_CONFIG_KEYS) + ("horizon",)


def _parse_number(text, source, line):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", source, line) from None


def _parse_profile(value, source, line):
    """'t0:v0, t1:v1, ...' or a bare number for a constant profile"""
    if ":" not in value:
        return TimeProfile.constant(_parse_number(value, source, line))
    breakpoints, values = [], []
    for entry in value.split(","):
        if entry.count(":") != 1:
            raise ConfigError(f"profile entries look like time:value, got {entry.strip()!r}", source, line)
        t, v = entry.split(":")
        breakpoints.append(_parse_number(t.strip(), source, line))
        values.append(_parse_number(v.strip(), source, line))
    try:
        return TimeProfile(tuple(breakpoints), tuple(values))
    except QCloseError as e:
        raise ConfigError(str(e), source, line) from None


def parse_model_spec(text, source="<config>"):
    """
    Reads a ModelSpec from 'key = value' lines, '#' starts a comment line.
    Profiles are written 'key = t0:v0, t1:v1, ...', keys are lambda, mu1, mu2,
    beta, p, n, x1_0, x2_0 and horizon. A missing initial state defaults to 0.
    """
    profiles, scalars, seen = {}, {}, {}
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", source, number)
        key, value = (part.strip() for part in stripped.split("=", 1))
        key = key.lower()
        if key in seen:
            raise ConfigError(f"{key} already set on line {seen[key]}", source, number)
        seen[key] = number
        if key in PROFILE_CONFIG_KEYS:
            profiles[PROFILE_CONFIG_KEYS[key]] = _parse_profile(value, source, number)
        elif key in SCALAR_CONFIG_KEYS:
            scalars[key] = _parse_number(value, source, number)
        else:
            raise ConfigError(f"unknown key {key!r}", source, number)

    missing = [key for key in REQUIRED_CONFIG_KEYS if key not in seen]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}", source)
    try:
        return ModelSpec(x0=(scalars.get("x1_0", 0.0), scalars.get("x2_0", 0.0)),
                         horizon=scalars["horizon"], **profiles)
    except QCloseError as e:
        raise ConfigError(str(e), source) from None


def load_model_spec(path):
    with open(path, 'r') as f:
        text = f.read()
    spec = parse_model_spec(text, source=str(path))
    parameters.log.info(f"Loaded model from {path}")
    return spec


def format_model_spec(spec):
    """inverse of parse_model_spec"""
    lines = []
    for config_key, attribute in PROFILE_CONFIG_KEYS.items():
        profile = getattr(spec, attribute)
        lines.append(f"{config_key} = " + ", ".join(f"{b:.17g}:{v:.17g}" for b, v in zip(profile.breakpoints, profile.values)))
    lines.append(f"x1_0 = {spec.x0[0]:.17g}")
    lines.append(f"x2_0 = {spec.x0[1]:.17g}")
    lines.append(f"horizon = {spec.horizon:.17g}")
    return "\n".join(lines) + "\n"


def trajectory_frame(traj):
    frame = pd.DataFrame({"t": traj.grid})
    # mean-only trajectories keep the full schema with NaN moments
    for quantity in parameters.QUANTITIES:
        frame[quantity] = traj.quantity(quantity)
    return frame


def ensemble_frame(stats, errors):
    frame = pd.DataFrame({"t": stats.grid})
    for quantity in parameters.QUANTITIES:
        frame[quantity] = stats.quantity(quantity)
    frame["se_mean_x1"] = errors.mean[:, 0]
    frame["se_mean_x2"] = errors.mean[:, 1]
    return frame


def atomic_write(path, writer):
    """writer(file) fills a temporary sibling which then replaces path"""
    folder = os.path.dirname(os.path.abspath(path))
    tmp_path = path + ".tmp"
    try:
        os.makedirs(folder, exist_ok=True)
        with open(tmp_path, 'w', newline="") as f:
            writer(f)
        os.replace(tmp_path, path)
    except OSError as e:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise OSError(f"could not write {path}: {e}") from e
    return path


def save_frame(frame, path, comment=None, index=False):
    def writer(f):
        if comment:
            f.write(f"# {comment}\n")
        frame.to_csv(f, index=index, float_format=parameters.CSV_FLOAT_FORMAT)
    atomic_write(path, writer)
    parameters.log.info(f"Wrote {path}")
    return path


def save_trajectory(traj, path):
    return save_frame(trajectory_frame(traj), path, comment=f"method={traj.method.value}")


def save_ensemble(stats, errors, path):
    return save_frame(ensemble_frame(stats, errors), path, comment=f"reps={stats.reps} seed={stats.seed}")


def read_frame(path):
    return pd.read_csv(path, comment="#", float_precision="round_trip")
