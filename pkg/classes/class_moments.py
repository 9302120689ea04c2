from dataclasses import dataclass, field

import numpy as np

from classes.class_errors import ConsistencyError, DomainError
from resources import parameters

ROUNDOFF_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    step: float = parameters.PARAMETERS['step']
    grid_spacing: float = parameters.PARAMETERS['grid_spacing']

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError(f"solver step must be positive, got {self.step}")
        if not self.grid_spacing > 0:
            raise DomainError(f"grid spacing must be positive, got {self.grid_spacing}")

    def halved(self):
        return SolverConfig(step=self.step / 2, grid_spacing=self.grid_spacing)


def covariance_from_triangle(upper):
    """(s11, s12, s22) rows -> stacked symmetric 2x2 matrices"""
    upper = np.asarray(upper, dtype=float)
    cov = np.empty((len(upper), 2, 2))
    cov[:, 0, 0] = upper[:, 0]
    cov[:, 0, 1] = upper[:, 1]
    cov[:, 1, 0] = upper[:, 1]
    cov[:, 1, 1] = upper[:, 2]
    return cov


class _MomentTable:
    """shared column access for trajectories and ensemble estimates"""

    def quantity(self, name):
        match name:
            case "mean_x1":
                return self.mean[:, 0]
            case "mean_x2":
                return self.mean[:, 1]
            case "var_x1":
                return self._cov_or_nan()[:, 0, 0]
            case "cov_x1x2":
                return self._cov_or_nan()[:, 0, 1]
            case "var_x2":
                return self._cov_or_nan()[:, 1, 1]
            case _:
                raise DomainError(f"unknown quantity {name}, expected one of {parameters.QUANTITIES}")

    def _cov_or_nan(self):
        if self.cov is None:
            return np.full((len(self.grid), 2, 2), np.nan)
        return self.cov

    def at(self, name, t):
        """value of a quantity at the grid time closest to t"""
        index = int(np.argmin(np.abs(self.grid - t)))
        return float(self.quantity(name)[index])


@dataclass(frozen=True, eq=False)
class MomentTrajectory(_MomentTable):
    """
    Mean and covariance of an analytic approximation on a time grid.
    cov is None for a fluid (mean only) trajectory.
    """
    grid: np.ndarray
    mean: np.ndarray
    cov: np.ndarray | None
    method: parameters.Methods

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        mean = np.asarray(self.mean, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "mean", mean)
        if mean.shape != (len(grid), 2):
            raise ConsistencyError(f"mean has shape {mean.shape}, expected {(len(grid), 2)}")
        if self.cov is not None:
            cov = np.array(self.cov, dtype=float)
            if cov.shape != (len(grid), 2, 2):
                raise ConsistencyError(f"covariance has shape {cov.shape}, expected {(len(grid), 2, 2)}")
            asymmetry = np.max(np.abs(cov[:, 0, 1] - cov[:, 1, 0]), initial=0.0)
            if asymmetry > 1e-8:
                raise ConsistencyError(f"covariance lost symmetry by {asymmetry:.3g}")
            diagonal = cov[:, [0, 1], [0, 1]]
            if np.min(diagonal, initial=0.0) < -ROUNDOFF_TOLERANCE:
                parameters.log.warning(f"covariance diagonal dipped to {np.min(diagonal):.3g}, clamped to 0")
            cov[:, 0, 0] = np.maximum(cov[:, 0, 0], 0.0)
            cov[:, 1, 1] = np.maximum(cov[:, 1, 1], 0.0)
            object.__setattr__(self, "cov", cov)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    One simulated sample path: the state right after each event, starting with
    the initial state at time 0. The path is constant between events.
    """
    times: np.ndarray
    states: np.ndarray

    def state_at(self, t):
        index = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.states[max(index, 0)]

    def sample(self, grid):
        indices = np.searchsorted(self.times, grid, side="right") - 1
        return self.states[np.maximum(indices, 0)]

    def jumps(self):
        return np.diff(self.states, axis=0)

    @property
    def event_count(self):
        return len(self.times) - 1


@dataclass(frozen=True, eq=False)
class EnsembleStats(_MomentTable):
    """
    Sample mean and covariance (divisor reps - 1) of an ensemble of simulated paths.
    fourth holds the centred fourth moments E[(xi - mi)^2 (xj - mj)^2] for the
    (11, 12, 22) entries, mean_drift the ensemble average of F(t, X(t)).
    """
    grid: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    reps: int
    seed: int
    fourth: np.ndarray = field(default=None)
    mean_drift: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.reps < 2:
            raise DomainError(f"an ensemble needs at least two replications, got {self.reps}")


@dataclass(frozen=True)
class StandardErrors:
    grid: np.ndarray
    mean: np.ndarray
    cov: np.ndarray | None  # columns (11, 12, 22), None when reps are too few

    @property
    def flagged(self):
        return self.cov is None
