from dataclasses import dataclass, field

import pandas as pd

from classes.class_errors import DomainError
from classes.class_profile import ModelSpec, TimeProfile
from resources import parameters
from resources.experiments import EXPERIMENTS_TABLE


@dataclass(frozen=True)
class ExperimentConfig:
    exp_id: int
    servers: int
    lambda1: float
    lambda2: float
    mu1: float
    mu2: float
    beta: float
    p: float
    alter: float
    horizon: float

    @classmethod
    def from_table(cls, exp_id):
        if exp_id not in EXPERIMENTS_TABLE:
            raise DomainError(f"experiment id must be in 1..{len(EXPERIMENTS_TABLE)}, got {exp_id}")
        return cls(exp_id, *EXPERIMENTS_TABLE[exp_id])

    def default_start(self, initial_fraction=None):
        """(fraction * servers rounded, 0), so the fluid settles before the first report time"""
        fraction = parameters.PARAMETERS['initial_fraction'] if initial_fraction is None else initial_fraction
        return float(round(fraction * self.servers)), 0.0

    def to_model_spec(self, x0=None):
        return ModelSpec(
            lam=TimeProfile.alternating(self.lambda1, self.lambda2, self.alter, self.horizon),
            mu1=TimeProfile.constant(self.mu1),
            mu2=TimeProfile.constant(self.mu2),
            beta=TimeProfile.constant(self.beta),
            p=TimeProfile.constant(self.p),
            n=TimeProfile.constant(self.servers),
            x0=x0 if x0 is not None else self.default_start(),
            horizon=self.horizon,
        )


DIFFERENCE_COLUMNS = ("method", "quantity", "time", "simulation", "approximation", "absolute", "relative")


@dataclass(eq=False)
class ComparisonReport:
    """
    Differences of each analytic method from simulation at the report times.
    differences is long-format, one row per (method, quantity, time);
    relative is 100 * (approximation - simulation) / max(|simulation|, eps_rel).
    """
    label: str
    report_times: tuple
    differences: pd.DataFrame
    trajectories: dict = field(default_factory=dict)
    spec: ModelSpec | None = None

    def table(self, quantity, kind="relative"):
        """rows: method, columns: report times"""
        if kind not in ("relative", "absolute"):
            raise DomainError(f"difference kind is relative or absolute, got {kind}")
        rows = self.differences[self.differences["quantity"] == quantity]
        return rows.pivot(index="method", columns="time", values=kind)

    def value(self, method, quantity, time, kind="relative"):
        rows = self.differences
        match = rows[(rows["method"] == method) & (rows["quantity"] == quantity) & (rows["time"] == time)]
        if match.empty:
            raise DomainError(f"no {method} {quantity} difference at t={time}")
        return float(match[kind].iloc[0])
