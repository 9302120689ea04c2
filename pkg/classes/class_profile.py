import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple

from classes.class_errors import DomainError

# slack on the horizon check, grid times are built by floating arithmetic
TIME_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TimeProfile:
    """
    Piecewise-constant function of time, right-continuous at its breakpoints.
    Segment k covers [breakpoints[k], breakpoints[k+1]), the last segment is open-ended.
    """
    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.breakpoints:
            raise DomainError("a profile needs at least one segment")
        if len(self.breakpoints) != len(self.values):
            raise DomainError(f"{len(self.breakpoints)} breakpoints for {len(self.values)} values")
        if self.breakpoints[0] != 0.0:
            raise DomainError(f"the first breakpoint must be 0, got {self.breakpoints[0]}")
        for left, right in zip(self.breakpoints, self.breakpoints[1:]):
            if right <= left:
                raise DomainError(f"breakpoints must be strictly increasing ({left} then {right})")
        for v in self.values:
            if not math.isfinite(v):
                raise DomainError(f"profile values must be finite, got {v}")

    @classmethod
    def constant(cls, value):
        return cls((0.0,), (value,))

    @classmethod
    def alternating(cls, first, second, period, horizon):
        """first on [0, period), second on [period, 2*period), and so on up to the horizon"""
        if period <= 0:
            raise DomainError(f"alternation period must be positive, got {period}")
        count = max(1, math.ceil(horizon / period - TIME_TOLERANCE))
        breakpoints = [k * period for k in range(count)]
        values = [first if k % 2 == 0 else second for k in range(count)]
        return cls(tuple(breakpoints), tuple(values))

    def value_at(self, t):
        if t < 0:
            raise DomainError(f"profile evaluated at negative time {t}")
        return self.values[bisect_right(self.breakpoints, t) - 1]


class Rates(NamedTuple):
    """Parameter values frozen at one instant (or on one segment)."""
    lam: float
    mu1: float
    mu2: float
    beta: float
    p: float
    n: float


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    rates: Rates

    @property
    def length(self):
        return self.end - self.start


PROFILE_KEYS = ("lam", "mu1", "mu2", "beta", "p", "n")


@dataclass(frozen=True)
class ModelSpec:
    """
    Time-varying multi-server queue with abandonments and retrials.
    x0 is (customers at the service node, customers in the retrial orbit).
    """
    lam: TimeProfile
    mu1: TimeProfile
    mu2: TimeProfile
    beta: TimeProfile
    p: TimeProfile
    n: TimeProfile
    x0: tuple
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        object.__setattr__(self, "horizon", float(self.horizon))
        if len(self.x0) != 2:
            raise DomainError(f"the initial state has two components, got {len(self.x0)}")
        if any(v < 0 or not math.isfinite(v) for v in self.x0):
            raise DomainError(f"the initial state must be non-negative, got {self.x0}")
        if not self.horizon > 0:
            raise DomainError(f"the horizon must be positive, got {self.horizon}")
        for key in ("lam", "mu1", "mu2", "beta"):
            if self._visible_values(key) and min(self._visible_values(key)) < 0:
                raise DomainError(f"rate profile {key} must be non-negative on [0, T]")
        if any(v < 0 or v > 1 for v in self._visible_values("p")):
            raise DomainError("the loss probability profile p must lie in [0, 1]")
        for v in self._visible_values("n"):
            if v < 1 or v != round(v):
                raise DomainError(f"the server profile n must hold integers >= 1, got {v}")

    def _visible_values(self, key):
        profile = getattr(self, key)
        return [v for b, v in zip(profile.breakpoints, profile.values) if b <= self.horizon]

    def profiles(self):
        return {key: getattr(self, key) for key in PROFILE_KEYS}

    def check_time(self, t):
        if t < 0 or t > self.horizon + TIME_TOLERANCE:
            raise DomainError(f"time {t} outside [0, {self.horizon}]")

    def rates_at(self, t):
        self.check_time(t)
        return Rates(*(getattr(self, key).value_at(t) for key in PROFILE_KEYS))

    def breakpoints(self):
        """every breakpoint of every profile inside [0, T), merged"""
        points = set()
        for profile in self.profiles().values():
            points.update(b for b in profile.breakpoints if b < self.horizon)
        return sorted(points)

    def segments(self):
        points = self.breakpoints() + [self.horizon]
        return [Segment(start, end, self.rates_at(start)) for start, end in zip(points, points[1:])]

    def shortest_segment(self):
        return min(segment.length for segment in self.segments())

    def is_integral_start(self):
        return all(v == round(v) for v in self.x0)
