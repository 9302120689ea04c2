"""
Fixed-step RK4 integration of the fluid and diffusion moment equations.

The classic model integrates the fluid mean and then the Lyapunov equation
dS/dt = A S + S A' + B B' with the measure-zero gradient. The adjusted model
integrates the closed mean and the covariance together, five scalar ODEs with
the covariance kept as its upper triangle (s11, s12, s22).
"""
import math

import numpy as np

from classes.class_errors import DomainError, IntegrationError
from classes.class_moments import MomentTrajectory, SolverConfig, covariance_from_triangle
from resources import parameters
from resources.parameters import Methods
from tools import closure, model
from tools.misc_func import timing


def build_grid(spec, spacing):
    """uniform output grid on [0, T] merged with every parameter breakpoint"""
    count = int(math.floor(spec.horizon / spacing + 1e-9))
    uniform = np.arange(count + 1) * spacing
    points = np.concatenate([uniform, spec.breakpoints(), [spec.horizon]])
    points = np.unique(np.round(points[points <= spec.horizon + 1e-9], 12))
    return points


def integrate_rk4(field, y0, grid, h):
    """
    Classical 4th order Runge-Kutta. Each interval between consecutive grid
    times is split into equal steps no longer than h, so no step straddles a
    grid time.

    Args:
        field: function (t, y) -> dy/dt
        y0: state at grid[0]
        grid: ascending times
        h: largest step

    Returns: array of states, one row per grid time
    """
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("integration grid must be strictly increasing")

    y = np.array(y0, dtype=float)
    out = np.empty((len(grid), len(y)))
    out[0] = y

    def evaluate(t, state):
        k = np.asarray(field(t, state), dtype=float)
        if not np.all(np.isfinite(k)):
            raise IntegrationError("non-finite field value", t)
        return k

    for index in range(1, len(grid)):
        a, b = grid[index - 1], grid[index]
        steps = max(1, math.ceil((b - a) / h - 1e-9))
        dt = (b - a) / steps
        for j in range(steps):
            t = a + j * dt
            k1 = evaluate(t, y)
            k2 = evaluate(t + dt / 2, y + dt / 2 * k1)
            k3 = evaluate(t + dt / 2, y + dt / 2 * k2)
            k4 = evaluate(t + dt, y + dt * k3)
            y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[index] = y
    return out


def integrate_segments(spec, make_field, y0, grid, h):
    """
    Integrates piece by piece over the parameter segments of spec, the field of
    each piece built by make_field(rates) with the rates frozen on that piece.
    grid must contain every breakpoint.
    """
    out = np.empty((len(grid), len(y0)))
    out[0] = y0
    y = np.array(y0, dtype=float)
    for segment in spec.segments():
        lo = int(np.searchsorted(grid, segment.start - 1e-9))
        hi = int(np.searchsorted(grid, segment.end + 1e-9))
        sub_grid = grid[lo:hi]
        if len(sub_grid) < 2 or abs(sub_grid[0] - segment.start) > 1e-9:
            raise DomainError(f"grid does not contain segment [{segment.start}, {segment.end}]")
        values = integrate_rk4(make_field(segment.rates), y, sub_grid, h)
        out[lo:hi] = values
        y = values[-1]
    return out


def _check_step(spec, cfg):
    shortest = spec.shortest_segment()
    if cfg.step > shortest:
        raise DomainError(f"solver step {cfg.step} exceeds the shortest parameter segment {shortest}")


def lyapunov_rhs(A, s11, s12, s22, q11, q12, q22):
    """upper triangle of A S + S A' + Q"""
    (a, b), (c, d) = A
    return (
        2.0 * (a * s11 + b * s12) + q11,
        a * s12 + b * s22 + c * s11 + d * s12 + q12,
        2.0 * (c * s12 + d * s22) + q22,
    )


def _fluid_field(rates):
    def field(t, y):
        return model.catalog_drift(rates, y[0], y[1])
    return field


def _classic_field(rates):
    def field(t, y):
        x1, x2 = y[0], y[1]
        f = model.catalog_rates(rates, x1, x2)
        dx = (f[0] + f[1] - f[2] - f[3] - f[4], f[3] - f[1])
        ds = lyapunov_rhs(model.catalog_gradient(rates, x1), y[2], y[3], y[4], *model.catalog_noise(f))
        return dx + ds
    return field


def _adjusted_field(rates):
    def field(t, y):
        z1, z2 = y[0], y[1]
        sigma1 = math.sqrt(y[2]) if y[2] > 0.0 else 0.0
        g = closure.closed_rates(rates, z1, z2, sigma1)
        dz = (g[0] + g[1] - g[2] - g[3] - g[4], g[3] - g[1])
        ds = lyapunov_rhs(closure.closed_gradient(rates, z1, sigma1), y[2], y[3], y[4], *model.catalog_noise(g))
        return dz + ds
    return field


@timing
def classic_fluid(spec, cfg=None):
    cfg = cfg or SolverConfig()
    _check_step(spec, cfg)
    grid = build_grid(spec, cfg.grid_spacing)
    mean = integrate_segments(spec, _fluid_field, np.array(spec.x0), grid, cfg.step)
    return MomentTrajectory(grid=grid, mean=mean, cov=None, method=Methods.CLASSIC)


@timing
def classic_diffusion(spec, cfg=None, fluid=None):
    """
    Covariance of the centred diffusion around the fluid, with E[D(t)] = 0.
    The fluid is carried along in the integrated state; its field does not
    depend on the covariance, so the carried mean repeats the fluid solve step
    for step.
    """
    cfg = cfg or SolverConfig()
    _check_step(spec, cfg)
    grid = build_grid(spec, cfg.grid_spacing)
    if fluid is None:
        fluid = classic_fluid(spec, cfg)
    if len(fluid.grid) != len(grid) or not np.allclose(fluid.grid, grid, rtol=0, atol=1e-9):
        raise DomainError("the fluid trajectory was computed on a different grid")
    y0 = np.array([spec.x0[0], spec.x0[1], 0.0, 0.0, 0.0])
    values = integrate_segments(spec, _classic_field, y0, grid, cfg.step)
    return MomentTrajectory(grid=grid, mean=fluid.mean, cov=covariance_from_triangle(values[:, 2:]),
                            method=Methods.CLASSIC)


@timing
def adjusted_moments(spec, cfg=None):
    cfg = cfg or SolverConfig()
    _check_step(spec, cfg)
    grid = build_grid(spec, cfg.grid_spacing)
    y0 = np.array([spec.x0[0], spec.x0[1], 0.0, 0.0, 0.0])
    values = integrate_segments(spec, _adjusted_field, y0, grid, cfg.step)
    parameters.log.debug(f"adjusted solve finished, final mean {values[-1, :2]}")
    return MomentTrajectory(grid=grid, mean=values[:, :2], cov=covariance_from_triangle(values[:, 2:]),
                            method=Methods.ADJUSTED)


def adjusted_fluid(spec, cfg=None):
    """closed mean alone, the covariance is still needed to drive it"""
    moments = adjusted_moments(spec, cfg)
    return MomentTrajectory(grid=moments.grid, mean=moments.mean, cov=None, method=Methods.ADJUSTED)


def solve(spec, method, cfg=None):
    """mean and covariance by either analytic route"""
    match Methods(method):
        case Methods.CLASSIC:
            return classic_diffusion(spec, cfg)
        case Methods.ADJUSTED:
            return adjusted_moments(spec, cfg)
