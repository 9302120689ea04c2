"""
Exact event-driven simulation of the queue and ensemble estimation of its
mean and covariance.

Rates are constant on every parameter segment, so the next event time is
exponential with the total rate of the current state. A draw that lands past
the end of the segment is discarded and the clock moves to the segment end,
which the memoryless property makes exact.
"""
import concurrent.futures
import math

import numpy as np

from classes.class_errors import DomainError
from classes.class_moments import EnsembleStats, StandardErrors, Trajectory
from resources import parameters
from tools import model
from tools.misc_func import serial_map, timing, tqdm_parallel_map

RANDOM_BLOCK = 4096
MIN_REPS_FOR_COV_SE = 30


def replication_rng(seed, index):
    """independent PCG64 stream keyed by (seed, replication index)"""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def _path_events(segments, x0, rng):
    """
    Yields (time, x1, x2) after every event. Two uniforms are used per
    attempt, one for the waiting time and one for the transition.
    """
    x1, x2 = x0
    uniforms = rng.random(RANDOM_BLOCK)
    used = 0
    for segment in segments:
        rates = segment.rates
        t = segment.start
        while True:
            f = model.catalog_rates(rates, x1, x2)
            total = f[0] + f[1] + f[2] + f[3] + f[4]
            if total <= 0.0:
                break
            if used + 2 > RANDOM_BLOCK:
                uniforms = rng.random(RANDOM_BLOCK)
                used = 0
            t += -math.log(1.0 - uniforms[used]) / total
            pick = uniforms[used + 1] * total
            used += 2
            if t >= segment.end:
                break
            if pick < f[0]:
                x1 += 1
            elif pick < f[0] + f[1]:
                x1 += 1
                x2 -= 1
            elif pick < f[0] + f[1] + f[2]:
                x1 -= 1
            elif pick < f[0] + f[1] + f[2] + f[3]:
                x1 -= 1
                x2 += 1
            else:
                x1 -= 1
            yield t, x1, x2


def _integral_start(spec):
    if not spec.is_integral_start():
        raise DomainError(f"the simulator needs an integer initial state, got {spec.x0}")
    return int(spec.x0[0]), int(spec.x0[1])


def simulate_one(spec, seed, index=0):
    x0 = _integral_start(spec)
    times, states = [0.0], [x0]
    for t, x1, x2 in _path_events(spec.segments(), x0, replication_rng(seed, index)):
        times.append(t)
        states.append((x1, x2))
    return Trajectory(times=np.array(times), states=np.array(states, dtype=int))


def _sample_path(segments, x0, grid, rng):
    """state at each grid time, right-continuous"""
    samples = np.empty((len(grid), 2))
    cursor = 0
    x1, x2 = x0
    for t, nx1, nx2 in _path_events(segments, x0, rng):
        while cursor < len(grid) and grid[cursor] < t:
            samples[cursor] = (x1, x2)
            cursor += 1
        x1, x2 = nx1, nx2
    samples[cursor:] = (x1, x2)
    return samples


def _run_chunk(job):
    """picklable worker: (spec, seed, first index, count, grid) -> samples of each replication"""
    spec, seed, first, count, grid = job
    segments = spec.segments()
    x0 = _integral_start(spec)
    return np.stack([_sample_path(segments, x0, grid, replication_rng(seed, first + k)) for k in range(count)])


def _mean_drift(spec, grid, samples):
    """ensemble average of F(t, X(t)) per grid time"""
    drift = np.empty((len(grid), 2))
    for g, t in enumerate(grid):
        rates = spec.rates_at(t)
        states, counts = np.unique(samples[:, g], axis=0, return_counts=True)
        values = np.array([model.catalog_drift(rates, x1, x2) for x1, x2 in states])
        drift[g] = (values * counts[:, None]).sum(axis=0) / counts.sum()
    return drift


def summarize(spec, grid, samples, seed):
    """EnsembleStats of an array of samples shaped (reps, grid, 2)"""
    reps = samples.shape[0]
    mean = samples.mean(axis=0)
    centred = samples - mean
    cov = np.einsum("rgi,rgj->gij", centred, centred) / (reps - 1)
    fourth = np.stack([
        np.mean(centred[:, :, 0] ** 2 * centred[:, :, 0] ** 2, axis=0),
        np.mean(centred[:, :, 0] ** 2 * centred[:, :, 1] ** 2, axis=0),
        np.mean(centred[:, :, 1] ** 2 * centred[:, :, 1] ** 2, axis=0),
    ], axis=1)
    return EnsembleStats(grid=np.asarray(grid, dtype=float), mean=mean, cov=cov, reps=reps, seed=seed,
                         fourth=fourth, mean_drift=_mean_drift(spec, grid, samples))


@timing
def simulate_ensemble(spec, reps, seed, grid, max_workers=None, chunk_size=None):
    if reps < 2:
        raise DomainError(f"an ensemble needs at least two replications, got {reps}")
    grid = np.asarray(grid, dtype=float)
    spec.check_time(grid[-1])
    max_workers = max_workers or parameters.PARAMETERS['max_workers']
    chunk_size = chunk_size or parameters.PARAMETERS['chunk_size']
    jobs = [(spec, seed, first, min(chunk_size, reps - first), grid) for first in range(0, reps, chunk_size)]

    parameters.log.info(f"Simulating {reps} replications in {len(jobs)} chunks with {max_workers} workers")
    if max_workers == 1 or len(jobs) == 1:
        chunks = serial_map(_run_chunk, jobs, desc="replications", disable=len(jobs) == 1)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=max_workers) as executor:
            chunks = tqdm_parallel_map(executor, _run_chunk, jobs, desc="replications")
    # chunks come back in index order, the reduction is deterministic
    return summarize(spec, grid, np.concatenate(chunks, axis=0), seed)


def standard_errors(stats):
    mean_se = np.sqrt(np.maximum(stats.cov[:, [0, 1], [0, 1]], 0.0) / stats.reps)
    if stats.reps < MIN_REPS_FOR_COV_SE or stats.fourth is None:
        parameters.log.warning(f"{stats.reps} replications are too few for covariance standard errors, omitted")
        return StandardErrors(grid=stats.grid, mean=mean_se, cov=None)
    squared = np.stack([stats.cov[:, 0, 0], stats.cov[:, 0, 1], stats.cov[:, 1, 1]], axis=1) ** 2
    cov_se = np.sqrt(np.maximum(stats.fourth - squared, 0.0) / stats.reps)
    return StandardErrors(grid=stats.grid, mean=mean_se, cov=cov_se)


def exact_mean_residual(spec, stats):
    """
    Difference between the ensemble mean and x0 plus the trapezoid integral of
    the ensemble average drift, per grid time. Both sides estimate E[X(t)]
    through the exact mean equation, so the residual is sampling and
    quadrature error only.
    """
    if stats.mean_drift is None:
        raise DomainError("the ensemble was summarized without its drift average")
    steps = np.diff(stats.grid)[:, None] * (stats.mean_drift[1:] + stats.mean_drift[:-1]) / 2
    integral = np.vstack([np.zeros((1, 2)), np.cumsum(steps, axis=0)])
    return stats.mean - (np.array(spec.x0) + integral)
