"""Lower bounds on the optimal objectives and the equal-power schedule transform.

``brute_force_g`` is an independent upper-bound oracle for tiny instances; used
together with :func:`g1_lower_bound` it brackets the true optimum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .engine import Trace, rescale_segment
from .model import Instance, ModelError, PowerParams, kappa


class NotBatched(ModelError):
    pass


class NotParseq(ModelError):
    pass


class DegenerateSegment(ValueError):
    """A zero-power segment in which some job still makes progress."""


class TooLarge(ValueError):
    pass


def g1_lower_bound(instance: Instance) -> float:
    """kappa * sum over phases of w / h^(1-1/alpha); fully-parallel phases add 0."""
    alpha = instance.alpha
    e = 1.0 - 1.0 / alpha
    terms = [
        ph.work / ph.parallelism ** e
        for job in instance.jobs for ph in job.phases
        if not ph.fully_parallel
    ]
    return kappa(alpha) * math.fsum(terms)


def h_lower_bound(instance: Instance) -> float:
    """Makespan-plus-energy lower bound for batched PAR-SEQ jobs."""
    if not instance.batched:
        raise NotBatched("h_lower_bound needs a batched instance")
    if not instance.parseq:
        raise NotParseq("h_lower_bound needs PAR-SEQ jobs")
    alpha, P = instance.alpha, instance.P
    total_work = math.fsum(j.work for j in instance.jobs)
    parallel_part = total_work / P ** (1.0 - 1.0 / alpha)
    span_part = math.fsum(j.span ** alpha for j in instance.jobs) ** (1.0 / alpha)
    return kappa(alpha) * max(parallel_part, span_part)


def equal_power_transform(trace: Trace, params: PowerParams) -> Trace:
    """Rescale every segment to total power 1/(alpha-1), retiling from t = 0."""
    alpha = params.alpha
    target = 1.0 / (alpha - 1.0)
    out = []
    t = 0.0
    for seg in trace.segments:
        u = seg.total_power
        if u <= 0:
            if any(a.rate > 0 for a in seg.allocations):
                raise DegenerateSegment(f"segment at t={seg.t_start} progresses with zero power")
            continue
        k = (target / u) ** (1.0 / alpha)
        new = rescale_segment(seg, k, alpha, t)
        out.append(new)
        t = new.t_end
    return Trace.from_segments(out, trace.release)


# --------------------------------------------------------------------------
# Brute-force oracle
# --------------------------------------------------------------------------

MAX_JOBS = 3
MAX_PHASES = 4
MAX_P = 4
EXHAUSTIVE_LIMIT = 1 << 14


@dataclass(frozen=True)
class Grid:
    points: int = 64
    low: float = 0.05
    high: float = 4.0

    def speeds(self, alpha: float) -> np.ndarray:
        base = (1.0 / (alpha - 1.0)) ** (1.0 / alpha)
        return base * np.geomspace(self.low, self.high, self.points)

    def candidates(self, alpha: float, P: int) -> list[float]:
        """Grid speeds plus the isolated-phase optimum for every count 1..P."""
        anchors = [(1.0 / ((alpha - 1.0) * a)) ** (1.0 / alpha) for a in range(1, P + 1)]
        return sorted({float(s) for s in self.speeds(alpha)} | set(anchors))


def _list_schedule_g(instance: Instance, phase_list, counts, speeds, order) -> float:
    """G of a preemptive priority list schedule with fixed (count, speed) per phase.

    At every event jobs are scanned in ``order``; a job runs its current phase on
    its chosen count if that many processors are still free.
    """
    alpha, P = instance.alpha, instance.P
    jobs = instance.jobs
    n = len(jobs)
    remaining = [jobs[i].phases[0].work for i in range(n)]
    phase = [0] * n
    done = [False] * n
    released = [False] * n
    now = 0.0
    flow = 0.0
    energy = 0.0
    left = n
    while left:
        for i in range(n):
            if not released[i] and jobs[i].release_time <= now + 1e-12:
                released[i] = True
        act = [i for i in order if released[i] and not done[i]]
        if not act:
            now = min(jobs[i].release_time for i in range(n) if not released[i])
            continue
        free = P
        running = []
        for i in act:
            k = phase_list[i][phase[i]]
            if counts[k] <= free:
                free -= counts[k]
                running.append((i, counts[k] * speeds[k], counts[k] * speeds[k] ** alpha))
        dt = min(remaining[i] / r for i, r, _ in running)
        arrivals = [jobs[i].release_time - now for i in range(n) if not released[i]]
        if arrivals:
            dt = min(dt, min(arrivals))
        flow += dt * len(act)
        energy += dt * sum(u for _, _, u in running)
        now += dt
        for i, r, _ in running:
            remaining[i] -= r * dt
            if remaining[i] <= 1e-12 * max(1.0, r * dt):
                phase[i] += 1
                if phase[i] == len(jobs[i].phases):
                    done[i] = True
                    left -= 1
                else:
                    remaining[i] = jobs[i].phases[phase[i]].work
    return flow + energy


def brute_force_g(instance: Instance, grid: Optional[Grid] = None) -> float:
    """Smallest G over a restricted schedule family; an upper bound on the optimum.

    The family: each phase runs on a fixed integer count ``a <= min(h, P)`` at one
    candidate speed (the log grid plus the isolated optimum for each count), and
    jobs are prioritized by a fixed ordering. For single-phase jobs with enough
    processors this family contains the optimum.
    Speed tuples are enumerated exhaustively when there are at most
    ``EXHAUSTIVE_LIMIT`` of them, otherwise refined by coordinate descent.
    """
    if (len(instance.jobs) > MAX_JOBS or instance.total_phases > MAX_PHASES
            or instance.P > MAX_P):
        raise TooLarge(
            f"brute force is limited to {MAX_JOBS} jobs, {MAX_PHASES} phases, P <= {MAX_P}")
    grid = grid or Grid()
    alpha, P = instance.alpha, instance.P
    speed_grid = grid.candidates(alpha, P)

    flat = [ph for job in instance.jobs for ph in job.phases]
    phase_list: list[list[int]] = []
    k = 0
    for job in instance.jobs:
        phase_list.append(list(range(k, k + len(job.phases))))
        k += len(job.phases)

    count_choices = [range(1, int(min(ph.parallelism, P)) + 1) for ph in flat]
    orders = list(itertools.permutations(range(len(instance.jobs))))
    best = math.inf

    for counts in itertools.product(*count_choices):
        for order in orders:
            if len(speed_grid) ** len(flat) <= EXHAUSTIVE_LIMIT:
                for sp in itertools.product(speed_grid, repeat=len(flat)):
                    best = min(best, _list_schedule_g(instance, phase_list, counts, sp, order))
            else:
                best = min(best, _coordinate_descent(instance, phase_list, counts,
                                                     speed_grid, order))
    return best


def _coordinate_descent(instance, phase_list, counts, speed_grid: Sequence[float], order,
                        sweeps: int = 8) -> float:
    # start every phase at its isolated optimum speed, snapped to the grid
    alpha = instance.alpha
    idx = [int(np.argmin([abs(s - (1.0 / ((alpha - 1.0) * c)) ** (1.0 / alpha))
                          for s in speed_grid])) for c in counts]
    cost = lambda ix: _list_schedule_g(instance, phase_list, counts,
                                       [speed_grid[i] for i in ix], order)
    best = cost(idx)
    for _ in range(sweeps):
        improved = False
        for p in range(len(idx)):
            for cand in range(len(speed_grid)):
                if cand == idx[p]:
                    continue
                trial = idx.copy()
                trial[p] = cand
                c = cost(trial)
                if c < best:
                    best, idx, improved = c, trial, True
        if not improved:
            break
    return best
