"""Exact event-driven simulation of policies on phased jobs.

Between two events (arrival, phase completion) a policy's assignment is
constant, so each segment is solved in closed form: the next event is the
earliest of the pending release and ``remaining / rate`` over active jobs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Hashable, Iterable, Mapping, Sequence

from .model import Assignment, Instance, Metrics, execution_rate, power

if TYPE_CHECKING:
    from .policies import Policy

log = logging.getLogger(__name__)

EVENT_TOL = 1e-12
CAPACITY_TOL = 1e-9
AGREEMENT_TOL = 1e-9


class SimulationError(RuntimeError):
    pass


class NonTermination(SimulationError):
    """Nothing in the system can make progress."""


class CapacityViolation(SimulationError):
    """A policy allocated more than P processors."""


class TraceInconsistency(SimulationError):
    """The two flow-time accounting paths of a trace disagree."""


@dataclass(frozen=True)
class Allocation:
    """One job's share of a segment."""

    job_id: Hashable
    phase: int
    parallelism: float
    assignment: Assignment
    rate: float
    power: float


@dataclass(frozen=True)
class TraceSegment:
    t_start: float
    t_end: float
    allocations: tuple[Allocation, ...]

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @property
    def n_active(self) -> int:
        return len(self.allocations)

    @property
    def total_power(self) -> float:
        return math.fsum(a.power for a in self.allocations)

    @property
    def allocated(self) -> float:
        return math.fsum(a.assignment.count for a in self.allocations)


@dataclass(frozen=True)
class Trace:
    segments: tuple[TraceSegment, ...]
    release: Mapping[Hashable, float]
    completion: Mapping[Hashable, float]

    @classmethod
    def from_segments(cls, segments: Iterable[TraceSegment],
                      release: Mapping[Hashable, float]) -> "Trace":
        """Derive completion times from the last segment each job appears in."""
        segments = tuple(segments)
        completion: dict[Hashable, float] = {}
        for seg in segments:
            for a in seg.allocations:
                completion[a.job_id] = seg.t_end
        return cls(segments, dict(release), completion)

    @property
    def flow(self) -> dict[Hashable, float]:
        return {j: c - self.release[j] for j, c in self.completion.items()}

    @property
    def makespan(self) -> float:
        return max(self.completion.values(), default=0.0)

    def work_done(self) -> dict[tuple[Hashable, int], float]:
        """Integrated rate per (job, phase)."""
        parts: dict[tuple[Hashable, int], list[float]] = {}
        for seg in self.segments:
            d = seg.duration
            for a in seg.allocations:
                parts.setdefault((a.job_id, a.phase), []).append(a.rate * d)
        return {k: math.fsum(v) for k, v in parts.items()}


def metrics(trace: Trace) -> Metrics:
    """F, E and M of a trace; F is computed two ways and cross-checked."""
    if not trace.segments:
        return Metrics(0.0, 0.0, 0.0)
    by_count = math.fsum(s.duration * s.n_active for s in trace.segments)
    by_jobs = math.fsum(trace.flow.values())
    if abs(by_count - by_jobs) > AGREEMENT_TOL * max(1.0, abs(by_jobs)):
        raise TraceInconsistency(
            f"flow by segment count {by_count!r} != sum of job flows {by_jobs!r}")
    energy = math.fsum(s.duration * s.total_power for s in trace.segments)
    return Metrics(by_jobs, energy, trace.makespan)


def rescale_segment(seg: TraceSegment, k: float, alpha: float,
                    t_start: float) -> TraceSegment:
    """Speed every processor up by ``k`` and shrink the duration by ``1/k``.

    The work each job receives in the segment is unchanged.
    """
    allocations = []
    for a in seg.allocations:
        assignment = a.assignment.scaled(k)
        allocations.append(Allocation(
            a.job_id, a.phase, a.parallelism, assignment,
            execution_rate(assignment, a.parallelism), power(assignment, alpha)))
    return TraceSegment(t_start, t_start + seg.duration / k, tuple(allocations))


# --------------------------------------------------------------------------
# Event loop
# --------------------------------------------------------------------------

@dataclass
class _Active:
    job_index: int
    phase: int
    remaining: float


def _snapshot(instance: Instance, active: Sequence[_Active]):
    return [(instance.jobs[a.job_index], a) for a in active]


def simulate(instance: Instance, policy: "Policy", max_events: int = 1_000_000) -> Trace:
    """Run ``policy`` on ``instance`` until every job completes."""
    from .policies import build_view

    policy.check_instance(instance)
    params = instance.params
    alpha, P = params.alpha, params.P
    jobs = instance.jobs

    pending = sorted(range(len(jobs)), key=lambda i: (jobs[i].release_time, i))
    pending.reverse()  # pop() from the end yields the earliest release
    active: list[_Active] = []
    completion: dict[Hashable, float] = {}
    segments: list[TraceSegment] = []
    now = 0.0

    def admit(t: float) -> None:
        while pending and jobs[pending[-1]].release_time <= t + EVENT_TOL:
            i = pending.pop()
            active.append(_Active(i, 0, jobs[i].phases[0].work))
        active.sort(key=lambda a: a.job_index)

    for _ in range(max_events):
        if not active:
            if not pending:
                break
            now = max(now, jobs[pending[-1]].release_time)
        admit(now)

        snap = _snapshot(instance, active)
        view = build_view(policy, snap)
        decision = policy.decide(view, params)
        allocations: list[Allocation] = []
        for job, state in snap:
            assignment = decision[job.id]
            h = job.phases[state.phase].parallelism
            allocations.append(Allocation(
                job.id, state.phase, h, assignment,
                execution_rate(assignment, h), power(assignment, alpha)))
        used = math.fsum(a.assignment.count for a in allocations)
        if used > P + CAPACITY_TOL:
            raise CapacityViolation(f"{policy.name} allocated {used} > P={P} at t={now}")

        next_arrival = jobs[pending[-1]].release_time - now if pending else math.inf
        finish = [st.remaining / a.rate if a.rate > 0 else math.inf
                  for a, (_, st) in zip(allocations, snap)]
        dt = min(min(finish), next_arrival)
        if math.isinf(dt):
            raise NonTermination(f"{policy.name}: no active job progresses at t={now}")

        t_end = now + dt
        segments.append(TraceSegment(now, t_end, tuple(allocations)))
        survivors: list[_Active] = []
        for alloc, (job, st), f in zip(allocations, snap, finish):
            if f <= dt + EVENT_TOL * max(1.0, dt):
                st.phase += 1
                if st.phase == len(job.phases):
                    completion[job.id] = t_end
                    continue
                st.remaining = job.phases[st.phase].work
            else:
                st.remaining -= alloc.rate * dt
            survivors.append(st)
        active = survivors
        now = t_end
    else:
        raise NonTermination(f"{policy.name}: exceeded {max_events} events")

    log.debug("%s: %d segments, makespan %.6g", policy.name, len(segments), now)
    release = {j.id: j.release_time for j in jobs}
    return Trace(tuple(segments), release, completion)
