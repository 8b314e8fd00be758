"""Job model, processor assignments and the rate/power semantics they induce."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence, Union

INF = math.inf


class ModelError(ValueError):
    """Raised when a model object is constructed with invalid data."""


def harmonic(n: int) -> float:
    """H_n = 1 + 1/2 + ... + 1/n (H_0 = 0)."""
    return math.fsum(1.0 / j for j in range(1, n + 1))


def kappa(alpha: float) -> float:
    """The recurring constant alpha / (alpha - 1)^(1 - 1/alpha)."""
    return alpha / (alpha - 1.0) ** (1.0 - 1.0 / alpha)


@dataclass(frozen=True)
class PowerParams:
    alpha: float
    P: int

    def __post_init__(self) -> None:
        if not (isinstance(self.alpha, (int, float)) and self.alpha > 1):
            raise ModelError(f"alpha must exceed 1 (got {self.alpha!r})")
        if not math.isfinite(self.alpha):
            raise ModelError("alpha must be finite")
        if isinstance(self.P, bool) or not isinstance(self.P, int) or self.P < 1:
            raise ModelError(f"P must be a positive integer (got {self.P!r})")


@dataclass(frozen=True)
class Phase:
    work: float
    parallelism: float = 1.0

    def __post_init__(self) -> None:
        if not (self.work > 0 and math.isfinite(self.work)):
            raise ModelError(f"phase work must be positive and finite (got {self.work!r})")
        if not self.parallelism >= 1:
            raise ModelError(f"parallelism must be >= 1 (got {self.parallelism!r})")

    @property
    def span(self) -> float:
        if math.isinf(self.parallelism):
            return 0.0
        return self.work / self.parallelism

    @property
    def sequential(self) -> bool:
        return self.parallelism == 1

    @property
    def fully_parallel(self) -> bool:
        return math.isinf(self.parallelism)


@dataclass(frozen=True)
class Job:
    id: Hashable
    phases: tuple[Phase, ...]
    release_time: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "phases", tuple(self.phases))
        if not self.phases:
            raise ModelError(f"job {self.id!r} has no phases")
        if not (self.release_time >= 0 and math.isfinite(self.release_time)):
            raise ModelError(f"job {self.id!r}: release time must be >= 0")

    @property
    def work(self) -> float:
        return math.fsum(p.work for p in self.phases)

    @property
    def span(self) -> float:
        return math.fsum(p.span for p in self.phases)

    @property
    def parseq(self) -> bool:
        return all(p.sequential or p.fully_parallel for p in self.phases)


@dataclass(frozen=True)
class Instance:
    params: PowerParams
    jobs: tuple[Job, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "jobs", tuple(self.jobs))
        if not self.jobs:
            raise ModelError("an instance needs at least one job")
        ids = [j.id for j in self.jobs]
        if len(set(ids)) != len(ids):
            raise ModelError("job ids must be unique")

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def P(self) -> int:
        return self.params.P

    @property
    def batched(self) -> bool:
        return all(j.release_time == 0 for j in self.jobs)

    @property
    def parseq(self) -> bool:
        return all(j.parseq for j in self.jobs)

    @property
    def total_phases(self) -> int:
        return sum(len(j.phases) for j in self.jobs)


def make_instance(alpha: float, P: int, jobs: Sequence[Sequence[tuple[float, float]]],
                  releases: Sequence[float] | None = None) -> Instance:
    """Shorthand: ``jobs`` is a list of phase lists ``[(work, parallelism), ...]``."""
    releases = releases if releases is not None else [0.0] * len(jobs)
    built = [
        Job(i, tuple(Phase(w, h) for w, h in phases), float(r))
        for i, (phases, r) in enumerate(zip(jobs, releases))
    ]
    return Instance(PowerParams(alpha, P), tuple(built))


# --------------------------------------------------------------------------
# Assignments
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Discrete:
    """Individually clocked processors, fastest first."""

    speeds: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "speeds", tuple(float(s) for s in self.speeds))
        for a, b in zip(self.speeds, self.speeds[1:]):
            if a < b:
                raise ModelError("discrete speeds must be sorted non-increasing")
        if self.speeds and self.speeds[-1] < 0:
            raise ModelError("speeds must be non-negative")

    @classmethod
    def of(cls, speeds) -> "Discrete":
        """Build from speeds in any order."""
        return cls(tuple(sorted((float(s) for s in speeds), reverse=True)))

    @property
    def count(self) -> float:
        return float(len(self.speeds))

    def scaled(self, k: float) -> "Discrete":
        return Discrete(tuple(s * k for s in self.speeds))


@dataclass(frozen=True)
class Fluid:
    """A (possibly fractional) number of processors sharing one speed."""

    count: float
    speed: float

    def __post_init__(self) -> None:
        if self.count < 0 or self.speed < 0:
            raise ModelError("fluid count and speed must be non-negative")

    def scaled(self, k: float) -> "Fluid":
        return Fluid(self.count, self.speed * k)


Assignment = Union[Discrete, Fluid]

IDLE = Fluid(0.0, 0.0)


def execution_rate(assignment: Assignment, h: float) -> float:
    """Rate under the maximum utilization policy: fastest processors first, up to h.

    A fractional cap uses the next processor linearly, so ``h = 2.5`` on speeds
    ``(3, 2, 1)`` gives ``3 + 2 + 0.5 * 1``.
    """
    if isinstance(assignment, Fluid):
        return min(assignment.count, h) * assignment.speed
    speeds = assignment.speeds
    a = len(speeds)
    if h >= a:
        return math.fsum(speeds)
    whole = int(math.floor(h))
    rate = math.fsum(speeds[:whole])
    frac = h - whole
    if frac > 0 and whole < a:
        rate += frac * speeds[whole]
    return rate


def power(assignment: Assignment, alpha: float) -> float:
    """Power drawn by every allocated processor, utilized or not."""
    if isinstance(assignment, Fluid):
        if assignment.count == 0 or assignment.speed == 0:
            return 0.0
        return assignment.count * assignment.speed ** alpha
    return math.fsum(s ** alpha for s in assignment.speeds)


@dataclass(frozen=True)
class Metrics:
    flow_total: float
    energy: float
    makespan: float

    @property
    def g(self) -> float:
        return self.flow_total + self.energy

    @property
    def h(self) -> float:
        return self.makespan + self.energy

    def objective(self, name: str) -> float:
        if name.upper() == "G":
            return self.g
        if name.upper() == "H":
            return self.h
        raise ValueError(f"unknown objective {name!r}")
