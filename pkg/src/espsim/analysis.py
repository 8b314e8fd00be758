"""Ratio-vs-lower-bound harness and the amortization potential function."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

from .adversarial import theorem_constants
from .baselines import g1_lower_bound, h_lower_bound
from .engine import Trace, metrics, simulate
from .model import Instance, Metrics, PowerParams
from .policies import get_policy

LOWER_TOL = 1e-9

# (policy, objective) -> theorem whose constants bound the ratio
THEOREM_FOR = {("nequi", "G"): "T1", ("uceq", "G"): "T3", ("pfirst", "H"): "T4"}


@dataclass(frozen=True)
class PotentialState:
    online: tuple[float, ...]
    reference: tuple[float, ...]
    eta: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "online", tuple(float(w) for w in self.online))
        object.__setattr__(self, "reference", tuple(float(w) for w in self.reference))
        if any(w < 0 for w in self.online + self.reference):
            raise ValueError("remaining works must be non-negative")

    def with_arrival(self, work: float) -> "PotentialState":
        return PotentialState(self.online + (work,), self.reference + (work,), self.eta)


def _count_at_least(sorted_works: Sequence[float], z: float) -> int:
    return len(sorted_works) - bisect.bisect_left(sorted_works, z)


def potential(state: PotentialState, params: PowerParams) -> float:
    """Exact value of the staircase integral over z of
    ``sum_{i<=n(z)} i^(1-1/alpha) - n(z)^(1-1/alpha) n*(z)``.

    Both counts only change at the remaining works themselves, so the integral
    is a finite sum over the intervals between consecutive distinct works.
    """
    e = 1.0 - 1.0 / params.alpha
    on = sorted(state.online)
    ref = sorted(state.reference)
    cuts = sorted({0.0, *on, *ref})
    n_max = len(on)
    prefix = [0.0]
    for i in range(1, n_max + 1):
        prefix.append(prefix[-1] + i ** e)
    terms = []
    for lo, hi in zip(cuts, cuts[1:]):
        n = _count_at_least(on, hi)
        n_ref = _count_at_least(ref, hi)
        terms.append((hi - lo) * (prefix[n] - n ** e * n_ref))
    return state.eta * math.fsum(terms)


def check_arrival_condition(state: PotentialState, new_work: float,
                            params: PowerParams, tol: float = 1e-9) -> bool:
    """Does adding the same job to both schedules leave the potential no larger?"""
    return potential(state.with_arrival(new_work), params) <= potential(state, params) + tol


def remaining_works(instance: Instance, trace: Trace, t: float) -> dict[Hashable, float]:
    """Remaining work (current plus future phases) of every job active at time ``t``."""
    done: dict[Hashable, list[float]] = {}
    for seg in trace.segments:
        if seg.t_start >= t:
            break
        d = min(seg.t_end, t) - seg.t_start
        for a in seg.allocations:
            done.setdefault(a.job_id, []).append(a.rate * d)
    out = {}
    for job in instance.jobs:
        if job.release_time <= t < trace.completion[job.id]:
            out[job.id] = max(0.0, job.work - math.fsum(done.get(job.id, ())))
    return out


@dataclass(frozen=True)
class RatioReport:
    instance_id: str
    policy: str
    objective: str
    alpha: float
    P: int
    n_jobs: int
    metrics: Metrics
    measured: float
    lower_bound: float
    ratio: float
    theorem_bound: Optional[float]
    bound_ok: bool
    extra: dict = field(default_factory=dict, compare=False)


def ratio_harness(instance: Instance, policy: str, objective: str = "G",
                  instance_id: str = "") -> RatioReport:
    """Simulate, divide the objective by its lower bound, check the theorem bound."""
    objective = objective.upper()
    pol = get_policy(policy)
    trace = simulate(instance, pol)
    m = metrics(trace)
    measured = m.objective(objective)
    if objective == "G":
        lower = g1_lower_bound(instance)
    else:
        lower = h_lower_bound(instance)
    ratio = measured / lower if lower > 0 else math.inf
    theorem = THEOREM_FOR.get((pol.name, objective))
    bound = theorem_constants(instance.params, theorem).bound if theorem else None
    ok = ratio >= 1.0 - LOWER_TOL and (bound is None or ratio <= bound * (1.0 + LOWER_TOL))
    return RatioReport(instance_id, pol.name, objective, instance.alpha, instance.P,
                       len(instance.jobs), m, measured, lower, ratio, bound, ok)
