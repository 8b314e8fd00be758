"""Online allocation policies: N-EQUI, U-CEQ and P-FIRST.

A policy only ever sees a :class:`PolicyView`. Non-clairvoyant policies get the
active job ids and nothing else; semi-clairvoyant ones additionally see each
job's current-phase parallelism. Remaining work and future phases are never
exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Hashable, Mapping, Optional

from .model import IDLE, Assignment, Discrete, Fluid, Instance, ModelError, PowerParams, harmonic

NON = "non"
SEMI = "semi"


class ModelViolation(ModelError):
    """The instance is outside the job class a policy was designed for."""


@dataclass(frozen=True)
class PolicyView:
    job_ids: tuple[Hashable, ...]
    parallelism: Optional[tuple[float, ...]] = None

    @property
    def n_active(self) -> int:
        return len(self.job_ids)


Decision = Mapping[Hashable, Assignment]


@dataclass(frozen=True)
class Policy:
    name: str
    clairvoyance: str
    rule: Callable[[PolicyView, PowerParams], Decision]
    batched_parseq_only: bool = False

    def decide(self, view: PolicyView, params: PowerParams) -> Decision:
        return self.rule(view, params)

    def check_instance(self, instance: Instance) -> None:
        if self.batched_parseq_only:
            if not instance.batched:
                raise ModelViolation(f"{self.name} requires a batched instance")
            if not instance.parseq:
                raise ModelViolation(f"{self.name} requires PAR-SEQ jobs")


def build_view(policy: Policy, snapshot) -> PolicyView:
    """``snapshot`` is a sequence of (job, state) pairs in job order."""
    ids = tuple(job.id for job, _ in snapshot)
    if policy.clairvoyance == NON:
        return PolicyView(ids)
    return PolicyView(ids, tuple(job.phases[st.phase].parallelism for job, st in snapshot))


@lru_cache(maxsize=256)
def nequi_ladder(alpha: float, P: int) -> tuple[float, ...]:
    """s_j = (1 / ((alpha-1) H_P j))^(1/alpha) for j = 1..P."""
    hp = harmonic(P)
    return tuple((1.0 / ((alpha - 1.0) * hp * j)) ** (1.0 / alpha) for j in range(1, P + 1))


def nequi(view: PolicyView, params: PowerParams) -> dict[Hashable, Assignment]:
    n = view.n_active
    ladder = nequi_ladder(params.alpha, params.P)
    a = params.P // n
    if a >= 1:
        share = Discrete(ladder[:a])
        return {j: share for j in view.job_ids}
    # more jobs than processors: the first P jobs get one ladder-top processor
    top = Discrete(ladder[:1])
    return {j: (top if i < params.P else Discrete(())) for i, j in enumerate(view.job_ids)}


def _require_parallelism(view: PolicyView, name: str) -> tuple[float, ...]:
    if view.parallelism is None:
        raise ModelViolation(f"{name} needs a semi-clairvoyant view")
    return view.parallelism


def uniform_speed(alpha: float, count: float) -> float:
    """Speed at which ``count`` processors together draw power 1/(alpha-1)."""
    return (1.0 / ((alpha - 1.0) * count)) ** (1.0 / alpha)


def uceq(view: PolicyView, params: PowerParams) -> dict[Hashable, Assignment]:
    hs = _require_parallelism(view, "uceq")
    equal_share = params.P / view.n_active
    out: dict[Hashable, Assignment] = {}
    for j, h in zip(view.job_ids, hs):
        a = min(h, equal_share)
        out[j] = Fluid(a, uniform_speed(params.alpha, a))
    return out


def pfirst(view: PolicyView, params: PowerParams) -> dict[Hashable, Assignment]:
    hs = _require_parallelism(view, "pfirst")
    for h in hs:
        if 1 < h < math.inf:
            raise ModelViolation(f"pfirst got parallelism {h}; only 1 and inf are allowed")
    alpha, P = params.alpha, params.P
    out: dict[Hashable, Assignment] = {j: IDLE for j in view.job_ids}
    for j, h in zip(view.job_ids, hs):
        if math.isinf(h):
            out[j] = Fluid(float(P), uniform_speed(alpha, P))
            return out
    n = view.n_active
    p_used = min(n, P)
    speed = uniform_speed(alpha, p_used)
    for j in view.job_ids:
        out[j] = Fluid(p_used / n, speed)
    return out


POLICIES: dict[str, Policy] = {
    "nequi": Policy("nequi", NON, nequi),
    "uceq": Policy("uceq", SEMI, uceq),
    "pfirst": Policy("pfirst", SEMI, pfirst, batched_parseq_only=True),
}


def get_policy(name: str) -> Policy:
    try:
        return POLICIES[name.lower()]
    except KeyError:
        raise KeyError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}") from None
