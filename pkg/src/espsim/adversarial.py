"""Lower-bound constructions: the fixed-speed-vector game and the makespan instance.

In the game a non-clairvoyant scheduler commits to speeds ``s_1 >= ... >= s_P``
for a single job whose parallelism ``h`` is then picked by an adversary. The
scheduler's best answer equalizes ``h^(1-1/alpha) / sum_{j<=h} s_j`` over all h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import Instance, Job, Phase, PowerParams, harmonic, kappa

EQUALIZE_TOL = 1e-9


class AllZero(ValueError):
    """Every speed is zero, so the job never finishes."""


@dataclass(frozen=True)
class SpeedVector:
    speeds: tuple[float, ...]
    budget: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "speeds", tuple(float(s) for s in self.speeds))
        if any(a < b for a, b in zip(self.speeds, self.speeds[1:])):
            raise ValueError("speeds must be sorted non-increasing")
        if self.speeds and self.speeds[-1] < 0:
            raise ValueError("speeds must be non-negative")

    @property
    def P(self) -> int:
        return len(self.speeds)

    def power(self, alpha: float) -> float:
        return math.fsum(s ** alpha for s in self.speeds)


def ratio_profile(speeds: Sequence[float], alpha: float) -> list[float]:
    """g(h) = h^(1-1/alpha) / sum_{j<=h} s_j for h = 1..P (inf where the prefix sum is 0)."""
    out = []
    prefix = 0.0
    for h, s in enumerate(speeds, start=1):
        prefix += s
        out.append(h ** (1.0 - 1.0 / alpha) / prefix if prefix > 0 else math.inf)
    return out


def robust_weights(P: int, alpha: float) -> np.ndarray:
    """x_j = j^(1-1/alpha) - (j-1)^(1-1/alpha)."""
    j = np.arange(1, P + 1, dtype=float)
    e = 1.0 - 1.0 / alpha
    return j ** e - (j - 1.0) ** e


def robust_speed_vector(params: PowerParams, b: float) -> SpeedVector:
    if not b > 0:
        raise ValueError("budget must be positive")
    alpha = params.alpha
    x = robust_weights(params.P, alpha)
    scale = (b / float(np.sum(x ** alpha))) ** (1.0 / alpha)
    vec = SpeedVector(tuple(float(v) for v in x * scale), b)
    g = ratio_profile(vec.speeds, alpha)
    if max(g) - min(g) > EQUALIZE_TOL * max(g):
        raise ArithmeticError(f"robust vector failed to equalize: spread {max(g) - min(g)}")
    return vec


def game_ratio_factor(u: float, alpha: float) -> float:
    """(alpha-1)^(1-1/alpha) (1+u) / alpha: multiplies g(h) to give G_A / G*."""
    return (alpha - 1.0) ** (1.0 - 1.0 / alpha) * (1.0 + u) / alpha


def adversary_best_h(speeds: SpeedVector | Sequence[float],
                     params: PowerParams) -> tuple[int, float]:
    """The adversary's parallelism (lowest on ties) and the resulting cost ratio."""
    s = speeds.speeds if isinstance(speeds, SpeedVector) else tuple(speeds)
    if not any(v > 0 for v in s):
        raise AllZero("every speed is zero")
    alpha = params.alpha
    u = math.fsum(v ** alpha for v in s)
    g = ratio_profile(s, alpha)
    top = max(g)
    h = next(i for i, v in enumerate(g, start=1) if v >= top * (1.0 - 1e-12))
    return h, game_ratio_factor(u, alpha) * top


def game_lower_bound(params: PowerParams) -> float:
    """((alpha-1)/alpha) H_P^(1/alpha): no speed vector does better."""
    alpha = params.alpha
    return (alpha - 1.0) / alpha * harmonic(params.P) ** (1.0 / alpha)


def random_speed_vector(P: int, b: float, alpha: float,
                        rng: np.random.Generator) -> SpeedVector:
    """A random positive vector projected onto the budget surface and sorted."""
    raw = rng.random(P) + 1e-12
    raw *= (b / float(np.sum(raw ** alpha))) ** (1.0 / alpha)
    return SpeedVector(tuple(sorted(raw.tolist(), reverse=True)), b)


def theorem5_instance(params: PowerParams) -> Instance:
    """P batched sequential jobs, the i-th with span 1 / (P - i + 1)^(1/alpha)."""
    P, alpha = params.P, params.alpha
    jobs = [Job(i - 1, (Phase((P - i + 1) ** (-1.0 / alpha), 1.0),))
            for i in range(1, P + 1)]
    return Instance(params, tuple(jobs))


def theorem5_pfirst_h(params: PowerParams) -> float:
    """Closed-form H of P-FIRST on :func:`theorem5_instance`."""
    P, alpha = params.P, params.alpha
    spans = [(P - i + 1) ** (-1.0 / alpha) for i in range(1, P + 1)]
    m = math.fsum(((P - i + 1) ** (1.0 / alpha) - (P - i) ** (1.0 / alpha)) * spans[i - 1]
                  for i in range(1, P + 1))
    return kappa(alpha) * m


@dataclass(frozen=True)
class TheoremConstants:
    theorem: str
    bound: float
    c1: Optional[float] = None
    c2: Optional[float] = None
    eta_prime: Optional[float] = None
    lam: Optional[float] = None

    def eta(self, params: PowerParams) -> float:
        """Potential-function scale for this theorem at the given P."""
        if self.eta_prime is None:
            raise ValueError(f"{self.theorem} has no potential function")
        alpha, P = params.alpha, params.P
        base = self.eta_prime / P ** (1.0 - 1.0 / alpha)
        if self.theorem == "T1":
            return base * harmonic(P) ** (1.0 / alpha)
        return base


def theorem_constants(params: PowerParams, theorem: str) -> TheoremConstants:
    a = params.alpha
    hp = harmonic(params.P)
    t = theorem.upper()
    if t == "T1":
        c1 = max(4 * a ** 3 / (a - 1) ** 2, 4 ** a * a * hp)
        c2 = 2 * a * (2 * hp) ** (1 / a)
        return TheoremConstants("T1", c1 + c2, c1, c2,
                                4 * a ** 2 / (a - 1) ** (1 - 1 / a),
                                4 ** (a - 1) * (a - 1) ** (1 - 1 / a))
    if t == "T3":
        c1 = max(2 * a ** 2 / (a - 1), 2 ** a * a)
        c2 = 2 * a
        return TheoremConstants("T3", c1 + c2, c1, c2,
                                2 * a ** 2 / (a - 1) ** (1 - 1 / a),
                                2 ** (a - 1) * (a - 1) ** (1 - 1 / a))
    if t == "T4":
        return TheoremConstants("T4", 1 + hp ** (1 - 1 / a))
    raise ValueError(f"unknown theorem {theorem!r}; expected T1, T3 or T4")
