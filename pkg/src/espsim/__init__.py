"""Exact simulation and analysis of speed-scaled scheduling for phased parallel jobs."""

from .adversarial import (SpeedVector, TheoremConstants, adversary_best_h, robust_speed_vector,
                          theorem5_instance, theorem_constants)
from .analysis import PotentialState, RatioReport, check_arrival_condition, potential, ratio_harness
from .baselines import brute_force_g, equal_power_transform, g1_lower_bound, h_lower_bound
from .engine import Trace, TraceSegment, metrics, simulate
from .model import (INF, Discrete, Fluid, Instance, Job, Metrics, Phase, PowerParams,
                    execution_rate, make_instance, power)
from .policies import get_policy, nequi, pfirst, uceq

__all__ = [
    "INF", "Discrete", "Fluid", "Instance", "Job", "Metrics", "Phase", "PowerParams",
    "PotentialState", "RatioReport", "SpeedVector", "TheoremConstants", "Trace", "TraceSegment",
    "adversary_best_h", "brute_force_g", "check_arrival_condition", "equal_power_transform",
    "execution_rate", "g1_lower_bound", "get_policy", "h_lower_bound", "make_instance",
    "metrics", "nequi", "pfirst", "potential", "power", "ratio_harness", "robust_speed_vector",
    "simulate", "theorem5_instance", "theorem_constants", "uceq",
]
