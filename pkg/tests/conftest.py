import math

import numpy as np
import pytest

from espsim.model import PowerParams
from espsim.scenario import RandomSpec, uniform_random_instance

ALPHAS = (1.5, 2.0, 3.0)


def random_corpus(n, seed, max_P=16, max_jobs=6, batched=False, parseq=False,
                  inf_fraction=0.0):
    """Fixed-seed corpus of random instances cycling through ALPHAS."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        alpha = ALPHAS[k % len(ALPHAS)]
        P = int(rng.integers(1, max_P + 1))
        spread = 0.0 if batched else float(rng.choice([0.0, 1.0, 4.0]))
        spec = RandomSpec(seed=seed, jobs=int(rng.integers(1, max_jobs + 1)), phases=(1, 3),
                          work=(0.1, 5.0), parallelism=(1, P), release_spread=spread,
                          parseq=parseq, inf_fraction=inf_fraction)
        out.append(uniform_random_instance(PowerParams(alpha, P), spec, rng))
    return out


def rel_close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


@pytest.fixture(scope="session")
def corpus():
    return random_corpus(60, seed=2024)


@pytest.fixture(scope="session")
def parseq_corpus():
    return random_corpus(40, seed=77, batched=True, parseq=True)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
