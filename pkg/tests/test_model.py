import math

import pytest
from hypothesis import given, strategies as st

from espsim.model import (INF, Discrete, Fluid, Instance, Job, Metrics, ModelError, Phase,
                          PowerParams, execution_rate, harmonic, kappa, make_instance, power)

speeds_st = st.lists(st.floats(0, 10, allow_nan=False), min_size=0, max_size=8)
h_st = st.one_of(st.floats(1, 12, allow_nan=False), st.just(INF))


def test_params_validation():
    with pytest.raises(ModelError, match="alpha must exceed 1"):
        PowerParams(1.0, 2)
    with pytest.raises(ModelError):
        PowerParams(0.5, 2)
    with pytest.raises(ModelError):
        PowerParams(2.0, 0)
    PowerParams(1.0001, 1)


def test_phase_and_job_accessors():
    seq, par = Phase(3.0, 1), Phase(2.0, INF)
    assert seq.span == 3.0 and par.span == 0.0
    assert Phase(4.0, 4).span == 1.0
    job = Job("a", (seq, par, Phase(4.0, 2)))
    assert job.work == 9.0 and job.span == 5.0
    assert not job.parseq
    with pytest.raises(ModelError):
        Phase(0.0, 1)
    with pytest.raises(ModelError):
        Phase(1.0, 0.5)
    with pytest.raises(ModelError):
        Job("x", ())


def test_instance_flags():
    batched = make_instance(2, 2, [[(1, 1), (2, INF)], [(1, 1)]])
    assert batched.batched and batched.parseq
    released = make_instance(2, 2, [[(1, 3)], [(1, 1)]], releases=[0, 1])
    assert not released.batched and not released.parseq
    with pytest.raises(ModelError):
        Instance(PowerParams(2, 1), (Job(0, (Phase(1),)), Job(0, (Phase(1),))))


def test_execution_rate_examples():
    d = Discrete((2, 1, 1))
    assert execution_rate(d, 2) == 3
    assert execution_rate(d, INF) == 4
    assert execution_rate(Fluid(0.5, 1.0), 4) == 0.5
    # fractional cap uses the next processor linearly
    assert execution_rate(Discrete((3, 2, 1)), 2.5) == pytest.approx(5.5)
    assert execution_rate(Discrete((3, 2)), 2.5) == 5
    assert execution_rate(Fluid(4, 0.5), 2.5) == 1.25


def test_power_examples():
    assert power(Discrete((1, 1)), 2) == 2
    assert power(Fluid(4, 0.5), 2) == 1
    ladder = Discrete((0.6928, 0.4899, 0.4000, 0.3464))
    assert power(ladder, 2) == pytest.approx(1.0, abs=1e-3)
    assert power(Discrete(()), 2) == 0
    assert power(Fluid(0, 3), 2) == 0


def test_discrete_must_be_sorted():
    with pytest.raises(ModelError):
        Discrete((1, 2))
    assert Discrete.of((1, 3, 2)).speeds == (3, 2, 1)


def test_constants():
    assert harmonic(1) == 1 and harmonic(4) == pytest.approx(25 / 12)
    assert kappa(2) == pytest.approx(2)
    for a in (1.01, 1.5, 3, 10):
        assert kappa(a) > 1


def test_metrics_sums():
    m = Metrics(2.0, 3.0, 1.5)
    assert m.g == 5.0 and m.h == 4.5
    assert m.objective("g") == 5.0 and m.objective("H") == 4.5


@given(speeds_st, h_st, st.floats(0, 3))
def test_rate_monotone_in_h(speeds, h, dh):
    d = Discrete.of(speeds)
    assert execution_rate(d, h) <= execution_rate(d, h + dh) + 1e-12


@given(speeds_st, h_st, st.integers(0, 7), st.floats(0, 5))
def test_rate_monotone_in_speed(speeds, h, idx, bump):
    if not speeds:
        return
    d = Discrete.of(speeds)
    bumped = list(d.speeds)
    bumped[idx % len(bumped)] += bump
    assert execution_rate(d, h) <= execution_rate(Discrete.of(bumped), h) + 1e-9


@given(st.floats(0.01, 5), st.integers(1, 8), st.integers(0, 4), st.floats(1.1, 4))
def test_uniform_speed_rate_and_power(s, h, extra, alpha):
    d = Discrete((s,) * (h + extra))
    assert execution_rate(d, h) == pytest.approx(h * s)
    assert power(d, alpha) >= h * s ** alpha * (1 - 1e-12)
    if extra == 0:
        assert power(d, alpha) == pytest.approx(h * s ** alpha)


@given(st.permutations([0.3, 1.7, 0.0, 2.2, 0.9]), st.floats(1.1, 4))
def test_power_order_invariant(perm, alpha):
    assert power(Discrete.of(perm), alpha) == pytest.approx(
        sum(s ** alpha for s in perm), rel=1e-12)
