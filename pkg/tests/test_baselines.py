import math

import numpy as np
import pytest

from conftest import random_corpus, rel_close
from espsim.adversarial import theorem5_instance
from espsim.baselines import (DegenerateSegment, Grid, NotBatched, NotParseq, TooLarge,
                              brute_force_g, equal_power_transform, g1_lower_bound,
                              h_lower_bound)
from espsim.engine import Allocation, Trace, TraceSegment, metrics, rescale_segment, simulate
from espsim.model import INF, Discrete, Fluid, PowerParams, make_instance, power
from espsim.policies import get_policy


def one_segment_trace(speeds, duration, alpha, h=1.0):
    a = Discrete(speeds)
    rate = sum(speeds[: int(min(h, len(speeds)))])
    seg = TraceSegment(0.0, duration, (Allocation(0, 0, h, a, rate, power(a, alpha)),))
    return Trace.from_segments([seg], {0: 0.0})


def test_g1_examples():
    assert g1_lower_bound(make_instance(2, 4, [[(4, 4)]])) == pytest.approx(4)
    assert g1_lower_bound(make_instance(2, 1, [[(1, 1)]])) == pytest.approx(2)
    assert g1_lower_bound(make_instance(2, 2, [[(1, 1)], [(1, 1)]])) == pytest.approx(4)
    # fully-parallel phases add exactly nothing
    assert g1_lower_bound(make_instance(2, 2, [[(1, 1), (50, INF)]])) == pytest.approx(2)


def test_h_lower_bound_examples():
    assert h_lower_bound(make_instance(2, 1, [[(1, INF)]])) == pytest.approx(2)
    t5 = theorem5_instance(PowerParams(2, 3))
    assert h_lower_bound(t5) == pytest.approx(2 * math.sqrt(11 / 6), rel=1e-12)
    assert h_lower_bound(t5) == pytest.approx(2.7080, abs=1e-4)
    mixed = make_instance(2, 4, [[(8, INF), (1, 1)]])
    assert h_lower_bound(mixed) == pytest.approx(9)


def test_h_lower_bound_preconditions():
    with pytest.raises(NotBatched):
        h_lower_bound(make_instance(2, 2, [[(1, 1)], [(1, 1)]], releases=[0, 1]))
    with pytest.raises(NotParseq):
        h_lower_bound(make_instance(2, 2, [[(1, 2)]]))


def test_transform_example():
    tr = one_segment_trace((2.0,), 1.0, 2)
    assert metrics(tr).h == pytest.approx(5)
    out = equal_power_transform(tr, PowerParams(2, 1))
    (seg,) = out.segments
    assert seg.allocations[0].assignment.speeds == pytest.approx((1.0,))
    assert seg.duration == pytest.approx(2.0)
    assert metrics(out).h == pytest.approx(4)


def test_transform_fixed_point():
    tr = one_segment_trace((0.7, 0.5, 0.3, 0.1), 3.0, 2, h=4)
    u = tr.segments[0].total_power
    scale = math.sqrt(1 / u)
    fixed = equal_power_transform(tr, PowerParams(2, 4))
    again = equal_power_transform(fixed, PowerParams(2, 4))
    assert again.segments[0].duration == pytest.approx(fixed.segments[0].duration, rel=1e-12)
    assert again.segments[0].allocations[0].assignment.speeds == pytest.approx(
        tuple(s * scale for s in (0.7, 0.5, 0.3, 0.1)), rel=1e-12)
    unit = one_segment_trace((0.8, 0.6), 2.5, 2, h=2)  # power 1 = 1/(alpha-1)
    out = equal_power_transform(unit, PowerParams(2, 2))
    assert out.segments[0].duration == pytest.approx(2.5, rel=1e-12)


def test_transform_drops_idle_and_rejects_degenerate():
    idle = TraceSegment(0.0, 1.0, (Allocation(0, 0, 1.0, Fluid(0, 0), 0.0, 0.0),))
    busy = one_segment_trace((1.0,), 1.0, 2).segments[0]
    busy = TraceSegment(1.0, 2.0, busy.allocations)
    out = equal_power_transform(Trace.from_segments([idle, busy], {0: 0.0}), PowerParams(2, 1))
    assert len(out.segments) == 1
    bad = TraceSegment(0.0, 1.0, (Allocation(0, 0, 1.0, Fluid(1, 0), 1.0, 0.0),))
    with pytest.raises(DegenerateSegment):
        equal_power_transform(Trace.from_segments([bad], {0: 0.0}), PowerParams(2, 1))


def test_lower_bounds_hold_on_corpus(corpus, parseq_corpus):
    for inst in corpus:
        lb = g1_lower_bound(inst)
        for pol in ("nequi", "uceq"):
            assert lb <= metrics(simulate(inst, get_policy(pol))).g * (1 + 1e-9)
    for inst in parseq_corpus:
        g = metrics(simulate(inst, get_policy("pfirst")))
        assert g1_lower_bound(inst) <= g.g * (1 + 1e-9)
        assert h_lower_bound(inst) <= g.h * (1 + 1e-9)


def test_transform_properties_on_policy_traces():
    for inst in random_corpus(20, seed=9, batched=True):
        params = inst.params
        for pol in ("nequi", "uceq"):
            tr = simulate(inst, get_policy(pol))
            out = equal_power_transform(tr, params)
            assert metrics(out).h <= metrics(tr).h * (1 + 1e-12)
            done_in, done_out = tr.work_done(), out.work_done()
            assert done_in.keys() == done_out.keys()
            for k in done_in:
                assert rel_close(done_in[k], done_out[k])
            for seg in out.segments:
                assert seg.total_power == pytest.approx(1 / (params.alpha - 1), rel=1e-12)


def test_grid_is_interior():
    for alpha in (1.5, 2, 3):
        g = Grid().speeds(alpha)
        opt = (1 / (alpha - 1)) ** (1 / alpha)
        assert len(g) == 64 and g[0] < opt * 0.5 and g[-1] > opt * 2


BRUTE_CASES = [
    (make_instance(2, 4, [[(4, 4)]]), 4.0),
    (make_instance(2, 1, [[(1, 1)]]), 2.0),
    (make_instance(2, 2, [[(1, 1)], [(1, 1)]]), 4.0),
]


@pytest.mark.parametrize("inst,expected", BRUTE_CASES)
def test_brute_force_brackets(inst, expected):
    g = brute_force_g(inst)
    lb = g1_lower_bound(inst)
    upper = metrics(simulate(inst, get_policy("uceq"))).g
    assert lb * (1 - 1e-12) <= g <= upper * (1 + 1e-12)
    assert g == pytest.approx(expected, rel=0.02)


def test_brute_force_multi_phase_is_an_upper_bound():
    inst = make_instance(2, 2, [[(1, 1), (2, 2)], [(1, 2)]])
    g = brute_force_g(inst, Grid(points=16))
    assert g >= g1_lower_bound(inst)


def test_brute_force_limits():
    with pytest.raises(TooLarge):
        brute_force_g(make_instance(2, 5, [[(1, 1)]]))
    with pytest.raises(TooLarge):
        brute_force_g(make_instance(2, 2, [[(1, 1)]] * 4))
