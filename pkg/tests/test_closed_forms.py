import math

import numpy as np
import pytest

from cfma.closed_forms import (CollinearError, DiagInstance, NoRootError, NotCollinearError,
                               SimoInstance, diag_conditions, diag_power_threshold,
                               simo_collinear_achievable, simo_delta, simo_gamma_range,
                               simo_noncollinear_condition, simo_p_star)
from cfma.model import ChannelPair
from cfma.sumcap import check_sum_capacity

E1 = np.array([1.0, 0.0])


def test_delta_examples():
    assert simo_delta(SimoInstance(E1, E1, 2.0)) == pytest.approx((math.sqrt(5) + 4) ** 2 - 36)
    assert simo_delta(SimoInstance(E1, E1, 2.0)) == pytest.approx(2.889, abs=1e-3)
    assert simo_delta(SimoInstance(E1, E1, 1.0)) == pytest.approx(-2.072, abs=1e-3)


def test_delta_at_zero_power(rng):
    for _ in range(100):
        h1, h2 = rng.uniform(size=(2, 3))
        assert simo_delta(SimoInstance(h1, h2, 0.0)) == -3.0


def test_gamma_range():
    lo, hi = simo_gamma_range(SimoInstance(E1, E1, 2.0))
    d = (math.sqrt(5) + 4) ** 2 - 36
    assert lo == pytest.approx((math.sqrt(5) + 4 - math.sqrt(d)) / 6, rel=1e-12)
    assert hi == pytest.approx((math.sqrt(5) + 4 + math.sqrt(d)) / 6, rel=1e-12)
    assert (round(lo, 3), round(hi, 3)) == (0.756, 1.323)
    mid = 0.5 * (lo + hi)
    assert 3 * mid ** 2 - (math.sqrt(5) + 4) * mid + 3 <= 0
    assert simo_gamma_range(SimoInstance(E1, E1, 1.0)) is None
    assert simo_gamma_range(SimoInstance(E1, np.array([0.0, 1.0]), 1e-6)) is None


def test_collinear():
    assert simo_collinear_achievable(SimoInstance(E1, E1, 2.0))
    assert not simo_collinear_achievable(SimoInstance(E1, E1, 1.0))
    for P in (0.1, 1.0, 1e3, 1e6):
        assert not simo_collinear_achievable(SimoInstance(E1, -E1, P))
    with pytest.raises(NotCollinearError):
        simo_collinear_achievable(SimoInstance(E1, np.array([1.0, 1.0]), 1.0))


def test_noncollinear_condition():
    assert simo_noncollinear_condition(SimoInstance(E1, np.array([1.0, 1.0]), 1.0))
    assert not simo_noncollinear_condition(SimoInstance(E1, np.array([0.0, 1.0]), 1.0))
    with pytest.raises(CollinearError):
        simo_noncollinear_condition(SimoInstance(E1, 2 * E1, 1.0))


def test_noncollinear_equals_angle_test(rng):
    # expanding the condition gives 16 <h1,h2>^2 > 9 lam1 lam2, i.e. cos > 3/5
    for _ in range(1000):
        h1, h2 = rng.uniform(size=(2, 2))
        inst = SimoInstance(h1, h2, 1.0)
        cos = h1 @ h2 / np.sqrt((h1 @ h1) * (h2 @ h2))
        if abs(cos - 0.6) > 1e-9:
            assert simo_noncollinear_condition(inst) == (cos > 0.6)


def test_p_star():
    inst = SimoInstance(E1, np.array([1.0, 1.0]), 1.0)
    p = simo_p_star(inst)
    assert abs(simo_delta(inst, p)) < 1e-8
    assert simo_delta(inst, 1.01 * p) > 0
    assert simo_delta(inst, 0.99 * p) < 0
    ch = ChannelPair.simo(E1, [1.0, 1.0])
    assert not check_sum_capacity(ch, 0.99 * p).achievable
    assert check_sum_capacity(ch, 1.01 * p).achievable
    with pytest.raises(NoRootError):
        simo_p_star(SimoInstance(E1, np.array([0.0, 1.0]), 1.0))


def test_sufficient_conditions_are_sound(rng):
    for _ in range(500):
        h1, h2 = rng.uniform(size=(2, 2))
        inst = SimoInstance(h1, h2, 1.0)
        if simo_noncollinear_condition(inst):
            p = simo_p_star(inst)
            for P in (p, 2 * p, 10 * p, 1e3 * p):
                assert simo_delta(inst, P) >= -1e-9


def test_collinear_continuity():
    # the two C_d branches meet as h2 turns onto h1
    base = SimoInstance(E1, np.array([2.0, 0.0]), 3.0)
    near = SimoInstance(E1, np.array([2.0, 1e-7]), 3.0)
    assert near.C_d() == pytest.approx(base.C_d(), rel=1e-6)
    assert simo_delta(near) == pytest.approx(simo_delta(base), rel=1e-6)


def test_simo_sturm_consistency(rng):
    for _ in range(300):
        h1, h2 = rng.uniform(size=(2, 2))
        for P in (1.0, 10.0, 100.0):
            inst = SimoInstance(h1, h2, P)
            v = check_sum_capacity(ChannelPair.simo(h1, h2), P)
            d = simo_delta(inst)
            if abs(d) > 1e-9:
                assert v.achievable == (d >= 0)
            if v.achievable and not v.boundary:
                lo, hi = simo_gamma_range(inst)
                (a, b), = v.gamma_interval
                assert a == pytest.approx(lo, rel=1e-6)
                assert b == pytest.approx(hi, rel=1e-6)


def _diag_from_c(c):
    return DiagInstance(np.asarray(c) * math.sqrt(2), np.full((2, 2), 0.5), 1.0)


def test_diag_symmetric():
    inst = _diag_from_c(np.full((2, 2), math.sqrt(0.5)))
    cond = diag_conditions(inst)
    assert cond.cond1 and cond.gamma1 == pytest.approx(1.0)
    # q(1; P) = 16 - (1 + P)^2
    for P in (0.5, 2.0, 7.0):
        assert inst.q(1.0, P) == pytest.approx(16 - (1 + P) ** 2, rel=1e-12)
    assert diag_power_threshold(inst, 1.0) == pytest.approx(3.0, rel=1e-12)


def test_diag_failing_condition():
    inst = _diag_from_c([[1.0, 0.1], [1.0, 2.0]])
    cond = diag_conditions(inst)
    assert (2 - 0.1) ** 2 == pytest.approx(3.61)
    assert math.sqrt(4.01 / 2) == pytest.approx(1.416, abs=1e-3)
    assert cond.cond1 is False
    assert diag_power_threshold(inst, cond.gamma1) is None


def test_diag_condition_implies_eventual_negativity(rng):
    hits = 0
    for _ in range(500):
        inst = _diag_from_c(rng.uniform(size=(2, 2)))
        cond = diag_conditions(inst)
        if cond.cond1:
            hits += 1
            p0 = diag_power_threshold(inst, cond.gamma1)
            assert p0 is not None
            # near the condition boundary P0 can be huge; check beyond it
            for P in [x for x in (1e3, 1e4, 1e5) if x > p0] + [1.01 * p0, 10 * p0]:
                assert inst.q(cond.gamma1, P) < 0
    assert hits > 0
