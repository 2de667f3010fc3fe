import math

import numpy as np
import pytest

from cfma.model import ChannelPair, CodingChoice, CovariancePair
from cfma.polynomial import RealPolynomial
from cfma.rates import achievable_pair
from cfma.sumcap import (check_sum_capacity, decide, f_gamma_poly, g_gamma_poly,
                         leading_coefficient_expected, nonpositive_intervals, q_gamma_poly)
from cfma.waterfill import iterative_waterfill
from oracles import dense_grid_achievable, f_direct


def test_f_siso():
    ch = ChannelPair([[1.0]], [[1.0]])
    f = f_gamma_poly(ch, CovariancePair([[1.0]], [[1.0]], 1.0))
    np.testing.assert_allclose(f.coeffs, [2, -2, 2], atol=1e-12)


def test_f_simo_matches_closed_quadratic(rng):
    for _ in range(100):
        h1, h2 = rng.uniform(size=(2, 2))
        P = float(10 ** rng.uniform(-1, 2))
        ch = ChannelPair.simo(h1, h2)
        f = f_gamma_poly(ch, CovariancePair([[P]], [[P]], P))
        want = [1 + P * h1 @ h1, -2 * P * h1 @ h2, 1 + P * h2 @ h2]
        np.testing.assert_allclose(f.coeffs, want, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("t", [1, 2, 3])
def test_f_zero_channel(t):
    ch = ChannelPair(np.zeros((2, t)), np.zeros((2, t)))
    f = f_gamma_poly(ch, CovariancePair.isotropic(t, 1.0))
    want = np.polynomial.polynomial.polypow([1, 0, 1], t)
    np.testing.assert_allclose(f.coeffs, want, atol=1e-9)


def test_f_leading_coefficient(rng):
    for _ in range(100):
        ch = ChannelPair(rng.uniform(size=(2, 2)), rng.uniform(size=(2, 2)))
        cov = iterative_waterfill(ch, float(10 ** rng.uniform(-1, 3))).covariance()
        f = f_gamma_poly(ch, cov)
        assert f.lead == pytest.approx(leading_coefficient_expected(ch, cov), rel=1e-8)
        for gamma in rng.uniform(0, 5, size=3):
            assert f(gamma) == pytest.approx(
                f_direct(gamma, ch.H1, ch.H2, cov.B1, cov.B2), rel=1e-8)


def test_g_examples():
    g = g_gamma_poly(RealPolynomial([2, -2, 2]), 3.0, 1)
    np.testing.assert_allclose(g.coeffs, [2, -(2 + math.sqrt(3)), 2], atol=1e-14)
    g = g_gamma_poly(RealPolynomial([1, 1, 1]), 1.0, 1)
    np.testing.assert_allclose(g.coeffs, [1, 0, 1], atol=1e-15)
    # no gamma^t term in f: the subtraction creates one
    g = g_gamma_poly(RealPolynomial([1, 0, 0, 0, 1]), 4.0, 2)
    np.testing.assert_allclose(g.coeffs, [1, 0, -2, 0, 1])


def test_siso_verdicts():
    ch = ChannelPair([[1.0]], [[1.0]])
    v = check_sum_capacity(ch, 2.0)
    assert v.achievable and not v.boundary
    np.testing.assert_allclose(v.g_poly.coeffs, [3, -(math.sqrt(5) + 4), 3], atol=1e-12)
    assert v.witness_sum_rate == pytest.approx(v.C_sum, abs=1e-9)
    assert not check_sum_capacity(ch, 1.0).achievable


@pytest.mark.parametrize("t", [1, 2])
def test_zero_channel_not_achievable(t):
    ch = ChannelPair(np.zeros((2, t)), np.zeros((2, t)))
    v = check_sum_capacity(ch, 1.0)
    assert not v.achievable
    np.testing.assert_allclose(v.g_poly.coeffs,
                               np.polynomial.polynomial.polypow([1, 0, 1], t)
                               - np.eye(2 * t + 1)[t], atol=1e-9)


def test_nonpositive_intervals():
    g = RealPolynomial.from_roots([1.0, 2.0])
    assert nonpositive_intervals(g, [1.0, 2.0]) == [(1.0, 2.0)]
    g = RealPolynomial.from_roots([1.0, 1.0])
    assert nonpositive_intervals(g, [1.0]) == [(1.0, 1.0)]


def test_tangency_is_boundary():
    ok, count, boundary, intervals, witness = decide(RealPolynomial([1, -2, 1]))
    assert ok and boundary and witness == pytest.approx(1.0, abs=1e-6)


def test_q_agrees_with_g(rng):
    for _ in range(200):
        ch = ChannelPair(rng.uniform(size=(2, 2)), rng.uniform(size=(2, 2)))
        cap = iterative_waterfill(ch, float(10 ** rng.uniform(0, 3)))
        f = f_gamma_poly(ch, cap.covariance())
        g, q = g_gamma_poly(f, cap.C_d, 2), q_gamma_poly(f, cap.C_d, 2)
        gam = np.logspace(-3, 3, 400)
        assert np.all(f(gam) > 0)
        gv, qv = g(gam), q(gam)
        clear = np.abs(gv) > 1e-9 * np.abs(g.coeffs).max()
        assert np.all(np.sign(gv[clear]) == np.sign(qv[clear]))


def test_sturm_matches_dense_grid(rng):
    disagree = 0
    for _ in range(300):
        ch = ChannelPair(rng.uniform(size=(2, 2)), rng.uniform(size=(2, 2)))
        v = check_sum_capacity(ch, float(10 ** rng.choice([0, 1, 2])))
        dense, at = dense_grid_achievable(v.g_poly.coeffs, n=20_000)
        if dense != v.achievable:
            disagree += 1
            assert v.boundary or abs(v.g_poly(at)) < 1e-6 * np.abs(v.g_poly.coeffs).max()
    assert disagree <= 1


def test_witness_pair_sums_to_capacity(rng):
    for _ in range(200):
        ch = ChannelPair(rng.uniform(size=(2, 2)), rng.uniform(size=(2, 2)))
        v = check_sum_capacity(ch, 100.0)
        if v.achievable and not v.boundary:
            res = achievable_pair(ch, v.capacity.covariance(),
                                  CodingChoice((1, 1), (1, 0), (v.gamma_witness, 1.0)))
            assert res.valid
            assert res.sum_rate == pytest.approx(v.C_sum, abs=1e-7)


def test_locate_false_skips_interval():
    v = check_sum_capacity(ChannelPair([[1.0]], [[1.0]]), 2.0, locate=False)
    assert v.achievable and v.gamma_witness is None
