"""Achievable CFMA rate pair for the two-user MIMO MAC.

Everything is evaluated per channel use: the concatenated n-symbol system
is block diagonal, so the n-dimensional determinants factor into n copies
of the t x t ones and the rates per channel use do not depend on n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import (ChannelPair, CodingChoice, CovariancePair, DegenerateError,
                    NumericalError, RatePairResult, det)


def _difference_term(ch: ChannelPair, cov: CovariancePair, at) -> np.ndarray:
    """``a~1 H2 B2 - a~2 H1 B1`` (r x t)."""
    return at[0] * ch.H2 @ cov.B2 - at[1] * ch.H1 @ cov.B1


def compute_M(ch: ChannelPair, cov: CovariancePair, choice: CodingChoice) -> np.ndarray:
    """The t x t matrix whose determinant governs both computation rates."""
    at = choice.a_tilde
    D = _difference_term(ch, cov, at)
    return (at[0] ** 2 + at[1] ** 2) * np.eye(ch.t) + D.T @ D


def _log_det_received(ch, cov) -> float:
    d = det(ch.received_covariance(cov.K1, cov.K2))
    if d <= 0:
        raise DegenerateError("received covariance is not positive definite")
    return np.log2(d)


def _log_det_M(ch, cov, choice) -> float:
    d = det(compute_M(ch, cov, choice))
    if d <= 0:
        raise DegenerateError(f"|M| = {d:.3e} is not positive")
    return np.log2(d)


def rate_first(l: int, ch: ChannelPair, cov: CovariancePair, choice: CodingChoice) -> float:
    """Rate of user ``l`` (1 or 2) for decoding the ``a`` combination.

    Not clamped at zero.
    """
    t = ch.t
    beta = choice.beta[l - 1]
    return 0.5 * (2 * t * np.log2(beta) + _log_det_received(ch, cov)
                  - _log_det_M(ch, cov, choice))


def rate_second(l: int, ch: ChannelPair, cov: CovariancePair, choice: CodingChoice) -> float:
    """Rate of user ``l`` for decoding the ``b`` combination after ``a``."""
    t = ch.t
    cross = choice.cross
    if cross == 0:
        raise DegenerateError("a~ and b~ are linearly dependent")
    beta = choice.beta[l - 1]
    return 0.5 * (2 * t * np.log2(beta) + _log_det_M(ch, cov, choice)
                  - 2 * t * np.log2(abs(cross)))


def achievable_pair(ch: ChannelPair, cov: CovariancePair, choice: CodingChoice) -> RatePairResult:
    """Case-split rate pair.

    A user with ``b_l = 0`` gets its ``a``-rate, a user with ``a_l = 0`` its
    ``b``-rate, anyone else the minimum of both. The pair is valid when
    every expression that enters the split is non-negative.
    """
    t = ch.t
    log_rx = _log_det_received(ch, cov)
    log_m = _log_det_M(ch, cov, choice)
    log_cross = np.log2(abs(choice.cross))
    first, second = [], []
    for beta in choice.beta:
        lb = 2 * t * np.log2(beta)
        first.append(0.5 * (lb + log_rx - log_m))
        second.append(0.5 * (lb + log_m - 2 * t * log_cross))

    rates, valid = [], True
    for l in range(2):
        if choice.b[l] == 0:
            used = [first[l]]
        elif choice.a[l] == 0:
            used = [second[l]]
        else:
            used = [first[l], second[l]]
        if min(used) < 0:
            valid = False
        rates.append(min(used))
    if not valid:
        rates = [float("nan"), float("nan")]
    return RatePairResult(float(rates[0]), float(rates[1]),
                          float(first[0]), float(first[1]),
                          float(second[0]), float(second[1]), valid)


def coefficient_candidates(extended: bool = False, a_max: int = 3):
    """Integer ``(a, b)`` pairs to try when the caller does not fix them.

    By default only ``a = (1, 1)`` with ``b`` in ``{(1, 0), (0, 1)}``.
    ``extended`` enumerates every linearly independent pair with entries in
    ``[-a_max, a_max]``.
    """
    if not extended:
        return [((1, 1), (1, 0)), ((1, 1), (0, 1))]
    rng = range(-a_max, a_max + 1)
    out = []
    for a in itertools.product(rng, repeat=2):
        if a == (0, 0):
            continue
        for b in itertools.product(rng, repeat=2):
            if a[0] * b[1] - a[1] * b[0] != 0:
                out.append((a, b))
    return out


def best_sum_rate(ch: ChannelPair, cov: CovariancePair, beta, extended: bool = False,
                  a_max: int = 3):
    """Largest valid sum rate over the coefficient candidates at fixed ``beta``."""
    best = None
    for a, b in coefficient_candidates(extended, a_max):
        res = achievable_pair(ch, cov, CodingChoice(a, b, beta))
        if res.valid and (best is None or res.sum_rate > best[1].sum_rate):
            best = ((a, b), res)
    return best


@dataclass(frozen=True)
class EffectiveNoiseReport:
    """Optimal equalizers and the determinants of the effective noise they leave.

    ``sigma1_det``/``sigma2_det`` come from plugging the equalizers into the
    defining covariance expressions; ``sigma1_pred``/``sigma2_pred`` are the
    closed-form determinant predictions they must match.
    """

    sigma1_det: float
    sigma2_det: float
    sigma1_pred: float
    sigma2_pred: float
    W_opt: np.ndarray
    F_opt: np.ndarray
    L_opt: np.ndarray


def sigma1(W, ch: ChannelPair, cov: CovariancePair, choice: CodingChoice) -> np.ndarray:
    """Effective-noise covariance after equalizing with ``W`` toward ``a``."""
    at = choice.a_tilde
    t = ch.t
    out = W @ W.T
    for a_l, H, B in ((at[0], ch.H1, cov.B1), (at[1], ch.H2, cov.B2)):
        E = a_l * np.eye(t) - W @ H @ B
        out = out + E @ E.T
    return out


def sigma2(F, L, ch: ChannelPair, cov: CovariancePair, choice: CodingChoice) -> np.ndarray:
    """Effective-noise covariance for the ``b`` combination given ``F`` and ``L``."""
    at, bt = choice.a_tilde, choice.b_tilde
    t = ch.t
    out = F @ F.T
    for a_l, b_l, H, B in ((at[0], bt[0], ch.H1, cov.B1), (at[1], bt[1], ch.H2, cov.B2)):
        E = b_l * np.eye(t) - F @ H @ B - a_l * L
        out = out + E @ E.T
    return out


def equalizer_oracle(ch: ChannelPair, cov: CovariancePair,
                     choice: CodingChoice) -> EffectiveNoiseReport:
    """Closed-form W*, L*, F* and the determinants of the noise they leave."""
    at, bt = choice.a_tilde, choice.b_tilde
    t = ch.t
    S = ch.received_covariance(cov.K1, cov.K2)
    if det(S) <= 0:
        raise NumericalError("I + sum H K H^T is singular")
    G = at[0] * cov.B1.T @ ch.H1.T + at[1] * cov.B2.T @ ch.H2.T  # t x r
    W = np.linalg.solve(S.T, G.T).T

    norm_a = at[0] ** 2 + at[1] ** 2
    cross = choice.cross
    D = _difference_term(ch, cov, at)  # r x t
    Mk = np.eye(ch.r) + (D @ D.T) / norm_a
    F = (cross / norm_a) * np.linalg.solve(Mk.T, D).T
    L = sum(a_l * (b_l * np.eye(t) - F @ H @ B)
            for a_l, b_l, H, B in ((at[0], bt[0], ch.H1, cov.B1),
                                   (at[1], bt[1], ch.H2, cov.B2))) / norm_a

    M_det = det(compute_M(ch, cov, choice))
    return EffectiveNoiseReport(
        sigma1_det=det(sigma1(W, ch, cov, choice)),
        sigma2_det=det(sigma2(F, L, ch, cov, choice)),
        sigma1_pred=M_det / det(S),
        sigma2_pred=cross ** (2 * t) / M_det,
        W_opt=W, F_opt=F, L_opt=L,
    )
