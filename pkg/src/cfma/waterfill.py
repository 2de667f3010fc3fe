"""MIMO MAC sum capacity by iterative water-filling."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import ChannelPair, CovariancePair, InputError, det

log = logging.getLogger(__name__)

WF_TOL = 1e-10
WF_MAX_ITER = 10_000
POLICIES = ("joint", "per-user")


class ZeroChannelWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SumCapacityResult:
    C_sum: float
    C_d: float
    K1_star: np.ndarray
    K2_star: np.ndarray
    P: float
    iterations: int
    converged: bool
    history: tuple = field(default=(), repr=False)
    policy: str = "joint"

    def covariance(self) -> CovariancePair:
        return CovariancePair(self.K1_star, self.K2_star, self.P)


def _water_levels(gains: np.ndarray, P: float) -> np.ndarray:
    """Power per mode maximizing ``sum log(1 + g_i p_i)`` with ``sum p_i = P``.

    Modes are taken strongest first; the active set is the largest prefix
    whose common water level clears every member's floor ``1/g``. Tied
    gains enter or leave together.
    """
    powers = np.zeros_like(gains)
    live = np.flatnonzero(gains > 0)
    if live.size == 0:
        return powers
    order = live[np.argsort(-gains[live], kind="stable")]
    floors = 1.0 / gains[order]
    csum = np.cumsum(floors)
    k = np.arange(1, order.size + 1)
    levels = (P + csum) / k
    n_active = int(np.max(np.flatnonzero(levels > floors))) + 1
    mu = levels[n_active - 1]
    powers[order[:n_active]] = mu - floors[:n_active]
    return powers


def single_user_waterfill(H_eff, N_eff, P: float, diagonal: bool = False) -> np.ndarray:
    """Covariance ``K`` maximizing ``log|N_eff + H_eff K H_eff^T|`` s.t. ``tr K <= P``.

    With ``diagonal=True`` the search is restricted to diagonal ``K``. That
    is only exact when ``H_eff^T N_eff^{-1} H_eff`` is diagonal, which holds
    for diagonal channels; anything else is rejected.
    """
    H = np.atleast_2d(np.asarray(H_eff, dtype=float))
    N = np.atleast_2d(np.asarray(N_eff, dtype=float))
    t = H.shape[1]
    if not P > 0:
        raise InputError(f"power must be positive, got {P}")
    if not np.any(H):
        warnings.warn("zero channel: allocating no power", ZeroChannelWarning, stacklevel=2)
        return np.zeros((t, t))

    # L^{-1} differs from N^{-1/2} by an orthogonal factor on the left, which
    # leaves the gains and right singular vectors unchanged
    try:
        Lc = np.linalg.cholesky(N)
    except np.linalg.LinAlgError as exc:
        raise InputError("noise covariance must be positive definite") from exc
    Hw = np.linalg.solve(Lc, H)

    if diagonal:
        G = Hw.T @ Hw
        off = G - np.diag(np.diag(G))
        if np.max(np.abs(off)) > 1e-12 * max(1.0, np.max(np.abs(G))):
            raise InputError("diagonal water-filling needs decoupled antennas")
        return np.diag(_water_levels(np.diag(G).copy(), P))

    _, s, Vt = np.linalg.svd(Hw, full_matrices=True)
    gains = np.zeros(t)
    gains[: s.size] = s ** 2
    p = _water_levels(gains, P)
    K = Vt.T @ np.diag(p) @ Vt
    return 0.5 * (K + K.T)


def _sum_rate(ch: ChannelPair, K1, K2) -> float:
    return 0.5 * np.log2(det(ch.received_covariance(K1, K2)))


def iterative_waterfill(ch: ChannelPair, P: float, tol: float = WF_TOL,
                        max_iter: int = WF_MAX_ITER, diagonal: bool = False) -> SumCapacityResult:
    """Sum capacity and optimal covariances, updating user 1 then user 2.

    Each user water-fills against the noise plus the other user's current
    signal. Stops once a full sweep improves the sum rate by less than
    ``tol`` bits. ``history`` holds the sum rate after every half-step.
    """
    if not P > 0:
        raise InputError(f"power must be positive, got {P}")
    t, r = ch.t, ch.r
    if t == 1:
        # scalar trace constraint: full power is always optimal
        K1 = K2 = np.array([[float(P)]])
        C_d = det(ch.received_covariance(K1, K2))
        return SumCapacityResult(0.5 * np.log2(C_d), C_d, K1, K2, float(P), 0, True,
                                 (0.5 * np.log2(C_d),))

    K1 = np.zeros((t, t))
    K2 = np.zeros((t, t))
    history = [_sum_rate(ch, K1, K2)]
    converged = False
    it = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroChannelWarning)
        while it < max_iter:
            it += 1
            prev = history[-1]
            K1 = single_user_waterfill(ch.H1, np.eye(r) + ch.H2 @ K2 @ ch.H2.T, P, diagonal)
            history.append(_sum_rate(ch, K1, K2))
            K2 = single_user_waterfill(ch.H2, np.eye(r) + ch.H1 @ K1 @ ch.H1.T, P, diagonal)
            history.append(_sum_rate(ch, K1, K2))
            if history[-1] - prev < tol:
                converged = True
                break
    if not converged:
        log.warning("iterative water-filling stopped after %d sweeps", it)
    C_d = det(ch.received_covariance(K1, K2))
    return SumCapacityResult(0.5 * np.log2(C_d), C_d, K1, K2, float(P), it, converged,
                             tuple(history))


def per_user_waterfill(ch: ChannelPair, P: float, diagonal: bool = False) -> SumCapacityResult:
    """Each user water-fills its own channel against unit noise only.

    ``C_sum``/``C_d`` then describe the sum rate reached with these
    covariances, which is below the sum capacity in general.
    """
    if not P > 0:
        raise InputError(f"power must be positive, got {P}")
    I = np.eye(ch.r)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroChannelWarning)
        K1 = single_user_waterfill(ch.H1, I, P, diagonal)
        K2 = single_user_waterfill(ch.H2, I, P, diagonal)
    C_d = det(ch.received_covariance(K1, K2))
    return SumCapacityResult(0.5 * np.log2(C_d), C_d, K1, K2, float(P), 1, True,
                             (0.5 * np.log2(C_d),), policy="per-user")


def input_covariances(ch: ChannelPair, P: float, policy: str = "joint",
                      diagonal: bool = False) -> SumCapacityResult:
    if policy == "joint":
        return iterative_waterfill(ch, P, diagonal=diagonal)
    if policy == "per-user":
        return per_user_waterfill(ch, P, diagonal=diagonal)
    raise InputError(f"unknown power-split policy {policy!r}; expected one of {POLICIES}")
