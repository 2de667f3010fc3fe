"""Closed-form sum-capacity conditions for SIMO and 2x2 diagonal channels.

These are formula-level implementations, independent of the polynomial
machinery in :mod:`cfma.sumcap`, and serve both as fast paths and as
cross-checks for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .model import ChannelPair, CovariancePair, InputError, NumericalError

TOL_COLLINEAR = 1e-10


class CollinearError(InputError):
    pass


class NotCollinearError(InputError):
    pass


class NoRootError(NumericalError):
    pass


@dataclass(frozen=True)
class SimoInstance:
    """Two single-antenna users seen through receive vectors ``h1``, ``h2``.

    The two nonzero eigenvalues of ``h1 h1^T + h2 h2^T`` are taken from the
    2x2 Gram matrix of ``(h1, h2)``, which has the same nonzero spectrum.
    """

    h1: np.ndarray
    h2: np.ndarray
    P: float
    norm1: float = field(init=False)
    norm2: float = field(init=False)
    inner: float = field(init=False)
    lam1: float = field(init=False)
    lam2: float = field(init=False)

    def __post_init__(self):
        h1 = np.asarray(self.h1, dtype=float).ravel()
        h2 = np.asarray(self.h2, dtype=float).ravel()
        if h1.shape != h2.shape:
            raise InputError("h1 and h2 must have the same length")
        if not self.P >= 0:
            raise InputError(f"power must be non-negative, got {self.P}")
        n1, n2, ip = float(h1 @ h1), float(h2 @ h2), float(h1 @ h2)
        tr = n1 + n2
        gram_det = max(n1 * n2 - ip * ip, 0.0)
        lam1 = 0.5 * tr + np.sqrt(max(0.25 * tr * tr - gram_det, 0.0))
        lam2 = gram_det / lam1 if lam1 > 0 else 0.0
        for name, val in (("h1", h1), ("h2", h2), ("P", float(self.P)), ("norm1", n1),
                          ("norm2", n2), ("inner", ip), ("lam1", lam1), ("lam2", lam2)):
            object.__setattr__(self, name, val)

    @classmethod
    def from_channel(cls, ch: ChannelPair, P: float) -> "SimoInstance":
        if ch.t != 1:
            raise InputError(f"SIMO needs t = 1, got t = {ch.t}")
        return cls(ch.H1[:, 0], ch.H2[:, 0], P)

    @property
    def collinear(self) -> bool:
        return self.lam2 <= TOL_COLLINEAR * self.lam1

    def C_d(self, P: Optional[float] = None) -> float:
        P = self.P if P is None else P
        if self.collinear:
            return 1.0 + self.lam1 * P
        return (1.0 + self.lam1 * P) * (1.0 + self.lam2 * P)

    def at_power(self, P: float) -> "SimoInstance":
        return SimoInstance(self.h1, self.h2, P)


def simo_delta(inst: SimoInstance, P: Optional[float] = None) -> float:
    """Discriminant of the quadratic ``g(gamma)`` for a SIMO channel."""
    P = inst.P if P is None else P
    return ((np.sqrt(inst.C_d(P)) + 2 * P * inst.inner) ** 2
            - 4 * (1 + P * inst.norm1) * (1 + P * inst.norm2))


def simo_gamma_range(inst: SimoInstance) -> Optional[tuple]:
    """Closed interval of admissible ``gamma`` when the discriminant is non-negative."""
    delta = simo_delta(inst)
    if delta < 0:
        return None
    mid = np.sqrt(inst.C_d()) + 2 * inst.P * inst.inner
    den = 2 * (1 + inst.P * inst.norm2)
    root = np.sqrt(delta)
    return ((mid - root) / den, (mid + root) / den)


def simo_collinear_achievable(inst: SimoInstance) -> bool:
    if not inst.collinear:
        raise NotCollinearError("h1 and h2 are not collinear")
    P = inst.P
    return P * inst.inner / np.sqrt(1 + P * (inst.norm1 + inst.norm2)) >= 0.75


def simo_noncollinear_condition(inst: SimoInstance) -> bool:
    """Power-independent geometry test that guarantees achievability at high power."""
    if inst.collinear:
        raise CollinearError("h1 and h2 are collinear")
    lhs = (np.sqrt(inst.lam1 * inst.lam2) + 2 * inst.inner) ** 2
    return lhs > 4 * inst.norm1 * inst.norm2


def simo_p_star(inst: SimoInstance) -> float:
    """Smallest power beyond which the discriminant stays non-negative.

    Expanding ``C_d = (1 + lam1 P)(1 + lam2 P)`` turns the discriminant into
    ``4 P <h1,h2> sqrt(C_d) - 3 C_d``, so its sign matches that of the
    quadratic ``(16 <h1,h2>^2 - 9 lam1 lam2) P^2 - 9 (lam1 + lam2) P - 9``.
    The largest root of that quadratic is refined against the unexpanded
    discriminant before returning.
    """
    if inst.collinear or not simo_noncollinear_condition(inst):
        raise NoRootError("non-collinear condition does not hold")
    a = 16 * inst.inner ** 2 - 9 * inst.lam1 * inst.lam2
    b = -9 * (inst.lam1 + inst.lam2)
    c = -9.0
    p0 = (-b + np.sqrt(b * b - 4 * a * c)) / (2 * a)

    def delta(P):
        return simo_delta(inst, P)

    lo, hi = 0.5 * p0, 2.0 * p0
    if not (delta(lo) < 0 < delta(hi)):
        raise NoRootError(f"discriminant does not change sign around P = {p0:.6g}")
    return float(brentq(delta, lo, hi, xtol=1e-14 * p0, rtol=4 * np.finfo(float).eps))


@dataclass(frozen=True)
class DiagInstance:
    """2x2 diagonal channels with diagonal input covariances.

    ``c[l][j] = h[l][j] * sqrt(k[l][j] / P)`` for user ``l`` and antenna
    ``j`` (zero-based here).
    """

    h: np.ndarray  # shape (2, 2): h[l, j]
    k: np.ndarray  # shape (2, 2): k[l, j]
    P: float
    c: np.ndarray = field(init=False)

    def __post_init__(self):
        h = np.array(self.h, dtype=float).reshape(2, 2)
        k = np.array(self.k, dtype=float).reshape(2, 2)
        if not self.P > 0:
            raise InputError(f"power must be positive, got {self.P}")
        if np.any(k < -1e-12 * self.P) or np.any(k.sum(axis=1) > self.P * (1 + 1e-9)):
            raise InputError("power splits must be non-negative and sum to at most P")
        k = np.clip(k, 0.0, None)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "P", float(self.P))
        object.__setattr__(self, "c", h * np.sqrt(k / self.P))

    @classmethod
    def from_channel(cls, ch: ChannelPair, cov: CovariancePair) -> "DiagInstance":
        if ch.t != 2 or ch.r != 2:
            raise InputError("diagonal closed forms need t = r = 2")
        for M in (ch.H1, ch.H2, cov.K1, cov.K2):
            if M[0, 1] != 0 or M[1, 0] != 0:
                raise InputError("channels and covariances must be diagonal")
        h = np.array([np.diag(ch.H1), np.diag(ch.H2)])
        k = np.array([np.diag(cov.K1), np.diag(cov.K2)])
        return cls(h, k, cov.P)

    def C_d(self, P: Optional[float] = None) -> float:
        P = self.P if P is None else P
        s = self.c[0] ** 2 + self.c[1] ** 2
        return float(np.prod(1 + s * P))

    def f(self, gamma: float, P: Optional[float] = None) -> float:
        P = self.P if P is None else P
        c1, c2 = self.c
        return float(np.prod(gamma ** 2 + 1 + (gamma * c2 - c1) ** 2 * P))

    def q(self, gamma: float, P: Optional[float] = None) -> float:
        return self.f(gamma, P) ** 2 - gamma ** 4 * self.C_d(P)

    def q_in_power(self, gamma: float) -> np.ndarray:
        """Coefficients (ascending in P) of ``q(gamma)`` with the ``c`` held fixed."""
        poly = np.polynomial.polynomial
        c1, c2 = self.c
        f = np.array([1.0])
        cd = np.array([1.0])
        for i in range(2):
            f = poly.polymul(f, [gamma ** 2 + 1, (gamma * c2[i] - c1[i]) ** 2])
            cd = poly.polymul(cd, [1.0, c1[i] ** 2 + c2[i] ** 2])
        return poly.polysub(poly.polymul(f, f), gamma ** 4 * cd)


@dataclass(frozen=True)
class DiagConditions:
    """Verdicts of the two diagonal conditions; None means not evaluable."""

    cond1: Optional[bool]
    cond2: Optional[bool]
    gamma1: Optional[float]
    gamma2: Optional[float]

    @property
    def any(self) -> bool:
        return bool(self.cond1) or bool(self.cond2)


def diag_conditions(inst: DiagInstance) -> DiagConditions:
    (c11, c12), (c21, c22) = inst.c
    cond1 = gamma1 = cond2 = gamma2 = None
    if c21 != 0 and c11 != 0:
        gamma1 = c11 / c21
        lhs = (c22 / c21 - c12 / c11) ** 2
        cond1 = bool(lhs < np.sqrt((c12 ** 2 + c22 ** 2) / (c11 ** 2 + c21 ** 2)))
    if c22 != 0 and c12 != 0:
        gamma2 = c12 / c22
        lhs = (c21 / c22 - c11 / c12) ** 2
        cond2 = bool(lhs < np.sqrt((c11 ** 2 + c21 ** 2) / (c12 ** 2 + c22 ** 2)))
    return DiagConditions(cond1, cond2, gamma1, gamma2)


def diag_power_threshold(inst: DiagInstance, gamma: float) -> Optional[float]:
    """Power ``P0`` beyond which ``q(gamma) < 0`` with the ``c`` held fixed.

    Returns None when ``q`` is not eventually negative in ``P``.
    """
    coeffs = np.polynomial.polynomial.polytrim(inst.q_in_power(gamma), 0.0)
    scale = np.max(np.abs(coeffs))
    coeffs = np.where(np.abs(coeffs) <= 1e-14 * scale, 0.0, coeffs)
    coeffs = np.polynomial.polynomial.polytrim(coeffs, 0.0)
    if coeffs.size < 2 or coeffs[-1] >= 0:
        return None
    roots = np.polynomial.polynomial.polyroots(coeffs)
    real = roots[np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots))].real
    real = real[real > 0]
    if real.size == 0:
        return None
    p0 = float(real.max())

    def q_of_p(P):
        return float(np.polynomial.polynomial.polyval(P, coeffs))

    if q_of_p(0.99 * p0) > 0 > q_of_p(1.01 * p0):
        return p0
    raise NumericalError(f"q does not change sign around P0 = {p0:.6g}")
