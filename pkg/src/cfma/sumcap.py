"""Decide whether CFMA reaches the MIMO MAC sum capacity.

The test reduces to whether ``g(gamma) = f(gamma) - gamma^t sqrt(C_d)``
dips to or below zero for some ``gamma > 0``. ``g`` is positive at 0 and at
infinity, so that happens exactly when it has a positive real root; the
root count comes from a Sturm chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import (ChannelPair, CodingChoice, CovariancePair, NumericalError, det)
from .polynomial import (RealPolynomial, critical_points, interpolate,
                         isolate_positive_roots, sturm_positive_root_exists)
from .rates import achievable_pair
from .waterfill import SumCapacityResult, input_covariances

TANGENCY_TOL = 1e-9
WITNESS_TOL = 1e-7
INTERP_TOL = 1e-6


class IllConditioned(NumericalError):
    pass


@dataclass(frozen=True)
class SumCapVerdict:
    achievable: bool
    gamma_witness: Optional[float]
    gamma_interval: list
    g_poly: RealPolynomial
    root_count: int = 0
    boundary: bool = False
    capacity: Optional[SumCapacityResult] = field(default=None, repr=False)
    witness_sum_rate: Optional[float] = None

    @property
    def C_sum(self) -> float:
        return self.capacity.C_sum


def f_matrix(gamma: float, ch: ChannelPair, cov: CovariancePair) -> np.ndarray:
    X = ch.H2 @ cov.B2
    Y = ch.H1 @ cov.B1
    D = gamma * X - Y
    return (gamma ** 2 + 1) * np.eye(ch.t) + D.T @ D


def f_gamma_poly(ch: ChannelPair, cov: CovariancePair) -> RealPolynomial:
    """``f`` as a degree-2t polynomial, interpolated at ``gamma = 0, 1, ..., 2t``.

    Raises IllConditioned if the interpolant misses off-node samples by
    more than ``INTERP_TOL`` relative.
    """
    t = ch.t
    nodes = np.arange(2 * t + 1, dtype=float)
    values = [det(f_matrix(g, ch, cov)) for g in nodes]
    poly = interpolate(nodes, values)
    probes = nodes[:-1] + 0.5
    expect = np.array([det(f_matrix(g, ch, cov)) for g in probes])
    err = np.max(np.abs(poly(probes) - expect) / np.maximum(np.abs(expect), 1.0))
    if err > INTERP_TOL:
        raise IllConditioned(f"interpolation residual {err:.2e} for f(gamma)")
    return poly


def g_gamma_poly(f: RealPolynomial, C_d: float, t: int) -> RealPolynomial:
    c = np.zeros(max(f.coeffs.size, t + 1))
    c[: f.coeffs.size] = f.coeffs
    c[t] -= np.sqrt(C_d)
    return RealPolynomial(c)


def q_gamma_poly(f: RealPolynomial, C_d: float, t: int) -> RealPolynomial:
    """``f^2 - gamma^(2t) C_d``; same sign as ``g`` on gamma > 0 since f > 0."""
    c = np.polynomial.polynomial.polymul(f.coeffs, f.coeffs)
    c = np.pad(c, (0, max(0, 2 * t + 1 - c.size)))
    c[2 * t] -= C_d
    return RealPolynomial(c)


def nonpositive_intervals(g: RealPolynomial, roots) -> list:
    """Closed sub-intervals of (0, inf) where ``g <= 0``, given its positive roots.

    An isolated tangency shows up as a degenerate interval ``(x, x)``.
    """
    if not roots:
        return []
    edges = [0.0] + list(roots) + [np.inf]
    neg = [g(2 * lo + 1 if hi == np.inf else 0.5 * (lo + hi)) < 0
           for lo, hi in zip(edges[:-1], edges[1:])]
    intervals = []
    cur = [0.0, 0.0] if neg[0] else None
    for i, x in enumerate(roots):
        if cur is None:
            cur = [x, x]
        cur[1] = x
        if not neg[i + 1]:
            intervals.append(tuple(cur))
            cur = None
    if cur is not None:
        intervals.append((cur[0], np.inf))
    return intervals


def decide(g: RealPolynomial, locate: bool = True):
    """Sturm verdict for ``g <= 0`` somewhere on (0, inf).

    Returns ``(achievable, root_count, boundary, intervals, witness)``. A
    polynomial whose minimum lies within ``TANGENCY_TOL`` of zero (relative
    to its coefficient scale) but has no detected root counts as
    achievable with ``boundary`` set.
    """
    found, count = sturm_positive_root_exists(g)
    scale = float(np.max(np.abs(g.coeffs)))
    if found:
        if not locate:
            return True, count, False, [], None
        roots = isolate_positive_roots(g)
        intervals = nonpositive_intervals(g, roots)
        if not intervals:
            # Sturm saw a root the refinement cannot place; keep the count
            x = roots[0] if roots else float(critical_points(g)[0])
            intervals = [(x, x)]
        lo, hi = max(intervals, key=lambda iv: iv[1] - iv[0])
        witness = 0.5 * (lo + hi)
        boundary = hi - lo <= 1e-9 * max(hi, 1.0) or g(witness) > -TANGENCY_TOL * scale
        return True, count, boundary, intervals, witness
    crit = critical_points(g)
    if crit.size:
        vals = g(crit)
        k = int(np.argmin(vals))
        if vals[k] <= TANGENCY_TOL * scale:
            x = float(crit[k])
            return True, 0, True, [(x, x)], x
    return False, 0, False, [], None


def check_sum_capacity(ch: ChannelPair, P: float, diagonal: bool = False,
                       capacity: Optional[SumCapacityResult] = None,
                       locate: bool = True, policy: str = "joint") -> SumCapVerdict:
    """Water-fill, build ``g`` and decide achievability of the sum capacity.

    When achievable (and ``locate`` is set), the witness ``gamma`` is
    cross-checked: the rate pair at ``a=(1,1)``, ``b=(1,0)``,
    ``beta=(gamma, 1)`` must be valid and sum to ``C_sum`` within
    ``WITNESS_TOL`` bits, otherwise NumericalError is raised.

    ``policy`` picks the input covariances (see
    :func:`cfma.waterfill.input_covariances`); a precomputed ``capacity``
    overrides it.
    """
    if capacity is not None:
        cap = capacity
    else:
        cap = input_covariances(ch, P, policy=policy, diagonal=diagonal)
    cov = cap.covariance()
    f = f_gamma_poly(ch, cov)
    g = g_gamma_poly(f, cap.C_d, ch.t)
    achievable, count, boundary, intervals, witness = decide(g, locate)

    sum_rate = None
    if achievable and witness is not None:
        res = achievable_pair(ch, cov, CodingChoice((1, 1), (1, 0), (witness, 1.0)))
        sum_rate = res.sum_rate
        gap = abs(sum_rate - cap.C_sum) if res.valid else np.inf
        if gap > WITNESS_TOL and not boundary:
            raise NumericalError(
                f"witness gamma={witness:.6g} gives sum rate {res.sum_rate:.9g}"
                f" but C_sum = {cap.C_sum:.9g}")
    return SumCapVerdict(achievable, witness, intervals, g, count, boundary, cap, sum_rate)


def leading_coefficient_expected(ch: ChannelPair, cov: CovariancePair) -> float:
    """``|I_t + B2^T H2^T H2 B2|``, the leading coefficient of ``f``."""
    X = ch.H2 @ cov.B2
    return det(np.eye(ch.t) + X.T @ X)
