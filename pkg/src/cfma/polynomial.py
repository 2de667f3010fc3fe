"""Dense real polynomials with Sturm-chain root counting on (0, inf).

Coefficients are stored in ascending order (index == power).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .model import NumericalError

log = logging.getLogger(__name__)

TOL_TRIM = 1e-12


class ChainDegenerate(NumericalError):
    pass


def _trim(c: np.ndarray, tol: float) -> np.ndarray:
    """Drop trailing (high-order) coefficients that are negligible."""
    c = np.asarray(c, dtype=float)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1)
    n = c.size
    while n > 1 and abs(c[n - 1]) <= tol * scale:
        n -= 1
    return c[:n].copy()


@dataclass(frozen=True, eq=False)
class RealPolynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.coeffs, dtype=float)).tolist()
        while len(vals) > 1 and vals[-1] == 0.0:
            vals.pop()
        c = np.array(vals)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "_rev", tuple(reversed(vals)))

    @classmethod
    def from_roots(cls, roots, lead: float = 1.0) -> "RealPolynomial":
        return cls(lead * np.polynomial.polynomial.polyfromroots(roots))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def lead(self) -> float:
        return float(self.coeffs[-1])

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0.0

    def __call__(self, x):
        # Horner; plain floats skip numpy for speed on scalar calls
        if isinstance(x, (float, int)):
            acc = 0.0
            for c in self._rev:
                acc = acc * x + c
            return acc
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x) + self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * x + c
        return acc if acc.ndim else float(acc)

    def __repr__(self):
        return f"RealPolynomial({np.array2string(self.coeffs, precision=6)})"

    def __eq__(self, other):
        return isinstance(other, RealPolynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def derivative(self) -> "RealPolynomial":
        if self.degree == 0:
            return RealPolynomial([0.0])
        return RealPolynomial(self.coeffs[1:] * np.arange(1, self.degree + 1))

    def trimmed(self, tol: float = TOL_TRIM) -> "RealPolynomial":
        return RealPolynomial(_trim(self.coeffs, tol))

    def normalized(self) -> "RealPolynomial":
        """Same roots and signs, max |coeff| scaled to 1."""
        s = np.max(np.abs(self.coeffs))
        return self if s == 0 else RealPolynomial(self.coeffs / s)

    def divmod(self, other: "RealPolynomial", tol: float = TOL_TRIM):
        """Quotient and remainder. The remainder is trimmed relative to the dividend."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        num = self.coeffs.astype(float).copy()
        den = other.coeffs
        dn = other.degree
        if self.degree < dn:
            return RealPolynomial([0.0]), self
        q = np.zeros(self.degree - dn + 1)
        for k in range(self.degree - dn, -1, -1):
            q[k] = num[k + dn] / den[-1]
            num[k:k + dn + 1] -= q[k] * den
            num[k + dn] = 0.0
        scale = np.max(np.abs(self.coeffs))
        rem = num[:max(dn, 1)]
        rem = np.where(np.abs(rem) <= tol * scale, 0.0, rem)
        return RealPolynomial(q), RealPolynomial(rem)


def _exact_remainder(num: list, den: list) -> list:
    """Remainder of ``num / den`` over the rationals (ascending coefficient lists)."""
    num = num[:]
    dn = len(den) - 1
    while len(num) - 1 >= dn and any(num):
        q = num[-1] / den[-1]
        k = len(num) - 1 - dn
        for i in range(dn + 1):
            num[k + i] -= q * den[i]
        num.pop()
        while len(num) > 1 and num[-1] == 0:
            num.pop()
    return num


def _to_float_member(c: list) -> RealPolynomial:
    scale = max(abs(v) for v in c)
    return RealPolynomial([float(v / scale) for v in c])


def sturm_chain(p: RealPolynomial) -> list:
    """Sturm sequence ``p, p', -rem(p, p'), ...`` computed exactly.

    Every float is a dyadic rational, so the chain is built in rational
    arithmetic from the given coefficients and only then rounded (each
    member scaled to max |coeff| = 1). The signs that decide the counts at
    0+ and infinity are therefore exact for the polynomial as passed in.
    """
    try:
        c = [Fraction(v) for v in p.coeffs.tolist()]
    except (OverflowError, ValueError) as exc:
        raise ChainDegenerate(f"non-finite coefficient: {exc}") from exc
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    if not any(c):
        raise ValueError("Sturm chain of the zero polynomial")
    exact = [c]
    if len(c) > 1:
        exact.append([i * c[i] for i in range(1, len(c))])
        while len(exact[-1]) > 1:
            rem = _exact_remainder(exact[-2], exact[-1])
            if not any(rem):
                break
            lead = abs(rem[-1])
            exact.append([-v / lead for v in rem])
    return [_to_float_member(m) for m in exact]


def _variations(signs) -> int:
    s = [v for v in signs if v]
    return sum(1 for x, y in zip(s, s[1:]) if x != y)


def variations_at(chain, x: float) -> int:
    return _variations([(v > 0) - (v < 0) for v in (q(x) for q in chain)])


def variations_at_inf(chain) -> int:
    return _variations([np.sign(q.lead) for q in chain])


def variations_at_zero_plus(chain) -> int:
    """Sign pattern just right of 0: the lowest-order nonzero coefficient wins."""
    signs = []
    for q in chain:
        nz = np.flatnonzero(q.coeffs)
        signs.append(np.sign(q.coeffs[nz[0]]) if nz.size else 0)
    return _variations(signs)


def positive_root_bound(p: RealPolynomial) -> float:
    """Cauchy bound: every root has modulus below this."""
    c = p.coeffs
    return 1.0 + float(np.max(np.abs(c[:-1] / c[-1]))) if p.degree > 0 else 1.0


def _balance(p: RealPolynomial):
    """``(p(s x), s)`` with ``s > 0`` equalizing the lowest nonzero and leading coefficients.

    Positive roots map to positive roots, so counts are unchanged while
    roots far from 1 no longer spread the coefficients over many decades.
    """
    c = p.coeffs
    nz = np.flatnonzero(c)
    if p.degree < 1 or nz.size < 2:
        return p, 1.0
    lo = nz[0]
    s = float((abs(c[lo]) / abs(c[-1])) ** (1.0 / (p.degree - lo)))
    if not np.isfinite(s) or s <= 0:
        return p, 1.0
    # a power of two keeps the rescaled coefficients exact
    s = float(2.0 ** round(np.log2(s)))
    return RealPolynomial(c * s ** np.arange(c.size)), s


def sturm_positive_root_exists(p: RealPolynomial):
    """Whether ``p`` has a real root in ``(0, inf)``, and how many distinct ones.

    A root exactly at zero is not counted. Raises ChainDegenerate for
    non-finite coefficients.
    """
    chain = sturm_chain(p)
    count = max(variations_at_zero_plus(chain) - variations_at_inf(chain), 0)
    return count > 0, count


def count_roots_in(chain, lo: float, hi: float) -> int:
    """Distinct roots in ``(lo, hi]``."""
    return variations_at(chain, lo) - variations_at(chain, hi)


def isolate_positive_roots(p: RealPolynomial, xtol: float = 1e-13) -> list:
    """Sorted distinct positive real roots of ``p`` located to ``xtol`` relative.

    Sturm counts split ``(0, bound]`` into intervals holding one root each;
    each is then refined by sign-change bisection, or by Sturm-count
    bisection when the root has even multiplicity.
    """
    pb, scale = _balance(p)
    chain = sturm_chain(pb)
    total = variations_at_zero_plus(chain) - variations_at_inf(chain)
    if total <= 0:
        return []
    hi = positive_root_bound(chain[0]) * (1 + 1e-9)
    v0 = variations_at_zero_plus(chain)
    work = [(0.0, hi, total)]
    isolated = []
    for _ in range(10_000):
        if not work:
            break
        a, b, n = work.pop()
        if n <= 0:
            continue
        if n == 1 or b - a <= xtol * max(b, 1e-300):
            isolated.append((a, b))
            continue
        m = 0.5 * (a + b)
        left = (v0 if a == 0.0 else variations_at(chain, a)) - variations_at(chain, m)
        work.append((m, b, n - left))
        work.append((a, m, left))

    return sorted(scale * _refine(chain, a, b, xtol) for a, b in isolated)


def _refine(chain, a: float, b: float, xtol: float) -> float:
    p = chain[0]
    fa = p(a) if a > 0 else p.coeffs[0]
    fb = p(b)
    if fb == 0.0:
        return b
    if np.sign(fa) != np.sign(fb) and fa != 0.0:
        return float(brentq(p, a, b, xtol=1e-300, rtol=max(xtol, 4 * np.finfo(float).eps)))
    # even multiplicity: keep the half that still contains the root
    for _ in range(200):
        if b - a <= xtol * max(b, 1e-300):
            break
        m = 0.5 * (a + b)
        va = variations_at_zero_plus(chain) if a == 0.0 else variations_at(chain, a)
        if va - variations_at(chain, m) >= 1:
            b = m
        else:
            a = m
    return 0.5 * (a + b)


def critical_points(p: RealPolynomial) -> np.ndarray:
    """Real positive roots of ``p'`` (numpy eigenvalue route, used for minima only)."""
    d = p.derivative()
    if d.degree < 1:
        return np.array([])
    r = np.polynomial.polynomial.polyroots(d.coeffs)
    r = r[np.abs(r.imag) <= 1e-9 * np.maximum(1.0, np.abs(r.real))].real
    return np.sort(r[r > 0])


def interpolate(nodes, values) -> RealPolynomial:
    """Coefficients of the unique polynomial through ``(nodes, values)``."""
    nodes = np.asarray(nodes, dtype=float)
    V = np.vander(nodes, increasing=True)
    return RealPolynomial(np.linalg.solve(V, np.asarray(values, dtype=float)))
