"""Channel, covariance and coding-choice types plus small matrix primitives.

All matrices are real and dense. Sizes are tiny (t, r <= 8), so everything
here is plain numpy on small arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

TOL_PIVOT = 1e-10
TOL_FACTOR = 1e-9
TOL_SYMMETRY = 1e-9


class CfmaError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CfmaError, ValueError):
    """Malformed or inconsistent user input."""


class NotSymmetricError(InputError):
    pass


class NotPSDError(InputError):
    pass


class NumericalError(CfmaError, ArithmeticError):
    """A numerical invariant broke (singular matrix, failed interpolation...)."""


class DegenerateError(NumericalError):
    pass


def _as_matrix(x, name: str) -> np.ndarray:
    a = np.array(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        # a bare vector is a column (SIMO channel h_l is r x 1)
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise InputError(f"{name} must be a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries")
    a.setflags(write=False)
    return a


def det(m) -> float:
    """Determinant by LU with partial pivoting.

    Returns exactly 0.0 when the matrix is numerically singular instead of
    raising.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"det needs a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return 1.0
    d = float(np.linalg.det(a))
    if not np.isfinite(d):
        return 0.0
    return d


def cholesky_lower(K, tol_pivot: float = TOL_PIVOT) -> np.ndarray:
    """Semi-definite Cholesky factor ``L`` with ``L @ L.T == K``.

    ``L`` is lower triangular with a non-negative diagonal. A pivot that
    falls below ``tol_pivot`` (relative to the largest diagonal entry of
    ``K``) is treated as an exact zero and its column is zeroed, provided
    the rest of the column is negligible too. That makes the factor of a
    singular ``K`` deterministic without throwing away off-diagonal mass
    of a merely ill-conditioned one.

    Raises
    ------
    NotSymmetricError
        If ``K`` is visibly asymmetric.
    NotPSDError
        If a pivot is more negative than ``-tol_pivot``.
    """
    K = np.array(K, dtype=float)
    if K.ndim == 0:
        K = K.reshape(1, 1)
    n = K.shape[0]
    if K.ndim != 2 or K.shape[1] != n:
        raise InputError(f"cholesky_lower needs a square matrix, got shape {K.shape}")
    scale = max(1.0, float(np.max(np.abs(K)))) if K.size else 1.0
    if np.max(np.abs(K - K.T), initial=0.0) > TOL_SYMMETRY * scale:
        raise NotSymmetricError("matrix is not symmetric")
    K = 0.5 * (K + K.T)
    tol = tol_pivot * scale

    L = np.zeros_like(K)
    for j in range(n):
        pivot = K[j, j] - L[j, :j] @ L[j, :j]
        if pivot < -tol:
            raise NotPSDError(f"negative pivot {pivot:.3e} at column {j}")
        resid = K[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]
        if pivot <= tol and np.max(np.abs(resid), initial=0.0) <= tol:
            continue  # dead direction: zero column
        if pivot <= 0:
            continue  # rounding left a nonpositive pivot; nothing to divide by
        d = np.sqrt(pivot)
        L[j, j] = d
        L[j + 1:, j] = resid / d
    return L


@dataclass(frozen=True)
class ChannelPair:
    """Two real ``r x t`` channel matrices seen by a common receiver."""

    H1: np.ndarray
    H2: np.ndarray

    def __post_init__(self):
        H1 = _as_matrix(self.H1, "H1")
        H2 = _as_matrix(self.H2, "H2")
        if H1.shape != H2.shape:
            raise InputError(f"H1 {H1.shape} and H2 {H2.shape} differ in shape")
        object.__setattr__(self, "H1", H1)
        object.__setattr__(self, "H2", H2)

    @property
    def r(self) -> int:
        return self.H1.shape[0]

    @property
    def t(self) -> int:
        return self.H1.shape[1]

    @classmethod
    def simo(cls, h1, h2) -> "ChannelPair":
        return cls(np.reshape(h1, (-1, 1)), np.reshape(h2, (-1, 1)))

    def swapped(self) -> "ChannelPair":
        return ChannelPair(self.H2, self.H1)

    def received_covariance(self, K1, K2) -> np.ndarray:
        """``I_r + H1 K1 H1^T + H2 K2 H2^T``."""
        return (np.eye(self.r) + self.H1 @ np.asarray(K1) @ self.H1.T
                + self.H2 @ np.asarray(K2) @ self.H2.T)


@dataclass(frozen=True)
class CovariancePair:
    """Input covariances of both users under a common trace budget ``P``.

    The Cholesky factors ``B1``, ``B2`` are computed on construction.
    """

    K1: np.ndarray
    K2: np.ndarray
    P: float
    B1: np.ndarray = field(init=False, repr=False)
    B2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.P > 0:
            raise InputError(f"power budget must be positive, got {self.P}")
        K1 = _as_matrix(self.K1, "K1")
        K2 = _as_matrix(self.K2, "K2")
        if K1.shape != K2.shape or K1.shape[0] != K1.shape[1]:
            raise InputError(f"K1 {K1.shape} and K2 {K2.shape} must be equal square shapes")
        for name, K in (("K1", K1), ("K2", K2)):
            if np.trace(K) > self.P * (1 + 1e-9):
                raise InputError(f"trace({name}) = {np.trace(K):.6g} exceeds P = {self.P:.6g}")
        object.__setattr__(self, "P", float(self.P))
        object.__setattr__(self, "K1", K1)
        object.__setattr__(self, "K2", K2)
        object.__setattr__(self, "B1", cholesky_lower(K1))
        object.__setattr__(self, "B2", cholesky_lower(K2))

    @property
    def t(self) -> int:
        return self.K1.shape[0]

    @classmethod
    def isotropic(cls, t: int, P: float) -> "CovariancePair":
        K = (P / t) * np.eye(t)
        return cls(K, K, P)

    def swapped(self) -> "CovariancePair":
        return CovariancePair(self.K2, self.K1, self.P)


@dataclass(frozen=True)
class CodingChoice:
    """Integer coefficient vectors ``a``, ``b`` and positive scalings ``beta``."""

    a: tuple
    b: tuple
    beta: tuple = (1.0, 1.0)

    def __post_init__(self):
        a = tuple(int(v) for v in self.a)
        b = tuple(int(v) for v in self.b)
        beta = tuple(float(v) for v in self.beta)
        if len(a) != 2 or len(b) != 2 or len(beta) != 2:
            raise InputError("a, b and beta must all have two entries")
        if a == (0, 0):
            raise InputError("a must be nonzero")
        if a[0] * b[1] - a[1] * b[0] == 0:
            raise InputError(f"a={a} and b={b} are linearly dependent")
        if not (beta[0] > 0 and beta[1] > 0 and np.isfinite(beta).all()):
            raise InputError(f"beta must be positive and finite, got {beta}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "beta", beta)

    @property
    def a_tilde(self) -> tuple:
        return (self.a[0] * self.beta[0], self.a[1] * self.beta[1])

    @property
    def b_tilde(self) -> tuple:
        return (self.b[0] * self.beta[0], self.b[1] * self.beta[1])

    @property
    def cross(self) -> float:
        """``a~1 b~2 - a~2 b~1``."""
        at, bt = self.a_tilde, self.b_tilde
        return at[0] * bt[1] - at[1] * bt[0]

    def swapped(self) -> "CodingChoice":
        return CodingChoice(self.a[::-1], self.b[::-1], self.beta[::-1])


@dataclass(frozen=True)
class RatePairResult:
    """Achievable rate pair in bits per real channel use.

    ``R1``/``R2`` are the case-split values; they are NaN when ``valid`` is
    false. The four underlying expressions are kept signed.
    """

    R1: float
    R2: float
    r1_first: float
    r2_first: float
    r1_second: float
    r2_second: float
    valid: bool

    @property
    def sum_rate(self) -> float:
        return self.R1 + self.R2


def load_channel_json(path) -> tuple[ChannelPair, Optional[float], Optional[CovariancePair]]:
    """Read the channel/covariance JSON file.

    Schema: ``{"t", "r", "H1", "H2", "P", "K1"?, "K2"?}`` with row-major
    nested lists. Returns the channel, the power (or None) and the
    covariance pair when both ``K1`` and ``K2`` are present.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return channel_from_dict(doc, source=str(path))


def channel_from_dict(doc: dict, source: str = "<dict>"):
    try:
        ch = ChannelPair(doc["H1"], doc["H2"])
    except KeyError as exc:
        raise InputError(f"{source}: missing key {exc}") from exc
    for key, actual in (("t", ch.t), ("r", ch.r)):
        if key in doc and int(doc[key]) != actual:
            raise InputError(f"{source}: {key}={doc[key]} but H1 implies {actual}")
    P = doc.get("P")
    P = None if P is None else float(P)
    cov = None
    if "K1" in doc and "K2" in doc:
        if P is None:
            raise InputError(f"{source}: K1/K2 given without P")
        cov = CovariancePair(doc["K1"], doc["K2"], P)
        if cov.t != ch.t:
            raise InputError(f"{source}: covariance size {cov.t} != t={ch.t}")
    return ch, P, cov


def channel_to_dict(ch: ChannelPair, P: Optional[float] = None,
                    cov: Optional[CovariancePair] = None) -> dict:
    doc = {"t": ch.t, "r": ch.r, "H1": ch.H1.tolist(), "H2": ch.H2.tolist()}
    if cov is not None:
        doc.update(P=cov.P, K1=cov.K1.tolist(), K2=cov.K2.tolist())
    elif P is not None:
        doc["P"] = float(P)
    return doc
