"""Plug-in entropies, mutual information and correlation.

All quantities are computed in nats. Bits are an output conversion only,
selected through :class:`LogBase`. Empty cells contribute nothing
(``0 * log 0 == 0``).

Sums over probability cells use :func:`math.fsum`, which is correctly
rounded and therefore independent of the order of the cells. This makes
the plug-in MI exactly symmetric under transposition of the joint table.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DegenerateSeriesError, DomainError

PMF_TOLERANCE = 1e-9
MI_CLAMP_TOLERANCE = 1e-12


class LogBase(enum.Enum):
    NATS = "nats"
    BITS = "bits"

    @classmethod
    def coerce(cls, base: "LogBase | str") -> "LogBase":
        if isinstance(base, cls):
            return base
        try:
            return cls(str(base).lower())
        except ValueError:
            raise DomainError(f"unknown log base {base!r}; use 'nats' or 'bits'") from None

    def convert(self, value_nats: float) -> float:
        """Express a value given in nats in this base."""
        if self is LogBase.BITS:
            return value_nats / math.log(2.0)
        return value_nats


@dataclass(frozen=True)
class SeriesPair:
    """Two aligned, finite sample vectors of equal length >= 2."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ContractViolationError(
                f"series lengths differ: {x.size} != {y.size}")
        if x.size < 2:
            raise ContractViolationError("a series pair needs at least 2 samples")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ContractViolationError("series contain NaN or infinite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.size

    def swapped(self) -> "SeriesPair":
        return SeriesPair(self.y, self.x)


def as_pair(x, y=None) -> SeriesPair:
    """Accept either a :class:`SeriesPair` or two array-likes."""
    if isinstance(x, SeriesPair):
        return x
    return SeriesPair(x, y)


def _validate_pmf(p, ndim: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != ndim or p.size == 0:
        raise ContractViolationError(
            f"expected a non-empty {ndim}-d probability array, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ContractViolationError("probabilities must be finite")
    if np.any(p < 0):
        raise ContractViolationError("probabilities must be nonnegative")
    total = math.fsum(p.ravel().tolist())
    if abs(total - 1.0) > PMF_TOLERANCE:
        raise ContractViolationError(f"probabilities sum to {total!r}, not 1")
    return p


def _entropy_nats(p: np.ndarray) -> float:
    nz = p[p > 0]
    return -math.fsum((nz * np.log(nz)).tolist())


def shannon_entropy(p, base: LogBase | str = LogBase.NATS) -> float:
    """Entropy ``-sum p log p`` of a discrete distribution.

    Raises :class:`ContractViolationError` unless ``p`` is a valid pmf
    (nonnegative, summing to one within 1e-9).
    """
    p = _validate_pmf(p, 1)
    h = max(_entropy_nats(p), 0.0)
    return LogBase.coerce(base).convert(h)


def joint_entropy(p, base: LogBase | str = LogBase.NATS) -> float:
    """Entropy of a two-dimensional joint pmf."""
    p = _validate_pmf(p, 2)
    h = max(_entropy_nats(p.ravel()), 0.0)
    return LogBase.coerce(base).convert(h)


def _clamp_mi(value: float) -> float:
    if value < -MI_CLAMP_TOLERANCE:
        raise ContractViolationError(
            f"mutual information evaluated to {value!r} < 0 beyond rounding")
    return max(value, 0.0)


def mutual_information_plugin(p, base: LogBase | str = LogBase.NATS) -> float:
    """Mutual information of a joint pmf as ``H(X) + H(Y) - H(X,Y)``.

    Marginals are the row and column sums of ``p``. Results in
    ``[-1e-12, 0)`` are clamped to zero.
    """
    p = _validate_pmf(p, 2)
    px = np.array([math.fsum(row) for row in p.tolist()])
    py = np.array([math.fsum(col) for col in p.T.tolist()])
    value = (_entropy_nats(px) + _entropy_nats(py)) - _entropy_nats(p.ravel())
    return LogBase.coerce(base).convert(_clamp_mi(value))


def normalized_mi(i_value: float) -> float:
    """Map MI in nats onto [0, 1) via ``sqrt(1 - exp(-2 I))``.

    For a bivariate Gaussian this recovers ``|rho|``.
    """
    i_value = float(i_value)
    if not i_value >= 0:
        raise DomainError(f"normalized MI needs a nonnegative value, got {i_value!r}")
    return math.sqrt(-math.expm1(-2.0 * i_value))


def correlation(x, y=None) -> float:
    """Sample Pearson correlation of a :class:`SeriesPair` or of ``x, y``."""
    s = as_pair(x, y)
    dx = s.x - s.x.mean()
    dy = s.y - s.y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateSeriesError("correlation is undefined for a constant series")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))
