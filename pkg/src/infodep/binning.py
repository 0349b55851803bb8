"""Bayesian piece-wise constant density model with a Dirichlet prior.

The number of equal-width bins ``M`` is chosen by maximizing the
(unnormalized) log posterior

    N log M + lnG(M b) - M lnG(b) - lnG(N + M b) + sum_k lnG(n_k + b)

where ``b`` is the Dirichlet exponent (any value > 0) and ``lnG`` is the
log-gamma function. Bin probabilities are then sampled from their
Dirichlet posterior ``Dir(n_1 + b, ..., n_M + b)`` and entropies and mutual
information are reported as Monte Carlo mean and standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr, gammaln

from ._random import make_rng
from .core import LogBase, as_pair, mutual_information_plugin
from .errors import (DegenerateRangeError, DomainError, EmptyInputError,
                     OutOfRangeError)

DEFAULT_BETA = 0.5
DEFAULT_N_DRAWS = 1000
MAX_BINS_CAP = 200


@dataclass(frozen=True)
class BinCounts:
    """Counts of an equal-width histogram.

    For a joint histogram ``counts`` is flattened row-major over
    ``shape == (m_x, m_y)`` and ``m`` is the total number of cells.
    """

    counts: np.ndarray
    m: int
    n_total: int
    range_volume: float
    dims: int = 1
    shape: tuple = ()

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).ravel()
        shape = tuple(self.shape) or (counts.size,)
        if np.any(counts < 0):
            raise DomainError("bin counts must be nonnegative")
        if counts.size != self.m or math.prod(shape) != self.m:
            raise DomainError(f"{counts.size} counts do not match m={self.m}, shape={shape}")
        if int(counts.sum()) != self.n_total:
            raise DomainError("counts do not sum to n_total")
        if not self.range_volume > 0:
            raise DegenerateRangeError("range volume must be positive")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "shape", shape)

    def reshaped(self) -> np.ndarray:
        return self.counts.reshape(self.shape)

    def transposed(self) -> "BinCounts":
        """Joint counts with the two axes exchanged."""
        if self.dims != 2:
            raise DomainError("only joint counts can be transposed")
        return BinCounts(self.reshaped().T.ravel(), self.m, self.n_total,
                         self.range_volume, 2, self.shape[::-1])


@dataclass(frozen=True)
class EstimateWithError:
    """Monte Carlo summary: mean, standard deviation and number of draws."""

    mean: float
    std_dev: float
    n_draws: int

    def __post_init__(self):
        if self.std_dev < 0:
            raise DomainError("std_dev must be nonnegative")
        if self.n_draws < 1:
            raise DomainError("n_draws must be >= 1")

    @property
    def std_error(self) -> float:
        return self.std_dev / math.sqrt(self.n_draws)


@dataclass(frozen=True)
class BayesMI(EstimateWithError):
    """Posterior MI summary together with the bin grid it was computed on."""

    m_x: int = 1
    m_y: int = 1
    beta: float = DEFAULT_BETA
    log_posterior: float = field(default=float("nan"), compare=False)


def _check_beta(beta):
    if not beta > 0:
        raise DomainError(f"the Dirichlet exponent must be > 0, got {beta!r}")
    return float(beta)


def _check_draws(n_draws):
    if int(n_draws) != n_draws or n_draws < 1:
        raise DomainError(f"n_draws must be a positive integer, got {n_draws!r}")
    return int(n_draws)


def _auto_range(data):
    lo, hi = float(data.min()), float(data.max())
    if not lo < hi:
        raise DegenerateRangeError(f"data span a zero-width range [{lo}, {hi}]")
    return lo, hi


def _as_data(data):
    data = np.asarray(data, dtype=float).ravel()
    if data.size == 0:
        raise EmptyInputError("no data to bin")
    if not np.all(np.isfinite(data)):
        raise DomainError("data contain NaN or infinite values")
    return data


def _bin_index(data, m, lo, hi):
    # bins are [e_k, e_{k+1}) except the last, which is closed at hi
    if not lo < hi:
        raise DegenerateRangeError(f"degenerate range [{lo}, {hi}]")
    if data.min() < lo or data.max() > hi:
        raise OutOfRangeError(f"data fall outside the range [{lo}, {hi}]")
    idx = np.floor((data - lo) / (hi - lo) * m).astype(np.int64)
    return np.minimum(idx, m - 1)


def _check_m(m, what="m"):
    if int(m) != m or m < 1:
        raise DomainError(f"{what} must be a positive integer, got {m!r}")
    return int(m)


def histogram_counts(data, m: int, range=None) -> BinCounts:
    """Count ``data`` into ``m`` equal-width bins over ``range``.

    ``range=None`` uses ``[min(data), max(data)]``.
    """
    m = _check_m(m)
    data = _as_data(data)
    lo, hi = _auto_range(data) if range is None else map(float, range)
    idx = _bin_index(data, m, lo, hi)
    counts = np.bincount(idx, minlength=m)
    return BinCounts(counts, m, data.size, hi - lo, 1, (m,))


def joint_histogram_counts(x, y, m_x: int, m_y: int, ranges=None) -> BinCounts:
    """Row-major ``m_x * m_y`` cell counts of the pairs ``(x_i, y_i)``.

    ``ranges`` is ``None`` (auto-range on both axes) or a pair of
    ``(lo, hi)`` tuples, either of which may be ``None``.
    """
    m_x = _check_m(m_x, "m_x")
    m_y = _check_m(m_y, "m_y")
    x = _as_data(x)
    y = _as_data(y)
    if x.size != y.size:
        raise DomainError(f"series lengths differ: {x.size} != {y.size}")
    rx, ry = ranges if ranges is not None else (None, None)
    xlo, xhi = _auto_range(x) if rx is None else map(float, rx)
    ylo, yhi = _auto_range(y) if ry is None else map(float, ry)
    ix = _bin_index(x, m_x, xlo, xhi)
    iy = _bin_index(y, m_y, ylo, yhi)
    counts = np.bincount(ix * m_y + iy, minlength=m_x * m_y)
    return BinCounts(counts, m_x * m_y, x.size, (xhi - xlo) * (yhi - ylo), 2, (m_x, m_y))


def _log_posterior(counts: np.ndarray, m: int, beta: float) -> float:
    n = int(counts.sum())
    # counts are integers, so sort them before summing to make the
    # result independent of bin order
    occupied = np.sort(counts[counts > 0])
    empty = m - occupied.size
    total = math.fsum(gammaln(occupied + beta).tolist())
    if empty:
        total = math.fsum([total, empty * gammaln(beta)])
    return math.fsum([
        n * math.log(m),
        gammaln(m * beta),
        -m * gammaln(beta),
        -gammaln(n + m * beta),
        total,
    ])


def log_posterior_m(bc: BinCounts, beta: float) -> float:
    """Unnormalized log posterior of the bin count ``bc.m``.

    The additive constant is fixed at zero, so the value is exactly 0
    for ``m == 1``. Everything is evaluated through log-gamma.
    """
    beta = _check_beta(beta)
    return _log_posterior(bc.counts, bc.m, beta)


def default_max_bins(n: int) -> int:
    """``min(N // 2, 200)``, but never below 1."""
    return max(1, min(n // 2, MAX_BINS_CAP))


def log_posterior_curve(data, beta: float = DEFAULT_BETA, max_bins: int | None = None):
    """Log posterior for every ``M`` in ``1..max_bins`` on the auto-range.

    Returns ``(ms, values)`` as numpy arrays.
    """
    beta = _check_beta(beta)
    data = _as_data(data)
    lo, hi = _auto_range(data)
    max_bins = default_max_bins(data.size) if max_bins is None else _check_m(max_bins, "max_bins")
    scaled = (data - lo) / (hi - lo)
    ms = np.arange(1, max_bins + 1)
    values = np.empty(max_bins)
    for i, m in enumerate(ms):
        idx = np.minimum(np.floor(scaled * m).astype(np.int64), m - 1)
        counts = np.bincount(idx, minlength=m)
        values[i] = _log_posterior(counts, int(m), beta)
    return ms, values


def optimal_bins(data, beta: float = DEFAULT_BETA, max_bins: int | None = None) -> int:
    """Number of equal-width bins maximizing the log posterior.

    Scans ``M = 1..max_bins`` exhaustively; ties go to the smaller ``M``.
    ``max_bins`` defaults to :func:`default_max_bins`.
    """
    ms, values = log_posterior_curve(data, beta, max_bins)
    return int(ms[int(np.argmax(values))])


def joint_log_posterior_curve(x, y, beta: float = DEFAULT_BETA,
                              max_bins: int | None = None):
    """Log posterior of square ``m x m`` joint grids, ``m = 1..max_bins``.

    The grid with ``m`` bins per axis is scored as a single histogram of
    ``m * m`` cells whose volume is the area of the data rectangle.
    """
    beta = _check_beta(beta)
    s = as_pair(x, y)
    xlo, xhi = _auto_range(s.x)
    ylo, yhi = _auto_range(s.y)
    max_bins = default_max_bins(len(s)) if max_bins is None else _check_m(max_bins, "max_bins")
    sx = (s.x - xlo) / (xhi - xlo)
    sy = (s.y - ylo) / (yhi - ylo)
    ms = np.arange(1, max_bins + 1)
    values = np.empty(max_bins)
    for i, m in enumerate(ms):
        ix = np.minimum(np.floor(sx * m).astype(np.int64), m - 1)
        iy = np.minimum(np.floor(sy * m).astype(np.int64), m - 1)
        counts = np.bincount(ix * m + iy, minlength=m * m)
        values[i] = _log_posterior(counts, int(m * m), beta)
    return ms, values


def optimal_joint_bins(x, y, beta: float = DEFAULT_BETA, max_bins: int | None = None) -> int:
    """Bins per axis of the best square joint grid (ties to the smaller)."""
    ms, values = joint_log_posterior_curve(x, y, beta, max_bins)
    return int(ms[int(np.argmax(values))])


def sample_bin_probabilities(bc: BinCounts, beta: float, n_draws: int = DEFAULT_N_DRAWS,
                             seed=None) -> np.ndarray:
    """Draw ``n_draws`` bin-probability vectors from ``Dir(counts + beta)``.

    Returns an ``(n_draws, m)`` array whose rows lie on the simplex.
    """
    beta = _check_beta(beta)
    n_draws = _check_draws(n_draws)
    alphas = bc.counts + beta
    rng = make_rng(seed)
    if bc.m == 1:
        return np.ones((n_draws, 1))
    return rng.dirichlet(alphas, size=n_draws)


def _draw_entropies(draws: np.ndarray) -> np.ndarray:
    return entr(draws).sum(axis=-1)


def posterior_entropy(bc: BinCounts, beta: float = DEFAULT_BETA,
                      n_draws: int = DEFAULT_N_DRAWS, seed=None,
                      base: LogBase | str = LogBase.NATS,
                      differential: bool = False) -> EstimateWithError:
    """Posterior mean and spread of the bin entropy ``-sum pi log pi``.

    With ``differential=True`` the piece-wise constant density's
    differential entropy is reported instead, which adds
    ``log(V / M)`` (the log bin volume) to every draw.
    """
    base = LogBase.coerce(base)
    draws = sample_bin_probabilities(bc, beta, n_draws, seed)
    h = _draw_entropies(draws)
    if differential:
        h = h + math.log(bc.range_volume / bc.m)
    mean = base.convert(float(h.mean()))
    std = base.convert(float(h.std(ddof=1))) if h.size > 1 else 0.0
    return EstimateWithError(mean, std, h.size)


def _resolve_bins(s, beta, bins, max_bins):
    if isinstance(bins, str):
        if bins == "auto":
            m = optimal_joint_bins(s.x, s.y, beta, max_bins)
            return m, m
        if bins == "marginal":
            return (optimal_bins(s.x, beta, max_bins),
                    optimal_bins(s.y, beta, max_bins))
        raise DomainError(f"unknown bin choice {bins!r}")
    if isinstance(bins, (int, np.integer)):
        return _check_m(bins), _check_m(bins)
    m_x, m_y = bins
    return _check_m(m_x, "m_x"), _check_m(m_y, "m_y")


def mi_bayes(x, y, beta: float = DEFAULT_BETA, bins="auto",
             n_draws: int = DEFAULT_N_DRAWS, seed=None,
             max_bins: int | None = None) -> BayesMI:
    """Posterior mutual information of ``x`` and ``y`` in nats.

    Joint cell probabilities are drawn from their Dirichlet posterior and
    each draw is turned into ``H(X) + H(Y) - H(X,Y)`` using its own row
    and column sums.

    Parameters
    ----------
    beta : float
        Dirichlet exponent, > 0.
    bins : {"auto", "marginal"}, int or (int, int)
        ``"auto"`` picks the square joint grid with the highest log
        posterior; ``"marginal"`` picks each axis independently from its
        own marginal; an int or a pair fixes the grid.
    max_bins : int, optional
        Upper end of the bin-count scan, defaults to ``min(N // 2, 200)``.
    """
    beta = _check_beta(beta)
    n_draws = _check_draws(n_draws)
    s = as_pair(x, y)
    m_x, m_y = _resolve_bins(s, beta, bins, max_bins)
    bc = joint_histogram_counts(s.x, s.y, m_x, m_y)
    lp = log_posterior_m(bc, beta)
    draws = sample_bin_probabilities(bc, beta, n_draws, seed).reshape(n_draws, m_x, m_y)
    mi = (_draw_entropies(draws.sum(axis=2)) + _draw_entropies(draws.sum(axis=1))
          - _draw_entropies(draws.reshape(n_draws, -1)))
    mean = max(float(mi.mean()), 0.0)
    std = float(mi.std(ddof=1)) if n_draws > 1 else 0.0
    return BayesMI(mean, std, n_draws, m_x=m_x, m_y=m_y, beta=beta, log_posterior=lp)


def mi_fixed_hist(x, y, m: int) -> float:
    """Frequentist plug-in MI on an ``m x m`` equal-width grid (nats)."""
    s = as_pair(x, y)
    m = _check_m(m)
    bc = joint_histogram_counts(s.x, s.y, m, m)
    return mutual_information_plugin(bc.reshaped() / bc.n_total)

