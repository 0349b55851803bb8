"""Variable bin-width MI via recursive equiprobable partitioning.

Both series are replaced by their normalized ranks, which makes each
marginal uniform. Starting from the unit square, a cell is split into four
quadrants at its coordinate midpoints whenever a Pearson chi-square test
rejects uniformity of the quadrant counts. MI is then the plug-in sum over
the terminal cells, with marginal masses taken from the cell side lengths.

Cells are half-open from below, ``(lo, hi]``, so that the rank values
``k / N`` fall on the correct side of every dyadic midpoint and the root
``(0, 1]`` contains every sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import LogBase, as_pair
from .errors import ContractViolationError, DegenerateSeriesError, DomainError

# 95th percentiles of the chi-square distribution with 3 and 15 degrees of freedom
CHI2_95_3DOF = 7.815
CHI2_95_15DOF = 24.996


@dataclass(frozen=True)
class AdaptiveConfig:
    """Split-test parameters.

    Cells shallower than ``substructure_depth`` also get a second test on
    their 4 x 4 grid of sub-cells (15 degrees of freedom). It catches
    dependencies that leave the four quadrants balanced, such as
    ``y = x**2`` with ``x`` symmetric. Applying it at every depth adds
    spurious splits, and hence upward bias, at large N.
    ``substructure_depth=0`` leaves only the quadrant test.
    """

    chi2_threshold: float = CHI2_95_3DOF
    min_cell_count: int = 8
    max_depth: int = 20
    substructure_threshold: float = CHI2_95_15DOF
    substructure_depth: int = 2

    def __post_init__(self):
        if not (self.chi2_threshold > 0 and self.substructure_threshold > 0):
            raise DomainError("chi-square thresholds must be positive")
        if self.substructure_depth < 0:
            raise DomainError("substructure_depth must be >= 0")
        if self.min_cell_count < 1 or self.max_depth < 1:
            raise DomainError("min_cell_count and max_depth must be >= 1")


@dataclass
class PartitionNode:
    """A rectangle ``(u_lo, u_hi] x (v_lo, v_hi]`` of the rank square."""

    bounds: tuple
    count: int
    depth: int = 0
    statistic: float | None = None
    children: list = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self):
        if self.is_leaf:
            yield self
            return
        for child in self.children:
            yield from child.leaves()

    def to_dict(self) -> dict:
        return {
            "bounds": list(self.bounds),
            "count": self.count,
            "children": [c.to_dict() for c in self.children],
        }


def rank_transform(data) -> np.ndarray:
    """Normalized 1-based ranks ``rank / N``; ties keep input order."""
    data = np.asarray(data, dtype=float).ravel()
    if data.size < 2:
        raise DomainError("rank transform needs at least two values")
    order = np.argsort(data, kind="stable")
    ranks = np.empty(data.size, dtype=float)
    ranks[order] = np.arange(1, data.size + 1)
    return ranks / data.size


def _chi_square(counts, n):
    # sum (n_q - n/k)^2 / (n/k) == (k sum n_q^2 - n^2) / n, exact in integers
    k = len(counts)
    return (k * sum(int(c) * int(c) for c in counts) - n * n) / n


def _substructure_statistic(u, v, bounds):
    u_lo, u_hi, v_lo, v_hi = bounds
    du = 0.25 * (u_hi - u_lo)
    dv = 0.25 * (v_hi - v_lo)
    # cells are (lo, hi], so searchsorted(side="left") maps u <= edge below it
    iu = np.searchsorted([u_lo + du, u_lo + 2 * du, u_lo + 3 * du], u, side="left")
    iv = np.searchsorted([v_lo + dv, v_lo + 2 * dv, v_lo + 3 * dv], v, side="left")
    counts = np.bincount(iu * 4 + iv, minlength=16)
    return _chi_square(counts.tolist(), u.size)


def build_partition(u, v, config: AdaptiveConfig | None = None) -> PartitionNode:
    """Recursively partition rank coordinates ``(u, v)`` on the unit square.

    A cell holding ``n >= min_cell_count`` points at depth
    ``< max_depth`` is split when the chi-square statistic of its four
    midpoint quadrants exceeds ``chi2_threshold``, or, near the root, when
    the 4 x 4 substructure test rejects uniformity.
    """
    config = config or AdaptiveConfig()
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ContractViolationError("rank vectors must be 1-d and of equal length")
    if u.size and (u.min() <= 0 or u.max() > 1 or v.min() <= 0 or v.max() > 1):
        raise ContractViolationError("rank coordinates must lie in (0, 1]")
    return _split(u, v, np.arange(u.size), (0.0, 1.0, 0.0, 1.0), 0, config)


def _split(u, v, idx, bounds, depth, config):
    n = idx.size
    node = PartitionNode(bounds, n, depth)
    if n < config.min_cell_count or depth >= config.max_depth:
        return node
    u_lo, u_hi, v_lo, v_hi = bounds
    u_mid = 0.5 * (u_lo + u_hi)
    v_mid = 0.5 * (v_lo + v_hi)
    upper_u = u[idx] > u_mid
    upper_v = v[idx] > v_mid
    parts = [
        (idx[~upper_u & ~upper_v], (u_lo, u_mid, v_lo, v_mid)),
        (idx[~upper_u & upper_v], (u_lo, u_mid, v_mid, v_hi)),
        (idx[upper_u & ~upper_v], (u_mid, u_hi, v_lo, v_mid)),
        (idx[upper_u & upper_v], (u_mid, u_hi, v_mid, v_hi)),
    ]
    node.statistic = _chi_square([p.size for p, _ in parts], n)
    split = node.statistic > config.chi2_threshold
    # the 4 x 4 test needs at least 2 expected points per sub-cell
    if not split and depth < config.substructure_depth and n >= 32:
        split = _substructure_statistic(u[idx], v[idx], bounds) > config.substructure_threshold
    if split:
        node.children = [_split(u, v, p, b, depth + 1, config) for p, b in parts]
    return node


def _leaf_mi(root: PartitionNode, n: int) -> float:
    terms = []
    for leaf in root.leaves():
        if leaf.count == 0:
            continue
        u_lo, u_hi, v_lo, v_hi = leaf.bounds
        p = leaf.count / n
        terms.append(p * math.log(p / ((u_hi - u_lo) * (v_hi - v_lo))))
    return math.fsum(terms)


def mi_adaptive(x, y=None, config: AdaptiveConfig | None = None,
                base: LogBase | str = LogBase.NATS) -> float:
    """Mutual information from the adaptive rank-space partition.

    Invariant under strictly increasing transforms of either series and
    under exchanging ``x`` and ``y``.
    """
    s = as_pair(x, y)
    if np.all(s.x == s.x[0]) or np.all(s.y == s.y[0]):
        raise DegenerateSeriesError("a series consists only of ties")
    root = build_partition(rank_transform(s.x), rank_transform(s.y), config)
    value = _leaf_mi(root, len(s))
    # the leaf sum is a KL divergence, so only rounding can make it negative
    return LogBase.coerce(base).convert(max(value, 0.0))
