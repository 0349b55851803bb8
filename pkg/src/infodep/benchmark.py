"""Coupled AR(1) benchmark with an analytic mutual information.

The system is

    y(i+1) = a_y y(i) + n1(i)
    x(i+1) = a_x x(i) + e y(i) + n2(i)

with independent Gaussian noises. The equal-time pair ``(x(i), y(i))`` is
stationary and jointly Gaussian, so its MI is ``-0.5 ln(1 - rho^2)``
with ``rho`` obtained from the stationary second moments.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from ._random import make_rng, seed_sequence
from .adaptive import AdaptiveConfig, mi_adaptive
from .binning import DEFAULT_N_DRAWS, EstimateWithError, mi_bayes, mi_fixed_hist
from .core import SeriesPair, correlation
from .errors import DomainError, InfodepError
from .serialize import dumps_json, write_csv

DEFAULT_N = 10_000
DEFAULT_BURN_IN = 1000
DEFAULT_COUPLINGS = (0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class ARParams:
    coupling: float = 0.0
    a_y: float = 0.5
    a_x: float = 0.6
    noise_std: float = 1.0

    def __post_init__(self):
        if not (abs(self.a_y) < 1 and abs(self.a_x) < 1):
            raise DomainError(f"non-stationary AR coefficients a_y={self.a_y}, a_x={self.a_x}")
        if not self.noise_std > 0:
            raise DomainError("noise_std must be positive")
        if not math.isfinite(self.coupling):
            raise DomainError("coupling must be finite")


def _params(p) -> ARParams:
    return p if isinstance(p, ARParams) else ARParams(coupling=float(p))


def simulate_coupled_ar(params, n: int, burn_in: int = DEFAULT_BURN_IN, seed=None) -> SeriesPair:
    """Simulate ``n`` aligned samples ``(x(i), y(i))`` after ``burn_in`` steps.

    Both chains start at 0. Noise is standard normal (scaled by
    ``noise_std``) drawn from a seeded Philox stream, ``n1`` first.
    """
    p = _params(params)
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    if int(burn_in) != burn_in or burn_in < 0:
        raise DomainError("burn_in must be a nonnegative integer")
    total = int(n) + int(burn_in)
    rng = make_rng(seed)
    n1 = p.noise_std * rng.standard_normal(total)
    n2 = p.noise_std * rng.standard_normal(total)
    # y[i] = a_y y[i-1] + n1[i-1], y[0] = 0
    y = lfilter([0.0, 1.0], [1.0, -p.a_y], n1)
    drive = np.zeros(total)
    drive[1:] = p.coupling * y[:-1] + n2[:-1]
    x = lfilter([1.0], [1.0, -p.a_x], drive)
    return SeriesPair(x[burn_in:], y[burn_in:])


def stationary_moments(params):
    """Return ``(var_x, var_y, cov_xy)`` of the stationary equal-time pair."""
    p = _params(params)
    s2 = p.noise_std ** 2
    e = p.coupling
    var_y = s2 / (1.0 - p.a_y ** 2)
    cov = p.a_y * e * var_y / (1.0 - p.a_x * p.a_y)
    var_x = (e * e * var_y + s2 + 2.0 * p.a_x * e * cov) / (1.0 - p.a_x ** 2)
    return var_x, var_y, cov


def analytic_rho(params) -> float:
    var_x, var_y, cov = stationary_moments(params)
    return cov / math.sqrt(var_x * var_y)


def analytic_mi_coupled_ar(params) -> float:
    """Ground-truth MI (nats) of the equal-time pair; ``params`` may be a coupling."""
    rho = analytic_rho(params)
    return -0.5 * math.log1p(-rho * rho)


@dataclass(frozen=True)
class Method:
    """An estimator in a sweep: ``bayes`` (beta), ``fixed_hist`` (M), ``adaptive``, ``correlation``."""

    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in ("bayes", "fixed_hist", "adaptive", "correlation"):
            raise DomainError(f"unknown method {self.kind!r}")
        if self.kind == "bayes" and not (self.param is not None and self.param > 0):
            raise DomainError("bayes needs a Dirichlet exponent > 0")
        if self.kind == "fixed_hist" and not (self.param is not None and int(self.param) == self.param
                                              and self.param >= 1):
            raise DomainError("fixed_hist needs a positive integer bin count")

    @property
    def name(self) -> str:
        if self.kind == "bayes":
            return f"bayes_b{self.param:g}"
        if self.kind == "fixed_hist":
            return f"fixed_hist_m{int(self.param)}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "Method":
        """Parse ``bayes:0.05``, ``fixed:30``, ``adaptive`` or ``corr``."""
        kind, _, arg = text.strip().partition(":")
        kind = {"fixed": "fixed_hist", "corr": "correlation"}.get(kind, kind)
        if kind == "bayes":
            return cls(kind, float(arg) if arg else 0.5)
        if kind == "fixed_hist":
            return cls(kind, int(arg) if arg else 30)
        if arg:
            raise DomainError(f"method {kind!r} takes no parameter")
        return cls(kind)


DEFAULT_METHODS = (Method("bayes", 0.05), Method("bayes", 0.5), Method("fixed_hist", 30),
                   Method("adaptive"), Method("correlation"))


@dataclass
class SweepRow:
    coupling: float
    analytic_mi: float
    estimates: dict
    selected_bins: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)


@dataclass
class SweepResult:
    rows: list
    methods: tuple
    metadata: dict

    def to_dict(self) -> dict:
        rows = []
        for r in self.rows:
            rows.append({
                "coupling": r.coupling,
                "analytic_mi": r.analytic_mi,
                "estimates": {
                    k: None if v is None else {"mean": v.mean, "std_dev": v.std_dev, "n": v.n_draws}
                    for k, v in r.estimates.items()},
                "selected_bins": {k: [list(b) for b in v] for k, v in r.selected_bins.items()},
                "failures": r.failures,
            })
        return {"metadata": self.metadata, "methods": [m.name for m in self.methods], "rows": rows}

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    def _selected(self, row):
        # median selected grid of the first Bayesian method
        for m in self.methods:
            bins = row.selected_bins.get(m.name)
            if bins:
                return (statistics.median_low(b[0] for b in bins),
                        statistics.median_low(b[1] for b in bins))
        return None, None

    def to_csv(self) -> str:
        header = ["coupling", "analytic_mi"]
        for m in self.methods:
            header += [f"{m.name}_mean", f"{m.name}_std"]
        header += ["selected_m_x", "selected_m_y"]
        rows = []
        for r in self.rows:
            line = [float(r.coupling), float(r.analytic_mi)]
            for m in self.methods:
                est = r.estimates.get(m.name)
                line += [None, None] if est is None else [float(est.mean), float(est.std_dev)]
            line += list(self._selected(r))
            rows.append(line)
        return write_csv(header, rows)

    def to_long_csv(self) -> str:
        """Plot-ready ``coupling, method, value`` rows (analytic curve included)."""
        rows = []
        for r in self.rows:
            rows.append([float(r.coupling), "analytic", float(r.analytic_mi)])
            for m in self.methods:
                est = r.estimates.get(m.name)
                rows.append([float(r.coupling), m.name, None if est is None else float(est.mean)])
        return write_csv(["coupling", "method", "value"], rows)

    def mean_of(self, method_name: str) -> np.ndarray:
        return np.array([np.nan if r.estimates.get(method_name) is None
                         else r.estimates[method_name].mean for r in self.rows])

    @property
    def analytic(self) -> np.ndarray:
        return np.array([r.analytic_mi for r in self.rows])


def _run_cell(task):
    coupling_index, coupling, seed, n, burn_in, methods, n_draws, adaptive_config, max_bins = task
    ss = seed_sequence(seed, coupling_index)
    sim_seed, est_seed = ss.spawn(2)
    values, bins, failures = {}, {}, {}
    try:
        pair = simulate_coupled_ar(ARParams(coupling=coupling), n, burn_in, sim_seed)
    except InfodepError as exc:
        return {m.name: None for m in methods}, bins, {m.name: str(exc) for m in methods}
    for i, m in enumerate(methods):
        try:
            if m.kind == "bayes":
                est = mi_bayes(pair.x, pair.y, beta=m.param, n_draws=n_draws,
                               seed=seed_sequence(est_seed, i), max_bins=max_bins)
                values[m.name] = est.mean
                bins[m.name] = (est.m_x, est.m_y)
            elif m.kind == "fixed_hist":
                values[m.name] = mi_fixed_hist(pair.x, pair.y, int(m.param))
            elif m.kind == "adaptive":
                values[m.name] = mi_adaptive(pair.x, pair.y, config=adaptive_config)
            else:
                values[m.name] = correlation(pair.x, pair.y)
        except InfodepError as exc:
            values[m.name] = None
            failures[m.name] = str(exc)
    return values, bins, failures


def run_sweep(couplings, n: int = DEFAULT_N, methods=DEFAULT_METHODS, seeds=range(10),
              burn_in: int = DEFAULT_BURN_IN, n_draws: int = DEFAULT_N_DRAWS,
              adaptive_config: AdaptiveConfig | None = None, max_bins: int | None = None,
              workers: int = 1) -> SweepResult:
    """Estimate MI on simulated data for every coupling and seed.

    Each ``(coupling, seed)`` cell draws from its own random stream keyed by
    the seed and the coupling index, so results do not depend on
    ``workers``. Per-method values are averaged over seeds; a cell whose
    estimator fails is left out of the average and listed in ``failures``.
    """
    couplings = [float(c) for c in couplings]
    if not couplings:
        raise DomainError("at least one coupling value is required")
    methods = tuple(Method.parse(m) if isinstance(m, str) else m for m in methods)
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise DomainError("at least one seed is required")
    adaptive_config = adaptive_config or AdaptiveConfig()
    for c in couplings:
        ARParams(coupling=c)

    tasks = [(ci, c, s, n, burn_in, methods, n_draws, adaptive_config, max_bins)
             for ci, c in enumerate(couplings) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]

    rows = []
    for ci, c in enumerate(couplings):
        cell_results = results[ci * len(seeds):(ci + 1) * len(seeds)]
        estimates, selected, failures = {}, {}, {}
        for m in methods:
            vals = [r[0][m.name] for r in cell_results if r[0].get(m.name) is not None]
            if vals:
                std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
                estimates[m.name] = EstimateWithError(float(np.mean(vals)), std, len(vals))
            else:
                estimates[m.name] = None
            if m.kind == "bayes":
                selected[m.name] = [r[1][m.name] for r in cell_results if m.name in r[1]]
            errs = [f"seed {s}: {r[2][m.name]}" for s, r in zip(seeds, cell_results)
                    if m.name in r[2]]
            if errs:
                failures[m.name] = errs
        rows.append(SweepRow(c, analytic_mi_coupled_ar(c), estimates, selected, failures))

    metadata = {
        "n": int(n), "seeds": seeds, "burn_in": int(burn_in), "n_draws": int(n_draws),
        "bins": "auto", "max_bins": max_bins,
        "chi2_threshold": adaptive_config.chi2_threshold,
        "min_cell_count": adaptive_config.min_cell_count,
        "max_depth": adaptive_config.max_depth,
        "substructure_depth": adaptive_config.substructure_depth,
        "a_y": ARParams().a_y, "a_x": ARParams().a_x, "noise_std": ARParams().noise_std,
        "units": "nats",
    }
    return SweepResult(rows, methods, metadata)
