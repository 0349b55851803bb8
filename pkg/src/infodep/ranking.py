"""Rank candidate variables by their dependency on a target column.

Typical use is a bias analysis: form ``bias = a - b`` from two co-located
measurements, then score every other column against it with the
Bayesian MI, the adaptive-partition MI and the absolute correlation.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._random import name_key, seed_sequence
from .adaptive import AdaptiveConfig, mi_adaptive
from .binning import DEFAULT_BETA, DEFAULT_N_DRAWS, BayesMI, mi_bayes
from .core import correlation, normalized_mi
from .errors import DegenerateSeriesError, InfodepError, LoadError
from .serialize import dumps_json, write_csv

MIN_ROWS = 10
RANK_METHODS = ("mi_bayes", "mi_adaptive", "corr")


@dataclass
class DataTable:
    columns: dict
    n_dropped: int = 0
    dropped_lines: list = field(default_factory=list)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise LoadError("columns have different lengths")
        for name in self.columns:
            if not name:
                raise LoadError("column names must be nonempty")
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}

    @property
    def column_names(self) -> list:
        return list(self.columns)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def __getitem__(self, name):
        try:
            return self.columns[name]
        except KeyError:
            raise LoadError(f"no column named {name!r}; available: {', '.join(self.columns)}") from None


def _parse_float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def load_table(source, columns=None, min_rows: int = MIN_ROWS) -> DataTable:
    """Read a comma-separated table with a header row.

    ``source`` is a path or a text stream. Only ``columns`` (default: all)
    are used; a row with a missing, non-numeric or non-finite value in a
    used column is dropped and its line number recorded.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_table(fh, columns, min_rows)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise LoadError("input is empty; expected a header row") from None
    if not header or any(not h for h in header):
        raise LoadError(f"malformed header {header!r}: every column needs a name")
    seen = set()
    for h in header:
        if h in seen:
            raise LoadError(f"duplicate column name {h!r} in header")
        seen.add(h)
    used = list(header) if columns is None else list(columns)
    for c in used:
        if c not in seen:
            raise LoadError(f"column {c!r} not found in header")
    positions = [header.index(c) for c in used]

    data = {c: [] for c in used}
    dropped = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        try:
            values = [_parse_float(row[p]) for p in positions]
        except (IndexError, ValueError):
            dropped.append(line_no)
            continue
        for c, v in zip(used, values):
            data[c].append(v)
    n_rows = len(data[used[0]]) if used else 0
    if n_rows < min_rows:
        raise LoadError(f"only {n_rows} usable rows ({len(dropped)} dropped); "
                        f"at least {min_rows} are required")
    return DataTable(data, len(dropped), dropped)


def compute_bias(table: DataTable, col_a: str, col_b: str, out_name: str = "bias") -> DataTable:
    """Append ``col_a - col_b`` as ``out_name``."""
    a, b = table[col_a], table[col_b]
    if out_name in table.columns:
        raise LoadError(f"column {out_name!r} already exists")
    columns = dict(table.columns)
    columns[out_name] = a - b
    return DataTable(columns, table.n_dropped, list(table.dropped_lines))


@dataclass
class DependencyRow:
    variable: str
    mi_bayes: BayesMI | None
    mi_adaptive: float
    corr: float
    abs_corr: float
    normalized_mi_bayes: float
    rank_by: dict = field(default_factory=dict)
    diagnostic: str | None = None

    def score(self, method):
        if method == "mi_bayes":
            return math.nan if self.mi_bayes is None else self.mi_bayes.mean
        if method == "corr":
            return self.abs_corr
        return self.mi_adaptive

    def to_dict(self) -> dict:
        b = self.mi_bayes
        return {
            "variable": self.variable,
            "mi_bayes": None if b is None else {
                "mean": b.mean, "std_dev": b.std_dev, "n_draws": b.n_draws,
                "m_x": b.m_x, "m_y": b.m_y},
            "mi_adaptive": self.mi_adaptive,
            "corr": self.corr,
            "abs_corr": self.abs_corr,
            "normalized_mi_bayes": self.normalized_mi_bayes,
            "rank_by": dict(self.rank_by),
            "diagnostic": self.diagnostic,
        }


@dataclass
class DependencyReport:
    target: str
    rows: list
    metadata: dict

    def row(self, variable) -> DependencyRow:
        for r in self.rows:
            if r.variable == variable:
                return r
        raise KeyError(variable)

    def top(self, method) -> str:
        return min(self.rows, key=lambda r: r.rank_by[method]).variable

    def to_dict(self) -> dict:
        return {"target": self.target, "metadata": self.metadata,
                "rows": [r.to_dict() for r in self.rows]}

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    def to_csv(self) -> str:
        header = ["variable", "mi_bayes_mean", "mi_bayes_std", "mi_adaptive", "corr",
                  "abs_corr", "normalized_mi_bayes", "rank_mi_bayes", "rank_mi_adaptive",
                  "rank_corr", "diagnostic"]
        rows = []
        for r in self.rows:
            b = r.mi_bayes
            rows.append([r.variable, math.nan if b is None else b.mean,
                         math.nan if b is None else b.std_dev, r.mi_adaptive, r.corr,
                         r.abs_corr, r.normalized_mi_bayes]
                        + [r.rank_by[m] for m in RANK_METHODS] + [r.diagnostic or ""])
        return write_csv(header, rows)

    def to_text(self) -> str:
        def num(v, width=10):
            return f"{v:{width}.5f}" if math.isfinite(v) else f"{'n/a':>{width}}"

        name_w = max([len("variable")] + [len(r.variable) for r in self.rows])
        lines = [f"target: {self.target}  (N={self.metadata['n_rows']}, "
                 f"beta={self.metadata['beta']:g}, draws={self.metadata['n_draws']}, "
                 f"seed={self.metadata['seed']})",
                 f"{'variable':<{name_w}}  {'MI bayes':>10} {'+/-':>9}  {'MI adapt':>10}"
                 f"  {'corr':>10}  {'L(MI)':>8}  {'rk_b':>4} {'rk_a':>4} {'rk_c':>4}"]
        for r in self.rows:
            b = r.mi_bayes
            mean = math.nan if b is None else b.mean
            std = math.nan if b is None else b.std_dev
            line = (f"{r.variable:<{name_w}}  {num(mean)} {num(std, 9)}  {num(r.mi_adaptive)}"
                    f"  {num(r.corr)}  {num(r.normalized_mi_bayes, 8)}  "
                    + " ".join(f"{r.rank_by[m]:>4d}" for m in RANK_METHODS))
            if r.diagnostic:
                line += f"  ! {r.diagnostic}"
            lines.append(line)
        return "\n".join(lines) + "\n"


def _assign_ranks(rows):
    for method in RANK_METHODS:
        valid = [r for r in rows if math.isfinite(r.score(method))]
        invalid = [r for r in rows if not math.isfinite(r.score(method))]
        ordered = (sorted(valid, key=lambda r: (-r.score(method), r.variable))
                   + sorted(invalid, key=lambda r: r.variable))
        for rank, r in enumerate(ordered, start=1):
            r.rank_by[method] = rank


def rank_dependencies(table: DataTable, target: str, beta: float = DEFAULT_BETA,
                      n_draws: int = DEFAULT_N_DRAWS, bins="auto",
                      adaptive_config: AdaptiveConfig | None = None, seed=0,
                      exclude=(), max_bins: int | None = None) -> DependencyReport:
    """Score and rank every non-target column against ``target``.

    MI methods rank by value, correlation by absolute value; rank 1 is the
    strongest dependency and ties go alphabetically. A candidate on which
    an estimator fails (e.g. a constant column) is ranked last for that
    estimator and carries a diagnostic.
    """
    adaptive_config = adaptive_config or AdaptiveConfig()
    t = table[target]
    if np.all(t == t[0]):
        raise DegenerateSeriesError(f"target column {target!r} is constant")
    candidates = [c for c in table.column_names if c != target and c not in set(exclude)]
    if not candidates:
        raise LoadError("no candidate columns to rank against the target")

    rows = []
    for name in candidates:
        col = table[name]
        problems = []
        bayes = None
        try:
            bayes = mi_bayes(col, t, beta=beta, bins=bins, n_draws=n_draws,
                             seed=seed_sequence(seed, name_key(name)), max_bins=max_bins)
        except InfodepError as exc:
            problems.append(f"mi_bayes: {exc}")
        try:
            adaptive = mi_adaptive(col, t, config=adaptive_config)
        except InfodepError as exc:
            adaptive = math.nan
            problems.append(f"mi_adaptive: {exc}")
        try:
            corr = correlation(col, t)
        except InfodepError as exc:
            corr = math.nan
            problems.append(f"corr: {exc}")
        rows.append(DependencyRow(
            variable=name, mi_bayes=bayes, mi_adaptive=adaptive, corr=corr,
            abs_corr=abs(corr), normalized_mi_bayes=math.nan if bayes is None
            else normalized_mi(bayes.mean),
            diagnostic="; ".join(problems) or None))
    _assign_ranks(rows)
    rows.sort(key=lambda r: (r.rank_by["mi_bayes"], r.variable))
    metadata = {
        "n_rows": table.n_rows, "n_dropped": table.n_dropped, "beta": float(beta),
        "n_draws": int(n_draws), "bins": bins if isinstance(bins, str) else [int(b) for b in np.atleast_1d(bins)],
        "seed": seed, "chi2_threshold": adaptive_config.chi2_threshold,
        "min_cell_count": adaptive_config.min_cell_count, "max_depth": adaptive_config.max_depth,
        "substructure_depth": adaptive_config.substructure_depth,
        "units": "nats",
    }
    return DependencyReport(target, rows, metadata)


def read_table_text(text: str, **kwargs) -> DataTable:
    return load_table(io.StringIO(text), **kwargs)
