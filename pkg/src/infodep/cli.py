"""Command-line front end: ``infodep {mi,optbins,sweep,rank}``.

Exit status is 0 on success, 1 for data or estimation errors and 2 for
usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .adaptive import CHI2_95_3DOF, AdaptiveConfig, mi_adaptive
from .benchmark import DEFAULT_BURN_IN, DEFAULT_COUPLINGS, DEFAULT_N, Method, run_sweep
from .binning import (DEFAULT_BETA, DEFAULT_N_DRAWS, log_posterior_curve, mi_bayes,
                      mi_fixed_hist)
from .core import LogBase, correlation
from .errors import InfodepError
from .ranking import compute_bias, load_table, rank_dependencies
from .serialize import dumps_json, format_float, write_csv


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _nonnegative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _bins(text):
    if text in ("auto", "marginal"):
        return text
    try:
        if "x" in text:
            m_x, m_y = (int(t) for t in text.split("x"))
        else:
            m_x = m_y = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bins must be 'auto', 'marginal', N or NxM, got {text!r}") from None
    if m_x < 1 or m_y < 1:
        raise argparse.ArgumentTypeError("bin counts must be >= 1")
    return (m_x, m_y)


def _float_list(text):
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("at least one value is required")
    return values


def _method_list(text):
    try:
        return [Method.parse(t) for t in text.split(",") if t.strip()]
    except (InfodepError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fmt(value):
    return repr(round(float(value), 12))


def _emit(text, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _add_adaptive_flags(p):
    p.add_argument("--chi2-threshold", type=_positive_float, default=CHI2_95_3DOF,
                   help="chi-square split threshold (3 dof)")
    p.add_argument("--min-cell-count", type=_positive_int, default=8,
                   help="smallest cell that may be split")
    p.add_argument("--max-depth", type=_positive_int, default=20, help="maximum partition depth")
    p.add_argument("--substructure-depth", type=_nonnegative_int, default=2,
                   help="apply the 4x4 sub-cell test above this depth (0 disables it)")


def _add_bayes_flags(p):
    p.add_argument("--beta", type=_positive_float, default=DEFAULT_BETA,
                   help="Dirichlet exponent (> 0)")
    p.add_argument("--n-draws", type=_positive_int, default=DEFAULT_N_DRAWS,
                   help="posterior draws for error bars")
    p.add_argument("--max-bins", type=_positive_int, default=None,
                   help="largest bin count scanned (default min(N/2, 200))")


def _adaptive_config(args):
    return AdaptiveConfig(args.chi2_threshold, args.min_cell_count, args.max_depth,
                          substructure_depth=args.substructure_depth)


def cmd_mi(args):
    x_col, y_col = args.x, args.y
    columns = [x_col, y_col] if x_col and y_col else None
    table = load_table(args.input, columns=columns)
    if columns is None:
        if len(table.column_names) < 2:
            raise InfodepError("input needs at least two columns (or use --x/--y)")
        x_col, y_col = table.column_names[:2]
    x, y = table[x_col], table[y_col]
    base = LogBase.coerce(args.base)
    wanted = ["bayes", "fixed", "adaptive", "corr"] if args.method == "all" else [args.method]

    results = {}
    if "bayes" in wanted:
        est = mi_bayes(x, y, beta=args.beta, bins=args.bins, n_draws=args.n_draws,
                       seed=args.seed, max_bins=args.max_bins)
        results["bayes"] = {"mean": base.convert(est.mean), "std_dev": base.convert(est.std_dev),
                            "n_draws": est.n_draws, "m_x": est.m_x, "m_y": est.m_y}
    if "fixed" in wanted:
        results["fixed"] = {"value": base.convert(mi_fixed_hist(x, y, args.fixed_bins)),
                            "m": args.fixed_bins}
    if "adaptive" in wanted:
        results["adaptive"] = {"value": mi_adaptive(x, y, config=_adaptive_config(args),
                                                    base=base)}
    if "corr" in wanted:
        results["corr"] = {"value": correlation(x, y)}

    if args.format == "json":
        doc = {"metadata": {
            "x": x_col, "y": y_col, "n_rows": table.n_rows, "n_dropped": table.n_dropped,
            "units": base.value, "seed": args.seed, "beta": args.beta, "bins": args.bins
            if isinstance(args.bins, str) else list(args.bins), "n_draws": args.n_draws,
            "max_bins": args.max_bins, "fixed_bins": args.fixed_bins,
            "chi2_threshold": args.chi2_threshold, "min_cell_count": args.min_cell_count,
            "max_depth": args.max_depth, "substructure_depth": args.substructure_depth},
            "results": results}
        _emit(dumps_json(doc), args.output)
        return 0
    lines = [f"{x_col} vs {y_col}: N={table.n_rows} ({table.n_dropped} rows dropped), "
             f"units={base.value}"]
    if "bayes" in results:
        r = results["bayes"]
        lines.append(f"bayes(beta={args.beta:g}): {_fmt(r['mean'])} +/- {_fmt(r['std_dev'])} "
                     f"[bins {r['m_x']}x{r['m_y']}, {r['n_draws']} draws, seed {args.seed}]")
    if "fixed" in results:
        lines.append(f"fixed(M={args.fixed_bins}): {_fmt(results['fixed']['value'])}")
    if "adaptive" in results:
        lines.append(f"adaptive: {_fmt(results['adaptive']['value'])}")
    if "corr" in results:
        lines.append(f"corr: {_fmt(results['corr']['value'])}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def cmd_optbins(args):
    table = load_table(args.input, columns=[args.column] if args.column else None)
    column = args.column or table.column_names[0]
    ms, values = log_posterior_curve(table[column], beta=args.beta, max_bins=args.max_bins)
    best = int(ms[int(values.argmax())])
    if args.format == "json":
        doc = {"metadata": {"column": column, "n_rows": table.n_rows, "beta": args.beta,
                            "max_bins": int(ms[-1])},
               "selected_m": best,
               "curve": [{"m": int(m), "log_posterior": float(v)} for m, v in zip(ms, values)]}
        _emit(dumps_json(doc), args.output)
        return 0
    curve = write_csv(["m", "log_posterior"], [[int(m), float(v)] for m, v in zip(ms, values)])
    if args.curve:
        Path(args.curve).write_text(curve, encoding="utf-8")
        text = f"selected_m,{best}\n"
    else:
        text = f"selected_m,{best}\n{curve}"
    _emit(text, args.output)
    return 0


def cmd_sweep(args):
    methods = list(args.methods)
    if args.assert_fig2:
        names = {m.name for m in methods}
        for m in (Method("fixed_hist", 30), Method("bayes", 0.05)):
            if m.name not in names:
                methods.append(m)
    seeds = range(args.seed, args.seed + args.replicates)
    result = run_sweep(args.couplings, n=args.n, methods=methods, seeds=seeds,
                       burn_in=args.burn_in, n_draws=args.n_draws,
                       adaptive_config=_adaptive_config(args), max_bins=args.max_bins,
                       workers=args.workers)
    result.metadata["master_seed"] = args.seed
    prefix = Path(args.output)
    if prefix.parent != Path("."):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_text = result.to_csv()
    Path(f"{prefix}.csv").write_text(csv_text, encoding="utf-8")
    Path(f"{prefix}.json").write_text(result.to_json(), encoding="utf-8")
    Path(f"{prefix}_long.csv").write_text(result.to_long_csv(), encoding="utf-8")
    sys.stdout.write(f"# N={args.n}, seeds={args.replicates}, units=nats\n")
    sys.stdout.write(csv_text)
    if args.assert_fig2:
        row = min(result.rows, key=lambda r: r.coupling)
        fixed = row.estimates.get(Method("fixed_hist", 30).name)
        bayes = row.estimates.get(Method("bayes", 0.05).name)
        ok = fixed is not None and bayes is not None and fixed.mean > bayes.mean
        sys.stderr.write(
            f"bias ordering at e={format_float(row.coupling)}: fixed_hist(30)="
            f"{'n/a' if fixed is None else _fmt(fixed.mean)} > bayes(0.05)="
            f"{'n/a' if bayes is None else _fmt(bayes.mean)}: {'PASS' if ok else 'FAIL'}\n")
        return 0 if ok else 1
    return 0


def cmd_rank(args):
    table = load_table(args.input)
    target = args.target
    if args.bias is not None:
        target = args.bias_name
        table = compute_bias(table, args.bias[0], args.bias[1], target)
    report = rank_dependencies(table, target, beta=args.beta, n_draws=args.n_draws,
                               bins=args.bins, adaptive_config=_adaptive_config(args),
                               seed=args.seed, exclude=args.exclude, max_bins=args.max_bins)
    if args.format == "json":
        text = report.to_json()
    elif args.format == "csv":
        text = report.to_csv()
    else:
        text = report.to_text()
    _emit(text, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="infodep", formatter_class=fmt,
        description="Mutual information and correlation estimators for dependency analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mi", formatter_class=fmt, help="estimate MI between two columns")
    p.add_argument("input", help="CSV file with a header row ('-' for stdin)")
    p.add_argument("--x", help="first column (default: first column of the file)")
    p.add_argument("--y", help="second column (default: second column of the file)")
    p.add_argument("--method", choices=["bayes", "fixed", "adaptive", "corr", "all"],
                   default="all")
    _add_bayes_flags(p)
    p.add_argument("--bins", type=_bins, default="auto",
                   help="'auto' (square joint grid), 'marginal', N or NxM")
    p.add_argument("--fixed-bins", type=_positive_int, default=30,
                   help="bins per axis for the fixed histogram")
    _add_adaptive_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base", choices=["nats", "bits"], default="nats")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--output", help="write to this file instead of stdout")
    p.set_defaults(func=cmd_mi)

    p = sub.add_parser("optbins", formatter_class=fmt,
                       help="select the number of equal-width bins for one column")
    p.add_argument("input")
    p.add_argument("--column", help="column to bin (default: first column)")
    p.add_argument("--beta", type=_positive_float, default=DEFAULT_BETA)
    p.add_argument("--max-bins", type=_positive_int, default=None,
                   help="largest M scanned (default min(N/2, 200))")
    p.add_argument("--curve", help="write the (m, log_posterior) curve CSV here")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_optbins)

    p = sub.add_parser("sweep", formatter_class=fmt,
                       help="coupled AR benchmark over a grid of coupling strengths")
    p.add_argument("--couplings", type=_float_list,
                   default=list(DEFAULT_COUPLINGS), help="comma-separated coupling values")
    p.add_argument("--n", type=_positive_int, default=DEFAULT_N, help="samples per series")
    p.add_argument("--replicates", type=_positive_int, default=10, help="seeds per coupling")
    p.add_argument("--seed", type=int, default=0, help="first seed; replicates use seed+k")
    p.add_argument("--methods", type=_method_list,
                   default=[Method.parse(m) for m in
                            ("bayes:0.05", "bayes:0.5", "fixed:30", "adaptive", "corr")],
                   help="comma-separated: bayes:BETA, fixed:M, adaptive, corr")
    p.add_argument("--burn-in", type=_nonnegative_int, default=DEFAULT_BURN_IN)
    p.add_argument("--n-draws", type=_positive_int, default=DEFAULT_N_DRAWS)
    p.add_argument("--max-bins", type=_positive_int, default=None)
    _add_adaptive_flags(p)
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="worker processes (results do not depend on this)")
    p.add_argument("--output", default="sweep",
                   help="prefix for PREFIX.csv, PREFIX.json and PREFIX_long.csv")
    p.add_argument("--assert-fig2", action="store_true",
                   help="exit 1 unless fixed_hist(30) exceeds bayes(0.05) at the smallest coupling")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rank", formatter_class=fmt,
                       help="rank columns by dependency on a target or bias column")
    p.add_argument("input")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--target", help="existing target column")
    group.add_argument("--bias", nargs=2, metavar=("A", "B"), help="use A - B as the target")
    p.add_argument("--bias-name", default="bias", help="name of the constructed bias column")
    p.add_argument("--exclude", nargs="*", default=[], help="columns not to rank")
    _add_bayes_flags(p)
    p.add_argument("--bins", type=_bins, default="auto")
    _add_adaptive_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_rank)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "input", None) == "-":
        args.input = sys.stdin
    try:
        return args.func(args)
    except InfodepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
