"""Command-line front end.

    berkjones test --statistic mn --input data.txt
    berkjones pvalue --statistic mn_plus --n 100 --value 0.01
    berkjones threshold --statistic mn_plus --n 100 --alpha 0.05
    berkjones bands --n 100 --alpha 0.05 --output bands.csv
    berkjones simulate power --seed 1 --output power.csv

Exit codes: 0 success, 2 input error, 3 numerical failure.  Relative
``--output`` paths are resolved against ``$BERKJONES_OUTPUT_DIR`` when set.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bands, engine, sim, stats

OUTPUT_DIR_ENV = "BERKJONES_OUTPUT_DIR"
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
ONE_SIDED = ("mn_plus", "mn_minus", "ks_plus", "ks_minus", "hc2004", "hc2008")


class InputError(ValueError):
    pass


def fmt(x) -> str:
    if x is None:
        return "NA"
    return format(float(x), ".12g")


@dataclass
class TestReport:
    statistic: str
    n: int
    value: float
    p_value: float | None = None
    p_lower: float | None = None
    p_upper: float | None = None
    p_asymptotic: float | None = None
    method: str = "none"
    ties: bool = False
    alpha0: float | None = None
    extra: dict = field(default_factory=dict)

    def lines(self):
        out = [("statistic", self.statistic), ("n", str(self.n)), ("value", fmt(self.value))]
        if self.alpha0 is not None:
            out.append(("alpha0", fmt(self.alpha0)))
        out.append(("p_value", fmt(self.p_value)))
        if self.p_lower is not None:
            out += [("p_lower", fmt(self.p_lower)), ("p_upper", fmt(self.p_upper)),
                    ("p_asymptotic", fmt(self.p_asymptotic))]
        out.append(("method", self.method))
        for k, v in self.extra.items():
            out.append((k, fmt(v)))
        out.append(("ties", "yes" if self.ties else "no"))
        return out


# -- input --------------------------------------------------------------------------

def read_column(path) -> np.ndarray:
    """One numeric value per line (first field of CSV or whitespace rows); '#' lines skipped."""
    try:
        text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        field_ = s.replace(",", " ").split()[0]
        try:
            v = float(field_)
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {field_!r}") from None
        if not math.isfinite(v):
            raise InputError(f"{path}:{lineno}: non-finite value {field_!r}")
        values.append(v)
    if not values:
        raise InputError(f"{path}: no data")
    return np.asarray(values)


def read_table(path) -> stats.NullModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    xs, fs = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.replace(",", " ").split()
        try:
            x, f = float(parts[0]), float(parts[1])
        except (ValueError, IndexError):
            if not xs:  # header row
                continue
            raise InputError(f"{path}:{lineno}: expected two numbers") from None
        xs.append(x)
        fs.append(f)
    try:
        return stats.NullModel.from_table(xs, fs)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def null_model(args) -> stats.NullModel:
    spec = args.null
    if spec in ("standard-normal", "normal"):
        return stats.NullModel("standard-normal")
    if spec == "uniform":
        return stats.NullModel("uniform")
    if spec.startswith("table:"):
        return read_table(spec[len("table:"):])
    raise InputError(f"unknown null model {spec!r}; use standard-normal, uniform or table:PATH")


def output_path(path) -> Path | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def emit_csv(rows, header, path, stdout):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    p = output_path(path)
    if p is None:
        stdout.write(buf.getvalue())
    else:
        p.write_text(buf.getvalue())


# -- commands ---------------------------------------------------------------------------

def _kind(args):
    alpha0 = getattr(args, "alpha0", None)
    if alpha0 is not None and args.statistic not in ("hc2004", "hc2008"):
        raise InputError("--alpha0 only applies to hc2004 and hc2008")
    try:
        return stats.StatisticKind.coerce(args.statistic, alpha0)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def build_report(x, kind: stats.StatisticKind, model: stats.NullModel) -> TestReport:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", stats.TieWarning)
        try:
            s = stats.transform(x, model)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    n = s.n
    try:
        value = stats.compute_statistic(s, kind)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rep = TestReport(kind.tag, n, value, ties=s.ties,
                     alpha0=kind.alpha0 if kind.tag.startswith("hc") else None)
    if kind.tag in ONE_SIDED:
        if math.isinf(value):
            rep.p_value = 0.0
        else:
            rep.p_value = engine.one_sided_pvalue(kind, n, value)
        rep.method = "exact"
    elif kind.tag == "mn":
        r = engine.two_sided_pvalue(n, value)
        rep.p_lower, rep.p_upper, rep.p_asymptotic = (
            r.two_sided_lower, r.two_sided_upper, r.two_sided_asymptotic)
        rep.p_value = r.two_sided_asymptotic
        rep.method = "bounds"
        rep.extra["one_sided_p"] = r.exact_one_sided
    return rep


def cmd_test(args, stdout):
    kind = _kind(args)
    if args.input is None:
        raise InputError("test needs --input")
    rep = build_report(read_column(args.input), kind, null_model(args))
    for k, v in rep.lines():
        stdout.write(f"{k}: {v}\n")
    if rep.ties:
        stdout.write("warning: tied observations; p-values assume a continuous null\n")
    if args.alpha is not None and rep.p_value is not None:
        stdout.write(f"reject: {'yes' if rep.p_value <= args.alpha else 'no'}\n")
    if args.output:
        emit_csv([[v for _, v in rep.lines()]], [k for k, _ in rep.lines()], args.output, stdout)
    return rep


def cmd_pvalue(args, stdout):
    kind = _kind(args)
    if args.n is None or args.value is None:
        raise InputError("pvalue needs --n and --value")
    if kind.tag == "mn":
        try:
            r = engine.two_sided_pvalue(args.n, args.value)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        for k, v in (("one_sided_p", r.exact_one_sided), ("p_lower", r.two_sided_lower),
                     ("p_upper", r.two_sided_upper), ("p_asymptotic", r.two_sided_asymptotic)):
            stdout.write(f"{k}: {fmt(v)}\n")
        stdout.write(f"method: {r.method}\n")
        return r
    if kind.tag not in ONE_SIDED:
        raise InputError(f"no p-value engine for {kind.tag!r}")
    try:
        p = engine.one_sided_pvalue(kind, args.n, args.value)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    stdout.write(f"{fmt(p)}\n")
    return p


def cmd_threshold(args, stdout):
    kind = _kind(args)
    if args.n is None or args.alpha is None:
        raise InputError("threshold needs --n and --alpha")
    if kind.tag not in ONE_SIDED + ("mn",):
        raise InputError(f"no threshold engine for {kind.tag!r}")
    c = engine.find_threshold(kind, args.n, args.alpha)
    stdout.write(f"{fmt(c)}\n")
    return c


def cmd_bands(args, stdout):
    if args.n is None or args.alpha is None:
        raise InputError("bands needs --n and --alpha")
    try:
        table = bands.confidence_bands(args.n, args.alpha, null_model(args))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    p = output_path(args.output)
    if p is None:
        table.to_csv(stdout)
    else:
        with open(p, "w", newline="") as fh:
            table.to_csv(fh)
    return table


def cmd_simulate(args, stdout):
    if args.seed is None:
        raise InputError("simulate needs --seed")
    what = args.what
    if what == "power":
        n = args.n or 100
        alpha = args.alpha or 0.01
        reps = args.reps or 10_000
        tests = args.tests.split(",") if args.tests else ["mn", "ks", "ad", "ad_sup"]
        if args.alternative == "mean":
            params = np.round(np.linspace(0.0, 0.6, 7), 10)
            alts = [sim.GaussianAlternative(float(m), 1.0, n) for m in params]
        else:
            params = np.round(np.linspace(0.5, 1.5, 11), 10)
            alts = [sim.GaussianAlternative(0.0, float(s), n) for s in params]
        res = sim.power_curve(tests, alts, params, alpha, reps, args.seed,
                              null_reps=max(10 * reps, 100_000) if args.full else 10 * reps)
        rows = [[float(r.param), r.test, float(r.power), float(r.se)] for r in res]
        emit_csv(rows, ["param", "test", "power", "se"], args.output, stdout)
        return res
    if what == "roc":
        n = args.n or (10_000 if args.full else 1000)
        eps = args.eps if args.eps is not None else 0.01
        mu = args.mu if args.mu is not None else 1.5
        reps = args.reps or 2000
        tests = args.tests.split(",") if args.tests else ["sum", "max", "hc2004", "mn_plus", "lr"]
        curves = sim.roc_curve(tests, sim.MixtureSpec(eps, mu, n), reps, args.seed)
        rows = [[name, float(f), float(t)]
                for name, (fpr, tpr) in curves.items() for f, t in zip(fpr, tpr)]
        emit_csv(rows, ["test", "fpr", "tpr"], args.output, stdout)
        return curves
    if what == "winner-map":
        n = args.n or (10_000 if args.full else 1000)
        reps = args.reps or 2000
        alpha = args.alpha or 0.05
        tests = args.tests.split(",") if args.tests else ["sum", "max", "hc2004", "mn_plus"]
        if args.full:
            eps = tuple(np.round(np.geomspace(0.3, 1e-4, 16), 8))
            mus = tuple(np.round(np.linspace(0.25, 5.0, 20), 8))
        else:
            eps = (0.2, 0.05, 0.02, 0.01, 0.005)
            mus = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
        grid = sim.SweepGrid(eps, mus, reps, alpha, args.seed)
        cells = sim.winner_map(grid, n, tests, workers=args.workers)
        header = ["mu", "eps"] + [f"miss_{t}" for t in tests] + ["winner", "strong", "band_flag"]
        rows = [[float(c.mu), float(c.epsilon)]
                + [float(c.results[t].misdetection) for t in tests]
                + [c.winner or "", int(c.strong), int(c.band_flag)] for c in cells]
        emit_csv(rows, header, args.output, stdout)
        return cells
    raise InputError(f"unknown simulation {what!r}")


# -- parser ------------------------------------------------------------------------------

def _common(p, *, statistic=True, data=False):
    if statistic:
        p.add_argument("--statistic", default="mn", choices=stats.STATISTIC_TAGS)
        p.add_argument("--alpha0", type=float, default=None,
                       help="HC truncation fraction (hc2004/hc2008 only)")
    p.add_argument("--null", default="standard-normal",
                   help="standard-normal, uniform or table:PATH (two-column x,F(x) CSV)")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--value", type=float, default=None)
    p.add_argument("--input", default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--full", action="store_true", help="paper-scale sizes (slow)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="berkjones", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("test", "compute a statistic and its p-value for a data file"),
                           ("pvalue", "null p-value of a statistic value"),
                           ("threshold", "critical value at level --alpha"),
                           ("bands", "Q-Q confidence band table as CSV")):
        _common(sub.add_parser(name, help=helptext), statistic=name != "bands")
    p = sub.add_parser("simulate", help="Monte-Carlo power studies (CSV output)")
    p.add_argument("what", choices=("power", "roc", "winner-map"))
    _common(p, statistic=False)
    p.add_argument("--alternative", choices=("mean", "variance"), default="mean")
    p.add_argument("--tests", default=None, help="comma-separated test names")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    return parser


COMMANDS = {"test": cmd_test, "pvalue": cmd_pvalue, "threshold": cmd_threshold,
            "bands": cmd_bands, "simulate": cmd_simulate}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        COMMANDS[args.command](args, stdout)
    except InputError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (engine.PrecisionError, ArithmeticError, ValueError) as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
