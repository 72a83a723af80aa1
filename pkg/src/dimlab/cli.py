"""Command-line front end: ``dimlab exact|estimate|tv|converge|verify``."""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile

from . import __version__, numeric
from .documents import DocumentError, dumps, load_measure
from .errors import (
    DegenerateBall,
    DimlabError,
    EmptyCorrelation,
    InvalidMeasure,
    InvalidParameters,
    NonPositiveValue,
    NotProbability,
    TooFewPoints,
    UnknownExample,
    UnsupportedMeasure,
    UnsupportedSet,
    ZeroMass,
)
from .exact import exact_dims
from .measures import sample
from .sequences import NAMES, make_example, verify_example
from .tv import setwise_converges, tv_converges, tv_distance, weak_converges

EXIT_OK, EXIT_CLAIMS, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3

INPUT_ERRORS = (DocumentError, InvalidMeasure, InvalidParameters, UnknownExample, OSError)
RUNTIME_ERRORS = (EmptyCorrelation, TooFewPoints, NonPositiveValue, DegenerateBall, NotProbability,
                  UnsupportedMeasure, UnsupportedSet, ZeroMass)


class InputError(Exception):
    pass


# -- output -----------------------------------------------------------------


def _write_atomic(path: str, text: str):
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (int, str)) else format(float(v), ".17g") for v in row])
    return buf.getvalue()


def _emit(args, stem: str, report: dict, csv_text: str | None = None, summary: str | None = None):
    text = dumps(report) + "\n"
    fmt = args.format
    if args.out:
        if fmt in ("json", "both", "summary"):
            _write_atomic(os.path.join(args.out, f"{stem}.json"), text)
        if csv_text is not None and fmt in ("csv", "both", "summary"):
            _write_atomic(os.path.join(args.out, f"{stem}.csv"), csv_text)
        if summary:
            sys.stdout.write(summary)
    else:
        if fmt == "csv" and csv_text is not None:
            sys.stdout.write(csv_text)
        else:
            sys.stdout.write(summary if summary and fmt == "summary" else text)


def _envelope(args, command: str, result: dict) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "format")}
    return {"tool": "dimlab", "version": __version__, "command": command, "config": config, "result": result}


# -- inputs -----------------------------------------------------------------


def _example_params(args) -> dict:
    params = {}
    if getattr(args, "a", None) is not None:
        params["a"] = args.a
    return params


def _measure(args):
    if args.measure and args.example:
        raise InputError("give either --measure or --example, not both")
    if args.measure:
        return load_measure(args.measure)
    if args.example:
        seq = make_example(args.example, **_example_params(args))
        return seq.limit if args.n is None else seq[args.n]
    raise InputError("one of --measure or --example is required")


def _schedule(args, default_min, default_max):
    rmin = args.rmin if args.rmin is not None else default_min
    rmax = args.rmax if args.rmax is not None else default_max
    return numeric.default_schedule(rmin, rmax, args.rsteps)


# -- commands ---------------------------------------------------------------


def cmd_exact(args) -> int:
    mu = _measure(args)
    table = exact_dims(mu)
    result = {"table": table.to_dict(), "total_mass": mu.total_mass, "violations": table.violations()}
    rows = [(k, e.status, "" if e.value is None else format(e.value, ".17g")) for k, e in table.entries.items()]
    _emit(args, "exact", _envelope(args, "exact", result), _csv(["mapping", "status", "value"], rows))
    return EXIT_OK


def cmd_estimate(args) -> int:
    mu = _measure(args)
    method = args.method
    if method == "box":
        rs = _schedule(args, 1e-6, 1e-2)
        deltas = [args.delta if args.delta is not None else 0.0]
        est = numeric.box_dimension_estimate(mu, deltas, rs)
        if not est:
            raise UnsupportedMeasure("delta = 0 box counts are not exact for this measure")
        estimate = est[deltas[0]]
    else:
        x = sample(mu if mu.is_probability else _normalized(mu), args.samples, args.seed)
        if method == "local":
            rs = _schedule(args, 1e-5, 1e-2)
            q = args.quantile
            estimate = numeric.local_dimension_profile(mu, x, rs, (q,)).estimates[q]
        elif method == "gp":
            rs = _schedule(args, 1e-3, 1e-1)
            estimate = numeric.correlation_dim_gp(x, rs)
        else:
            rs = _schedule(args, 1e-6, 1e-3)
            estimate = numeric.modified_correlation_dim(x, args.delta if args.delta is not None else 0.01, rs)
    s = estimate.series
    rows = [(math.log10(r), math.log10(v)) for r, v in zip(s.r, s.values)]
    result = estimate.to_dict()
    result["seed"] = args.seed
    _emit(args, f"estimate-{method}", _envelope(args, "estimate", result), _csv(["log10_r", "log10_value"], rows))
    return EXIT_OK


def _normalized(mu):
    from .measures import normalize

    return normalize(mu)


def cmd_tv(args) -> int:
    a, b = load_measure(args.a), load_measure(args.b)
    value, err = tv_distance(a, b, return_error=True)
    _emit(args, "tv", _envelope(args, "tv", {"tv_distance": value, "error_bound": err}))
    return EXIT_OK


def cmd_converge(args) -> int:
    seq = make_example(args.example, **_example_params(args))
    if args.mode == "tv":
        verdict = tv_converges(seq, args.horizon, args.tol)
        column = "tv_distance"
    elif args.mode == "setwise":
        verdict = setwise_converges(seq, args.horizon, args.tol)
        column = "max_gap"
    else:
        prob = seq if seq.limit.is_probability and seq[seq.first].is_probability else seq.normalized()
        verdict = weak_converges(prob, args.horizon, args.tol)
        column = "levy_distance"
    _emit(args, f"converge-{args.example}-{args.mode}", _envelope(args, "converge", verdict.to_dict()),
          _csv(["n", column], verdict.series))
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(NAMES) if args.all or not args.names else args.names
    for nm in names:
        if nm not in NAMES:
            raise UnknownExample(nm)
    reports = []
    for nm in names:
        params = _example_params(args) if nm == "ex7" else {}
        reports.append(verify_example(nm, args.horizon, args.tol, seed=args.seed, n_samples=args.samples, **params))
    rows, lines = [], []
    for rep in reports:
        ok = sum(c.passed for c in rep.claims)
        lines.append(f"{rep.name:5s} {'PASS' if rep.passed else 'FAIL'} {ok}/{len(rep.claims)} claims\n")
        for c in rep.claims:
            margin = "" if c.margin is None else format(c.margin, ".17g")
            rows.append((rep.name, c.id, "pass" if c.passed else "fail", margin, c.citation))
            if not c.passed:
                lines.append(f"      failed: {c.id}: expected {c.expected!r}, observed {c.observed!r}\n")
        if rep.name == "ex7":
            cert = next((c for c in rep.claims if c.id == "ball_core_exponents"), None)
            if cert is not None:
                lines.append("      ball-core exponents: " + ", ".join(f"{e:.6g}" for e in cert.observed) + "\n")
    all_ok = all(r.passed for r in reports)
    lines.append(f"{len(reports)} examples, {'all claims pass' if all_ok else 'claims failed'}\n")
    result = {"passed": all_ok, "examples": [r.to_dict() for r in reports]}
    _emit(args, "verify", _envelope(args, "verify", result),
          _csv(["example", "claim", "status", "margin", "citation"], rows), summary="".join(lines))
    if not args.out and args.format != "summary":
        sys.stderr.write("".join(lines))
    return EXIT_OK if all_ok else EXIT_CLAIMS


# -- parser -----------------------------------------------------------------


def _common(p, schedule=False):
    p.add_argument("--out", help="directory for report files (default: stdout)")
    p.add_argument("--format", choices=("csv", "json", "both", "summary"), default="both")
    p.add_argument("--seed", type=int, default=0)
    if schedule:
        p.add_argument("--rmin", type=float)
        p.add_argument("--rmax", type=float)
        p.add_argument("--rsteps", type=int, default=numeric.DEFAULT_STEPS)


def _source(p):
    p.add_argument("--measure", help="measure document (JSON)")
    p.add_argument("--example", help="example name: " + ", ".join(NAMES))
    p.add_argument("--n", type=int, help="sequence index (default: the limit measure)")
    p.add_argument("--a", type=float, help="parameter a of ex7")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"dimlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="closed-form dimension table")
    _source(p)
    _common(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("estimate", help="numerical dimension estimate")
    _source(p)
    _common(p, schedule=True)
    p.add_argument("--method", choices=("box", "local", "gp", "mc"), default="gp")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--delta", type=float)
    p.add_argument("--quantile", type=float, default=0.5)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("tv", help="total variation distance of two documents")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _common(p)
    p.set_defaults(func=cmd_tv)

    p = sub.add_parser("converge", help="convergence check of an example sequence")
    p.add_argument("--example", required=True)
    p.add_argument("--a", type=float)
    p.add_argument("--mode", choices=("weak", "setwise", "tv"), default="tv")
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--tol", type=float, default=0.05)
    _common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("verify", help="check every claim of the examples")
    p.add_argument("names", nargs="*")
    p.add_argument("--all", action="store_true")
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--a", type=float)
    p.add_argument("--samples", type=int, default=10_000)
    _common(p)
    p.set_defaults(func=cmd_verify, format="summary")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DocumentError as exc:
        sys.stderr.write(f"dimlab: parse error: {exc}\n")
        return EXIT_INPUT
    except (InputError, *INPUT_ERRORS) as exc:
        sys.stderr.write(f"dimlab: input error: {exc}\n")
        return EXIT_INPUT
    except (*RUNTIME_ERRORS, DimlabError) as exc:
        sys.stderr.write(f"dimlab: estimator error: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
