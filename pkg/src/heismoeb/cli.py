"""Command-line front end.

    heismoeb eval gauge --field C --n 2 --point '{"zeta":[[1,0]],"v":[0,1]}'
    heismoeb eval dist P Q [--metric M]
    heismoeb eval xratio P1 P2 P3 P4
    heismoeb eval map --map '[{"invert":true}]' --point P
    heismoeb verify --suite moebius-invariance --field H --samples 10000 --seed 42
    heismoeb classify [--models FILE] [--format text]
    heismoeb cc --point P [--gauge-norm scaled16]

Exit codes: 0 success, 1 suite failure or audit violation, 2 bad input,
3 math-domain error (degenerate points, solver failure).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from . import jsonio
from .algebra import FIELDS, FieldMismatchError, ShapeMismatchError
from .conditions import DEFAULT_ZOO, run_classification
from .heisenberg import is_inf, koranyi_dist, koranyi_gauge, origin
from .metrics import CCH1, GAUGE_NORMS, ModelFieldError, SolverError
from .moebius import DegenerateInputError, apply_map, cross_ratio_pair
from .verify import SUITES, run_suite

EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 1, 2, 3


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf"
    return f"{x:.15g}"


def _u64(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _json_arg(text):
    """Inline JSON, or @path to read it from a file."""
    if text.startswith("@"):
        return Path(text[1:]).read_text()
    return text


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--field", choices=FIELDS, default="C")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--samples", type=_positive, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--metric", type=_json_arg, default=None,
                   help="metric model JSON (default: the Koranyi metric)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="heismoeb", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"heismoeb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate gauges, distances, cross-ratios and maps")
    evsub = ev.add_subparsers(dest="what", required=True)
    g = evsub.add_parser("gauge", parents=[common])
    g.add_argument("--point", type=_json_arg, required=True)
    d = evsub.add_parser("dist", parents=[common])
    d.add_argument("points", nargs=2, type=_json_arg)
    x = evsub.add_parser("xratio", parents=[common])
    x.add_argument("points", nargs=4, type=_json_arg)
    m = evsub.add_parser("map", parents=[common])
    m.add_argument("--map", dest="word", type=_json_arg, required=True)
    m.add_argument("--point", type=_json_arg, required=True)

    v = sub.add_parser("verify", parents=[common], help="run invariant suites")
    v.add_argument("--suite", action="append", choices=SUITES + ("all",), required=True)

    c = sub.add_parser("classify", parents=[common], help="classify metric models")
    c.add_argument("--models", type=str, default=None,
                   help="JSON file with a list of metric models (default: the built-in zoo)")
    c.add_argument("--fields", default=None, help="comma-separated fields (default: --field)")
    c.add_argument("--workers", type=_positive, default=1)

    cc = sub.add_parser("cc", parents=[common], help="CC distance from the origin, K = C, n = 2")
    cc.add_argument("--point", type=_json_arg, required=True)
    cc.add_argument("--gauge-norm", choices=GAUGE_NORMS, default="default")
    return parser


def _check_config(args):
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.field == "O" and args.n != 2:
        raise UsageError("octonionic Heisenberg groups exist only for n = 2")


def _config(args) -> dict:
    return {"field": args.field, "n": args.n, "seed": args.seed, "samples": args.samples,
            "tol": args.tol}


def _metric(args):
    return None if args.metric is None else jsonio.parse_metric(args.metric)


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    metric = _metric(args)
    if metric is not None:
        metric.check_space(args.field, args.n)
    if args.what == "gauge":
        p = jsonio.parse_point(args.point, args.field, args.n)
        if is_inf(p):
            raise DegenerateInputError("the gauge of INF is infinite")
        value = koranyi_gauge(p) if metric is None else metric.dist(origin(args.field, args.n), p)
        _emit(args, _fmt(value))
    elif args.what == "dist":
        p, q = (jsonio.parse_point(t, args.field, args.n) for t in args.points)
        value = koranyi_dist(p, q) if metric is None else metric.dist(p, q)
        _emit(args, _fmt(value))
    elif args.what == "xratio":
        pts = [jsonio.parse_point(t, args.field, args.n) for t in args.points]
        cr = cross_ratio_pair(metric, pts)
        if args.format == "json":
            _emit(args, json.dumps({"x1": float(cr.x1), "x2": float(cr.x2)}, sort_keys=True))
        else:
            _emit(args, f"x1 = {_fmt(cr.x1)}\nx2 = {_fmt(cr.x2)}")
    else:
        word = jsonio.parse_map(args.word, args.field, args.n)
        p = jsonio.parse_point(args.point, args.field, args.n)
        image = apply_map(word, p, field=args.field, n=args.n)
        _emit(args, json.dumps(jsonio.point_to_json(image), sort_keys=True))
    return 0


def _report(args, suites, matrix=None) -> dict:
    out = {"config": _config(args), "suites": [s.to_dict() for s in suites], "version": __version__}
    if matrix is not None:
        out["matrix"] = matrix.to_dict()
    return out


def cmd_verify(args) -> int:
    metric = _metric(args)
    names = SUITES if "all" in args.suite else tuple(dict.fromkeys(args.suite))
    reports = []
    for name in names:
        kw = {"field": args.field, "n": args.n, "seed": args.seed, "metric": metric}
        if name == "cc":
            kw.update(field="C", n=2)
        if args.samples is not None:
            kw["samples"] = args.samples
        if args.tol is not None:
            kw["tol"] = args.tol
        reports.append(run_suite(name, **kw))
    if args.format == "text":
        _emit(args, "\n".join(f"{r.condition:<20} {r.verdict}" for r in reports))
    else:
        _emit(args, jsonio.dumps(_report(args, reports)))
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(f"suite {r.condition} failed; worst witness:", file=sys.stderr)
        print(jsonio.dumps(r.witness), file=sys.stderr)
    return EXIT_FAIL if failed else 0


def _load_models(path):
    if path is None:
        return list(DEFAULT_ZOO)
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise jsonio.ParseError(f"invalid JSON in {path}: {exc}") from None
    if isinstance(data, dict) and "models" in data:
        data = data["models"]
    if not isinstance(data, list):
        raise UsageError("the models file must hold a JSON list")
    if not data:
        raise UsageError("the model list is empty")
    return [jsonio.parse_metric(m) for m in data]


def cmd_classify(args) -> int:
    models = _load_models(args.models)
    fields = tuple(args.fields.split(",")) if args.fields else (args.field,)
    for f in fields:
        if f not in FIELDS:
            raise UsageError(f"unknown field {f!r}")
    matrix = run_classification(
        models, fields=fields, n=args.n, samples=args.samples or 256, seed=args.seed,
        workers=args.workers,
    )
    if args.format == "text":
        _emit(args, matrix.to_text())
    else:
        _emit(args, jsonio.dumps(_report(args, [], matrix)))
    if matrix.violations:
        print(f"{len(matrix.violations)} implication audit violation(s)", file=sys.stderr)
        return EXIT_FAIL
    return 0


def cmd_cc(args) -> int:
    p = jsonio.parse_point(args.point, "C", 2)
    if is_inf(p):
        raise DegenerateInputError("the CC distance to INF is infinite")
    model = CCH1(args.gauge_norm)
    dist = model.gauge(p)
    ref = model.reference(p)
    ratio = dist / ref if ref > 0 else math.nan
    if args.format == "json":
        _emit(args, jsonio.dumps({"cc": dist, "gauge": ref, "ratio": ratio,
                                  "gauge_norm": args.gauge_norm}))
    else:
        _emit(args, f"cc = {_fmt(dist)}\ngauge = {_fmt(ref)}\nratio = {_fmt(ratio)}")
    return 0


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "classify": cmd_classify, "cc": cmd_cc}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_config(args)
        return COMMANDS[args.command](args)
    except (UsageError, jsonio.ParseError, ModelFieldError, FieldMismatchError,
            ShapeMismatchError, OSError) as exc:
        print(f"heismoeb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateInputError, SolverError, ZeroDivisionError, ArithmeticError) as exc:
        print(f"heismoeb: math error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
