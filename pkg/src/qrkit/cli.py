"""Command-line harness: ``qrkit {gen,run,sweep,pvalue,bounds}``.

Exit codes: 0 success (a Cholesky breakdown is a recorded result, not a
failure), 2 usage or I/O error, 3 unknown algorithm.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .algorithms import ALGORITHMS, ShiftStrategy
from .bench import (
    CSV_HEADER,
    SweepConfig,
    format_csv_row,
    format_summary,
    run_experiment,
    run_sweep,
    summarize,
)
from .errors import ParseError, UnknownAlgorithm
from .kernels import jacobi_svd
from .matrix import g_measure
from .metrics import bounds
from .testmat import MatrixSpec, realize, write_matrix_market

log = logging.getLogger("qrkit")

EXIT_OK, EXIT_USAGE, EXIT_UNKNOWN_ALGO = 0, 2, 3


class UsageError(Exception):
    pass


def _add_matrix_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=("svd", "hilbert", "arrowhead", "file"), default="svd")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--path", help="Matrix Market file for --kind file")
    p.add_argument("--ensemble", choices=("uniform", "normal"), default="uniform",
                   help="entry distribution of the random orthogonal factors (svd only)")


def _matrix_spec(args) -> MatrixSpec:
    if args.kind == "svd" and None not in (args.m, args.n) and args.m < args.n:
        raise UsageError("m must be ≥ n")
    try:
        return MatrixSpec(args.kind, m=args.m, n=args.n, kappa=args.kappa, seed=args.seed, path=args.path,
                          ensemble=args.ensemble)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


@contextlib.contextmanager
def _open_out(path: str | None, append: bool = False):
    if path is None:
        yield sys.stdout
        return
    with open(path, "a" if append else "w", encoding="utf-8", newline="") as fh:
        yield fh


def _write(fh, records, as_json: bool) -> None:
    if not as_json:
        fh.write(CSV_HEADER + "\n")
    for rec in records:
        fh.write(rec.as_json() + "\n" if as_json else format_csv_row(rec))


def cmd_gen(args) -> int:
    spec = _matrix_spec(args)
    if spec.kind == "file":
        raise UsageError("gen cannot generate from --kind file")
    X = realize(spec).X
    write_matrix_market(args.out, X, comments=[f"qrkit {__version__}: {spec.describe()}"])
    return EXIT_OK


def cmd_run(args) -> int:
    if args.algo not in ALGORITHMS:
        raise UnknownAlgorithm(f"unknown algorithm {args.algo!r}; expected one of {', '.join(ALGORITHMS)}")
    spec = _matrix_spec(args)
    rec = run_experiment(spec, args.algo, args.shift, trial_index=args.trial_index, repeats=args.repeats)
    if rec.status == "error":
        log.warning("%s", rec.message)
    new_file = args.out is None or not Path(args.out).exists() or Path(args.out).stat().st_size == 0
    with _open_out(args.out, append=True) as fh:
        if args.json:
            fh.write(rec.as_json() + "\n")
        else:
            if new_file:
                fh.write(CSV_HEADER + "\n")
            fh.write(format_csv_row(rec))
    return EXIT_OK


def _parse_values(text: str) -> list:
    vals = [v for v in (t.strip() for t in text.split(",")) if v]
    out = []
    for v in vals:
        try:
            f = float(v)
        except ValueError:
            raise UsageError(f"bad sweep value {v!r}") from None
        out.append(int(f) if f.is_integer() and "e" not in v.lower() else f)
    return out


def cmd_sweep(args) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    unknown = [a for a in algos if a not in ALGORITHMS]
    if unknown:
        raise UnknownAlgorithm(f"unknown algorithm {unknown[0]!r}")
    try:
        cfg = SweepConfig(
            vary=args.vary, values=_parse_values(args.values), algos=algos,
            m=args.m, n=args.n, kappa=args.kappa, trials=args.trials,
            base_seed=args.base_seed, kind=args.kind, strategy=args.shift,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    if args.out is None:
        records = run_sweep(cfg)
    else:
        with _open_out(args.out) as fh:
            _write(fh, [], args.json)

            def emit(rec):
                fh.write(rec.as_json() + "\n" if args.json else format_csv_row(rec))
                fh.flush()

            records = run_sweep(cfg, on_record=emit)
    # Rows were streamed in completion order; rewrite them in canonical order.
    with _open_out(args.out) as fh:
        _write(fh, records, args.json)
    print(format_summary(summarize(records, cfg.vary), cfg.vary), file=sys.stderr)
    return EXIT_OK


def cmd_pvalue(args) -> int:
    spec = _matrix_spec(args)
    X = realize(spec).X
    g = g_measure(X).value
    sigma1 = jacobi_svd(X).sigma_max
    n = X.shape[1]
    out = {
        "g_measure": g,
        "sigma1": sigma1,
        "p": g / sigma1,
        "p_lower": 1.0 / math.sqrt(n),
        "p_upper": 1.0,
    }
    print(json.dumps(out))
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        rep = bounds(args.m, args.n, args.kappa, args.p, args.t, args.sigma1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(json.dumps(rep.as_dict(), indent=2))
    return EXIT_OK


def _shift(text: str) -> ShiftStrategy:
    try:
        return ShiftStrategy.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qrkit {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a test matrix as Matrix Market")
    _add_matrix_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="factor one matrix and append a record")
    _add_matrix_flags(p)
    p.add_argument("--algo", required=True)
    p.add_argument("--shift", type=_shift, default=None, help="original|improved|none|fixed:<v> (scqr3 only)")
    p.add_argument("--repeats", type=int, default=None, help="time as median of this many runs (>= 3)")
    p.add_argument("--trial-index", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep kappa, m or n over several algorithms")
    p.add_argument("--vary", choices=("kappa", "m", "n"), required=True)
    p.add_argument("--values", required=True, help="comma-separated list")
    p.add_argument("--algos", default="iscqr3,scqr3,hhqr")
    p.add_argument("--kind", choices=("svd", "hilbert", "arrowhead"), default="svd")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--shift", type=_shift, default=None)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pvalue", help="print [X]_g, sigma1 and p for a matrix")
    _add_matrix_flags(p)
    p.set_defaults(func=cmd_pvalue)

    p = sub.add_parser("bounds", help="print every bound formula for given sizes")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--sigma1", type=float, default=1.0)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "repeats", None) is not None and args.repeats < 3:
        print("qrkit: error: --repeats must be >= 3", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UnknownAlgorithm as exc:
        print(f"qrkit: error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_ALGO
    except (UsageError, ParseError, OSError) as exc:
        print(f"qrkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
