"""Command-line interface.

Exit codes: 0 success, 1 a verification failed, 2 invalid input,
3 numerical failure. Data goes to stdout (or ``--out``), diagnostics to
stderr.
"""
import argparse
import math
import os
import sys
import time

import numpy as np

from . import fileio
from .errors import InvalidInputError, NumericError
from .experiments import (
    DEFAULT_SEED,
    SweepConfig,
    band_scan_R,
    band_scan_lambda,
    chunk_plan,
    escre_max_sweep,
    ih_bound_check,
    iter_records,
    mems_slope_check,
    ppt_concurrence_check,
)
from .measures import QINF, RECORD_COLUMNS, measure_record
from .sampling import SeedSpec
from .states import bell_diagonal, ih_state, mems

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "MIXEDENT_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def parse_qset(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok in ("inf", "infinity", "oo"):
            out.append(QINF)
            continue
        try:
            q = float(tok)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad q value {tok!r}") from None
        if not q > 0:
            raise argparse.ArgumentTypeError(f"q must be positive, got {q}")
        out.append(q)
    if not out:
        raise argparse.ArgumentTypeError("empty q list")
    return tuple(out)


def parse_floats(text):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _resolve_seed(args):
    if args.seed is not None:
        return SeedSpec(args.seed, args.stream), "flag"
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return SeedSpec(int(env), args.stream), "env"
        except ValueError:
            raise InvalidInputError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return SeedSpec(DEFAULT_SEED, args.stream), "default"


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _manifest(args, config, seed=None, source=None):
    return fileio.RunManifest(
        command=args.command,
        config=config,
        seed={"master_seed": seed.master_seed, "stream_index": seed.stream_index} if seed else None,
        seed_source=source,
    )


# -- subcommands ---------------------------------------------------------------

def cmd_measure(args):
    if args.state:
        rho = fileio.load_density(args.state, args.tol)
        source = {"state": args.state}
    elif args.family == "mems":
        if args.x is None:
            raise InvalidInputError("--family mems needs --x")
        rho = mems(args.x)
        source = {"family": "mems", "x": args.x}
    elif args.family == "ih":
        if args.p is None:
            raise InvalidInputError("--family ih needs --p")
        rho = ih_state(args.p)
        source = {"family": "ih", "p": args.p}
    elif args.family == "bell-diag":
        if args.w is None:
            raise InvalidInputError("--family bell-diag needs --w")
        rho = bell_diagonal(args.w)
        source = {"family": "bell-diag", "w": args.w}
    else:
        raise InvalidInputError("give --family or --state")
    rec = measure_record(rho, args.q, base=args.base).as_dict()
    rec["cond_renyi_inf"] = rec["Sinf_AB"]
    manifest = _manifest(args, {**source, "q": args.q, "base": args.base, "tol": args.tol})
    _emit(fileio.dumps_json({"manifest": manifest.header(), "record": rec}), args.out)
    return manifest


def cmd_sample(args):
    seed, source = _resolve_seed(args)
    config = SweepConfig(samples=args.n, qset=args.q, seed=seed, ensemble=args.ensemble)
    manifest = _manifest(args, {"ensemble": args.ensemble, "n": args.n, "q": args.q,
                                "chunk_size": config.chunk_size}, seed, source)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.format == "csv":
            out.write(fileio.columns_to_csv({c: [] for c in RECORD_COLUMNS}, manifest, RECORD_COLUMNS))
            for cols in iter_records(config):
                out.write(fileio.records_csv_rows(cols))
        else:
            records = []
            for cols in iter_records(config):
                records.extend(fileio.records_to_dicts(cols))
            out.write(fileio.dumps_json({"manifest": manifest.header(), "records": records}))
    finally:
        if args.out:
            out.close()
    return manifest


def _write_series(args, series, manifest, extra=None):
    if args.format == "csv":
        _emit(fileio.columns_to_csv(series.columns(), manifest), args.out)
    else:
        payload = {"manifest": manifest.header(), "series": series.columns(), "meta": series.meta}
        if extra:
            payload.update(extra)
        _emit(fileio.dumps_json(payload), args.out)


def cmd_sweep_escre(args):
    seed, source = _resolve_seed(args)
    if QINF not in args.q:
        raise InvalidInputError("the ESCRE classifier needs q = inf in --q")
    config = SweepConfig(samples=args.n, bins=args.bins, interval=(args.r_min, args.r_max),
                         qset=args.q, seed=seed, ensemble="zhsl", workers=args.workers,
                         min_count=args.min_count)
    series = escre_max_sweep(config)
    cfg = config.as_dict()
    cfg.pop("workers")
    manifest = _manifest(args, cfg, seed, source)
    _write_series(args, series, manifest,
                  {"summary": {"argmax_center": series.argmax_center(),
                               "peak_max_C": float(np.nanmax(series.max_C))
                               if np.any(series.counts) else None}})
    return manifest


def cmd_band(args):
    seed, source = _resolve_seed(args)
    if args.by == "r":
        interval = (args.min if args.min is not None else 1.0,
                    args.max if args.max is not None else 1.8)
    else:
        interval = (args.min if args.min is not None else 0.25,
                    args.max if args.max is not None else 1.0)
    config = SweepConfig(samples=args.n, bins=args.bins, interval=interval, seed=seed,
                         ensemble=args.ensemble, workers=args.workers)
    cfg = config.as_dict()
    cfg.pop("workers")
    cfg["by"] = args.by
    manifest = _manifest(args, cfg, seed, source)
    if args.by == "r":
        _write_series(args, band_scan_R(config), manifest)
    else:
        series, report = band_scan_lambda(config)
        series.meta["report"] = report
        _write_series(args, series, manifest)
    return manifest


CHECKS = ("eq7", "eq8", "contours", "ppt-vs-concurrence")
CHECK_ALIASES = {"ih-floor": "eq7", "mems-slope": "eq8"}


def cmd_verify(args):
    check = CHECK_ALIASES.get(args.check, args.check)
    seed, source = _resolve_seed(args)
    if check == "eq7":
        n = args.n or 10**5
        report = ih_bound_check(np.linspace(1.0, 2.95, 40), n, seed)
        cfg = {"check": check, "n": n}
    elif check == "eq8":
        q = args.slope_q
        report = mems_slope_check(q)
        if report["matched"] == "direct":
            report["note"] = ("measured slope matches -q/((q-1) ln 2), half the "
                              "doubled prefactor")
        cfg = {"check": check, "q": q}
        seed = source = None
    elif check == "contours":
        n = args.n or 10**5
        config = SweepConfig(samples=n, bins=30, interval=(0.25, 1.0), seed=seed,
                             ensemble="ih", workers=args.workers)
        _, report = band_scan_lambda(config)
        cfg = {"check": check, "n": n}
    else:
        n = args.n or 10**4
        config = SweepConfig(samples=n, seed=seed, ensemble="zhsl", workers=args.workers)
        report = ppt_concurrence_check(config)
        cfg = {"check": check, "n": n}
    manifest = _manifest(args, cfg, seed, source)
    _emit(fileio.dumps_json({"manifest": manifest.header(), "report": report}), args.out)
    print(f"verify {check}: {'PASS' if report['passed'] else 'FAIL'}", file=sys.stderr)
    manifest.passed = report["passed"]
    return manifest


# -- parser ----------------------------------------------------------------

def _seed_flags(p):
    p.add_argument("--seed", type=int, default=None,
                   help=f"master seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--stream", type=int, default=0, help="stream index under the master seed")


def build_parser():
    parser = _Parser(prog="mixedent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measure", help="all measures of one state")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", choices=("mems", "ih", "bell-diag"))
    src.add_argument("--state", help="density-matrix JSON file")
    p.add_argument("--x", type=float, help="MEMS parameter")
    p.add_argument("--p", type=parse_floats, help="IH spectrum p1,p2,p3,p4 (descending)")
    p.add_argument("--w", type=parse_floats, help="Bell weights phi+,phi-,psi+,psi-")
    p.add_argument("--q", type=parse_qset, default=(QINF,), help="q list, e.g. 0.5,2,inf")
    p.add_argument("--base", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-9, help="validation tolerance for --state")
    p.add_argument("--out")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sample", help="stream measure records of random states")
    p.add_argument("--ensemble", choices=("zhsl", "ih"), default="zhsl")
    p.add_argument("--n", type=int, required=True)
    _seed_flags(p)
    p.add_argument("--q", type=parse_qset, default=(QINF,))
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("sweep-escre", help="max concurrence of ESCRE states per R bin")
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--r-min", type=float, default=1.0)
    p.add_argument("--r-max", type=float, default=3.0)
    p.add_argument("--q", type=parse_qset, default=(QINF,))
    p.add_argument("--min-count", type=int, default=10)
    _seed_flags(p)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_escre)

    p = sub.add_parser("band", help="concurrence band versus R or lambda_max")
    p.add_argument("--by", choices=("r", "lambda"), required=True)
    p.add_argument("--ensemble", choices=("ih", "zhsl"), default="ih")
    p.add_argument("--n", type=int, default=10**4)
    p.add_argument("--bins", type=int, default=32)
    p.add_argument("--min", type=float, default=None, help="lower end of the binning range")
    p.add_argument("--max", type=float, default=None, help="upper end of the binning range")
    _seed_flags(p)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_band)

    p = sub.add_parser("verify", help="run an analytic check; exit 1 on failure")
    p.add_argument("--check", choices=CHECKS + tuple(CHECK_ALIASES), required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--slope-q", type=float, default=3.0, help="q for the MEMS slope check")
    _seed_flags(p)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv=None):
    """Entry point returning the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        manifest = args.func(args)
    except InvalidInputError as exc:
        print(f"mixedent: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"mixedent: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"mixedent: {exc}", file=sys.stderr)
        return EXIT_INPUT
    manifest.wall_time_s = time.perf_counter() - t0
    print(f"mixedent {args.command}: wall time {manifest.wall_time_s:.3f} s "
          f"(backend {manifest.backend})", file=sys.stderr)
    if getattr(manifest, "passed", True) is False:
        return EXIT_FAIL
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
