"""Command-line front end: ``tmwkb {tc,error,nsweep}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (any
energy that could not be evaluated, or a failure outside the sweep).
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from typing import Sequence

from .errors import ConfigError, TunnelingError
from .experiments import (
    AVERAGES,
    HEADLINE_RATIOS,
    METHODS,
    NUMERICAL_METHODS,
    SweepConfig,
    error_json,
    run_error_analysis,
    run_n_sweep,
    run_tc_sweep,
    tc_json,
    write_error_csv,
    write_tc_csv,
)
from .potentials import Potential, load_table, make_parabolic, make_sech2

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
DEFAULT_ERROR_METHODS = "tm-pw,tm-wkb1,tm-wkb3,de-pw,de-wkb"


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("potential")
    g.add_argument("--potential", default="parabolic", help="parabolic, sech2 or table:<path> (default parabolic)")
    g.add_argument("--alpha", type=float, default=1.0, help="parabola coefficient in J/m^2 (default 1)")
    g.add_argument("--v0", type=float, default=1e-18, help="sech2 depth in J (default 1e-18)")
    g.add_argument("--width", type=float, default=1e-9, help="sech2 length scale x0 in m (default 1e-9)")
    g.add_argument("--xmin", type=float, default=-2e-9, help="domain start in m (ignored for tables)")
    g.add_argument("--xmax", type=float, default=2e-9, help="domain end in m (ignored for tables)")
    g = p.add_argument_group("sweep")
    g.add_argument("--emin", type=float, default=-2e-19, help="lowest energy in J")
    g.add_argument("--emax", type=float, default=2e-19, help="highest energy in J")
    g.add_argument("--epoints", type=int, default=101, help="number of energies, endpoints included")
    g.add_argument("--nsteps", type=int, default=100_000, help="transfer-matrix segments")
    g.add_argument("--de-steps", type=int, default=200_000, help="integrator steps for de-* methods")
    g.add_argument("--workers", type=int, default=1, help="worker processes across energies")
    g = p.add_argument_group("output")
    g.add_argument("--out", help="output file (default stdout)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress and failures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmwkb", description="1-D transmission coefficients with WKB open boundaries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tc", help="transmission coefficient over an energy grid")
    _common(p)
    p.add_argument("--method", choices=METHODS, default="tm-wkb1")

    p = sub.add_parser("error", help="relative error against the exact reference")
    _common(p)
    p.add_argument("--method", default=DEFAULT_ERROR_METHODS, help="comma-separated methods")
    p.add_argument("--average", choices=AVERAGES, default="mean", help="energy average (default mean)")

    p = sub.add_parser("nsweep", help="error versus step count")
    _common(p)
    p.add_argument("--method", choices=NUMERICAL_METHODS, default="tm-wkb1")
    p.add_argument("--nlist", default="1000,5000,10000,50000,100000", help="comma-separated ascending step counts")
    p.add_argument("--average", choices=AVERAGES, default="mean")
    p.add_argument("--no-de", action="store_true", help="omit the de-wkb reference rows")
    return parser


def build_potential(args: argparse.Namespace) -> Potential:
    choice = args.potential
    domain = (args.xmin, args.xmax)
    if choice == "parabolic":
        return make_parabolic(args.alpha, domain)
    if choice == "sech2":
        return make_sech2(args.v0, args.width, domain)
    if choice.startswith("table:"):
        try:
            return load_table(choice[len("table:"):])
        except OSError as exc:
            raise ConfigError(f"cannot read potential table: {exc}") from None
    raise ConfigError(f"unknown potential {choice!r}; use parabolic, sech2 or table:<path>")


def _config(args: argparse.Namespace, potential: Potential, method: str) -> SweepConfig:
    return SweepConfig(
        potential=potential,
        method=method,
        n_steps=args.nsteps,
        e_min=args.emin,
        e_max=args.emax,
        e_points=args.epoints,
        de_steps=args.de_steps,
        out=args.out,
    )


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


@contextlib.contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None
    with fh:
        yield fh


def _print_summary(summary: dict, stream) -> None:
    print(f"energy-averaged relative error ({summary['average']}):", file=stream)
    for method, value in summary["averages"].items():
        print(f"  {method:12s} {value:.6e}", file=stream)
    for a, b in HEADLINE_RATIOS:
        key = f"{a}/{b}"
        if key in summary["ratios"]:
            print(f"  ratio {key:16s} {summary['ratios'][key]:.4g}", file=stream)


def _run(args: argparse.Namespace) -> int:
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    potential = build_potential(args)
    summary_stream = sys.stderr if args.out is None else sys.stdout

    if args.command == "tc":
        results = run_tc_sweep(_config(args, potential, args.method), workers=args.workers)
        failed = sum(not r.ok for r in results)
        with _output(args.out) as fh:
            if args.format == "json":
                fh.write(tc_json(results))
            else:
                write_tc_csv(results, fh)
    elif args.command == "error":
        methods = [m.strip() for m in args.method.split(",") if m.strip()]
        configs = [_config(args, potential, m) for m in methods]
        report = run_error_analysis(configs, average=args.average, workers=args.workers)
        failed = sum(bool(r.error) for r in report.rows)
        with _output(args.out) as fh:
            if args.format == "json":
                fh.write(error_json(report.rows, report.summary()))
            else:
                write_error_csv(report.rows, fh)
        _print_summary(report.summary(), summary_stream)
    else:
        rows, averaged = run_n_sweep(
            _config(args, potential, args.method),
            _int_list(args.nlist),
            include_de=not args.no_de,
            average=args.average,
            workers=args.workers,
        )
        failed = sum(bool(r.error) for r in rows)
        summary = {"average": args.average, "averages": {f"{m}@{n}": v for (m, n), v in averaged.items()}, "ratios": {}}
        with _output(args.out) as fh:
            if args.format == "json":
                fh.write(error_json(rows, summary))
            else:
                write_error_csv(rows, fh)
        _print_summary(summary, summary_stream)

    if failed:
        print(f"tmwkb: {failed} energies failed (tc = nan in the output)", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"tmwkb: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TunnelingError as exc:
        print(f"tmwkb: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
