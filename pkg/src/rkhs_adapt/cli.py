"""Command-line front-end.

Subcommands
-----------
``simulate``
    One integration run: writes ``trajectory.csv`` and ``estimate.csv``.
``sweep``
    Repeats the run over a basis-count list: writes ``sweep.csv``.
``condnum``
    Grammian conditioning table over a basis-count list: ``condnum.csv``.
``pe``
    Excitation lower bound over a time window: ``pe.csv``; the process
    exit status reports whether the bound exceeded the threshold.

Exit codes: 0 success; 1 excitation bound at or below threshold (``pe``
only); 2 invalid configuration or arguments; 3 numerical failure;
4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import harness
from .errors import (
    ConfigError,
    DuplicateCenters,
    KernelMismatch,
    NonFiniteDerivative,
    NotApplicable,
    NotHurwitz,
    NotPositiveDefinite,
    NotSymmetric,
    ParseError,
    TooFewPoints,
    UnstableIntegration,
    WindowOutOfRange,
)

_VALIDATION_ERRORS = (ConfigError, ParseError, TooFewPoints, DuplicateCenters,
                      KernelMismatch, NotSymmetric, WindowOutOfRange,
                      NotApplicable)
_NUMERICAL_ERRORS = (NotHurwitz, UnstableIntegration, NonFiniteDerivative,
                     NotPositiveDefinite)

EXIT_OK = 0
EXIT_BELOW_THRESHOLD = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkhs-adapt",
        description="Online adaptive estimation of road profiles in a "
                    "reproducing-kernel basis: simulation, sweep, "
                    "conditioning, and excitation reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate one run")
    sim.add_argument("--config", required=True,
                     help="config file path or preset name "
                          "(paper-sine, paper-splines, smoke)")
    sim.add_argument("--n", type=int, help="override basis count")
    sim.add_argument("--kernel", choices=("gaussian", "bspline1", "bspline2"),
                     help="override kernel family")
    sim.add_argument("--out", help="override output directory")
    sim.add_argument("--svg", action="store_true", help="also write SVG plots")
    sim.add_argument("--seed", type=int, help="override the config seed")

    swp = sub.add_parser("sweep", help="repeat the run over basis counts")
    swp.add_argument("--config", required=True)
    swp.add_argument("--n-list", required=True,
                     help="comma list, ellipsis allowed: 10,20,...,100")
    swp.add_argument("--out", help="override output directory")
    swp.add_argument("--svg", action="store_true")

    cnd = sub.add_parser("condnum", help="Grammian conditioning table")
    cnd.add_argument("--config", required=True)
    cnd.add_argument("--n-list", required=True)
    cnd.add_argument("--out", help="override output directory")
    cnd.add_argument("--svg", action="store_true")

    pe = sub.add_parser("pe", help="excitation lower bound over a window")
    pe.add_argument("--config", required=True)
    pe.add_argument("--t0", type=float, required=True,
                    help="window start time [s]")
    pe.add_argument("--delta", type=float, required=True,
                    help="window length [s]")
    pe.add_argument("--threshold", type=float, default=0.0,
                    help="bound the exit status reports against")
    return parser


def _load(args) -> harness.ExperimentConfig:
    config = harness.load_config(args.config)
    overrides = {}
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    if getattr(args, "n", None) is not None:
        overrides.update(n=args.n, centers_policy="uniform", centers_values=())
    if getattr(args, "kernel", None):
        overrides["kernel_kind"] = args.kernel
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _cmd_simulate(args) -> int:
    art = harness.run_simulate(_load(args), svg=args.svg)
    print(f"wrote {art.trajectory_csv}")
    print(f"wrote {art.estimate_csv}")
    if art.estimate_svg is not None:
        print(f"wrote {art.estimate_svg}")
    final_err = float(art.run.x_err_norm[-1])
    print(f"final state error {final_err!r}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    ns = harness.parse_n_list(args.n_list)
    art = harness.run_sweep(_load(args), ns, svg=args.svg)
    print(f"wrote {art.sweep_csv}")
    if art.sweep_svg is not None:
        print(f"wrote {art.sweep_svg}")
    slope, _ = art.result.slope_fit()
    print(f"log-log slope {slope!r}")
    return EXIT_OK


def _cmd_condnum(args) -> int:
    ns = harness.parse_n_list(args.n_list)
    art = harness.run_condnum(_load(args), ns, svg=args.svg)
    print(f"wrote {art.condnum_csv}")
    if art.condnum_svg is not None:
        print(f"wrote {art.condnum_svg}")
    return EXIT_OK


def _cmd_pe(args) -> int:
    report = harness.run_pe(_load(args), args.t0, args.delta,
                            threshold=args.threshold)
    print(f"wrote {report.pe_csv}")
    verdict = "exceeds" if report.exceeds else "does not exceed"
    print(f"excitation bound {report.gamma!r} {verdict} "
          f"threshold {report.threshold!r}")
    return EXIT_OK if report.exceeds else EXIT_BELOW_THRESHOLD


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "condnum": _cmd_condnum,
    "pe": _cmd_pe,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
