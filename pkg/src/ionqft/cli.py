"""Command line entry point.

    ionqft run   --scenario fig3a --out results/fig3a
    ionqft run   --scenario custom --config my.cfg --out results/custom
    ionqft sweep --scenario fig3a --param g1 --values 0.1 0.15 --out results/g1

Exit codes: 0 success (cutoff-saturation warnings go to stderr), 2 usage or
configuration error, 3 output directory not writable. ``QFS_OUT_DIR`` is used
when ``--out`` is omitted.
"""
from __future__ import annotations

import argparse
import sys
import warnings

from .basis import InvalidConfigurationError
from .propagator import CutoffSaturationWarning, StepTooLargeError
from .scenarios import SCENARIOS, OutputDirectoryError, default_out_dir, run_scenario, sweep

EXIT_USAGE = 2
EXIT_UNWRITABLE = 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--scenario", required=True, choices=SCENARIOS, help="preset name, or custom with --config")
    p.add_argument("--config", help="key = value config file; required for custom, overrides the preset otherwise")
    p.add_argument("--section", help="section of --config to use when it holds several")
    p.add_argument("--out", help="output directory (default: $QFS_OUT_DIR)")
    p.add_argument("--seed", type=int, help="RNG seed for the emulated sideband readout")
    p.add_argument("--cutoff", type=int, help="Fock cutoff applied to every boson mode")
    p.add_argument("--order", type=int, help="Dyson order")
    p.add_argument("--nodes", type=int, help="Dyson quadrature nodes per period 2 pi / omega0")
    p.add_argument("--step", type=float, help="RK4 step in units of 1/omega0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ionqft", description="Trapped-ion fermion/antifermion/boson scattering simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario")
    _common(run)
    sw = sub.add_parser("sweep", help="run a scenario once per parameter value")
    _common(sw)
    sw.add_argument("--param", required=True, help="ScenarioConfig field to vary")
    sw.add_argument("--values", nargs="*", default=[], help="values; list fields take comma-separated items")
    sw.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]

    if args.scenario == "custom" and not args.config:
        sub.print_usage(sys.stderr)
        print("ionqft: error: --scenario custom requires --config", file=sys.stderr)
        return EXIT_USAGE
    out = default_out_dir(args.out)
    if out is None:
        sub.print_usage(sys.stderr)
        print("ionqft: error: give --out or set QFS_OUT_DIR", file=sys.stderr)
        return EXIT_USAGE

    overrides = dict(rng_seed=args.seed, cutoff=args.cutoff, dyson_order=args.order, dyson_nodes=args.nodes, integrator_step=args.step)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", CutoffSaturationWarning)
            if args.command == "run":
                result = run_scenario(args.scenario, args.config, out, section=args.section, **overrides)
                print(f"wrote {', '.join(str(f) for f in result.files)}")
            else:
                index = sweep(
                    args.param, args.values, args.scenario, args.config, out,
                    section=args.section, jobs=args.jobs, **overrides,
                )
                print(f"wrote {index}")
    except OutputDirectoryError as exc:
        print(f"ionqft: error: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    except (InvalidConfigurationError, StepTooLargeError) as exc:
        print(f"ionqft: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for w in caught:
        if issubclass(w.category, CutoffSaturationWarning):
            print(f"warning: {w.message}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
