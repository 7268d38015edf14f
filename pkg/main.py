# Main entry point for the locstab verification workbench

import argparse
import logging
import os
import sys

# Add the project root to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from models.fixtures import list_fixtures
from src.scans import (
    fitted_lengths,
    gibbs_scan,
    lindblad_scan,
    parse_range,
    plot_data,
    stability_scan,
    write_scan,
)
from src.verification import SUITE_NAMES, SuiteSizes, VerificationHarness
from utils.config import apply_settings, load_settings
from utils.exceptions import LocstabError

logger = logging.getLogger("locstab")

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="run seed")
    common.add_argument("--tol", type=float, default=None, help="Markov certification tolerance")
    common.add_argument("--out", dest="out_dir", default=None, help="output directory")
    common.add_argument("--cap-dim", dest="cap_dim", type=int, default=None, help="Hilbert dimension cap")
    common.add_argument("--threads", type=int, default=None, help="worker threads for suites")
    common.add_argument("--config", default=None, help="key=value configuration file")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="locstab", description="Locality and stability numerics workbench")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", parents=[common], help="run a verification suite")
    verify.add_argument("suite", help=f"one of {', '.join(SUITE_NAMES)}, all")
    verify.add_argument("--quick", action="store_true", help="reduced sample counts")

    scan = commands.add_parser("scan", parents=[common], help="decay scans written as CSV")
    scan.add_argument("kind", choices=["gibbs", "stability", "lindblad"])
    scan.add_argument("--beta", default=None, help="value, list or start:stop:step")
    scan.add_argument("--n", type=int, default=None, help="chain length")
    scan.add_argument("--model", default=None, choices=["ising", "tfim"])
    scan.add_argument("--radii", default="2:4:1", help="buffer radii for stability scans")
    scan.add_argument("--times", default="0:4:0.5", help="times for lindblad scans")

    commands.add_parser("fixtures", parents=[common], help="list the fixture registry")

    plot = commands.add_parser("plot", parents=[common], help="gnuplot-ready data from a scan CSV")
    plot.add_argument("csv")
    plot.add_argument("output")
    return parser


def run_verify(args, settings) -> int:
    harness = VerificationHarness(settings, SuiteSizes.quick() if args.quick else SuiteSizes())
    result = harness.run_and_write(args.suite)

    print(f"\nSuite {result.suite} (seed {result.seed})")
    print("=" * 72)
    for check in result.checks:
        print(f"  {'PASS' if check.passed else 'FAIL'}  {check.id:<50} {check.measured:.6g}")
    print("=" * 72)
    print(f"  {len(result.checks) - len(result.failures)}/{len(result.checks)} passed, "
          f"results in {os.path.join(settings.out_dir, 'results.json')}")
    return EXIT_PASS if result.passed else EXIT_FAIL


def run_scan(args, settings) -> int:
    if args.kind == "gibbs":
        betas = parse_range(args.beta or "0.1:2.0:0.1")
        model = args.model or "ising"
        table = gibbs_scan(betas, n=args.n or 8, model=model, seed=settings.seed)
        path = write_scan(table, os.path.join(settings.out_dir, f"gibbs_{model}.csv"))
        lengths = fitted_lengths(table)
        write_scan(lengths, os.path.join(settings.out_dir, f"gibbs_{model}_lengths.csv"))
        for row in lengths.itertuples(index=False):
            print(f"  beta={row.beta:<6g} eta={row.eta:.4f} zeta={row.zeta:.4f}")
    elif args.kind == "stability":
        beta = parse_range(args.beta or "0.3")[0]
        model = args.model or "tfim"
        table = stability_scan([int(r) for r in parse_range(args.radii)], n=args.n or 6,
                               beta=beta, model=model, seed=settings.seed)
        path = write_scan(table, os.path.join(settings.out_dir, f"stability_{model}.csv"))
    else:
        beta = parse_range(args.beta or "1.0")[0]
        model = args.model or "ising"
        table = lindblad_scan(parse_range(args.times), n=args.n or 3, beta=beta, model=model)
        path = write_scan(table, os.path.join(settings.out_dir, f"lindblad_{model}.csv"))
    print(f"  {len(table)} rows written to {path}")
    return EXIT_PASS


def run_fixtures() -> int:
    for spec in list_fixtures():
        params = ", ".join(f"{k}={v}" for k, v in spec.parameters.items())
        print(f"  {spec.name:<28} {spec.provenance:<18} {spec.description} ({params})")
    return EXIT_PASS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        settings = load_settings(args.config, {
            "seed": args.seed, "tol": args.tol, "out_dir": args.out_dir,
            "cap_dim": args.cap_dim, "threads": args.threads,
        })
        apply_settings(settings)
        if args.command == "verify":
            return run_verify(args, settings)
        if args.command == "scan":
            return run_scan(args, settings)
        if args.command == "plot":
            print(f"  wrote {plot_data(args.csv, args.output)}")
            return EXIT_PASS
        return run_fixtures()
    except LocstabError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
