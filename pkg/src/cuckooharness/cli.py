"""Command line interface: gen, check, place, oracle, bounds, experiment, census."""
import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from prettytable import PrettyTable

from src.cuckooharness.harness import ExperimentConfig, path_length_census, run_sweep, successive_ratios
from src.cuckooinference.bounds import BoundParams, bounds_table, capacity, empirical_edge_frequency
from src.cuckooinference.constants import BRUTE_FORCE_CAP, CAPACITY_RULES
from src.cuckooinference.core_model import Instance, Seed, emit_instance, parse_instance, sample_instance
from src.cuckooinference.inference_graph import NodeId, build_graph, find_basic_bad_path, is_bad_item, place_all
from src.cuckooinference.oracles import cross_validate

logger = logging.getLogger(__name__)

EXIT_INFEASIBLE = 1
EXIT_USAGE = 2


def _read_instance(source: str) -> Instance:
    text = sys.stdin.read() if source == "-" else Path(source).read_text(encoding="utf-8")
    return parse_instance(text)


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _gen(args: argparse.Namespace) -> int:
    m = args.m if args.m is not None else capacity(args.n, args.eps, args.d, args.capacity_rule)
    inst = sample_instance(args.n, m, args.d, Seed(args.seed), args.trial)
    _write(emit_instance(inst), args.out)

    return 0


def _check(args: argparse.Namespace) -> int:
    inst = _read_instance(args.instance)
    g = build_graph(inst)
    bad_items = [i for i in range(inst.n) if is_bad_item(g, i)]

    if not bad_items:
        print(f"feasible: n={inst.n} m={inst.m} d={inst.d}, no bad item")
        return 0

    print(f"infeasible: {len(bad_items)} bad item(s): {' '.join(map(str, bad_items))}")
    if args.explain:
        for item in bad_items:
            for side in (0, 1):
                report = find_basic_bad_path(g, NodeId(item, side))
                if report is not None:
                    print(report.describe())

    return EXIT_INFEASIBLE


def _place(args: argparse.Namespace) -> int:
    inst = _read_instance(args.instance)
    placement = place_all(inst)
    if placement is None:
        print("infeasible: no legal placement", file=sys.stderr)
        return EXIT_INFEASIBLE

    lines = []
    for item in range(inst.n):
        side = placement.side_of(item)
        lines.append(" ".join(map(str, (item, side, *inst.slots(item, side)))))
    _write("".join(f"{line}\n" for line in lines), args.out)

    return 0


def _oracle(args: argparse.Namespace) -> int:
    inst = _read_instance(args.instance)
    report = cross_validate(inst, cap=args.cap)

    for name, verdict in report.verdicts.items():
        print(f"{name}: {'feasible' if verdict else 'infeasible'}")

    if report.witness is not None:
        print(f"witness: {' '.join(map(str, report.witness.as_tuple()))}")

    print(report.describe())

    return 0 if report.agree else EXIT_INFEASIBLE


def _bounds(args: argparse.Namespace) -> int:
    n = args.n[0]
    epsilon = args.eps[0]
    d = args.d[0]
    m = args.m if args.m is not None else capacity(n, epsilon, d, args.capacity_rule)
    params = BoundParams(n, m, epsilon, d, args.capacity_rule)

    table = PrettyTable(["quantity", "value"])
    table.align["quantity"] = "l"
    table.add_row(["n, m, d, eps", f"{n}, {m}, {d}, {epsilon:g}"])
    for label, value in bounds_table(params):
        table.add_row([label, f"{value:.6g}"])

    if args.samples:
        frequency = empirical_edge_frequency(d, m, args.samples, Seed(args.seed))
        table.add_row([f"empirical edge frequency ({args.samples} samples)", f"{frequency:.6g}"])

    print(table)

    return 0


def _config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        "n_grid": args.n,
        "epsilon_grid": args.eps,
        "d_grid": args.d,
        "trials": args.trials,
        "seed": args.seed,
        "capacity_rule": args.capacity_rule,
        "workers": args.workers,
    }
    if args.preset is not None:
        return ExperimentConfig.from_preset(args.preset, **overrides)

    if args.n is None or args.eps is None:
        msg = "either --preset or both --n and --eps are required"
        raise ValueError(msg)

    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})  # type: ignore[arg-type]


def _experiment(args: argparse.Namespace) -> int:
    config = _config(args)
    if args.out is None:
        run_sweep(config, sys.stdout)
    else:
        run_sweep(config, args.out)

    return 0


def _census(args: argparse.Namespace) -> int:
    config = _config(args)
    for (n, m, d, epsilon), histogram in path_length_census(config).items():
        print(f"n={n} m={m} d={d} eps={epsilon:g}")
        if not histogram:
            print("  no failing trials")
            continue

        ratios = successive_ratios(histogram)
        for k, count in histogram.items():
            print(f"  k={k}: {count}  (next/this {ratios[k]:.3g})")

    return 0


def _add_single_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, required=True, help="number of items")
    parser.add_argument("--m", type=int, help="slots per table (default: capacity from --eps)")
    parser.add_argument("--d", type=int, default=1, help="slots per item per table")
    parser.add_argument("--eps", type=float, default=0.5, help="load slack")
    parser.add_argument("--capacity-rule", choices=CAPACITY_RULES, default="classic")


def _add_grid_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", help="named preset from default_presets.toml or user_presets.toml")
    parser.add_argument("--n", type=int, nargs="+", help="grid of item counts")
    parser.add_argument("--eps", type=float, nargs="+", help="grid of load slacks")
    parser.add_argument("--d", type=int, nargs="+", help="grid of dimensions")
    parser.add_argument("--trials", type=int, help="trials per cell")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--workers", type=int, help="processes per cell, 0 for one per CPU")
    parser.add_argument("--capacity-rule", choices=CAPACITY_RULES)
    parser.add_argument("--out", type=Path, help="CSV output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cuckoo", description="Cuckoo hashing placement via inference graphs")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="sample an instance")
    _add_single_params(gen)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--trial", type=int, default=0)
    gen.add_argument("--out", type=Path)
    gen.set_defaults(func=_gen)

    check = commands.add_parser("check", help="decide feasibility through bad items")
    check.add_argument("instance", nargs="?", default="-", help="instance file, - for stdin")
    check.add_argument("--explain", action="store_true", help="print a basic bad path for each bad node")
    check.set_defaults(func=_check)

    place = commands.add_parser("place", help="construct a legal placement")
    place.add_argument("instance", nargs="?", default="-")
    place.add_argument("--out", type=Path)
    place.set_defaults(func=_place)

    oracle = commands.add_parser("oracle", help="cross-validate against brute force and 2-SAT")
    oracle.add_argument("instance", nargs="?", default="-")
    oracle.add_argument("--cap", type=int, default=BRUTE_FORCE_CAP, help="largest n for brute force")
    oracle.set_defaults(func=_oracle)

    bounds = commands.add_parser("bounds", help="print the closed form bounds")
    bounds.add_argument("--n", type=int, nargs=1, required=True)
    bounds.add_argument("--eps", type=float, nargs=1, required=True)
    bounds.add_argument("--d", type=int, nargs=1, default=[1])
    bounds.add_argument("--m", type=int)
    bounds.add_argument("--capacity-rule", choices=CAPACITY_RULES, default="classic")
    bounds.add_argument("--samples", type=int, default=0, help="also estimate the edge probability")
    bounds.add_argument("--seed", type=int, default=0)
    bounds.set_defaults(func=_bounds)

    experiment = commands.add_parser("experiment", help="run a sweep and write CSV")
    _add_grid_params(experiment)
    experiment.set_defaults(func=_experiment)

    census = commands.add_parser("census", help="histogram of bad path lengths per cell")
    _add_grid_params(census)
    census.set_defaults(func=_census)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.verbose:
        logging.basicConfig(
            level=logging.DEBUG if args.verbose > 1 else logging.INFO,
            format="%(asctime)s - %(levelname)s - %(message)s",
        )

    try:
        return int(args.func(args))
    except (ValueError, TypeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
