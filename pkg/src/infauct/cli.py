"""Command-line interface.

Exit codes: 0 on success, 2 on validation errors (bad flags, malformed
scenario files, size guards), 3 on LP solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import InputError, SolverFailureError
from .experiments import (
    best_partition,
    er_verify,
    garble_sweep,
    run_example1,
    run_example2,
)
from .market import load_scenario
from .mechanisms import mechanism_to_dict
from .optrev import optimal_revenue


def _parse_eps_range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"expected start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise InputError(f"expected numeric start:stop:step, got {text!r}") from None
    if step <= 0:
        raise InputError("step must be positive")
    values = []
    x = start
    while x <= stop + 1e-12:
        values.append(round(x, 12))
        x += step
    if not values:
        raise InputError(f"empty sweep range {text!r}")
    return values


def _cmd_lp_opt(args: argparse.Namespace) -> int:
    inst, scheme = load_scenario(args.scenario)
    result = optimal_revenue(inst, scheme)
    payload = {
        "revenue": result.revenue,
        "status": result.lp_status,
        "menu": mechanism_to_dict(result.menu),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    runner = run_example1 if args.example == 1 else run_example2
    report = runner(args.m, args.trials, args.seed)
    if args.out:
        report.write_csv(args.out)
    else:
        sys.stdout.write(report.csv_text())
    return 0


def _cmd_sweep_garble(args: argparse.Namespace) -> int:
    eps_values = _parse_eps_range(args.eps)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            garble_sweep(eps_values, out=fh)
    else:
        garble_sweep(eps_values, out=sys.stdout)
    return 0


def _cmd_best_partition(args: argparse.Namespace) -> int:
    inst, scheme = load_scenario(args.scenario)
    mech, revenue = best_partition(inst, scheme, args.trials, args.seed)
    payload = mechanism_to_dict(mech)
    payload["revenue"] = revenue
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_verify_er(args: argparse.Namespace) -> int:
    report = er_verify(args.n, args.trials, args.seed)
    for line in report.lines():
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infauct",
        description="Auction simulation with a third-party data provider",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lp-opt", help="optimal revenue of a scenario via the LP")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", help="write the result JSON here instead of stdout")
    p.set_defaults(func=_cmd_lp_opt)

    p = sub.add_parser("simulate", help="run a built-in example and emit CSV")
    p.add_argument("--example", type=int, choices=(1, 2), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep-garble", help="optimal revenue per garbling rate")
    p.add_argument("--eps", required=True, help="start:stop:step sweep over rates")
    p.add_argument("--seed", type=int, required=True,
                   help="accepted for interface uniformity; the LP path is exact")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_sweep_garble)

    p = sub.add_parser("best-partition", help="search all type partitions on a sample")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_best_partition)

    p = sub.add_parser("verify-er", help="empirical heavy-tail mean checks")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_verify_er)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
