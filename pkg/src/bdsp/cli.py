"""Command line: generate, solve, verify, gap."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .bp import BpConfig
from .generate import GeneratorConfig, generate_instance
from .integration import VARIANTS
from .io import FormatError, dumps_instance, read_instance, read_solution, verify
from .lns import OPERATORS, LnsConfig
from .model import InstanceError, evaluate_shift, gap
from .rcspp import PricingConfig
from .runner import RunConfig, solve, write_outputs

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_CORRUPT = 0, 1, 2, 3


def _operators(text: str) -> tuple[str, ...]:
    ops = tuple(o.strip().upper() for o in text.split(",") if o.strip())
    bad = [o for o in ops if o not in OPERATORS]
    if bad or not ops:
        raise argparse.ArgumentTypeError(f"operators must be a comma list of {', '.join(OPERATORS)}")
    return ops


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bdsp", description="Bus driver scheduling: branch-and-price and LNS.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded synthetic instance")
    g.add_argument("--tours", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--positions", type=int, default=GeneratorConfig.positions)
    g.add_argument("-o", "--output", help="instance file (default: stdout)")

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("instance")
    s.add_argument("--algorithm", default="lns", choices=list(VARIANTS))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--budget", type=float, default=60.0, help="total seconds")
    s.add_argument("--out", default="run", help="output directory")
    s.add_argument("--backend", default="highs", choices=["highs", "simplex", "exact"])
    s.add_argument("--deterministic", action="store_true", help="work-unit clock and synchronous background cycles")
    s.add_argument("--bks", type=float, help="best-known objective for the gap")
    s.add_argument("--k0", type=int, default=LnsConfig.k0)
    s.add_argument("--k-max", type=int, default=LnsConfig.k_max)
    s.add_argument("--n-max", type=int, default=LnsConfig.n_max)
    s.add_argument("--operators", type=_operators, default=LnsConfig.operators)
    s.add_argument("--adaptive", action="store_true")
    s.add_argument("--lam", type=float, default=LnsConfig.lam)
    s.add_argument("--repair", choices=["cg", "bp"], default="cg")
    s.add_argument("--repair-budget", type=float, default=LnsConfig.repair_budget)
    s.add_argument("--integer-timeout", type=float, default=BpConfig.integer_timeout)
    s.add_argument("--background-timeout", type=float, default=60.0)
    s.add_argument("--max-store-columns", type=int)
    s.add_argument("--no-throttle", action="store_true")

    v = sub.add_parser("verify", help="check a solution file against an instance")
    v.add_argument("instance")
    v.add_argument("solution")

    q = sub.add_parser("gap", help="relative gap in percent to a best-known objective")
    q.add_argument("objective", help="objective value or a summary.json")
    q.add_argument("--bks", type=float, required=True)
    return p


def _cmd_generate(args) -> int:
    inst = generate_instance(args.tours, args.seed, GeneratorConfig(positions=args.positions))
    text = dumps_instance(inst)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        print(f"wrote {args.output}: {inst.n_legs} legs, {args.tours} tours, seed={args.seed}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    for leg in inst.legs:
        ev = evaluate_shift([leg], inst)
        if not ev.feasible:
            print(f"error: leg {leg.id} cannot form a shift on its own ({ev.reason})", file=sys.stderr)
            return EXIT_CORRUPT
    pricing = PricingConfig(throttle=not args.no_throttle)
    bp = BpConfig(pricing=pricing, backend=args.backend, integer_timeout=args.integer_timeout,
                  final_integer_timeout=args.integer_timeout)
    lns = LnsConfig(k0=args.k0, k_max=args.k_max, n_max=args.n_max, operators=args.operators, adaptive=args.adaptive,
                    lam=args.lam, repair=args.repair, repair_budget=args.repair_budget)
    cfg = RunConfig(args.algorithm, args.seed, args.budget, lns, bp, args.background_timeout, args.deterministic,
                    args.max_store_columns, args.bks)
    print(f"seed={args.seed} algorithm={args.algorithm} budget={args.budget}s", file=sys.stderr)
    result = solve(inst, cfg)
    paths = write_outputs(result, inst, args.out)
    print(json.dumps(result.summary, indent=1, default=str))
    print(f"outputs: {', '.join(str(p) for p in paths.values())}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    inst = read_instance(args.instance)
    sol = read_solution(args.solution)
    report = verify(inst, sol.shifts, sol.objective)
    print(report)
    return EXIT_OK if report.ok else EXIT_FAIL


def _cmd_gap(args) -> int:
    try:
        z = float(args.objective)
    except ValueError:
        with open(args.objective) as fh:
            z = float(json.load(fh)["objective"])
    print(f"{gap(z, args.bks):.4f}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"generate": _cmd_generate, "solve": _cmd_solve, "verify": _cmd_verify, "gap": _cmd_gap}
    try:
        return handlers[args.command](args)
    except FormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
