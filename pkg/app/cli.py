"""
Command-line front-end: solve, gen, bench and verify.
"""

import argparse
import sys
from typing import List, Optional, Sequence, TextIO

from app.core.exceptions import DmdpError
from app.core.logging_config import setup_logging
from app.core.settings import settings
from app.dmdp.generators import gen_two_out_random, gen_uniform_random, gen_worst_case
from app.dmdp.graph import Graph, parse_edge_list, serialize
from app.dmdp.scalar import EXACT_MODE, FLOAT_MODE, RewardField, as_decimal, field_for_mode
from app.experiments.study import (
    FIND_IN_POLICY,
    STUDY_SOLVERS,
    fit_power_law,
    run_convergence_study,
    summarize_study,
    write_study_csv,
)
from app.solvers.baselines import bf_positive_cycle
from app.solvers.registry import SOLVERS, cross_check, solve

# Set up logging
logger = setup_logging(__name__)

BELOW_OPTIMUM = "positive cycle exists: candidate below optimum"
AT_LEAST_OPTIMUM = "no positive cycle: candidate is at least the optimum"


def _add_mode_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--exact", dest="mode", action="store_const", const=EXACT_MODE,
                       help="Exact rational arithmetic")
    group.add_argument("--float", dest="mode", action="store_const", const=FLOAT_MODE,
                       help=f"Float arithmetic with relative tolerance {settings.FLOAT_EPSILON}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmdp", description="Maximum mean cycle solvers for deterministic MDPs")
    subparsers = parser.add_subparsers(dest="command", required=True)

    solve_parser = subparsers.add_parser("solve", help="Compute the optimal mean of an instance")
    solve_parser.add_argument("--algo", required=True, choices=sorted(SOLVERS), help="Solver to run")
    solve_parser.add_argument("--input", required=True, help="Edge-list file ('-' for stdin)")
    solve_parser.add_argument("--cross-check", action="store_true", help="Run every solver and compare")
    solve_parser.add_argument("--max-iters", type=int, default=None, help="Iteration cap for iterative solvers")
    solve_parser.add_argument("--trace", default=None, help="Write the solver's trace CSV to this file")
    _add_mode_flags(solve_parser)

    gen_parser = subparsers.add_parser("gen", help="Generate an instance")
    gen_parser.add_argument("--model", required=True, choices=["two-out", "uniform", "worst-case"])
    gen_parser.add_argument("--n", type=int, default=None, help="Vertex count (two-out, uniform)")
    gen_parser.add_argument("--m", type=int, default=None, help="Edge count (uniform)")
    gen_parser.add_argument("--k", type=int, default=None, help="Family parameter (worst-case)")
    gen_parser.add_argument("--seed", type=int, default=0, help="Random seed")
    gen_parser.add_argument("--out", default=None, help="Output file (default: stdout)")
    _add_mode_flags(gen_parser)

    bench_parser = subparsers.add_parser("bench", help="Run the convergence study")
    bench_parser.add_argument("--sizes", required=True, help="Comma-separated ascending vertex counts")
    bench_parser.add_argument("--samples", type=int, required=True, help="Instances per size")
    bench_parser.add_argument("--seed", type=int, required=True, help="Study seed")
    bench_parser.add_argument("--out", required=True, help="CSV output file")
    bench_parser.add_argument("--workers", type=int, default=1, help="Process-pool size")
    bench_parser.add_argument("--solver", default=FIND_IN_POLICY, choices=STUDY_SOLVERS,
                              help=(
                                  "How mu* is obtained (default find-in-policy, faster at large n; "
                                  "find-in-history and history use the history walk; every answer is "
                                  "confirmed by Bellman-Ford)"
                              ))
    _add_mode_flags(bench_parser)

    verify_parser = subparsers.add_parser("verify", help="Test a candidate mean with Bellman-Ford")
    verify_parser.add_argument("--input", required=True, help="Edge-list file ('-' for stdin)")
    verify_parser.add_argument("--mu", required=True, help="Candidate mean, decimal or a/b")
    _add_mode_flags(verify_parser)

    return parser


def _load(path: str, field: RewardField):
    if path == "-":
        return parse_edge_list(sys.stdin.read(), field)
    with open(path, "r", encoding="utf-8") as handle:
        return parse_edge_list(handle.read(), field)


def _format_mean(field: RewardField, value) -> List[str]:
    return [f"mu* = {field.format(value)}", f"mu* (decimal) = {as_decimal(value)}"]


def _cmd_solve(args: argparse.Namespace, out: TextIO) -> int:
    field = field_for_mode(args.mode)
    graph, values = _load(args.input, field)
    init = values if any(v != field.zero for v in values) else None
    result = solve(graph, args.algo, init, args.max_iters)

    for line in _format_mean(field, result.mean):
        print(line, file=out)
    if result.cycle is not None:
        print(f"witness: {result.cycle.describe()}", file=out)
    if result.iterations is not None:
        print(f"iterations: {result.iterations}", file=out)
    print(f"wall time: {result.wall_time_ns / 1e6:.3f} ms", file=out)

    if args.trace:
        if result.trace_csv is None:
            logger.warning(f"{args.algo} produces no trace; {args.trace} not written")
        else:
            with open(args.trace, "w", encoding="utf-8") as handle:
                handle.write(result.trace_csv)

    if args.cross_check:
        checked = cross_check(graph, result)
        print(f"cross-check: {len(checked)} solvers agree", file=out)
    return 0


def _generate(args: argparse.Namespace, field: RewardField):
    if args.model == "worst-case":
        if args.k is None:
            raise DmdpError("gen --model worst-case needs --k")
        return gen_worst_case(args.k, field)
    if args.n is None:
        raise DmdpError(f"gen --model {args.model} needs --n")
    if args.model == "two-out":
        return gen_two_out_random(args.n, args.seed, field), None
    if args.m is None:
        raise DmdpError("gen --model uniform needs --m")
    return gen_uniform_random(args.n, args.m, args.seed, field), None


def _cmd_gen(args: argparse.Namespace, out: TextIO) -> int:
    field = field_for_mode(args.mode)
    graph, values = _generate(args, field)
    text = serialize(graph, values)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info(f"Wrote {graph} to {args.out}")
    else:
        out.write(text)
    return 0


def _parse_sizes(text: str) -> List[int]:
    try:
        return [int(token) for token in text.split(",") if token.strip()]
    except ValueError as e:
        raise DmdpError(f"Invalid --sizes '{text}': {e}") from e


def _cmd_bench(args: argparse.Namespace, out: TextIO) -> int:
    sizes = _parse_sizes(args.sizes)
    rows = run_convergence_study(
        sizes, args.samples, args.seed, mode=args.mode or FLOAT_MODE, solver=args.solver, workers=args.workers
    )
    with open(args.out, "w", encoding="utf-8") as handle:
        write_study_csv(rows, handle)

    summaries = summarize_study(rows)
    print("n,samples,mean_cycle_length,std_cycle_length,mean_first_formation,std_first_formation", file=out)
    for s in summaries:
        print(
            f"{s.n},{s.samples},{s.mean_cycle_length:.4f},{s.std_cycle_length:.4f},"
            f"{s.mean_first_formation:.4f},{s.std_first_formation:.4f}",
            file=out,
        )
    if len(summaries) >= 2:
        exponent = fit_power_law([s.n for s in summaries], [s.mean_first_formation for s in summaries])
        print(f"first-formation power-law exponent: {exponent:.4f}", file=out)
    return 0


def _cmd_verify(args: argparse.Namespace, out: TextIO) -> int:
    field = field_for_mode(args.mode)
    graph, _ = _load(args.input, field)
    mu = field.convert(args.mu)
    print(BELOW_OPTIMUM if bf_positive_cycle(graph, mu) else AT_LEAST_OPTIMUM, file=out)
    return 0


COMMANDS = {
    "solve": _cmd_solve,
    "gen": _cmd_gen,
    "bench": _cmd_bench,
    "verify": _cmd_verify,
}


def cli_dispatch(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    """
    Parse ``argv`` and run the selected command.

    Returns:
        0 on success, 1 on a solver or input error, 2 on a usage error
    """
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        return COMMANDS[args.command](args, out)
    except DmdpError as e:
        logger.debug(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch())
