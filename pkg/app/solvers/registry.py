"""
Name-to-solver registry shared by the CLI and the HTTP layer.
"""

import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from app.core.exceptions import DmdpError, SolverDisagreementError
from app.core.logging_config import setup_logging
from app.core.settings import settings
from app.dmdp.graph import CycleReport, Graph
from app.dmdp.scalar import Reward
from app.experiments.detection import find_in_history, find_in_policy
from app.solvers.baselines import karp_mean, oracle_enumerate
from app.solvers.history_walk import run_history_walk
from app.solvers.phased import CLASSIC, ZERO_RESET, augmented_vi, phased_policy_iteration
from app.solvers.value_iteration import ValueState, best_policy_cycle, run_vi

# Set up logging
logger = setup_logging(__name__)


@dataclass
class SolveResult:
    algorithm: str
    mean: Reward
    iterations: Optional[int] = None
    cycle: Optional[CycleReport] = None
    trace_csv: Optional[str] = None
    wall_time_ns: int = 0


Solver = Callable[[Graph, Optional[Sequence[Reward]], Optional[int]], SolveResult]


def _solve_vi(graph: Graph, init_values, max_iters) -> SolveResult:
    """Best policy cycle seen over n^2 + n iterations of value iteration."""
    best: List[Optional[CycleReport]] = [None]

    def remember_best(g: Graph, state: ValueState) -> bool:
        cycle = best_policy_cycle(g, state.chosen)
        if cycle is not None and (best[0] is None or g.field.gt(cycle.mean, best[0].mean)):
            best[0] = cycle
        return False

    max_t = max_iters or graph.n * graph.n + graph.n
    trace = run_vi(graph, init_values, max_t=max_t, stop=remember_best)
    return SolveResult("vi", best[0].mean, trace.iterations, best[0], trace.to_csv())


def _solve_history(graph: Graph, init_values, max_iters) -> SolveResult:
    result = run_history_walk(graph, init_values, debug=graph.n <= settings.ORACLE_MAX_N, trace=True)
    return SolveResult("history", result.mean, result.iterations, result.witness, result.to_csv())


def _solve_augmented(graph: Graph, init_values, max_iters) -> SolveResult:
    result = augmented_vi(graph, init_values)
    return SolveResult("augmented", result.mean, result.iterations, result.cycle, result.to_csv())


def _solve_pi(variant: str, name: str) -> Solver:
    def solve(graph: Graph, init_values, max_iters) -> SolveResult:
        result = phased_policy_iteration(graph, variant)
        return SolveResult(name, result.mean, result.iterations, result.cycle, result.to_csv())

    return solve


def _solve_karp(graph: Graph, init_values, max_iters) -> SolveResult:
    return SolveResult("karp", karp_mean(graph))


def _solve_oracle(graph: Graph, init_values, max_iters) -> SolveResult:
    result = oracle_enumerate(graph)
    return SolveResult("oracle", result.mean, None, result.cycle)


def _solve_find_in_policy(graph: Graph, init_values, max_iters) -> SolveResult:
    result = find_in_policy(graph, max_iterations=max_iters)
    return SolveResult("find-in-policy", result.mean, result.iterations, result.cycle)


def _solve_find_in_history(graph: Graph, init_values, max_iters) -> SolveResult:
    result = find_in_history(graph, max_iterations=max_iters)
    return SolveResult("find-in-history", result.mean, result.iterations)


SOLVERS: Dict[str, Solver] = {
    "vi": _solve_vi,
    "history": _solve_history,
    "augmented": _solve_augmented,
    "pi-classic": _solve_pi(CLASSIC, "pi-classic"),
    "pi-zero": _solve_pi(ZERO_RESET, "pi-zero"),
    "karp": _solve_karp,
    "oracle": _solve_oracle,
    "find-in-policy": _solve_find_in_policy,
    "find-in-history": _solve_find_in_history,
}


def solve(
    graph: Graph,
    algorithm: str,
    init_values: Optional[Sequence[Reward]] = None,
    max_iters: Optional[int] = None
) -> SolveResult:
    """
    Run one named solver and time it.

    Args:
        graph: The instance
        algorithm: A key of SOLVERS
        init_values: Initial values for the value-iteration based solvers
        max_iters: Iteration cap for the iterative detectors

    Returns:
        The solver's result with wall time filled in
    """
    solver = SOLVERS.get(algorithm)
    if solver is None:
        raise DmdpError(f"Unknown algorithm '{algorithm}' (expected one of {', '.join(SOLVERS)})")
    started = time.perf_counter_ns()
    result = solver(graph, init_values, max_iters)
    result.wall_time_ns = time.perf_counter_ns() - started
    logger.info(f"{algorithm}: mean {result.mean} in {result.wall_time_ns / 1e6:.2f} ms")
    return result


def cross_check(graph: Graph, reference: Optional[SolveResult] = None) -> List[SolveResult]:
    """
    Run every solver and require identical means.

    The oracle only runs within its size guard.

    Raises:
        SolverDisagreementError: two solvers disagree
    """
    names = [name for name in SOLVERS if name != "oracle" or graph.n <= settings.ORACLE_MAX_N]
    results = [reference] if reference is not None else []
    results += [solve(graph, name) for name in names if reference is None or name != reference.algorithm]
    baseline = results[0]
    for result in results[1:]:
        if not graph.field.eq(result.mean, baseline.mean):
            message = (
                f"{result.algorithm} returned {graph.field.format(result.mean)} but "
                f"{baseline.algorithm} returned {graph.field.format(baseline.mean)}"
            )
            logger.error(message)
            raise SolverDisagreementError(message)
    return results
