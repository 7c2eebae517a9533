"""
Practical optimal-mean detection: value iteration with periodic verification.

Both detectors run plain value iteration for a short warm-up and then, every
``period`` iterations, propose a candidate mean and accept it only when the
Bellman-Ford check finds no cycle of higher mean. find-in-policy proposes the
best cycle of the visited policy; find-in-history proposes the best cyclic
super edge seen so far.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from app.core.exceptions import ConvergenceError
from app.core.logging_config import setup_logging
from app.dmdp.graph import CycleReport, Graph
from app.dmdp.scalar import Reward
from app.solvers.baselines import bf_positive_cycle
from app.solvers.history_walk import HistoryWalkSolver
from app.solvers.value_iteration import ValueState, best_policy_cycle, vi_step

# Set up logging
logger = setup_logging(__name__)


@dataclass
class DetectionResult:
    mean: Reward
    iterations: int
    checks: int
    cycle: Optional[CycleReport] = None


def default_schedule(n: int) -> int:
    """Warm-up length and test period: ceil(log2 n), at least 1."""
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def _resolve(
    graph: Graph,
    warmup: Optional[int],
    period: Optional[int],
    max_iterations: Optional[int]
) -> Tuple[int, int, int]:
    schedule = default_schedule(graph.n)
    warmup = schedule if warmup is None else max(0, warmup)
    period = schedule if period is None else max(1, period)
    if max_iterations is None:
        max_iterations = 4 * graph.n * graph.n + warmup + period
    return warmup, period, max_iterations


def _verified(graph: Graph, candidate: Reward) -> bool:
    return not bf_positive_cycle(graph, candidate)


def find_in_policy(
    graph: Graph,
    warmup: Optional[int] = None,
    period: Optional[int] = None,
    max_iterations: Optional[int] = None
) -> DetectionResult:
    """
    Detect the optimal mean from the cycles of the visited policy.

    Args:
        graph: The instance
        warmup: Iterations before the first check (default: ceil(log2 n))
        period: Iterations between checks (default: ceil(log2 n))
        max_iterations: Iteration cap (default: 4n^2 + warmup + period)

    Returns:
        The verified mean, the iteration it was accepted at, the number of
        Bellman-Ford checks and the policy cycle attaining it

    Raises:
        ConvergenceError: no candidate passed verification within the cap
    """
    warmup, period, max_iterations = _resolve(graph, warmup, period, max_iterations)
    state = ValueState.initial(graph)
    checks = 0
    while state.t < max_iterations:
        state = vi_step(graph, state)
        if state.t < warmup or (state.t - warmup) % period:
            continue
        cycle = best_policy_cycle(graph, state.chosen)
        checks += 1
        if cycle is not None and _verified(graph, cycle.mean):
            logger.debug(f"find-in-policy: mean {cycle.mean} verified at t={state.t}")
            return DetectionResult(cycle.mean, state.t, checks, cycle)

    logger.error(f"find-in-policy: no verified mean within {max_iterations} iterations")
    raise ConvergenceError(f"find-in-policy did not verify a mean within {max_iterations} iterations")


def find_in_history(
    graph: Graph,
    warmup: Optional[int] = None,
    period: Optional[int] = None,
    max_iterations: Optional[int] = None
) -> DetectionResult:
    """
    Detect the optimal mean from cyclic super edges.

    Super-edge tracking starts after the warm-up. When the warm-up is shorter
    than n, tracking restarts from scratch at iteration n so that a full
    history-walk schedule is always covered; the best mean found so far is
    kept across the restart.
    """
    warmup, period, max_iterations = _resolve(graph, warmup, period, max_iterations)
    n = graph.n
    solver = HistoryWalkSolver(graph)
    checks = 0
    while solver.state.t < max_iterations:
        if solver.state.t < warmup:
            solver.state = vi_step(graph, solver.state)
        else:
            if solver.state.t == n and warmup < n:
                solver.supers = [None] * n
            solver.phase_two_step()
        t = solver.state.t
        if t < warmup or (t - warmup) % period or solver.estimate is None:
            continue
        checks += 1
        if _verified(graph, solver.estimate.mean):
            logger.debug(f"find-in-history: mean {solver.estimate.mean} verified at t={t}")
            return DetectionResult(solver.estimate.mean, t, checks)

    logger.error(f"find-in-history: no verified mean within {max_iterations} iterations")
    raise ConvergenceError(f"find-in-history did not verify a mean within {max_iterations} iterations")
