"""
Phased solvers: augmented value iteration and the phased policy-iteration
family (classic and zero-reset).

A phase starts from the mean of the most recently discovered cycle, adjusts
rewards, edge choices and values, then runs value iteration until a cycle of
higher mean appears or n iterations pass without one.
"""

import csv
import io
from collections import deque
from dataclasses import dataclass, field as dataclass_field
from typing import List, Optional, Sequence, Tuple

from app.core.exceptions import DmdpError, UnreachableCycleError
from app.core.logging_config import setup_logging
from app.dmdp.graph import CycleReport, Graph, has_cycle, induced_subgraph, mean_zero_parallel, scc_decompose
from app.dmdp.scalar import Reward
from app.solvers.value_iteration import Policy, best_policy_cycle, select_edge

# Set up logging
logger = setup_logging(__name__)

SELF_ARC = "self-arc"
SUBTRACT = "subtract"
CLASSIC = "classic"
ZERO_RESET = "zero-reset"


@dataclass
class PhaseRecord:
    phase: int
    mean: Reward
    cycle_length: int
    iterations: int


@dataclass
class PhasedResult:
    """Optimal mean, the discovered phases and (for policy iteration) the final policy."""

    mean: Reward
    cycle: CycleReport
    phases: List[PhaseRecord]
    iterations: int
    policy: Optional[Policy] = None
    value_trajectories: List[List[List[Reward]]] = dataclass_field(default_factory=list)
    choice_trace: List[Policy] = dataclass_field(default_factory=list)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["phase", "cycle_mean", "cycle_length", "vi_iterations"])
        for record in self.phases:
            writer.writerow([record.phase, float(record.mean), record.cycle_length, record.iterations])
        return buffer.getvalue()


def _augmented_step(
    graph: Graph,
    values: Sequence[Reward],
    chosen: Policy,
    self_arc_reward: Optional[Reward]
) -> Tuple[List[Reward], Policy]:
    """
    One synchronous iteration where every vertex may also take a self arc.

    The self arc has index ``len(out_edges)`` so real edges win exact ties
    against it unless the lazy rule keeps it.
    """
    field = graph.field
    new_values, new_chosen = [], []
    for u in range(graph.n):
        degree = len(graph.out_edges(u))
        previous = chosen[u] if chosen[u] is not None and chosen[u] < degree else None
        index, best = select_edge(graph, u, values, previous)
        if self_arc_reward is not None:
            stay = self_arc_reward + values[u]
            if field.gt(stay, best) or (chosen[u] == degree and field.eq(stay, best)):
                index, best = degree, stay
        new_values.append(best)
        new_chosen.append(index)
    return new_values, new_chosen


def _real_edges(graph: Graph, chosen: Policy) -> Policy:
    """Policy with self-arc choices masked out."""
    return [c if c is not None and c < len(graph.out_edges(u)) else None for u, c in enumerate(chosen)]


def augmented_vi(
    graph: Graph,
    init_values: Optional[Sequence[Reward]] = None,
    formulation: str = SUBTRACT,
    record_choices: bool = False
) -> PhasedResult:
    """
    Value iteration with self arcs carrying the best cycle mean found so far.

    After every iteration the policy cycles are inspected; a cycle whose mean
    beats the current mean starts a new phase. Values are never reset. The
    run ends once n iterations pass without a new cycle.

    Args:
        graph: The instance
        init_values: Initial values (default: zeros)
        formulation: "self-arc" (self arcs of reward mu) or "subtract"
            (rewards minus mu, zero-reward self arcs)
        record_choices: Keep every visited policy in the result

    Returns:
        The optimal mean with per-phase records
    """
    if formulation not in (SELF_ARC, SUBTRACT):
        raise DmdpError(f"Unknown augmented formulation '{formulation}'")
    field = graph.field
    n = graph.n
    values = [field.zero] * n if init_values is None else [field.convert(x) for x in init_values]
    chosen: Policy = [None] * n
    mu: Optional[Reward] = None
    best_cycle: Optional[CycleReport] = None
    working = graph
    phases: List[PhaseRecord] = []
    choice_trace: List[Policy] = []
    t = idle = phase_start = 0

    while idle < n:
        if mu is None:
            arc = None
        else:
            arc = mu if formulation == SELF_ARC else field.zero
        values, chosen = _augmented_step(working, values, chosen, arc)
        t += 1
        if record_choices:
            choice_trace.append(list(chosen))
        cycle = best_policy_cycle(graph, _real_edges(graph, chosen))
        if cycle is not None and (mu is None or field.gt(cycle.mean, mu)):
            mu, best_cycle = cycle.mean, cycle
            phases.append(PhaseRecord(len(phases) + 1, mu, cycle.length, t - phase_start))
            logger.debug(f"Augmented VI phase {len(phases)}: mean {mu} at t={t}")
            phase_start, idle = t, 0
            if formulation == SUBTRACT:
                working = mean_zero_parallel(graph, mu)
        else:
            idle += 1

    assert mu is not None and best_cycle is not None
    logger.info(f"Augmented VI: mean {mu} after {t} iterations, {len(phases)} phases")
    return PhasedResult(mu, best_cycle, phases, t, choice_trace=choice_trace)


def _attach_to_cycle(graph: Graph, cycle: CycleReport) -> Policy:
    """Reverse breadth-first search from the cycle; unreachable vertices stay None."""
    incoming: List[List[Tuple[int, int]]] = [[] for _ in range(graph.n)]
    for u, i, v, _ in graph.edges():
        incoming[v].append((u, i))

    policy: Policy = [None] * graph.n
    for vertex, index in zip(cycle.vertices, cycle.edges):
        policy[vertex] = index
    queue = deque(sorted(cycle.vertices))
    while queue:
        w = queue.popleft()
        for u, i in incoming[w]:
            if policy[u] is None:
                policy[u] = i
                queue.append(u)
    return policy


def redirect_to_cycle(
    graph: Graph,
    cycle: CycleReport,
    anchor: Optional[int] = None
) -> Tuple[Policy, List[Reward]]:
    """
    Policy whose only cycle is ``cycle`` and the path totals under it.

    Off-cycle vertices are attached by reverse breadth-first search from the
    cycle; each vertex keeps the edge through which the search first reaches
    it (in-edges scanned by source, then edge index). The anchor (default: lowest cycle vertex) gets
    value 0 and every other vertex the total reward of its policy path to it.

    Raises:
        UnreachableCycleError: some vertex has no path to the cycle
    """
    n = graph.n
    if anchor is None:
        anchor = min(cycle.vertices)
    if anchor not in cycle.vertices:
        raise DmdpError(f"Anchor {anchor} is not on cycle {list(cycle.vertices)}")

    policy = _attach_to_cycle(graph, cycle)
    missing = [u for u in range(n) if policy[u] is None]
    if missing:
        raise UnreachableCycleError(f"Vertices {missing} cannot reach cycle {cycle.describe()}")

    values: List[Optional[Reward]] = [None] * n
    values[anchor] = graph.field.zero
    for start in range(n):
        chain = []
        u = start
        while values[u] is None:
            chain.append(u)
            u = graph.edge(u, policy[u])[0]
        for w in reversed(chain):
            v, r = graph.edge(w, policy[w])
            values[w] = r + values[v]
    return policy, values


def _phased_component(
    graph: Graph,
    variant: str,
    keep_values: bool
) -> PhasedResult:
    """Phased policy iteration on a strongly connected graph."""
    field = graph.field
    n = graph.n
    policy: Policy = [0] * n
    cycle = best_policy_cycle(graph, policy)
    assert cycle is not None
    mu = cycle.mean
    phases = [PhaseRecord(1, mu, cycle.length, 0)]
    trajectories: List[List[List[Reward]]] = []
    total_iterations = 0
    logger.debug(f"Phase 1 ({variant}): initial policy cycle {cycle.describe()} mean {mu}")

    while True:
        adjusted = mean_zero_parallel(graph, mu)
        adjusted_cycle = adjusted.cycle_report(cycle.vertices, cycle.edges)
        policy, path_values = redirect_to_cycle(adjusted, adjusted_cycle)
        if variant == CLASSIC:
            values, arc = path_values, None
        else:
            values, arc = [field.zero] * n, field.zero
        chosen: Policy = list(policy)
        trajectory = [list(values)]

        found: Optional[CycleReport] = None
        for step in range(1, n + 1):
            values, chosen = _augmented_step(adjusted, values, chosen, arc)
            total_iterations += 1
            if keep_values:
                trajectory.append(list(values))
            candidate = best_policy_cycle(adjusted, _real_edges(adjusted, chosen))
            if candidate is not None and field.gt(candidate.mean, field.zero):
                found = graph.cycle_report(candidate.vertices, candidate.edges)
                break
        if keep_values:
            trajectories.append(trajectory)

        if found is None:
            break
        cycle, mu = found, found.mean
        phases.append(PhaseRecord(len(phases) + 1, mu, cycle.length, step))
        logger.debug(f"Phase {len(phases)} ({variant}): cycle {cycle.describe()} mean {mu}")

    final_policy, _ = redirect_to_cycle(graph, cycle)
    return PhasedResult(mu, cycle, phases, total_iterations, final_policy, trajectories)


def phased_policy_iteration(
    graph: Graph,
    variant: str = CLASSIC,
    keep_values: bool = False
) -> PhasedResult:
    """
    Generic phased policy iteration.

    Each phase subtracts the new cycle mean from all rewards, redirects every
    vertex onto a path to that cycle and reassigns values: path totals to the
    lowest cycle vertex (classic) or zeros with zero-reward self arcs
    (zero-reset). Value iteration then runs until a cycle of positive adjusted
    mean appears or n iterations pass. Graphs that are not strongly connected
    are solved per component and combined by maximum.

    Args:
        graph: The instance
        variant: "classic" or "zero-reset"
        keep_values: Keep per-phase value trajectories (for monotonicity checks)

    Returns:
        The optimal mean, an optimal cycle, phase records of the winning
        component and a policy in which every vertex able to reach the optimal
        cycle has a path to it
    """
    if variant not in (CLASSIC, ZERO_RESET):
        raise DmdpError(f"Unknown policy-iteration variant '{variant}'")
    field = graph.field
    best: Optional[PhasedResult] = None
    best_members: List[int] = []
    fallback: Policy = [0] * graph.n
    iterations = 0

    for component in scc_decompose(graph):
        if not has_cycle(graph, component):
            continue
        subgraph, members = induced_subgraph(graph, component)
        assert subgraph is not None
        result = _phased_component(subgraph, variant, keep_values)
        iterations += result.iterations
        for local, global_id in enumerate(members):
            fallback[global_id] = _global_edge_index(graph, members, local, result.policy[local])
        if best is None or field.gt(result.mean, best.mean):
            best, best_members = result, members

    assert best is not None
    cycle = graph.cycle_report(
        [best_members[v] for v in best.cycle.vertices],
        [_global_edge_index(graph, best_members, v, i) for v, i in zip(best.cycle.vertices, best.cycle.edges)],
    )
    # vertices that cannot reach the optimal cycle keep their component's policy
    policy = [c if c is not None else fallback[u] for u, c in enumerate(_attach_to_cycle(graph, cycle))]
    logger.info(f"Phased policy iteration ({variant}): mean {best.mean}, {len(best.phases)} phases")
    return PhasedResult(best.mean, cycle, best.phases, iterations, policy, best.value_trajectories)


def _global_edge_index(graph: Graph, members: Sequence[int], local_u: int, local_index: int) -> int:
    """Edge index in ``graph`` of edge ``local_index`` of an induced-subgraph vertex."""
    inside = set(members)
    seen = -1
    for i, (v, _) in enumerate(graph.out_edges(members[local_u])):
        if v in inside:
            seen += 1
            if seen == local_index:
                return i
    raise DmdpError(f"Vertex {members[local_u]} has no internal edge {local_index}")
