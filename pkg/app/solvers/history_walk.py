"""
History-walk algorithm: n plain value iterations, then n iterations in which
every vertex maintains a super edge summarizing its history walk. Cyclic super
edges expose cycle means; the best one found equals the optimal mean.

Production mode keeps one optional super edge per vertex. Debug mode also
keeps the full edge-choice history, which allows auditing every super edge
against the reconstructed history walk and recovering a witness cycle.
"""

import csv
import io
from dataclasses import dataclass, field as dataclass_field
from typing import List, Optional, Sequence, Tuple

from app.core.logging_config import setup_logging
from app.dmdp.graph import CycleReport, Graph
from app.dmdp.scalar import Reward
from app.solvers.value_iteration import Policy, ValueState, vi_step

# Set up logging
logger = setup_logging(__name__)


@dataclass(frozen=True)
class SuperEdge:
    end: int
    length: int
    total: Reward


@dataclass
class MeanEstimate:
    """Best cyclic super edge so far and where it was discovered."""

    mean: Reward
    length: int
    total: Reward
    iteration: int
    vertex: int


def super_edge_update(
    graph: Graph,
    u: int,
    edge_index: int,
    prev: Optional[SuperEdge]
) -> Tuple[Optional[SuperEdge], Optional[Tuple[Reward, int, Reward]]]:
    """
    New super edge of ``u`` after choosing ``edge_index``.

    Args:
        graph: The instance
        u: The updating vertex
        edge_index: u's chosen edge this iteration, leading to v
        prev: v's super edge from the previous iteration

    Returns:
        (u's new super edge, or None when it became cyclic;
        (mean, length, total) of the cyclic super edge, or None)
    """
    v, r = graph.edge(u, edge_index)
    if u == v:
        return None, (r, 1, r)
    if prev is None:
        return SuperEdge(v, 1, r), None
    total = r + prev.total
    length = prev.length + 1
    if u == prev.end:
        return None, (graph.field.mean(total, length), length, total)
    return SuperEdge(prev.end, length, total), None


def _lowest_index_choice(
    graph: Graph,
    u: int,
    values: Sequence[Reward],
    supers: Sequence[Optional[SuperEdge]]
) -> Tuple[int, Reward]:
    """
    Maximal edge, ties resolved by the lowest super-edge end vertex of the
    target (the target itself when it has no super edge), then edge index.
    """
    field = graph.field
    best_index, best, best_key = -1, None, None
    for i, (v, r) in enumerate(graph.out_edges(u)):
        value = r + values[v]
        key = supers[v].end if supers[v] is not None else v
        if best is None or field.gt(value, best):
            best_index, best, best_key = i, value, key
        elif field.eq(value, best) and key < best_key:
            best_index, best_key = i, key
    return best_index, best


def reconstruct_history_walk(
    graph: Graph,
    choices: Sequence[Policy],
    u: int,
    t: int,
    length: int
) -> List[Tuple[int, int]]:
    """
    The history walk of ``u`` at iteration ``t`` as (vertex, edge index) steps.

    ``choices[s]`` is the policy chosen at iteration s (index 0 unused).
    """
    steps = []
    vertex = u
    for s in range(t, t - length, -1):
        index = choices[s][vertex]
        steps.append((vertex, index))
        vertex = graph.edge(vertex, index)[0]
    return steps


def audit_super_edges(
    graph: Graph,
    supers: Sequence[Optional[SuperEdge]],
    choices: Sequence[Policy],
    t: int
) -> bool:
    """True iff every defined super edge matches its owner's history walk at ``t``."""
    for u, super_edge in enumerate(supers):
        if super_edge is None:
            continue
        if not 1 <= super_edge.length <= t:
            return False
        steps = reconstruct_history_walk(graph, choices, u, t, super_edge.length)
        total = graph.field.zero
        end = u
        for vertex, index in steps:
            end, r = graph.edge(vertex, index)
            total += r
        if end != super_edge.end or not graph.field.eq(total, super_edge.total):
            return False
    return True


def _closed_walk_best_cycle(graph: Graph, steps: Sequence[Tuple[int, int]]) -> CycleReport:
    """Split a closed walk into simple cycles and return the highest-mean one."""
    best = None
    stack: List[Tuple[int, int]] = []
    position = {}
    for vertex, index in steps:
        if vertex in position:
            start = position[vertex]
            cycle_steps = stack[start:]
            del stack[start:]
            for w, _ in cycle_steps:
                del position[w]
            report = graph.cycle_report([w for w, _ in cycle_steps], [i for _, i in cycle_steps])
            if best is None or graph.field.gt(report.mean, best.mean):
                best = report
        position[vertex] = len(stack)
        stack.append((vertex, index))
    report = graph.cycle_report([w for w, _ in stack], [i for _, i in stack])
    if best is None or graph.field.gt(report.mean, best.mean):
        best = report
    return best


@dataclass
class HistoryWalkResult:
    mean: Reward
    length: int
    total: Reward
    iterations: int
    discovered_at: Tuple[int, int]
    witness: Optional[CycleReport] = None
    mean_trace: List[Optional[Reward]] = dataclass_field(default_factory=list)
    audits: List[bool] = dataclass_field(default_factory=list)
    trace_rows: List[Tuple] = dataclass_field(default_factory=list)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["iteration", "vertex", "end", "length", "total", "cyclic_mean"])
        for row in self.trace_rows:
            writer.writerow(row)
        return buffer.getvalue()


class HistoryWalkSolver:
    """
    Step-wise history-walk run.

    ``run_phase_one`` performs the n plain iterations; ``phase_two_step``
    performs one super-edge iteration. ``run`` does both phases.
    """

    def __init__(
        self,
        graph: Graph,
        init_values: Optional[Sequence[Reward]] = None,
        debug: bool = False,
        trace: bool = False
    ):
        self.graph = graph
        self.state = ValueState.initial(graph, init_values)
        self.supers: List[Optional[SuperEdge]] = [None] * graph.n
        self.estimate: Optional[MeanEstimate] = None
        self.debug = debug
        self.trace = trace
        self.choices: List[Policy] = [[]] if debug else []
        self.phase_two_iterations = 0
        self.mean_trace: List[Optional[Reward]] = []
        self.audits: List[bool] = []
        self.trace_rows: List[Tuple] = []
        self._winning_closed_walk: Optional[List[Tuple[int, int]]] = None
        self._pending_witness: Optional[Tuple[int, int]] = None

    def run_phase_one(self) -> None:
        for _ in range(self.graph.n):
            self.state = vi_step(self.graph, self.state)
            if self.debug:
                self.choices.append(list(self.state.chosen))
        logger.debug(f"Phase one finished at t={self.state.t}")

    def phase_two_step(self) -> None:
        graph, field = self.graph, self.graph.field
        values = self.state.values
        previous_supers = self.supers
        new_values: List[Reward] = []
        new_chosen: Policy = []
        new_supers: List[Optional[SuperEdge]] = []
        t = self.state.t + 1
        self.phase_two_iterations += 1

        for u in range(graph.n):
            index, best = _lowest_index_choice(graph, u, values, previous_supers)
            v = graph.edge(u, index)[0]
            super_edge, cyclic = super_edge_update(graph, u, index, previous_supers[v])
            new_values.append(best)
            new_chosen.append(index)
            new_supers.append(super_edge)
            if cyclic is not None:
                mean, length, total = cyclic
                if self.estimate is None or field.gt(mean, self.estimate.mean):
                    self.estimate = MeanEstimate(mean, length, total, self.phase_two_iterations, u)
                    logger.debug(f"Cyclic super edge at vertex {u}, iteration {t}: mean {mean}")
                    if self.debug:
                        self._pending_witness = (u, length)
            if self.trace:
                self.trace_rows.append(self._trace_row(u, super_edge, cyclic))

        self.state = self.state._advance(new_values, new_chosen)
        self.supers = new_supers
        self.mean_trace.append(self.estimate.mean if self.estimate else None)
        if self.debug:
            self.choices.append(list(new_chosen))
            if self._pending_witness is not None:
                u, length = self._pending_witness
                self._winning_closed_walk = reconstruct_history_walk(graph, self.choices, u, t, length)
                self._pending_witness = None
            self.audits.append(audit_super_edges(graph, self.supers, self.choices, t))

    def _trace_row(self, u: int, super_edge: Optional[SuperEdge], cyclic) -> Tuple:
        field = self.graph.field
        cyclic_mean = field.format(cyclic[0]) if cyclic else ""
        if super_edge is None:
            return (self.phase_two_iterations, u, "", "", "", cyclic_mean)
        return (
            self.phase_two_iterations, u, super_edge.end, super_edge.length,
            field.format(super_edge.total), cyclic_mean,
        )

    def run(self) -> HistoryWalkResult:
        self.run_phase_one()
        for _ in range(self.graph.n):
            self.phase_two_step()
        estimate = self.estimate
        # phase two of length n always closes a cyclic super edge
        assert estimate is not None
        witness = None
        if self._winning_closed_walk is not None:
            witness = _closed_walk_best_cycle(self.graph, self._winning_closed_walk)
        logger.info(f"History walk: mean {estimate.mean} after {self.state.t} iterations")
        return HistoryWalkResult(
            mean=estimate.mean,
            length=estimate.length,
            total=estimate.total,
            iterations=self.state.t,
            discovered_at=(estimate.iteration, estimate.vertex),
            witness=witness,
            mean_trace=self.mean_trace,
            audits=self.audits,
            trace_rows=self.trace_rows,
        )


def run_history_walk(
    graph: Graph,
    init_values: Optional[Sequence[Reward]] = None,
    debug: bool = False,
    trace: bool = False
) -> HistoryWalkResult:
    """
    Optimal mean in 2n iterations with one super edge per vertex.

    Args:
        graph: The instance
        init_values: Initial values (default: zeros)
        debug: Keep the edge-choice history, audit super edges every phase-two
            iteration and reconstruct a witness cycle
        trace: Collect phase-two trace rows

    Returns:
        Mean, length and total of the best cyclic super edge and run details
    """
    return HistoryWalkSolver(graph, init_values, debug=debug, trace=trace).run()
