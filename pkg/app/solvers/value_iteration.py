"""
Value iteration on deterministic MDPs.

Each vertex takes the best out-edge value ``r(e) + x_v`` of the previous
iteration. Ties keep the previously chosen edge (the lazy rule); otherwise the
lowest edge index wins. The module also carries the Gauss-Seidel sweep, policy
cycle detection, walk values and the instrumentation used by the convergence
studies (iteration traces, residue-class dominance tracking).
"""

import csv
import hashlib
import io
from collections import deque
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Deque, List, Optional, Sequence, Tuple

from app.core.exceptions import DmdpError, InsufficientHistoryError
from app.core.logging_config import setup_logging
from app.dmdp.graph import CycleReport, Graph, Walk
from app.dmdp.scalar import Reward

# Set up logging
logger = setup_logging(__name__)

Policy = List[Optional[int]]


@dataclass
class ValueState:
    """
    Values and visited policy at time ``t``.

    ``history[0]`` is the value vector one step back, ``history[1]`` two steps
    back and so on, up to ``history_depth`` vectors.
    """

    t: int
    values: List[Reward]
    chosen: Policy
    history: Deque[List[Reward]] = dataclass_field(default_factory=deque)
    history_depth: int = 1

    @classmethod
    def initial(
        cls,
        graph: Graph,
        values: Optional[Sequence[Reward]] = None,
        history_depth: int = 1
    ) -> "ValueState":
        if values is None:
            start = [graph.field.zero] * graph.n
        else:
            if len(values) != graph.n:
                raise DmdpError(f"Expected {graph.n} initial values, got {len(values)}")
            start = [graph.field.convert(x) for x in values]
        return cls(0, start, [None] * graph.n, deque(maxlen=history_depth), history_depth)

    @property
    def previous(self) -> Optional[List[Reward]]:
        return self.history[0] if self.history else None

    def past_values(self, steps_back: int) -> List[Reward]:
        """Value vector ``steps_back`` iterations ago."""
        if steps_back == 0:
            return self.values
        if steps_back > self.t:
            raise InsufficientHistoryError(f"Time {self.t} has no values {steps_back} steps back")
        if steps_back > len(self.history):
            raise InsufficientHistoryError(
                f"Only {len(self.history)} past value vectors retained, {steps_back} needed"
            )
        return self.history[steps_back - 1]

    def _advance(self, values: List[Reward], chosen: Policy) -> "ValueState":
        history = deque(self.history, maxlen=self.history_depth)
        history.appendleft(self.values)
        return ValueState(self.t + 1, values, chosen, history, self.history_depth)


def select_edge(
    graph: Graph,
    u: int,
    values: Sequence[Reward],
    previous_choice: Optional[int]
) -> Tuple[int, Reward]:
    """
    Best out-edge of ``u`` against ``values``.

    Returns:
        (edge index, its value): the previous choice if it ties for the
        maximum, otherwise the lowest-index maximal edge
    """
    field = graph.field
    edges = graph.out_edges(u)
    v, r = edges[0]
    best_index, best = 0, r + values[v]
    for i in range(1, len(edges)):
        v, r = edges[i]
        value = r + values[v]
        if field.gt(value, best):
            best_index, best = i, value
    if previous_choice is not None and previous_choice != best_index:
        v, r = edges[previous_choice]
        if field.eq(r + values[v], best):
            return previous_choice, best
    return best_index, best


def vi_step(graph: Graph, state: ValueState) -> ValueState:
    """One synchronous iteration: every vertex reads only the previous values."""
    values = state.values
    new_values: List[Reward] = []
    new_chosen: Policy = []
    for u in range(graph.n):
        index, best = select_edge(graph, u, values, state.chosen[u])
        new_values.append(best)
        new_chosen.append(index)
    return state._advance(new_values, new_chosen)


def gauss_seidel_step(
    graph: Graph,
    state: ValueState,
    order: Optional[Sequence[int]] = None
) -> ValueState:
    """One in-place sweep in ``order``; each vertex reads the freshest values."""
    if order is None:
        order = range(graph.n)
    elif sorted(order) != list(range(graph.n)):
        raise DmdpError(f"Sweep order {list(order)} is not a permutation of the vertices")
    values = list(state.values)
    chosen = list(state.chosen)
    for u in order:
        chosen[u], values[u] = select_edge(graph, u, values, state.chosen[u])
    return state._advance(values, chosen)


def value_of_walk(graph: Graph, walk: Walk, state: ValueState) -> Reward:
    """``R(w)`` plus the end-vertex value ``|w|`` iterations before ``state.t``."""
    return walk.total + state.past_values(walk.length)[walk.end]


def detect_policy_cycles(graph: Graph, chosen: Policy) -> List[CycleReport]:
    """
    All cycles of the functional graph given by ``chosen``.

    Vertices whose choice is None end their pointer chain. Each cycle is
    reported once, rotated to start at its lowest vertex, in order of discovery
    from vertex 0 upwards.
    """
    status = [0] * graph.n  # 0 unseen, 1 on current chain, 2 finished
    reports = []
    for start in range(graph.n):
        if status[start]:
            continue
        chain = []
        u: Optional[int] = start
        while u is not None and status[u] == 0:
            status[u] = 1
            chain.append(u)
            index = chosen[u]
            u = graph.edge(u, index)[0] if index is not None else None
        if u is not None and status[u] == 1:
            cycle = chain[chain.index(u):]
            pivot = cycle.index(min(cycle))
            cycle = cycle[pivot:] + cycle[:pivot]
            reports.append(graph.cycle_report(cycle, [chosen[v] for v in cycle]))
        for v in chain:
            status[v] = 2
    return reports


def best_policy_cycle(graph: Graph, chosen: Policy) -> Optional[CycleReport]:
    """Highest-mean cycle of the policy; the first discovered wins ties."""
    best = None
    for report in detect_policy_cycles(graph, chosen):
        if best is None or graph.field.gt(report.mean, best.mean):
            best = report
    return best


def policy_hash(chosen: Policy) -> str:
    return hashlib.blake2b(repr(tuple(chosen)).encode(), digest_size=8).hexdigest()


StopCondition = Callable[[Graph, ValueState], bool]


def optimal_cycle_formed(mu: Reward) -> StopCondition:
    """Stop once the visited policy contains a cycle of mean ``mu``."""

    def condition(graph: Graph, state: ValueState) -> bool:
        target = graph.field.convert(mu)
        return any(graph.field.eq(c.mean, target) for c in detect_policy_cycles(graph, state.chosen))

    return condition


@dataclass
class IterationRecord:
    t: int
    policy_hash: str
    switches: int
    max_value: Reward
    optimal_present: Optional[bool] = None


@dataclass
class ViTrace:
    """Outcome of run_vi: per-iteration records and the final state."""

    records: List[IterationRecord]
    final_state: ValueState
    first_formation: Optional[int] = None
    stopped: bool = False
    policies: List[Policy] = dataclass_field(default_factory=list)

    @property
    def policy_hashes(self) -> List[str]:
        return [record.policy_hash for record in self.records]

    @property
    def iterations(self) -> int:
        return self.final_state.t

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["t", "policy_hash", "switches", "max_value"])
        for record in self.records:
            writer.writerow([record.t, record.policy_hash, record.switches, float(record.max_value)])
        return buffer.getvalue()


def run_vi(
    graph: Graph,
    init_values: Optional[Sequence[Reward]] = None,
    max_t: int = 1,
    stop: Optional[StopCondition] = None,
    reference_mean: Optional[Reward] = None,
    keep_policies: bool = False
) -> ViTrace:
    """
    Run value iteration for up to ``max_t`` iterations.

    Args:
        graph: The instance
        init_values: Initial values (default: zeros)
        max_t: Iteration cap (at least 1)
        stop: Optional condition checked after every iteration
        reference_mean: When given, each record notes whether a cycle of this
            mean is in the visited policy and the first such iteration is kept
        keep_policies: Retain every visited policy in the trace

    Returns:
        The iteration trace; running out of iterations is reported through
        ``stopped`` and ``first_formation``, never raised
    """
    if max_t < 1:
        raise DmdpError(f"max_t must be at least 1, got {max_t}")
    field = graph.field
    reference = field.convert(reference_mean) if reference_mean is not None else None
    state = ValueState.initial(graph, init_values)
    trace = ViTrace(records=[], final_state=state)

    for _ in range(max_t):
        new_state = vi_step(graph, state)
        switches = sum(
            1 for old, new in zip(state.chosen, new_state.chosen) if old is not None and old != new
        )
        present = None
        if reference is not None:
            present = any(
                field.eq(c.mean, reference) for c in detect_policy_cycles(graph, new_state.chosen)
            )
            if present and trace.first_formation is None:
                trace.first_formation = new_state.t
                logger.debug(f"Optimal cycle first formed at t={new_state.t}")
        trace.records.append(IterationRecord(
            new_state.t, policy_hash(new_state.chosen), switches, max(new_state.values), present
        ))
        if keep_policies:
            trace.policies.append(list(new_state.chosen))
        state = new_state
        if stop is not None and stop(graph, state):
            trace.stopped = True
            break

    trace.final_state = state
    return trace


@dataclass
class DominanceTracker:
    """
    Highest value of every vertex per residue class of the iteration counter.

    ``best[v][j]`` is the highest value v took at an iteration ``t = j (mod
    period)`` and ``improved_at[v][j]`` the last iteration that raised it.
    """

    period: int
    best: List[List[Optional[Reward]]]
    improved_at: List[List[int]]

    @classmethod
    def empty(cls, n: int, period: int) -> "DominanceTracker":
        if period < 1:
            raise DmdpError(f"period must be at least 1, got {period}")
        return cls(period, [[None] * period for _ in range(n)], [[0] * period for _ in range(n)])

    def observe(self, graph: Graph, state: ValueState) -> None:
        j = state.t % self.period
        for v, value in enumerate(state.values):
            current = self.best[v][j]
            if current is None or graph.field.gt(value, current):
                self.best[v][j] = value
                self.improved_at[v][j] = state.t

    def last_improvement(self) -> int:
        return max(max(row) for row in self.improved_at)

    def violations(self, n: int) -> List[Tuple[int, int, int]]:
        """(vertex, residue, iteration) triples improved later than ``period * n``."""
        limit = self.period * n
        return [
            (v, j, t)
            for v, row in enumerate(self.improved_at)
            for j, t in enumerate(row)
            if t > limit
        ]


def track_dominance(
    graph: Graph,
    init_values: Optional[Sequence[Reward]] = None,
    period: int = 1,
    horizon: Optional[int] = None
) -> DominanceTracker:
    """
    Record residue-class maxima over ``horizon`` iterations.

    The graph is expected to be mean-zero (offset by its optimal mean).
    """
    if horizon is None:
        horizon = 2 * period * graph.n
    if horizon < period * graph.n:
        raise DmdpError(f"horizon {horizon} is shorter than period * n = {period * graph.n}")
    tracker = DominanceTracker.empty(graph.n, period)
    state = ValueState.initial(graph, init_values)
    tracker.observe(graph, state)
    for _ in range(horizon):
        state = vi_step(graph, state)
        tracker.observe(graph, state)
    return tracker
