"""
Independent ground truth: exhaustive simple-cycle enumeration, Karp's
characterization of the optimal mean, and Bellman-Ford positive-cycle tests.
"""

from collections import deque
from dataclasses import dataclass
from typing import List, Optional

import networkx as nx

from app.core.exceptions import OracleLimitError
from app.core.logging_config import setup_logging
from app.core.settings import settings
from app.dmdp.graph import CycleReport, Graph, has_cycle, induced_subgraph, scc_decompose, to_networkx
from app.dmdp.scalar import Reward

# Set up logging
logger = setup_logging(__name__)


@dataclass(frozen=True)
class OracleResult:
    mean: Reward
    cycle: CycleReport
    cycles_examined: int


def oracle_enumerate(graph: Graph, max_n: Optional[int] = None) -> OracleResult:
    """
    Maximum mean over all simple cycles, by enumeration.

    Parallel edges collapse to the highest reward, which is the only one a
    maximum-mean simple cycle can use. Enumeration follows Johnson's algorithm
    as implemented by networkx.

    Args:
        graph: The instance
        max_n: Enumeration guard (default: settings.ORACLE_MAX_N)

    Returns:
        The optimal mean, a witness (first cycle found at that mean) and the
        number of simple cycles examined
    """
    limit = settings.ORACLE_MAX_N if max_n is None else max_n
    if graph.n > limit:
        raise OracleLimitError(f"Oracle enumeration is limited to n <= {limit}, got n = {graph.n}")

    field = graph.field
    digraph = to_networkx(graph)
    best: Optional[CycleReport] = None
    examined = 0
    for cycle in nx.simple_cycles(digraph):
        examined += 1
        pivot = cycle.index(min(cycle))
        cycle = cycle[pivot:] + cycle[:pivot]
        k = len(cycle)
        indices = [digraph[cycle[p]][cycle[(p + 1) % k]]["index"] for p in range(k)]
        report = graph.cycle_report(cycle, indices)
        if best is None or field.gt(report.mean, best.mean):
            best = report

    # out-degree >= 1 everywhere guarantees a cycle
    assert best is not None
    logger.debug(f"Oracle examined {examined} simple cycles, best mean {best.mean}")
    return OracleResult(best.mean, best, examined)


def _karp_component(graph: Graph) -> Reward:
    """Karp's formula on a strongly connected graph, source vertex 0."""
    n = graph.n
    field = graph.field
    # None stands for minus infinity and never enters arithmetic
    walks: List[List[Optional[Reward]]] = [[None] * n for _ in range(n + 1)]
    walks[0][0] = field.zero
    for k in range(1, n + 1):
        previous, current = walks[k - 1], walks[k]
        for u, _, v, r in graph.edges():
            if previous[u] is None:
                continue
            candidate = previous[u] + r
            if current[v] is None or candidate > current[v]:
                current[v] = candidate

    best: Optional[Reward] = None
    for v in range(n):
        if walks[n][v] is None:
            continue
        worst: Optional[Reward] = None
        for k in range(n):
            if walks[k][v] is None:
                continue
            ratio = field.mean(walks[n][v] - walks[k][v], n - k)
            if worst is None or ratio < worst:
                worst = ratio
        if worst is not None and (best is None or worst > best):
            best = worst
    assert best is not None
    return best


def karp_mean(graph: Graph) -> Reward:
    """
    Optimal mean by Karp's formula, maximized over the cyclic components.

    Within a component with source s, ``D_k(v)`` is the best total of a
    length-k walk from s to v and the mean is
    ``max_v min_k (D_n(v) - D_k(v)) / (n - k)``.
    """
    best: Optional[Reward] = None
    for component in scc_decompose(graph):
        if not has_cycle(graph, component):
            continue
        subgraph, _ = induced_subgraph(graph, component)
        assert subgraph is not None
        mean = _karp_component(subgraph)
        if best is None or graph.field.gt(mean, best):
            best = mean
    assert best is not None
    return best


def _predecessor_cycle(predecessor: List[Optional[int]]) -> bool:
    """True iff following predecessor links from some vertex comes back to the walk."""
    n = len(predecessor)
    state = [0] * n  # 0 unseen, 1 on the current walk, 2 done
    for start in range(n):
        if state[start]:
            continue
        walk = []
        v: Optional[int] = start
        while v is not None and state[v] == 0:
            state[v] = 1
            walk.append(v)
            v = predecessor[v]
        if v is not None and state[v] == 1:
            return True
        for w in walk:
            state[w] = 2
    return False


def bf_positive_cycle(graph: Graph, mu: Reward) -> bool:
    """
    True iff some cycle has positive total under rewards ``r(e) - mu``.

    FIFO-queue Bellman-Ford for longest paths from a virtual source joined to
    every vertex. Every n relaxations the predecessor graph is searched for a
    cycle; any such cycle is positive. A best path reaching n edges is the
    fallback certificate.
    """
    field = graph.field
    mu = field.convert(mu)
    n = graph.n
    distance = [field.zero] * n
    path_edges = [0] * n
    predecessor: List[Optional[int]] = [None] * n
    in_queue = [True] * n
    queue = deque(range(n))
    relaxations = 0

    while queue:
        u = queue.popleft()
        in_queue[u] = False
        base = distance[u]
        for v, r in graph.out_edges(u):
            candidate = base + (r - mu)
            if not field.gt(candidate, distance[v]):
                continue
            distance[v] = candidate
            predecessor[v] = u
            path_edges[v] = path_edges[u] + 1
            relaxations += 1
            if path_edges[v] >= n or (relaxations % n == 0 and _predecessor_cycle(predecessor)):
                logger.debug(f"Positive cycle found for candidate mean {mu} after {relaxations} relaxations")
                return True
            if not in_queue[v]:
                in_queue[v] = True
                queue.append(v)
    return False
