"""
Weighted digraph for deterministic MDPs.

This module provides the immutable Graph, walks and cycle reports over it,
the edge-list text format, the constant-offset (parallel graph) transform and
strongly connected component utilities.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple, Union

import networkx as nx

from app.core.exceptions import DmdpError, GraphFormatError, GraphStructureError
from app.core.logging_config import setup_logging
from app.dmdp.scalar import EXACT, Reward, RewardField

# Set up logging
logger = setup_logging(__name__)

OutEdge = Tuple[int, Reward]


class Graph:
    """
    Immutable weighted digraph with vertices 0..n-1.

    Out-edges are stored per vertex in the order they were listed; every
    tie-breaking rule that says "first" or "lowest index" refers to that order.
    """

    __slots__ = ("_n", "_adjacency", "_m", "field")

    def __init__(self, adjacency: Sequence[Sequence[OutEdge]], field: Optional[RewardField] = None):
        self.field = field or EXACT
        n = len(adjacency)
        if n < 1:
            raise GraphStructureError("A graph needs at least one vertex")

        rows = []
        for u, edges in enumerate(adjacency):
            if not edges:
                raise GraphStructureError(f"Vertex {u} has no out-edge")
            row = []
            for v, reward in edges:
                if not 0 <= v < n:
                    raise GraphStructureError(f"Edge {u}->{v} targets a vertex outside [0, {n})")
                row.append((int(v), self.field.convert(reward)))
            rows.append(tuple(row))

        self._n = n
        self._adjacency = tuple(rows)
        self._m = sum(len(row) for row in rows)

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return self._m

    def out_edges(self, u: int) -> Tuple[OutEdge, ...]:
        return self._adjacency[u]

    def edge(self, u: int, index: int) -> OutEdge:
        return self._adjacency[u][index]

    def edges(self) -> Iterator[Tuple[int, int, int, Reward]]:
        """Iterate (source, edge index, target, reward) in vertex then listed order."""
        for u, row in enumerate(self._adjacency):
            for i, (v, r) in enumerate(row):
                yield u, i, v, r

    def with_field(self, field: RewardField) -> "Graph":
        return Graph(self._adjacency, field)

    def cycle_report(self, vertices: Sequence[int], edge_indices: Sequence[int]) -> "CycleReport":
        """Build a CycleReport, checking every edge exists and closes the cycle."""
        if not vertices or len(vertices) != len(edge_indices):
            raise GraphStructureError("A cycle needs one edge index per vertex")
        if len(set(vertices)) != len(vertices):
            raise GraphStructureError(f"Cycle {list(vertices)} repeats a vertex")
        total = self.field.zero
        k = len(vertices)
        for pos, (u, i) in enumerate(zip(vertices, edge_indices)):
            v, r = self.edge(u, i)
            if v != vertices[(pos + 1) % k]:
                raise GraphStructureError(f"Edge {i} of vertex {u} does not continue cycle {list(vertices)}")
            total += r
        return CycleReport(tuple(vertices), tuple(edge_indices), total, self.field.mean(total, k))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._adjacency == other._adjacency

    def __hash__(self) -> int:
        return hash(self._adjacency)

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self._m}, mode={self.field.name})"


@dataclass(frozen=True)
class Walk:
    """A walk given as (source, edge index) steps."""

    graph: Graph
    steps: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if not self.steps:
            raise GraphStructureError("A walk has at least one edge")
        for (u, i), (next_u, _) in zip(self.steps, self.steps[1:]):
            if self.graph.edge(u, i)[0] != next_u:
                raise GraphStructureError(f"Walk breaks after edge {i} of vertex {u}")

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def start(self) -> int:
        return self.steps[0][0]

    @property
    def end(self) -> int:
        u, i = self.steps[-1]
        return self.graph.edge(u, i)[0]

    @property
    def total(self) -> Reward:
        total = self.graph.field.zero
        for u, i in self.steps:
            total += self.graph.edge(u, i)[1]
        return total

    @property
    def mean(self) -> Reward:
        return self.graph.field.mean(self.total, self.length)


@dataclass(frozen=True)
class CycleReport:
    """A simple cycle: its vertices, the edge index leaving each, total and mean."""

    vertices: Tuple[int, ...]
    edges: Tuple[int, ...]
    total: Reward
    mean: Reward

    @property
    def length(self) -> int:
        return len(self.vertices)

    def describe(self) -> str:
        return " -> ".join(str(v) for v in self.vertices + self.vertices[:1])


# ---------------------------------------------------------------------------
# Edge-list text format
# ---------------------------------------------------------------------------

def _lines(text: Union[str, TextIO, Iterable[str]]) -> Iterable[str]:
    if isinstance(text, str):
        return text.splitlines()
    return text


def parse_edge_list(
    text: Union[str, TextIO, Iterable[str]],
    field: Optional[RewardField] = None,
    simple: bool = False
) -> Tuple[Graph, List[Reward]]:
    """
    Parse the line-oriented edge-list format.

    Args:
        text: Whole text, an open file or an iterable of lines
        field: Reward arithmetic (default: exact)
        simple: Reject parallel edges when True

    Returns:
        The graph and its initial values (0 where no ``v`` line is given)
    """
    field = field or EXACT
    n = m = None
    adjacency: List[List[OutEdge]] = []
    values: List[Reward] = []
    seen_pairs = set()
    edge_count = 0

    for number, raw in enumerate(_lines(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]

        if kind == "p":
            if n is not None:
                raise GraphFormatError("duplicate header", number)
            if len(tokens) != 4 or tokens[1] != "dmdp":
                raise GraphFormatError(f"malformed header '{line}'", number)
            n, m = _parse_count(tokens[2], number), _parse_count(tokens[3], number)
            if n < 1:
                raise GraphFormatError("header declares no vertices", number)
            adjacency = [[] for _ in range(n)]
            values = [field.zero] * n
            continue

        if n is None:
            raise GraphFormatError("header 'p dmdp <n> <m>' must come first", number)

        if kind == "v":
            if len(tokens) != 3:
                raise GraphFormatError(f"malformed value line '{line}'", number)
            vertex = _parse_vertex(tokens[1], n, number)
            values[vertex] = _parse_reward(tokens[2], field, number)
        elif kind == "e":
            if len(tokens) != 4:
                raise GraphFormatError(f"malformed edge line '{line}'", number)
            u = _parse_vertex(tokens[1], n, number)
            v = _parse_vertex(tokens[2], n, number)
            if simple and (u, v) in seen_pairs:
                raise GraphFormatError(f"parallel edge {u}->{v} in a simple graph", number)
            seen_pairs.add((u, v))
            adjacency[u].append((v, _parse_reward(tokens[3], field, number)))
            edge_count += 1
        else:
            raise GraphFormatError(f"unknown line type '{kind}'", number)

    if n is None:
        raise GraphFormatError("missing header 'p dmdp <n> <m>'")
    if edge_count != m:
        raise GraphFormatError(f"header declares {m} edges but {edge_count} were listed")
    for u, edges in enumerate(adjacency):
        if not edges:
            raise GraphFormatError(f"vertex {u} has no out-edge")

    graph = Graph(adjacency, field)
    logger.debug(f"Parsed {graph}")
    return graph, values


def _parse_count(token: str, number: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise GraphFormatError(f"'{token}' is not an integer", number) from None


def _parse_vertex(token: str, n: int, number: int) -> int:
    vertex = _parse_count(token, number)
    if not 0 <= vertex < n:
        raise GraphFormatError(f"vertex id {vertex} outside [0, {n})", number)
    return vertex


def _parse_reward(token: str, field: RewardField, number: int) -> Reward:
    try:
        return field.convert(token)
    except DmdpError as e:
        raise GraphFormatError(str(e), number) from None


def serialize(graph: Graph, initial_values: Optional[Sequence[Reward]] = None) -> str:
    """
    Emit the edge-list format; rationals as ``a/b`` in exact mode.

    Only non-zero initial values produce ``v`` lines.
    """
    field = graph.field
    lines = [f"p dmdp {graph.n} {graph.m}"]
    if initial_values is not None:
        for vertex, value in enumerate(initial_values):
            if value != 0:
                lines.append(f"v {vertex} {field.format(value)}")
    for u, _, v, r in graph.edges():
        lines.append(f"e {u} {v} {field.format(r)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Structural utilities
# ---------------------------------------------------------------------------

def mean_zero_parallel(graph: Graph, mu: Reward) -> Graph:
    """Parallel graph with every reward reduced by ``mu``; structure and order unchanged."""
    mu = graph.field.convert(mu)
    adjacency = [[(v, r - mu) for v, r in graph.out_edges(u)] for u in range(graph.n)]
    return Graph(adjacency, graph.field)


def to_networkx(graph: Graph) -> nx.DiGraph:
    """Collapse parallel edges, keeping the highest reward (first listed on ties)."""
    digraph = nx.DiGraph()
    digraph.add_nodes_from(range(graph.n))
    for u, i, v, r in graph.edges():
        data = digraph.get_edge_data(u, v)
        if data is None or graph.field.gt(r, data["reward"]):
            digraph.add_edge(u, v, reward=r, index=i)
    return digraph


def scc_decompose(graph: Graph) -> List[List[int]]:
    """
    Strongly connected components in reverse topological order.

    Each component is returned as a sorted vertex list; a component comes
    before every component that can reach it.
    """
    digraph = to_networkx(graph)
    condensed = nx.condensation(digraph)
    order = list(nx.lexicographical_topological_sort(
        condensed, key=lambda c: min(condensed.nodes[c]["members"])
    ))
    return [sorted(condensed.nodes[c]["members"]) for c in reversed(order)]


def induced_subgraph(graph: Graph, vertices: Sequence[int]) -> Tuple[Optional[Graph], List[int]]:
    """
    Restrict a graph to a vertex set.

    Args:
        graph: The full graph
        vertices: Vertices to keep (a strongly connected component in practice)

    Returns:
        (subgraph with local ids 0..k-1 or None when some vertex has no internal
        out-edge, list mapping local id to global id)
    """
    members = sorted(vertices)
    local: Dict[int, int] = {v: i for i, v in enumerate(members)}
    adjacency = []
    for u in members:
        row = [(local[v], r) for v, r in graph.out_edges(u) if v in local]
        if not row:
            return None, members
        adjacency.append(row)
    return Graph(adjacency, graph.field), members


def has_cycle(graph: Graph, component: Sequence[int]) -> bool:
    """True when the component is non-trivial or a single vertex with a self-loop."""
    if len(component) > 1:
        return True
    u = component[0]
    return any(v == u for v, _ in graph.out_edges(u))
