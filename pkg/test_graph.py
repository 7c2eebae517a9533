from fractions import Fraction

import networkx as nx
import pytest

from app.core.exceptions import GraphFormatError, GraphStructureError
from app.dmdp.generators import gen_two_out_random, gen_uniform_random, gen_worst_case
from app.dmdp.graph import (
    Graph,
    Walk,
    induced_subgraph,
    mean_zero_parallel,
    parse_edge_list,
    scc_decompose,
    serialize,
)
from app.dmdp.scalar import EXACT, field_for_mode


def test_parse_minimal_instance():
    graph, values = parse_edge_list("p dmdp 1 1\ne 0 0 3")
    assert graph.n == 1 and graph.m == 1
    assert graph.edge(0, 0) == (0, Fraction(3))
    assert values == [0]


def test_parse_t3_keeps_edge_order(t3):
    assert t3.n == 3 and t3.m == 5
    assert [v for v, _ in t3.out_edges(0)] == [1, 2]
    assert [r for _, r in t3.out_edges(1)] == [5, 7]


def test_parse_values_and_rationals():
    graph, values = parse_edge_list("p dmdp 2 2\nv 1 -3/4\ne 0 1 1/3\ne 1 0 0.25  # trailing comment\n")
    assert values == [0, Fraction(-3, 4)]
    assert graph.edge(0, 0)[1] == Fraction(1, 3)
    assert graph.edge(1, 0)[1] == Fraction(1, 4)


@pytest.mark.parametrize("text,fragment", [
    ("p dmdp 2 1\ne 0 1 1", "vertex 1 has no out-edge"),
    ("p dmdp 1 1\np dmdp 1 1\ne 0 0 1", "duplicate header"),
    ("e 0 0 1\np dmdp 1 1", "must come first"),
    ("p dmdp 1 1\ne 0 3 1", "outside"),
    ("p dmdp 1 1\ne 0 0", "malformed edge"),
    ("p dmdp 1 1\ne 0 0 abc", "Invalid reward"),
    ("p dmdp 1 2\ne 0 0 1", "declares 2 edges"),
    ("p dmdp 1 1\nx 0 0 1", "unknown line type"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(GraphFormatError, match=fragment):
        parse_edge_list(text)


def test_parse_error_carries_line_number():
    with pytest.raises(GraphFormatError) as info:
        parse_edge_list("# header next\np dmdp 1 1\ne 0 5 1\n")
    assert info.value.line_number == 3
    assert str(info.value).startswith("line 3:")


def test_simple_mode_rejects_parallel_edges():
    text = "p dmdp 2 3\ne 0 1 1\ne 0 1 2\ne 1 0 0\n"
    graph, _ = parse_edge_list(text)
    assert graph.m == 3
    with pytest.raises(GraphFormatError, match="parallel edge"):
        parse_edge_list(text, simple=True)


def test_graph_rejects_bad_structure():
    with pytest.raises(GraphStructureError):
        Graph([[(0, 1)], []])
    with pytest.raises(GraphStructureError):
        Graph([[(2, 1)], [(0, 1)]])


def test_serialize_round_trip(t3, t3_text):
    text = serialize(t3)
    again, _ = parse_edge_list(text)
    assert again == t3
    assert serialize(again) == text


def test_serialize_round_trip_with_values_and_rationals():
    graph, _ = parse_edge_list("p dmdp 2 3\ne 0 1 1/3\ne 0 0 -2\ne 1 0 7/8\n")
    values = [Fraction(0), Fraction(-5, 2)]
    text = serialize(graph, values)
    assert "v 1 -5/2" in text
    again, again_values = parse_edge_list(text)
    assert again == graph
    assert again_values == values


def test_serialize_round_trip_on_generated_graphs():
    for seed in range(5):
        graph = gen_uniform_random(6, 14, seed, max_denominator=8)
        again, _ = parse_edge_list(serialize(graph))
        assert again == graph


def test_mean_zero_parallel_t3(t3):
    adjusted = mean_zero_parallel(t3, Fraction(13, 2))
    rewards = [r for _, _, _, r in adjusted.edges()]
    assert rewards == [Fraction(-5, 2), Fraction(-3, 2), Fraction(-3, 2), Fraction(1, 2), Fraction(-1, 2)]
    cycle = adjusted.cycle_report([1, 2], [1, 0])
    assert cycle.total == 0


def test_mean_zero_parallel_identity_and_composition(t3):
    assert mean_zero_parallel(t3, 0) == t3
    a, b = Fraction(3, 7), Fraction(-5, 4)
    assert mean_zero_parallel(mean_zero_parallel(t3, a), b) == mean_zero_parallel(t3, a + b)


def test_walk_values(t3):
    walk = Walk(t3, ((0, 0), (1, 1)))
    assert walk.length == 2
    assert walk.start == 0 and walk.end == 2
    assert walk.total == 11
    assert walk.mean == Fraction(11, 2)


def test_walk_must_chain(t3):
    with pytest.raises(GraphStructureError):
        Walk(t3, ((0, 0), (2, 0)))
    with pytest.raises(GraphStructureError):
        Walk(t3, ())


def test_cycle_report(t3):
    report = t3.cycle_report([1, 2], [1, 0])
    assert report.total == 13
    assert report.mean == Fraction(13, 2)
    assert report.length == 2
    assert report.describe() == "1 -> 2 -> 1"
    with pytest.raises(GraphStructureError):
        t3.cycle_report([0, 1], [1, 0])


def test_scc_decompose_examples(t3):
    assert scc_decompose(t3) == [[0, 1, 2]]
    chain = Graph([[(1, 0)], [(1, 0)]])
    assert scc_decompose(chain) == [[1], [0]]
    assert scc_decompose(Graph([[(0, 1)]])) == [[0]]


def test_scc_decompose_is_a_partition_of_mutually_reachable_sets():
    for seed in range(20):
        graph = gen_uniform_random(12, 16, seed)
        components = scc_decompose(graph)
        members = sorted(v for component in components for v in component)
        assert members == list(range(graph.n))

        digraph = nx.DiGraph()
        digraph.add_nodes_from(range(graph.n))
        digraph.add_edges_from((u, v) for u, _, v, _ in graph.edges())
        for component in components:
            for u in component:
                reach = nx.descendants(digraph, u) | {u}
                assert set(component) <= reach


def test_induced_subgraph_maps_ids():
    graph = Graph([[(1, 2), (2, 9)], [(0, 1)], [(2, 4)]])
    sub, members = induced_subgraph(graph, [0, 1])
    assert members == [0, 1]
    assert sub.out_edges(0) == ((1, 2),)
    none, _ = induced_subgraph(Graph([[(1, 0)], [(1, 0)]]), [0])
    assert none is None


def test_two_out_structure():
    graph = gen_two_out_random(5, 1)
    assert graph.m == 10
    for u, _, v, r in graph.edges():
        assert v != u
        assert 0 <= r < 1
    for u in range(graph.n):
        assert len(graph.out_edges(u)) == 2


def test_two_out_is_deterministic():
    assert gen_two_out_random(100, 1) == gen_two_out_random(100, 1)
    assert gen_two_out_random(100, 1) != gen_two_out_random(100, 2)


def test_two_out_large_rewards_in_range():
    graph = gen_two_out_random(1000, 7)
    assert all(0 <= r < 1 for _, _, _, r in graph.edges())


def test_two_out_degree_over_many_instances():
    for seed in range(100):
        n = 2 + seed % 30
        graph = gen_two_out_random(n, seed)
        assert all(len(graph.out_edges(u)) == 2 for u in range(n))


def test_two_out_same_instance_in_both_modes():
    exact = gen_two_out_random(20, 3)
    floating = gen_two_out_random(20, 3, field_for_mode("float"))
    for (_, _, v1, r1), (_, _, v2, r2) in zip(exact.edges(), floating.edges()):
        assert v1 == v2
        assert float(r1) == pytest.approx(r2)


def test_two_out_needs_two_vertices():
    with pytest.raises(GraphStructureError):
        gen_two_out_random(1, 0)


def test_uniform_random_gives_every_vertex_an_edge():
    graph = gen_uniform_random(10, 25, 5, max_denominator=8)
    assert graph.m == 25
    for _, _, _, r in graph.edges():
        assert -20 <= r <= 20
        assert r.denominator <= 8
    with pytest.raises(GraphStructureError):
        gen_uniform_random(5, 4, 0)


def test_worst_case_sizes_and_values():
    graph, values = gen_worst_case(4)
    assert graph.n == 10
    assert sorted(values) == [-64] * 9 + [0]

    small, _ = gen_worst_case(2)
    assert small.n == 4
    top = small.cycle_report([0, 1], [0, 1])
    assert top.total == 0

    with pytest.raises(GraphStructureError):
        gen_worst_case(1)


def test_exact_field_is_default(t3):
    assert t3.field == EXACT
