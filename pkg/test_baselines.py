from fractions import Fraction

import pytest

from app.core.exceptions import OracleLimitError
from app.dmdp.generators import gen_two_out_random
from app.dmdp.graph import Graph, induced_subgraph, scc_decompose
from app.dmdp.scalar import field_for_mode
from app.experiments.detection import find_in_history, find_in_policy
from app.solvers.baselines import _predecessor_cycle, bf_positive_cycle, karp_mean, oracle_enumerate
from app.solvers.history_walk import run_history_walk
from app.solvers.phased import CLASSIC, ZERO_RESET, augmented_vi, phased_policy_iteration
from app.solvers.registry import solve


def test_oracle_self_loop():
    result = oracle_enumerate(Graph([[(0, 3)]]))
    assert result.mean == 3
    assert result.cycles_examined == 1


def test_oracle_t3(t3):
    result = oracle_enumerate(t3)
    assert result.mean == Fraction(13, 2)
    assert result.cycle.vertices == (1, 2)
    # 0 -> 1 -> 0, 1 -> 2 -> 1 and 0 -> 2 -> 1 -> 0
    assert result.cycles_examined == 3


def test_oracle_disjoint_self_loops():
    graph = Graph([[(0, 1)], [(1, 2)]])
    assert oracle_enumerate(graph).mean == 2


def test_oracle_uses_best_parallel_edge():
    graph = Graph([[(1, 1), (1, 5)], [(0, 1)]])
    result = oracle_enumerate(graph)
    assert result.mean == 3
    assert result.cycle.edges == (1, 0)


def test_oracle_size_guard():
    with pytest.raises(OracleLimitError):
        oracle_enumerate(gen_two_out_random(15, 0))
    assert oracle_enumerate(gen_two_out_random(15, 0), max_n=15).cycles_examined > 0


def test_karp_examples(t3):
    assert karp_mean(Graph([[(0, 3)]])) == 3
    assert karp_mean(t3) == Fraction(13, 2)


def test_karp_skips_acyclic_components():
    # vertex 0 is its own acyclic component feeding the loop at 1
    graph = Graph([[(1, 100)], [(1, -2)]])
    assert karp_mean(graph) == -2


def test_bf_positive_cycle_t3(t3):
    assert not bf_positive_cycle(t3, Fraction(13, 2))
    assert bf_positive_cycle(t3, 6)
    assert bf_positive_cycle(t3, "25/4")
    assert not bf_positive_cycle(t3, 7)


def test_bf_positive_cycle_float_mode(t3):
    floating = t3.with_field(field_for_mode("float"))
    assert not bf_positive_cycle(floating, 6.5)
    assert bf_positive_cycle(floating, 6.4)


class CountingGraph(Graph):
    """Graph that counts out-edge scans."""

    def __init__(self, adjacency):
        super().__init__(adjacency)
        self.scans = 0

    def out_edges(self, u):
        self.scans += 1
        return super().out_edges(u)


def test_predecessor_cycle():
    assert not _predecessor_cycle([None, 0, 1])
    assert _predecessor_cycle([1, 0, 1])
    assert _predecessor_cycle([None, 2, 1])
    assert _predecessor_cycle([0])


def test_bf_stops_early_on_positive_cycle_with_long_tail():
    # 0 <-> 1 has mean 1; the tail 2 -> ... -> n-1 grows with every lap of the cycle
    n = 2000
    adjacency = [[(1, 1)], [(0, 1), (2, 0)]]
    adjacency += [[(v + 1, 0)] for v in range(2, n - 1)]
    adjacency.append([(n - 1, -100)])
    graph = CountingGraph(adjacency)
    assert bf_positive_cycle(graph, Fraction(1, 2))
    assert graph.scans <= 10 * n


def _check_agreement(graphs):
    quarter = Fraction(1, 4)
    for graph in graphs:
        mu = oracle_enumerate(graph).mean
        assert karp_mean(graph) == mu
        assert run_history_walk(graph).mean == mu
        assert augmented_vi(graph).mean == mu
        assert phased_policy_iteration(graph, CLASSIC).mean == mu
        assert phased_policy_iteration(graph, ZERO_RESET).mean == mu
        assert find_in_policy(graph).mean == mu
        assert find_in_history(graph).mean == mu
        assert solve(graph, "vi").mean == mu

        assert bf_positive_cycle(graph, mu - quarter)
        assert not bf_positive_cycle(graph, mu)
        assert not bf_positive_cycle(graph, mu + quarter)


def test_solvers_agree_with_oracle(corpus):
    _check_agreement(corpus)


@pytest.mark.slow
def test_solvers_agree_with_oracle_full_corpus(full_corpus):
    _check_agreement(full_corpus)


def test_bf_is_monotone_around_optimum(corpus):
    for graph in corpus[:20]:
        mu = oracle_enumerate(graph).mean
        for q in (3, 7, 16):
            assert bf_positive_cycle(graph, mu - Fraction(1, q))
            assert not bf_positive_cycle(graph, mu + Fraction(1, q))


def test_karp_per_component_matches_oracle(corpus):
    checked = 0
    for graph in corpus:
        if len(scc_decompose(graph)) == 1:
            continue
        checked += 1
        assert karp_mean(graph) == oracle_enumerate(graph).mean
        for component in scc_decompose(graph):
            sub, _ = induced_subgraph(graph, component)
            if sub is not None:
                assert karp_mean(sub) <= karp_mean(graph)
    assert checked > 0
