from typing import List

import numpy as np
import pytest

from app.dmdp.generators import gen_two_out_random, gen_uniform_random
from app.dmdp.graph import Graph, parse_edge_list

T3_TEXT = """# three-vertex reference instance
p dmdp 3 5
e 0 1 4
e 0 2 5
e 1 0 5
e 1 2 7
e 2 1 6
"""


def build_corpus(count: int, seed: int = 2024) -> List[Graph]:
    """
    Mixed random instances with 2 <= n <= 10.

    Two-out graphs alternate with uniform-m graphs whose rewards are integers
    in [-20, 20] or rationals with denominator up to 8.
    """
    rng = np.random.default_rng(seed)
    graphs = []
    for i in range(count):
        n = int(rng.integers(2, 11))
        instance_seed = int(rng.integers(0, 2**31))
        if i % 3 == 0:
            graphs.append(gen_two_out_random(n, instance_seed))
        else:
            m = int(rng.integers(n, 3 * n + 1))
            denominator = 1 if i % 3 == 1 else 8
            graphs.append(gen_uniform_random(n, m, instance_seed, max_denominator=denominator))
    return graphs


@pytest.fixture
def t3_text() -> str:
    return T3_TEXT


@pytest.fixture
def t3() -> Graph:
    graph, _ = parse_edge_list(T3_TEXT)
    return graph


@pytest.fixture
def self_loop() -> Graph:
    return Graph([[(0, 3)]])


@pytest.fixture(scope="session")
def corpus() -> List[Graph]:
    return build_corpus(60)


@pytest.fixture(scope="session")
def full_corpus() -> List[Graph]:
    return build_corpus(500)
