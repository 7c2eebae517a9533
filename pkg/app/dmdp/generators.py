"""
Instance generators: the two-out random model, the uniform-m corpus model and
the quadratic first-formation family.
"""

from typing import List, Optional, Tuple

import numpy as np

from app.core.exceptions import GraphStructureError
from app.core.logging_config import setup_logging
from app.core.settings import settings
from app.dmdp.graph import Graph
from app.dmdp.scalar import EXACT, Reward, RewardField

# Set up logging
logger = setup_logging(__name__)


def gen_two_out_random(n: int, seed: int, field: Optional[RewardField] = None) -> Graph:
    """
    Random graph with exactly two out-edges per vertex.

    Each target is drawn independently and uniformly from the other n - 1
    vertices (parallel edges possible, no self-loops). Rewards are
    ``k / REWARD_RESOLUTION`` with k uniform, i.e. uniform in [0, 1) on a grid
    fine enough for the experiments, and identical in exact and float mode.

    Args:
        n: Vertex count (at least 2)
        seed: Seed of the numpy generator
        field: Reward arithmetic (default: exact)

    Returns:
        The generated graph
    """
    if n < 2:
        raise GraphStructureError(f"The two-out model needs n >= 2, got {n}")
    field = field or EXACT
    resolution = settings.REWARD_RESOLUTION
    rng = np.random.default_rng(seed)

    targets = rng.integers(0, n - 1, size=(n, 2))
    # shift past the source so targets are uniform over the other vertices
    targets += targets >= np.arange(n)[:, None]
    numerators = rng.integers(0, resolution, size=(n, 2))

    adjacency = [
        [(int(targets[u, j]), field.ratio(int(numerators[u, j]), resolution)) for j in range(2)]
        for u in range(n)
    ]
    return Graph(adjacency, field)


def gen_uniform_random(
    n: int,
    m: int,
    seed: int,
    field: Optional[RewardField] = None,
    reward_range: Tuple[int, int] = (-20, 20),
    max_denominator: int = 1
) -> Graph:
    """
    Random graph with m edges, each vertex guaranteed one out-edge.

    The first n edges give every vertex an out-edge; the remaining m - n have
    uniform sources. Targets are uniform over all vertices (self-loops allowed).
    Rewards are ``a / d`` with a uniform in ``reward_range`` scaled by d and d
    uniform in [1, max_denominator].
    """
    if n < 1 or m < n:
        raise GraphStructureError(f"Need n >= 1 and m >= n, got n={n}, m={m}")
    field = field or EXACT
    rng = np.random.default_rng(seed)
    low, high = reward_range

    sources = np.concatenate([np.arange(n), rng.integers(0, n, size=m - n)])
    targets = rng.integers(0, n, size=m)
    denominators = rng.integers(1, max_denominator + 1, size=m)

    adjacency: List[list] = [[] for _ in range(n)]
    for u, v, d in zip(sources, targets, denominators):
        d = int(d)
        numerator = int(rng.integers(low * d, high * d + 1))
        adjacency[int(u)].append((int(v), field.ratio(numerator, d)))
    return Graph(adjacency, field)


def gen_worst_case(k: int, field: Optional[RewardField] = None) -> Tuple[Graph, List[Reward]]:
    """
    Slow first-formation family on 3k - 2 vertices.

    Layout: top row c_0..c_{k-1} (ids 0..k-1) is a zero-reward cycle, the only
    zero-mean cycle. Row A a_1..a_{k-1} (ids k..2k-2) hangs below the top row:
    every c_i with i >= 1 has a first-listed zero-reward edge down to a_i and
    row A runs left to right into the last vertex of row B. Row B
    b_1..b_{k-1} (ids 2k-1..3k-3) runs right to left down to s = b_1, which has
    a self-loop and an edge back to c_0, both of reward -k. Every other edge
    has reward 0. s starts at 0 and all other vertices at -k^3.

    Returns:
        The graph and the initial value vector
    """
    if k < 2:
        raise GraphStructureError(f"The worst-case family needs k >= 2, got {k}")
    field = field or EXACT
    zero = field.zero
    penalty = field.convert(-k)

    def top(i: int) -> int:
        return i

    def row_a(j: int) -> int:
        return k + j - 1

    def row_b(j: int) -> int:
        return 2 * k + j - 2

    s = row_b(1)
    adjacency: List[list] = [[] for _ in range(3 * k - 2)]
    for i in range(k):
        if i >= 1:
            adjacency[top(i)].append((row_a(i), zero))
        adjacency[top(i)].append((top((i + 1) % k), zero))
    for j in range(1, k - 1):
        adjacency[row_a(j)].append((row_a(j + 1), zero))
    adjacency[row_a(k - 1)].append((row_b(k - 1), zero))
    for j in range(2, k):
        adjacency[row_b(j)].append((row_b(j - 1), zero))
    adjacency[s].append((s, penalty))
    adjacency[s].append((top(0), penalty))

    values = [field.convert(-(k ** 3))] * (3 * k - 2)
    values[s] = zero
    graph = Graph(adjacency, field)
    logger.debug(f"Generated worst-case family k={k}: {graph}")
    return graph, values
