"""Small graphs and reference implementations shared across the test suite."""

from itertools import combinations

import numpy as np

from cliquecut import Graph


def complete_graph(n: int, weight: float = 1.0) -> Graph:
    u, v = np.triu_indices(n, k=1)
    return Graph(n, u, v, np.full(u.size, weight))


def path_graph(n: int) -> Graph:
    u = np.arange(n - 1)
    return Graph(n, u, u + 1, np.ones(n - 1))


def two_triangles() -> Graph:
    """Triangles {0,1,2} and {3,4,5} joined by the bridge 2-3."""
    u = [0, 0, 1, 3, 3, 4, 2]
    v = [1, 2, 2, 4, 5, 5, 3]
    return Graph(6, u, v, np.ones(7))


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    edges = outer + spokes + inner
    return Graph(10, [a for a, _ in edges], [b for _, b in edges], np.ones(15))


def random_graph(rng: np.random.Generator, n: int, density: float = 0.4, weighted: bool = False) -> Graph:
    iu, iv = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < density
    u, v = iu[keep], iv[keep]
    w = rng.uniform(0.1, 1.0, u.size) if weighted else np.ones(u.size)
    return Graph(n, u, v, w)


def naive_max_clique(graph: Graph) -> tuple[float, tuple[int, ...]]:
    """Reference maximum-weight clique by full subset enumeration.

    Uses the same tie-breaking as the branch-and-bound version: weight, then
    size, then lexicographically smallest member tuple.
    """
    adj = graph.adjacency_matrix()
    best_w, best_size, best_tup = -1.0, 0, ()
    for size in range(graph.n + 1):
        for combo in combinations(range(graph.n), size):
            pairs = list(combinations(combo, 2))
            if any(adj[a, b] == 0.0 for a, b in pairs):
                continue
            w = 0.0
            for a, b in pairs:
                w += adj[a, b]
            if (
                w > best_w
                or (w == best_w and size > best_size)
                or (w == best_w and size == best_size and combo < best_tup)
            ):
                best_w, best_size, best_tup = w, size, combo
    return best_w, best_tup
