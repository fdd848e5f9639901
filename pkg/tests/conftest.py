import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from maxqap.instances import BInstance, ListInstance, WeightedGraph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_graph(n, rng, hi=9):
    w = np.triu(rng.integers(0, hi + 1, size=(n, n)), 1).astype(float)
    return WeightedGraph(w + w.T)


def random_list_instance(n, k, rng, hi=9):
    g, h = random_graph(n, rng, hi), random_graph(n, rng, hi)
    lists = []
    for _ in range(n):
        drop = set(rng.choice(n, size=k, replace=False).tolist()) if k else set()
        lists.append(frozenset(range(n)) - drop)
    return ListInstance(g, h, tuple(lists))


def random_b_instance(n, b, rng, hi=9):
    return BInstance(random_graph(n, rng, hi), random_graph(n, rng, hi), b)


@pytest.fixture
def two_node():
    """wG(0,1) = 3, wH(0,1) = 5."""
    return WeightedGraph([[0, 3], [3, 0]]), WeightedGraph([[0, 5], [5, 0]])


def three_sigma(p, trials):
    return 3.0 * np.sqrt(p * (1 - p) / trials)
