import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import loopmp as lm
from loopmp.percolation_sim import exhaustive_node_stats
from tests.graphgen import k2, path_graph, random_connected_graph, triangle


def test_exhaustive_k2():
    assert lm.exhaustive_distribution(k2(), 0.5, 0) == {1: 0.5, 2: 0.5}


def test_exhaustive_triangle():
    dist = lm.exhaustive_distribution(triangle(), 0.5, 0)
    assert dist[1] == pytest.approx(0.25)
    assert dist[2] == pytest.approx(0.25)
    assert dist[3] == pytest.approx(0.5)


def test_exhaustive_path():
    p = 0.3
    dist = lm.exhaustive_distribution(path_graph(3), p, 0)
    assert dist[1] == pytest.approx(1 - p)
    assert dist[2] == pytest.approx(p * (1 - p))
    assert dist[3] == pytest.approx(p * p)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_exhaustive_sums_to_one(seed, p):
    g = random_connected_graph(6, 3, np.random.default_rng(seed))
    dist = lm.exhaustive_distribution(g, p, 0)
    assert abs(sum(dist.values()) - 1.0) < 1e-12


def test_exhaustive_guard():
    g = random_connected_graph(30, 40, np.random.default_rng(0))
    with pytest.raises(ValueError, match="exhaustive"):
        lm.exhaustive_distribution(g, 0.5, 0)


def test_node_stats_matches_distribution():
    g = random_connected_graph(6, 3, np.random.default_rng(42))
    p, z = 0.4, 0.5
    stats = exhaustive_node_stats(g, [p], z_values=(z,))
    for i in range(g.n):
        dist = lm.exhaustive_distribution(g, p, i)
        assert stats["mean_s"][0][i] == pytest.approx(sum(s * w for s, w in dist.items()), abs=1e-12)
        assert stats["h"][0][0][i] == pytest.approx(sum(w * z**s for s, w in dist.items()), abs=1e-12)


def test_simulate_p_zero_and_one():
    g = triangle()
    est = lm.simulate(g, [0.0, 1.0], trials=500, seed=3)
    assert est.largest_fraction[0] == pytest.approx(1 / 3, abs=1e-9)
    assert est.mean_cluster_size[0] == pytest.approx(1.0, abs=1e-9)
    assert est.largest_fraction_se[0] < 1e-6
    assert est.largest_fraction[1] == pytest.approx(1.0, abs=1e-12)
    assert est.mean_cluster_size[1] == pytest.approx(3.0, abs=1e-12)


def test_simulate_triangle_mean_size_exact():
    # every edge order of the triangle yields the same microcanonical curves,
    # so the p=1/2 node-averaged cluster size is exactly 9/4 with zero spread
    est = lm.simulate(triangle(), [0.5], trials=10_000, seed=8)
    assert est.mean_cluster_size[0] == pytest.approx(2.25, abs=1e-12)
    assert est.mean_cluster_size_se[0] < 1e-9


def test_simulate_matches_exhaustive_within_4se():
    g = random_connected_graph(7, 4, np.random.default_rng(6))
    p_values = [0.3, 0.6]
    est = lm.simulate(g, p_values, trials=20_000, seed=11)
    stats = exhaustive_node_stats(g, p_values)
    for pi in range(len(p_values)):
        exact_mean = float(np.mean(stats["mean_s"][pi]))
        assert abs(est.mean_cluster_size[pi] - exact_mean) <= 4 * est.mean_cluster_size_se[pi] + 1e-9


def test_simulate_determinism():
    g = triangle()
    a = lm.simulate(g, [0.4], trials=100, seed=9)
    b = lm.simulate(g, [0.4], trials=100, seed=9)
    assert np.array_equal(a.largest_fraction, b.largest_fraction)
    assert np.array_equal(a.mean_cluster_size, b.mean_cluster_size)


def test_simulate_fractions_in_unit_interval():
    g = random_connected_graph(10, 5, np.random.default_rng(1))
    est = lm.simulate(g, np.linspace(0, 1, 5), trials=200, seed=2)
    assert np.all(est.largest_fraction >= 0) and np.all(est.largest_fraction <= 1)
