import numpy as np
import pytest

from loopmp import ExhaustiveBudgetError, build_G_trace, build_neighborhood, eval_G_exhaustive, eval_G_mc
from loopmp.genfunc import eval_G_exact
from tests.graphgen import complete_graph, path_graph, random_connected_graph, star_graph, triangle


def tri_nb():
    return build_neighborhood(triangle(), 0, 1)


def test_single_spoke_bernoulli():
    nb = build_neighborhood(path_graph(2), 0, 0)
    for p in (0.0, 0.3, 1.0):
        for y1 in (0.0, 0.4, 1.0):
            res = eval_G_exhaustive(nb, [y1], p)
            assert res.value == pytest.approx((1 - p) + p * y1, abs=1e-15)
            assert res.grad[0] == pytest.approx(p, abs=1e-15)


def test_g_at_ones_is_one():
    nb = build_neighborhood(star_graph(2), 0, 1)
    assert eval_G_exhaustive(nb, [1.0, 1.0], 0.5).value == pytest.approx(1.0, abs=1e-15)


def test_triangle_polynomial():
    # enumerating the 8 configurations of edges (01),(02),(12) at p=1/2:
    # G(y1,y2) = 1/4 + 1/8 y1 + 1/8 y2 + 1/2 y1 y2
    nb = tri_nb()
    res = eval_G_exhaustive(nb, [1.0, 0.0], 0.5)
    assert res.value == pytest.approx(0.375, abs=1e-15)
    assert res.grad == pytest.approx([0.125, 0.625], abs=1e-15)
    assert eval_G_exhaustive(nb, [1.0, 1.0], 0.5).value == pytest.approx(1.0, abs=1e-15)
    assert eval_G_exhaustive(nb, [0.0, 0.0], 0.5).value == pytest.approx(0.25, abs=1e-15)


def test_exhaustive_budget():
    g = complete_graph(8)  # 28 edges
    nb = build_neighborhood(g, 0, 1)
    with pytest.raises(ExhaustiveBudgetError):
        eval_G_exhaustive(nb, np.ones(len(nb.nodes)), 0.5)


def test_exact_matches_exhaustive_on_random_neighborhoods():
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 12:
        g = random_connected_graph(8, 4, rng)
        i = int(rng.integers(0, g.n))
        nb = build_neighborhood(g, i, int(rng.integers(0, 3)))
        if len(nb.edges) > 14 or not nb.nodes:
            continue
        y = rng.uniform(0, 1, size=len(nb.nodes))
        if checked % 3 == 0 and len(y) > 1:
            y[0] = 0.0  # exercise the zero-y path
        p = float(rng.uniform(0.05, 0.95))
        a = eval_G_exhaustive(nb, y, p)
        b = eval_G_exact(nb, y, p)
        assert b.value == pytest.approx(a.value, abs=1e-12)
        assert b.grad == pytest.approx(a.grad, abs=1e-12)
        checked += 1


def test_trace_triangle_single_internal_edge():
    tr = build_G_trace(tri_nb(), samples=5, seed=9)
    assert tr.m == 1
    assert np.all(tr.keep >= 0)  # the only edge always merges {1},{2}


def test_trace_tree_empty():
    nb = build_neighborhood(star_graph(3), 0, 2)
    tr = build_G_trace(nb, samples=3, seed=0)
    assert tr.m == 0
    assert tr.keep.shape == (3, 0)


def test_trace_k4_third_merge_noop():
    nb = build_neighborhood(complete_graph(4), 0, 1)
    tr = build_G_trace(nb, samples=6, seed=2)
    assert tr.m == 3
    for s in range(6):
        assert list(tr.keep[s][:2] >= 0) == [True, True]
        assert tr.keep[s][2] == -1  # three nodes are joined after two merges


def test_mc_tree_closed_form_zero_variance():
    nb = build_neighborhood(star_graph(3), 0, 0)
    p = 0.6
    y = np.array([0.3, 0.7, 1.0])
    expected = float(np.prod((1 - p) + p * y))
    for seed in (0, 1, 2):
        tr = build_G_trace(nb, samples=1, seed=seed)
        assert eval_G_mc(tr, nb, y, p).value == pytest.approx(expected, abs=1e-15)


def test_mc_triangle_exact_cases():
    nb = tri_nb()
    tr = build_G_trace(nb, samples=1, seed=3)
    assert eval_G_mc(tr, nb, [1.0, 1.0], 0.77).value == pytest.approx(1.0, abs=1e-15)
    assert eval_G_mc(tr, nb, [1.0, 0.0], 0.5).value == pytest.approx(0.375, abs=1e-15)


def test_mc_unbiased_against_exhaustive():
    rng = np.random.default_rng(13)
    g = random_connected_graph(9, 5, rng)
    nb = build_neighborhood(g, 0, 2)
    assert len(nb.internal_edges) >= 2
    y = rng.uniform(0.1, 1.0, size=len(nb.nodes))
    p = 0.45
    exact = eval_G_exhaustive(nb, y, p).value
    batch_means = []
    for b in range(20):
        tr = build_G_trace(nb, samples=500, seed=100 + b)
        batch_means.append(eval_G_mc(tr, nb, y, p).value)
    batch_means = np.array(batch_means)
    se = batch_means.std(ddof=1) / np.sqrt(len(batch_means))
    assert abs(batch_means.mean() - exact) <= 4 * se + 1e-12


def test_mc_grad_matches_finite_differences_same_trace():
    rng = np.random.default_rng(17)
    g = random_connected_graph(9, 5, rng)
    nb = build_neighborhood(g, 0, 2)
    y = rng.uniform(0.15, 0.85, size=len(nb.nodes))
    p = 0.5
    tr = build_G_trace(nb, samples=32, seed=8)
    res = eval_G_mc(tr, nb, y, p)
    eps = 1e-5
    for j in range(len(y)):
        yp, ym = y.copy(), y.copy()
        yp[j] += eps
        ym[j] -= eps
        fd = (eval_G_mc(tr, nb, yp, p).value - eval_G_mc(tr, nb, ym, p).value) / (2 * eps)
        assert abs(fd - res.grad[j]) <= 1e-6 * max(1.0, abs(res.grad[j]))


def test_g_monotone_in_each_argument():
    rng = np.random.default_rng(23)
    g = random_connected_graph(8, 4, rng)
    nb = build_neighborhood(g, 1, 1)
    y = rng.uniform(0, 1, size=len(nb.nodes))
    base = eval_G_exhaustive(nb, y, 0.4).value
    for j in range(len(y)):
        y2 = y.copy()
        y2[j] = min(1.0, y2[j] + 0.2)
        assert eval_G_exhaustive(nb, y2, 0.4).value >= base - 1e-12


def test_mc_grad_with_zero_arguments():
    # triangle MC is exact (one internal edge), so gradients at y with zeros
    # must match the exhaustive enumeration exactly
    nb = tri_nb()
    tr = build_G_trace(nb, samples=3, seed=1)
    for y in ([0.5, 0.0], [0.0, 0.0], [0.0, 1.0]):
        a = eval_G_exhaustive(nb, y, 0.6)
        b = eval_G_mc(tr, nb, y, 0.6)
        assert b.value == pytest.approx(a.value, abs=1e-14)
        assert b.grad == pytest.approx(a.grad, abs=1e-14)


def test_trace_determinism():
    nb = tri_nb()
    a = build_G_trace(nb, samples=4, seed=42)
    b = build_G_trace(nb, samples=4, seed=42)
    assert np.array_equal(a.edge_orders, b.edge_orders)
    assert np.array_equal(a.keep, b.keep)
    assert np.array_equal(a.absorb, b.absorb)
