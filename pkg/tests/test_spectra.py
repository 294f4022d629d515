import numpy as np
import pytest

import loopmp as lm
from loopmp.spectra import SpectralSolver, update_message
from tests.graphgen import cycle_graph, k2, path_graph, triangle, triangle_tree


def density_error(g, r, eta, grid, tol=1e-10):
    params = lm.SpectralParams(r=r, eta=eta, grid=grid, tol=tol)
    curve = lm.spectral_density(g, params)
    assert curve.converged.all()
    oracle = lm.smoothed_density(lm.dense_eigenvalues(lm.to_dense(g)), grid, eta)
    return float(np.max(np.abs(curve.rho - oracle))), curve


def test_update_message_leaf_zero():
    g = path_graph(2)
    topo = lm.build_topology(g, 0)
    h = np.zeros(2, dtype=complex)
    assert update_message(g, topo, h, 2 + 0.1j, 0, 1) == 0.0


def test_update_message_k2_diag():
    g = lm.load_matrix_triplets("0 1 1.0\n1 1 3.5")
    topo = lm.build_topology(g, 1)
    h = np.zeros(2, dtype=complex)
    assert update_message(g, topo, h, 1 + 0.1j, 0, 1) == pytest.approx(3.5)


def test_update_message_path_inverse_z():
    g = path_graph(3)
    topo = lm.build_topology(g, 0)
    z = 1.7 + 0.3j
    params = lm.SpectralParams(r=0, eta=0.3, grid=np.array([1.7]), tol=1e-13)
    st = lm.solve_spectral_messages(g, topo, params, z)
    idx = topo.index()
    assert st.h[idx[(0, 1)]] == pytest.approx(1 / z, abs=1e-10)
    assert update_message(g, topo, st.h, z, 0, 1) == pytest.approx(1 / z, abs=1e-10)


def test_update_message_agrees_with_kernel_sweep():
    g = triangle_tree(5, 2, np.random.default_rng(2))
    topo = lm.build_topology(g, 1)
    solver = SpectralSolver(g, topo)
    z = 0.9 + 0.05j
    st = solver.solve(z, 1e-10, 2000)
    for t, (i, j) in enumerate(topo.messages):
        assert update_message(g, topo, st.h, z, i, j) == pytest.approx(st.h[t], abs=1e-8)


def test_solve_single_node_vacuous():
    g = lm.Graph.from_edges(1, [])
    topo = lm.build_topology(g, 0)
    params = lm.SpectralParams(r=0, eta=0.1, grid=np.array([0.0]))
    st = lm.solve_spectral_messages(g, topo, params, 0.5 + 0.1j)
    assert st.converged and len(st.h) == 0


def test_k2_messages_zero():
    g = k2()
    topo = lm.build_topology(g, 0)
    params = lm.SpectralParams(r=0, eta=0.1, grid=np.array([0.0]))
    st = lm.solve_spectral_messages(g, topo, params, 0.4 + 0.1j)
    assert np.allclose(st.h, 0.0)
    assert st.iterations <= 2


def test_long_cycle_cavity_fixed_point():
    g = cycle_graph(100)
    topo = lm.build_topology(g, 0)
    z = 3 + 0.05j
    params = lm.SpectralParams(r=0, eta=0.05, grid=np.array([3.0]), tol=1e-12)
    st = lm.solve_spectral_messages(g, topo, params, z)
    root = (z - np.sqrt(z * z - 4)) / 2
    assert np.allclose(st.h, root, atol=1e-6)


def test_node_h_isolated_and_k2():
    g = lm.load_matrix_triplets("0 0 2.5\n1 2 1.0")
    topo = lm.build_topology(g, 0)
    params = lm.SpectralParams(r=0, eta=0.1, grid=np.array([0.0]))
    z = 0.3 + 0.1j
    st = lm.solve_spectral_messages(g, topo, params, z)
    assert lm.node_H(g, topo, st, 0, z) == pytest.approx(2.5)
    assert lm.node_H(g, topo, st, 1, z) == pytest.approx(1 / z, abs=1e-10)


def test_node_h_triangle_closed_form():
    g = triangle()
    topo = lm.build_topology(g, 1)
    z = 0.7 + 0.02j
    params = lm.SpectralParams(r=1, eta=0.02, grid=np.array([0.7]), tol=1e-13)
    st = lm.solve_spectral_messages(g, topo, params, z)
    assert lm.node_H(g, topo, st, 0, z) == pytest.approx(2 / (z - 1), abs=1e-10)


def test_density_single_node_lorentzian():
    g = lm.Graph.from_edges(1, [])
    eta = 0.04
    grid = np.array([-0.2, 0.0, 0.3])
    params = lm.SpectralParams(r=0, eta=eta, grid=grid)
    curve = lm.spectral_density(g, params)
    expected = eta / np.pi / (grid**2 + eta**2)
    assert curve.rho == pytest.approx(expected, rel=1e-10)


def test_density_k2_peaks():
    grid = np.arange(-2, 2.001, 0.01)
    err, curve = density_error(k2(), 0, 0.01, grid)
    assert err < 1e-8
    peaks = grid[np.argsort(curve.rho)[-2:]]
    assert sorted(np.round(np.abs(peaks), 2)) == [1.0, 1.0]


def test_density_triangle_peak_ratio():
    grid = np.array([-1.0, 2.0])
    params = lm.SpectralParams(r=1, eta=0.01, grid=grid)
    curve = lm.spectral_density(triangle(), params)
    # eigenvalues -1 (doubled) and 2: peak heights 2:1
    assert curve.rho[0] / curve.rho[1] == pytest.approx(2.0, rel=1e-3)


def test_exactness_p50_and_triangle_trees():
    grid = np.arange(-2.5, 2.501, 0.05)
    err, _ = density_error(path_graph(50), 0, 0.05, grid)
    assert err <= 1e-6
    g = triangle_tree(8, 3, np.random.default_rng(5))
    grid = np.arange(-3.5, 3.501, 0.05)
    err, _ = density_error(g, 1, 0.05, grid)
    assert err <= 1e-6
    lap = lm.laplacian(g)
    grid = np.arange(-1.0, 8.001, 0.05)
    err, _ = density_error(lap, 1, 0.05, grid)
    assert err <= 1e-6


def test_density_nonnegative_and_normalized():
    g = triangle_tree(7, 2, np.random.default_rng(10))
    eigs = lm.dense_eigenvalues(lm.to_dense(g))
    eta = 0.05
    grid = np.arange(eigs.min() - 50 * eta, eigs.max() + 50 * eta, eta / 3)
    params = lm.SpectralParams(r=1, eta=eta, grid=grid)
    curve = lm.spectral_density(g, params)
    assert np.all(curve.rho >= -1e-9)
    integral = np.trapezoid(curve.rho, grid)
    assert 0.97 <= integral <= 1.0


def test_hermitian_symmetry():
    g = triangle_tree(6, 2, np.random.default_rng(13))
    topo = lm.build_topology(g, 1)
    params = lm.SpectralParams(r=1, eta=0.08, grid=np.array([0.4]), tol=1e-12)
    z = 0.4 + 0.08j
    up = lm.solve_spectral_messages(g, topo, params, z)
    down = lm.solve_spectral_messages(g, topo, params, np.conj(z))
    assert np.allclose(up.h, np.conj(down.h), atol=1e-9)


def test_weight_scaling_property():
    # rho_A(x) = c * rho_{cA}(c x) with eta scaled by c
    g = triangle_tree(6, 2, np.random.default_rng(14))
    c = 2.5
    scaled = lm.Graph.from_edges(g.n, [(u, v, c * w) for u, v, w in g.edges])
    grid = np.arange(-3, 3.001, 0.1)
    params = lm.SpectralParams(r=1, eta=0.05, grid=grid)
    base = lm.spectral_density(g, params)
    params_c = lm.SpectralParams(r=1, eta=0.05 * c, grid=c * grid)
    curve_c = lm.spectral_density(scaled, params_c)
    assert base.rho == pytest.approx(c * curve_c.rho, abs=1e-8)


def test_warm_start_equals_cold_start():
    g = triangle_tree(6, 2, np.random.default_rng(15))
    topo = lm.build_topology(g, 1)
    solver = SpectralSolver(g, topo)
    z1, z2 = 0.5 + 0.05j, 0.55 + 0.05j
    cold = solver.solve(z2, 1e-12, 5000)
    warm = solver.solve(z2, 1e-12, 5000, h0=solver.solve(z1, 1e-12, 5000).h)
    assert np.allclose(cold.h, warm.h, atol=1e-9)


def test_params_validation():
    with pytest.raises(ValueError):
        lm.SpectralParams(r=0, eta=0.0, grid=np.array([0.0]))
    with pytest.raises(ValueError):
        lm.SpectralParams(r=0, eta=0.1, grid=np.array([1.0, 0.0]))
