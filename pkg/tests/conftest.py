"""Shared fixtures: compile the numba kernels once before any timed test."""

from __future__ import annotations

import numpy as np
import pytest

import loopmp as lm
from loopmp.percolation import PercSolver


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Exercise every compiled kernel on toy inputs so that JIT compilation
    (cached on disk after the first run) never lands inside a timed test."""
    tri = lm.Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])
    topo = lm.build_topology(tri, 1)
    for estimator in ("exhaustive", "monte-carlo"):
        params = lm.PercParams(p=0.4, r=1, estimator=estimator, samples=2, seed=0)
        solver = PercSolver(tri, topo, params)
        state = solver.solve(1.0)
        solver.solve_derivatives(state)
        solver.node_mean_sizes(state)
    lm.simulate(tri, [0.5], trials=2, seed=0)
    lm.dense_eigenvalues(lm.to_dense(tri))
    params = lm.SpectralParams(r=1, eta=0.1, grid=np.array([0.0]))
    lm.spectral_density(tri, params)
    nb = lm.build_neighborhood(tri, 0, 1)
    trace = lm.build_G_trace(nb, samples=2, seed=0)
    lm.eval_G_mc(trace, nb, [0.5, 0.5], 0.4)
