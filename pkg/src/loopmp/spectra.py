"""Message passing for the spectral density of sparse symmetric matrices.

Each message h_{i<-j}(z) is updated through the neighborhood matrix identity

    h_{i<-j} = v^T (D - A)^{-1} v + A_jj,   D_kk = z - h_{j<-k},

where v and A hold the weights of j's reduced neighborhood (v: edges from j,
A: edges among the other members). The same identity applied to the full
neighborhood of i gives H_i(z), and the density follows from
rho(x) = Im[-(1/(n pi)) sum_i 1/(z - H_i(z))] at z = x + i eta.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import Graph
from .neighborhoods import MessageTopology, build_topology


class SingularSystemError(RuntimeError):
    """The small neighborhood system (D - A) was singular."""


@dataclass
class SpectralParams:
    r: int
    eta: float
    grid: np.ndarray
    tol: float = 1e-10
    max_iter: int = 10_000

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or not np.all(np.isfinite(grid)):
            raise ValueError("grid must be a finite 1-d array")
        if np.any(np.diff(grid) < 0):
            raise ValueError("grid must be sorted ascending")
        self.grid = grid
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")


@dataclass
class SpectralMessageState:
    h: np.ndarray  # complex, per message
    iterations: int
    converged: bool


@dataclass
class DensityCurve:
    x: np.ndarray
    rho: np.ndarray
    eta: float
    r: int
    converged: np.ndarray  # per grid point
    iterations: np.ndarray  # per grid point


@dataclass
class _SpectralPlan:
    """Packed var-size plan: per target the member deps, spoke weights v,
    internal adjacency block A (row-major k*k), and the A_jj constant."""

    n_targets: int
    off_mem: np.ndarray
    dep: np.ndarray
    v: np.ndarray
    off_amat: np.ndarray
    amat: np.ndarray
    jj: np.ndarray
    max_k: int
    idx: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        if self.idx.size == 0:
            self.idx = np.arange(self.n_targets, dtype=np.int64)

    def nbytes(self) -> int:
        return sum(
            getattr(self, name).nbytes
            for name in ("off_mem", "dep", "v", "off_amat", "amat", "jj", "idx")
        )


def _build_spectral_plan(g: Graph, nbs, deps) -> _SpectralPlan:
    n_targets = len(nbs)
    off_mem = np.zeros(n_targets + 1, dtype=np.int64)
    off_amat = np.zeros(n_targets + 1, dtype=np.int64)
    for t, nb in enumerate(nbs):
        k = len(nb.nodes)
        off_mem[t + 1] = off_mem[t] + k
        off_amat[t + 1] = off_amat[t] + k * k
    dep = np.empty(off_mem[-1], dtype=np.int64)
    v = np.zeros(off_mem[-1])
    amat = np.zeros(off_amat[-1])
    jj = np.empty(n_targets)
    max_k = 1
    for t, nb in enumerate(nbs):
        k0 = off_mem[t]
        k = len(nb.nodes)
        max_k = max(max_k, k)
        dep[k0 : k0 + k] = deps[t]
        jj[t] = g.diag[nb.focal]
        index = nb.member_index()
        a0 = off_amat[t]
        for kk, node in enumerate(nb.nodes):
            if nb.direct[kk]:
                v[k0 + kk] = g.weight(nb.focal, node)
        for u, w_node in nb.internal_edges:
            a = index[u]
            b = index[w_node]
            w = g.weight(u, w_node)
            amat[a0 + a * k + b] = w
            amat[a0 + b * k + a] = w
    return _SpectralPlan(
        n_targets=n_targets,
        off_mem=off_mem,
        dep=dep,
        v=v,
        off_amat=off_amat,
        amat=amat,
        jj=jj,
        max_k=max_k,
    )


def _sweep(plan: _SpectralPlan, hsrc: np.ndarray, z: complex, h_prev: np.ndarray):
    out = np.empty(plan.n_targets, dtype=np.complex128)
    flags = np.zeros(plan.n_targets, dtype=np.uint8)
    _kernels.spectral_sweep(
        hsrc, z, plan.idx, plan.off_mem, plan.dep, plan.v, plan.off_amat,
        plan.amat, plan.jj, h_prev, plan.max_k, out, flags,
    )
    return out, flags


class SpectralSolver:
    """Packed message and node plans for one (graph, topology) pair."""

    def __init__(self, g: Graph, topo: MessageTopology):
        self.g = g
        self.topo = topo
        self.msg_plan = _build_spectral_plan(g, topo.reduced, topo.deps)
        index = topo.index()
        node_deps = [
            np.array([index[(i, k)] for k in topo.neighborhoods[i].nodes], dtype=np.int64)
            for i in range(g.n)
        ]
        self.node_plan = _build_spectral_plan(g, topo.neighborhoods, node_deps)

    def solve(self, z: complex, tol: float, max_iter: int, h0=None) -> SpectralMessageState:
        n_msg = self.msg_plan.n_targets
        h = np.zeros(n_msg, dtype=np.complex128) if h0 is None else h0.copy()
        iterations = 0
        converged = n_msg == 0
        for iterations in range(1, max_iter + 1):
            update, _ = _sweep(self.msg_plan, h, z, h)
            delta = float(np.max(np.abs(update - h))) if n_msg else 0.0
            h = update
            if delta < tol:
                converged = True
                break
        if n_msg == 0:
            iterations = 0
        return SpectralMessageState(h=h, iterations=iterations, converged=converged)

    def node_values(self, state: SpectralMessageState, z: complex) -> np.ndarray:
        prev = np.zeros(self.node_plan.n_targets, dtype=np.complex128)
        values, flags = _sweep(self.node_plan, state.h, z, prev)
        if np.any(flags):
            bad = int(np.flatnonzero(flags)[0])
            raise SingularSystemError(f"singular neighborhood system at node {bad}")
        return values

    def density_at(self, state: SpectralMessageState, z: complex) -> float:
        h_nodes = self.node_values(state, z)
        return float(np.imag(-np.mean(1.0 / (z - h_nodes)) / np.pi))


def update_message(g: Graph, topo: MessageTopology, h: np.ndarray, z: complex, i: int, j: int) -> complex:
    """One message update via the matrix identity, done with small dense
    numpy arrays for clarity (the sweep path uses the packed kernel)."""
    t = topo.index()[(i, j)]
    nb = topo.reduced[t]
    k = len(nb.nodes)
    if k == 0:
        return complex(g.diag[j])
    index = nb.member_index()
    v = np.zeros(k, dtype=np.complex128)
    a = np.zeros((k, k), dtype=np.complex128)
    for kk, node in enumerate(nb.nodes):
        if nb.direct[kk]:
            v[kk] = g.weight(j, node)
    for u, w_node in nb.internal_edges:
        w = g.weight(u, w_node)
        a[index[u], index[w_node]] = w
        a[index[w_node], index[u]] = w
    d = np.diag([z - h[dep] for dep in topo.deps[t]])
    try:
        sol = np.linalg.solve(d - a, v)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"singular system for message ({i}<-{j})") from exc
    return complex(v @ sol + g.diag[j])


def solve_spectral_messages(
    g: Graph, topo: MessageTopology, params: SpectralParams, z: complex, h0=None
) -> SpectralMessageState:
    """Iterate all messages at a single complex z to the fixed point."""
    solver = SpectralSolver(g, topo)
    return solver.solve(z, params.tol, params.max_iter, h0=h0)


def node_H(g: Graph, topo: MessageTopology, state: SpectralMessageState, i: int, z: complex) -> complex:
    """H_i(z) from the converged messages, by the same identity applied to
    the full neighborhood of i."""
    solver = SpectralSolver(g, topo)
    return complex(solver.node_values(state, z)[i])


def spectral_density(g: Graph, params: SpectralParams, topo: MessageTopology | None = None) -> DensityCurve:
    """Sampled spectral density over params.grid at broadening params.eta.

    Messages are warm-started from the previous grid point; per-point
    convergence is recorded in the returned curve and a failed point does
    not abort the sweep.
    """
    if topo is None:
        topo = build_topology(g, params.r)
    if topo.r != params.r:
        raise ValueError(f"topology built at r={topo.r}, params.r={params.r}")
    solver = SpectralSolver(g, topo)
    grid = params.grid
    rho = np.empty(len(grid))
    converged = np.zeros(len(grid), dtype=bool)
    iterations = np.zeros(len(grid), dtype=np.int64)
    h_warm = None
    for gi, x in enumerate(grid):
        z = complex(x, params.eta)
        state = solver.solve(z, params.tol, params.max_iter, h0=h_warm)
        h_warm = state.h
        try:
            rho[gi] = solver.density_at(state, z)
            converged[gi] = state.converged
        except SingularSystemError:
            rho[gi] = float("nan")
            converged[gi] = False
        iterations[gi] = state.iterations
    return DensityCurve(x=grid, rho=rho, eta=params.eta, r=params.r, converged=converged, iterations=iterations)
