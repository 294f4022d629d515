"""Independent percolation ground truth.

Two routes that never touch the message-passing code: exhaustive enumeration
of edge-occupancy configurations on tiny graphs, and Newman-Ziff style
Monte Carlo simulation (random edge order + union-find, convolved with
binomial weights to convert occupation-number results to fixed-p results).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import Graph
from .unionfind import UnionFind
from .util import binomial_pmf

EXHAUSTIVE_EDGE_LIMIT = 20


@dataclass
class SimEstimate:
    """Per-p simulation estimates with standard errors over independent trials."""

    p: np.ndarray
    largest_fraction: np.ndarray
    largest_fraction_se: np.ndarray
    mean_cluster_size: np.ndarray
    mean_cluster_size_se: np.ndarray
    trials: int
    seed: int


def exhaustive_distribution(g: Graph, p: float, i: int) -> dict[int, float]:
    """Probability pi_i(s) that node i lies in a cluster of size s, by full
    enumeration of all 2^m edge-occupancy configurations. Sums to 1 exactly.
    """
    m = len(g.edges)
    if m > EXHAUSTIVE_EDGE_LIMIT:
        raise ValueError(f"graph has {m} edges; exhaustive limit is {EXHAUSTIVE_EDGE_LIMIT}")
    if not (0 <= i < g.n):
        raise ValueError(f"node {i} out of range")
    dist: dict[int, float] = {}
    for mask in range(1 << m):
        uf = UnionFind(g.n)
        k = 0
        for e in range(m):
            if (mask >> e) & 1:
                k += 1
                u, v, _ = g.edges[e]
                uf.union(u, v)
        w = p**k * (1.0 - p) ** (m - k)
        s = uf.cluster_size(i)
        dist[s] = dist.get(s, 0.0) + w
    return dist


def exhaustive_node_stats(g: Graph, p_values, z_values=()) -> dict:
    """All nodes' cluster statistics for many p in one enumeration pass.

    Accumulates by occupied-edge count, then weights with p^k (1-p)^(m-k)
    per requested p. Returns mean cluster size (shape P x n) and, for each z
    in z_values, the generating function H_i(z) (shape P x Z x n).
    """
    m = len(g.edges)
    if m > EXHAUSTIVE_EDGE_LIMIT:
        raise ValueError(f"graph has {m} edges; exhaustive limit is {EXHAUSTIVE_EDGE_LIMIT}")
    p_values = tuple(float(p) for p in p_values)
    z_values = tuple(float(z) for z in z_values)
    n = g.n
    nz = len(z_values)
    zpow = [[z**s for s in range(n + 1)] for z in z_values]
    msum = [[0.0] * n for _ in range(m + 1)]
    hsum = [[[0.0] * n for _ in range(nz)] for _ in range(m + 1)]
    edge_pairs = [(u, v) for u, v, _ in g.edges]
    for mask in range(1 << m):
        uf = UnionFind(n)
        k = 0
        for e in range(m):
            if (mask >> e) & 1:
                k += 1
                uf.union(*edge_pairs[e])
        mrow = msum[k]
        hrow = hsum[k]
        for i in range(n):
            s = uf.cluster_size(i)
            mrow[i] += s
            for zi in range(nz):
                hrow[zi][i] += zpow[zi][s]
    msum = np.asarray(msum)
    hsum = np.asarray(hsum)
    mean_s = np.zeros((len(p_values), n))
    h = np.zeros((len(p_values), nz, n))
    for pi, p in enumerate(p_values):
        w = np.array([p**k * (1.0 - p) ** (m - k) for k in range(m + 1)])
        mean_s[pi] = w @ msum
        for zi in range(nz):
            h[pi, zi] = w @ hsum[:, zi, :]
    return {"p_values": p_values, "z_values": z_values, "mean_s": mean_s, "h": h}


def simulate(g: Graph, p_grid, trials: int, seed: int) -> SimEstimate:
    """Newman-Ziff simulation over a p grid.

    Each trial adds the edges in a fresh random order, tracking after every
    addition the largest cluster and the node-averaged cluster size
    (sum of size^2 over clusters / n). Fixed-p values are binomial
    convolutions over the occupation number; errors are the standard error
    across trials.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p_grid = np.asarray(p_grid, dtype=float)
    m = len(g.edges)
    n = g.n
    edges_u = np.array([e[0] for e in g.edges], dtype=np.int64)
    edges_v = np.array([e[1] for e in g.edges], dtype=np.int64)
    # binomial weight matrix: rows p, cols occupation number
    weights = np.empty((len(p_grid), m + 1))
    for pi, p in enumerate(p_grid):
        weights[pi] = binomial_pmf(m, p)

    rng = np.random.default_rng(seed)
    parent = np.empty(n, dtype=np.int64)
    size = np.empty(n, dtype=np.int64)
    micro_largest = np.empty(m + 1)
    micro_sumsq = np.empty(m + 1)
    s_sum = np.zeros(len(p_grid))
    s_sumsq = np.zeros(len(p_grid))
    ms_sum = np.zeros(len(p_grid))
    ms_sumsq = np.zeros(len(p_grid))
    for _ in range(trials):
        order = rng.permutation(m).astype(np.int64)
        _kernels.nz_trial(n, edges_u, edges_v, order, parent, size, micro_largest, micro_sumsq)
        s_trial = weights @ micro_largest / n
        ms_trial = weights @ micro_sumsq / n
        s_sum += s_trial
        s_sumsq += s_trial**2
        ms_sum += ms_trial
        ms_sumsq += ms_trial**2

    s_mean = s_sum / trials
    ms_mean = ms_sum / trials
    if trials > 1:
        s_var = np.maximum(s_sumsq / trials - s_mean**2, 0.0) * trials / (trials - 1)
        ms_var = np.maximum(ms_sumsq / trials - ms_mean**2, 0.0) * trials / (trials - 1)
        s_se = np.sqrt(s_var / trials)
        ms_se = np.sqrt(ms_var / trials)
    else:
        s_se = np.zeros(len(p_grid))
        ms_se = np.zeros(len(p_grid))
    return SimEstimate(
        p=p_grid,
        largest_fraction=s_mean,
        largest_fraction_se=s_se,
        mean_cluster_size=ms_mean,
        mean_cluster_size_se=ms_se,
        trials=trials,
        seed=seed,
    )
