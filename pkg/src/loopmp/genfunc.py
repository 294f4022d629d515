"""Neighborhood generating functions G(y) for bond percolation.

G is the occupancy-averaged product of y_j over members j reachable from the
focal node inside a neighborhood. Three routes are provided:

* :func:`eval_G_exhaustive` enumerates all 2^m configurations of every edge
  in the neighborhood and tests reachability directly; it is the slow,
  self-evidently-correct reference.
* the exact solver path enumerates only the internal-edge configurations and
  multiplies per-cluster spoke factors (identical value, exponent in the
  internal edge count only).
* :func:`eval_G_mc` replays the fixed union-find merge scripts of a
  :class:`GTrace` (one random internal-edge order per sample) and forms the
  binomially weighted estimate; scripts are reused across evaluations, so
  repeated calls with the same trace are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .neighborhoods import NeighborhoodSet
from .util import binomial_pmf

EXHAUSTIVE_EDGE_BUDGET = 20


class ExhaustiveBudgetError(ValueError):
    """Neighborhood too large for full enumeration; use the Monte Carlo path."""


@dataclass
class GResult:
    value: float
    grad: np.ndarray  # per member, aligned with the neighborhood's nodes


@dataclass
class GTrace:
    """Frozen Monte Carlo sampling plan for one neighborhood.

    edge_orders[s] is the s-th random permutation of the internal edges;
    keep/absorb[s, m] are the surviving and absorbed cluster roots
    (member-local) of the m-th merge, or -1/-1 when the edge closed a cycle
    inside an existing cluster. Scripts do not depend on p, z, or y.
    """

    m: int
    samples: int
    internal: tuple[tuple[int, int], ...]
    edge_orders: np.ndarray
    keep: np.ndarray
    absorb: np.ndarray
    direct: tuple[bool, ...]


def eval_G_exhaustive(nb: NeighborhoodSet, y, p: float, budget: int = EXHAUSTIVE_EDGE_BUDGET) -> GResult:
    """G and its gradient by enumerating every edge configuration.

    Sums p^k (1-p)^(m-k) * prod of y over members reachable from the focal
    node, over all 2^m subsets of the neighborhood's edges.
    """
    edges = nb.edges
    m = len(edges)
    if m > budget:
        raise ExhaustiveBudgetError(
            f"neighborhood has {m} edges > budget {budget}; use build_G_trace/eval_G_mc"
        )
    y = np.asarray(y, dtype=float)
    members = nb.nodes
    if y.shape != (len(members),):
        raise ValueError(f"y must have one entry per member ({len(members)})")
    index = nb.member_index()
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in (*members, nb.focal)}
    for e, (u, v) in enumerate(edges):
        adj[u].append((e, v))
        adj[v].append((e, u))

    value = 0.0
    grad = np.zeros(len(members))
    for mask in range(1 << m):
        k = bin(mask).count("1")
        w = p**k * (1.0 - p) ** (m - k)
        # BFS over occupied edges from the focal node
        reached: list[int] = []
        seen = {nb.focal}
        stack = [nb.focal]
        while stack:
            cur = stack.pop()
            for e, nxt in adj[cur]:
                if (mask >> e) & 1 and nxt not in seen:
                    seen.add(nxt)
                    reached.append(nxt)
                    stack.append(nxt)
        prod = 1.0
        nzero = 0
        zero_at = -1
        for v in reached:
            a = index[v]
            if y[a] == 0.0:
                nzero += 1
                zero_at = a
            else:
                prod *= y[a]
        if nzero == 0:
            value += w * prod
            for v in reached:
                a = index[v]
                grad[a] += w * prod / y[a]
        elif nzero == 1:
            grad[zero_at] += w * prod
    return GResult(value=value, grad=grad)


def _find(parent: np.ndarray, x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return int(root)


def _make_scripts(internal_local, k: int, samples: int, rng):
    """Random edge orders plus their union-find merge scripts.

    internal_local holds member-local endpoint pairs; returns
    (orders, keep, absorb) with shape (samples, M), keep/absorb = -1 where
    the edge landed inside an existing cluster (no merge).
    """
    m = len(internal_local)
    orders = np.empty((samples, m), dtype=np.int64)
    keep = np.empty((samples, m), dtype=np.int32)
    absorb = np.empty((samples, m), dtype=np.int32)
    parent = np.empty(max(k, 1), dtype=np.int64)
    size = np.empty(max(k, 1), dtype=np.int64)
    for s in range(samples):
        order = rng.permutation(m)
        orders[s] = order
        parent[:k] = np.arange(k)
        size[:k] = 1
        for step, e in enumerate(order):
            a, b = internal_local[e]
            ra = _find(parent, a)
            rb = _find(parent, b)
            if ra == rb:
                keep[s, step] = -1
                absorb[s, step] = -1
            else:
                if size[ra] < size[rb]:
                    ra, rb = rb, ra
                parent[rb] = ra
                size[ra] += size[rb]
                keep[s, step] = ra
                absorb[s, step] = rb
    return orders, keep, absorb


def build_G_trace(nb: NeighborhoodSet, samples: int, seed) -> GTrace:
    """Draw `samples` random internal-edge orders and precompute their
    union-find merge scripts (member-local cluster roots, union by size)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    internal = tuple(nb.internal_edges)
    index = nb.member_index()
    internal_local = [(index[u], index[v]) for u, v in internal]
    rng = np.random.default_rng(seed)
    edge_orders, keep, absorb = _make_scripts(internal_local, len(nb.nodes), samples, rng)
    return GTrace(
        m=len(internal),
        samples=samples,
        internal=internal,
        edge_orders=edge_orders,
        keep=keep,
        absorb=absorb,
        direct=nb.direct,
    )


def eval_G_exact(nb: NeighborhoodSet, y, p: float, need_grad: bool = True) -> GResult:
    """Exact G by enumerating only the internal-edge configurations and
    multiplying per-cluster spoke factors.

    Value and gradient are mathematically identical to
    :func:`eval_G_exhaustive` but the cost is 2^M (internal edges) instead of
    2^m (all edges). This is the solver's exhaustive estimator.
    """
    y = np.asarray(y, dtype=float)
    k = len(nb.nodes)
    if y.shape != (k,):
        raise ValueError(f"y must have one entry per member ({k})")
    internal = nb.internal_edges
    if len(internal) > 62:
        raise ExhaustiveBudgetError(f"{len(internal)} internal edges cannot be enumerated")
    index = nb.member_index()
    idx = np.zeros(1, dtype=np.int64)
    off_mem = np.array([0, k], dtype=np.int64)
    dep = np.arange(k, dtype=np.int64)
    direct = np.array(nb.direct, dtype=np.uint8)
    off_ie = np.array([0, len(internal)], dtype=np.int64)
    ie_a = np.array([index[u] for u, _ in internal], dtype=np.int32)
    ie_b = np.array([index[v] for _, v in internal], dtype=np.int32)
    out = np.empty(1)
    max_k = max(k, 1)
    if need_grad:
        gout = np.empty(max(k, 1))
        _kernels.exact_g_grads(y, p, idx, off_mem, dep, direct, off_ie, ie_a, ie_b, max_k, out, gout)
        return GResult(value=float(out[0]), grad=gout[:k].copy())
    _kernels.exact_g_values(y, p, idx, off_mem, dep, direct, off_ie, ie_a, ie_b, max_k, out)
    return GResult(value=float(out[0]), grad=np.zeros(k))


def eval_G_mc(trace: GTrace, nb: NeighborhoodSet, y, p: float, need_grad: bool = True) -> GResult:
    """Monte Carlo estimate of G (and gradient) from a fixed trace."""
    y = np.asarray(y, dtype=float)
    k = len(nb.nodes)
    if y.shape != (k,):
        raise ValueError(f"y must have one entry per member ({k})")
    if trace.m != len(nb.internal_edges) or len(trace.direct) != k:
        raise ValueError("trace does not match neighborhood")
    idx = np.zeros(1, dtype=np.int64)
    off_mem = np.array([0, k], dtype=np.int64)
    dep = np.arange(k, dtype=np.int64)
    direct = np.array(nb.direct, dtype=np.uint8)
    ms = np.array([trace.m], dtype=np.int64)
    off_w = np.array([0, trace.m + 1], dtype=np.int64)
    wts = binomial_pmf(trace.m, p)
    off_script = np.array([0, trace.samples * trace.m], dtype=np.int64)
    sc_keep = trace.keep.ravel()
    sc_abs = trace.absorb.ravel()
    out = np.empty(1)
    max_k = max(k, 1)
    if need_grad:
        gout = np.empty(max(k, 1))
        _kernels.mc_g_grads(
            y, p, idx, off_mem, dep, direct, ms, off_w, wts, off_script, sc_keep, sc_abs,
            trace.samples, max_k, out, gout,
        )
        return GResult(value=float(out[0]), grad=gout[:k].copy())
    _kernels.mc_g_values(
        y, p, idx, off_mem, dep, direct, ms, off_w, wts, off_script, sc_keep, sc_abs,
        trace.samples, max_k, out,
    )
    return GResult(value=float(out[0]), grad=np.zeros(k))
