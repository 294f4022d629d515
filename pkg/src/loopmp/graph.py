"""Undirected weighted graph / symmetric sparse matrix container and parsers.

A :class:`Graph` is the shared universe for both solvers: for percolation it
is an unweighted simple graph (all weights 1, zero diagonal), for spectra it
doubles as a symmetric matrix with off-diagonal entries on the edges and
diagonal entries in ``diag``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GraphParseError(ValueError):
    """Malformed or inconsistent graph input text."""


@dataclass
class Graph:
    """Immutable-by-convention undirected weighted graph on nodes ``0..n-1``.

    Each undirected edge (u, v, w) with u != v is stored once in ``edges``
    and mirrored in ``adjacency``; self-weights live in ``diag`` only.
    """

    n: int
    edges: list[tuple[int, int, float]]
    adjacency: list[list[tuple[int, float]]]
    diag: np.ndarray
    _weight: dict[tuple[int, int], float] = field(repr=False, default_factory=dict)

    @classmethod
    def from_edges(cls, n, edges, diag=None):
        """Build a graph from (u, v) or (u, v, w) tuples; weight defaults to 1."""
        adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        weight: dict[tuple[int, int], float] = {}
        stored: list[tuple[int, int, float]] = []
        for e in edges:
            if len(e) == 2:
                u, v = e
                w = 1.0
            else:
                u, v, w = e
            u, v = int(u), int(v)
            w = float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphParseError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise GraphParseError(f"self-loop ({u},{u}) not allowed in edges; use diag")
            key = (u, v) if u < v else (v, u)
            if key in weight:
                raise GraphParseError(f"duplicate undirected edge ({key[0]},{key[1]})")
            weight[key] = w
            stored.append((key[0], key[1], w))
            adjacency[u].append((v, w))
            adjacency[v].append((u, w))
        d = np.zeros(n) if diag is None else np.asarray(diag, dtype=float).copy()
        if d.shape != (n,):
            raise GraphParseError(f"diag must have length n={n}")
        return cls(n=n, edges=stored, adjacency=adjacency, diag=d, _weight=weight)

    def weight(self, u, v):
        """Weight of edge (u, v), or 0.0 if absent."""
        key = (u, v) if u < v else (v, u)
        return self._weight.get(key, 0.0)

    def has_edge(self, u, v):
        key = (u, v) if u < v else (v, u)
        return key in self._weight

    def neighbors(self, i):
        return [v for v, _ in self.adjacency[i]]


def _parse_lines(text):
    """Yield (lineno, fields) for non-blank, non-comment lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        yield lineno, line.split()


def load_edge_list(text: str) -> Graph:
    """Parse edge-list text with lines ``u v [w]`` into a Graph.

    Node ids are nonnegative integers; n = 1 + max id. Missing weight
    defaults to 1.0. Duplicate undirected edges and malformed lines raise
    :class:`GraphParseError` with the offending line number.
    """
    triples: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    max_id = -1
    for lineno, fields in _parse_lines(text):
        if len(fields) not in (2, 3):
            raise GraphParseError(f"line {lineno}: expected 'u v [w]', got {len(fields)} fields")
        try:
            u, v = int(fields[0]), int(fields[1])
            w = float(fields[2]) if len(fields) == 3 else 1.0
        except ValueError as exc:
            raise GraphParseError(f"line {lineno}: {exc}") from exc
        if u < 0 or v < 0:
            raise GraphParseError(f"line {lineno}: negative node id")
        if u == v:
            raise GraphParseError(f"line {lineno}: self-loop ({u},{u}) not allowed in edge lists")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise GraphParseError(f"line {lineno}: duplicate undirected edge ({u},{v})")
        seen.add(key)
        triples.append((u, v, w))
        max_id = max(max_id, u, v)
    return Graph.from_edges(max_id + 1, triples)


def load_matrix_triplets(text: str) -> Graph:
    """Parse symmetric-matrix triplet text ``i j value`` into a Graph.

    Only one triangle is required; entries are mirrored on load. Entries with
    i == j go to the diagonal. Duplicate (i, j) pairs (in either order) raise.
    """
    off: list[tuple[int, int, float]] = []
    diag_entries: dict[int, float] = {}
    seen: set[tuple[int, int]] = set()
    max_id = -1
    for lineno, fields in _parse_lines(text):
        if len(fields) != 3:
            raise GraphParseError(f"line {lineno}: expected 'i j value'")
        try:
            i, j = int(fields[0]), int(fields[1])
            val = float(fields[2])
        except ValueError as exc:
            raise GraphParseError(f"line {lineno}: {exc}") from exc
        if i < 0 or j < 0:
            raise GraphParseError(f"line {lineno}: negative index")
        max_id = max(max_id, i, j)
        if i == j:
            if i in diag_entries:
                raise GraphParseError(f"line {lineno}: duplicate diagonal entry ({i},{i})")
            diag_entries[i] = val
            continue
        key = (i, j) if i < j else (j, i)
        if key in seen:
            raise GraphParseError(f"line {lineno}: duplicate entry ({i},{j})")
        seen.add(key)
        off.append((key[0], key[1], val))
    n = max_id + 1
    diag = np.zeros(n)
    for i, val in diag_entries.items():
        diag[i] = val
    return Graph.from_edges(n, off, diag=diag)


def laplacian(g: Graph) -> Graph:
    """Graph Laplacian L = D - A of a graph with zero diagonal.

    Returned graph has edge weights -w and diag_i = sum of i's edge weights,
    so every row sums to exactly zero.
    """
    if np.any(g.diag != 0.0):
        raise ValueError("laplacian requires a graph with no self-weights")
    edges = [(u, v, -w) for u, v, w in g.edges]
    diag = np.zeros(g.n)
    for u, v, w in g.edges:
        diag[u] += w
        diag[v] += w
    return Graph.from_edges(g.n, edges, diag=diag)


def degree(g: Graph, i: int) -> int:
    """Number of neighbors of node i (self-weights do not count)."""
    if not (0 <= i < g.n):
        raise ValueError(f"node {i} out of range")
    return len(g.adjacency[i])


def to_dense(g: Graph) -> np.ndarray:
    """Dense symmetric matrix with edges off-diagonal and diag on the diagonal."""
    a = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        a[u, v] = w
        a[v, u] = w
    a[np.arange(g.n), np.arange(g.n)] = g.diag
    return a
