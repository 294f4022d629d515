"""r-neighborhoods, reduced neighborhoods, and the global message topology.

The order-r neighborhood of node i holds i's incident edges plus every edge
on a simple path of at most r edges that runs between two distinct neighbors
of i without passing through i. The reduced neighborhood for a message
(i <- j) is j's neighborhood with all of i's neighborhood edges removed;
subtraction acts on edge sets and member nodes are recomputed from the
surviving edges.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Graph


class TopologyBudgetError(RuntimeError):
    """Cumulative neighborhood size exceeded the configured budget."""


@dataclass(frozen=True, slots=True)
class NeighborhoodSet:
    """Edge/node set around a focal node.

    nodes are the non-focal endpoints of the edges, sorted ascending;
    direct[k] is True iff (focal, nodes[k]) is itself in the edge set.
    """

    focal: int
    r: int
    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    direct: tuple[bool, ...]

    @property
    def spokes(self) -> list[tuple[int, int]]:
        """Edges incident to the focal node."""
        return [e for e in self.edges if self.focal in e]

    @property
    def internal_edges(self) -> list[tuple[int, int]]:
        """Edges between members (the M cycle-completing edges)."""
        return [e for e in self.edges if self.focal not in e]

    def member_index(self) -> dict[int, int]:
        return {v: k for k, v in enumerate(self.nodes)}


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _from_edge_set(focal: int, r: int, edge_set) -> NeighborhoodSet:
    edges = tuple(sorted(edge_set))
    nodes = tuple(sorted({w for e in edges for w in e if w != focal}))
    direct = tuple(_norm(focal, v) in edge_set for v in nodes)
    return NeighborhoodSet(focal=focal, r=r, nodes=nodes, edges=edges, direct=direct)


def _neighborhood_edge_set(g: Graph, i: int, r: int) -> set[tuple[int, int]]:
    neighbors = g.neighbors(i)
    edge_set = {_norm(i, v) for v in neighbors}
    if r == 0 or len(neighbors) < 2:
        return edge_set
    nbset = set(neighbors)
    # depth-limited DFS from each neighbor, avoiding i; any simple path of
    # <= r edges ending at another neighbor contributes all its edges
    path_nodes: list[int] = []
    on_path: set[int] = set()

    def extend(cur: int, depth: int, start: int):
        for nxt, _ in g.adjacency[cur]:
            if nxt == i or nxt in on_path:
                continue
            if nxt in nbset and nxt != start:
                for a, b in zip(path_nodes, path_nodes[1:]):
                    edge_set.add(_norm(a, b))
                edge_set.add(_norm(cur, nxt))
            if depth < r:
                path_nodes.append(nxt)
                on_path.add(nxt)
                extend(nxt, depth + 1, start)
                path_nodes.pop()
                on_path.remove(nxt)

    for start in neighbors:
        path_nodes.append(start)
        on_path.add(start)
        extend(start, 1, start)
        path_nodes.pop()
        on_path.remove(start)
    return edge_set


def build_neighborhood(g: Graph, i: int, r: int) -> NeighborhoodSet:
    """The order-r neighborhood N_i of node i."""
    if not (0 <= i < g.n):
        raise ValueError(f"node {i} out of range")
    if r < 0:
        raise ValueError("r must be >= 0")
    return _from_edge_set(i, r, _neighborhood_edge_set(g, i, r))


def build_reduced(g: Graph, i: int, j: int, r: int) -> NeighborhoodSet:
    """The reduced neighborhood for message (i <- j): N_j minus N_i's edges."""
    ni = _neighborhood_edge_set(g, i, r)
    if j not in {w for e in ni for w in e if w != i}:
        raise ValueError(f"node {j} is not a member of N_{i}^({r})")
    nj = _neighborhood_edge_set(g, j, r)
    return _from_edge_set(j, r, nj - ni)


@dataclass(frozen=True, slots=True)
class MessageTopology:
    """The directed message index set and its dependency structure.

    messages[t] = (i, j) with j a member of N_i; reduced[t] is the message's
    reduced neighborhood; deps[t][k] is the message index of (j, node_k) for
    node_k the k-th member of reduced[t], aligned with reduced[t].nodes.
    """

    r: int
    messages: tuple[tuple[int, int], ...]
    reduced: tuple[NeighborhoodSet, ...]
    deps: tuple[tuple[int, ...], ...]
    neighborhoods: tuple[NeighborhoodSet, ...]

    def index(self) -> dict[tuple[int, int], int]:
        return {m: t for t, m in enumerate(self.messages)}


def build_topology(g: Graph, r: int, edge_budget: int = 50_000_000) -> MessageTopology:
    """Materialize all messages (i <- j), their reduced neighborhoods, and
    dependency lists, ordered lexicographically by (i, j).

    Raises TopologyBudgetError once the cumulative number of neighborhood
    edges exceeds edge_budget (guards exponential neighborhood growth).
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    edge_sets: list[set[tuple[int, int]]] = []
    budget = edge_budget
    for i in range(g.n):
        es = _neighborhood_edge_set(g, i, r)
        budget -= len(es)
        if budget < 0:
            raise TopologyBudgetError(f"neighborhood edge budget {edge_budget} exceeded at node {i}")
        edge_sets.append(es)

    neighborhoods = tuple(_from_edge_set(i, r, edge_sets[i]) for i in range(g.n))
    messages: list[tuple[int, int]] = []
    for i in range(g.n):
        for j in neighborhoods[i].nodes:
            messages.append((i, j))
    index = {m: t for t, m in enumerate(messages)}

    reduced: list[NeighborhoodSet] = []
    deps: list[tuple[int, ...]] = []
    for i, j in messages:
        surviving = edge_sets[j] - edge_sets[i]
        budget -= len(surviving)
        if budget < 0:
            raise TopologyBudgetError(f"neighborhood edge budget {edge_budget} exceeded at message ({i},{j})")
        red = _from_edge_set(j, r, surviving)
        reduced.append(red)
        deps.append(tuple(index[(j, k)] for k in red.nodes))

    return MessageTopology(
        r=r,
        messages=tuple(messages),
        reduced=tuple(reduced),
        deps=tuple(deps),
        neighborhoods=neighborhoods,
    )


def dump_neighborhood(g: Graph, i: int, r: int) -> str:
    """Edge-list text block of N_i for debugging."""
    nb = build_neighborhood(g, i, r)
    lines = [f"# neighborhood of node {i} at r={r}: {len(nb.nodes)} members, {len(nb.edges)} edges"]
    for u, v in nb.edges:
        lines.append(f"{u} {v} {g.weight(u, v)!r}")
    return "\n".join(lines) + "\n"
