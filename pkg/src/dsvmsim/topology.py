"""Communication graphs for decentralized training.

A :class:`Topology` is an undirected, connected graph over contiguous
0-based node ids. Generators cover the standard shapes (complete, ring,
random-regular, star, custom edge lists) plus four named experiment
networks used by the shipped presets:

- ``net_a``: complete graph on 3 nodes (balanced, degree 1)
- ``net_b``: complete graph on 6 nodes (balanced, degree 1)
- ``net_c``: ring on 6 nodes (balanced, degree 0.4)
- ``net_d``: unbalanced 6-node graph with average degree 0.4

``net_d`` is an explicit edge list: nodes 0 and 1 have three neighbors
each while nodes 3 and 5 are leaves, giving the same average degree as
the ring but an uneven spread.

Node degree is reported as ``|neighbors| / (V - 1)`` and the network
degree as the average of node degrees, both as exact fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InfeasibleTopology, UnknownNode

__all__ = [
    "Topology",
    "make_topology",
    "is_connected",
    "node_degree",
    "network_degree",
    "TOPOLOGY_KINDS",
]

# Unbalanced 6-node preset wiring (6 edges, average |B_v| = 2).
_NET_D_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 4), (4, 5))


@dataclass(frozen=True)
class Topology:
    """Undirected connected graph over nodes ``0..node_count-1``.

    Attributes:
        node_count: Number of nodes V.
        edges: Sorted tuple of unordered edges ``(u, v)`` with ``u < v``.
        neighbors: Per-node sorted neighbor tuples, derived from ``edges``.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    neighbors: tuple[tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        if self.node_count < 2:
            raise InfeasibleTopology(f"need at least 2 nodes, got {self.node_count}")
        seen = set()
        adj: list[set[int]] = [set() for _ in range(self.node_count)]
        for e in self.edges:
            if len(e) != 2:
                raise InfeasibleTopology(f"malformed edge {e!r}")
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InfeasibleTopology(f"self-loop at node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise InfeasibleTopology(f"edge {e!r} references unknown node")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InfeasibleTopology(f"duplicate edge {key!r}")
            seen.add(key)
            adj[u].add(v)
            adj[v].add(u)
        canonical = tuple(sorted(seen))
        object.__setattr__(self, "edges", canonical)
        object.__setattr__(self, "neighbors", tuple(tuple(sorted(s)) for s in adj))
        for v, nbrs in enumerate(self.neighbors):
            if not nbrs:
                raise InfeasibleTopology(f"node {v} has no neighbors")
        if not is_connected(self):
            raise InfeasibleTopology("graph is not connected")


def is_connected(t: Topology) -> bool:
    """BFS reachability check from node 0."""
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for u in t.neighbors[v]:
            if u not in seen:
                seen.add(u)
                frontier.append(u)
    return len(seen) == t.node_count


def node_degree(t: Topology, v: int) -> Fraction:
    """Degree of node ``v`` as the fraction ``|B_v| / (V - 1)``."""
    if not (0 <= v < t.node_count):
        raise UnknownNode(f"node {v} not in 0..{t.node_count - 1}")
    return Fraction(len(t.neighbors[v]), t.node_count - 1)


def network_degree(t: Topology) -> Fraction:
    """Average of all node degrees."""
    total = sum(node_degree(t, v) for v in range(t.node_count))
    return total / t.node_count


def _complete(n: int) -> list[tuple[int, int]]:
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def _ring(n: int) -> list[tuple[int, int]]:
    if n == 2:
        return [(0, 1)]
    return [(i, (i + 1) % n) for i in range(n)]


def _star(n: int) -> list[tuple[int, int]]:
    return [(0, v) for v in range(1, n)]


def _random_regular(n: int, d: int, seed: int) -> list[tuple[int, int]]:
    """Connected d-regular graph via the pairing model, retried per sub-seed."""
    if d < 1 or d >= n or (n * d) % 2 != 0:
        raise InfeasibleTopology(f"no {d}-regular graph on {n} nodes")
    rng = np.random.default_rng(seed)
    for _ in range(200):
        stubs = np.repeat(np.arange(n), d)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        edges = {(min(u, v), max(u, v)) for u, v in pairs if u != v}
        if len(edges) != n * d // 2:
            continue  # self-loop or multi-edge; redraw
        try:
            t = Topology(n, tuple(edges))
        except InfeasibleTopology:
            continue
        return list(t.edges)
    raise InfeasibleTopology(f"could not draw a connected {d}-regular graph on {n} nodes")


TOPOLOGY_KINDS = ("complete", "ring", "random_regular", "star", "custom",
                  "net_a", "net_b", "net_c", "net_d")


def make_topology(kind: str, node_count: int | None = None, *, degree: int | None = None,
                  edges=None, seed: int = 0) -> Topology:
    """Build a topology by kind name.

    Args:
        kind: One of :data:`TOPOLOGY_KINDS`.
        node_count: Number of nodes (ignored by the fixed ``net_*`` presets).
        degree: Regular degree, required for ``random_regular``.
        edges: Edge list, required for ``custom``.
        seed: Draw seed for ``random_regular``; other kinds are deterministic.

    Raises:
        InfeasibleTopology: parameters cannot produce a valid connected graph.
    """
    kind = kind.lower()
    if kind == "net_a":
        return Topology(3, tuple(_complete(3)))
    if kind == "net_b":
        return Topology(6, tuple(_complete(6)))
    if kind == "net_c":
        return Topology(6, tuple(_ring(6)))
    if kind == "net_d":
        return Topology(6, _NET_D_EDGES)
    if node_count is None:
        raise InfeasibleTopology(f"kind {kind!r} requires node_count")
    if kind == "complete":
        return Topology(node_count, tuple(_complete(node_count)))
    if kind == "ring":
        return Topology(node_count, tuple(_ring(node_count)))
    if kind == "star":
        return Topology(node_count, tuple(_star(node_count)))
    if kind == "random_regular":
        if degree is None:
            raise InfeasibleTopology("random_regular requires degree")
        return Topology(node_count, tuple(_random_regular(node_count, degree, seed)))
    if kind == "custom":
        if not edges:
            raise InfeasibleTopology("custom requires a nonempty edge list")
        return Topology(node_count, tuple(tuple(e) for e in edges))
    raise InfeasibleTopology(f"unknown topology kind {kind!r}")
