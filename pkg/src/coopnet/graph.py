"""Growing undirected simple graphs and their attachment mechanisms.

Three growth models are supported.  All start from a complete graph on L
nodes and introduce L new edges per inserted node:

* ``bam`` -- every new edge runs from the new node to a target drawn with
  probability proportional to degree (classic preferential attachment,
  so the new node always starts with exactly L links).
* ``ma``  -- one edge attaches the new node to a preferential target; the
  remaining L-1 edges are placed between a uniformly chosen node and a
  preferentially chosen one, so nodes with fewer than L links persist.
* ``rnm`` -- one edge to a uniformly chosen target, the remaining L-1
  between two uniformly chosen endpoints.

Self loops and duplicate edges are never created: colliding endpoint
pairs are rejection-sampled up to :data:`MAX_EDGE_RESAMPLE` attempts,
after which the run aborts with :class:`EdgePlacementError`.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Container, IO, Iterator

import numpy as np

MAX_EDGE_RESAMPLE = 10_000


class EdgePlacementError(RuntimeError):
    """Rejection sampling could not place a legal edge within the cap."""


class GrowthModel(Enum):
    BAM = "bam"
    MA = "ma"
    RNM = "rnm"


@dataclass(frozen=True)
class GrowthSpec:
    """Growth mechanism plus links-per-node L; the initial clique has L nodes."""

    model: GrowthModel
    links_per_node: int

    def __post_init__(self) -> None:
        if not isinstance(self.model, GrowthModel):
            object.__setattr__(self, "model", GrowthModel(self.model))
        if self.links_per_node < 2:
            raise ValueError("links_per_node must be >= 2")

    @property
    def initial_clique(self) -> int:
        return self.links_per_node


class Network:
    """Undirected simple graph over dense integer node ids.

    Adjacency is kept twice: per-node sets for O(1) membership tests, and
    a flat endpoint array in which every node appears once per incident
    edge.  The flat array feeds vectorised per-node aggregation and
    doubles as the sampling pool for degree-proportional draws.
    """

    __slots__ = ("_adj", "_deg", "_src", "_dst", "_n_ends", "_n_nodes")

    def __init__(self) -> None:
        self._adj: list[set[int]] = []
        self._deg = np.zeros(64, dtype=np.int64)
        self._src = np.zeros(256, dtype=np.int64)
        self._dst = np.zeros(256, dtype=np.int64)
        self._n_ends = 0
        self._n_nodes = 0

    # -- queries ------------------------------------------------------

    @property
    def node_count(self) -> int:
        return self._n_nodes

    @property
    def edge_count(self) -> int:
        return self._n_ends // 2

    @property
    def total_degree(self) -> int:
        return self._n_ends

    def degree(self, node: int) -> int:
        if not 0 <= node < self._n_nodes:
            raise IndexError(f"no node {node}")
        return int(self._deg[node])

    def degrees(self) -> np.ndarray:
        """Degree of every node; a view, valid until the next mutation."""
        return self._deg[: self._n_nodes]

    def neighbors(self, node: int) -> list[int]:
        return sorted(self._adj[node])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """(src, dst) views of length total_degree; each edge appears both ways."""
        return self._src[: self._n_ends], self._dst[: self._n_ends]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Undirected edges, once each, in insertion order."""
        for i in range(0, self._n_ends, 2):
            yield int(self._src[i]), int(self._dst[i])

    # -- mutation -----------------------------------------------------

    def add_isolated_node(self) -> int:
        nid = self._n_nodes
        self._n_nodes += 1
        self._adj.append(set())
        if self._n_nodes > self._deg.shape[0]:
            self._deg = np.concatenate(
                [self._deg, np.zeros(self._deg.shape[0], dtype=np.int64)]
            )
        self._deg[nid] = 0
        return nid

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError(f"self loop at node {u}")
        if not (0 <= u < self._n_nodes and 0 <= v < self._n_nodes):
            raise ValueError(f"edge {u}-{v} references a missing node")
        if v in self._adj[u]:
            raise ValueError(f"duplicate edge {u}-{v}")
        self._adj[u].add(v)
        self._adj[v].add(u)
        self._deg[u] += 1
        self._deg[v] += 1
        if self._n_ends + 2 > self._src.shape[0]:
            grow = self._src.shape[0]
            self._src = np.concatenate([self._src, np.zeros(grow, dtype=np.int64)])
            self._dst = np.concatenate([self._dst, np.zeros(grow, dtype=np.int64)])
        i = self._n_ends
        self._src[i] = u
        self._dst[i] = v
        self._src[i + 1] = v
        self._dst[i + 1] = u
        self._n_ends += 2

    def random_endpoint(self, rng: np.random.Generator) -> int:
        """A node drawn with probability degree / total_degree."""
        if self._n_ends == 0:
            raise ValueError("graph has no edges")
        return int(self._src[rng.integers(0, self._n_ends)])

    def __repr__(self) -> str:
        return f"Network(nodes={self._n_nodes}, edges={self.edge_count})"


def new_clique(size: int) -> Network:
    """Complete graph on ``size`` nodes, the starting structure for growth."""
    if size < 2:
        raise ValueError("clique size must be >= 2")
    net = Network()
    for _ in range(size):
        net.add_isolated_node()
    for u in range(size):
        for v in range(u + 1, size):
            net.add_edge(u, v)
    return net


def sample_preferential(
    net: Network, rng: np.random.Generator, exclude: Container[int] = ()
) -> int:
    """Draw a node with probability proportional to its degree.

    Nodes in ``exclude`` are rejected, so the result is distributed as
    degree(i) / sum of degrees over the non-excluded nodes.
    """
    if net.total_degree == 0:
        raise ValueError("no node with positive degree")
    if not exclude:
        return net.random_endpoint(rng)
    for _ in range(MAX_EDGE_RESAMPLE):
        node = net.random_endpoint(rng)
        if node not in exclude:
            return node
    # Distinguish an impossible draw from a pathologically unlucky one.
    deg = net.degrees()
    if not any(deg[i] > 0 and i not in exclude for i in range(net.node_count)):
        raise ValueError("every node with positive degree is excluded")
    raise EdgePlacementError(
        f"preferential draw exceeded {MAX_EDGE_RESAMPLE} attempts "
        f"(N={net.node_count}, excluded={len(tuple(exclude))})"
    )


def add_node(net: Network, spec: GrowthSpec, rng: np.random.Generator) -> int:
    """Insert one node plus L new edges per the growth model; returns its id."""
    if net.node_count < spec.links_per_node:
        raise ValueError("network is smaller than the initial clique")
    links = spec.links_per_node
    nid = net.add_isolated_node()
    if spec.model is GrowthModel.BAM:
        # All targets are drawn against the degrees as they stood before
        # this insertion, then wired up at once.
        taken: set[int] = {nid}
        targets: list[int] = []
        while len(targets) < links:
            t = sample_preferential(net, rng, taken)
            targets.append(t)
            taken.add(t)
        for t in targets:
            net.add_edge(nid, t)
    elif spec.model is GrowthModel.MA:
        net.add_edge(nid, sample_preferential(net, rng))
        for _ in range(links - 1):
            _place_edge(net, rng, _uniform_node, _preferential_node)
    else:
        net.add_edge(nid, int(rng.integers(0, nid)))
        for _ in range(links - 1):
            _place_edge(net, rng, _uniform_node, _uniform_node)
    return nid


def _place_edge(net, rng, draw_a, draw_b):
    # Collisions (self pair or existing edge) resample the whole pair.
    for _ in range(MAX_EDGE_RESAMPLE):
        u = draw_a(net, rng)
        v = draw_b(net, rng)
        if u != v and not net.has_edge(u, v):
            net.add_edge(u, v)
            return
    raise EdgePlacementError(
        f"could not place an edge after {MAX_EDGE_RESAMPLE} endpoint pairs "
        f"(N={net.node_count})"
    )


def _uniform_node(net, rng):
    return int(rng.integers(0, net.node_count))


def _preferential_node(net, rng):
    return net.random_endpoint(rng)


def write_edge_list(
    net: Network, dest: str | Path | IO[str], spec: GrowthSpec, seed: int
) -> None:
    """Dump one ``u v`` pair per line under a ``# N=.. L=.. model=.. seed=..`` header."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            write_edge_list(net, fh, spec, seed)
        return
    dest.write(
        f"# N={net.node_count} L={spec.links_per_node} "
        f"model={spec.model.value} seed={seed}\n"
    )
    for u, v in net.edges():
        dest.write(f"{u} {v}\n")
