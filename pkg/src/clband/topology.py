"""Mesh topology, k link-disjoint shortest paths, and a synthetic generator.

Links are bidirectional for routing; the simulator allocates spectrum per
direction.  Path search is Dijkstra by length in km with deterministic
lexicographic node-sequence tie-breaking; disjoint alternatives come from
successively removing the links of each found path, which yields routes of
non-decreasing length.
"""

import heapq
import json
from dataclasses import dataclass

import numpy as np

from .errors import TopologyError


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    length_km: float
    span_lengths_km: tuple

    def __post_init__(self):
        if abs(sum(self.span_lengths_km) - self.length_km) > 1e-6 * max(1.0, self.length_km):
            raise TopologyError(
                f"span lengths of {self.a}-{self.b} sum to "
                f"{sum(self.span_lengths_km)} != {self.length_km}"
            )

    @property
    def n_spans(self):
        return len(self.span_lengths_km)


@dataclass(frozen=True)
class Route:
    nodes: tuple
    link_ids: tuple
    length_km: float
    n_spans: int


class Topology:
    def __init__(self, nodes, links):
        self.nodes = tuple(nodes)
        self.links = tuple(links)
        known = set(self.nodes)
        self._adj = {n: [] for n in self.nodes}
        for idx, lk in enumerate(self.links):
            if lk.a not in known or lk.b not in known:
                raise TopologyError(f"link {lk.a}-{lk.b} references unknown node")
            self._adj[lk.a].append((lk.b, idx))
            self._adj[lk.b].append((lk.a, idx))
        for n in self._adj:
            self._adj[n].sort()
        if not self._connected():
            raise TopologyError("topology is not connected")

    def _connected(self):
        if not self.nodes:
            return False
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            for nb, _ in self._adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(self.nodes)

    def neighbors(self, node):
        return self._adj[node]

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_links(self):
        return len(self.links)


def dijkstra_shortest(topology, source, destination, blocked_links=frozenset()):
    """Shortest path by km; ties broken by lexicographic node sequence."""
    if source not in topology._adj or destination not in topology._adj:
        raise TopologyError(f"unknown node in pair ({source}, {destination})")
    heap = [(0.0, (source,), ())]
    visited = set()
    while heap:
        dist, path, link_ids = heapq.heappop(heap)
        node = path[-1]
        if node == destination:
            spans = sum(topology.links[i].n_spans for i in link_ids)
            return Route(path, link_ids, dist, spans)
        if node in visited:
            continue
        visited.add(node)
        for nb, idx in topology.neighbors(node):
            if idx in blocked_links or nb in visited:
                continue
            heapq.heappush(
                heap,
                (dist + topology.links[idx].length_km, path + (nb,), link_ids + (idx,)),
            )
    return None


def k_disjoint_shortest_paths(topology, source, destination, k=3, node_disjoint=False):
    """Up to k link-disjoint routes in non-decreasing length.

    ``node_disjoint`` additionally removes the interior nodes of each found
    path.  Returns fewer than k routes when disjointness exhausts the
    alternatives; an empty list only if the pair is disconnected.
    """
    if source == destination:
        raise TopologyError("source and destination must differ")
    routes = []
    blocked = set()
    blocked_nodes = set()
    for _ in range(k):
        if node_disjoint and blocked_nodes:
            usable = {
                i
                for i, lk in enumerate(topology.links)
                if lk.a in blocked_nodes or lk.b in blocked_nodes
            }
            blocked = blocked | usable
        route = dijkstra_shortest(topology, source, destination, frozenset(blocked))
        if route is None:
            break
        routes.append(route)
        blocked.update(route.link_ids)
        blocked_nodes.update(route.nodes[1:-1])
    return routes


def topology_from_dict(doc, source="<dict>"):
    try:
        links = [
            Link(
                a=e["a"],
                b=e["b"],
                length_km=float(e["length_km"]),
                span_lengths_km=tuple(float(s) for s in e["spans"]),
            )
            for e in doc["links"]
        ]
        return Topology(doc["nodes"], links)
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"topology {source} violates the schema: {exc}") from None


def load_topology(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise TopologyError(f"cannot read topology file {path}: {exc}") from None
    return topology_from_dict(doc, source=str(path))


def builtin_topology():
    """The packaged 21-node / 36-link stand-in regional backbone."""
    from importlib import resources

    text = resources.files("clband").joinpath("data/topology_21node.json").read_text()
    return topology_from_dict(json.loads(text), source="builtin")


def save_topology(topology, path):
    doc = {
        "nodes": list(topology.nodes),
        "links": [
            {
                "a": lk.a,
                "b": lk.b,
                "length_km": lk.length_km,
                "spans": list(lk.span_lengths_km),
            }
            for lk in topology.links
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def synthetic_topology(
    n_nodes=21, n_links=36, seed=7, span_length_km=70.0, max_spans_per_link=14,
):
    """Random 2-edge-connected mesh with span counts of 1..max_spans.

    A ring guarantees biconnectivity; the remaining links are random
    chords.  Every span is exactly ``span_length_km`` long so link lengths
    are span_count * span_length.
    """
    if n_links < n_nodes:
        raise TopologyError("need at least as many links as nodes for a ring")
    rng = np.random.default_rng(seed)
    nodes = [f"n{i + 1:02d}" for i in range(n_nodes)]
    edges = set()
    for i in range(n_nodes):
        edges.add(tuple(sorted((nodes[i], nodes[(i + 1) % n_nodes]))))
    while len(edges) < n_links:
        i, j = rng.choice(n_nodes, size=2, replace=False)
        if abs(i - j) in (0, 1, n_nodes - 1):
            continue
        edges.add(tuple(sorted((nodes[i], nodes[j]))))
    links = []
    for a, b in sorted(edges):
        spans = int(rng.integers(1, max_spans_per_link + 1))
        links.append(
            Link(a, b, spans * span_length_km, (span_length_km,) * spans)
        )
    return Topology(nodes, links)
