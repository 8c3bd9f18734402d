"""Undirected simple graphs, connectivity queries and minimal vertex cuts.

Node ids are strings and order lexicographically; every query that returns
a collection returns it in a deterministic order derived from that.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DomainError, ParseError, ResourceLimitError

NodeId = str


class Graph:
    """An immutable undirected simple graph over string node ids."""

    __slots__ = ("nodes", "edges", "_adj", "_nbrs", "index", "_header_ok", "_routes")

    def __init__(self, nodes: Iterable[NodeId], edges: Iterable[tuple[NodeId, NodeId]] = ()):
        node_list = [str(v) for v in nodes]
        if not node_list:
            raise DomainError("a graph needs at least one node")
        if len(set(node_list)) != len(node_list):
            dup = next(v for v in node_list if node_list.count(v) > 1)
            raise DomainError(f"duplicate node {dup!r}")
        self.nodes: tuple[NodeId, ...] = tuple(sorted(node_list))
        adj: dict[NodeId, set[NodeId]] = {v: set() for v in self.nodes}
        seen = set()
        for u, v in edges:
            u, v = str(u), str(v)
            if u == v:
                raise DomainError(f"self-loop on {u!r}")
            if u not in adj or v not in adj:
                raise DomainError(f"edge ({u!r}, {v!r}) has an endpoint outside the node set")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise DomainError(f"duplicate edge {key!r}")
            seen.add(key)
            adj[u].add(v)
            adj[v].add(u)
        self.edges: tuple[tuple[NodeId, NodeId], ...] = tuple(sorted(seen))
        self._adj = {v: frozenset(ns) for v, ns in adj.items()}
        self._nbrs = {v: tuple(sorted(ns)) for v, ns in adj.items()}
        self.index = {v: i for i, v in enumerate(self.nodes)}
        # validity of FLOOD path headers, filled lazily by the flood module
        self._header_ok: dict = {}
        self._routes: dict = {}

    @property
    def n(self) -> int:
        return len(self.nodes)

    def __contains__(self, v) -> bool:
        return v in self._adj

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.nodes, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={len(self.edges)})"

    def adjacent(self, u: NodeId, v: NodeId) -> bool:
        return v in self._adj.get(u, ())

    def neighbor_tuple(self, v: NodeId) -> tuple[NodeId, ...]:
        """Sorted neighbors of ``v`` (unchecked fast path)."""
        return self._nbrs[v]

    def mask(self, members: Iterable[NodeId]) -> int:
        """Bitmask of ``members`` under this graph's node indexing."""
        m = 0
        for v in members:
            m |= 1 << self.index[v]
        return m

    def subgraph_without(self, removed: Iterable[NodeId]) -> "Graph":
        gone = set(removed)
        keep = [v for v in self.nodes if v not in gone]
        return Graph(keep, [(u, v) for u, v in self.edges if u not in gone and v not in gone])

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict, source=None, text=None) -> "Graph":
        return _graph_from_obj(data, source, text)


@dataclass(frozen=True)
class VertexCut:
    """A minimal vertex cut and a pair of nodes it separates."""

    members: frozenset
    separated_witness: tuple[NodeId, NodeId]

    @property
    def sorted_members(self) -> tuple[NodeId, ...]:
        return tuple(sorted(self.members))

    def to_dict(self) -> dict:
        return {"members": list(self.sorted_members), "separated_witness": list(self.separated_witness)}


def neighbors(g: Graph, v: NodeId) -> frozenset:
    if v not in g:
        raise DomainError(f"unknown node {v!r}")
    return g._adj[v]


def components_after_removal(g: Graph, s: Iterable[NodeId]) -> list[frozenset]:
    """Connected components of ``g`` minus ``s``, ordered by smallest member."""
    removed = set(s)
    unknown = removed.difference(g.nodes)
    if unknown:
        raise DomainError(f"unknown nodes {sorted(unknown)!r}")
    seen: set[NodeId] = set(removed)
    comps = []
    for start in g.nodes:  # sorted, so components come out ordered by minimum
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        stack = [start]
        while stack:
            x = stack.pop()
            for y in g._nbrs[x]:
                if y not in seen:
                    seen.add(y)
                    comp.append(y)
                    stack.append(y)
        comps.append(frozenset(comp))
    return comps


def is_connected(g: Graph) -> bool:
    return len(components_after_removal(g, ())) == 1


def is_cut(g: Graph, s: Iterable[NodeId]) -> bool:
    """True iff removing ``s`` leaves at least two components."""
    s = set(s)
    if s.difference(g.nodes):
        raise DomainError(f"unknown nodes {sorted(s.difference(g.nodes))!r}")
    if len(s) >= g.n:
        raise DomainError("removing every node leaves no pair to separate")
    return len(components_after_removal(g, s)) >= 2


def _separator_of(g: Graph, comp: frozenset) -> frozenset:
    """Open neighborhood of a component."""
    out = set()
    for x in comp:
        out.update(g._adj[x])
    out.difference_update(comp)
    return frozenset(out)


def _dirac_minimal_separators(g: Graph) -> set[frozenset]:
    """All minimal u-v separators for all pairs, by neighborhood expansion.

    Seeds with N(C) for each component C of G - N[v]; closes under
    S -> N(C) for components C of G - (S + N(x)), x in S.
    """
    found: set[frozenset] = set()
    frontier: list[frozenset] = []
    for v in g.nodes:
        closed = set(g._adj[v]) | {v}
        if len(closed) == g.n:
            continue
        for comp in components_after_removal(g, closed):
            sep = _separator_of(g, comp)
            if sep and sep not in found:
                found.add(sep)
                frontier.append(sep)
    while frontier:
        s = frontier.pop()
        for x in sorted(s):
            removed = set(s) | g._adj[x]
            if len(removed) >= g.n:
                continue
            for comp in components_after_removal(g, removed):
                sep = _separator_of(g, comp)
                if sep and sep not in found:
                    found.add(sep)
                    frontier.append(sep)
    return found


def _witness(g: Graph, members: frozenset) -> tuple[NodeId, NodeId]:
    comps = components_after_removal(g, members)
    return (min(comps[0]), min(comps[1]))


def enumerate_minimal_cuts(g: Graph) -> list[VertexCut]:
    """Every inclusion-minimal vertex cut of a connected graph.

    Sorted by the cut's sorted member tuple.
    """
    if g.n < 2:
        raise DomainError("minimal cuts need at least two nodes")
    if not is_connected(g):
        raise DomainError("graph is disconnected; the empty set is its only minimal cut")
    seps = _dirac_minimal_separators(g)
    # a minimal pair separator may strictly contain a separator of some other pair
    minimal = [s for s in seps if not any(t < s for t in seps)]
    minimal.sort(key=lambda s: tuple(sorted(s)))
    return [VertexCut(s, _witness(g, s)) for s in minimal]


def connectivity(g: Graph) -> int:
    """Size of a smallest vertex cut; ``n - 1`` when there is none."""
    if not is_connected(g):
        raise DomainError("connectivity is defined here for connected graphs only")
    if g.n == 1:
        return 0
    cuts = enumerate_minimal_cuts(g)
    if not cuts:
        return g.n - 1
    return min(len(c.members) for c in cuts)


def subsets(items, max_count: int | None = None, what: str = "subset sweep") -> Iterator[tuple]:
    """All subsets of ``items`` by increasing size, guarded by ``max_count``."""
    items = list(items)
    if max_count is not None and len(items) < 63 and (1 << len(items)) > max_count:
        raise ResourceLimitError(f"{what} over {len(items)} elements", max_count)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


# -- JSON -------------------------------------------------------------------

def _nth_line(text: str | None, pattern: str, occurrence: int) -> int | None:
    """1-based line of the ``occurrence``-th (0-based) regex match in ``text``."""
    if not text:
        return None
    for k, match in enumerate(re.finditer(pattern, text)):
        if k == occurrence:
            return text.count("\n", 0, match.start()) + 1
    return None


def _line_of(text: str | None, token: str, occurrence: int = 0) -> int | None:
    return _nth_line(text, re.escape(json.dumps(token)), occurrence)


def _line_of_edge(text: str | None, u: str, v: str, occurrence: int = 0) -> int | None:
    pattern = r"\[\s*" + re.escape(json.dumps(u)) + r"\s*,\s*" + re.escape(json.dumps(v)) + r"\s*\]"
    return _nth_line(text, pattern, occurrence)


def _graph_from_obj(data, source=None, text=None) -> Graph:
    if not isinstance(data, dict) or "nodes" not in data:
        raise ParseError("graph must be an object with 'nodes' and 'edges'", source, None, "nodes")
    raw_nodes = data["nodes"]
    raw_edges = data.get("edges", [])
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise ParseError("'nodes' must be a nonempty list", source, None, "nodes")
    seen = set()
    for v in raw_nodes:
        if not isinstance(v, str):
            raise ParseError(f"node ids must be strings, got {v!r}", source, None, repr(v))
        if v in seen:
            raise ParseError(f"duplicate node {v!r}", source, _line_of(text, v, 1), v)
        seen.add(v)
    if not isinstance(raw_edges, list):
        raise ParseError("'edges' must be a list", source, None, "edges")
    edge_seen = set()
    pair_count: dict = {}
    for e in raw_edges:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise ParseError(f"edge must be a pair of node ids, got {e!r}", source, None, repr(e))
        u, v = e
        where = _line_of_edge(text, u, v, pair_count.get((u, v), 0))
        pair_count[(u, v)] = pair_count.get((u, v), 0) + 1
        if u == v:
            raise ParseError(f"self-loop {e!r}", source, where, f"{u}-{v}")
        if u not in seen or v not in seen:
            bad = u if u not in seen else v
            raise ParseError(f"edge {e!r} names unknown node {bad!r}", source, where, bad)
        key = (min(u, v), max(u, v))
        if key in edge_seen:
            raise ParseError(f"duplicate edge {e!r}", source, where, f"{u}-{v}")
        edge_seen.add(key)
    return Graph(raw_nodes, [tuple(e) for e in raw_edges])


def load_graph(path) -> Graph:
    from .jsonio import read_json

    data, text = read_json(path)
    if isinstance(data, dict) and "graph" in data and "nodes" not in data:
        data = data["graph"]
    return _graph_from_obj(data, str(path), text)
