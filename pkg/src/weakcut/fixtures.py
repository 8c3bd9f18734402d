"""Named graphs and fault models used by the examples, tests and CLI demos."""
from __future__ import annotations

import itertools

from .faults import FaultModel
from .graph import Graph

THREE_SIDE = ("p0", "p1", "p2")
FOUR_SIDE = ("q0", "q1", "q2", "q3")


def k43() -> Graph:
    """Complete bipartite graph with sides p0..p2 and q0..q3."""
    return Graph(THREE_SIDE + FOUR_SIDE, [(p, q) for p in THREE_SIDE for q in FOUR_SIDE])


def k43_per_side(budget_three: int = 1, budget_four: int = 1) -> FaultModel:
    return FaultModel.per_region([(THREE_SIDE, budget_three), (FOUR_SIDE, budget_four)])


def complete(n: int, prefix: str = "v") -> Graph:
    nodes = [f"{prefix}{i}" for i in range(n)]
    return Graph(nodes, itertools.combinations(nodes, 2))


def path(n: int) -> Graph:
    nodes = [chr(ord("a") + i) for i in range(n)]
    return Graph(nodes, zip(nodes, nodes[1:]))


def star(leaves: int = 5) -> Graph:
    """Center ``c`` joined to leaves ``l1``..``lk``."""
    ls = [f"l{i}" for i in range(1, leaves + 1)]
    return Graph(["c"] + ls, [("c", x) for x in ls])


def star_trusted_center(leaves: int = 5) -> FaultModel:
    return FaultModel.threshold(leaves, trusted=["c"])


def wheel(rim: int = 5) -> Graph:
    ring = [f"r{i}" for i in range(rim)]
    edges = [(ring[i], ring[(i + 1) % rim]) for i in range(rim)] + [("hub", x) for x in ring]
    return Graph(["hub"] + ring, edges)


def cube() -> Graph:
    nodes = [format(i, "03b") for i in range(8)]
    edges = [(a, b) for a, b in itertools.combinations(nodes, 2)
             if sum(x != y for x, y in zip(a, b)) == 1]
    return Graph(nodes, edges)


# The unknown-topology illustration: a red node that lies about its link to
# the blue node. Positions (x, y) from the drawing are kept for reference.
UNKNOWN_LAYOUT = {
    "top": (0, 3),
    "red": (0, 2),
    "green": (1, 2),
    "upper_left": (-1, 2),
    "blue": (0, 1),
    "lower_left": (-1, 1),
    "lower_right": (1, 1),
    "bottom": (0, 0),
}

UNKNOWN_EDGES = (
    ("top", "green"), ("top", "red"), ("top", "upper_left"),
    ("red", "blue"), ("red", "green"), ("red", "lower_right"),
    ("green", "lower_right"),
    ("upper_left", "lower_left"), ("upper_left", "blue"),
    ("lower_left", "blue"), ("bottom", "blue"), ("bottom", "lower_left"),
    ("bottom", "lower_right"),
)


def unknown_topology() -> Graph:
    return Graph(UNKNOWN_LAYOUT, UNKNOWN_EDGES)


def catalog() -> dict:
    """(graph, fault model) pairs, by name."""
    g43 = k43()
    return {
        "p3-threshold0": (path(3), FaultModel.threshold(0)),
        "p3-middle-may-fail": (path(3), FaultModel.threshold(1)),
        "k4-threshold1": (complete(4), FaultModel.threshold(1)),
        "k43-per-side": (g43, k43_per_side()),
        "k43-threshold2": (g43, FaultModel.threshold(2)),
        "k43-threshold1": (g43, FaultModel.threshold(1)),
        "star-trusted-center": (star(), star_trusted_center()),
        "wheel5-threshold1": (wheel(5), FaultModel.threshold(1)),
        "cube-threshold1": (cube(), FaultModel.threshold(1)),
        "unknown-topology-threshold1": (unknown_topology(), FaultModel.threshold(1)),
    }
