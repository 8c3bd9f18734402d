"""Feasibility check: the weak cut property and its two sufficient conditions."""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, ResourceLimitError
from .faults import DEFAULT_MAX_SUBSETS, FaultModel, enumerate_maximal_fault_sets
from .graph import Graph, VertexCut, connectivity, enumerate_minimal_cuts, is_connected

PASS = "pass"
VIOLATION = "violation"


@dataclass(frozen=True)
class CutVerdict:
    status: str
    cut: Optional[VertexCut] = None
    part_a: frozenset = frozenset()
    part_b: frozenset = frozenset()

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        out = {"status": self.status}
        if self.cut is not None:
            out["witness"] = {
                "cut": self.cut.to_dict(),
                "part_a": sorted(self.part_a),
                "part_b": sorted(self.part_b),
            }
        return out


@functools.lru_cache(maxsize=512)
def minimal_cuts(g: Graph) -> tuple:
    """Cached minimal cuts; a single node has none."""
    if g.n < 2:
        return ()
    return tuple(enumerate_minimal_cuts(g))


def bipartitions(members, max_subsets: int = DEFAULT_MAX_SUBSETS):
    """Splits (A, B) of a cut with |A| >= |B|, larger A first, then lexicographic.

    B may be empty: then A is the whole cut.
    """
    ordered = sorted(members)
    if len(ordered) < 63 and (1 << len(ordered)) > max_subsets:
        raise ResourceLimitError(f"bipartition sweep over a cut of {len(ordered)}", max_subsets)
    full = frozenset(ordered)
    for size in range(len(ordered), (len(ordered) - 1) // 2, -1):
        for combo in itertools.combinations(ordered, size):
            a = frozenset(combo)
            b = full - a
            if len(a) == len(b) and sorted(b) < sorted(a):
                continue  # already produced with the roles swapped
            yield a, b


def check_weak_cut_property(g: Graph, m: FaultModel, max_subsets: int = DEFAULT_MAX_SUBSETS) -> CutVerdict:
    """Pass iff no minimal cut splits into two sides that can each be all faulty."""
    if not is_connected(g):
        raise DomainError("the weak cut property is checked on connected graphs")
    for cut in minimal_cuts(g):
        for a, b in bipartitions(cut.members, max_subsets):
            if m.can_all_fault(a) and m.can_all_fault(b):
                return CutVerdict(VIOLATION, cut, a, b)
    return CutVerdict(PASS)


def majority_condition_holds(g: Graph, m: FaultModel, max_subsets: int = DEFAULT_MAX_SUBSETS) -> bool:
    """Every minimal cut keeps fewer than half its members faulty under every valid set."""
    if not is_connected(g):
        raise DomainError("the majority condition is checked on connected graphs")
    tops = enumerate_maximal_fault_sets(m, g.nodes, max_subsets)
    return all(2 * len(top & cut.members) < len(cut.members)
               for cut in minimal_cuts(g) for top in tops)


def classical_condition_holds(g: Graph, f: int) -> bool:
    """Connectivity strictly above twice the fault bound."""
    return connectivity(g) > 2 * f


def condition_flags(g: Graph, m: FaultModel, max_subsets: int = DEFAULT_MAX_SUBSETS) -> dict:
    f = m.max_fault_count(g.nodes)
    return {
        "weak_cut": check_weak_cut_property(g, m, max_subsets).passed,
        "majority_condition": majority_condition_holds(g, m, max_subsets),
        "classical_condition": classical_condition_holds(g, f),
        "max_faults": f,
        "connectivity": connectivity(g),
    }
