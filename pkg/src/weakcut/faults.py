"""Fault distribution assumptions: which node sets may be Byzantine together.

Every model is downward closed, so "can these nodes all be faulty at once"
reduces to a validity check on the set itself.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .errors import ParseError, ResourceLimitError

KINDS = ("threshold", "per_region", "explicit_family")

DEFAULT_MAX_SUBSETS = 1 << 16


def _key(s) -> tuple:
    return tuple(sorted(s))


@dataclass(frozen=True)
class FaultModel:
    """A downward-closed family of permitted simultaneous fault sets.

    ``kind`` selects the base rule; ``trusted`` is an overlay of nodes that
    are never faulty and applies to every kind.
    """

    kind: str
    f: int = 0
    regions: tuple = ()  # ((frozenset, budget), ...)
    family: tuple = ()  # (frozenset, ...), stored maximal
    trusted: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown fault model kind {self.kind!r}")
        if self.f < 0:
            raise ValueError("f must be nonnegative")
        for _, budget in self.regions:
            if budget < 0:
                raise ValueError("region budgets must be nonnegative")

    # constructors ---------------------------------------------------------
    @classmethod
    def threshold(cls, f: int, trusted: Iterable = ()) -> "FaultModel":
        return cls("threshold", f=f, trusted=frozenset(trusted))

    @classmethod
    def per_region(cls, regions, trusted: Iterable = ()) -> "FaultModel":
        regs = tuple(sorted(((frozenset(nodes), int(b)) for nodes, b in regions),
                            key=lambda r: (_key(r[0]), r[1])))
        return cls("per_region", regions=regs, trusted=frozenset(trusted))

    @classmethod
    def explicit_family(cls, sets, trusted: Iterable = ()) -> "FaultModel":
        fam = {frozenset(s) for s in sets}
        maximal = sorted((s for s in fam if not any(s < t for t in fam)), key=_key)
        return cls("explicit_family", family=tuple(maximal), trusted=frozenset(trusted))

    @classmethod
    def majority_per_cut(cls, g, trusted: Iterable = ()) -> "FaultModel":
        """Each minimal cut keeps a strict majority of non-faulty members."""
        from .graph import enumerate_minimal_cuts

        cuts = enumerate_minimal_cuts(g) if g.n >= 2 else []
        return cls.per_region([(c.members, (len(c.members) - 1) // 2) for c in cuts], trusted)

    def with_trusted(self, trusted: Iterable) -> "FaultModel":
        return FaultModel(self.kind, self.f, self.regions, self.family,
                          self.trusted | frozenset(trusted))

    # queries --------------------------------------------------------------
    def is_valid(self, s: Iterable) -> bool:
        s = frozenset(s)
        if s & self.trusted:
            return False
        if self.kind == "threshold":
            return len(s) <= self.f
        if self.kind == "per_region":
            return all(len(s & nodes) <= budget for nodes, budget in self.regions)
        return not s or any(s <= fam for fam in self.family)

    def can_all_fault(self, s: Iterable) -> bool:
        # downward closure: contained in a valid set iff valid itself
        return self.is_valid(s)

    def max_fault_count(self, universe: Iterable) -> int:
        return max((len(s) for s in enumerate_maximal_fault_sets(self, universe)), default=0)

    # serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "threshold":
            out["f"] = self.f
        elif self.kind == "per_region":
            out["regions"] = [{"nodes": list(_key(nodes)), "budget": b} for nodes, b in self.regions]
        else:
            out["sets"] = [list(_key(s)) for s in self.family]
        if self.trusted:
            out["trusted"] = list(_key(self.trusted))
        return out

    @classmethod
    def from_dict(cls, data, source=None) -> "FaultModel":
        if not isinstance(data, dict):
            raise ParseError("fault model must be a JSON object", source, None, "kind")
        kind = data.get("kind")
        if kind not in KINDS:
            raise ParseError(f"unknown fault model kind {kind!r}", source, None, "kind")
        trusted = data.get("trusted", [])
        if not _is_str_list(trusted):
            raise ParseError("'trusted' must be a list of node ids", source, None, "trusted")
        if kind == "threshold":
            f = data.get("f")
            if not isinstance(f, int) or isinstance(f, bool) or f < 0:
                raise ParseError(f"'f' must be a nonnegative integer, got {f!r}", source, None, "f")
            return cls.threshold(f, trusted)
        if kind == "per_region":
            regions = data.get("regions")
            if not isinstance(regions, list):
                raise ParseError("'regions' must be a list", source, None, "regions")
            parsed = []
            for i, reg in enumerate(regions):
                if not (isinstance(reg, dict) and _is_str_list(reg.get("nodes"))
                        and isinstance(reg.get("budget"), int) and reg["budget"] >= 0):
                    raise ParseError(f"region {i} needs 'nodes' (list) and 'budget' (int >= 0)",
                                     source, None, f"regions[{i}]")
                parsed.append((reg["nodes"], reg["budget"]))
            return cls.per_region(parsed, trusted)
        sets = data.get("sets")
        if not isinstance(sets, list) or not all(_is_str_list(s) for s in sets):
            raise ParseError("'sets' must be a list of node-id lists", source, None, "sets")
        return cls.explicit_family(sets, trusted)


def _is_str_list(x) -> bool:
    return isinstance(x, list) and all(isinstance(v, str) for v in x)


def is_valid(m: FaultModel, s) -> bool:
    return m.is_valid(s)


def can_all_fault(m: FaultModel, s) -> bool:
    return m.can_all_fault(s)


def enumerate_maximal_fault_sets(m: FaultModel, universe: Iterable,
                                 max_subsets: int = DEFAULT_MAX_SUBSETS) -> list[frozenset]:
    """All inclusion-maximal valid fault sets inside ``universe``, sorted."""
    return list(_maximal_cached(m, frozenset(universe), max_subsets))


@functools.lru_cache(maxsize=4096)
def _maximal_cached(m: FaultModel, universe: frozenset, max_subsets: int) -> tuple:
    pool = sorted(universe - m.trusted)
    if m.kind == "threshold":
        k = min(m.f, len(pool))
        count = _comb(len(pool), k)
        if count > max_subsets:
            raise ResourceLimitError(f"threshold hypothesis enumeration ({count} sets)", max_subsets)
        return tuple(frozenset(c) for c in itertools.combinations(pool, k))
    if m.kind == "explicit_family":
        clipped = {fam & (universe - m.trusted) for fam in m.family}
        maximal = [s for s in clipped if not any(s < t for t in clipped)]
        return tuple(sorted(maximal, key=_key)) if maximal else (frozenset(),)
    # per_region: nodes outside every region are unconstrained
    constrained = sorted(set().union(*(nodes for nodes, _ in m.regions)) & set(pool)) if m.regions else []
    free = frozenset(pool) - frozenset(constrained)
    if len(constrained) < 63 and (1 << len(constrained)) > max_subsets:
        raise ResourceLimitError(f"per-region subset sweep over {len(constrained)} nodes", max_subsets)
    valid = []
    for r in range(len(constrained) + 1):
        for c in itertools.combinations(constrained, r):
            s = frozenset(c)
            if all(len(s & nodes) <= b for nodes, b in m.regions):
                valid.append(s)
    maximal = [s for s in valid if not any(s < t for t in valid)]
    return tuple(sorted((s | free for s in maximal), key=_key))


def _comb(n: int, k: int) -> int:
    from math import comb

    return comb(n, k)


def enumerate_valid_fault_sets(m: FaultModel, universe: Iterable,
                               max_subsets: int = DEFAULT_MAX_SUBSETS) -> list[frozenset]:
    """Every valid fault set inside ``universe`` (the downward closure), sorted by size then members."""
    out = set()
    for top in enumerate_maximal_fault_sets(m, universe, max_subsets):
        if len(top) >= 63 or (1 << len(top)) > max_subsets:
            raise ResourceLimitError(f"valid fault set enumeration under a set of {len(top)}", max_subsets)
        for r in range(len(top) + 1):
            out.update(frozenset(c) for c in itertools.combinations(sorted(top), r))
        if len(out) > max_subsets:
            raise ResourceLimitError("valid fault set enumeration", max_subsets)
    return sorted(out, key=lambda s: (len(s), _key(s)))
