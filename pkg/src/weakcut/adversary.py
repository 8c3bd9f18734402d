"""Byzantine strategies.

Every strategy sees the node's shadow output (what the honest protocol
would send from the node's actual inbox) and the whole simulation, and
returns what the node really sends. Strategies are pure functions of
their inputs and the seed, so runs replay byte for byte.
"""
from __future__ import annotations

import hashlib

from .errors import ConfigurationError
from .flood import PathMessage
from .graph import components_after_removal
from .sim import Envelope, Strategy

THEOREM1_PHASES = ("alpha00", "beta01", "alpha11")
_FLIP = bytes(b ^ 1 for b in range(256))


def flip_body(body: bytes) -> bytes:
    """The lie told in place of ``body``: every byte with its low bit flipped."""
    if not body:
        return b"\x01"
    return bytes(body).translate(_FLIP)


def _tampered_upstream(msg: PathMessage, byzantine) -> bool:
    # colluders leave a copy alone once another Byzantine node has handled it
    for h in msg.header[:-1]:
        if h in byzantine:
            return True
    return False


class Silent(Strategy):
    name = "silent"

    def act(self, node, rnd, inbox, honest_out, sim):
        return []


class Equivocate(Strategy):
    """Flips the body toward every other neighbor (odd positions in sorted order)."""

    name = "equivocate"

    def act(self, node, rnd, inbox, honest_out, sim):
        nbrs = sim.graph.neighbor_tuple(node)
        liars = {w for i, w in enumerate(nbrs) if i % 2 == 1}
        out = []
        for env in honest_out:
            msg = env.payload
            if type(msg) is PathMessage and env.to in liars and not _tampered_upstream(msg, sim.byzantine):
                env = Envelope(env.sender, env.to, msg._replace(body=flip_body(msg.body)))
            out.append(env)
        return out


class RandomBytes(Strategy):
    """Replaces bodies with seeded noise and adds one unparseable payload per neighbor."""

    name = "random-bytes"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def _noise(self, *parts, size: int) -> bytes:
        key = "|".join(str(p) for p in (self.seed,) + parts).encode("utf-8")
        return hashlib.blake2b(key, digest_size=max(1, min(size, 64))).digest()

    def act(self, node, rnd, inbox, honest_out, sim):
        out = []
        for env in honest_out:
            msg = env.payload
            if type(msg) is PathMessage:
                noise = self._noise(rnd, node, env.to, msg.origin, msg.dest, msg.tag, msg.header,
                                    size=len(msg.body))
                env = Envelope(env.sender, env.to, msg._replace(body=noise))
            out.append(env)
        if honest_out:
            for w in sim.graph.neighbor_tuple(node):
                out.append(Envelope(node, w, b"\xff" + self._noise(rnd, node, w, "garbage", size=23)))
        return out


class PathSpoof(Strategy):
    """Relays honestly and adds, per copy, a forgery claiming a relay chain that does not exist."""

    name = "path-spoof"

    def act(self, node, rnd, inbox, honest_out, sim):
        g = sim.graph
        out = list(honest_out)
        for env in honest_out:
            msg = env.payload
            if type(msg) is not PathMessage:
                continue
            header = _fake_chain(g, msg.origin, node)
            if header is None:
                continue
            att = None
            if msg.attest is not None:
                # attestations forged to match the invented hops
                att = tuple(tuple(sorted(set(g.neighbor_tuple(h)) | set(_chain_nbrs(header, h))))
                            for h in header)
            forged = PathMessage(msg.origin, msg.dest, msg.tag, header, flip_body(msg.body), att)
            out.append(Envelope(node, env.to, forged))
        return out


def _chain_nbrs(header, h):
    i = header.index(h)
    return [header[j] for j in (i - 1, i + 1) if 0 <= j < len(header)]


def _fake_chain(g, origin, node):
    """(origin, ghost, node) with at least one hop missing from the graph."""
    if origin == node:
        return None
    for ghost in g.nodes:
        if ghost in (origin, node):
            continue
        if not g.adjacent(origin, ghost) or not g.adjacent(ghost, node):
            return (origin, ghost, node)
    if not g.adjacent(origin, node):
        return (origin, node)
    return None


class AdjacencyLie(Strategy):
    """Relays honestly but misreports its own neighbor set in attestations."""

    name = "adjacency-lie"

    def __init__(self, omit=None, add=None):
        self.omit = None if omit is None else frozenset(omit)
        self.add = None if add is None else frozenset(add)

    def claimed(self, g, node):
        nbrs = g.neighbor_tuple(node)
        omit = self.omit if self.omit is not None else frozenset(nbrs[:1])
        if self.add is not None:
            add = self.add
        else:
            others = [v for v in g.nodes if v != node and v not in nbrs]
            add = frozenset(others[:1])
        return tuple(sorted((set(nbrs) - omit) | (add - {node})))

    def act(self, node, rnd, inbox, honest_out, sim):
        lie = self.claimed(sim.graph, node)
        out = []
        for env in honest_out:
            msg = env.payload
            if type(msg) is PathMessage and msg.attest is not None and msg.header[-1] == node:
                env = Envelope(env.sender, env.to, msg._replace(attest=msg.attest[:-1] + (lie,)))
            out.append(env)
        return out


class Theorem1Replay(Strategy):
    """The faulty side of one execution in the indistinguishability chain.

    It replays, envelope for envelope, what the same nodes send as honest
    nodes in the paired execution(s) of the same round. ``sources`` is a
    list of ``(simulation, recipients or None)``; ``None`` means every
    recipient not claimed by an earlier source.
    """

    name = "theorem1"

    def __init__(self, witness, phase: str):
        if phase not in THEOREM1_PHASES:
            raise ConfigurationError(f"unknown chain phase {phase!r}")
        if witness is None or getattr(witness, "status", None) != "violation" or witness.cut is None:
            raise ConfigurationError("the chain adversary needs a weak cut violation witness")
        self.witness = witness
        self.phase = phase
        self.faulty = witness.part_a if phase.startswith("alpha") else witness.part_b
        self.sources: list = []

    def bind(self, sources):
        self.sources = list(sources)
        return self

    def act(self, node, rnd, inbox, honest_out, sim):
        if not self.sources:
            raise ConfigurationError("chain adversary used before its paired executions were bound")
        out = []
        claimed: set = set()
        for other, recipients in self.sources:
            for env in other.honest_out[node]:
                if env.to in claimed:
                    continue
                if recipients is None or env.to in recipients:
                    out.append(env)
            if recipients is not None:
                claimed |= set(recipients)
        return out


def chain_sides(witness, graph):
    """(U, V): the component of the first witness node, and everything else off the cut."""
    comps = components_after_removal(graph, witness.cut.members)
    x = witness.cut.separated_witness[0]
    u_side = next(c for c in comps if x in c)
    v_side = frozenset().union(*(c for c in comps if c is not u_side))
    return u_side, v_side


def adversary_theorem1(witness, phase: str) -> Theorem1Replay:
    return Theorem1Replay(witness, phase)


SWEEPABLE = ("silent", "random-bytes", "equivocate", "path-spoof", "adjacency-lie")


def adversary_library() -> list:
    return list(SWEEPABLE) + [f"theorem1-{p}" for p in THEOREM1_PHASES]


def make_strategy(name: str, params=None, seed: int = 0) -> Strategy:
    params = dict(params or {})
    active_from = params.pop("active_from", None)
    if name == "silent":
        strat = Silent()
    elif name == "equivocate":
        strat = Equivocate()
    elif name == "random-bytes":
        strat = RandomBytes(seed)
    elif name == "path-spoof":
        strat = PathSpoof()
    elif name == "adjacency-lie":
        strat = AdjacencyLie(params.get("omit"), params.get("add"))
    elif name.startswith("theorem1"):
        raise ConfigurationError("theorem1 strategies are built by the chain runner from a witness")
    else:
        raise ConfigurationError(f"unknown adversary strategy {name!r}")
    if active_from is not None:
        strat = Delayed(strat, int(active_from))
    return strat


class Delayed(Strategy):
    """Behaves honestly before ``active_from``, then defers to ``inner``."""

    def __init__(self, inner: Strategy, active_from: int):
        self.inner = inner
        self.active_from = active_from
        self.name = inner.name

    def act(self, node, rnd, inbox, honest_out, sim):
        if rnd < self.active_from:
            return list(honest_out)
        return self.inner.act(node, rnd, inbox, honest_out, sim)
