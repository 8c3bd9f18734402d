"""FLOOD: path-header relaying and the fault-hypothesis decoder.

A send from ``origin`` to ``dest`` leaves ``origin`` with header
``(origin,)``. Every other node that accepts a copy appends its own id and
forwards it to each neighbor not already on the header; ``dest`` only
collects. After the wait, ``dest`` tries every maximal valid fault set
that leaves out ``origin``, deletes the copies whose header meets it, and
keeps the body when the survivors agree.

Wire layout of one message (all integers big-endian)::

    magic   4 bytes  b"WCF1"
    flags   u8       bit 0 set when an attestation block follows the body
    origin  str      (a str is u16 byte length + UTF-8 bytes)
    dest    str
    tag     u32      session id, unique per (origin, dest)
    count   u16      number of header entries, then ``count`` strs
    body    u32 length + raw bytes
    attest  for each header entry: u16 k, then k strs (sorted neighbor ids)
"""
from __future__ import annotations

import functools
import struct
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .faults import DEFAULT_MAX_SUBSETS, FaultModel, enumerate_maximal_fault_sets
from .graph import Graph
from .sim import Envelope

MAGIC = b"WCF1"

DELIVERED = "delivered"
NO_MESSAGE = "no_message"
AMBIGUOUS = "ambiguous"


class PathMessage(NamedTuple):
    origin: str
    dest: str
    tag: int
    header: tuple
    body: bytes
    attest: Optional[tuple] = None  # one sorted neighbor tuple per header entry

    def to_bytes(self) -> bytes:
        parts = [MAGIC, bytes([1 if self.attest is not None else 0]),
                 _pack_str(self.origin), _pack_str(self.dest), struct.pack(">I", self.tag),
                 struct.pack(">H", len(self.header))]
        parts.extend(_pack_str(h) for h in self.header)
        parts.append(struct.pack(">I", len(self.body)))
        parts.append(bytes(self.body))
        if self.attest is not None:
            for nbrs in self.attest:
                parts.append(struct.pack(">H", len(nbrs)))
                parts.extend(_pack_str(x) for x in nbrs)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "PathMessage":
        r = _Reader(data)
        if r.take(4) != MAGIC:
            raise ValueError("bad magic")
        flags = r.take(1)[0]
        if flags not in (0, 1):
            raise ValueError("bad flags")
        origin, dest = r.string(), r.string()
        (tag,) = struct.unpack(">I", r.take(4))
        (count,) = struct.unpack(">H", r.take(2))
        header = tuple(r.string() for _ in range(count))
        (blen,) = struct.unpack(">I", r.take(4))
        body = r.take(blen)
        attest = None
        if flags:
            attest = []
            for _ in range(count):
                (k,) = struct.unpack(">H", r.take(2))
                attest.append(tuple(r.string() for _ in range(k)))
            attest = tuple(attest)
        if r.pos != len(data):
            raise ValueError("trailing bytes")
        return cls(origin, dest, tag, header, body, attest)


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack(">H", len(raw)) + raw


class _Reader:
    def __init__(self, data: bytes):
        self.data = bytes(data)
        self.pos = 0

    def take(self, k: int) -> bytes:
        if self.pos + k > len(self.data):
            raise ValueError("truncated message")
        chunk = self.data[self.pos:self.pos + k]
        self.pos += k
        return chunk

    def string(self) -> str:
        (k,) = struct.unpack(">H", self.take(2))
        return self.take(k).decode("utf-8")


def as_message(payload) -> Optional[PathMessage]:
    """The PathMessage carried by a payload, or None for anything unparseable."""
    if type(payload) is PathMessage:
        return payload
    if isinstance(payload, (bytes, bytearray)):
        try:
            return PathMessage.from_bytes(payload)
        except (ValueError, UnicodeDecodeError, struct.error):
            return None
    return None


def round_budget(g_size: int) -> int:
    """Rounds the receiver waits after the first copy arrives."""
    if g_size < 1:
        raise ValueError("graph size must be at least 1")
    return g_size * g_size


def window_length(g_size: int) -> int:
    """Physical rounds reserved for one send: worst first arrival plus the wait."""
    return round_budget(g_size) + g_size


# -- header validity ---------------------------------------------------------

def _structural_problem(header: tuple, origin: str, uids) -> Optional[str]:
    if not header:
        return "empty header"
    if header[0] != origin:
        return "origin not first"
    if len(set(header)) != len(header):
        return "repeated id"
    for h in header:
        if h not in uids:
            return "unknown id"
    return None


def known_header_problem(g: Graph, msg: PathMessage) -> Optional[str]:
    """Reasons a header is nonsense when the graph is known (cached per graph)."""
    cache = g._header_ok
    key = (msg.origin, msg.header)
    if key in cache:
        return cache[key]
    problem = _structural_problem(msg.header, msg.origin, g._adj)
    if problem is None:
        h = msg.header
        for i in range(len(h) - 1):
            if h[i + 1] not in g._adj[h[i]]:
                problem = "non-adjacent hop"
                break
    cache[key] = problem
    return problem


def attested_header_problem(msg: PathMessage, uids) -> Optional[str]:
    """Header validity judged only from the neighbor sets carried in the message."""
    problem = _structural_problem(msg.header, msg.origin, uids)
    if problem is not None:
        return problem
    att = msg.attest
    if att is None or len(att) != len(msg.header):
        return "missing attestations"
    h = msg.header
    for i in range(len(h) - 1):
        if h[i + 1] not in att[i] or h[i] not in att[i + 1]:
            return "unattested hop"
    return None


def message_problem(msg: Optional[PathMessage], sender: str, me: str, graph: Optional[Graph],
                    uids, my_neighbors=None) -> Optional[str]:
    """Why ``me`` must discard ``msg`` received from ``sender`` (None if acceptable)."""
    if msg is None:
        return "malformed encoding"
    if msg.origin == msg.dest or msg.dest not in uids:
        return "bad session"
    header = msg.header
    if not header or header[-1] != sender:
        return "last hop is not the sending neighbor"
    if me in header:
        return "own id in header"
    if graph is not None:
        return known_header_problem(graph, msg)
    problem = attested_header_problem(msg, uids)
    if problem is None and me not in msg.attest[-1]:
        problem = "sender does not attest the link"
    return problem


# -- send / relay ------------------------------------------------------------

def flood_send(g: Graph, origin: str, body: bytes, dest: str, tag: int = 0,
               attest_neighbors: bool = False) -> list:
    """Initial envelopes of a send. Sending to oneself yields nothing."""
    if origin == dest:
        return []
    nbrs = g.neighbor_tuple(origin)
    att = (nbrs,) if attest_neighbors else None
    msg = PathMessage(origin, dest, tag, (origin,), bytes(body), att)
    return [Envelope(origin, w, msg) for w in nbrs]


def flood_relay(me: str, sender: str, incoming, my_neighbors: tuple,
                graph: Optional[Graph] = None, uids=None, attest: bool = False) -> list:
    """Envelopes ``me`` forwards for one received copy (empty when discarded)."""
    msg = as_message(incoming)
    if uids is None:
        uids = graph._adj if graph is not None else ()
    if message_problem(msg, sender, me, graph, uids, my_neighbors) is not None:
        return []
    if msg.dest == me:
        return []
    return _forward(me, msg, my_neighbors, attest)


def _forward(me: str, msg: PathMessage, my_neighbors: tuple, attest: bool) -> list:
    header = msg.header
    att = msg.attest + (my_neighbors,) if attest else None
    out_msg = PathMessage(msg.origin, msg.dest, msg.tag, header + (me,), msg.body, att)
    return [Envelope(me, w, out_msg) for w in my_neighbors if w not in header]


# -- decoding ----------------------------------------------------------------

@dataclass(frozen=True)
class DecodeResult:
    outcome: str
    body: Optional[bytes] = None
    hypothesis: frozenset = frozenset()
    conflict: Optional[tuple] = None  # (F1, body1, F2, body2)
    attested_cut: Optional[frozenset] = None

    @property
    def delivered(self) -> bool:
        return self.outcome == DELIVERED

    def to_dict(self) -> dict:
        out = {"outcome": self.outcome}
        if self.outcome == DELIVERED:
            out["body"] = self.body.hex()
            out["hypothesis"] = sorted(self.hypothesis)
        if self.conflict is not None:
            f1, b1, f2, b2 = self.conflict
            out["conflict"] = {"f1": sorted(f1), "body1": b1.hex(), "f2": sorted(f2), "body2": b2.hex()}
        if self.attested_cut is not None:
            out["attested_cut"] = sorted(self.attested_cut)
        return out


@functools.lru_cache(maxsize=1024)
def _hypotheses(m: FaultModel, uids: tuple, origin: str, max_subsets: int) -> tuple:
    # A hypothesis naming the origin deletes every copy and says nothing, so the
    # sweep runs over the maximal fault sets among the other nodes. Every valid
    # set avoiding the origin sits inside one of these.
    index = {v: i for i, v in enumerate(uids)}
    out = []
    others = tuple(v for v in uids if v != origin)
    for hyp in enumerate_maximal_fault_sets(m, others, max_subsets):
        mask = 0
        for v in hyp:
            mask |= 1 << index[v]
        out.append((hyp, mask))
    return tuple(out)


@functools.lru_cache(maxsize=64)
def _mask_table(uids: tuple):
    """Node index plus a memo of header bitmasks for one id universe."""
    return {v: i for i, v in enumerate(uids)}, {}


def _sweep(messages, m: FaultModel, uids: tuple, origin: str, max_subsets: int):
    """(hypothesis, body) for every hypothesis whose survivors share one body."""
    index, masks_of = _mask_table(uids)
    groups: dict = {}
    for msg in messages:
        header = msg.header
        if not header or header[0] != origin:
            continue
        mask = masks_of.get(header)
        if mask is None:
            mask = 0
            for h in header:
                mask |= 1 << index[h]
            masks_of[header] = mask
        if msg.body in groups:
            groups[msg.body].add(mask)
        else:
            groups[msg.body] = {mask}
    records = []
    if not groups:
        return records
    group_list = list(groups.items())
    for hyp, hmask in _hypotheses(m, uids, origin, max_subsets):
        present = None
        clash = False
        for body, masks in group_list:
            for mk in masks:
                if not mk & hmask:
                    break
            else:
                continue
            if present is not None:
                clash = True
                break
            present = body
        if present is not None and not clash:
            records.append((hyp, present))
    return records


def _conclude(records) -> DecodeResult:
    if not records:
        return DecodeResult(NO_MESSAGE)
    first_hyp, first_body = records[0]
    for hyp, body in records[1:]:
        if body != first_body:
            return DecodeResult(AMBIGUOUS, conflict=(first_hyp, first_body, hyp, body))
    return DecodeResult(DELIVERED, first_body, first_hyp)


def flood_decode(inbox, m: FaultModel, g: Graph, origin: str,
                 max_subsets: int = DEFAULT_MAX_SUBSETS) -> DecodeResult:
    """Decode the copies of one send that reached the receiver (graph known)."""
    msgs = [x for x in inbox if known_header_problem(g, x) is None]
    return _conclude(_sweep(msgs, m, g.nodes, origin, max_subsets))


def flood_decode_unknown(inbox, m: FaultModel, origin: str, receiver: str, uids,
                         receiver_neighbors=(), max_subsets: int = DEFAULT_MAX_SUBSETS) -> DecodeResult:
    """Decode without the graph, trusting only attested adjacency.

    On a conflict between hypotheses F1 and F2 the receiver rebuilds T, its
    component among nodes outside F1 | F2 as attested by copies that avoid
    both, and reports the boundary of T as the cut that both sides can
    fill with faults.
    """
    uids = tuple(sorted(uids))
    msgs = [x for x in inbox if attested_header_problem(x, uids) is None]
    result = _conclude(_sweep(msgs, m, uids, origin, max_subsets))
    if result.outcome != AMBIGUOUS:
        return result
    f1, _, f2, _ = result.conflict
    boundary = attested_boundary(msgs, receiver, tuple(receiver_neighbors), f1 | f2)
    # F1 & boundary and F2 & boundary are subsets of valid sets, hence both
    # can be all faulty: the pair is a genuine cut violation, never a
    # hypothesis the attestations can rule out.
    assert m.can_all_fault(f1 & boundary) and m.can_all_fault(f2 & boundary)
    return DecodeResult(AMBIGUOUS, conflict=result.conflict, attested_cut=boundary)


def attested_boundary(msgs, receiver: str, receiver_neighbors: tuple, excluded) -> frozenset:
    """Neighbors of T outside T, where T is the receiver's attested component avoiding ``excluded``."""
    attested = {receiver: tuple(receiver_neighbors)}
    for msg in msgs:
        if excluded.isdisjoint(msg.header):
            for node, nbrs in zip(msg.header, msg.attest):
                attested.setdefault(node, nbrs)
    tree = {receiver}
    stack = [receiver]
    boundary = set()
    while stack:
        x = stack.pop()
        for y in attested.get(x, ()):
            if y in excluded:
                boundary.add(y)
            elif y not in tree:
                tree.add(y)
                stack.append(y)
    return frozenset(boundary)


# -- the per-node endpoint used by protocols ----------------------------------

def _new_msg(fields: tuple) -> PathMessage:
    return tuple.__new__(PathMessage, fields)


def _new_env(fields: tuple) -> Envelope:
    return tuple.__new__(Envelope, fields)


class FloodEndpoint:
    """FLOOD state of one node: relays other sends and collects its own."""

    def __init__(self, me: str, graph: Graph, model: FaultModel, known: bool = True,
                 max_subsets: int = DEFAULT_MAX_SUBSETS):
        self.me = me
        self.model = model
        self.known = known
        self.graph = graph if known else None
        self.uids = graph.nodes  # the id universe is common knowledge either way
        self.uid_set = graph._adj
        self.nbrs = graph.neighbor_tuple(me)
        self.max_subsets = max_subsets
        self.inbox: dict = {}
        self.discards = 0
        self.keep_discards = False
        self.discard_log: list = []
        self._routes = graph._routes.setdefault(me, {})

    def originate(self, dest: str, tag: int, body: bytes) -> list:
        att = (self.nbrs,) if not self.known else None
        msg = PathMessage(self.me, dest, tag, (self.me,), bytes(body), att)
        return [Envelope(self.me, w, msg) for w in self.nbrs]

    def handle(self, env: Envelope) -> list:
        msg = env.payload
        if self.known and type(msg) is PathMessage:
            return self._handle_known(env.sender, msg)
        if type(msg) is not PathMessage:
            msg = as_message(msg)
        problem = message_problem(msg, env.sender, self.me, self.graph, self.uid_set, self.nbrs)
        if problem is not None:
            self._discard(env.sender, problem)
            return []
        if msg.dest == self.me:
            self.inbox.setdefault((msg.origin, msg.tag), []).append(msg)
            return []
        return _forward(self.me, msg, self.nbrs, not self.known)

    def handle_all(self, inbox) -> list:
        """Process one round's inbox; returns every forwarded envelope."""
        if not self.known:
            out = []
            for env in inbox:
                out.extend(self.handle(env))
            return out
        out = []
        routes = self._routes
        collected = self.inbox
        me = self.me
        for env in inbox:
            msg = env[2]
            if type(msg) is not PathMessage:
                out.extend(self.handle(env))
                continue
            route = routes.get((env[0], msg[0], msg[1], msg[3]))
            if route is None:
                out.extend(self._handle_known(env[0], msg))
            elif route is True:
                key = (msg[0], msg[2])
                if key in collected:
                    collected[key].append(msg)
                else:
                    collected[key] = [msg]
            elif type(route) is str:
                self._discard(env[0], route)
            else:
                out_msg = _new_msg((msg[0], msg[1], msg[2], route[0], msg[4], None))
                out += [_new_env((me, w, out_msg)) for w in route[1]]
        return out

    def _handle_known(self, sender: str, msg: PathMessage) -> list:
        # The relay decision depends only on (sender, origin, dest, header);
        # it is memoized per graph and receiving node.
        key = (sender, msg.origin, msg.dest, msg.header)
        route = self._routes.get(key)
        if route is None:
            problem = message_problem(msg, sender, self.me, self.graph, self.uid_set, self.nbrs)
            if problem is not None:
                route = problem
            elif msg.dest == self.me:
                route = True
            else:
                header = msg.header
                route = (header + (self.me,), tuple(w for w in self.nbrs if w not in header))
            self._routes[key] = route
        if route is True:
            self.inbox.setdefault((msg.origin, msg.tag), []).append(msg)
            return []
        if type(route) is str:
            self._discard(sender, route)
            return []
        out_msg = _new_msg((msg.origin, msg.dest, msg.tag, route[0], msg.body, None))
        me = self.me
        return [_new_env((me, w, out_msg)) for w in route[1]]

    def _discard(self, sender: str, reason: str):
        self.discards += 1
        if self.keep_discards:
            self.discard_log.append((sender, reason))

    def decode(self, origin: str, tag: int) -> DecodeResult:
        msgs = self.inbox.pop((origin, tag), [])
        if self.known:
            # headers were already checked against the graph on receipt
            return _conclude(_sweep(msgs, self.model, self.uids, origin, self.max_subsets))
        return flood_decode_unknown(msgs, self.model, origin, self.me, self.uids, self.nbrs, self.max_subsets)


class _ExchangeProcess:
    """One FLOOD send from ``origin`` to ``dest``; ``dest`` decodes when the window closes."""

    decision = None
    decided = False

    def __init__(self, node, sc, origin, dest, body, known, record):
        self.node = node
        self.events: list = []
        self.endpoint = FloodEndpoint(node, sc.graph, sc.fault_model, known)
        self.endpoint.keep_discards = record
        self.origin, self.dest, self.body = origin, dest, body
        self.window = window_length(sc.graph.n)
        self.result: Optional[DecodeResult] = None

    def step(self, rnd, inbox):
        out = self.endpoint.handle_all(inbox) if inbox else []
        for sender, reason in self.endpoint.discard_log:
            self.events.append((rnd, self.node, "discard", {"from": sender, "reason": reason}))
        self.endpoint.discard_log.clear()
        if rnd == 1 and self.node == self.origin:
            out.extend(self.endpoint.originate(self.dest, 0, self.body))
        if rnd == self.window:
            if self.node == self.dest:
                self.result = self.endpoint.decode(self.origin, 0)
                self.decision = self.result.to_dict()
                self.events.append((rnd, self.node, "decode", self.decision))
            self.decided = True
        return out


def flood_exchange(sc, origin: str, dest: str, body: bytes, known: bool = True,
                   strategy=None, record: bool = True):
    """Run one FLOOD send on scenario ``sc``; returns (DecodeResult at dest, Transcript)."""
    from .sim import Simulation

    if origin == dest:
        return DecodeResult(DELIVERED, bytes(body)), None
    if strategy is None and sc.byzantine:
        from .adversary import make_strategy

        strategy = make_strategy(sc.adversary, sc.adversary_params, sc.seed)
    sim = Simulation(sc, lambda v, s: _ExchangeProcess(v, s, origin, dest, bytes(body), known, record),
                     strategy, record)
    transcript = sim.run(window_length(sc.graph.n))
    return sim.processes[dest].result, transcript
