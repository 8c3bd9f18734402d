"""Byzantine agreement over FLOOD channels.

``eig_over_flood`` runs exponential information gathering (f + 1 phases,
recursive strict majority, default 0) on the complete graph simulated by
FLOOD: each phase is one window of ``n*n + n`` physical rounds in which
every ordered pair of participants performs one FLOOD send, and the
receiver decodes at the end of the window.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigurationError
from .faults import enumerate_maximal_fault_sets
from .flood import DELIVERED, FloodEndpoint, window_length
from .graph import Graph
from .sim import Envelope, Process, Scenario, Simulation, Transcript

MODES = ("eig_over_flood", "trusted_leader", "trusted_subgraph")
DEFAULT_VALUE = 0


@dataclass(frozen=True)
class AgreementConfig:
    mode: str = "eig_over_flood"
    f: int = 0
    trusted: frozenset = frozenset()
    graph_knowledge: str = "known"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown agreement mode {self.mode!r}")
        if self.graph_knowledge not in ("known", "unknown"):
            raise ConfigurationError("graph_knowledge must be 'known' or 'unknown'")
        if self.f < 0:
            raise ConfigurationError("f must be nonnegative")

    @property
    def known(self) -> bool:
        return self.graph_knowledge == "known"

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "f": self.f, "graph_knowledge": self.graph_knowledge}
        if self.trusted:
            out["trusted"] = sorted(self.trusted)
        return out

    @classmethod
    def from_dict(cls, data, source=None) -> "AgreementConfig":
        from .errors import ParseError

        if not isinstance(data, dict):
            raise ParseError("agreement config must be a JSON object", source)
        trusted = data.get("trusted", [])
        if not isinstance(trusted, list) or not all(isinstance(v, str) for v in trusted):
            raise ParseError("'trusted' must be a list of node ids", source, None, "trusted")
        f = data.get("f", 0)
        if not isinstance(f, int) or f < 0:
            raise ParseError("'f' must be a nonnegative integer", source, None, "f")
        try:
            return cls(data.get("mode", "eig_over_flood"), f, frozenset(trusted),
                       data.get("graph_knowledge", "known"))
        except ConfigurationError as exc:
            raise ParseError(str(exc), source, None, "mode") from exc


@dataclass
class AgreementOutcome:
    decisions: dict
    agreement_holds: bool
    validity_holds: bool
    transcript: Optional[Transcript] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.agreement_holds and self.validity_holds

    def to_dict(self) -> dict:
        return {
            "decisions": {k: self.decisions[k] for k in sorted(self.decisions)},
            "agreement_holds": self.agreement_holds,
            "validity_holds": self.validity_holds,
        }


def judge(decisions: dict, inputs: dict, honest) -> tuple:
    """(agreement, validity) for the honest nodes' decisions."""
    values = {decisions.get(v) for v in honest}
    agreement = len(values) <= 1
    honest_inputs = {inputs[v] for v in honest}
    if len(honest_inputs) == 1:
        (v,) = honest_inputs
        validity = all(decisions.get(x) == v for x in honest)
    else:
        validity = True
    return agreement, validity


# -- exponential information gathering ----------------------------------------

@functools.lru_cache(maxsize=64)
def eig_labels(participants: tuple, depth: int) -> tuple:
    """Labels by level: level k holds every sequence of k distinct participants."""
    return tuple(tuple(itertools.permutations(participants, k)) for k in range(depth + 1))


@functools.lru_cache(maxsize=256)
def _send_labels(participants: tuple, depth: int, level: int, sender: str) -> tuple:
    return tuple(x for x in eig_labels(participants, depth)[level] if sender not in x)


class EigState:
    """One participant's EIG tree. Values are 0/1; bodies are ASCII digit strings."""

    def __init__(self, me: str, participants: tuple, f: int, value: int):
        self.me = me
        self.participants = participants
        self.f = f
        self.val = {(): value}

    def body_for_phase(self, phase: int) -> bytes:
        labels = _send_labels(self.participants, self.f + 1, phase - 1, self.me)
        return bytes(48 + self.val.get(x, DEFAULT_VALUE) for x in labels)

    def receive(self, phase: int, sender: str, body: Optional[bytes]):
        labels = _send_labels(self.participants, self.f + 1, phase - 1, sender)
        if body is None or len(body) != len(labels):
            values = [DEFAULT_VALUE] * len(labels)
        else:
            values = [1 if c == 49 else 0 if c == 48 else DEFAULT_VALUE for c in body]
        val = self.val
        for x, v in zip(labels, values):
            val[x + (sender,)] = v

    def receive_own(self, phase: int):
        val = self.val
        for x in _send_labels(self.participants, self.f + 1, phase - 1, self.me):
            val[x + (self.me,)] = val.get(x, DEFAULT_VALUE)

    def decide(self) -> int:
        depth = self.f + 1
        levels = eig_labels(self.participants, depth)
        newval = {x: self.val.get(x, DEFAULT_VALUE) for x in levels[depth]}
        half = None
        for k in range(depth - 1, -1, -1):
            for x in levels[k]:
                ones = zeros = 0
                for j in self.participants:
                    if j in x:
                        continue
                    if newval[x + (j,)]:
                        ones += 1
                    else:
                        zeros += 1
                half = (ones + zeros) / 2
                newval[x] = 1 if ones > half else 0 if zeros > half else DEFAULT_VALUE
        return newval[()]


class EigOverFlood(Process):
    """EIG among ``participants``; every node of the graph relays FLOOD traffic."""

    def __init__(self, node: str, sc: Scenario, f: int, participants: tuple,
                 known: bool = True, start: int = 1, record: bool = True):
        super().__init__(node)
        self.endpoint = FloodEndpoint(node, sc.graph, sc.fault_model, known)
        self.window = window_length(sc.graph.n)
        self.f = f
        self.start = start
        self.participants = participants
        self.member = node in participants
        self.eig = EigState(node, participants, f, sc.inputs[node]) if self.member else None
        self.record = record
        self.agreed = None

    @property
    def last_round(self) -> int:
        return self.start + (self.f + 1) * self.window - 1

    def step(self, rnd, inbox):
        out = self.endpoint.handle_all(inbox) if inbox else []
        if self.record and self.endpoint.discards:
            self.log(rnd, "discards", count=self.endpoint.discards)
            self.endpoint.discards = 0
        local = rnd - self.start
        if local < 0 or not self.member:
            return out
        phase, pos = divmod(local, self.window)
        phase += 1
        if phase > self.f + 1:
            return out
        if pos == 0:
            body = self.eig.body_for_phase(phase)
            for j in self.participants:
                if j != self.node:
                    out.extend(self.endpoint.originate(j, phase, body))
        if pos == self.window - 1:
            self.eig.receive_own(phase)
            for j in self.participants:
                if j == self.node:
                    continue
                res = self.endpoint.decode(j, phase)
                if self.record:
                    self.log(rnd, "decode", origin=j, tag=phase, **res.to_dict())
                self.eig.receive(phase, j, res.body if res.outcome == DELIVERED else None)
            if phase == self.f + 1:
                self.agreed = self.eig.decide()
                self.on_agreed(rnd)
        return out

    def on_agreed(self, rnd):
        self.decision = self.agreed
        self.decided = True


class TrustedLeader(Process):
    """The minimum-id trusted node sends its input; everyone adopts it."""

    def __init__(self, node: str, sc: Scenario, leader: str, known: bool = True, record: bool = True):
        super().__init__(node)
        self.endpoint = FloodEndpoint(node, sc.graph, sc.fault_model, known)
        self.window = window_length(sc.graph.n)
        self.leader = leader
        self.value = sc.inputs[node]
        self.record = record

    def step(self, rnd, inbox):
        out = []
        for env in inbox:
            out.extend(self.endpoint.handle(env))
        if rnd == 1 and self.node == self.leader:
            body = bytes([48 + self.value])
            for j in sorted(self.endpoint.uids):
                if j != self.node:
                    out.extend(self.endpoint.originate(j, 1, body))
        if rnd == self.window:
            if self.node == self.leader:
                self.decision = self.value
            else:
                res = self.endpoint.decode(self.leader, 1)
                if self.record:
                    self.log(rnd, "decode", origin=self.leader, tag=1, **res.to_dict())
                if res.outcome != DELIVERED or res.body not in (b"0", b"1"):
                    raise ConfigurationError(
                        f"leader broadcast did not decode at {self.node}: {res.outcome}")
                self.decision = res.body[0] - 48
            self.decided = True
        return out


class TrustedSubgraph(EigOverFlood):
    """Members agree by EIG, then send the agreed value to every outsider."""

    def __init__(self, node: str, sc: Scenario, f: int, members: tuple, known: bool = True,
                 record: bool = True):
        super().__init__(node, sc, f, members, known, 1, record)
        self.outsiders = tuple(v for v in sc.graph.nodes if v not in members)
        self.broadcast_start = self.last_round + 1

    def on_agreed(self, rnd):
        # members keep running until the broadcast window closes
        self.decision = self.agreed

    def step(self, rnd, inbox):
        out = super().step(rnd, inbox)
        if rnd < self.broadcast_start:
            return out
        pos = rnd - self.broadcast_start
        tag = self.f + 2
        if pos == 0 and self.member:
            body = bytes([48 + self.agreed])
            for j in self.outsiders:
                out.extend(self.endpoint.originate(j, tag, body))
        if pos == self.window - 1 and not self.member:
            votes = []
            for j in self.participants:
                res = self.endpoint.decode(j, tag)
                if self.record:
                    self.log(rnd, "decode", origin=j, tag=tag, **res.to_dict())
                if res.outcome == DELIVERED and res.body in (b"0", b"1"):
                    votes.append(res.body[0] - 48)
            ones = sum(votes)
            half = len(self.participants) / 2
            self.decision = 1 if ones > half else 0 if len(votes) - ones > half else DEFAULT_VALUE
        if pos == self.window - 1:
            self.decided = True
        return out


class DirectEig(Process):
    """Reference EIG on a real complete graph: one round per phase, direct sends."""

    def __init__(self, node: str, sc: Scenario, f: int):
        super().__init__(node)
        self.participants = sc.graph.nodes
        self.eig = EigState(node, self.participants, f, sc.inputs[node])
        self.f = f

    def step(self, rnd, inbox):
        if rnd >= 2:
            phase = rnd - 1
            got = {env.sender: bytes(env.payload) for env in inbox}
            self.eig.receive_own(phase)
            for j in self.participants:
                if j != self.node:
                    self.eig.receive(phase, j, got.get(j))
            if phase == self.f + 1:
                self.decision = self.eig.decide()
                self.decided = True
                return []
        body = self.eig.body_for_phase(rnd)
        return [Envelope(self.node, j, body) for j in self.participants if j != self.node]


# -- entry points ---------------------------------------------------------------

def eig_round_budget(n: int, f: int) -> int:
    return (f + 1) * window_length(n)


def _outcome(sim: Simulation, transcript: Transcript) -> AgreementOutcome:
    sc = sim.scenario
    agreement, validity = judge(transcript.decisions, sc.inputs, sc.honest)
    return AgreementOutcome(dict(transcript.decisions), agreement, validity, transcript)


def _strategy(sc: Scenario, strategy):
    if strategy is None and sc.byzantine:
        from .adversary import make_strategy

        strategy = make_strategy(sc.adversary, sc.adversary_params, sc.seed)
    return strategy


def eig_protocol(cfg: AgreementConfig, participants: Optional[tuple] = None, record: bool = True):
    def factory(node, sc):
        parts = participants if participants is not None else sc.graph.nodes
        return EigOverFlood(node, sc, cfg.f, parts, cfg.known, 1, record)
    return factory


def run_agreement(sc: Scenario, cfg: AgreementConfig, strategy=None, record: bool = True) -> AgreementOutcome:
    """Agreement by EIG over FLOOD on the whole node set."""
    if cfg.mode != "eig_over_flood":
        raise ConfigurationError("run_agreement expects mode 'eig_over_flood'")
    n = sc.graph.n
    if 3 * cfg.f >= n:
        raise ConfigurationError(f"EIG needs 3f < n, got f={cfg.f}, n={n}")
    sim = Simulation(sc, eig_protocol(cfg, record=record), _strategy(sc, strategy), record)
    return _outcome(sim, sim.run(eig_round_budget(n, cfg.f)))


def elect_leader(trusted) -> str:
    return min(trusted)


def run_trusted_leader(sc: Scenario, cfg: AgreementConfig, strategy=None, record: bool = True) -> AgreementOutcome:
    """The minimum-id trusted node sends its input to all; everyone adopts it."""
    trusted = frozenset(cfg.trusted) or sc.fault_model.trusted
    if not trusted:
        raise ConfigurationError("trusted_leader needs a nonempty trusted set")
    if not trusted <= sc.fault_model.trusted:
        raise ConfigurationError("configured trusted nodes must be trusted by the fault model")
    leader = elect_leader(trusted)

    def factory(node, s):
        return TrustedLeader(node, s, leader, cfg.known, record)

    sim = Simulation(sc, factory, _strategy(sc, strategy), record)
    return _outcome(sim, sim.run(window_length(sc.graph.n)))


def subgraph_fault_bound(sc: Scenario, members) -> int:
    members = frozenset(members)
    tops = enumerate_maximal_fault_sets(sc.fault_model, sc.graph.nodes)
    return max((len(t & members) for t in tops), default=0)


def run_trusted_subgraph(sc: Scenario, cfg: AgreementConfig, strategy=None, record: bool = True) -> AgreementOutcome:
    """Members agree among themselves, then outsiders adopt the members' majority."""
    members = tuple(sorted(cfg.trusted))
    if not members:
        raise ConfigurationError("trusted_subgraph needs a nonempty member set")
    if set(members).difference(sc.graph.nodes):
        raise ConfigurationError("subgraph members must be graph nodes")
    f_sub = subgraph_fault_bound(sc, members)
    if 2 * f_sub >= len(members):
        raise ConfigurationError(
            f"the subgraph of {len(members)} can hold {f_sub} faults; it needs a strict honest majority")

    def factory(node, s):
        return TrustedSubgraph(node, s, f_sub, members, cfg.known, record)

    sim = Simulation(sc, factory, _strategy(sc, strategy), record)
    budget = (f_sub + 2) * window_length(sc.graph.n)
    return _outcome(sim, sim.run(budget))


def run_configured(sc: Scenario, cfg: AgreementConfig, strategy=None, record: bool = True) -> AgreementOutcome:
    if cfg.mode == "eig_over_flood":
        return run_agreement(sc, cfg, strategy, record)
    if cfg.mode == "trusted_leader":
        return run_trusted_leader(sc, cfg, strategy, record)
    return run_trusted_subgraph(sc, cfg, strategy, record)


def run_direct_eig(inputs: dict, f: int, byzantine=(), strategy=None) -> AgreementOutcome:
    """EIG on a real complete graph over the same node ids (the reference for FLOOD runs)."""
    from .faults import FaultModel

    nodes = sorted(inputs)
    g = Graph(nodes, itertools.combinations(nodes, 2))
    sc = Scenario(g, FaultModel.threshold(len(byzantine)), frozenset(byzantine), dict(inputs))
    sim = Simulation(sc, lambda v, s: DirectEig(v, s, f), strategy, True)
    return _outcome(sim, sim.run(f + 2))
