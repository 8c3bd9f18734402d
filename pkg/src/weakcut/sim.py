"""Deterministic synchronous round simulator.

Each round every honest process turns its inbox into outgoing envelopes,
then the adversary chooses the outgoing envelopes of every Byzantine node
(it sees all honest state and all honest traffic of the round), then every
envelope that travels along a graph edge from its true sender is delivered.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from .errors import ConfigurationError, ParseError, SimulationError
from .faults import FaultModel
from .graph import Graph
from .jsonio import canonical_dumps


class Envelope(NamedTuple):
    sender: str
    to: str
    payload: object


def payload_bytes(payload) -> bytes:
    if isinstance(payload, (bytes, bytearray)):
        return bytes(payload)
    return payload.to_bytes()


class Process:
    """Honest node logic. Subclasses override :meth:`step`."""

    decision = None
    decided = False

    def __init__(self, node: str):
        self.node = node
        self.events: list = []

    def step(self, rnd: int, inbox: list) -> list:
        raise NotImplementedError

    def log(self, rnd: int, kind: str, **data):
        self.events.append((rnd, self.node, kind, data))


@dataclass(frozen=True)
class Scenario:
    graph: Graph
    fault_model: FaultModel
    byzantine: frozenset = frozenset()
    inputs: dict = field(default_factory=dict)
    adversary: str = "silent"
    adversary_params: dict = field(default_factory=dict)
    seed: int = 0

    def validate(self) -> "Scenario":
        unknown = set(self.byzantine).difference(self.graph.nodes)
        if unknown:
            raise ConfigurationError(f"byzantine nodes {sorted(unknown)} are not in the graph")
        if not self.fault_model.is_valid(self.byzantine):
            raise ConfigurationError(
                f"byzantine set {sorted(self.byzantine)} is not a valid fault set under the fault model")
        missing = [v for v in self.graph.nodes if v not in self.inputs]
        if missing:
            raise ConfigurationError(f"nodes without an input: {missing}")
        return self

    @property
    def honest(self) -> tuple:
        return tuple(v for v in self.graph.nodes if v not in self.byzantine)

    def replace(self, **changes) -> "Scenario":
        data = dict(graph=self.graph, fault_model=self.fault_model, byzantine=self.byzantine,
                    inputs=self.inputs, adversary=self.adversary,
                    adversary_params=self.adversary_params, seed=self.seed)
        data.update(changes)
        if "byzantine" in changes:
            data["byzantine"] = frozenset(data["byzantine"])
        return Scenario(**data)

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "fault_model": self.fault_model.to_dict(),
            "byzantine": sorted(self.byzantine),
            "inputs": {k: self.inputs[k] for k in sorted(self.inputs)},
            "adversary": {"strategy": self.adversary, "params": self.adversary_params},
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data, source=None, require_all=True) -> "Scenario":
        if not isinstance(data, dict):
            raise ParseError("scenario must be a JSON object", source)
        for key in ("graph", "fault_model"):
            if key not in data:
                raise ParseError(f"scenario lacks '{key}'", source, None, key)
        graph = Graph.from_dict(data["graph"], source)
        model = FaultModel.from_dict(data["fault_model"], source)
        byz = data.get("byzantine", [])
        if not isinstance(byz, list) or not all(isinstance(v, str) for v in byz):
            raise ParseError("'byzantine' must be a list of node ids", source, None, "byzantine")
        inputs = data.get("inputs", {})
        if not isinstance(inputs, dict):
            raise ParseError("'inputs' must be an object", source, None, "inputs")
        for k, v in inputs.items():
            if v not in (0, 1) or isinstance(v, bool):
                raise ParseError(f"input of {k!r} must be 0 or 1, got {v!r}", source, None, k)
        if require_all and "inputs" not in data:
            raise ParseError("scenario lacks 'inputs'", source, None, "inputs")
        adv = data.get("adversary", {"strategy": "silent"})
        if isinstance(adv, str):
            adv = {"strategy": adv}
        if not isinstance(adv, dict) or not isinstance(adv.get("strategy"), str):
            raise ParseError("'adversary' must name a strategy", source, None, "adversary")
        params = adv.get("params", {}) or {}
        seed = data.get("seed", 0)
        if not isinstance(seed, int):
            raise ParseError("'seed' must be an integer", source, None, "seed")
        return cls(graph, model, frozenset(byz), dict(inputs), adv["strategy"], dict(params), seed)


@dataclass
class Transcript:
    rounds: list  # [(round, (Envelope, ...)), ...]
    decisions: dict
    events: list
    byzantine: frozenset = frozenset()
    dropped: int = 0

    def to_dict(self) -> dict:
        return {
            "rounds": [
                {"round": r, "envelopes": [
                    {"from": e.sender, "to": e.to, "payload": payload_bytes(e.payload).hex()} for e in envs]}
                for r, envs in self.rounds
            ],
            "decisions": {k: self.decisions[k] for k in sorted(self.decisions)},
            "events": [{"round": r, "node": n, "kind": k, "data": d} for r, n, k, d in self.events],
            "byzantine": sorted(self.byzantine),
            "dropped": self.dropped,
        }

    def canonical_bytes(self) -> bytes:
        return canonical_dumps(self.to_dict()).encode("ascii")

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()

    def projection(self, nodes) -> bytes:
        """Canonical bytes of every envelope sent or received by ``nodes``."""
        nodes = frozenset(nodes)
        view = []
        for r, envs in self.rounds:
            kept = [[e.sender, e.to, payload_bytes(e.payload).hex()]
                    for e in envs if e.sender in nodes or e.to in nodes]
            if kept:
                view.append([r, kept])
        return canonical_dumps(view).encode("ascii")


class Strategy:
    """Chooses the outgoing envelopes of one Byzantine node per round."""

    name = "abstract"

    def act(self, node: str, rnd: int, inbox: list, honest_out: list, sim: "Simulation") -> list:
        raise NotImplementedError


ProtocolFactory = Callable[[str, Scenario], Process]


class Simulation:
    """One execution. :meth:`step` runs a round; the three phases are public
    so that several executions can be interleaved in lock step."""

    def __init__(self, scenario: Scenario, protocol: ProtocolFactory,
                 strategy: Optional[Strategy] = None, record: bool = True):
        scenario.validate()
        self.scenario = scenario
        self.graph = scenario.graph
        self.byzantine = frozenset(scenario.byzantine)
        self.strategy = strategy
        if self.byzantine and strategy is None:
            raise ConfigurationError("byzantine nodes need an adversary strategy")
        self.record = record
        self.processes = {v: protocol(v, scenario) for v in self.graph.nodes}
        self.inbox: dict = {v: [] for v in self.graph.nodes}
        self.honest_out: dict = {}
        self.outbox: dict = {}
        self.round = 0
        self.rounds: list = []
        self.dropped = 0

    def compute_honest(self):
        """Run every process (Byzantine ones as shadows) on its inbox."""
        self.round += 1
        rnd = self.round
        out = {}
        for v, proc in self.processes.items():
            try:
                out[v] = proc.step(rnd, self.inbox[v])
            except Exception as exc:  # noqa: BLE001 - reported with node and round
                raise SimulationError(v, rnd, exc) from exc
        self.honest_out = out

    def compute_byzantine(self):
        out = dict(self.honest_out)
        for b in sorted(self.byzantine):
            out[b] = list(self.strategy.act(b, self.round, self.inbox[b], self.honest_out[b], self))
        self.outbox = out

    def deliver(self):
        adj = self.graph._adj
        nxt = {v: [] for v in self.graph.nodes}
        record = self.record
        delivered = []
        for v in self.graph.nodes:
            nbrs = adj[v]
            for env in self.outbox[v]:
                if env[0] != v or env[1] not in nbrs:
                    self.dropped += 1
                    continue
                nxt[env[1]].append(env)
            if record:
                delivered.extend(e for e in self.outbox[v] if e[0] == v and e[1] in nbrs)
        if record and delivered:
            self.rounds.append((self.round, tuple(delivered)))
        self.inbox = nxt

    def step(self):
        self.compute_honest()
        self.compute_byzantine()
        self.deliver()

    def all_honest_decided(self) -> bool:
        return all(p.decided for v, p in self.processes.items() if v not in self.byzantine)

    def run(self, round_budget: int) -> Transcript:
        if round_budget < 1:
            raise ConfigurationError("round budget must be at least 1")
        while self.round < round_budget:
            self.step()
            if self.all_honest_decided():
                break
        return self.transcript()

    def transcript(self) -> Transcript:
        honest = [v for v in self.graph.nodes if v not in self.byzantine]
        decisions = {v: self.processes[v].decision for v in honest}
        events = []
        if self.record:
            for v in honest:
                events.extend(self.processes[v].events)
            events.sort(key=lambda e: (e[0], e[1]))
        return Transcript(self.rounds, decisions, events, self.byzantine, self.dropped)


def run(sc: Scenario, round_budget: int, protocol: ProtocolFactory,
        strategy: Optional[Strategy] = None, record: bool = True) -> Transcript:
    """Run one scenario; the strategy defaults to the scenario's named adversary."""
    if strategy is None and sc.byzantine:
        from .adversary import make_strategy

        strategy = make_strategy(sc.adversary, sc.adversary_params, sc.seed)
    return Simulation(sc, protocol, strategy, record).run(round_budget)


class EchoProcess(Process):
    """Sends its input once to every neighbor and decides on what it hears."""

    def __init__(self, node: str, sc: Scenario):
        super().__init__(node)
        self.value = sc.inputs[node]
        self.nbrs = sc.graph.neighbor_tuple(node)
        self.heard: dict = {}

    def step(self, rnd, inbox):
        for env in inbox:
            self.heard[env.sender] = payload_bytes(env.payload)
        if rnd == 1:
            return [Envelope(self.node, w, bytes([self.value])) for w in self.nbrs]
        self.decided = True
        self.decision = {k: self.heard[k].hex() for k in sorted(self.heard)}
        return []
