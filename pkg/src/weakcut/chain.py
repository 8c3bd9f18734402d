"""The three-execution indistinguishability chain on a violated cut.

Executions, run in lock step so each faulty side can replay the paired
honest traffic of the same round:

* ``alpha00``: A faulty, every input 0. A replays its honest behavior from ``beta01``.
* ``beta01``:  B faulty, U side input 0, everything else input 1. B replays
  ``alpha11`` toward V and ``alpha00`` toward everyone else.
* ``alpha11``: A faulty, every input 1. A replays ``beta01``.

U is the component of the witness's first separated node once the cut is
removed; V is the rest of the graph off the cut.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .adversary import Theorem1Replay, chain_sides
from .agreement import AgreementConfig, AgreementOutcome, eig_protocol, eig_round_budget, judge
from .checker import CutVerdict
from .errors import ConfigurationError
from .faults import FaultModel
from .graph import Graph
from .sim import Scenario, Simulation


@dataclass
class ChainResult:
    u_side: frozenset
    v_side: frozenset
    outcomes: dict  # phase -> AgreementOutcome
    u_views_equal: bool
    v_views_equal: bool
    digests: dict = field(default_factory=dict)

    @property
    def some_execution_fails(self) -> bool:
        return any(not o.ok for o in self.outcomes.values())

    def to_dict(self) -> dict:
        return {
            "u_side": sorted(self.u_side),
            "v_side": sorted(self.v_side),
            "u_views_equal": self.u_views_equal,
            "v_views_equal": self.v_views_equal,
            "executions": {p: dict(self.outcomes[p].to_dict(), transcript_digest=self.digests[p])
                           for p in ("alpha00", "beta01", "alpha11")},
        }


def chain_inputs(g: Graph, witness: CutVerdict, u_side: frozenset) -> dict:
    zeros = {v: 0 for v in g.nodes}
    ones = {v: 1 for v in g.nodes}
    mixed = {v: 0 if v in u_side else 1 for v in g.nodes}
    return {"alpha00": zeros, "beta01": mixed, "alpha11": ones}


def run_theorem1_chain(g: Graph, m: FaultModel, witness: CutVerdict, cfg: AgreementConfig,
                       record: bool = True) -> ChainResult:
    """Run the chain against EIG over FLOOD and compare the two honest-side views."""
    if witness is None or witness.passed or witness.cut is None:
        raise ConfigurationError("the chain needs a violation witness")
    u_side, v_side = chain_sides(witness, g)
    inputs = chain_inputs(g, witness, u_side)
    strategies = {p: Theorem1Replay(witness, p) for p in inputs}
    sims = {}
    for phase, strat in strategies.items():
        sc = Scenario(g, m, strat.faulty, inputs[phase], adversary=f"theorem1-{phase}")
        sims[phase] = Simulation(sc, eig_protocol(cfg, record=record), strat, True)
    strategies["alpha00"].bind([(sims["beta01"], None)])
    strategies["alpha11"].bind([(sims["beta01"], None)])
    strategies["beta01"].bind([(sims["alpha11"], v_side), (sims["alpha00"], None)])

    order = [sims[p] for p in ("alpha00", "beta01", "alpha11")]
    budget = eig_round_budget(g.n, cfg.f)
    for _ in range(budget):
        for s in order:
            s.compute_honest()
        for s in order:
            s.compute_byzantine()
        for s in order:
            s.deliver()
        if all(s.all_honest_decided() for s in order):
            break

    outcomes = {}
    digests = {}
    for phase, s in sims.items():
        t = s.transcript()
        agreement, validity = judge(t.decisions, s.scenario.inputs, s.scenario.honest)
        outcomes[phase] = AgreementOutcome(dict(t.decisions), agreement, validity, t)
        digests[phase] = t.digest()
    tr = {p: o.transcript for p, o in outcomes.items()}
    u_equal = tr["alpha00"].projection(u_side) == tr["beta01"].projection(u_side)
    v_equal = tr["beta01"].projection(v_side) == tr["alpha11"].projection(v_side)
    return ChainResult(u_side, v_side, outcomes, u_equal, v_equal, digests)
