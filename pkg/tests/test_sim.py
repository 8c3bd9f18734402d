import pytest

from weakcut import fixtures as fx
from weakcut.adversary import SWEEPABLE, Theorem1Replay, adversary_library, chain_sides, make_strategy
from weakcut.agreement import AgreementConfig, eig_protocol, run_agreement
from weakcut.chain import run_theorem1_chain
from weakcut.checker import check_weak_cut_property
from weakcut.errors import ConfigurationError, ParseError, SimulationError
from weakcut.faults import FaultModel
from weakcut.graph import Graph
from weakcut.sim import EchoProcess, Envelope, Process, Scenario, Strategy, run


def two_nodes():
    g = Graph(["a", "b"], [("a", "b")])
    return Scenario(g, FaultModel.threshold(0), frozenset(), {"a": 0, "b": 1})


def test_echo_one_round():
    t = run(two_nodes(), 1, EchoProcess)
    assert len(t.rounds) == 1
    rnd, envs = t.rounds[0]
    assert rnd == 1
    assert {(e.sender, e.to, e.payload) for e in envs} == {("a", "b", b"\x00"), ("b", "a", b"\x01")}


def test_echo_decides_on_what_it_heard():
    t = run(two_nodes(), 5, EchoProcess)
    assert t.decisions == {"a": {"b": "01"}, "b": {"a": "00"}}
    assert t.to_dict()["decisions"]["a"] == {"b": "01"}


def test_all_honest_run_reaches_the_ideal_outcome():
    g = fx.k43()
    out = run_agreement(Scenario(g, fx.k43_per_side(), frozenset(), {v: 1 for v in g.nodes}),
                        AgreementConfig(f=2))
    assert set(out.decisions.values()) == {1} and out.ok


class Teleporter(Strategy):
    """Tries to send from other nodes' names and to non-neighbors."""

    name = "teleport"

    def act(self, node, rnd, inbox, honest_out, sim):
        return [Envelope("a", "c", b"forged-sender"), Envelope(node, node, b"self"),
                Envelope(node, "zz", b"nowhere")]


def test_adversary_cannot_forge_links():
    g = fx.path(3)
    sc = Scenario(g, FaultModel.threshold(1), frozenset({"c"}), {v: 0 for v in g.nodes})
    seen = []

    class Recorder(Process):
        def __init__(self, node, sc):
            super().__init__(node)

        def step(self, rnd, inbox):
            seen.extend((self.node, e.sender) for e in inbox)
            return [Envelope(self.node, w, b"hi") for w in g.neighbor_tuple(self.node)]

    t = run(sc, 3, Recorder, Teleporter())
    assert t.dropped == 9
    for receiver, sender in seen:
        assert g.adjacent(receiver, sender)


def test_process_errors_carry_node_and_round():
    class Broken(Process):
        def __init__(self, node, sc):
            super().__init__(node)

        def step(self, rnd, inbox):
            if rnd == 2 and self.node == "b":
                raise RuntimeError("boom")
            return []

    with pytest.raises(SimulationError) as err:
        run(two_nodes(), 5, Broken)
    assert err.value.node == "b" and err.value.round == 2


def test_round_budget_must_be_positive():
    with pytest.raises(ConfigurationError):
        run(two_nodes(), 0, EchoProcess)


def test_scenario_invariants():
    g = fx.k43()
    with pytest.raises(ConfigurationError):
        Scenario(g, fx.k43_per_side(), frozenset({"q0", "q1"}), {v: 0 for v in g.nodes}).validate()
    with pytest.raises(ConfigurationError):
        Scenario(g, fx.k43_per_side(), frozenset(), {"q0": 0}).validate()
    with pytest.raises(ConfigurationError):
        Scenario(g, fx.k43_per_side(), frozenset({"zz"}), {v: 0 for v in g.nodes}).validate()


def test_scenario_json_round_trip():
    g = fx.k43()
    sc = Scenario(g, fx.k43_per_side(), frozenset({"p0"}), {v: 1 for v in g.nodes}, "adjacency-lie",
                  {"omit": ["q0"]}, 9)
    assert Scenario.from_dict(sc.to_dict()) == sc


@pytest.mark.parametrize("bad", [
    {"fault_model": {"kind": "threshold", "f": 0}},
    {"graph": {"nodes": ["a"]}, "fault_model": {"kind": "threshold", "f": 0}, "inputs": {"a": 2}},
    {"graph": {"nodes": ["a"]}, "fault_model": {"kind": "threshold", "f": 0}, "inputs": {"a": True}},
    {"graph": {"nodes": ["a"]}, "fault_model": {"kind": "threshold", "f": 0}, "inputs": {}, "seed": "x"},
    {"graph": {"nodes": ["a"]}, "fault_model": {"kind": "threshold", "f": 0}, "inputs": {}, "adversary": 3},
    {"graph": {"nodes": ["a"]}, "fault_model": {"kind": "threshold", "f": 0}},
])
def test_scenario_json_rejects(bad):
    with pytest.raises(ParseError):
        Scenario.from_dict(bad)


def test_library_names():
    names = adversary_library()
    for required in ["silent", "random-bytes", "equivocate", "path-spoof", "adjacency-lie"]:
        assert required in names
    assert {"theorem1-alpha00", "theorem1-beta01", "theorem1-alpha11"} <= set(names)
    with pytest.raises(ConfigurationError):
        make_strategy("nonsense")
    with pytest.raises(ConfigurationError):
        make_strategy("theorem1-alpha00")


@pytest.mark.parametrize("adversary", SWEEPABLE)
def test_runs_are_byte_identical(adversary):
    g = fx.k43()
    sc = Scenario(g, fx.k43_per_side(), frozenset({"p2", "q1"}), {v: i % 2 for i, v in enumerate(g.nodes)},
                  adversary, {}, 3)
    first = run_agreement(sc, AgreementConfig(f=2)).transcript
    second = run_agreement(sc, AgreementConfig(f=2)).transcript
    assert first.canonical_bytes() == second.canonical_bytes()


def test_seed_changes_random_bytes():
    g = fx.k43()
    base = Scenario(g, fx.k43_per_side(), frozenset({"p2"}), {v: 0 for v in g.nodes}, "random-bytes")
    one = run_agreement(base, AgreementConfig(f=2)).transcript.digest()
    two = run_agreement(base.replace(seed=1), AgreementConfig(f=2)).transcript.digest()
    assert one != two


def test_adjacency_lie_shows_in_transcript():
    g = fx.unknown_topology()
    sc = Scenario(g, FaultModel.threshold(1), frozenset({"red"}), {v: 0 for v in g.nodes}, "adjacency-lie",
                  {"omit": ["blue"], "add": []})
    t = run_agreement(sc, AgreementConfig(f=1, graph_knowledge="unknown")).transcript
    claims = {e.payload.attest[e.payload.header.index("red")]
              for _, envs in t.rounds for e in envs if "red" in e.payload.header}
    assert claims == {("green", "lower_right", "top")}


def test_delayed_strategy_is_honest_first():
    g = fx.k43()
    inputs = {v: 0 for v in g.nodes}
    sc = Scenario(g, fx.k43_per_side(), frozenset({"p0"}), inputs, "silent", {"active_from": 10**6})
    honest = Scenario(g, fx.k43_per_side(), frozenset(), inputs)
    a = run_agreement(sc, AgreementConfig(f=2)).transcript
    b = run_agreement(honest, AgreementConfig(f=2)).transcript
    assert a.rounds == b.rounds


# -- the three-execution chain --------------------------------------------------

def test_chain_refuses_a_pass_verdict():
    g, m = fx.k43(), fx.k43_per_side()
    verdict = check_weak_cut_property(g, m)
    with pytest.raises(ConfigurationError):
        Theorem1Replay(verdict, "alpha00")
    with pytest.raises(ConfigurationError):
        run_theorem1_chain(g, m, verdict, AgreementConfig(f=2))


def test_chain_phase_must_exist():
    g, m = fx.k43(), FaultModel.threshold(2)
    with pytest.raises(ConfigurationError):
        Theorem1Replay(check_weak_cut_property(g, m), "gamma")


def test_chain_sides():
    g = fx.k43()
    w = check_weak_cut_property(g, FaultModel.threshold(2))
    assert chain_sides(w, g) == ({"q0"}, {"q1", "q2", "q3"})


def test_chain_views_match_and_decisions_carry_over():
    g, m = fx.k43(), FaultModel.threshold(2)
    r = run_theorem1_chain(g, m, check_weak_cut_property(g, m), AgreementConfig(f=2))
    assert r.u_views_equal and r.v_views_equal
    a00, b01, a11 = (r.outcomes[p].decisions for p in ("alpha00", "beta01", "alpha11"))
    assert all(a00[u] == b01[u] for u in r.u_side)
    assert all(b01[v] == a11[v] for v in r.v_side)
    assert r.some_execution_fails
    assert not r.outcomes["beta01"].agreement_holds


def test_chain_alpha00_matches_an_all_honest_run():
    # With threshold 3 the witness is (whole cut, empty): beta01 has no faulty node,
    # so it is the all-honest run where the far side starts with 1.
    g, m = fx.k43(), FaultModel.threshold(3)
    w = check_weak_cut_property(g, m)
    assert w.part_b == set()
    cfg = AgreementConfig(f=2)
    r = run_theorem1_chain(g, m, w, cfg)
    honest = Scenario(g, m, frozenset(), {v: 0 if v in r.u_side else 1 for v in g.nodes})
    t = run_agreement(honest, cfg).transcript
    assert r.outcomes["alpha00"].transcript.projection(r.u_side) == t.projection(r.u_side)
    assert r.outcomes["beta01"].transcript.canonical_bytes() == t.canonical_bytes()


def test_chain_adversary_needs_binding():
    g, m = fx.k43(), FaultModel.threshold(2)
    strat = Theorem1Replay(check_weak_cut_property(g, m), "alpha00")
    sc = Scenario(g, m, strat.faulty, {v: 0 for v in g.nodes})
    with pytest.raises(ConfigurationError):
        run(sc, 3, eig_protocol(AgreementConfig(f=2)), strat)
