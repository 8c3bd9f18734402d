import json

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from oracles import components, connected_atlas, connectivity_by_subsets, minimal_cuts_by_subsets
from weakcut import fixtures as fx
from weakcut.errors import DomainError, ParseError
from weakcut.graph import (Graph, components_after_removal, connectivity, enumerate_minimal_cuts,
                           is_connected, is_cut, load_graph, neighbors)


def test_neighbors_examples():
    assert neighbors(fx.path(3), "b") == {"a", "c"}
    g = fx.k43()
    for q in fx.FOUR_SIDE:
        assert neighbors(g, q) == set(fx.THREE_SIDE)
    assert neighbors(Graph(["a"]), "a") == frozenset()


def test_neighbors_unknown_node():
    with pytest.raises(DomainError):
        neighbors(fx.path(3), "z")


def test_is_cut_examples():
    g = fx.k43()
    assert is_cut(fx.path(3), {"b"})
    assert is_cut(g, set(fx.THREE_SIDE))
    assert is_cut(g, set(fx.FOUR_SIDE))
    for pair in [("p0", "p1"), ("p0", "p2"), ("p1", "p2")]:
        assert not is_cut(g, set(pair))


def test_is_cut_rejects_everything_removed():
    g = fx.path(3)
    with pytest.raises(DomainError):
        is_cut(g, set(g.nodes))


def test_minimal_cut_examples():
    assert [c.members for c in enumerate_minimal_cuts(fx.path(3))] == [frozenset("b")]
    cuts = enumerate_minimal_cuts(fx.k43())
    assert [c.sorted_members for c in cuts] == [fx.THREE_SIDE, fx.FOUR_SIDE]
    assert enumerate_minimal_cuts(fx.complete(4)) == []


def test_minimal_cuts_need_connected_graph():
    with pytest.raises(DomainError):
        enumerate_minimal_cuts(Graph(["a", "b", "c"], [("a", "b")]))
    with pytest.raises(DomainError):
        enumerate_minimal_cuts(Graph(["a"]))


def test_connectivity_examples():
    assert connectivity(fx.k43()) == 3
    assert connectivity(fx.path(3)) == 1
    assert connectivity(fx.complete(4)) == 3
    assert connectivity(fx.unknown_topology()) == 3


def test_components_examples():
    assert components_after_removal(fx.path(3), {"b"}) == [{"a"}, {"c"}]
    assert components_after_removal(fx.k43(), set(fx.THREE_SIDE)) == [{q} for q in fx.FOUR_SIDE]
    g = fx.cube()
    assert components_after_removal(g, ()) == [set(g.nodes)]


def _check_against_oracle(g):
    cuts = enumerate_minimal_cuts(g)
    assert {c.members for c in cuts} == minimal_cuts_by_subsets(g)
    for c in cuts:
        assert is_cut(g, c.members)
        for x in c.members:
            assert not is_cut(g, c.members - {x})
        a, b = c.separated_witness
        assert a not in c.members and b not in c.members
        assert not any(a in comp and b in comp for comp in components_after_removal(g, c.members))
    expected = min((len(c.members) for c in cuts), default=g.n - 1)
    assert connectivity(g) == expected == connectivity_by_subsets(g)


def test_minimal_cuts_match_brute_force_on_atlas():
    count = 0
    for g in connected_atlas(7):
        _check_against_oracle(g)
        count += 1
    assert count == 1 + 2 + 6 + 21 + 112 + 853  # connected graphs on 2..7 nodes


@pytest.mark.parametrize("name", sorted(fx.catalog()))
def test_minimal_cuts_match_brute_force_on_fixtures(name):
    g, _ = fx.catalog()[name]
    _check_against_oracle(g)


def test_connectivity_matches_networkx():
    for g in connected_atlas(7):
        h = nx.Graph(list(g.edges))
        h.add_nodes_from(g.nodes)
        assert connectivity(g) == nx.node_connectivity(h)


@st.composite
def connected_graphs(draw, max_n=8):
    n = draw(st.integers(2, max_n))
    nodes = [f"n{i}" for i in range(n)]
    edges = set()
    for i in range(1, n):  # random spanning tree first
        j = draw(st.integers(0, i - 1))
        edges.add((nodes[j], nodes[i]))
    pairs = [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n)]
    extra = draw(st.lists(st.sampled_from(pairs), max_size=len(pairs)))
    edges.update(extra)
    return Graph(nodes, edges)


@settings(max_examples=150, deadline=None)
@given(connected_graphs())
def test_minimal_cuts_match_brute_force_random(g):
    _check_against_oracle(g)


@settings(max_examples=100, deadline=None)
@given(connected_graphs(), st.data())
def test_components_partition(g, data):
    removed = set(data.draw(st.lists(st.sampled_from(g.nodes), unique=True, max_size=g.n - 1)))
    comps = components_after_removal(g, removed)
    assert set().union(*comps) == set(g.nodes) - removed
    assert sum(len(c) for c in comps) == g.n - len(removed)
    assert sorted(comps, key=min) == comps
    assert set(comps) == set(components(g, removed))
    for c in comps:
        assert len(components_after_removal(g, set(g.nodes) - c)) == 1


def test_graph_rejects_bad_input():
    with pytest.raises(DomainError):
        Graph(["a", "a"])
    with pytest.raises(DomainError):
        Graph(["a"], [("a", "a")])
    with pytest.raises(DomainError):
        Graph(["a", "b"], [("a", "b"), ("b", "a")])
    with pytest.raises(DomainError):
        Graph([])


def test_is_connected():
    assert is_connected(fx.k43())
    assert not is_connected(Graph(["a", "b"]))


@pytest.mark.parametrize("text, line, element", [
    ('{"nodes": ["a",\n "b",\n "a"], "edges": []}', 3, "a"),
    ('{"nodes": ["a", "b"],\n "edges": [["a", "b"],\n  ["b", "a"]]}', 3, "b-a"),
    ('{"nodes": ["a", "b"],\n "edges": [\n ["a", "a"]]}', 3, "a-a"),
    ('{"nodes": ["a", "b"],\n "edges": [["a", "z"]]}', 2, "z"),
])
def test_load_graph_names_offending_element(tmp_path, text, line, element):
    p = tmp_path / "g.json"
    p.write_text(text)
    with pytest.raises(ParseError) as err:
        load_graph(p)
    assert err.value.line == line
    assert err.value.element == element
    assert str(p) in str(err.value)


def test_load_graph_malformed_json(tmp_path):
    p = tmp_path / "g.json"
    p.write_text('{"nodes": ["a",\n ]')
    with pytest.raises(ParseError) as err:
        load_graph(p)
    assert err.value.line == 2


def test_graph_json_round_trip(tmp_path):
    g = fx.unknown_topology()
    p = tmp_path / "g.json"
    p.write_text(json.dumps(g.to_dict()))
    assert load_graph(p) == g
