import json

import pytest
from hypothesis import given, strategies as st

from ibac.errors import HierarchyError
from ibac.hierarchy import HierarchyGraph, flatten, format_inclusion, graph_dominates, load_graph
from ibac.schema import LabelSet, expand_subject, worked_schema


def all_paths(g, target):
    out = []

    def walk(node, path):
        if node == target:
            out.append(path)
            return
        for nxt in g.successors(node):
            if nxt not in path:
                walk(nxt, path + [nxt])

    walk(g.entry, [g.entry])
    return out


def test_single_node():
    g = HierarchyGraph.from_edges("x", [])
    assert flatten(g) == {"x": {"x"}}
    assert graph_dominates(g, "x", "x")


def test_format_inclusion():
    g = HierarchyGraph.chain(["topSecret", "Secret", "Public"])
    assert format_inclusion(g, flatten(g)) == [
        "S(topSecret) = {topSecret, Secret, Public}",
        "S(Secret) = {Secret, Public}",
        "S(Public) = {Public}",
    ]


def test_level_chain_agrees_with_expansion():
    s = worked_schema()
    sets = flatten(HierarchyGraph.chain(s.levels))
    for level in s.levels:
        assert sets[level] == expand_subject(s, LabelSet(level)).included_form


def test_diamond_dag_dominance_only():
    # a -> b -> d, a -> c -> d: neither b nor c dominates d
    g = HierarchyGraph.from_edges("a", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])
    assert graph_dominates(g, "a", "d")
    assert not graph_dominates(g, "b", "d")
    assert not graph_dominates(g, "c", "d")
    with pytest.raises(HierarchyError):
        flatten(g)


def test_unreachable_and_unknown():
    g = HierarchyGraph.from_edges("a", [("a", "b")], ["z"])
    assert graph_dominates(g, "a", "z")
    assert not graph_dominates(g, "b", "z")
    with pytest.raises(HierarchyError, match="unreachable"):
        flatten(g)
    with pytest.raises(HierarchyError):
        graph_dominates(g, "a", "nope")


def test_load_graph(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"entry": "r", "edges": [["r", "a"], ["a", "b"]]}))
    g = load_graph(path)
    assert g.vertices == ("r", "a", "b")
    path.write_text("{}")
    with pytest.raises(HierarchyError):
        load_graph(path)


@st.composite
def trees(draw, max_size=12):
    size = draw(st.integers(1, max_size))
    names = [f"v{i}" for i in range(size)]
    parents = [draw(st.integers(0, i - 1)) for i in range(1, size)]
    edges = [(names[p], names[i + 1]) for i, p in enumerate(parents)]
    return HierarchyGraph.from_edges(names[0], edges, names)


@given(trees())
def test_flatten_equivalence(g):
    sets = flatten(g)
    for u in g.vertices:
        assert u in sets[u]
        for v in g.vertices:
            dom = graph_dominates(g, u, v)
            assert dom == (sets[u] >= sets[v])
            assert dom == all(u in p for p in all_paths(g, v))


@given(trees())
def test_sets_monotone_along_edges(g):
    sets = flatten(g)
    for u, v in g.edges:
        assert sets[u] > sets[v]


@st.composite
def dags(draw):
    size = draw(st.integers(1, 8))
    names = [f"v{i}" for i in range(size)]
    edges = [(names[i], names[j]) for i in range(size) for j in range(i + 1, size) if draw(st.booleans())]
    return HierarchyGraph.from_edges(names[0], edges, names)


@given(dags())
def test_dag_dominance_matches_path_enumeration(g):
    for u in g.vertices:
        for v in g.vertices:
            paths = all_paths(g, v)
            expected = (u == v or all(u in p for p in paths)) if paths else (u == v or u == g.entry)
            assert graph_dominates(g, u, v) == expected
