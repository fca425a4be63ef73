"""Graph dominance over label hierarchies, and flattening into inclusion sets.

``u`` dominates ``v`` when every path from the entry node to ``v`` passes
through ``u``. Flattening maps each node to S(u), the set of nodes it
dominates, so that graph dominance becomes S(u) >= S(v).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ibac.errors import HierarchyError


@dataclass(frozen=True)
class HierarchyGraph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    entry: str

    @classmethod
    def from_edges(cls, entry: str, edges: Iterable[tuple[str, str]], vertices: Iterable[str] = ()):
        edges = tuple((u, v) for u, v in edges)
        order = [entry, *vertices]
        for u, v in edges:
            order += [u, v]
        return cls(tuple(dict.fromkeys(order)), edges, entry)

    @classmethod
    def chain(cls, names: Iterable[str]) -> "HierarchyGraph":
        names = list(names)
        return cls.from_edges(names[0], zip(names, names[1:]), names)

    def successors(self, node: str) -> list[str]:
        return [v for u, v in self.edges if u == node]

    def predecessors(self, node: str) -> list[str]:
        return [u for u, v in self.edges if v == node]


def load_graph(path: str | Path) -> HierarchyGraph:
    """Read ``{"entry": "...", "edges": [[u, v], ...], "vertices": [...]}``."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return HierarchyGraph.from_edges(data["entry"], [tuple(e) for e in data.get("edges", [])],
                                         data.get("vertices", []))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise HierarchyError(f"cannot read graph {path}: {exc}") from exc


def _reachable(g: HierarchyGraph, start: str, removed: str | None = None) -> set[str]:
    if start == removed:
        return set()
    seen = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in g.successors(node):
            if nxt != removed and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def _require(g: HierarchyGraph, *nodes: str) -> None:
    for node in nodes:
        if node not in g.vertices:
            raise HierarchyError(f"unknown node {node!r}")


def graph_dominates(g: HierarchyGraph, u: str, v: str) -> bool:
    """True when v cannot be reached from the entry once u is taken out of the graph."""
    _require(g, u, v)
    if u == v:
        return True
    if v not in _reachable(g, g.entry):
        # no entry path at all; only the entry itself can claim v
        return u == g.entry
    return v not in _reachable(g, g.entry, removed=u)


def flatten(g: HierarchyGraph) -> dict[str, frozenset[str]]:
    """S(u) = {u} plus every node u dominates. Defined for trees and chains rooted at the entry."""
    reach = _reachable(g, g.entry)
    unreachable = [v for v in g.vertices if v not in reach]
    if unreachable:
        raise HierarchyError(f"unreachable from {g.entry}: {', '.join(unreachable)}")
    for v in g.vertices:
        parents = g.predecessors(v)
        if (v == g.entry and parents) or len(parents) > 1:
            raise HierarchyError(f"{v} has {len(parents)} parents; flatten needs a tree")
    return {u: frozenset(v for v in g.vertices if graph_dominates(g, u, v)) for u in g.vertices}


def format_inclusion(g: HierarchyGraph, sets: dict[str, frozenset[str]]) -> list[str]:
    lines = []
    for u in g.vertices:
        members = ", ".join(v for v in g.vertices if v in sets[u])
        lines.append(f"S({u}) = {{{members}}}")
    return lines
