"""Coupling graphs over qudit levels, spanning trees, and edge colorings.

A coupling graph records which pairs of levels of a d-level system can be
driven by a single two-level rotation.  Everything downstream (state
synthesis, QR scheduling, diagonal gates) is constrained by this graph.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

Edge = tuple[int, int]

DEFAULT_TREE_LIMIT = 10_000


class GraphError(ValueError):
    pass


def normalize_edge(j: int, k: int) -> Edge:
    return (j, k) if j < k else (k, j)


@dataclass(frozen=True)
class CouplingGraph:
    """Undirected graph on levels 0..d-1 with simple, loop-free edges."""

    d: int
    edges: frozenset[Edge]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.d < 2:
            raise GraphError(f"level count must be >= 2, got {self.d}")
        object.__setattr__(self, "edges", frozenset(normalize_edge(*e) for e in self.edges))
        for j, k in self.edges:
            if j == k:
                raise GraphError(f"self-loop on level {j}")
            if not (0 <= j < self.d and 0 <= k < self.d):
                raise GraphError(f"edge ({j},{k}) has endpoint outside 0..{self.d - 1}")

    def has_edge(self, j: int, k: int) -> bool:
        return normalize_edge(j, k) in self.edges

    def neighbors(self, v: int) -> set[int]:
        out = set()
        for j, k in self.edges:
            if j == v:
                out.add(k)
            elif k == v:
                out.add(j)
        return out

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in range(self.d)}
        for j, k in self.edges:
            adj[j].add(k)
            adj[k].add(j)
        return adj

    def unreachable_from(self, start: int = 0) -> int | None:
        """Return some level not reachable from `start`, or None if connected."""
        adj = self.adjacency()
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        for v in range(self.d):
            if v not in seen:
                return v
        return None

    def is_connected(self) -> bool:
        return self.unreachable_from(0) is None

    def require_connected(self):
        bad = self.unreachable_from(0)
        if bad is not None:
            raise GraphError(f"graph is disconnected: level {bad} is unreachable from level 0")

    def without_edges(self, drop: Iterable[Edge]) -> "CouplingGraph":
        dropped = {normalize_edge(*e) for e in drop}
        return CouplingGraph(self.d, self.edges - dropped, name=self.name)

    def canonical_text(self) -> str:
        lines = [f"d {self.d}"]
        lines += [f"e {j} {k}" for j, k in sorted(self.edges)]
        return "\n".join(lines) + "\n"


# Built-in graphs.  rb87: d=8 hyperfine levels, 9 allowed transitions.
# cs133: d=16, transitions split into an outer chain, an inner chain and a
# ladder between them.
_RB87_EDGES = [(0, 5), (0, 6), (0, 7), (1, 4), (1, 5), (1, 6), (2, 3), (2, 4), (2, 5)]
_CS133_OUTER = [(0, 15), (0, 13), (2, 13), (2, 11), (4, 11), (4, 9), (6, 9), (6, 7)]
_CS133_INNER = [(1, 14), (1, 12), (3, 12), (3, 10), (5, 10), (5, 8)]
_CS133_LADDER = [(0, 14), (1, 13), (2, 12), (3, 11), (4, 10), (5, 9), (6, 8)]

_BUILTINS = {
    "rb87": (8, _RB87_EDGES),
    "cs133": (16, _CS133_OUTER + _CS133_INNER + _CS133_LADDER),
}

# rb87 edge the schedulers may skip; it yields no depth improvement.
RB87_UNUSED_EDGE: Edge = (1, 5)


def builtin_graph(name: str) -> CouplingGraph:
    try:
        d, edges = _BUILTINS[name]
    except KeyError:
        raise GraphError(
            f"unknown builtin graph {name!r}; available: {', '.join(sorted(_BUILTINS))}"
        ) from None
    return CouplingGraph(d, frozenset(edges), name=name)


def load_graph(text: str, name: str | None = None) -> CouplingGraph:
    """Parse the line-oriented graph format: `d <int>` then `e <j> <k>` lines."""
    d: int | None = None
    edges: set[Edge] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "d":
            if d is not None:
                raise GraphError(f"line {lineno}: duplicate 'd' line")
            if len(parts) != 2:
                raise GraphError(f"line {lineno}: expected 'd <int>'")
            try:
                d = int(parts[1])
            except ValueError:
                raise GraphError(f"line {lineno}: bad level count {parts[1]!r}") from None
            if d < 2:
                raise GraphError(f"line {lineno}: level count must be >= 2")
        elif parts[0] == "e":
            if d is None:
                raise GraphError(f"line {lineno}: edge before 'd' line")
            if len(parts) != 3:
                raise GraphError(f"line {lineno}: expected 'e <j> <k>'")
            try:
                j, k = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphError(f"line {lineno}: bad edge endpoints {parts[1:]!r}") from None
            if j == k:
                raise GraphError(f"line {lineno}: self-loop on level {j}")
            if not (0 <= j < d and 0 <= k < d):
                raise GraphError(f"line {lineno}: endpoint outside 0..{d - 1}")
            e = normalize_edge(j, k)
            if e in edges:
                raise GraphError(f"line {lineno}: duplicate edge ({j},{k})")
            edges.add(e)
        else:
            raise GraphError(f"line {lineno}: unrecognized record {parts[0]!r}")
    if d is None:
        raise GraphError("missing 'd' line")
    return CouplingGraph(d, frozenset(edges), name=name)


@dataclass(frozen=True)
class SpanningTree:
    """Spanning tree rooted at `root`: parent map plus the edge list."""

    root: int
    parent: dict[int, int]
    edges: frozenset[Edge]
    d: int

    @staticmethod
    def from_edges(d: int, edges: Iterable[Edge], root: int) -> "SpanningTree":
        edges = frozenset(normalize_edge(*e) for e in edges)
        if len(edges) != d - 1:
            raise GraphError(f"spanning tree needs {d - 1} edges, got {len(edges)}")
        adj: dict[int, set[int]] = {v: set() for v in range(d)}
        for j, k in edges:
            adj[j].add(k)
            adj[k].add(j)
        parent: dict[int, int] = {}
        seen = {root}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in sorted(adj[v]):
                if w not in seen:
                    seen.add(w)
                    parent[w] = v
                    queue.append(w)
        if len(seen) != d:
            missing = next(v for v in range(d) if v not in seen)
            raise GraphError(f"edge set does not span all levels: {missing} unreachable")
        return SpanningTree(root=root, parent=dict(parent), edges=edges, d=d)

    def __post_init__(self):
        # freeze the parent dict against accidental mutation
        object.__setattr__(self, "parent", dict(self.parent))

    def children(self) -> dict[int, list[int]]:
        ch: dict[int, list[int]] = {v: [] for v in range(self.d)}
        for c, p in self.parent.items():
            ch[p].append(c)
        for v in ch:
            ch[v].sort()
        return ch

    def depth_of(self) -> dict[int, int]:
        depth = {self.root: 0}
        ch = self.children()
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            for c in ch[v]:
                depth[c] = depth[v] + 1
                queue.append(c)
        return depth

    def valency(self) -> dict[int, int]:
        val = {v: 0 for v in range(self.d)}
        for j, k in self.edges:
            val[j] += 1
            val[k] += 1
        return val

    def bfs_edges(self) -> list[Edge]:
        """Edges in BFS order from the root (parent-side first)."""
        out = []
        ch = self.children()
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            for c in ch[v]:
                out.append(normalize_edge(v, c))
                queue.append(c)
        return out

    def validate_in(self, g: CouplingGraph):
        stray = self.edges - g.edges
        if stray:
            raise GraphError(f"tree edge {sorted(stray)[0]} is not a coupling-graph edge")


def spanning_trees(
    g: CouplingGraph, root: int, limit: int | None = DEFAULT_TREE_LIMIT
) -> Iterator[SpanningTree]:
    """Enumerate spanning trees rooted at `root`, lexicographic by sorted edge list.

    Enumeration is exhaustive when the total count does not exceed `limit`
    (pass None for no cap).
    """
    if not (0 <= root < g.d):
        raise GraphError(f"root {root} outside 0..{g.d - 1}")
    g.require_connected()
    edge_list = sorted(g.edges)
    m = len(edge_list)
    d = g.d

    def find(par: list[int], x: int) -> int:
        while par[x] != x:
            par[x] = par[par[x]]
            x = par[x]
        return x

    count = 0

    def rec(idx: int, chosen: list[Edge], par: list[int], comps: int):
        nonlocal count
        if limit is not None and count >= limit:
            return
        if comps == 1:
            count += 1
            yield SpanningTree.from_edges(d, chosen, root)
            return
        # not enough edges remain to connect the remaining components
        if m - idx < comps - 1:
            return
        for i in range(idx, m):
            if limit is not None and count >= limit:
                return
            j, k = edge_list[i]
            pj, pk = find(par, j), find(par, k)
            if pj == pk:
                continue
            npar = par[:]
            npar[pj] = pk
            chosen.append(edge_list[i])
            yield from rec(i + 1, chosen, npar, comps - 1)
            chosen.pop()

    yield from rec(0, [], list(range(d)), d)


def count_spanning_trees(g: CouplingGraph) -> int:
    """Kirchhoff matrix-tree count (root-independent)."""
    import numpy as np

    L = np.zeros((g.d, g.d))
    for j, k in g.edges:
        L[j, j] += 1
        L[k, k] += 1
        L[j, k] -= 1
        L[k, j] -= 1
    return round(float(np.linalg.det(L[1:, 1:])))


@dataclass(frozen=True)
class EdgeColoring:
    color: dict[Edge, int]
    c: int

    def __post_init__(self):
        object.__setattr__(self, "color", dict(self.color))

    def classes(self) -> list[list[Edge]]:
        out: list[list[Edge]] = [[] for _ in range(self.c)]
        for e, col in sorted(self.color.items()):
            out[col].append(e)
        return out

    def is_proper(self) -> bool:
        for e, col in self.color.items():
            for f, col2 in self.color.items():
                if e != f and col == col2 and set(e) & set(f):
                    return False
        return True


def color_tree(t: SpanningTree) -> EdgeColoring:
    """Greedy proper edge coloring, BFS order from the root, smallest color first.

    On a tree this uses exactly max-valency colors.
    """
    color: dict[Edge, int] = {}
    for e in t.bfs_edges():
        used = {c for f, c in color.items() if set(f) & set(e)}
        c = 0
        while c in used:
            c += 1
        color[e] = c
    n_colors = max(color.values()) + 1 if color else 0
    return EdgeColoring(color=color, c=n_colors)
