"""Problem instances: barrel networks with exact rational water levels.

An instance couples a simple undirected graph (barrels joined by lockable
pipes), one water level per barrel, and a target barrel whose level is to
be raised by opening pipes in a good order.  Levels are `fractions.Fraction`
throughout, so every simulation step downstream stays exact; floating point
only ever appears in display formatting.

This module owns the line-based instance text format, validation, and the
canonical example builders (paths, stars, complete graphs) used by the
tests and the CLI.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction


class InstanceError(ValueError):
    """Invalid instance data: graph shape, levels, or target."""


class FormatError(ValueError):
    """Malformed input text; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


_RATIONAL_RE = re.compile(r"[+-]?\d+(?:/\d+|\.\d+)?\Z")


def parse_rational(token: str) -> Fraction:
    """Parse ``p``, ``p/q`` or a finite decimal into an exact Fraction."""
    token = token.strip()
    if not _RATIONAL_RE.match(token):
        raise ValueError(f"not a rational number: {token!r}")
    if "/" in token:
        num, den = token.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator: {token!r}")
        return Fraction(int(num), int(den))
    return Fraction(token)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on dense vertex ids 0..n-1 with display names.

    Edges are stored as normalised ``(min, max)`` pairs.  Use :meth:`build`
    to construct from unnormalised pairs with duplicate detection.
    """

    names: tuple[str, ...]
    edges: frozenset[tuple[int, int]]
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.names)
        if len(set(self.names)) != n:
            raise InstanceError("duplicate vertex names")
        for x, y in self.edges:
            if not (0 <= x < n and 0 <= y < n):
                raise InstanceError(f"edge ({x},{y}) references an unknown vertex")
            if x == y:
                raise InstanceError(f"self-loop at vertex {x}")
            if x > y:
                raise InstanceError(f"edge ({x},{y}) is not normalised")
        adj: list[list[int]] = [[] for _ in range(n)]
        for x, y in self.edges:
            adj[x].append(y)
            adj[y].append(x)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(self.names)})

    @classmethod
    def build(cls, names, edge_pairs) -> "Graph":
        seen: set[tuple[int, int]] = set()
        for x, y in edge_pairs:
            if x == y:
                raise InstanceError(f"self-loop at vertex {x}")
            e = (min(x, y), max(x, y))
            if e in seen:
                raise InstanceError(f"duplicate edge ({e[0]},{e[1]})")
            seen.add(e)
        return cls(tuple(names), frozenset(seen))

    @property
    def n(self) -> int:
        return len(self.names)

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self._adj[u]

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    def has_edge(self, x: int, y: int) -> bool:
        return (min(x, y), max(x, y)) in self.edges

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise InstanceError(f"unknown vertex name {name!r}") from None

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def induced_edges(self, vertices) -> list[tuple[int, int]]:
        vs = set(vertices)
        return sorted(e for e in self.edges if e[0] in vs and e[1] in vs)

    def is_connected_set(self, vertices) -> bool:
        vs = set(vertices)
        if not vs:
            return False
        stack = [next(iter(sorted(vs)))]
        seen = {stack[0]}
        while stack:
            u = stack.pop()
            for w in self._adj[u]:
                if w in vs and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == vs

    def distances_from(self, start: int) -> list[int | None]:
        """BFS distances; ``None`` marks unreachable vertices."""
        dist: list[int | None] = [None] * self.n
        dist[start] = 0
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for w in self._adj[u]:
                    if dist[w] is None:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            frontier = nxt
        return dist

    def path_order(self) -> list[int] | None:
        """Vertex order along the path if this graph is one, else ``None``.

        Starts from the lower-id end vertex so the order is deterministic.
        """
        n = self.n
        if n == 1:
            return [0]
        if len(self.edges) != n - 1:
            return None
        degs = [self.degree(u) for u in range(n)]
        if any(d > 2 for d in degs) or sum(1 for d in degs if d == 1) != 2:
            return None
        start = min(u for u in range(n) if degs[u] == 1)
        order = [start]
        prev = -1
        cur = start
        while len(order) < n:
            nxts = [w for w in self._adj[cur] if w != prev]
            if len(nxts) != 1:
                return None
            prev, cur = cur, nxts[0]
            order.append(cur)
        return order


@dataclass(frozen=True)
class WaterProfile:
    """One exact level per barrel, optionally bounded by a shared capacity.

    Opening pipes only ever averages levels, so the running maximum never
    grows; the capacity therefore only constrains inputs.
    """

    levels: tuple[Fraction, ...]
    capacity: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(Fraction(x) for x in self.levels))
        if self.capacity is not None:
            object.__setattr__(self, "capacity", Fraction(self.capacity))
        for i, x in enumerate(self.levels):
            if x < 0:
                raise InstanceError(f"negative level at vertex {i}")
            if self.capacity is not None and x > self.capacity:
                raise InstanceError(f"level above capacity at vertex {i}")

    def total(self) -> Fraction:
        return sum(self.levels, Fraction(0))

    def with_levels(self, levels) -> "WaterProfile":
        return WaterProfile(tuple(levels), self.capacity)


@dataclass(frozen=True)
class Instance:
    graph: Graph
    profile: WaterProfile
    target: int

    def __post_init__(self):
        if len(self.profile.levels) != self.graph.n:
            raise InstanceError("profile does not index the graph's vertices")
        if not (0 <= self.target < self.graph.n):
            raise InstanceError("target is not a valid vertex")

    @property
    def levels(self) -> tuple[Fraction, ...]:
        return self.profile.levels

    @property
    def target_name(self) -> str:
        return self.graph.names[self.target]


def _strip(line: str) -> str:
    if "#" in line:
        line = line[: line.index("#")]
    return line.strip()


def parse_instance(text: str) -> Instance:
    """Parse the line-based instance format.

    ::

        capacity <rational>       # optional, at most once
        node <name> <rational>
        edge <name> <name>
        target <name>

    Raises :class:`FormatError` with a line number on syntax problems and
    on semantic ones (self-loop, duplicate edge, unknown vertex, negative
    level, level above capacity, missing target).
    """
    nodes: list[tuple[int, str, Fraction]] = []
    edges: list[tuple[int, str, str]] = []
    capacity: Fraction | None = None
    capacity_line: int | None = None
    target_name: str | None = None
    target_line: int | None = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind == "capacity":
            if len(tokens) != 2:
                raise FormatError("capacity takes one rational", lineno)
            if capacity is not None:
                raise FormatError("capacity given more than once", lineno)
            try:
                capacity = parse_rational(tokens[1])
            except ValueError as exc:
                raise FormatError(str(exc), lineno) from None
            capacity_line = lineno
        elif kind == "node":
            if len(tokens) != 3:
                raise FormatError("node takes a name and a level", lineno)
            try:
                level = parse_rational(tokens[2])
            except ValueError as exc:
                raise FormatError(str(exc), lineno) from None
            nodes.append((lineno, tokens[1], level))
        elif kind == "edge":
            if len(tokens) != 3:
                raise FormatError("edge takes two vertex names", lineno)
            edges.append((lineno, tokens[1], tokens[2]))
        elif kind == "target":
            if len(tokens) != 2:
                raise FormatError("target takes one vertex name", lineno)
            if target_name is not None:
                raise FormatError("target given more than once", lineno)
            target_name, target_line = tokens[1], lineno
        else:
            raise FormatError(f"unknown directive {kind!r}", lineno)

    ids: dict[str, int] = {}
    levels: list[Fraction] = []
    for lineno, name, level in nodes:
        if name in ids:
            raise FormatError(f"duplicate node {name!r}", lineno)
        if level < 0:
            raise FormatError(f"negative level for node {name!r}", lineno)
        if capacity is not None and level > capacity:
            raise FormatError(f"level above capacity for node {name!r}", lineno)
        ids[name] = len(levels)
        levels.append(level)
    if capacity is not None and capacity < 0:
        raise FormatError("negative capacity", capacity_line)

    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, a, b in edges:
        for name in (a, b):
            if name not in ids:
                raise FormatError(f"unknown vertex {name!r}", lineno)
        x, y = ids[a], ids[b]
        if x == y:
            raise FormatError(f"self-loop at {a!r}", lineno)
        e = (min(x, y), max(x, y))
        if e in seen:
            raise FormatError(f"duplicate edge {a!r} {b!r}", lineno)
        seen.add(e)
        pairs.append(e)

    if target_name is None:
        raise FormatError("missing target line")
    if target_name not in ids:
        raise FormatError(f"unknown vertex {target_name!r}", target_line)

    graph = Graph(tuple(name for _, name, _ in nodes), frozenset(pairs))
    return Instance(graph, WaterProfile(tuple(levels), capacity), ids[target_name])


def serialize_instance(inst: Instance) -> str:
    """Render an instance in the text format; round-trips exactly.

    Levels are written as ``p/q`` (or a bare integer), never as rounded
    decimals.
    """
    lines = []
    if inst.profile.capacity is not None:
        lines.append(f"capacity {inst.profile.capacity}")
    for i, name in enumerate(inst.graph.names):
        lines.append(f"node {name} {inst.levels[i]}")
    for x, y in inst.graph.sorted_edges():
        lines.append(f"edge {inst.graph.names[x]} {inst.graph.names[y]}")
    lines.append(f"target {inst.target_name}")
    return "\n".join(lines) + "\n"


def build_path(levels, target_index: int, names=None) -> Instance:
    """Path graph 0-1-...-(n-1) with the given levels and target position."""
    levels = [Fraction(x) for x in levels]
    if not levels:
        raise InstanceError("empty level list")
    n = len(levels)
    if not (0 <= target_index < n):
        raise InstanceError("target index out of range")
    if names is None:
        names = tuple(str(i) for i in range(n))
    graph = Graph(tuple(names), frozenset((i, i + 1) for i in range(n - 1)))
    return Instance(graph, WaterProfile(tuple(levels)), target_index)


def build_complete(levels, target_index: int) -> Instance:
    """Complete graph on the given levels."""
    levels = [Fraction(x) for x in levels]
    if not levels:
        raise InstanceError("empty level list")
    n = len(levels)
    graph = Graph(
        tuple(str(i) for i in range(n)),
        frozenset((i, j) for i in range(n) for j in range(i + 1, n)),
    )
    return Instance(graph, WaterProfile(tuple(levels)), target_index)


def build_star_center(levels, target_index: int = 0) -> Instance:
    """Star graph: vertex 0 is the hub, joined to every other vertex."""
    levels = [Fraction(x) for x in levels]
    if not levels:
        raise InstanceError("empty level list")
    n = len(levels)
    graph = Graph(
        tuple(str(i) for i in range(n)),
        frozenset((0, i) for i in range(1, n)),
    )
    return Instance(graph, WaterProfile(tuple(levels)), target_index)


def star_example_leaf_level(n: int) -> Fraction:
    """Leaf level used by :func:`build_star_example`.

    The natural choice ``n + ln(n) + 1`` is irrational; we round it up to
    a thousandth so the level is an exact rational.  Rounding up preserves
    the direction the ray-pooling strategy's lower bound needs.
    """
    return Fraction(math.ceil(1000 * (n + math.log(n) + 1)), 1000)


def build_star_example(n: int) -> Instance:
    """Symmetric star on n^2+1 vertices: n rays of length n from the target.

    All barrels are empty except the n leaves, which share the level from
    :func:`star_example_leaf_level`.  The vertex layout is fixed: the
    center has id 0 and ray ``i`` (1-based) occupies ids
    ``1+(i-1)*n .. i*n`` walking outward, with the leaf last.
    """
    if n < 2:
        raise InstanceError("star example needs n >= 2")
    c = star_example_leaf_level(n)
    names = ["v"]
    levels = [Fraction(0)]
    edges = []
    for i in range(1, n + 1):
        base = 1 + (i - 1) * n
        prev = 0
        for j in range(n - 1):
            names.append(f"r{i}_{j + 1}")
            levels.append(Fraction(0))
            edges.append((prev, base + j))
            prev = base + j
        names.append(f"v{i}")
        levels.append(c)
        edges.append((prev, base + n - 1))
    graph = Graph.build(names, edges)
    return Instance(graph, WaterProfile(tuple(levels)), 0)
