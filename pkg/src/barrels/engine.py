"""Exact execution of moves: pipe openings, pooling, and share accounting.

A *move* opens one pipe and transfers ``fraction`` of the level difference
toward the emptier barrel; ``fraction = 1/2`` levels the pair out.  A
*hypermove* opens all pipes inside a connected barrel set at once and drives
every member toward the set average by ``2 * fraction``; on a two-vertex set
it coincides with the single-pipe move.

Because every update is a convex combination, each final level is a convex
combination of the initial ones.  Running a sequence backwards on a unit of
water placed at the target recovers exactly those combination weights; that
identity (checked by ``barrels duality`` and the test suite) is the main
correctness anchor of the whole package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .instance import FormatError, Graph, Instance, WaterProfile, parse_rational

HALF = Fraction(1, 2)

# Safety net for sweep loops; geometric convergence makes it unreachable.
MAX_SWEEPS = 1_000_000


class MoveError(ValueError):
    """A move that cannot be executed on the given graph or profile."""


@dataclass(frozen=True)
class Hypermove:
    """Open every pipe inside a connected vertex set simultaneously.

    ``fraction`` is the share of the gap to the set average each member
    closes, in ``[0, 1/2]``; ``1/2`` pools the set to its exact average.
    Connectivity is checked at execution time against the graph at hand.
    """

    vertices: frozenset[int]
    fraction: Fraction = HALF

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "fraction", Fraction(self.fraction))
        if len(self.vertices) < 2:
            raise MoveError("a hypermove needs at least two vertices")
        if not (0 <= self.fraction <= HALF):
            raise MoveError(f"fraction {self.fraction} outside [0, 1/2]")

    @property
    def key(self) -> tuple[int, ...]:
        return tuple(sorted(self.vertices))


MoveSequence = tuple[Hypermove, ...]


def pool(vertices: Iterable[int], fraction=HALF) -> Hypermove:
    return Hypermove(frozenset(vertices), Fraction(fraction))


def open_pipe(x: int, y: int, fraction=HALF) -> Hypermove:
    return Hypermove(frozenset((x, y)), Fraction(fraction))


@dataclass(frozen=True)
class Trace:
    """Profiles along an executed sequence: initial plus one per move."""

    profiles: tuple[WaterProfile, ...]

    @property
    def final(self) -> WaterProfile:
        return self.profiles[-1]

    def level(self, vertex: int, step: int = -1) -> Fraction:
        return self.profiles[step].levels[vertex]


@dataclass(frozen=True)
class ShareVector:
    """Convex weights: how one unit of water (or of credit) splits up."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(Fraction(x) for x in self.weights))
        if any(w < 0 for w in self.weights):
            raise ValueError("negative share")
        if sum(self.weights, Fraction(0)) != 1:
            raise ValueError("shares must sum to one")


def _check_member(graph: Graph, u: int) -> None:
    if not (0 <= u < graph.n):
        raise MoveError(f"vertex {u} is not in the graph")


def _hypermove_levels(graph: Graph, levels: Sequence[Fraction], vertices: frozenset[int],
                      fraction: Fraction) -> tuple[Fraction, ...]:
    for u in vertices:
        _check_member(graph, u)
    if not graph.is_connected_set(vertices):
        raise MoveError(f"hypermove set {sorted(vertices)} is not connected")
    avg = sum((levels[u] for u in vertices), Fraction(0)) / len(vertices)
    keep = 1 - 2 * fraction
    out = list(levels)
    for u in vertices:
        out[u] = keep * out[u] + 2 * fraction * avg
    return tuple(out)


def apply_move(graph: Graph, profile: WaterProfile, edge: tuple[int, int],
               fraction=HALF) -> WaterProfile:
    """One pipe: x += f*(y-x), y += f*(x-y); every other barrel untouched."""
    x, y = edge
    f = Fraction(fraction)
    if not (0 <= f <= HALF):
        raise MoveError(f"fraction {f} outside [0, 1/2]")
    _check_member(graph, x)
    _check_member(graph, y)
    if not graph.has_edge(x, y):
        raise MoveError(f"no pipe between {x} and {y}")
    lv = list(profile.levels)
    shift = f * (lv[y] - lv[x])
    lv[x] += shift
    lv[y] -= shift
    return profile.with_levels(lv)


def apply_hypermove(graph: Graph, profile: WaterProfile, move: Hypermove) -> WaterProfile:
    """Move every member of the set toward the set average; sum conserved."""
    return profile.with_levels(
        _hypermove_levels(graph, profile.levels, move.vertices, move.fraction)
    )


def run_sequence(inst: Instance, seq: Sequence[Hypermove]) -> Trace:
    """Execute a move sequence; returns the initial profile plus one per move."""
    profiles = [inst.profile]
    for move in seq:
        profiles.append(apply_hypermove(inst.graph, profiles[-1], move))
    return Trace(tuple(profiles))


def final_level(inst: Instance, seq: Sequence[Hypermove]) -> Fraction:
    return run_sequence(inst, seq).final.levels[inst.target]


def unit_shares(graph: Graph, start: int, seq: Sequence[Hypermove]) -> ShareVector:
    """Run the sequence on a unit of water at ``start``; weights sum to one."""
    _check_member(graph, start)
    levels: tuple[Fraction, ...] = tuple(
        Fraction(1) if u == start else Fraction(0) for u in range(graph.n)
    )
    for move in seq:
        levels = _hypermove_levels(graph, levels, move.vertices, move.fraction)
    return ShareVector(levels)


def source_shares(graph: Graph, target: int, seq: Sequence[Hypermove]) -> ShareVector:
    """How much each initial level contributes to the final level at ``target``.

    Equals :func:`unit_shares` from the target along the reversed sequence;
    for every initial profile, the final target level is the weighted sum of
    initial levels under these shares.
    """
    return unit_shares(graph, target, tuple(reversed(tuple(seq))))


def sweep_to_tolerance(graph: Graph, profile: WaterProfile, vertices: Iterable[int],
                       edges: Iterable[tuple[int, int]], tolerance: Fraction,
                       ) -> tuple[WaterProfile, MoveSequence]:
    """Drive a set to within ``tolerance`` of its average using single pipes.

    Repeats full sweeps of complete moves over ``edges`` (ascending
    lexicographic order) until every member is within ``tolerance`` of the
    set average, which the sweeps conserve.  Returns the final profile and
    the single-edge sequence used.
    """
    tol = Fraction(tolerance)
    if tol <= 0:
        raise MoveError("tolerance must be positive")
    vs = frozenset(vertices)
    if not vs:
        raise MoveError("empty vertex set")
    for u in vs:
        _check_member(graph, u)
    span = sorted((min(x, y), max(x, y)) for x, y in edges)
    for x, y in span:
        if (x, y) not in graph.edges:
            raise MoveError(f"({x},{y}) is not an edge of the graph")
        if x not in vs or y not in vs:
            raise MoveError(f"edge ({x},{y}) leaves the vertex set")
    reach = {min(vs)}
    frontier = [min(vs)]
    while frontier:
        u = frontier.pop()
        for x, y in span:
            w = y if x == u else x if y == u else None
            if w is not None and w not in reach:
                reach.add(w)
                frontier.append(w)
    if reach != vs:
        raise MoveError("edge set does not span the vertex set")

    lv = list(profile.levels)
    avg = sum((lv[u] for u in vs), Fraction(0)) / len(vs)
    moves: list[Hypermove] = []
    for _ in range(MAX_SWEEPS):
        if all(abs(lv[u] - avg) <= tol for u in vs):
            return profile.with_levels(lv), tuple(moves)
        for x, y in span:
            mid = (lv[x] + lv[y]) / 2
            lv[x] = mid
            lv[y] = mid
            moves.append(open_pipe(x, y))
    raise RuntimeError("sweep budget exhausted")  # pragma: no cover


def round_sequence(inst: Instance, seq: Sequence[Hypermove]) -> MoveSequence:
    """Round every fraction to 0 (move deleted) or 1/2, never losing value.

    Walks the sequence in order.  For each move, split its set into the
    members at or above the set average and those below, and weigh the two
    sides with the contribution shares of the remaining suffix: if the
    below-average side carries strictly more weight, completing the move
    helps (keep it at 1/2), otherwise dropping it does (ties drop).  The
    final level at the target never decreases.
    """
    graph, target = inst.graph, inst.target
    seq = tuple(seq)
    levels = inst.levels
    kept: list[Hypermove] = []
    for k, move in enumerate(seq):
        shares = source_shares(graph, target, seq[k + 1:]).weights
        members = move.key
        avg = sum((levels[u] for u in members), Fraction(0)) / len(members)
        above = sum((shares[u] for u in members if levels[u] >= avg), Fraction(0))
        below = sum((shares[u] for u in members if levels[u] < avg), Fraction(0))
        if above >= below:
            continue
        complete = Hypermove(move.vertices, HALF)
        kept.append(complete)
        levels = _hypermove_levels(graph, levels, complete.vertices, HALF)
    return tuple(kept)


def expand_hypermoves(inst: Instance, seq: Sequence[Hypermove],
                      tolerance: Fraction) -> MoveSequence:
    """Replace pooling moves by single-pipe sweeps, losing less than ``tolerance``.

    Requires a complete (all fractions 1/2) sequence; run
    :func:`round_sequence` first.  The i-th pooled set is swept to within
    ``tolerance / 2**i`` of its average, so the final profile differs from
    the exact one by less than ``tolerance`` at every vertex.
    """
    tol = Fraction(tolerance)
    if tol <= 0:
        raise MoveError("tolerance must be positive")
    graph = inst.graph
    profile = inst.profile
    out: list[Hypermove] = []
    expanded = 0
    for move in seq:
        if move.fraction != HALF:
            raise MoveError("expansion requires complete moves; round the sequence first")
        if len(move.vertices) == 2:
            profile = apply_hypermove(graph, profile, move)
            out.append(move)
            continue
        expanded += 1
        budget = tol / 2**expanded
        span = graph.induced_edges(move.vertices)
        profile, sub = sweep_to_tolerance(graph, profile, move.vertices, span, budget)
        out.extend(sub)
    return tuple(out)


def parse_sequence(text: str, inst: Instance) -> MoveSequence:
    """Parse the line-based move format.

    ::

        open <name> <name> [<fraction>]      # one pipe, default 1/2
        pool <name>,<name>,...[ <fraction>]  # hypermove, default 1/2
    """
    graph = inst.graph
    moves: list[Hypermove] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw
        if "#" in line:
            line = line[: line.index("#")]
        line = line.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if tokens[0] == "open":
                if len(tokens) not in (3, 4):
                    raise FormatError("open takes two names and an optional fraction", lineno)
                ids = [graph.index(tokens[1]), graph.index(tokens[2])]
                frac = parse_rational(tokens[3]) if len(tokens) == 4 else HALF
            elif tokens[0] == "pool":
                if len(tokens) not in (2, 3):
                    raise FormatError("pool takes a comma-separated name list and an optional fraction", lineno)
                names = [t for t in tokens[1].split(",") if t]
                ids = [graph.index(name) for name in names]
                frac = parse_rational(tokens[2]) if len(tokens) == 3 else HALF
            else:
                raise FormatError(f"unknown move {tokens[0]!r}", lineno)
            if len(set(ids)) != len(ids):
                raise FormatError("repeated vertex in move", lineno)
            moves.append(Hypermove(frozenset(ids), frac))
        except FormatError:
            raise
        except ValueError as exc:
            raise FormatError(str(exc), lineno) from None
    return tuple(moves)


def serialize_sequence(seq: Sequence[Hypermove], inst: Instance) -> str:
    """Render a sequence in the move format accepted by :func:`parse_sequence`."""
    graph = inst.graph
    lines = []
    for move in seq:
        ids = move.key
        suffix = "" if move.fraction == HALF else f" {move.fraction}"
        if len(ids) == 2 and graph.has_edge(*ids):
            lines.append(f"open {graph.names[ids[0]]} {graph.names[ids[1]]}{suffix}")
        else:
            lines.append(f"pool {','.join(graph.names[u] for u in ids)}{suffix}")
    return "\n".join(lines) + ("\n" if lines else "")
