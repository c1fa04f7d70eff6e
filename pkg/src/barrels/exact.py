"""Closed-form optimum solvers for the graph families where the problem is easy.

Each solver returns both the best achievable target level and a move
sequence realizing it exactly, so every result can be checked by simulation.
Covered families: the single edge, paths with the target at an end, paths
with an arbitrary target, and any graph whose target is adjacent to every
other vertex (complete graphs, star centers).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .engine import MoveSequence, open_pipe, pool
from .instance import Instance


class FamilyError(ValueError):
    """The instance does not belong to the solver's graph family."""


@dataclass(frozen=True)
class SolverResult:
    """Optimal value plus a complete-move strategy that attains it exactly."""

    value: Fraction
    strategy: MoveSequence
    family: str


def solve_edge(inst: Instance) -> SolverResult:
    """Two barrels, one pipe: keep still if ahead, otherwise pool."""
    if inst.graph.n != 2 or len(inst.graph.edges) != 1:
        raise FamilyError("not a single-edge graph")
    v = inst.target
    other = 1 - v
    lv = inst.levels
    if lv[v] >= lv[other]:
        return SolverResult(lv[v], (), "edge")
    return SolverResult((lv[v] + lv[other]) / 2, (pool((0, 1)),), "edge")


def _path_positions(inst: Instance) -> tuple[list[int], int]:
    order = inst.graph.path_order()
    if order is None:
        raise FamilyError("not a path graph")
    return order, order.index(inst.target)


def solve_path_end(inst: Instance) -> SolverResult:
    """Path with the target at an end: best prefix average wins.

    The optimum is the maximal mean of the first k levels counted from the
    target, attained by pooling that prefix in one move.  Ties go to the
    shortest prefix.
    """
    order, position = _path_positions(inst)
    n = len(order)
    if position == n - 1:
        order = order[::-1]
        position = 0
    if position != 0:
        raise FamilyError("target is not an end of the path")
    lv = inst.levels
    best_value = lv[order[0]]
    best_k = 1
    running = Fraction(0)
    for k in range(1, n + 1):
        running += lv[order[k - 1]]
        value = running / k
        if value > best_value:
            best_value, best_k = value, k
    strategy: MoveSequence = () if best_k == 1 else (pool(order[:best_k]),)
    return SolverResult(best_value, strategy, "path_end")


def solve_path_general(inst: Instance) -> SolverResult:
    """Path with an arbitrary target: optimum over two-pool strategies.

    Any optimal play on a path amounts to at most two pools: one on a block
    ``{l..q-1}`` beside the target, then one on ``{v..r}`` across it (or the
    mirror image).  With prefix sums the two-parameter families are scanned
    in O(n^3).  Ties prefer fewer involved vertices, then the smaller index
    triple, which keeps degenerate cases (all levels equal) at the empty
    strategy.
    """
    order, v = _path_positions(inst)
    n = len(order)
    lv = [inst.levels[u] for u in order]
    prefix = [Fraction(0)]
    for x in lv:
        prefix.append(prefix[-1] + x)

    def block(a: int, b: int) -> Fraction:
        # sum of positions a..b inclusive
        return prefix[b + 1] - prefix[a]

    best: tuple[Fraction, tuple[int, int, tuple[int, int, int]]] | None = None
    best_strategy: MoveSequence = ()

    def consider(value: Fraction, family: int, l: int, mid: int, r: int,
                 strategy: MoveSequence) -> None:
        nonlocal best, best_strategy
        key = (family, r - l, (l, mid, r))
        if best is None or value > best[0] or (value == best[0] and key < best[1]):
            best = (value, key)
            best_strategy = strategy

    # Flat block through the target to the right (or alone).
    for r in range(v, n):
        value = block(v, r) / (r - v + 1)
        strategy = (pool(order[v:r + 1]),) if r > v else ()
        consider(value, 1, v, v, r, strategy)
    # Left block {l..q-1} pooled first, then {v..r}.
    for q in range(v + 1, n):
        for r in range(q, n):
            right = block(q, r)
            for l in range(0, v + 1):
                value = (
                    Fraction(q - v, (q - l) * (r - v + 1)) * block(l, q - 1)
                    + right / (r - v + 1)
                )
                strategy_moves = []
                if q - l >= 2:
                    strategy_moves.append(pool(order[l:q]))
                strategy_moves.append(pool(order[v:r + 1]))
                consider(value, 1, l, q, r, tuple(strategy_moves))
    # Mirror image: flat block to the left, right block {q+1..r} pooled first.
    for l in range(v, -1, -1):
        value = block(l, v) / (v - l + 1)
        strategy = (pool(order[l:v + 1]),) if l < v else ()
        consider(value, 2, l, v, v, strategy)
    for q in range(v - 1, -1, -1):
        for l in range(0, q + 1):
            left = block(l, q)
            for r in range(v, n):
                value = (
                    left / (v - l + 1)
                    + Fraction(v - q, (r - q) * (v - l + 1)) * block(q + 1, r)
                )
                strategy_moves = []
                if r - q >= 2:
                    strategy_moves.append(pool(order[q + 1:r + 1]))
                strategy_moves.append(pool(order[l:v + 1]))
                consider(value, 2, l, q, r, tuple(strategy_moves))

    assert best is not None
    return SolverResult(best[0], best_strategy, "path_general")


def solve_universal_target(inst: Instance) -> SolverResult:
    """Target adjacent to every vertex: drain the richer barrels one by one.

    Sort levels descending (ties by vertex id) and let the target sit at
    rank l.  Opening the pipes to the richer barrels in ascending order of
    their rank-distance halves the target's gap to each in turn, giving
    value ``2^(1-l) * own + sum_i 2^-i * level_i``.  If the target already
    holds the maximum the best strategy is to leave all pipes shut.
    """
    graph, v = inst.graph, inst.target
    if graph.degree(v) != graph.n - 1:
        raise FamilyError("target is not adjacent to every other vertex")
    lv = inst.levels
    ranked = sorted(range(graph.n), key=lambda u: (-lv[u], u))
    rank = ranked.index(v) + 1
    value = Fraction(lv[v], 2 ** (rank - 1))
    for i in range(1, rank):
        value += Fraction(1, 2 ** i) * lv[ranked[i - 1]]
    strategy = tuple(open_pipe(v, ranked[rank - 1 - k]) for k in range(1, rank))
    return SolverResult(value, strategy, "universal_target")


def solve_auto(inst: Instance) -> SolverResult | None:
    """Dispatch on the detected family; ``None`` when no family matches."""
    graph = inst.graph
    if graph.n == 2 and len(graph.edges) == 1:
        return solve_edge(inst)
    order = graph.path_order()
    if order is not None:
        position = order.index(inst.target)
        if position in (0, graph.n - 1):
            return solve_path_end(inst)
        return solve_path_general(inst)
    if graph.n >= 2 and graph.degree(inst.target) == graph.n - 1:
        return solve_universal_target(inst)
    return None
