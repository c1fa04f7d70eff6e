"""Bounded-depth exhaustive search over complete pooling moves.

On a small graph, every target level reachable by arbitrary play is also
reached by finitely many complete pools of connected sets, so searching all
sequences up to a depth gives a certified lower bound that converges to the
true optimum as the depth grows.  The search is deterministic: ties between
equal-value certificates resolve to the lexicographically least encoding
(sequences of sorted vertex tuples, compared as tuples).

Pruning uses the fact that no move can raise any level above the running
maximum, so a branch whose maximum is at most the best value found cannot
improve on it.  Results are bit-for-bit independent of the worker count.
"""

from __future__ import annotations

from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .engine import Hypermove, MoveSequence
from .instance import Graph, Instance

MODES = ("hypermove", "single_edge")


class CapExceeded(ValueError):
    """Instance size or requested depth above the configured search caps."""


@dataclass(frozen=True)
class SearchResult:
    value: Fraction
    certificate: MoveSequence
    depth: int
    mode: str
    nodes: int
    pruned: int
    memo_hits: int


def _connected_sets(graph: Graph) -> list[tuple[int, ...]]:
    """All connected vertex sets of size >= 2, as sorted tuples."""
    out: list[tuple[int, ...]] = []
    n = graph.n
    for root in range(n):
        # Sets whose smallest vertex is `root`; candidates stay above it.
        def grow(members: frozenset[int], cand: tuple[int, ...], banned: frozenset[int]):
            for i, u in enumerate(cand):
                grown = members | {u}
                out.append(tuple(sorted(grown)))
                blocked = banned | frozenset(cand[:i])
                fresh = tuple(
                    w for w in graph.neighbors(u)
                    if w > root and w not in grown and w not in blocked and w not in cand
                )
                grow(grown, cand[i + 1:] + fresh, blocked)

        start = tuple(w for w in graph.neighbors(root) if w > root)
        grow(frozenset((root,)), start, frozenset())
    return sorted(set(out))


def _candidates(graph: Graph, mode: str) -> list[tuple[int, ...]]:
    if mode == "single_edge":
        return graph.sorted_edges()
    return _connected_sets(graph)


class _Search:
    def __init__(self, inst: Instance, candidates: list[tuple[int, ...]],
                 memo_limit: int):
        self.target = inst.target
        self.candidates = candidates
        self.memo: OrderedDict[tuple[Fraction, ...], int] = OrderedDict()
        self.memo_limit = memo_limit
        self.best_value: Fraction = Fraction(-1)
        self.best_cert: tuple[tuple[int, ...], ...] = ()
        self.nodes = 0
        self.pruned = 0
        self.memo_hits = 0

    def visit(self, levels: tuple[Fraction, ...], left: int,
              cert: tuple[tuple[int, ...], ...]) -> None:
        self.nodes += 1
        value = levels[self.target]
        if value > self.best_value:
            self.best_value = value
            self.best_cert = cert
        if left == 0:
            return
        if max(levels) <= self.best_value:
            self.pruned += 1
            return
        seen = self.memo.get(levels)
        if seen is not None and seen >= left:
            self.memo_hits += 1
            self.memo.move_to_end(levels)
            return
        self.memo[levels] = left
        self.memo.move_to_end(levels)
        while len(self.memo) > self.memo_limit:
            self.memo.popitem(last=False)
        for members in self.candidates:
            first = levels[members[0]]
            if all(levels[u] == first for u in members[1:]):
                continue  # pooling an already-level set changes nothing
            total = sum((levels[u] for u in members), Fraction(0))
            avg = total / len(members)
            pooled = list(levels)
            for u in members:
                pooled[u] = avg
            self.visit(tuple(pooled), left - 1, cert + (members,))


def _pool_levels(levels: tuple[Fraction, ...], members: tuple[int, ...]) -> tuple[Fraction, ...]:
    avg = sum((levels[u] for u in members), Fraction(0)) / len(members)
    out = list(levels)
    for u in members:
        out[u] = avg
    return tuple(out)


def _search_slice(inst: Instance, depth: int, mode: str, memo_limit: int,
                  lo: int, hi: int) -> tuple[Fraction, tuple[tuple[int, ...], ...], int, int, int]:
    """Explore subtrees rooted at first moves ``candidates[lo:hi]``."""
    candidates = _candidates(inst.graph, mode)
    search = _Search(inst, candidates, memo_limit)
    levels = inst.levels
    search.best_value = levels[inst.target]
    for members in candidates[lo:hi]:
        first = levels[members[0]]
        if all(levels[u] == first for u in members[1:]):
            continue
        search.visit(_pool_levels(levels, members), depth - 1, (members,))
    return (search.best_value, search.best_cert, search.nodes, search.pruned,
            search.memo_hits)


def search_best(inst: Instance, depth: int, mode: str = "hypermove", *,
                max_vertices: int = 10, max_depth: int = 5,
                memo_limit: int = 200_000, workers: int = 1) -> SearchResult:
    """Best target level over all sequences of at most ``depth`` complete pools.

    ``mode="hypermove"`` pools any connected vertex set; ``mode="single_edge"``
    only ever opens one pipe at a time.  Values increase with depth and never
    exceed the true optimum (every certificate is a feasible strategy).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if inst.graph.n > max_vertices:
        raise CapExceeded(f"instance has {inst.graph.n} vertices, cap is {max_vertices}")
    if depth > max_depth:
        raise CapExceeded(f"depth {depth} above cap {max_depth}")
    if depth < 0:
        raise ValueError("depth must be nonnegative")

    candidates = _candidates(inst.graph, mode)
    if workers <= 1 or depth == 0 or not candidates:
        search = _Search(inst, candidates, memo_limit)
        search.visit(inst.levels, depth, ())
        best_value, best_cert = search.best_value, search.best_cert
        nodes, pruned, hits = search.nodes, search.pruned, search.memo_hits
    else:
        count = len(candidates)
        bounds = [(count * i) // workers for i in range(workers + 1)]
        slices = [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if lo < hi]
        best_value, best_cert = inst.levels[inst.target], ()
        nodes, pruned, hits = 1, 0, 0
        with ProcessPoolExecutor(max_workers=len(slices)) as pool_:
            futures = [
                pool_.submit(_search_slice, inst, depth, mode, memo_limit, lo, hi)
                for lo, hi in slices
            ]
            for future in futures:  # merge in slice order: first hit wins ties
                value, cert, n_, p_, h_ = future.result()
                if value > best_value:
                    best_value, best_cert = value, cert
                nodes += n_
                pruned += p_
                hits += h_

    certificate = tuple(Hypermove(frozenset(members)) for members in best_cert)
    return SearchResult(best_value, certificate, depth, mode, nodes, pruned, hits)


def grid_probe(inst: Instance, depth: int, grid, *,
               max_vertices: int = 10, max_depth: int = 5) -> Fraction:
    """Best target level using single-pipe moves with fractions from ``grid``.

    With ``1/2`` in the grid this can only match, never beat, the
    complete-move search at the same depth; the probe exists to exercise
    that claim.
    """
    if inst.graph.n > max_vertices:
        raise CapExceeded(f"instance has {inst.graph.n} vertices, cap is {max_vertices}")
    if depth > max_depth:
        raise CapExceeded(f"depth {depth} above cap {max_depth}")
    fractions = sorted({Fraction(g) for g in grid})
    if not fractions:
        raise ValueError("empty fraction grid")
    if fractions[0] < 0 or fractions[-1] > Fraction(1, 2):
        raise ValueError("grid fractions must lie in [0, 1/2]")
    edges = inst.graph.sorted_edges()
    target = inst.target
    best = inst.levels[target]

    def visit(levels: tuple[Fraction, ...], left: int) -> None:
        nonlocal best
        if levels[target] > best:
            best = levels[target]
        if left == 0 or max(levels) <= best:
            return
        for x, y in edges:
            if levels[x] == levels[y]:
                continue
            for f in fractions:
                if f == 0:
                    continue
                shift = f * (levels[y] - levels[x])
                moved = list(levels)
                moved[x] += shift
                moved[y] -= shift
                visit(tuple(moved), left - 1)

    visit(inst.levels, depth)
    return best
