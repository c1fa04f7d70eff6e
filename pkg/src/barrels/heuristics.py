"""Greedy lattice-animal heuristics with local improvement steps.

A *lattice animal* is a connected vertex set containing the target; its
value is the mean level over the set, which one pooling move turns into the
target's level.  The best animal is therefore a certified lower bound on
the optimum.  The planner tries to raise that bound before the final pool:

* *bottleneck improvement* — a non-target member below the animal's mean
  can first be refilled by pooling a connected set around it;
* *enlargement* — a boundary vertex that is too poor to join the animal can
  be refilled from outside until absorbing it pays off.

Candidates are scored by their exact gain in the animal's mean and applied
best-first until no positive gain remains; an optional mode additionally
tries every order of the pending candidates, which matters when several
improvements compete for the same water.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .engine import Hypermove, MoveSequence, apply_hypermove, pool
from .instance import Graph, Instance, WaterProfile


class CapExceeded(ValueError):
    """Exhaustive enumeration requested above the configured size cap."""


@dataclass(frozen=True)
class LatticeAnimal:
    """Connected vertex set containing the target, valued by its mean level."""

    vertices: frozenset[int]
    value: Fraction


@dataclass(frozen=True)
class HeuristicPlan:
    sequence: MoveSequence
    achieved: Fraction
    final_animal: LatticeAnimal


def connected_supersets(graph: Graph, seed: Iterable[int],
                        max_size: int | None = None,
                        within: Iterable[int] | None = None,
                        ) -> Iterator[frozenset[int]]:
    """All connected supersets of ``seed`` (the seed itself first).

    The seed must be connected.  ``within`` restricts which vertices may be
    added.  Enumeration is depth-first over sorted extension candidates, so
    the order is deterministic; each set appears exactly once.
    """
    base = frozenset(seed)
    if not graph.is_connected_set(base):
        raise ValueError("seed set is not connected")
    if max_size is not None and len(base) > max_size:
        return
    yield base
    allowed = None if within is None else frozenset(within)

    def ok(w: int) -> bool:
        return allowed is None or w in allowed

    def boundary(members: frozenset[int]) -> tuple[int, ...]:
        out = set()
        for u in members:
            out.update(w for w in graph.neighbors(u) if w not in members and ok(w))
        return tuple(sorted(out))

    def grow(members: frozenset[int], cand: tuple[int, ...],
             banned: frozenset[int]) -> Iterator[frozenset[int]]:
        for i, u in enumerate(cand):
            grown = members | {u}
            yield grown
            if max_size is not None and len(grown) >= max_size:
                continue
            blocked = banned | frozenset(cand[:i])
            fresh = tuple(
                w for w in graph.neighbors(u)
                if w not in grown and w not in blocked and w not in cand and ok(w)
            )
            yield from grow(grown, cand[i + 1:] + fresh, blocked)

    if max_size is None or len(base) < max_size:
        yield from grow(base, boundary(base), frozenset())


def _mean(levels: Sequence[Fraction], members: Iterable[int]) -> Fraction:
    members = tuple(members)
    return sum((levels[u] for u in members), Fraction(0)) / len(members)


def _best_animal(graph: Graph, levels: Sequence[Fraction], target: int,
                 cap: int) -> LatticeAnimal:
    if graph.n > cap:
        raise CapExceeded(f"exhaustive animal search needs n <= {cap}, got {graph.n}")
    best_set: frozenset[int] | None = None
    best_value = Fraction(-1)
    for members in connected_supersets(graph, (target,)):
        value = _mean(levels, members)
        if (
            best_set is None
            or value > best_value
            or (value == best_value
                and (len(members), tuple(sorted(members)))
                < (len(best_set), tuple(sorted(best_set))))
        ):
            best_set, best_value = members, value
    assert best_set is not None
    return LatticeAnimal(best_set, best_value)


def _greedy_animal(graph: Graph, levels: Sequence[Fraction], target: int) -> LatticeAnimal:
    """Local search: grow by the best neighbor, drop poor non-cut members."""
    members = {target}
    while True:
        mean = _mean(levels, members)
        boundary = sorted(
            {w for u in members for w in graph.neighbors(u)} - members
        )
        grown = None
        for u in boundary:
            value = _mean(levels, members | {u})
            if value > mean and (grown is None or value > grown[0]):
                grown = (value, u)
        if grown is not None:
            members.add(grown[1])
            continue
        dropped = None
        for u in sorted(members):
            if u == target or levels[u] >= mean or len(members) == 1:
                continue
            rest = members - {u}
            if not graph.is_connected_set(rest):
                continue
            value = _mean(levels, rest)
            if dropped is None or value > dropped[0]:
                dropped = (value, u)
        if dropped is not None:
            members.remove(dropped[1])
            continue
        return LatticeAnimal(frozenset(members), _mean(levels, members))


def gla_value(inst: Instance, mode: str = "exhaustive", cap: int = 20) -> LatticeAnimal:
    """Best (or greedily found) lattice animal for the instance's target.

    ``exhaustive`` enumerates every connected superset of the target and is
    exact; ties prefer smaller, then lexicographically smaller sets.
    ``greedy`` is a fast local search and only a lower bound.
    """
    if mode == "exhaustive":
        return _best_animal(inst.graph, inst.levels, inst.target, cap)
    if mode == "greedy":
        return _greedy_animal(inst.graph, inst.levels, inst.target)
    raise ValueError("mode must be 'exhaustive' or 'greedy'")


def _bottlenecks(levels: Sequence[Fraction], target: int,
                 animal: LatticeAnimal) -> list[int]:
    return sorted(
        u for u in animal.vertices
        if u != target and levels[u] < animal.value
    )


def find_bottlenecks(inst: Instance, animal: LatticeAnimal) -> list[int]:
    """Non-target members strictly below the animal's mean, sorted by id."""
    return _bottlenecks(inst.levels, inst.target, animal)


def improve_bottleneck(inst: Instance, profile: WaterProfile, animal: LatticeAnimal,
                       vertex: int, cap: int = 6) -> tuple[Hypermove, Fraction] | None:
    """Best refill pool around a poor member, or ``None`` if nothing gains.

    Searches connected sets through ``vertex`` of size at most ``cap`` (they
    may overlap the animal in more vertices than just ``vertex``) and scores
    each by the exact change of the animal's mean after pooling it.
    """
    if vertex not in animal.vertices:
        raise ValueError("vertex is not a member of the animal")
    graph = inst.graph
    levels = profile.levels
    members = animal.vertices
    base_total = sum((levels[u] for u in members), Fraction(0))
    best: tuple[Fraction, int, tuple[int, ...]] | None = None
    for refill in connected_supersets(graph, (vertex,), max_size=cap):
        if len(refill) < 2:
            continue
        refill_mean = _mean(levels, refill)
        overlap = members & refill
        new_total = base_total + sum(
            (refill_mean - levels[u] for u in overlap), Fraction(0)
        )
        gain = (new_total - base_total) / len(members)
        if gain <= 0:
            continue
        key = (-gain, len(refill), tuple(sorted(refill)))
        if best is None or key < (-best[0], best[1], best[2]):
            best = (gain, len(refill), tuple(sorted(refill)))
    if best is None:
        return None
    return pool(best[2]), best[0]


def _grow_animal(graph: Graph, levels: Sequence[Fraction],
                 seed: frozenset[int]) -> LatticeAnimal:
    """Grow a seed set by its best boundary vertex while the mean improves."""
    members = set(seed)
    while True:
        mean = _mean(levels, members)
        grown = None
        for u in sorted({w for m in members for w in graph.neighbors(m)} - members):
            value = _mean(levels, members | {u})
            if value > mean and (grown is None or value > grown[0]):
                grown = (value, u)
        if grown is None:
            return LatticeAnimal(frozenset(members), mean)
        members.add(grown[1])


def enlarge(inst: Instance, profile: WaterProfile, animal: LatticeAnimal,
            cap: int = 6) -> tuple[MoveSequence, LatticeAnimal] | None:
    """Refill a boundary vertex from outside, then absorb it if that pays.

    For each boundary vertex ``u``, pools a connected set around ``u`` taken
    entirely outside the animal, then grows ``animal + u`` greedily on the
    pooled profile and keeps the result when it beats the animal's current
    mean.  Returns the pooling moves and the enlarged animal (valued on the
    pooled profile), or ``None``.
    """
    graph = inst.graph
    levels = profile.levels
    members = animal.vertices
    base = _mean(levels, members)
    outside = frozenset(range(graph.n)) - members
    boundary = sorted(
        {w for u in members for w in graph.neighbors(u)} - members
    )
    best: tuple[Fraction, tuple[int, ...], tuple[int, ...], Fraction] | None = None
    for u in boundary:
        for refill in connected_supersets(graph, (u,), max_size=cap, within=outside):
            if len(refill) < 2:
                continue
            pooled = apply_hypermove(graph, profile, pool(refill))
            grown = _grow_animal(graph, pooled.levels, members | {u})
            gain = grown.value - base
            if gain <= 0:
                continue
            key = (-gain, tuple(sorted(refill)), tuple(sorted(grown.vertices)))
            if best is None or key < (-best[0], best[1], best[2]):
                best = (gain, tuple(sorted(refill)),
                        tuple(sorted(grown.vertices)), grown.value)
    if best is None:
        return None
    return (pool(best[1]),), LatticeAnimal(frozenset(best[2]), best[3])


def _apply_all(graph: Graph, profile: WaterProfile,
               moves: Sequence[Hypermove]) -> WaterProfile:
    for move in moves:
        profile = apply_hypermove(graph, profile, move)
    return profile


def plan_heuristic(inst: Instance, *, cu_cap: int = 6, animal_cap: int = 20,
                   max_rounds: int = 1000,
                   permute_pending: bool = False) -> HeuristicPlan:
    """Iterated improvement plus a final pool over the best animal.

    Each round recomputes the best animal on the current profile, collects
    bottleneck refills and enlargements, and applies the candidate with the
    largest exact gain (ties: lexicographically smallest move encoding).
    With ``permute_pending`` the top candidates (at most five) are instead
    applied in the order, found by trying all of them, that leaves the best
    animal value.  Stops at a fixpoint or after ``max_rounds``; the achieved
    level is never below the initial animal value.
    """
    graph, target = inst.graph, inst.target
    profile = inst.profile
    exhaustive = graph.n <= animal_cap
    planned: list[Hypermove] = []

    def animal_for(prof: WaterProfile) -> LatticeAnimal:
        if exhaustive:
            return _best_animal(graph, prof.levels, target, animal_cap)
        return _greedy_animal(graph, prof.levels, target)

    for _ in range(max_rounds):
        animal = animal_for(profile)
        candidates: list[tuple[Fraction, tuple, MoveSequence]] = []
        seen_moves: set[tuple] = set()
        for u in _bottlenecks(profile.levels, target, animal):
            found = improve_bottleneck(inst, profile, animal, u, cap=cu_cap)
            if found is None:
                continue
            move, gain = found
            enc = (move.key,)
            if enc not in seen_moves:
                seen_moves.add(enc)
                candidates.append((gain, enc, (move,)))
        grown = enlarge(inst, profile, animal, cap=cu_cap)
        if grown is not None:
            moves, enlarged = grown
            enc = tuple(m.key for m in moves)
            if enc not in seen_moves:
                seen_moves.add(enc)
                candidates.append((enlarged.value - animal.value, enc, moves))
        if not candidates:
            break
        candidates.sort(key=lambda c: (-c[0], c[1]))
        if permute_pending and len(candidates) >= 2:
            pending = candidates[:5]
            best_order: tuple[MoveSequence, ...] | None = None
            best_value = Fraction(-1)
            for order in itertools.permutations(pending):
                moves = tuple(m for _, _, seq in order for m in seq)
                outcome = animal_for(_apply_all(graph, profile, moves))
                if outcome.value > best_value:
                    best_value = outcome.value
                    best_order = moves
            assert best_order is not None
            chosen: MoveSequence = best_order
        else:
            chosen = candidates[0][2]
        planned.extend(chosen)
        profile = _apply_all(graph, profile, chosen)

    final_animal = animal_for(profile)
    if len(final_animal.vertices) >= 2:
        last = pool(final_animal.vertices)
        planned.append(last)
        profile = apply_hypermove(graph, profile, last)
    achieved = profile.levels[target]
    return HeuristicPlan(tuple(planned), achieved, final_animal)
