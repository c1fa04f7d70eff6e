"""Satisfiability hardness gadgets: CNF handling and comb instance building.

Deciding whether the optimum level at a target can exceed a fixed threshold
is as hard as exact 3-SAT.  This module provides the full tool chain for the
reduction: DIMACS parsing, the dummy-variable conversion from 3-SAT to exact
3-SAT, a brute-force satisfiability oracle for small formulas, the
comb-shaped instance construction, and the witness strategy that pushes the
target strictly above level 2 exactly when the formula is satisfiable.

Comb anatomy (defaults, for n clauses over k variables): one *tooth* per
variable, a path on ``12 n^4`` barrels whose middle third holds level 2 and
whose end barrels stand for the two literals; a *shaft*
``r - [clause barrels] - a_1 - ... - [clause barrels] - a_n - v`` where each
clause contributes three parallel empty barrels bridging consecutive
non-empty ones, ``r`` holds ``13/3``, anchors hold 3 and the target ``v`` is
empty; and one connector path of ``2 n^2`` pipes from every clause barrel to
its literal's tooth end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .engine import Hypermove, MoveSequence, pool, run_sequence
from .instance import FormatError, Graph, Instance, WaterProfile


class CnfError(ValueError):
    """Formula violates the structural requirements for the reduction."""


@dataclass(frozen=True)
class CnfFormula:
    """Clauses of signed variable indices (1-based; negative = negated)."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for clause in self.clauses:
            if not clause:
                raise CnfError("empty clause")
            seen = set()
            for lit in clause:
                var = abs(lit)
                if lit == 0 or var > self.num_vars:
                    raise CnfError(f"literal {lit} out of range")
                if var in seen:
                    raise CnfError(f"variable {var} repeated within a clause")
                seen.add(var)

    def is_exact_3sat(self) -> bool:
        return all(len(clause) == 3 for clause in self.clauses)

    def satisfied_by(self, assignment) -> bool:
        return all(
            any(assignment[abs(lit) - 1] == (lit > 0) for lit in clause)
            for clause in self.clauses
        )


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF; the ``p cnf`` header is optional.

    Duplicate literals inside a clause are collapsed; a clause containing a
    variable in both signs is rejected (the reduction needs distinct-variable
    clauses after conversion).
    """
    declared_vars: int | None = None
    literals: list[int] = []
    clauses: list[tuple[int, ...]] = []
    max_var = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            tokens = line.split()
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise FormatError("malformed problem line", lineno)
            try:
                declared_vars = int(tokens[2])
                int(tokens[3])
            except ValueError:
                raise FormatError("malformed problem line", lineno) from None
            continue
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise FormatError(f"not a literal: {token!r}", lineno) from None
            if lit == 0:
                kept: list[int] = []
                for cand in literals:
                    if -cand in literals:
                        raise FormatError(
                            f"tautological clause with variable {abs(cand)}", lineno
                        )
                    if cand not in kept:
                        kept.append(cand)
                if not kept:
                    raise FormatError("empty clause", lineno)
                clauses.append(tuple(kept))
                literals = []
            else:
                literals.append(lit)
                max_var = max(max_var, abs(lit))
    if literals:
        raise FormatError("clause not terminated by 0")
    num_vars = max(declared_vars or 0, max_var)
    return CnfFormula(num_vars, tuple(clauses))


def to_exact_3sat(formula: CnfFormula) -> CnfFormula:
    """Equisatisfiable exact-3-SAT formula via three forced-false dummies.

    Clauses of one or two literals are padded with distinct dummy variables;
    the seven appended clauses over the dummies (every sign pattern with at
    least one negation) are satisfied exactly when all dummies are false, so
    the padding literals never help.
    """
    for clause in formula.clauses:
        if len(clause) > 3:
            raise CnfError("clause with more than three variables")
    d1, d2, d3 = (formula.num_vars + i for i in (1, 2, 3))
    clauses: list[tuple[int, ...]] = []
    for clause in formula.clauses:
        if len(clause) == 1:
            clauses.append(clause + (d1, d2))
        elif len(clause) == 2:
            clauses.append(clause + (d1,))
        else:
            clauses.append(clause)
    for signs in product((1, -1), repeat=3):
        if signs == (1, 1, 1):
            continue
        clauses.append((signs[0] * d1, signs[1] * d2, signs[2] * d3))
    return CnfFormula(formula.num_vars + 3, tuple(clauses))


def brute_sat(formula: CnfFormula, max_vars: int = 24) -> tuple[bool, ...] | None:
    """First satisfying assignment in lexicographic order (false < true)."""
    k = formula.num_vars
    if k > max_vars:
        raise CnfError(f"brute force capped at {max_vars} variables, got {k}")
    for bits in range(2 ** k):
        assignment = tuple(bool((bits >> (k - 1 - i)) & 1) for i in range(k))
        if formula.satisfied_by(assignment):
            return assignment
    return None


@dataclass(frozen=True)
class CombInstance:
    """Comb-shaped instance plus the landmarks the witness strategy needs."""

    instance: Instance
    formula: CnfFormula
    clause_count: int
    var_count: int
    tooth_len: int
    connector_len: int
    default_scale: bool
    reservoir: int
    anchors: tuple[int, ...]
    clause_barrels: tuple[tuple[int, int, int], ...]
    literal_ends: tuple[tuple[int, int], ...]
    tooth_vertices: tuple[tuple[int, ...], ...]
    connectors: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def target(self) -> int:
        return self.instance.target


def build_reduction(formula: CnfFormula, tooth_len: int | None = None,
                    connector_len: int | None = None) -> CombInstance:
    """Build the comb instance for an exact-3-SAT formula.

    At default scale (``tooth_len = 12 n^4``, ``connector_len = 2 n^2``
    pipes) the construction has exactly ``12 k n^4 + 6 n^3 + n + 2``
    vertices and levels only in ``{0, 2, 3, 13/3}``.  The scale overrides
    exist for experimentation only; the decision guarantee is claimed at
    default scale.
    """
    if not formula.is_exact_3sat():
        raise CnfError("formula must be exact 3-SAT; convert it first")
    n = len(formula.clauses)
    k = formula.num_vars
    if n == 0:
        raise CnfError("reduction needs at least one clause")
    default_tooth = 12 * n ** 4
    default_conn = 2 * n ** 2
    t_len = default_tooth if tooth_len is None else tooth_len
    c_len = default_conn if connector_len is None else connector_len
    if t_len < 3 or t_len % 3:
        raise CnfError("tooth length must be a positive multiple of 3")
    if c_len < 1:
        raise CnfError("connector length must be at least 1")
    default_scale = (t_len == default_tooth and c_len == default_conn)

    names: list[str] = []
    levels: list[Fraction] = []
    edges: list[tuple[int, int]] = []

    def add(name: str, level: Fraction) -> int:
        names.append(name)
        levels.append(level)
        return len(names) - 1

    reservoir = add("r", Fraction(13, 3))
    anchors = tuple(add(f"a{j}", Fraction(3)) for j in range(1, n + 1))
    target = add("v", Fraction(0))
    barrels = []
    for j in range(1, n + 1):
        row = tuple(add(f"c{j}_{p}", Fraction(0)) for p in (1, 2, 3))
        left = reservoir if j == 1 else anchors[j - 2]
        for barrel in row:
            edges.append((left, barrel))
            edges.append((barrel, anchors[j - 1]))
        barrels.append(row)
    edges.append((anchors[-1], target))

    lo = t_len // 3 + 1
    hi = 2 * (t_len // 3)
    literal_ends = []
    tooth_vertices = []
    for i in range(1, k + 1):
        tooth = []
        for position in range(1, t_len + 1):
            if position == 1:
                name = f"x{i}"
            elif position == t_len:
                name = f"not_x{i}"
            else:
                name = f"t{i}_{position}"
            level = Fraction(2) if lo <= position <= hi else Fraction(0)
            tooth.append(add(name, level))
        for a, b in zip(tooth, tooth[1:]):
            edges.append((a, b))
        literal_ends.append((tooth[0], tooth[-1]))
        tooth_vertices.append(tuple(tooth))

    connectors = []
    for j, clause in enumerate(formula.clauses, 1):
        rows = []
        for p, lit in enumerate(clause, 1):
            var = abs(lit)
            end = literal_ends[var - 1][0 if lit > 0 else 1]
            inner = tuple(
                add(f"p{j}_{p}_{s}", Fraction(0)) for s in range(1, c_len)
            )
            chain = (barrels[j - 1][p - 1],) + inner + (end,)
            for a, b in zip(chain, chain[1:]):
                edges.append((a, b))
            rows.append(inner)
        connectors.append(tuple(rows))

    graph = Graph.build(names, edges)
    instance = Instance(graph, WaterProfile(tuple(levels)), target)
    return CombInstance(
        instance=instance,
        formula=formula,
        clause_count=n,
        var_count=k,
        tooth_len=t_len,
        connector_len=c_len,
        default_scale=default_scale,
        reservoir=reservoir,
        anchors=anchors,
        clause_barrels=tuple(barrels),
        literal_ends=tuple(literal_ends),
        tooth_vertices=tuple(tooth_vertices),
        connectors=tuple(connectors),
    )


def witness_strategy(comb: CombInstance, assignment) -> MoveSequence:
    """Pooling strategy that certifies satisfiability by raising the target.

    Each clause is served by its true literal of lowest variable index.  For
    every literal used, one pool averages the star made of that literal's
    tooth side (end barrel through the watered middle third) together with
    the connector paths and barrels of its assigned clauses; a final pool
    averages the shaft path from the reservoir through the served clause
    barrels and anchors to the target.
    """
    formula = comb.formula
    assignment = tuple(bool(b) for b in assignment)
    if len(assignment) != formula.num_vars:
        raise CnfError("assignment length does not match the variable count")
    if not formula.satisfied_by(assignment):
        raise CnfError("assignment does not satisfy the formula")

    served: dict[int, list[int]] = {}
    chosen_position: list[int] = []
    for j, clause in enumerate(formula.clauses):
        true_lits = [lit for lit in clause if assignment[abs(lit) - 1] == (lit > 0)]
        lit = min(true_lits, key=abs)
        served.setdefault(lit, []).append(j)
        chosen_position.append(clause.index(lit))

    side = 2 * (comb.tooth_len // 3)
    moves: list[Hypermove] = []
    for lit in sorted(served, key=lambda l: (abs(l), l < 0)):
        var = abs(lit)
        tooth = comb.tooth_vertices[var - 1]
        star = set(tooth[:side] if lit > 0 else tooth[-side:])
        for j in served[lit]:
            p = chosen_position[j]
            star.add(comb.clause_barrels[j][p])
            star.update(comb.connectors[j][p])
        moves.append(pool(star))

    shaft = {comb.reservoir, comb.target}
    shaft.update(comb.anchors)
    for j in range(comb.clause_count):
        shaft.add(comb.clause_barrels[j][chosen_position[j]])
    moves.append(pool(shaft))
    return tuple(moves)


def decide_threshold(comb: CombInstance, strategy: MoveSequence) -> bool:
    """Simulate a strategy and report whether the target ends above level 2."""
    trace = run_sequence(comb.instance, strategy)
    return trace.final.levels[comb.target] > 2
