"""Built-in demonstration instances, shipped so no external files are needed.

Each fixture is a small instance that shows one behaviour of the problem:
the two-pool optimum on a short path, the star family where pooling rays in
the right order far outruns any single animal, a network where optimal play
moves water back and forth through the same pipe, and the refill/enlarge/
ordering situations the planner's improvement steps are built around.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .engine import MoveSequence, pool
from .instance import (
    Graph,
    Instance,
    WaterProfile,
    build_path,
    build_star_example,
)


@dataclass(frozen=True)
class Demo:
    name: str
    note: str
    instance: Instance
    sequence: MoveSequence | None


def star_pooling_sequence(n: int) -> MoveSequence:
    """Ray-by-ray pooling schedule for :func:`build_star_example`.

    The k-th set joins the center, the interior barrels of rays 1..k and the
    k-th leaf; pooling them for k = n down to 1 carries each leaf's water
    inward and stacks up at the center, beating the best single animal by an
    ever-growing factor.
    """
    if n < 2:
        raise ValueError("star example needs n >= 2")

    def ray_interior(i: int) -> range:
        base = 1 + (i - 1) * n
        return range(base, base + n - 1)

    def leaf(i: int) -> int:
        return i * n

    moves = []
    for k in range(n, 0, -1):
        members = {0, leaf(k)}
        for i in range(1, k + 1):
            members.update(ray_interior(i))
        moves.append(pool(members))
    return tuple(moves)


def _simple(names: str, levels: dict[str, Fraction | int | str],
            edges: list[tuple[str, str]], target: str) -> Instance:
    order = names.split()
    ids = {name: i for i, name in enumerate(order)}
    graph = Graph.build(order, [(ids[a], ids[b]) for a, b in edges])
    profile = WaterProfile(tuple(Fraction(levels[name]) for name in order))
    return Instance(graph, profile, ids[target])


def _path4() -> Demo:
    inst = build_path([Fraction(3, 10), Fraction(2, 10), Fraction(1, 10), 1], 2)
    return Demo(
        "path4",
        "4-path with an interior target; two pools reach the optimum 3/5,"
        " which no single animal and no finite single-pipe play attains",
        inst,
        (pool((0, 1, 2)), pool((2, 3))),
    )


def _star(n: int) -> Demo:
    return Demo(
        f"star{n}",
        f"symmetric star, {n} rays of length {n}; pooling rays outside-in"
        " beats the best single animal",
        build_star_example(n),
        star_pooling_sequence(n),
    )


def _bottleneck() -> Demo:
    inst = _simple(
        "v u a b",
        {"v": Fraction(9, 10), "u": Fraction(1, 10), "a": Fraction(8, 10),
         "b": Fraction(6, 10)},
        [("v", "u"), ("u", "a"), ("u", "b")],
        "v",
    )
    return Demo(
        "bottleneck",
        "refilling the poor cut barrel u from b lifts the animal {v,u,a}"
        " from 3/5 to 41/60",
        inst,
        None,
    )


def _enlarge() -> Demo:
    inst = _simple(
        "v u a b",
        {"v": Fraction(1, 2), "u": 0, "a": Fraction(4, 5), "b": Fraction(3, 5)},
        [("v", "u"), ("u", "a"), ("u", "b")],
        "v",
    )
    return Demo(
        "enlarge",
        "the best animal is {v} alone until u is refilled from b; then"
        " {v,u,a} averages 8/15 > 1/2",
        inst,
        None,
    )


def _order_two_helpers() -> Demo:
    inst = _simple(
        "v u a b g",
        {"v": Fraction(2, 5), "u": Fraction(1, 10), "a": Fraction(4, 5),
         "b": Fraction(3, 10), "g": Fraction(21, 50)},
        [("v", "u"), ("u", "a"), ("u", "b"), ("u", "g")],
        "v",
    )
    return Demo(
        "order-two-helpers",
        "two helper barrels can refill u; draining the poorer helper first"
        " and saving the richer for last ends higher",
        inst,
        None,
    )


def _order_shared_helper() -> Demo:
    inst = _simple(
        "v u w a b g",
        {"v": Fraction(3, 10), "u": Fraction(1, 4), "w": Fraction(1, 10),
         "a": Fraction(9, 10), "b": Fraction(9, 10), "g": Fraction(9, 20)},
        [("a", "u"), ("u", "v"), ("v", "w"), ("w", "b"), ("g", "u"), ("g", "w")],
        "v",
    )
    return Demo(
        "order-shared-helper",
        "one helper barrel g can refill both poor members u and w; the"
        " planner opens the pipe closing the bigger gap first",
        inst,
        None,
    )


def _demos() -> dict[str, Demo]:
    path4 = _path4()
    nonmono_inst = _simple(
        "v a u w t",
        {"v": 3, "a": 4, "u": Fraction(11, 10), "w": 0, "t": Fraction(19, 10)},
        [("v", "a"), ("a", "u"), ("u", "w"), ("w", "t")],
        "v",
    )
    nonmono = Demo(
        "nonmonotone",
        "optimal play moves water back and forth: barrel u first drains"
        " to 1, then refills to 9/4",
        nonmono_inst,
        (pool((2, 3, 4)), pool((0, 1, 2, 3))),
    )
    demos = [
        path4,
        _star(2),
        _star(3),
        _star(4),
        _star(5),
        nonmono,
        _bottleneck(),
        _enlarge(),
        _order_two_helpers(),
        _order_shared_helper(),
    ]
    return {demo.name: demo for demo in demos}


DEMOS: dict[str, Demo] = _demos()


def demo_names() -> list[str]:
    return list(DEMOS)


def get_demo(name: str) -> Demo:
    try:
        return DEMOS[name]
    except KeyError:
        raise KeyError(
            f"unknown demo {name!r}; available: {', '.join(DEMOS)}"
        ) from None
