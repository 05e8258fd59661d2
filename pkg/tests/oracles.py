"""Independent reference implementations used only by the tests.

Nothing here imports from leafrate: trees are nested sorted tuples built by
recursion over multisets of subtrees, and counts come from textbook
recurrences.
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from functools import lru_cache
from itertools import combinations_with_replacement

import mpmath


@lru_cache(maxsize=None)
def trees_of_size(n: int) -> tuple:
    """All rooted unlabelled trees on ``n`` vertices as canonical nested tuples."""
    if n == 1:
        return ((),)
    out = []
    for forest in forests(n - 1, n - 1):
        out.append(forest)
    return tuple(out)


@lru_cache(maxsize=None)
def forests(total: int, largest: int) -> tuple:
    """Multisets of trees with ``total`` vertices, each of size ``<= largest``.

    A forest is a non-increasing tuple of trees under ``(size, tree)`` order.
    """
    if total == 0:
        return ((),)
    out = []
    for size in range(min(total, largest), 0, -1):
        candidates = trees_of_size(size)
        for copies in range(1, total // size + 1):
            for rest in forests(total - copies * size, size - 1):
                for combo in combinations_with_replacement(candidates, copies):
                    out.append(tuple(sorted(combo, reverse=True)) + rest)
    return tuple(out)


def leaves(tree: tuple) -> int:
    """Leaf count; the root is a leaf only when it is alone."""
    if not tree:
        return 1
    return sum(leaves(c) for c in tree)


def size(tree: tuple) -> int:
    return 1 + sum(size(c) for c in tree)


def leaf_table(N: int) -> dict[tuple[int, int], int]:
    table: dict[tuple[int, int], int] = {}
    for n in range(1, N + 1):
        for t in trees_of_size(n):
            key = (n, leaves(t))
            table[key] = table.get(key, 0) + 1
    return table


def rooted_tree_counts(N: int) -> list[int]:
    """Rooted tree counts ``t_0..t_N`` by the divisor-sum recurrence."""
    t = [0, 1] + [0] * (N - 1)
    for n in range(1, N):
        s = 0
        for k in range(1, n + 1):
            s += sum(d * t[d] for d in range(1, k + 1) if k % d == 0) * t[n - k + 1]
        t[n + 1] = s // n
    return t[: N + 1]


def matches_printed(value, printed: str, digits: int, slack: int = 1) -> bool:
    """``value`` rounded to ``digits`` significant digits is within ``slack``
    units of the last place of ``printed`` rounded the same way."""
    with localcontext() as ctx:
        ctx.prec = digits + 20
        ref = Decimal(printed.rstrip("."))
        text = mpmath.nstr(value, digits + 15) if isinstance(value, mpmath.mpf) else str(value)
        got = Decimal(text)
        exp = ref.adjusted() - digits + 1
        quantum = Decimal(1).scaleb(exp)
        a = ref.quantize(quantum, rounding=ROUND_HALF_EVEN)
        b = got.quantize(quantum, rounding=ROUND_HALF_EVEN)
        return abs(a - b) <= slack * quantum
