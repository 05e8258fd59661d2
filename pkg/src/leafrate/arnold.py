"""Tree counts admitted by the Arnold inequalities on nested ovals.

A real plane curve of degree ``d`` is encoded by a rooted tree whose
non-root vertices are the ovals and whose edges record nesting.  The
degree bounds the number of vertices by ``N_d``; the Arnold inequalities
bound the numbers of non-empty even and odd ovals, and these are the
non-leaf vertices at odd and at even nonzero depth.

``L_d`` and ``L'_d`` are read off a coefficient table.  ``A_d`` needs the
two star counts of every tree and is found by exhaustive enumeration.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import NamedTuple

from .genfunc import CoefficientTable, otter_counts
from .precision import InsufficientOrderError
from .trees import (
    ContractError,
    RootedTree,
    _levels_to_parents,
    _signed_chi,
    balance_chi_labelled,
    canonical_form,
    enumerate_chunk,
    level_sequences,
    level_stats,
    partition_rooted_trees,
)

__all__ = [
    "DegreeBudget",
    "ArnoldReport",
    "EnumerationBudgetError",
    "PipelineOutcome",
    "DEFAULT_BUDGET",
    "CSV_HEADER",
    "vertex_budget",
    "count_L",
    "count_L_prime",
    "brute_force_L",
    "count_A",
    "rate_report",
    "report_csv",
    "leaf_strip_balance",
    "pipeline_check",
    "PipelineSummary",
]

DEFAULT_BUDGET = 10_000_000
CSV_HEADER = "d,N_d,K_d,L_d,Lprime_d,A_d,log2norm_L,log2norm_Lprime,log2norm_A"


class DegreeBudget(NamedTuple):
    """Vertex budget ``N_d`` and forced leaf count ``K_d`` for degree ``d``."""

    d: int
    N: int
    K: int
    half_floor: int
    k: int

    @property
    def star_bound(self) -> int:
        """Arnold bound ``(k-1)(k-2)/2`` on even* and odd*; even ``d`` only."""
        return (self.k - 1) * (self.k - 2) // 2

    def leaf_threshold(self, n: int) -> int:
        """Fewest leaves an ``n``-vertex tree needs to enter ``L'_d``."""
        return n - 1 - self.half_floor * (self.half_floor - 1)


class EnumerationBudgetError(RuntimeError):
    """Exhaustive enumeration stopped before covering every tree.

    ``partial`` is the count over the ``seen`` trees already visited out of
    ``total``.  A report builder attaches the rows finished so far as
    ``rows``.
    """

    def __init__(self, d: int, partial: int, seen: int, total: int, budget: int):
        self.d = d
        self.partial = partial
        self.seen = seen
        self.total = total
        self.budget = budget
        self.rows: list[ArnoldReport] = []
        super().__init__(
            f"A_{d}: enumeration budget {budget} exhausted after {seen} of {total} trees "
            f"(partial count {partial})"
        )


def vertex_budget(d: int) -> DegreeBudget:
    """Budgets for degree ``d``.

    >>> vertex_budget(6)
    DegreeBudget(d=6, N=12, K=9, half_floor=2, k=3)
    """
    if d < 3:
        raise ContractError(f"curve degree must be >= 3, got {d}")
    N = (d - 1) * (d - 2) // 2 + (1 if d % 2 else 2)
    h = (d - 1) // 2
    return DegreeBudget(d, N, N - 1 - h * (h - 1), h, d // 2)


def _check_table(table: CoefficientTable, budget: DegreeBudget) -> None:
    if table.order < budget.N:
        raise InsufficientOrderError(budget.N, table.order, f"degree {budget.d}")


def count_L(d: int, table: CoefficientTable) -> int:
    """Trees with exactly ``N_d`` vertices and at least ``K_d`` leaves."""
    b = vertex_budget(d)
    _check_table(table, b)
    coeffs = table[b.N].coeffs
    return sum(coeffs[max(b.K, 0):])


def count_L_prime(d: int, table: CoefficientTable) -> int:
    """Trees with ``n <= N_d`` vertices and ``>= n - 1 - h(h-1)`` leaves."""
    b = vertex_budget(d)
    _check_table(table, b)
    total = 0
    for n in range(1, b.N + 1):
        coeffs = table[n].coeffs
        total += sum(coeffs[max(b.leaf_threshold(n), 0):])
    return total


def brute_force_L(d: int) -> tuple[int, int]:
    """``(L_d, L'_d)`` by walking every tree; the oracle for the table sums."""
    b = vertex_budget(d)
    full = prime = 0
    for n in range(1, b.N + 1):
        need = b.leaf_threshold(n)
        for levels in level_sequences(n):
            leaves = level_stats(levels)[0]
            if leaves >= need:
                prime += 1
            if n == b.N and leaves >= b.K:
                full += 1
    return full, prime


# ---------------------------------------------------------------------------
# exhaustive A_d
# ---------------------------------------------------------------------------

def _count_levels(levels_iter, bound: int) -> tuple[int, int]:
    hits = seen = 0
    for levels in levels_iter:
        seen += 1
        _, even_star, odd_star = level_stats(levels)
        if even_star <= bound and odd_star <= bound:
            hits += 1
    return hits, seen


def _count_task(task: tuple[int, object, int]) -> tuple[int, int]:
    n, chunk, bound = task
    source = level_sequences(n) if chunk is None else enumerate_chunk(chunk)
    return _count_levels(source, bound)


def _tasks(N: int, bound: int, prefix_len: int) -> list[tuple[int, object, int]]:
    # small sizes go whole; larger ones are split by level-sequence prefix
    tasks = []
    for n in range(1, N + 1):
        if n <= prefix_len + 4:
            tasks.append((n, None, bound))
        else:
            tasks.extend((n, c, bound) for c in partition_rooted_trees(n, prefix_len))
    return tasks


def count_A(
    d: int,
    pool: Executor | None = None,
    budget: int = DEFAULT_BUDGET,
    prefix_len: int = 5,
) -> int:
    """Trees with ``n <= N_d`` vertices satisfying both Arnold bounds.

    The stream is cut into prefix chunks in a fixed order; with ``pool`` the
    chunks run on its workers and the tallies are summed in order, so the
    result does not depend on scheduling.  Enumeration stops once more than
    ``budget`` trees have been visited.

    Raises
    ------
    ContractError
        If ``d`` is odd or below 4.
    EnumerationBudgetError
        With the partial count when the budget runs out first.
    """
    if d < 4 or d % 2:
        raise ContractError(f"A_d is defined for even d >= 4, got {d}")
    b = vertex_budget(d)
    total = sum(otter_counts(b.N)[1 : b.N + 1])
    tasks = _tasks(b.N, b.star_bound, prefix_len)
    results = pool.map(_count_task, tasks) if pool is not None else map(_count_task, tasks)
    hits = seen = 0
    try:
        for h, s in results:
            hits += h
            seen += s
            if seen > budget and seen < total:
                raise EnumerationBudgetError(d, hits, seen, total, budget)
    finally:
        close = getattr(results, "close", None)
        if close is not None:
            close()
    return hits


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _norm_log(count: int | None, d: int) -> float | None:
    if count is None or count <= 0:
        return None
    return 2 * math.log(count) / d**2


@dataclass(frozen=True)
class ArnoldReport:
    """Counts for one degree; ``A`` is ``None`` unless enumerated."""

    d: int
    N: int
    K: int
    L: int
    L_prime: int
    A: int | None = None

    @property
    def log2norm_L(self) -> float | None:
        return _norm_log(self.L, self.d)

    @property
    def log2norm_Lprime(self) -> float | None:
        return _norm_log(self.L_prime, self.d)

    @property
    def log2norm_A(self) -> float | None:
        return _norm_log(self.A, self.d)

    def cells(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            return f"{v:.6f}" if isinstance(v, float) else str(v)

        return [
            fmt(v)
            for v in (
                self.d, self.N, self.K, self.L, self.L_prime, self.A,
                self.log2norm_L, self.log2norm_Lprime, self.log2norm_A,
            )
        ]


def rate_report(
    d_list: Iterable[int],
    table: CoefficientTable,
    with_A: bool = True,
    pool: Executor | None = None,
    budget: int = DEFAULT_BUDGET,
) -> list[ArnoldReport]:
    """One :class:`ArnoldReport` per degree, in the order given.

    ``A_d`` is enumerated for even degrees when ``with_A`` is set.  If the
    budget runs out, the :class:`EnumerationBudgetError` carries the rows
    finished so far, the unfinished one last with an empty ``A``.
    """
    rows = []
    for d in d_list:
        b = vertex_budget(d)
        row = ArnoldReport(d, b.N, b.K, count_L(d, table), count_L_prime(d, table))
        if with_A and d % 2 == 0:
            try:
                row = ArnoldReport(row.d, row.N, row.K, row.L, row.L_prime, count_A(d, pool, budget))
            except EnumerationBudgetError as exc:
                exc.rows = rows + [row]
                raise
        rows.append(row)
    return rows


def report_csv(rows: Sequence[ArnoldReport]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# leaf stripping and balancing
# ---------------------------------------------------------------------------

class PipelineOutcome(NamedTuple):
    """Result of strip, balance to ``chi = 0`` and re-attach."""

    tree: RootedTree
    inserted: int
    inner_size: int
    inner_chi: int
    even_star: int
    odd_star: int


def leaf_strip_balance(levels: Sequence[int]) -> PipelineOutcome:
    """Remove the leaves, balance the rest to ``chi = 0``, put the leaves back.

    Leaves hang off the same vertices as before; the balanced inner tree
    gains at most ``3 + 3 log2`` of its size in new vertices.
    """
    n = len(levels)
    parents = _levels_to_parents(levels)
    leaf = [False] * n
    if n > 1:
        for i in range(1, n):
            leaf[i] = i == n - 1 or levels[i + 1] <= levels[i]
    inner = [v for v in range(n) if not leaf[v]]
    adj = {v: [] for v in inner}
    for v in inner[1:]:
        adj[v].append(parents[v])
        adj[parents[v]].append(v)
    balanced, root, steps = balance_chi_labelled(adj, 0, 0)
    inner_chi = _signed_chi(balanced, root)
    full = {v: list(nbrs) for v, nbrs in balanced.items()}
    for v in range(1, n):
        if leaf[v]:
            tag = ("leaf", v)
            full[tag] = [parents[v]]
            full[parents[v]].append(tag)
    tree = canonical_form(full, root=root)
    _, even_star, odd_star = level_stats(tree.levels)
    return PipelineOutcome(tree, len(steps), len(inner), inner_chi, even_star, odd_star)


class PipelineSummary(NamedTuple):
    trees: int
    failures: list
    max_inserted: int
    max_star: int
    target_degree: int


def pipeline_check(d: int = 5) -> PipelineSummary:
    """Run :func:`leaf_strip_balance` over every tree counted by ``L'_d``.

    The balanced tree must gain at most ``3 + 3 floor(log2 m)`` vertices,
    ``m`` the inner size, fit in ``N_{d+6}`` vertices, and meet the Arnold
    bounds of the smallest even degree ``D >= d + 6``.  Failures are
    returned, not raised.
    """
    b = vertex_budget(d)
    D = d + 6 + (d % 2)
    target = vertex_budget(D)
    room = vertex_budget(d + 6).N
    failures = []
    trees = max_inserted = max_star = 0
    for n in range(1, b.N + 1):
        need = b.leaf_threshold(n)
        for levels in level_sequences(n):
            if level_stats(levels)[0] < need:
                continue
            trees += 1
            out = leaf_strip_balance(levels)
            max_inserted = max(max_inserted, out.inserted)
            max_star = max(max_star, out.even_star, out.odd_star)
            allowed = 3 + 3 * int(math.log2(out.inner_size))
            if (
                out.inner_chi != 0
                or out.inserted > allowed
                or out.tree.n > room
                or max(out.even_star, out.odd_star) > target.star_bound
            ):
                failures.append((levels, out))
    return PipelineSummary(trees, failures, max_inserted, max_star, D)
