"""Rooted unlabelled trees: canonical codes, generation and edge surgery.

A rooted tree is stored as its canonical level sequence: the depth of every
vertex in preorder, with the children of each vertex visited so that the
resulting sequence is lexicographically maximal.  Vertex ``i`` of a
:class:`RootedTree` is the ``i``-th entry of that sequence; vertex 0 is the
root and the edge from vertex ``i`` to its parent is addressed by ``i``.

Distance parity follows the plane-curve convention: a vertex at an even
number of edges from the root (the root included) is *odd*, a vertex at an
odd distance is *even*.
"""

from __future__ import annotations

import math
from collections.abc import Hashable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

__all__ = [
    "StructureError",
    "ContractError",
    "RootedTree",
    "TreeStats",
    "Chunk",
    "canonical_form",
    "level_sequences",
    "enumerate_rooted_trees",
    "partition_rooted_trees",
    "enumerate_chunk",
    "leaf_count",
    "parity_counts",
    "arnold_star_counts",
    "tree_stats",
    "level_stats",
    "branches_at",
    "find_half_vertex",
    "half_vertex_walk",
    "sign_walk",
    "contract_edge",
    "insert_edge",
    "reroot",
    "balance_chi",
    "balance_chi_labelled",
]


class StructureError(ValueError):
    """Input does not describe a connected acyclic graph with a root."""


class ContractError(ValueError):
    """An operation was called outside its precondition."""


@dataclass(frozen=True)
class RootedTree:
    """Immutable rooted unlabelled tree in canonical level-sequence form.

    Build instances with :func:`canonical_form`, :meth:`from_levels` or
    :meth:`parse`; the bare constructor trusts that ``levels`` is canonical.
    """

    levels: tuple[int, ...]

    @classmethod
    def from_levels(cls, levels: Iterable[int]) -> RootedTree:
        """Canonicalize an arbitrary (valid) preorder level sequence."""
        levels = list(levels)
        return canonical_form(_levels_to_parents(levels))

    @classmethod
    def parse(cls, text: str) -> RootedTree:
        """Read the one-line ``"0 1 2 2 1"`` serialization."""
        try:
            levels = [int(tok) for tok in text.split()]
        except ValueError as exc:
            raise StructureError(f"not a level sequence: {text!r}") from exc
        tree = cls.from_levels(levels)
        if tree.levels != tuple(levels):
            raise StructureError(f"level sequence is not canonical: {text!r}")
        return tree

    @classmethod
    def single(cls) -> RootedTree:
        return cls((0,))

    @classmethod
    def path(cls, n: int) -> RootedTree:
        """Path on ``n`` vertices rooted at an end."""
        return cls(tuple(range(n)))

    @classmethod
    def star(cls, n: int) -> RootedTree:
        """Star on ``n`` vertices rooted at its center."""
        return cls((0,) + (1,) * (n - 1))

    def __str__(self) -> str:
        return " ".join(map(str, self.levels))

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def n(self) -> int:
        return len(self.levels)

    @property
    def root(self) -> int:
        return 0

    @cached_property
    def parents(self) -> tuple[int, ...]:
        """``parents[i]`` is the parent of vertex ``i``; the root maps to -1."""
        return tuple(_levels_to_parents(self.levels))

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.levels]
        for v, p in enumerate(self.parents):
            if p >= 0:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def adjacency(self) -> dict[int, list[int]]:
        adj = {v: list(kids) for v, kids in enumerate(self.children)}
        for v, p in enumerate(self.parents):
            if p >= 0:
                adj[v].insert(0, p)
        return adj

    @property
    def edges(self) -> range:
        """Edge identifiers: the child endpoint of each edge."""
        return range(1, self.n)

    def is_leaf(self, v: int) -> bool:
        if self.n == 1:
            return True
        return v != 0 and not self.children[v]


class TreeStats(NamedTuple):
    n: int
    leaves: int
    p: int
    neg: int
    chi: int
    even_star: int
    odd_star: int


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------

def _levels_to_parents(levels: Sequence[int]) -> list[int]:
    if not levels or levels[0] != 0:
        raise StructureError("a level sequence starts with the root at level 0")
    parents = [-1]
    stack = [0]  # stack[d] = most recent vertex at depth d
    for v in range(1, len(levels)):
        d = levels[v]
        if d < 1 or d > len(stack):
            raise StructureError(f"level jump at position {v}: {levels[v - 1]} -> {d}")
        del stack[d:]
        parents.append(stack[d - 1])
        stack.append(v)
    return parents


def _adjacency_from(structure, root) -> tuple[dict, Hashable]:
    if isinstance(structure, RootedTree):
        return structure.adjacency, 0
    if isinstance(structure, Mapping):
        if root is None:
            raise StructureError("an adjacency description needs an explicit root")
        adj: dict = {v: [] for v in structure}
        for v, nbrs in structure.items():
            for u in nbrs:
                if u not in adj:
                    adj[u] = []
        for v, nbrs in structure.items():
            for u in nbrs:
                if u == v:
                    raise StructureError(f"self-loop at {v!r}")
                if u not in adj[v]:
                    adj[v].append(u)
                if v not in adj[u]:
                    adj[u].append(v)
        if root not in adj:
            if adj:
                raise StructureError(f"root {root!r} is not a vertex")
            adj[root] = []
        return adj, root
    parents = list(structure)
    roots = [v for v, p in enumerate(parents) if p is None or p == -1]
    if len(roots) != 1:
        raise StructureError(f"parent array must have exactly one root, found {len(roots)}")
    adj = {v: [] for v in range(len(parents))}
    for v, p in enumerate(parents):
        if p is None or p == -1:
            continue
        if not 0 <= p < len(parents) or p == v:
            raise StructureError(f"bad parent {p!r} for vertex {v}")
        adj[v].append(p)
        adj[p].append(v)
    return adj, roots[0]


def _canonical_order(adj: Mapping, root) -> tuple[tuple[int, ...], list]:
    """Canonical levels plus the original vertex behind each position."""
    n_edges = sum(len(nbrs) for nbrs in adj.values()) // 2
    parent = {root: None}
    order = [root]
    for v in order:
        for u in adj[v]:
            if u == parent[v]:
                continue
            if u in parent:
                raise StructureError("input contains a cycle")
            parent[u] = v
            order.append(u)
    if len(order) != len(adj):
        raise StructureError("input is disconnected")
    if n_edges != len(adj) - 1:
        raise StructureError("input contains a cycle")
    # codes are (levels, vertices) relative to each subtree root
    code: dict = {}
    for v in reversed(order):
        kids = [code.pop(u) for u in adj[v] if u != parent[v]]
        kids.sort(key=lambda kv: kv[0], reverse=True)
        levels = [0]
        verts = [v]
        for klev, kverts in kids:
            levels.extend(d + 1 for d in klev)
            verts.extend(kverts)
        code[v] = (levels, verts)
    levels, verts = code[root]
    return tuple(levels), verts


def canonical_form(structure, root=None) -> RootedTree:
    """Canonical :class:`RootedTree` of a rooted tree description.

    Parameters
    ----------
    structure : sequence, mapping or RootedTree
        Either a parent array (the root's entry is ``-1`` or ``None``) or an
        adjacency mapping ``vertex -> iterable of neighbours``.
    root : hashable, optional
        Root vertex; required for adjacency mappings.

    Raises
    ------
    StructureError
        If the input is not a single tree with a unique root.

    Examples
    --------
    >>> str(canonical_form([-1, 0, 1]))
    '0 1 2'
    >>> canonical_form({"a": ["b"], "b": ["c"]}, root="a").levels
    (0, 1, 2)
    """
    adj, r = _adjacency_from(structure, root)
    if root is not None:
        if root not in adj:
            raise StructureError(f"root {root!r} is not a vertex")
        r = root
    levels, _ = _canonical_order(adj, r)
    return RootedTree(levels)


def _canonical_with_map(adj: Mapping, root) -> tuple[RootedTree, dict]:
    levels, verts = _canonical_order(adj, root)
    return RootedTree(levels), {v: i for i, v in enumerate(verts)}


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def _fill(levels: list[int], p: int) -> None:
    # decrement position p by moving it up one level, then repeat the block
    # that starts at its new parent's child: the largest canonical completion
    target = levels[p] - 1
    q = p - 1
    while levels[q] != target:
        q -= 1
    period = p - q
    for i in range(p, len(levels)):
        levels[i] = levels[i - period]


def _pivot(levels: list[int], lo: int, hi: int) -> int:
    for p in range(hi - 1, lo - 1, -1):
        if levels[p] > 1:
            return p
    return -1


def level_sequences(n: int) -> Iterator[tuple[int, ...]]:
    """Canonical level sequences of all rooted trees on ``n`` vertices.

    Sequences come out in decreasing lexicographic order, starting with the
    path and ending with the star, at constant amortized cost each.
    """
    if n < 1:
        return
    yield from _run(list(range(n)), 1)


def _run(levels: list[int], lo: int) -> Iterator[tuple[int, ...]]:
    n = len(levels)
    while True:
        yield tuple(levels)
        p = _pivot(levels, lo, n)
        if p < 0:
            return
        _fill(levels, p)


def enumerate_rooted_trees(n: int) -> Iterator[RootedTree]:
    """Every rooted unlabelled tree with ``n`` vertices, each exactly once.

    >>> [str(t) for t in enumerate_rooted_trees(3)]
    ['0 1 2', '0 1 1']
    """
    for levels in level_sequences(n):
        yield RootedTree(levels)


class Chunk(NamedTuple):
    """Block of consecutive canonical sequences sharing a prefix."""

    start: tuple[int, ...]
    prefix_len: int

    @property
    def prefix(self) -> tuple[int, ...]:
        return self.start[: self.prefix_len]


def partition_rooted_trees(n: int, prefix_len: int = 4) -> list[Chunk]:
    """Split the ``n``-vertex stream into disjoint chunks by level-sequence prefix.

    The sequences sharing a prefix are contiguous in the generation order, so
    each chunk can be walked independently with :func:`enumerate_chunk`.
    """
    if n < 1:
        return []
    prefix_len = max(1, min(prefix_len, n))
    levels = list(range(n))
    chunks = []
    while True:
        chunks.append(Chunk(tuple(levels), prefix_len))
        # the last member of a block ends in root leaves; its successor pivots
        # inside the prefix
        p = _pivot(levels, 1, prefix_len)
        if p < 0:
            return chunks
        _fill(levels, p)


def enumerate_chunk(chunk: Chunk) -> Iterator[tuple[int, ...]]:
    yield from _run(list(chunk.start), chunk.prefix_len)


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def level_stats(levels: Sequence[int]) -> tuple[int, int, int]:
    """``(leaves, even_star, odd_star)`` straight from a level sequence."""
    n = len(levels)
    if n == 1:
        return 1, 0, 0
    leaves = even_star = odd_star = 0
    for i in range(1, n):
        d = levels[i]
        if i == n - 1 or levels[i + 1] <= d:
            leaves += 1
        elif d & 1:
            even_star += 1
        else:
            odd_star += 1
    return leaves, even_star, odd_star


def leaf_count(t: RootedTree) -> int:
    """Number of leaves; the root counts only in the single-vertex tree."""
    return level_stats(t.levels)[0]


def parity_counts(t: RootedTree) -> tuple[int, int, int]:
    """``(p, neg, chi)``: counts of even and odd vertices, then ``p - neg``."""
    p = sum(d & 1 for d in t.levels)
    neg = t.n - p
    return p, neg, p - neg


def arnold_star_counts(t: RootedTree) -> tuple[int, int]:
    """Non-leaf vertices at odd distance and at even nonzero distance."""
    _, even_star, odd_star = level_stats(t.levels)
    return even_star, odd_star


def tree_stats(t: RootedTree) -> TreeStats:
    leaves, even_star, odd_star = level_stats(t.levels)
    p, neg, chi = parity_counts(t)
    return TreeStats(t.n, leaves, p, neg, chi, even_star, odd_star)


# ---------------------------------------------------------------------------
# branches and the half vertex
# ---------------------------------------------------------------------------

def _check_vertex(t: RootedTree, v: int) -> None:
    if not isinstance(v, int) or not 0 <= v < t.n:
        raise ContractError(f"vertex {v!r} not in a tree with {t.n} vertices")


def _component(adj: Mapping, start, blocked=frozenset()) -> list:
    seen = {start}
    out = [start]
    for v in out:
        for u in adj[v]:
            if u not in blocked and u not in seen:
                seen.add(u)
                out.append(u)
    return out


def branches_at(t: RootedTree, v: int) -> list[RootedTree]:
    """Components of ``t`` minus ``v``, each rooted at the neighbour of ``v``."""
    _check_vertex(t, v)
    adj = t.adjacency
    out = []
    for u in sorted(adj[v]):
        comp = set(_component(adj, u, {v}))
        sub = {w: [x for x in adj[w] if x in comp] for w in comp}
        out.append(canonical_form(sub, root=u))
    return out


def _walk_to_half(adj: Mapping, root, blocked=frozenset()) -> list:
    """Walk from ``root`` into the oversized branch until none is left."""
    order = _component(adj, root, blocked)
    parent = {root: None}
    for v in order:
        for u in adj[v]:
            if u != parent[v] and u not in blocked:
                parent[u] = v
    size = {v: 1 for v in order}
    for v in reversed(order[1:]):
        size[parent[v]] += size[v]
    total = len(order)
    walk = [root]
    v = root
    while True:
        # the branch through the parent stays small once we stepped down
        nxt = [u for u in adj[v] if u != parent[v] and u not in blocked and 2 * size[u] > total]
        if not nxt:
            return walk
        v = nxt[0]
        walk.append(v)


def half_vertex_walk(t: RootedTree) -> list[int]:
    """Vertices visited when walking from the root into too-large branches."""
    return _walk_to_half(t.adjacency, 0)


def find_half_vertex(t: RootedTree) -> int:
    """A vertex all of whose branches have at most ``n/2`` vertices.

    >>> find_half_vertex(RootedTree.star(5))
    0
    """
    return half_vertex_walk(t)[-1]


def sign_walk(c: Sequence[int], target: int) -> list[int]:
    """Greedy signs ``e_2..e_r`` steering ``sum e_i c_i`` toward ``target``.

    Every step of size ``c[i]`` (``i >= 1``) heads for ``target``; the end
    point lands within ``c[0]`` of it.

    >>> sign_walk([3, 2, 1], 0)
    [1, -1]
    """
    c = list(c)
    if not c:
        raise ContractError("sign_walk needs at least one value")
    if any(x < 0 for x in c) or any(a < b for a, b in zip(c, c[1:])):
        raise ContractError(f"values must be nonnegative and nonincreasing: {c}")
    if abs(target) > sum(c):
        raise ContractError(f"|target| = {abs(target)} exceeds sum {sum(c)}")
    pos = 0
    signs = []
    for step in c[1:]:
        s = 1 if target - pos >= 0 else -1
        signs.append(s)
        pos += s * step
    return signs


# ---------------------------------------------------------------------------
# edge surgery
# ---------------------------------------------------------------------------

def contract_edge(t: RootedTree, e: int, *, with_map: bool = False):
    """Merge child vertex ``e`` into its parent.

    The merged vertex keeps the parent's place, so contracting an edge at
    the root leaves the merged vertex as root.  With ``with_map`` the result
    is ``(tree, mapping)`` where ``mapping`` sends old vertex indices to new
    ones (``e`` maps to the merged vertex).
    """
    if not isinstance(e, int) or not 1 <= e < t.n:
        raise ContractError(f"edge {e!r} not in a tree with {t.n} vertices")
    par = list(t.parents)
    up = par[e]
    adj: dict[int, list[int]] = {v: [] for v in range(t.n) if v != e}
    for v in range(1, t.n):
        if v == e:
            continue
        p = up if par[v] == e else par[v]
        adj[v].append(p)
        adj[p].append(v)
    tree, pos = _canonical_with_map(adj, 0)
    if not with_map:
        return tree
    mapping = {v: pos[v] for v in adj}
    mapping[e] = pos[up]
    return tree, mapping


def insert_edge(
    t: RootedTree,
    v: int,
    moved: Iterable[int] = (),
    new_is_root: bool = False,
    *,
    with_map: bool = False,
):
    """Split ``v`` into ``v`` and a new neighbour ``w`` joined by a new edge.

    ``moved`` lists edges at ``v`` (by child-endpoint index; ``v`` itself
    names the edge to its parent) that are re-attached to ``w``.  With no
    moved edges this attaches a leaf.  ``new_is_root`` makes ``w`` the root
    and is only meaningful when ``v`` is the root.  With ``with_map`` the
    result is ``(tree, mapping)``; the key ``"new"`` gives ``w``'s index.
    """
    _check_vertex(t, v)
    moved = set(moved)
    incident = set(t.children[v]) | ({v} if v != 0 else set())
    if not moved <= incident:
        raise ContractError(f"edges {sorted(moved - incident)} are not incident to vertex {v}")
    if new_is_root and v != 0:
        raise ContractError("only an insertion at the root can move the root")
    w = t.n
    adj = {u: list(nbrs) for u, nbrs in t.adjacency.items()}
    adj[w] = [v]
    adj[v].append(w)
    for edge in moved:
        other = t.parents[v] if edge == v else edge
        adj[v].remove(other)
        adj[other].remove(v)
        adj[other].append(w)
        adj[w].append(other)
    tree, pos = _canonical_with_map(adj, w if new_is_root else 0)
    if not with_map:
        return tree
    mapping = {u: pos[u] for u in range(t.n)}
    mapping["new"] = pos[w]
    return tree, mapping


def reroot(t: RootedTree, v: int) -> RootedTree:
    _check_vertex(t, v)
    return canonical_form(t.adjacency, root=v)


# ---------------------------------------------------------------------------
# chi balancing
# ---------------------------------------------------------------------------

def _signed_chi(adj: Mapping, root, blocked=frozenset()) -> int:
    depth = {root: 0}
    order = [root]
    for v in order:
        for u in adj[v]:
            if u not in blocked and u not in depth:
                depth[u] = depth[v] + 1
                order.append(u)
    odd_dist = sum(d & 1 for d in depth.values())
    return odd_dist - (len(depth) - odd_dist)


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


class _Balancer:
    """Edge insertions on a labelled tree, snapshotting every step."""

    def __init__(self, adj: Mapping, root):
        self.adj = {v: list(nbrs) for v, nbrs in adj.items()}
        self.root = root
        self.next_id = 0
        while self.next_id in self.adj:
            self.next_id += 1
        self.steps: list[RootedTree] = []

    def _new_vertex(self):
        w = self.next_id
        self.next_id += 1
        while self.next_id in self.adj:
            self.next_id += 1
        self.adj[w] = []
        return w

    def _link(self, a, b):
        self.adj[a].append(b)
        self.adj[b].append(a)

    def _unlink(self, a, b):
        self.adj[a].remove(b)
        self.adj[b].remove(a)

    def _snapshot(self):
        self.steps.append(canonical_form(self.adj, root=self.root))

    def insert(self, v, moved: Iterable = ()):
        """New vertex next to ``v`` taking over the edges ``v - u`` for ``u`` in ``moved``."""
        w = self._new_vertex()
        for u in moved:
            self._unlink(v, u)
            self._link(w, u)
        self._link(v, w)
        self._snapshot()
        return w

    def sign_fix(self, comp_root, outside):
        """Flip the sign of chi with two insertions; returns the new component root."""
        w = self._new_vertex()
        if outside is not None:
            self._unlink(outside, comp_root)
            self._link(outside, w)
        else:
            self.root = w
        self._link(w, comp_root)
        self._snapshot()
        self.insert(w)
        return w

    def balance(self, comp_root, outside, c: int, blocked: frozenset = frozenset()):
        """Steer chi of the component at ``comp_root`` to ``c``.

        ``blocked`` holds the split vertices of all enclosing levels;
        ``outside`` is the one adjacent to ``comp_root``.
        """
        chi = _signed_chi(self.adj, comp_root, blocked)
        if c == chi:
            return comp_root
        if c == -chi:
            return self.sign_fix(comp_root, outside)
        v = _walk_to_half(self.adj, comp_root, blocked)[-1]
        inner = blocked | {v}
        branches = []
        for u in self.adj[v]:
            if u in blocked:
                continue
            chi_u = _signed_chi(self.adj, u, inner)
            comp = set(_component(self.adj, u, inner))
            code = canonical_form({x: [y for y in self.adj[x] if y in comp] for x in comp}, root=u)
            branches.append((abs(chi_u), code.levels, u, chi_u))
        # ties in |chi| broken by canonical code for a reproducible sequence
        branches.sort(key=lambda b: (b[0], b[1]), reverse=True)
        moved = []
        if branches:
            sizes = [b[0] for b in branches]
            eps = sign_walk(sizes, c)
            c_rest = sum(e * s for e, s in zip(eps, sizes[1:]))
            self.balance(branches[0][2], v, c - c_rest, inner)
            for e, (_, _, u, chi_u) in zip(eps, branches[1:]):
                if chi_u != 0 and _sign(chi_u) != e:
                    moved.append(u)
        # the big branch may have a new root next to v; it stays with v
        self.insert(v, moved)
        chi = _signed_chi(self.adj, comp_root, blocked)
        if chi != c:
            if chi != -c:
                raise AssertionError(f"|chi| = {abs(chi)} after separation, expected {abs(c)}")
            comp_root = self.sign_fix(comp_root, outside)
        return comp_root


def balance_chi_labelled(adj: Mapping, root, c: int) -> tuple[dict, object, list[RootedTree]]:
    """Labelled version of :func:`balance_chi`.

    Existing vertex labels survive every insertion, which lets callers put
    removed leaves back afterwards.  Returns ``(adjacency, root, steps)``.
    """
    chi = _signed_chi(adj, root)
    if abs(c) > abs(chi):
        raise ContractError(f"|c| = {abs(c)} exceeds |chi| = {abs(chi)}")
    b = _Balancer(adj, root)
    b.balance(root, None, c)
    return b.adj, b.root, b.steps


def balance_chi(t0: RootedTree, c: int) -> list[RootedTree]:
    """Trees ``t_1..t_k``, each one edge insertion away from the previous.

    ``t_k`` has ``chi == c`` and ``k <= 3 + 3 log2(n)``.  At each level the
    recursion splits ``t`` at a half vertex, steers the largest branch
    toward the target with a greedy sign walk over the others, inserts one
    separating edge and, if the sign came out wrong, moves the root past a
    new leaf.

    >>> steps = balance_chi(RootedTree.star(4), 0)
    >>> parity_counts(steps[-1])[2]
    0
    """
    _, _, steps = balance_chi_labelled(t0.adjacency, 0, c)
    return steps


def max_balance_steps(n: int) -> float:
    return 3 + 3 * math.log2(n)
