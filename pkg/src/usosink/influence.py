"""Dimension influence graphs, branchings and their closures.

A graph on dimensions ``1..n`` is stored as its adjacency matrix with
``adj[j, i] = 1`` iff there is an edge ``i -> j`` (column = source,
row = target). Row ``j`` is therefore the in-neighbour set of ``j``.
"""

from __future__ import annotations

import itertools
from dataclasses import InitVar, dataclass
from graphlib import TopologicalSorter
from typing import Sequence

import networkx as nx
import numpy as np

from .gf2 import BitMatrix, iter_bits

BRANCHING_ENUM_LIMIT = 6
DIG_ENUM_LIMIT = 4


class EnumerationBoundError(ValueError):
    pass


class NotRealizableError(ValueError):
    pass


@dataclass(frozen=True)
class Branching:
    """Forest given by a parent array: ``parents[v - 1]`` is the parent of ``v`` (0 = root)."""

    parents: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.parents)
        if n < 1:
            raise ValueError("a branching needs at least one vertex")
        for p in self.parents:
            if not 0 <= p <= n:
                raise ValueError(f"parent {p} out of range 0..{n}")
        self.depths()  # raises on cycles

    @property
    def n(self) -> int:
        return len(self.parents)

    def parent(self, v: int) -> int:
        return self.parents[v - 1]

    def roots(self) -> list[int]:
        return [v for v in range(1, self.n + 1) if self.parents[v - 1] == 0]

    def depths(self) -> list[int]:
        """Depth of every vertex (roots have depth 0), indexed ``v - 1``."""
        n = self.n
        depth = [-1] * n
        for start in range(1, n + 1):
            path = []
            v = start
            while v != 0 and depth[v - 1] < 0:
                if v in path:
                    raise ValueError("cyclic parent map")
                path.append(v)
                v = self.parents[v - 1]
            base = -1 if v == 0 else depth[v - 1]
            for u in reversed(path):
                base += 1
                depth[u - 1] = base
        return depth

    def to_list(self) -> list[int]:
        return list(self.parents)

    @classmethod
    def from_list(cls, parents: Sequence[int]) -> Branching:
        return cls(tuple(int(p) for p in parents))


@dataclass(frozen=True)
class DimensionInfluenceGraph:
    adj: BitMatrix
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        if validate and not is_legal_dig(self.adj):
            raise ValueError("adjacency matrix is not a legal dimension influence graph")

    @property
    def n(self) -> int:
        return self.adj.nrows

    def in_neighbors(self, v: int) -> list[int]:
        return [p + 1 for p in iter_bits(self.adj.rows[v - 1])]

    def in_degree(self, v: int) -> int:
        return self.adj.rows[v - 1].bit_count()


@dataclass(frozen=True)
class LevelAssignment:
    """Level of every vertex, indexed ``v - 1``."""

    levels: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.levels)

    @property
    def max_level(self) -> int:
        return max(self.levels) if self.levels else 0

    def __getitem__(self, v: int) -> int:
        return self.levels[v - 1]

    def vertices_on(self, level: int) -> list[int]:
        return [v + 1 for v, lv in enumerate(self.levels) if lv == level]


def _adj(g: DimensionInfluenceGraph | BitMatrix) -> BitMatrix:
    return g.adj if isinstance(g, DimensionInfluenceGraph) else g


def closure_rows(parents: Sequence[int]) -> list[int]:
    """Rows of the reflexive transitive closure of a parent array (no validation)."""
    n = len(parents)
    rows = [0] * n
    done = [False] * n
    for start in range(1, n + 1):
        path = []
        v = start
        while v != 0 and not done[v - 1]:
            path.append(v)
            v = parents[v - 1]
        acc = 0 if v == 0 else rows[v - 1]
        for u in reversed(path):
            acc |= 1 << (u - 1)
            rows[u - 1] = acc
            done[u - 1] = True
    return rows


def closure_of_branching(b: Branching | Sequence[int]) -> DimensionInfluenceGraph:
    if not isinstance(b, Branching):
        b = Branching.from_list(b)
    adj = BitMatrix(b.n, b.n, tuple(closure_rows(b.parents)))
    # closures of branchings are legal by construction
    return DimensionInfluenceGraph(adj, validate=False)


def _off_diagonal_acyclic(m: BitMatrix) -> bool:
    """Peel off vertices with no remaining in-neighbours, one layer at a time."""
    rows = [row & ~(1 << j) for j, row in enumerate(m.rows)]
    remaining = list(range(m.nrows))
    alive = (1 << m.nrows) - 1
    while remaining:
        ready = 0
        rest = []
        for j in remaining:
            if rows[j] & alive:
                rest.append(j)
            else:
                ready |= 1 << j
        if not ready:
            return False
        alive &= ~ready
        remaining = rest
    return True


def is_legal_dig(m: BitMatrix) -> bool:
    """Diagonal all ones and the off-diagonal part acyclic."""
    if not m.is_square:
        return False
    if any(not (row >> j) & 1 for j, row in enumerate(m.rows)):
        return False
    return _off_diagonal_acyclic(m)


def transitive_reduction(m: BitMatrix) -> BitMatrix:
    """Loop-free transitive reduction of a legal DIG, same orientation convention."""
    if not is_legal_dig(m):
        raise ValueError("transitive reduction needs a legal DIG")
    n = m.nrows
    out = [c & ~(1 << i) for i, c in enumerate(m.columns)]
    order = list(TopologicalSorter({j: [i for i in iter_bits(r) if i != j] for j, r in enumerate(m.rows)}).static_order())
    reach = [0] * n
    for i in reversed(order):
        acc = 0
        for j in iter_bits(out[i]):
            acc |= (1 << j) | reach[j]
        reach[i] = acc
    red_out = []
    for i in range(n):
        covered = 0
        for j in iter_bits(out[i]):
            covered |= reach[j]
        red_out.append(out[i] & ~covered)
    # red_out[i] is the out-set of i, i.e. the transposed adjacency row
    return BitMatrix(n, n, tuple(red_out)).transpose()


def branching_of(m: BitMatrix) -> Branching | None:
    """Branching whose closure is the legal DIG ``m``, or None if there is none.

    In a closure every proper ancestor of ``v`` is an in-neighbour and the
    parent is the one with the largest in-degree, so that candidate is the
    only possible parent; the closure comparison settles the rest.
    """
    indeg = [r.bit_count() for r in m.rows]
    parents = []
    for j, row in enumerate(m.rows):
        best, best_deg = 0, -1
        for i in iter_bits(row & ~(1 << j)):
            if indeg[i] > best_deg:
                best, best_deg = i + 1, indeg[i]
        parents.append(best)
    try:
        b = Branching(tuple(parents))
    except ValueError:
        return None
    if tuple(closure_rows(b.parents)) != m.rows:
        return None
    return b


def branching_of_reduction(m: BitMatrix) -> Branching | None:
    """Same as :func:`branching_of`, going through the transitive reduction."""
    red = transitive_reduction(m)
    parents = []
    for row in red.rows:
        if row.bit_count() > 1:
            return None
        parents.append(row.bit_length())  # 0 for roots, else 1-based parent
    b = Branching(tuple(parents))
    if tuple(closure_rows(b.parents)) != m.rows:
        return None
    return b


def is_realizable_dig(m: BitMatrix) -> bool:
    if not is_legal_dig(m):
        raise ValueError("matrix is not a legal DIG")
    return branching_of(m) is not None


def levels_of(g: DimensionInfluenceGraph | BitMatrix) -> LevelAssignment:
    adj = _adj(g)
    if not is_legal_dig(adj) or branching_of(adj) is None:
        raise NotRealizableError("levels are only defined for closures of branchings")
    return LevelAssignment(tuple(r.bit_count() - 1 for r in adj.rows))


def ancestor_of(g: DimensionInfluenceGraph | BitMatrix, v: int, level: int) -> int:
    """The unique in-neighbour of ``v`` on ``level`` (closure of a branching assumed)."""
    adj = _adj(g)
    row = adj.rows[v - 1]
    own = row.bit_count() - 1
    if not 0 <= level < own:
        raise ValueError(f"vertex {v} on level {own} has no {level}-ancestor")
    for u in iter_bits(row):
        if adj.rows[u].bit_count() - 1 == level:
            return u + 1
    raise NotRealizableError(f"vertex {v} has no in-neighbour on level {level}")


def random_branching(n: int, rng_seed: int | np.random.Generator | None = None) -> Branching:
    """Uniform labelled branching on ``n`` vertices.

    Rooted forests on ``1..n`` correspond to trees on ``0..n`` (0 joined to
    every root), so a uniform Prüfer sequence over ``0..n`` gives a uniform
    forest.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(rng_seed)
    seq = rng.integers(0, n + 1, size=n - 1).tolist()
    if n == 1:
        tree = nx.Graph([(0, 1)])
    else:
        tree = nx.from_prufer_sequence(seq)
    parents = [0] * n
    for child, parent in nx.bfs_predecessors(tree, 0):
        parents[child - 1] = parent
    return Branching(tuple(parents))


def random_legal_dig(n: int, rng_seed: int | np.random.Generator | None = None) -> DimensionInfluenceGraph:
    """``P A P^T`` for uniform random strict-upper ``A + I`` and permutation ``P``."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(rng_seed)
    upper = np.triu(rng.integers(0, 2, size=(n, n), dtype=np.uint8), k=1) | np.eye(n, dtype=np.uint8)
    perm = rng.permutation(n)
    m = np.zeros((n, n), dtype=np.uint8)
    m[np.ix_(perm, perm)] = upper
    return DimensionInfluenceGraph(BitMatrix.from_array(m))


def enumerate_branchings(n: int) -> list[Branching]:
    if n < 1:
        raise ValueError("n must be positive")
    if n > BRANCHING_ENUM_LIMIT:
        raise EnumerationBoundError("enumeration bound exceeded")
    out = []
    for parents in itertools.product(range(n + 1), repeat=n):
        if any(p == v for v, p in enumerate(parents, start=1)):
            continue
        if _parent_map_acyclic(parents):
            out.append(Branching(parents))
    return out


def _parent_map_acyclic(parents: Sequence[int]) -> bool:
    n = len(parents)
    state = [0] * (n + 1)  # 0 unseen, 1 on stack, 2 done
    state[0] = 2
    for start in range(1, n + 1):
        v = start
        stack = []
        while state[v] == 0:
            state[v] = 1
            stack.append(v)
            v = parents[v - 1]
        if state[v] == 1:
            return False
        for u in stack:
            state[u] = 2
    return True


def enumerate_legal_digs(n: int) -> list[DimensionInfluenceGraph]:
    if n < 1:
        raise ValueError("n must be positive")
    if n > DIG_ENUM_LIMIT:
        raise EnumerationBoundError("enumeration bound exceeded")
    slots = [(j, i) for j in range(n) for i in range(n) if i != j]
    out = []
    for pattern in itertools.product((0, 1), repeat=len(slots)):
        rows = [1 << j for j in range(n)]
        for (j, i), bit in zip(slots, pattern):
            if bit:
                rows[j] |= 1 << i
        m = BitMatrix(n, n, tuple(rows))
        if _off_diagonal_acyclic(m):
            out.append(DimensionInfluenceGraph(m))
    return out
