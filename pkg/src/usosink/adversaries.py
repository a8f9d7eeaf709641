"""Adaptive matrix-vector oracles that force many queries.

:class:`GeneralAdversary` keeps every Mx=y solver from certifying an answer
before ``n - 1`` independent queries over legal DIGs; :class:`GoodPathsAdversary`
does the same for ``floor(log2 n)`` queries over closures of branchings.
Both expose the matrix-vector oracle interface (``n``, ``y``, ``query``,
``query_count``, ``transcript``) so any solver can be run against them.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any

from .gf2 import (
    BitMatrix,
    BitVector,
    SingularMatrixError,
    SpanBasis,
    free_variables,
    mat_vec_mul,
    solve,
    solve_underdetermined,
    span_contains,
)
from .influence import closure_rows, is_legal_dig, is_realizable_dig


class GeneralAdversary:
    """Starts from ``I`` and edits one row per query so ``y`` stays outside the reply span."""

    def __init__(self, n: int, y: BitVector | None = None) -> None:
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.y = BitVector.ones(n) if y is None else y
        if self.y.n != n:
            raise ValueError("target length does not match n")
        self._rows = [1 << i for i in range(n)]
        self.accepted: list[BitVector] = []
        self.replies: list[BitVector] = []
        self._span = SpanBasis(n)
        self.transcript: list[tuple[BitVector, BitVector]] = []
        self.changes: list[dict[str, Any]] = []

    @property
    def k(self) -> int:
        """Number of linearly independent queries answered."""
        return len(self.accepted)

    @property
    def query_count(self) -> int:
        return len(self.transcript)

    @property
    def matrix(self) -> BitMatrix:
        return BitMatrix(self.n, self.n, tuple(self._rows))

    @property
    def frozen(self) -> bool:
        return self.k >= self.n - 1

    def query(self, x: BitVector) -> BitVector:
        if x.n != self.n:
            raise ValueError(f"dimension mismatch: expected length {self.n}, got {x.n}")
        if self._span.contains(x.bits):
            # dependent queries are determined by earlier replies
            reply = mat_vec_mul(self.matrix, x)
            self.transcript.append((x, reply))
            return reply
        modify = not self.frozen
        self.accepted.append(x)
        self._span.add(x.bits)
        k = self.k
        m = self.matrix
        if modify and span_contains([mat_vec_mul(m, xi) for xi in self.accepted], self.y):
            xmat = BitMatrix(k, self.n, tuple(v.bits for v in self.accepted))
            free = free_variables(xmat)
            z = solve_underdetermined(xmat, BitVector.unit(k, k), free)
            cols = m.columns
            j = min(free)
            # every free variable is a sink of the current graph
            assert cols[j - 1] == 1 << (j - 1), "picked dimension is not a sink"
            self._rows[j - 1] ^= z.bits
            self.changes.append({"query": k, "row": j, "added": z.to_str()})
        reply = mat_vec_mul(self.matrix, x)
        self.replies.append(reply)
        self.transcript.append((x, reply))
        return reply


def general_adversary_answer(state: GeneralAdversary, x: BitVector) -> BitVector:
    return state.query(x)


@dataclass
class UncertaintyWitness:
    """Two matrices agreeing on every reply so far but with different solutions."""

    current: BitMatrix
    alternative: BitMatrix
    extra_query: BitVector
    y_outside_span: bool
    alternative_legal: bool
    alternative_consistent: bool
    solutions_differ: bool

    @property
    def ok(self) -> bool:
        return self.y_outside_span and self.alternative_legal and self.alternative_consistent and self.solutions_differ


def uncertainty_witness(state: GeneralAdversary) -> UncertaintyWitness:
    if state.k >= state.n - 1:
        raise ValueError("uncertainty audit is defined only for k < n - 1")
    m = state.matrix
    outside = not span_contains(state.replies, state.y)
    extra = solve(m, state.y)
    twin = copy.deepcopy(state)
    twin.query(extra)
    alt = twin.matrix
    consistent = twin.k == state.k + 1 and all(mat_vec_mul(alt, q) == r for q, r in state.transcript)
    try:
        differ = solve(alt, state.y) != extra
    except SingularMatrixError:
        differ = False
    return UncertaintyWitness(m, alt, extra, outside, is_legal_dig(alt), consistent, differ)


def uncertainty_audit(state: GeneralAdversary) -> bool:
    return uncertainty_witness(state).ok


@dataclass
class Path:
    vertices: list[int]
    good: bool = True

    @property
    def mask(self) -> int:
        m = 0
        for v in self.vertices:
            m |= 1 << (v - 1)
        return m


@dataclass
class GoodPathsAdversary:
    """Path-system adversary for realizable instances with ``y = 1``.

    Good paths have even overlap with every past query, so any other path
    may still be hung below one of them without changing a past reply.
    """

    n: int
    paths: list[Path] = field(init=False)
    transcript: list[tuple[BitVector, BitVector]] = field(default_factory=list, init=False)
    good_history: list[int] = field(init=False)
    changes: list[dict[str, Any]] = field(default_factory=list, init=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        self.paths = [Path([v]) for v in range(1, self.n + 1)]
        self.good_history = [self.n]

    @property
    def y(self) -> BitVector:
        return BitVector.ones(self.n)

    @property
    def query_count(self) -> int:
        return len(self.transcript)

    @property
    def good_count(self) -> int:
        return sum(p.good for p in self.paths)

    def parents(self) -> list[int]:
        parents = [0] * self.n
        for p in self.paths:
            for prev, v in zip(p.vertices, p.vertices[1:]):
                parents[v - 1] = prev
        return parents

    @property
    def matrix(self) -> BitMatrix:
        return BitMatrix(self.n, self.n, tuple(closure_rows(self.parents())))

    def query(self, q: BitVector) -> BitVector:
        if q.n != self.n:
            raise ValueError(f"dimension mismatch: expected length {self.n}, got {q.n}")
        odd = [p for p in self.paths if p.good and (p.mask & q.bits).bit_count() % 2]
        odd.sort(key=lambda p: min(p.vertices))
        for first, second in zip(odd[::2], odd[1::2]):
            self.changes.append({"query": self.query_count + 1, "head": first.vertices[0], "attached": second.vertices[0]})
            first.vertices.extend(second.vertices)
            self.paths.remove(second)
        if len(odd) % 2:
            odd[-1].good = False
        reply = mat_vec_mul(self.matrix, q)
        self.transcript.append((q, reply))
        self.good_history.append(self.good_count)
        return reply


def goodpaths_answer(state: GoodPathsAdversary, q: BitVector) -> BitVector:
    return state.query(q)


def goodpaths_alternative(state: GoodPathsAdversary) -> BitMatrix | None:
    """Closure with another path hung below a good path, or None when impossible."""
    good = [p for p in state.paths if p.good]
    if not good or len(state.paths) < 2:
        return None
    host = good[0]
    other = next(p for p in state.paths if p is not host)
    parents = state.parents()
    parents[other.vertices[0] - 1] = host.vertices[-1]
    return BitMatrix(state.n, state.n, tuple(closure_rows(parents)))


def goodpaths_audit(state: GoodPathsAdversary) -> bool:
    m = state.matrix
    if any(mat_vec_mul(m, q) != r for q, r in state.transcript):
        return False
    for p in state.paths:
        if p.good and any((p.mask & q.bits).bit_count() % 2 for q, _ in state.transcript):
            return False
    hist = state.good_history
    if any(after < before // 2 for before, after in zip(hist, hist[1:])):
        return False
    covered = sorted(v for p in state.paths for v in p.vertices)
    if covered != list(range(1, state.n + 1)):
        return False
    return is_legal_dig(m) and is_realizable_dig(m)
