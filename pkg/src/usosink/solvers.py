"""Sink finders and Mx=y solvers, plus the reductions between the two models.

Oracles are duck-typed. A vertex-evaluation oracle has ``n``, ``query(v)``,
``query_count`` and ``transcript``; a matrix-vector oracle additionally
exposes the public target ``y``. Every solver returns a :class:`SolveReport`
whose ``queries_used`` is the change of the oracle's own counter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .gf2 import (
    BitMatrix,
    BitVector,
    SpanBasis,
    array_to_int,
    ceil_log2,
    int_to_array,
    mat_vec_mul,
    solve,
)
from .influence import Branching, LevelAssignment, NotRealizableError, closure_rows


class NotDecomposableError(RuntimeError):
    pass


class InconsistentInstanceError(ValueError):
    pass


@dataclass
class SolveReport:
    answer: BitVector
    queries_used: int
    transcript: list[tuple[BitVector, BitVector]] = field(default_factory=list, repr=False)
    matrix: BitMatrix | None = field(default=None, repr=False)

    def to_dict(self, with_transcript: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {"answer": self.answer.to_str(), "queries": self.queries_used}
        if with_transcript:
            data["transcript"] = [[q.to_str(), r.to_str()] for q, r in self.transcript]
        return data


Solver = Callable[[Any], SolveReport]


def jump_antipodal(oracle, v0: BitVector | None = None) -> SolveReport:
    """Query ``v`` and jump to ``v xor o(v)``; at most ``n`` evaluations on decomposable USOs."""
    n = oracle.n
    v = BitVector.ones(n) if v0 is None else v0
    start = oracle.query_count
    visited = set()
    for _ in range(n):
        if v.bits in visited:
            raise NotDecomposableError("not decomposable")
        visited.add(v.bits)
        out = oracle.query(v)
        if out.is_zero():
            break
        v = v ^ out
    # after n jumps the remaining 0-dimensional face is the sink; no query needed
    return SolveReport(v, oracle.query_count - start, oracle.transcript[start:])


def recover_matrix_naive(oracle) -> BitMatrix:
    """Column ``i`` of ``M`` is the reply to ``e_i``."""
    n = oracle.n
    cols = tuple(oracle.query(BitVector.unit(n, i)).bits for i in range(1, n + 1))
    return BitMatrix(n, n, cols).transpose()


def naive_mxy_solver(oracle) -> SolveReport:
    start = oracle.query_count
    m = recover_matrix_naive(oracle)
    return SolveReport(solve(m, oracle.y), oracle.query_count - start, oracle.transcript[start:], m)


def levelling(oracle) -> LevelAssignment:
    """Recover every vertex level, one binary digit per query."""
    n = oracle.n
    lvl = np.zeros(n, dtype=np.int64)
    q = BitVector.ones(n)
    for i in range(ceil_log2(n)):
        r = oracle.query(q) ^ q
        lvl += int_to_array(r.bits, n).astype(np.int64) << i
        q = q & r
    return LevelAssignment(tuple(int(x) for x in lvl))


@dataclass
class AncestorTable:
    """``table[l, v]`` is the ``l``-ancestor of ``v`` or 0; column 0 is unused."""

    table: np.ndarray

    @property
    def n(self) -> int:
        return self.table.shape[1] - 1

    def __getitem__(self, key: tuple[int, int]) -> int:
        level, v = key
        if level >= self.table.shape[0]:
            return 0
        return int(self.table[level, v])

    def branching(self, lvl: LevelAssignment) -> Branching:
        parents = [self[lv - 1, v] if lv > 0 else 0 for v, lv in enumerate(lvl.levels, start=1)]
        if any(p == 0 for p, lv in zip(parents, lvl.levels) if lv > 0):
            raise InconsistentInstanceError("inconsistent instance")
        return Branching(tuple(parents))


def divide_and_conquer(oracle, lvl: LevelAssignment) -> AncestorTable:
    """Find every ancestor by binary search on median levels of disjoint level intervals.

    All active intervals share one query per bit position. Replies to
    vertices below an interval are corrected with the reply of their
    ancestor at the interval's bottom level, which cancels the effect of
    that interval's queried vertices.
    """
    n = oracle.n
    levels = np.asarray(lvl.levels, dtype=np.int64)
    lmax = lvl.max_level
    table = np.zeros((lmax, n + 1), dtype=np.int32)
    order = np.argsort(levels, kind="stable") + 1
    starts = np.searchsorted(levels[order - 1], np.arange(lmax + 2))

    def on_levels(lo: int, hi: int) -> np.ndarray:
        if lo > hi:
            return order[:0]
        return order[starts[lo] : starts[hi + 1]]

    rounds = ceil_log2(n)
    width = 1 << rounds
    subproblems = [(0, lmax)] if lmax > 0 else []
    while subproblems:
        medians = [(a + b) // 2 for a, b in subproblems]
        found = [np.zeros(on_levels(m + 1, b).size, dtype=np.int64) for (_, b), m in zip(subproblems, medians)]
        for s in range(rounds):
            # label v is coded as v mod 2**rounds, so all n labels fit in rounds bits
            q = np.zeros(n, dtype=np.uint8)
            for m in medians:
                vs = on_levels(m, m)
                q[vs[((vs % width) >> s) & 1 == 1] - 1] = 1
            reply = oracle.query(BitVector(n, array_to_int(q)))
            r = np.zeros(n + 1, dtype=np.uint8)
            r[1:] = int_to_array(reply.bits, n)
            for i, ((_, b), m) in enumerate(zip(subproblems, medians)):
                deeper = on_levels(b + 1, lmax)
                if deeper.size:
                    r[deeper] ^= r[table[b, deeper]]
                found[i] += r[on_levels(m + 1, b)].astype(np.int64) << s
        for i, ((_, b), m) in enumerate(zip(subproblems, medians)):
            band = on_levels(m + 1, b)
            anc = np.where(found[i] == 0, width, found[i])
            if anc.size and (anc.max() > n or np.any(levels[anc - 1] != m)):
                raise InconsistentInstanceError("inconsistent instance")
            table[m, band] = anc
            # transitivity through the already known b-ancestor
            deeper = on_levels(b + 1, lmax)
            if deeper.size:
                table[m, deeper] = table[m, table[b, deeper]]
        nxt = []
        for (a, b), m in zip(subproblems, medians):
            if m > a:
                nxt.append((a, m))
            if b > m + 1:
                nxt.append((m + 1, b))
        subproblems = nxt
    return AncestorTable(table)


class _Recorder:
    """Forwards queries and keeps its own (query, reply) log."""

    def __init__(self, oracle) -> None:
        self._oracle = oracle
        self.n = oracle.n
        self.y = oracle.y
        self.transcript: list[tuple[BitVector, BitVector]] = []

    @property
    def query_count(self) -> int:
        return len(self.transcript)

    def query(self, q: BitVector) -> BitVector:
        r = self._oracle.query(q)
        self.transcript.append((q, r))
        return r


def recover_realizable_matrix(oracle) -> BitMatrix:
    """Levelling followed by divide-and-conquer; checked against every reply seen."""
    rec = _Recorder(oracle)
    lvl = levelling(rec)
    branching = divide_and_conquer(rec, lvl).branching(lvl)
    rows = closure_rows(branching.parents)
    if any(r.bit_count() - 1 != lv for r, lv in zip(rows, lvl.levels)):
        raise InconsistentInstanceError("inconsistent instance")
    m = BitMatrix(oracle.n, oracle.n, tuple(rows))
    if any(mat_vec_mul(m, q) != r for q, r in rec.transcript):
        raise InconsistentInstanceError("inconsistent instance")
    return m


def realizable_mxy_solver(oracle) -> SolveReport:
    start = oracle.query_count
    m = recover_realizable_matrix(oracle)
    return SolveReport(solve(m, oracle.y), oracle.query_count - start, oracle.transcript[start:], m)


def random_query_solver(seed: int) -> Solver:
    """Mx=y solver issuing random independent queries until ``y`` is in the reply span."""

    def run(oracle) -> SolveReport:
        rng = np.random.default_rng(seed)
        n = oracle.n
        start = oracle.query_count
        asked = SpanBasis(n)
        replies = SpanBasis(n)  # payload: the query combination
        while True:
            x = replies.express(oracle.y.bits)
            if x is not None:
                return SolveReport(BitVector(n, x), oracle.query_count - start, oracle.transcript[start:])
            q = array_to_int(rng.integers(0, 2, size=n, dtype=np.uint8))
            if asked.contains(q):
                continue
            r = oracle.query(BitVector(n, q))
            asked.add(q)
            replies.add(r.bits, q)

    return run


# -- reductions between the two query models -----------------------------


class AnchoredMxyOracle:
    """Matrix-vector oracle simulated on a vertex oracle: ``M q = u(0) xor u(q)``."""

    def __init__(self, vertex_oracle) -> None:
        self._ve = vertex_oracle
        self.n = vertex_oracle.n
        self.y = vertex_oracle.query(BitVector.zeros(self.n))
        self.query_count = 0
        self.transcript: list[tuple[BitVector, BitVector]] = []

    def query(self, q: BitVector) -> BitVector:
        r = self.y ^ self._ve.query(q)
        self.query_count += 1
        self.transcript.append((q, r))
        return r


class SimulatedVertexOracle:
    """Vertex oracle simulated on a matrix-vector oracle.

    The first queried vertex ``v0`` gets outmap ``y``; later vertices get
    ``y xor M (v xor v0)``. Products of vectors already in the span of
    earlier queries are combined locally instead of being asked.
    """

    def __init__(self, mxy_oracle) -> None:
        self._mxy = mxy_oracle
        self.n = mxy_oracle.n
        self.v0: BitVector | None = None
        self._known = SpanBasis(self.n)
        self.query_count = 0
        self.transcript: list[tuple[BitVector, BitVector]] = []

    def query(self, v: BitVector) -> BitVector:
        if self.v0 is None:
            self.v0 = v
        q = v ^ self.v0
        product = self._known.express(q.bits)
        if product is None:
            product = self._mxy.query(q).bits
            self._known.add(q.bits, product)
        out = self._mxy.y ^ BitVector(self.n, product)
        self.query_count += 1
        self.transcript.append((v, out))
        return out


def sink_finder_from_mxy_solver(solver: Solver) -> Solver:
    """One anchor evaluation at 0 plus one evaluation per matrix-vector query."""

    def run(vertex_oracle) -> SolveReport:
        start = vertex_oracle.query_count
        sim = AnchoredMxyOracle(vertex_oracle)
        inner = solver(sim)
        return SolveReport(
            inner.answer,
            vertex_oracle.query_count - start,
            vertex_oracle.transcript[start:],
            inner.matrix,
        )

    return run


def mxy_solver_from_sink_finder(finder: Solver) -> Solver:
    """The first evaluation is free; the answer is ``sink xor v0``."""

    def run(mxy_oracle) -> SolveReport:
        start = mxy_oracle.query_count
        sim = SimulatedVertexOracle(mxy_oracle)
        inner = finder(sim)
        v0 = sim.v0 if sim.v0 is not None else BitVector.zeros(mxy_oracle.n)
        return SolveReport(
            inner.answer ^ v0,
            mxy_oracle.query_count - start,
            mxy_oracle.transcript[start:],
            inner.matrix,
        )

    return run


def solve_realizable_sink(oracle, n: int | None = None, certify: bool = False) -> SolveReport:
    """Sink of a realizable Matoušek-type USO in ``1 + L + L * ceil(log2(lmax + 1))`` evaluations, ``L = ceil(log2 n)``.

    Other oracles are rejected whenever a reply contradicts the reconstruction.
    Some cannot be told apart within the budget; ``certify`` spends one more
    evaluation on the answer to rule those out.
    """
    if n is not None and n != oracle.n:
        raise ValueError("n does not match the oracle")
    try:
        report = sink_finder_from_mxy_solver(realizable_mxy_solver)(oracle)
    except (InconsistentInstanceError, NotRealizableError, ValueError) as exc:
        raise NotRealizableError("oracle not realizable Matoušek-type") from exc
    m = report.matrix
    # every observed outmap must match the recovered orientation
    if m is None or any(mat_vec_mul(m, v ^ report.answer) != out for v, out in report.transcript):
        raise NotRealizableError("oracle not realizable Matoušek-type")
    if certify:
        if not oracle.query(report.answer).is_zero():
            raise NotRealizableError("oracle not realizable Matoušek-type")
        report.queries_used += 1
        report.transcript = report.transcript + oracle.transcript[-1:]
    return report
