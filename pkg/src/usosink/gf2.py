"""Dense GF(2) vectors and matrices backed by int bitsets.

Coordinates are 1-based. Coordinate ``i`` lives in bit ``i - 1`` of the
underlying integer, so the string form ``"100"`` (index 1 leftmost) is the
vector ``e_1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np


class SingularMatrixError(ValueError):
    """Raised when a square system has no unique solution."""


class InconsistentSystemError(ValueError):
    """Raised when a linear system has no solution."""


def iter_bits(value: int) -> Iterator[int]:
    """Yield the 0-based positions of the set bits of ``value``, ascending."""
    while value:
        low = value & -value
        yield low.bit_length() - 1
        value ^= low


def ceil_log2(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return (n - 1).bit_length()


def int_to_array(value: int, n: int) -> np.ndarray:
    """Unpack the low ``n`` bits of ``value`` into a uint8 array."""
    raw = value.to_bytes((n + 7) // 8, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:n]


def array_to_int(bits: np.ndarray) -> int:
    packed = np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


@dataclass(frozen=True)
class BitVector:
    n: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("length must be non-negative")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits do not fit in length {self.n}")

    @classmethod
    def zeros(cls, n: int) -> BitVector:
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> BitVector:
        return cls(n, (1 << n) - 1)

    @classmethod
    def unit(cls, n: int, i: int) -> BitVector:
        if not 1 <= i <= n:
            raise IndexError(f"index {i} out of range 1..{n}")
        return cls(n, 1 << (i - 1))

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> BitVector:
        bits = 0
        for i in indices:
            if not 1 <= i <= n:
                raise IndexError(f"index {i} out of range 1..{n}")
            bits |= 1 << (i - 1)
        return cls(n, bits)

    @classmethod
    def from_list(cls, values: Sequence[int]) -> BitVector:
        bits = 0
        for pos, b in enumerate(values):
            if b not in (0, 1):
                raise ValueError(f"entry {b!r} is not a bit")
            bits |= b << pos
        return cls(len(values), bits)

    @classmethod
    def from_str(cls, text: str) -> BitVector:
        if any(c not in "01" for c in text):
            raise ValueError(f"not a bit string: {text!r}")
        return cls.from_list([int(c) for c in text])

    def to_str(self) -> str:
        return "".join("1" if (self.bits >> pos) & 1 else "0" for pos in range(self.n))

    def to_list(self) -> list[int]:
        return [(self.bits >> pos) & 1 for pos in range(self.n)]

    def support(self) -> list[int]:
        """1-based indices of the nonzero entries."""
        return [pos + 1 for pos in iter_bits(self.bits)]

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def is_zero(self) -> bool:
        return self.bits == 0

    def _check(self, other: BitVector) -> None:
        if not isinstance(other, BitVector):
            raise TypeError(f"expected BitVector, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")

    def __xor__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self.n, self.bits ^ other.bits)

    def __and__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self.n, self.bits & other.bits)

    def dot(self, other: BitVector) -> int:
        self._check(other)
        return (self.bits & other.bits).bit_count() & 1

    def __getitem__(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexError(f"index {i} out of range 1..{self.n}")
        return (self.bits >> (i - 1)) & 1

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[int]:
        return iter(self.to_list())

    def __str__(self) -> str:
        return self.to_str()


@dataclass(frozen=True)
class BitMatrix:
    """An ``nrows x ncols`` matrix; ``rows[i - 1]`` holds row ``i`` as a bitset."""

    nrows: int
    ncols: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("dimensions must be non-negative")
        if len(self.rows) != self.nrows:
            raise ValueError("row count does not match nrows")
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row does not fit in {self.ncols} columns")

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> BitMatrix:
        return cls(nrows, ncols, (0,) * nrows)

    @classmethod
    def from_row_ints(cls, rows: Sequence[int], ncols: int) -> BitMatrix:
        return cls(len(rows), ncols, tuple(rows))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int] | str | BitVector], ncols: int | None = None) -> BitMatrix:
        vecs = []
        for r in rows:
            if isinstance(r, BitVector):
                vecs.append(r)
            elif isinstance(r, str):
                vecs.append(BitVector.from_str(r))
            else:
                vecs.append(BitVector.from_list(list(r)))
        if ncols is None:
            if not vecs:
                raise ValueError("ncols required for a matrix without rows")
            ncols = vecs[0].n
        if any(v.n != ncols for v in vecs):
            raise ValueError("rows have inconsistent lengths")
        return cls(len(vecs), ncols, tuple(v.bits for v in vecs))

    def to_strs(self) -> list[str]:
        return [BitVector(self.ncols, r).to_str() for r in self.rows]

    def to_array(self) -> np.ndarray:
        if self.nrows == 0:
            return np.zeros((0, self.ncols), dtype=np.uint8)
        return np.stack([int_to_array(r, self.ncols) for r in self.rows])

    @classmethod
    def from_array(cls, arr: np.ndarray) -> BitMatrix:
        arr = np.asarray(arr, dtype=np.uint8) % 2
        nrows, ncols = arr.shape
        return cls(nrows, ncols, tuple(array_to_int(row) for row in arr))

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def row(self, i: int) -> BitVector:
        return BitVector(self.ncols, self.rows[i - 1])

    def col(self, j: int) -> BitVector:
        return BitVector(self.nrows, self.columns[j - 1])

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (1 <= i <= self.nrows and 1 <= j <= self.ncols):
            raise IndexError(f"entry ({i}, {j}) out of range")
        return (self.rows[i - 1] >> (j - 1)) & 1

    @cached_property
    def columns(self) -> tuple[int, ...]:
        """Column bitsets, used for fast products."""
        if self.nrows == 0:
            return (0,) * self.ncols
        return tuple(array_to_int(c) for c in self.to_array().T)

    def transpose(self) -> BitMatrix:
        return BitMatrix(self.ncols, self.nrows, self.columns)

    def with_row(self, i: int, row: int) -> BitMatrix:
        rows = list(self.rows)
        rows[i - 1] = row
        return BitMatrix(self.nrows, self.ncols, tuple(rows))

    def __matmul__(self, other: BitVector | BitMatrix) -> BitVector | BitMatrix:
        if isinstance(other, BitVector):
            return mat_vec_mul(self, other)
        if isinstance(other, BitMatrix):
            if other.nrows != self.ncols:
                raise ValueError("dimension mismatch")
            rows = []
            for r in self.rows:
                acc = 0
                for k in iter_bits(r):
                    acc ^= other.rows[k]
                rows.append(acc)
            return BitMatrix(self.nrows, other.ncols, tuple(rows))
        return NotImplemented

    def __add__(self, other: BitMatrix) -> BitMatrix:
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("dimension mismatch")
        return BitMatrix(self.nrows, self.ncols, tuple(a ^ b for a, b in zip(self.rows, other.rows)))

    def __str__(self) -> str:
        return "\n".join(self.to_strs())


def mat_vec_mul(m: BitMatrix, x: BitVector) -> BitVector:
    if x.n != m.ncols:
        raise ValueError(f"dimension mismatch: matrix has {m.ncols} columns, vector length {x.n}")
    cols = m.columns
    acc = 0
    for j in iter_bits(x.bits):
        acc ^= cols[j]
    return BitVector(m.nrows, acc)


def _rref(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form with the leftmost-pivot rule.

    Only bits ``0..ncols-1`` are pivot candidates; higher bits (augmented
    columns) are carried along. Returns the nonzero reduced rows and their
    pivot bit positions. The first ``len(pivots)`` rows are the pivot rows;
    the remaining rows are zero on the pivot-candidate bits.
    """
    work = list(rows)
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        bit = 1 << col
        found = next((r for r in range(top, len(work)) if work[r] & bit), None)
        if found is None:
            continue
        work[top], work[found] = work[found], work[top]
        for r in range(len(work)):
            if r != top and work[r] & bit:
                work[r] ^= work[top]
        pivots.append(col)
        top += 1
        if top == len(work):
            break
    return work, pivots


def rank(m: BitMatrix) -> int:
    return len(_rref(m.rows, m.ncols)[1])


def solve(m: BitMatrix, y: BitVector) -> BitVector:
    """Return the unique ``x`` with ``m @ x == y``."""
    if not m.is_square:
        raise ValueError("matrix must be square")
    if y.n != m.nrows:
        raise ValueError(f"dimension mismatch: {m.nrows} rows, vector length {y.n}")
    n = m.ncols
    aug = [r | (((y.bits >> i) & 1) << n) for i, r in enumerate(m.rows)]
    reduced, pivots = _rref(aug, n)
    if len(pivots) < n:
        raise SingularMatrixError("singular")
    x = 0
    for row, col in zip(reduced, pivots):
        if (row >> n) & 1:
            x |= 1 << col
    return BitVector(n, x)


def span_contains(vs: Sequence[BitVector], y: BitVector) -> bool:
    """True iff ``y`` is a GF(2) combination of ``vs`` (the empty one included)."""
    basis = SpanBasis(y.n)
    for v in vs:
        if v.n != y.n:
            raise ValueError(f"length mismatch: {v.n} vs {y.n}")
        basis.add(v.bits)
    return basis.contains(y.bits)


def free_variables(x: BitMatrix) -> set[int]:
    """Non-pivot columns (1-based) of the reduced form of ``x``."""
    _, pivots = _rref(x.rows, x.ncols)
    pivot_set = set(pivots)
    return {c + 1 for c in range(x.ncols) if c not in pivot_set}


def solve_underdetermined(x: BitMatrix, b: BitVector, zeroed: Iterable[int]) -> BitVector:
    """Return the unique ``z`` with ``x @ z == b`` and ``z_i = 0`` for ``i`` in ``zeroed``."""
    if b.n != x.nrows:
        raise ValueError(f"dimension mismatch: {x.nrows} rows, vector length {b.n}")
    n = x.ncols
    zero_mask = 0
    for i in zeroed:
        if not 1 <= i <= n:
            raise IndexError(f"index {i} out of range 1..{n}")
        zero_mask |= 1 << (i - 1)
    keep = ((1 << n) - 1) & ~zero_mask
    aug = [(r & keep) | (((b.bits >> i) & 1) << n) for i, r in enumerate(x.rows)]
    reduced, pivots = _rref(aug, n)
    if any(row >> n for row in reduced[len(pivots):]):
        raise InconsistentSystemError("inconsistent system")
    if set(pivots) != set(iter_bits(keep)):
        raise SingularMatrixError("solution is not unique with the given zeroed variables")
    z = 0
    for row, col in zip(reduced, pivots):
        if (row >> n) & 1:
            z |= 1 << col
    return BitVector(n, z)


class SpanBasis:
    """Incremental echelon basis over GF(2) with optional tracked payloads.

    Each stored vector carries a payload bitset that is XOR-combined along
    with it, which lets a caller map a combination of stored vectors to the
    same combination of associated values (e.g. oracle replies).
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self._basis: dict[int, tuple[int, int]] = {}

    def __len__(self) -> int:
        return len(self._basis)

    def _reduce(self, v: int, payload: int = 0) -> tuple[int, int]:
        # stored vectors have distinct lowest bits, so a nonzero remainder
        # whose lowest bit is not a pivot lies outside the span
        while v:
            entry = self._basis.get((v & -v).bit_length() - 1)
            if entry is None:
                break
            v ^= entry[0]
            payload ^= entry[1]
        return v, payload

    def contains(self, v: int) -> bool:
        return self._reduce(v)[0] == 0

    def express(self, v: int) -> int | None:
        """Payload combination for ``v``, or ``None`` when ``v`` is outside the span."""
        rest, payload = self._reduce(v)
        return payload if rest == 0 else None

    def add(self, v: int, payload: int = 0) -> bool:
        """Insert ``v``; returns False when it was already in the span."""
        rest, payload = self._reduce(v, payload)
        if rest == 0:
            return False
        self._basis[(rest & -rest).bit_length() - 1] = (rest, payload)
        return True
