"""Matoušek-type USOs, query oracles and brute-force property checks.

Vertices of the n-cube are :class:`BitVector` values; in the vectorised
checks a vertex is the integer ``bits`` of that vector and an orientation
is a table ``outmaps[v]`` over all ``2**n`` vertices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Union

import numpy as np

from .gf2 import BitMatrix, BitVector, mat_vec_mul
from .influence import Branching, closure_rows, is_legal_dig

CHECK_LIMIT = 12
FACE_CHECK_LIMIT = 8


@dataclass(frozen=True)
class MatousekUso:
    """Orientation ``o(v) = M (v xor s)`` for a legal DIG adjacency ``M``."""

    matrix: BitMatrix
    sink: BitVector
    branching: Branching | None = None

    def __post_init__(self) -> None:
        if self.sink.n != self.matrix.nrows:
            raise ValueError("sink length does not match matrix size")
        if self.branching is not None:
            if tuple(closure_rows(self.branching.parents)) != self.matrix.rows:
                raise ValueError("matrix is not the closure of the given branching")
        elif not is_legal_dig(self.matrix):
            raise ValueError("matrix is not a legal dimension influence graph")

    @classmethod
    def from_branching(cls, branching: Branching, sink: BitVector) -> MatousekUso:
        m = BitMatrix(branching.n, branching.n, tuple(closure_rows(branching.parents)))
        return cls(m, sink, branching)

    @property
    def n(self) -> int:
        return self.matrix.nrows

    def outmap(self, v: BitVector) -> BitVector:
        return outmap(self, v)


def outmap(u: MatousekUso, v: BitVector) -> BitVector:
    if v.n != u.n:
        raise ValueError(f"dimension mismatch: cube has dimension {u.n}, vertex length {v.n}")
    return mat_vec_mul(u.matrix, v ^ u.sink)


Orientation = Union[MatousekUso, Callable[[BitVector], BitVector], np.ndarray]


def outmap_table(o: Orientation, n: int) -> np.ndarray:
    """Outmaps of all ``2**n`` vertices as an int64 array indexed by vertex bits."""
    if isinstance(o, np.ndarray):
        if o.shape != (1 << n,):
            raise ValueError("outmap table has the wrong size")
        return o.astype(np.int64)
    if isinstance(o, MatousekUso):
        # o(v) = M s xor M v
        return linear_table(o.matrix) ^ mat_vec_mul(o.matrix, o.sink).bits
    return np.array([o(BitVector(n, v)).bits for v in range(1 << n)], dtype=np.int64)


def linear_table(matrix: BitMatrix) -> np.ndarray:
    """``M v`` for every ``v``, built one column at a time."""
    table = np.zeros(1 << matrix.ncols, dtype=np.int64)
    for j, col in enumerate(matrix.columns):
        half = 1 << j
        table[half : 2 * half] = table[:half] ^ col
    return table


def _check_size(n: int, limit: int) -> None:
    if not 1 <= n <= limit:
        raise ValueError(f"exhaustive check limited to 1 <= n <= {limit}")


def find_orientation_conflict(o: Orientation, n: int) -> tuple[BitVector, int] | None:
    """First ``(v, i)`` with ``o(v)_i == o(v xor e_i)_i``, or None."""
    _check_size(n, CHECK_LIMIT)
    t = outmap_table(o, n)
    v = np.arange(1 << n)
    for i in range(n):
        bad = np.flatnonzero((((t ^ t[v ^ (1 << i)]) >> i) & 1) == 0)
        if bad.size:
            return BitVector(n, int(bad[0])), i + 1
    return None


def check_orientation_consistency(o: Orientation, n: int) -> bool:
    return find_orientation_conflict(o, n) is None


@dataclass(frozen=True)
class Face:
    """Face spanned by ``free`` dimensions; other coordinates fixed as in ``base``."""

    n: int
    free: tuple[int, ...]
    base: BitVector
    sinks: int

    def describe(self) -> dict[str, Any]:
        fixed = {str(i): self.base[i] for i in range(1, self.n + 1) if i not in self.free}
        return {"free": list(self.free), "fixed": fixed, "sinks": self.sinks}


def find_uso_violation(o: Orientation, n: int) -> Face | None:
    """First face (by free-dimension mask, then base) without exactly one sink."""
    _check_size(n, FACE_CHECK_LIMIT)
    if not check_orientation_consistency(o, n):
        raise ValueError("orientation is inconsistent; check edge consistency first")
    t = outmap_table(o, n)
    size = 1 << n
    full = size - 1
    verts = np.arange(size, dtype=np.int64)
    masks = verts[:, None]
    # a vertex is the sink of face (mask, v & ~mask) iff no free edge leaves it
    is_sink = (t[None, :] & masks) == 0
    keys = masks * size + (verts[None, :] & (full ^ masks))
    counts = np.bincount(keys[is_sink], minlength=size * size).reshape(size, size)
    valid = (verts[None, :] & masks) == 0
    bad = np.argwhere(valid & (counts != 1))
    if bad.size == 0:
        return None
    mask, base = (int(x) for x in bad[0])
    free = tuple(i + 1 for i in range(n) if (mask >> i) & 1)
    return Face(n, free, BitVector(n, base), int(counts[mask, base]))


def check_uso(o: Orientation, n: int) -> bool:
    """Every face has exactly one sink (exhaustive over all ``3**n`` faces)."""
    return find_uso_violation(o, n) is None


def find_parallel_violation(o: Orientation, matrix: BitMatrix) -> tuple[BitVector, BitVector] | None:
    """First pair ``(x, y)`` with ``o(x) xor o(y) != M (x xor y)``, or None."""
    n = matrix.nrows
    _check_size(n, FACE_CHECK_LIMIT)
    t = outmap_table(o, n)
    lin = linear_table(matrix)
    v = np.arange(1 << n)
    bad = np.argwhere((t[:, None] ^ t[None, :]) != lin[v[:, None] ^ v[None, :]])
    if bad.size == 0:
        return None
    x, y = (int(a) for a in bad[0])
    return BitVector(n, x), BitVector(n, y)


def check_parallel_law(o: Orientation, matrix: BitMatrix | None = None) -> bool:
    if matrix is None:
        if not isinstance(o, MatousekUso):
            raise TypeError("matrix required unless the orientation is a MatousekUso")
        matrix = o.matrix
    return find_parallel_violation(o, matrix) is None


def is_combed(u: MatousekUso, d: int) -> bool:
    """All dimension-``d`` edges point the same way."""
    if not 1 <= d <= u.n:
        raise IndexError(f"dimension {d} out of range 1..{u.n}")
    return u.matrix.rows[d - 1] == 1 << (d - 1)


@dataclass
class VertexEvalOracle:
    """Answers vertex evaluations and counts every call."""

    orientation: Orientation
    n: int = 0
    query_count: int = 0
    transcript: list[tuple[BitVector, BitVector]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if isinstance(self.orientation, MatousekUso):
            self.n = self.orientation.n
        elif self.n < 1:
            raise ValueError("n is required for a non-Matoušek orientation")
        if isinstance(self.orientation, np.ndarray) and self.orientation.shape != (1 << self.n,):
            raise ValueError("outmap table has the wrong size")

    def query(self, v: BitVector) -> BitVector:
        if v.n != self.n:
            raise ValueError(f"dimension mismatch: expected length {self.n}, got {v.n}")
        o = self.orientation
        if isinstance(o, MatousekUso):
            reply = outmap(o, v)
        elif isinstance(o, np.ndarray):
            reply = BitVector(self.n, int(o[v.bits]))
        else:
            reply = o(v)
        self.query_count += 1
        self.transcript.append((v, reply))
        return reply


@dataclass
class MxyOracle:
    """Hidden ``M`` with public target ``y``; answers ``q -> M q``."""

    matrix: BitMatrix
    y: BitVector
    query_count: int = 0
    transcript: list[tuple[BitVector, BitVector]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.matrix.is_square or self.y.n != self.matrix.nrows:
            raise ValueError("need a square matrix and a matching target")

    @property
    def n(self) -> int:
        return self.matrix.nrows

    def query(self, q: BitVector) -> BitVector:
        reply = mat_vec_mul(self.matrix, q)
        self.query_count += 1
        self.transcript.append((q, reply))
        return reply


# -- instance files -------------------------------------------------------


def instance_to_dict(u: MatousekUso) -> dict[str, Any]:
    data: dict[str, Any] = {"n": u.n, "matrix": u.matrix.to_strs(), "sink": u.sink.to_str()}
    if u.branching is not None:
        data["branching"] = u.branching.to_list()
    return data


def read_instance_fields(data: dict[str, Any]) -> tuple[BitMatrix, BitVector, Branching | None]:
    """Parse an instance dict without checking legality (the verifier needs raw access)."""
    try:
        n = int(data["n"])
        matrix = BitMatrix.from_rows(list(data["matrix"]), ncols=n)
        sink = BitVector.from_str(data["sink"])
    except KeyError as exc:
        raise ValueError(f"instance is missing field {exc}") from None
    if matrix.nrows != n or sink.n != n:
        raise ValueError("instance dimensions do not match n")
    branching = Branching.from_list(data["branching"]) if data.get("branching") is not None else None
    if branching is not None and branching.n != n:
        raise ValueError("branching size does not match n")
    return matrix, sink, branching


def instance_from_dict(data: dict[str, Any]) -> MatousekUso:
    matrix, sink, branching = read_instance_fields(data)
    return MatousekUso(matrix, sink, branching)


def dump_instance(u: MatousekUso) -> str:
    return json.dumps(instance_to_dict(u), indent=2) + "\n"


def save_instance(u: MatousekUso, path: str | Path) -> None:
    Path(path).write_text(dump_instance(u))


def load_instance(path: str | Path) -> MatousekUso:
    return instance_from_dict(json.loads(Path(path).read_text()))
