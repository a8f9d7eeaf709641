import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import mat, vec
from usosink.gf2 import (
    BitMatrix,
    BitVector,
    InconsistentSystemError,
    SingularMatrixError,
    SpanBasis,
    ceil_log2,
    free_variables,
    mat_vec_mul,
    rank,
    solve,
    solve_underdetermined,
    span_contains,
)


def brute_mul(m: BitMatrix, x: BitVector) -> BitVector:
    # entry by entry dot products, independent of the column-XOR implementation
    out = [sum(m[i, j] * x[j] for j in range(1, m.ncols + 1)) % 2 for i in range(1, m.nrows + 1)]
    return BitVector.from_list(out)


@st.composite
def matrices(draw, min_n=1, max_n=7, square=True):
    n = draw(st.integers(min_n, max_n))
    k = n if square else draw(st.integers(0, max_n))
    rows = draw(st.lists(st.integers(0, (1 << n) - 1), min_size=k, max_size=k))
    return BitMatrix(k, n, tuple(rows))


class TestBitVector:
    def test_string_order_is_index_one_first(self):
        v = vec("100")
        assert v[1] == 1 and v[3] == 0
        assert v.bits == 1
        assert v.support() == [1]

    def test_round_trips(self):
        v = vec("0110101")
        assert BitVector.from_str(v.to_str()) == v
        assert BitVector.from_list(v.to_list()) == v
        assert BitVector.from_indices(7, v.support()) == v

    def test_unit_and_ones(self):
        assert BitVector.unit(4, 2).to_str() == "0100"
        assert BitVector.ones(3).weight == 3
        with pytest.raises(IndexError):
            BitVector.unit(3, 4)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            vec("10") ^ vec("101")

    def test_dot(self):
        assert vec("110").dot(vec("011")) == 1
        assert vec("110").dot(vec("111")) == 0


class TestMatVecMul:
    def test_identity(self):
        assert mat_vec_mul(BitMatrix.identity(3), vec("101")) == vec("101")

    def test_lower_triangular(self):
        assert mat_vec_mul(mat("10", "11"), vec("11")) == vec("10")

    def test_zero_vector(self):
        assert mat_vec_mul(mat("111", "011", "101"), vec("000")).is_zero()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mat_vec_mul(BitMatrix.identity(3), vec("10"))

    @given(matrices(square=False), st.data())
    def test_matches_entrywise_products(self, m, data):
        x = BitVector(m.ncols, data.draw(st.integers(0, (1 << m.ncols) - 1)))
        assert mat_vec_mul(m, x) == brute_mul(m, x)

    @given(matrices(square=False), st.data())
    def test_matches_numpy(self, m, data):
        x = BitVector(m.ncols, data.draw(st.integers(0, (1 << m.ncols) - 1)))
        expected = (m.to_array().astype(int) @ np.array(x.to_list())) % 2 if m.nrows else np.zeros(0)
        assert mat_vec_mul(m, x).to_list() == [int(e) for e in expected]

    @given(matrices(), matrices())
    def test_matrix_product_associates(self, a, b):
        if a.ncols != b.nrows:
            return
        for bits in range(1 << b.ncols):
            x = BitVector(b.ncols, bits)
            assert (a @ b) @ x == a @ (b @ x)


class TestSolve:
    def test_identity(self):
        assert solve(BitMatrix.identity(3), vec("011")) == vec("011")

    def test_lower_triangular(self):
        m = mat("10", "11")
        x = solve(m, vec("10"))
        assert x == vec("11")
        assert brute_mul(m, x) == vec("10")

    def test_singular(self):
        with pytest.raises(SingularMatrixError, match="singular"):
            solve(mat("11", "11"), vec("10"))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            solve(BitMatrix.identity(3), vec("10"))

    @given(matrices(), st.data())
    def test_solution_satisfies_system(self, m, data):
        y = BitVector(m.nrows, data.draw(st.integers(0, (1 << m.nrows) - 1)))
        full = rank(m) == m.nrows
        try:
            x = solve(m, y)
        except SingularMatrixError:
            assert not full
            return
        assert full
        assert brute_mul(m, x) == y

    def test_rank_counts_invertible_2x2(self):
        # GL(2,2) has 6 elements
        count = sum(rank(BitMatrix(2, 2, rows)) == 2 for rows in itertools.product(range(4), repeat=2))
        assert count == 6


class TestSpan:
    def test_empty_span_contains_zero(self):
        assert span_contains([], vec("000"))

    def test_outside(self):
        assert not span_contains([vec("100")], vec("111"))

    def test_combination(self):
        assert span_contains([vec("110"), vec("011")], vec("101"))

    @given(st.integers(1, 6), st.data())
    def test_matches_brute_force(self, n, data):
        vs = data.draw(st.lists(st.integers(0, (1 << n) - 1), max_size=5))
        y = data.draw(st.integers(0, (1 << n) - 1))
        combos = set()
        for pick in itertools.product((0, 1), repeat=len(vs)):
            acc = 0
            for p, v in zip(pick, vs):
                if p:
                    acc ^= v
            combos.add(acc)
        assert span_contains([BitVector(n, v) for v in vs], BitVector(n, y)) == (y in combos)

    @given(st.integers(1, 6), st.data())
    def test_span_basis_express_reconstructs(self, n, data):
        vs = data.draw(st.lists(st.integers(0, (1 << n) - 1), max_size=6))
        basis = SpanBasis(n)
        for v in vs:
            basis.add(v, v)  # payload = the vector itself
        y = data.draw(st.integers(0, (1 << n) - 1))
        combo = basis.express(y)
        assert (combo is not None) == basis.contains(y)
        if combo is not None:
            assert combo == y


class TestUnderdetermined:
    def test_no_rows_all_free(self):
        assert free_variables(BitMatrix.zeros(0, 3)) == {1, 2, 3}

    def test_single_row(self):
        assert free_variables(mat("100")) == {2, 3}

    def test_full_rank(self):
        assert free_variables(BitMatrix.identity(4)) == set()

    def test_single_row_zeroed(self):
        z = solve_underdetermined(mat("100"), vec("1"), {2, 3})
        assert z == vec("100")

    def test_two_rows(self):
        z = solve_underdetermined(mat("100", "010"), vec("01"), {3})
        assert z == vec("010")

    def test_identity(self):
        assert solve_underdetermined(BitMatrix.identity(3), vec("010"), set()) == vec("010")

    def test_inconsistent(self):
        with pytest.raises(InconsistentSystemError):
            solve_underdetermined(mat("110", "110"), vec("01"), {3})

    @given(matrices(square=False, max_n=6), st.data())
    def test_zeroing_free_variables_gives_solution(self, x, data):
        if x.nrows == 0:
            return
        b = BitVector(x.nrows, data.draw(st.integers(0, (1 << x.nrows) - 1)))
        free = free_variables(x)
        try:
            z = solve_underdetermined(x, b, free)
        except InconsistentSystemError:
            assert not span_contains([x.col(j) for j in range(1, x.ncols + 1)], b)
            return
        assert brute_mul(x, z) == b
        assert all(z[i] == 0 for i in free)


@pytest.mark.parametrize("n,expected", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (1024, 10), (1025, 11)])
def test_ceil_log2(n, expected):
    assert ceil_log2(n) == expected
