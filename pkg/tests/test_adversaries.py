import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import vec
from usosink.adversaries import (
    GeneralAdversary,
    GoodPathsAdversary,
    general_adversary_answer,
    goodpaths_alternative,
    goodpaths_answer,
    goodpaths_audit,
    uncertainty_audit,
    uncertainty_witness,
)
from usosink.gf2 import BitMatrix, BitVector, mat_vec_mul, solve, span_contains
from usosink.harness import goodpaths_uncertain
from usosink.influence import Branching, closure_of_branching, is_legal_dig, is_realizable_dig


class TestGeneralAdversary:
    def test_first_query_triggers_modification(self):
        st_ = GeneralAdversary(2, vec("11"))
        reply = general_adversary_answer(st_, vec("11"))
        # identity would have answered y itself
        assert reply != vec("11")
        assert len(st_.changes) == 1
        assert not span_contains(st_.replies, st_.y)
        assert is_legal_dig(st_.matrix)
        assert mat_vec_mul(st_.matrix, vec("11")) == reply

    def test_dependent_query(self):
        st_ = GeneralAdversary(3, vec("111"))
        first = st_.query(vec("110"))
        again = st_.query(vec("110"))
        assert first == again
        assert st_.k == 1 and st_.query_count == 2

    def test_fresh_state_audit(self):
        assert uncertainty_audit(GeneralAdversary(4, vec("1000")))

    def test_audit_precondition(self):
        st_ = GeneralAdversary(3, vec("111"))
        st_.query(vec("100"))
        st_.query(vec("010"))
        with pytest.raises(ValueError):
            uncertainty_witness(st_)

    def test_witness_does_not_touch_state(self):
        st_ = GeneralAdversary(4, vec("1111"))
        st_.query(vec("1100"))
        before = (st_.matrix, list(st_.transcript))
        w = uncertainty_witness(st_)
        assert (st_.matrix, st_.transcript) == before
        assert w.ok
        assert w.alternative != w.current

    def test_frozen_after_budget(self):
        st_ = GeneralAdversary(3, vec("111"))
        for q in ("100", "010"):
            st_.query(vec(q))
        assert st_.frozen
        m = st_.matrix
        st_.query(vec("001"))
        assert st_.matrix == m

    def test_wrong_target_length(self):
        with pytest.raises(ValueError):
            GeneralAdversary(3, vec("11"))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 8), st.data())
    def test_uncertainty_after_every_query(self, n, data):
        y = BitVector(n, data.draw(st.integers(1, (1 << n) - 1)))
        adv = GeneralAdversary(n, y)
        queries = data.draw(st.lists(st.integers(1, (1 << n) - 1), min_size=n, max_size=3 * n))
        for q in queries:
            adv.query(BitVector(n, q))
            if adv.k < n - 1:
                w = uncertainty_witness(adv)
                assert w.ok, w
            # replies always come from the current matrix
            assert all(mat_vec_mul(adv.matrix, x) == r for x, r in adv.transcript)
            assert is_legal_dig(adv.matrix)


class TestGoodPaths:
    def test_pairing(self):
        st_ = GoodPathsAdversary(4)
        reply = goodpaths_answer(st_, vec("1100"))
        expected_m = closure_of_branching(Branching((0, 1, 0, 0))).adj
        assert st_.matrix == expected_m
        assert reply == mat_vec_mul(expected_m, vec("1100"))
        assert [p.vertices for p in st_.paths] == [[1, 2], [3], [4]]
        assert all(p.good for p in st_.paths)

    def test_even_query_changes_nothing(self):
        st_ = GoodPathsAdversary(4)
        st_.query(vec("1100"))
        m = st_.matrix
        reply = st_.query(vec("1100"))
        assert st_.matrix == m and reply == mat_vec_mul(m, vec("1100"))

    def test_single_odd_path(self):
        st_ = GoodPathsAdversary(2)
        reply = st_.query(vec("10"))
        assert st_.matrix == BitMatrix.identity(2)
        assert reply == vec("10")
        assert [p.good for p in st_.paths] == [False, True]

    def test_fresh_audit(self):
        st_ = GoodPathsAdversary(8)
        assert goodpaths_audit(st_) and st_.good_count == 8

    def test_corrupted_reply_detected(self):
        st_ = GoodPathsAdversary(8)
        st_.query(vec("11110000"))
        st_.query(vec("10101010"))
        q, r = st_.transcript[1]
        st_.transcript[1] = (q, r ^ BitVector.unit(8, 3))
        assert not goodpaths_audit(st_)

    def test_alternative_differs(self):
        st_ = GoodPathsAdversary(16)
        st_.query(vec("1111000011110000"))
        alt = goodpaths_alternative(st_)
        assert alt is not None and is_realizable_dig(alt)
        assert all(mat_vec_mul(alt, q) == r for q, r in st_.transcript)
        assert solve(alt, st_.y) != solve(st_.matrix, st_.y)

    @pytest.mark.parametrize("n", [4, 16, 64])
    def test_good_paths_halve_at_most(self, n):
        st_ = GoodPathsAdversary(n)
        rng_bits = [(0x9E3779B97F4A7C15 * (i + 1)) % (1 << n) for i in range(int(math.log2(n)))]
        for bits in rng_bits:
            st_.query(BitVector(n, bits))
            assert goodpaths_audit(st_)
        hist = st_.good_history
        assert all(b >= a // 2 for a, b in zip(hist, hist[1:]))
        # after fewer than log2 n queries the answer is still open
        st2 = GoodPathsAdversary(n)
        for bits in rng_bits[:-1]:
            st2.query(BitVector(n, bits))
            assert goodpaths_uncertain(st2)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from([4, 8, 16, 32]), st.data())
    def test_audit_holds_for_any_queries(self, n, data):
        st_ = GoodPathsAdversary(n)
        queries = data.draw(st.lists(st.integers(0, (1 << n) - 1), max_size=12))
        for i, q in enumerate(queries):
            st_.query(BitVector(n, q))
            assert goodpaths_audit(st_)
            if i + 1 < int(math.log2(n)):
                assert goodpaths_uncertain(st_)
