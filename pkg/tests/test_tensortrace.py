"""Tests for tensor words, defect formulas, and the dense Kronecker oracle."""

import random
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from centcert.blockop import AlgebraElement, TracialAlgebra, build_pqv_independent
from centcert.exact import ComplexExact, ExactScalar, GaussianRational
from centcert.tensortrace import (
    TensorSum,
    TensorWord,
    centrality_bound,
    centrality_defect,
    centrality_defect_words,
    dense_oracle,
    displacement,
    elementary,
    noncommutation_defect,
    noncommutation_defect_words,
    permute,
)


def toy_algebra():
    return TracialAlgebra([(1, Fraction(1, 4)), (2, Fraction(3, 4))])


def random_element(alg, rng):
    mats = []
    for size, _ in alg.blocks:
        mat = {}
        for i in range(size):
            for j in range(size):
                if rng.random() < 0.6:
                    mat[(i, j)] = GaussianRational(
                        Fraction(rng.randint(-3, 3), rng.randint(1, 4)),
                        Fraction(rng.randint(-3, 3), rng.randint(1, 4)),
                    )
        mats.append(mat)
    return AlgebraElement(alg, mats)


def random_sum(alg, indices, rng, max_words=3):
    words = []
    for _ in range(rng.randint(1, max_words)):
        factors = {}
        for t in indices:
            if rng.random() < 0.7:
                factors[t] = random_element(alg, rng)
        coeff = ExactScalar.from_rational(
            Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        )
        words.append((coeff, TensorWord(alg, indices, factors)))
    return TensorSum(alg, indices, words)


class TestWords:
    def test_elementary_trace_factorizes(self):
        alg = toy_algebra()
        a = AlgebraElement(alg, [{(0, 0): GaussianRational(1, 0)}, {}])
        w = elementary(alg, range(5), a, {0, 2, 4})
        # tau(a) = 1/4, three coordinates
        assert w.trace() == ComplexExact.from_real(
            ExactScalar.from_rational(Fraction(1, 64))
        )

    def test_empty_support_is_identity(self):
        alg = toy_algebra()
        w = elementary(alg, range(3), AlgebraElement.identity(alg), {1})
        assert not w.factors
        assert w.trace() == ComplexExact.one()

    def test_r_outside_t_rejected(self):
        alg = toy_algebra()
        with pytest.raises(ValueError):
            elementary(alg, range(3), AlgebraElement.identity(alg), {5})

    def test_permute_relabels(self):
        alg = toy_algebra()
        a = AlgebraElement(alg, [{(0, 0): GaussianRational(1, 0)}, {}])
        w = elementary(alg, range(3), a, {0})
        sigma = {0: 1, 1: 2, 2: 0}
        moved = permute(w, sigma)
        assert set(moved.factors) == {1}
        assert permute(w, {0: 0, 1: 1, 2: 2}) == w
        with pytest.raises(ValueError):
            permute(w, {0: 1, 1: 1, 2: 2})

    def test_displacement(self):
        sigma = {0: 1, 1: 2, 2: 0, 3: 3}
        assert displacement({0, 1}, sigma) == 1
        assert displacement({3}, sigma) == 0
        assert displacement({0, 1, 2}, sigma) == 0


class TestSums:
    def test_like_words_merge(self):
        alg = toy_algebra()
        w = elementary(alg, range(2), AlgebraElement.identity(alg), set())
        s = TensorSum(alg, range(2), [(ExactScalar.one(), w), (ExactScalar.one(), w)])
        assert len(s.terms) == 1
        assert s.trace() == ComplexExact.from_real(ExactScalar.from_rational(2))
        z = s - s
        assert z.is_zero()

    def test_trace_linearity(self):
        rng = random.Random(7)
        alg = toy_algebra()
        x = random_sum(alg, frozenset(range(2)), rng)
        y = random_sum(alg, frozenset(range(2)), rng)
        assert (x + y).trace() == x.trace() + y.trace()

    def test_permute_is_trace_preserving_automorphism(self):
        rng = random.Random(11)
        alg = toy_algebra()
        idx = frozenset(range(3))
        sigma = {0: 2, 1: 0, 2: 1}
        for _ in range(10):
            x = random_sum(alg, idx, rng)
            y = random_sum(alg, idx, rng)
            px = TensorSum(alg, idx, [(c, permute(w, sigma)) for c, w in x.terms])
            py = TensorSum(alg, idx, [(c, permute(w, sigma)) for c, w in y.terms])
            assert (px * py).trace() == (x * y).trace()

    def test_norm_squared_nonnegative(self):
        rng = random.Random(3)
        alg = toy_algebra()
        for _ in range(10):
            x = random_sum(alg, frozenset(range(2)), rng)
            assert x.two_norm_squared().sign() >= 0


class TestDefectFormulas:
    def test_theorem_b_values(self):
        # tau(p) = 2^(-1/s), tau(pq) = 2^(-2/s): value 2(1/2 - 1/4) = 1/2
        for s in (1, 2, 5, 50):
            tau_p = ExactScalar.pow2(mpq(-1, s))
            tau_pq = ExactScalar.pow2(mpq(-2, s))
            assert noncommutation_defect(tau_p, tau_pq, s) == ExactScalar.from_rational(
                Fraction(1, 2)
            )

    def test_degenerate_and_rational_cases(self):
        t = ExactScalar.from_rational(Fraction(3, 5))
        assert noncommutation_defect(t, t, 3).is_zero()
        got = noncommutation_defect(
            ExactScalar.from_rational(Fraction(3, 5)),
            ExactScalar.from_rational(Fraction(1, 5)),
            2,
        )
        assert got == ExactScalar.from_rational(Fraction(16, 25))

    def test_precondition_enforced(self):
        one = ExactScalar.one()
        with pytest.raises(ValueError):
            noncommutation_defect(ExactScalar.from_rational(Fraction(1, 2)), one, 2)

    def test_centrality_closed_form_example(self):
        # s=4, one moved coordinate, t = 2^(-1/4)
        t4 = ExactScalar.pow2(mpq(-1, 4))
        value = centrality_defect(t4, t4 * t4, 4, 1)
        expected = (ExactScalar.pow2(mpq(-1, 1)) - ExactScalar.pow2(mpq(-7, 4))).scale(2)
        assert value == expected

    def test_moved_zero_vanishes(self):
        t = ExactScalar.pow2(mpq(-1, 3))
        assert centrality_defect(t, t * t, 5, 0).is_zero()

    @given(st.integers(1, 12), st.integers(0, 12), st.integers(2, 30))
    @settings(max_examples=60)
    def test_bounded_by_coarse_estimate(self, s, moved, m):
        if moved > s:
            moved = s
        t = ExactScalar.pow2(mpq(-1, m))
        tau_pq = t * t
        value = centrality_defect(t, tau_pq, s, moved)
        bound = centrality_bound(tau_pq, moved)
        assert value.compare(bound) <= 0


class TestWordFormulaAgreement:
    @pytest.mark.parametrize("m,s", [(1, 1), (2, 3), (4, 4)])
    def test_noncommutation_via_words(self, m, s):
        pqv = build_pqv_independent(m)
        indices = frozenset(range(s))
        by_words = noncommutation_defect_words(pqv, indices, indices)
        closed = noncommutation_defect(pqv.tau_p, pqv.tau_pq, s)
        assert by_words == closed

    @pytest.mark.parametrize("m,s,shift", [(2, 4, 1), (3, 5, 2), (1, 3, 0)])
    def test_centrality_via_words(self, m, s, shift):
        pqv = build_pqv_independent(m)
        indices = frozenset(range(s + shift))
        S = frozenset(range(s))
        sigma = {t: (t + shift) % (s + shift) for t in indices}
        moved = displacement(S, sigma)
        by_words = centrality_defect_words(pqv, indices, S, sigma)
        closed = centrality_defect(pqv.tau_p, pqv.tau_pq, s, moved)
        assert by_words == closed


class TestDenseOracle:
    def test_hand_checked_single_word(self):
        alg = TracialAlgebra([(2, 1)])
        e12 = AlgebraElement.matrix_unit(alg, 0, 0, 1)
        w = elementary(alg, range(2), e12, {0, 1})
        tr, nsq = dense_oracle(TensorSum.from_word(w))
        assert tr == ComplexExact.zero()
        assert nsq == ExactScalar.from_rational(Fraction(1, 4))

    def test_identity_word(self):
        alg = toy_algebra()
        w = elementary(alg, range(2), AlgebraElement.identity(alg), set())
        tr, nsq = dense_oracle(TensorSum.from_word(w))
        assert tr == ComplexExact.one()
        assert nsq == ExactScalar.one()

    def test_matches_factorized_on_random_sums(self):
        rng = random.Random(2024)
        alg = toy_algebra()
        for trial in range(60):
            idx = frozenset(range(rng.randint(1, 3)))
            x = random_sum(alg, idx, rng)
            tr, nsq = dense_oracle(x)
            assert tr == x.trace(), f"trace mismatch on trial {trial}"
            assert nsq == x.two_norm_squared(), f"norm mismatch on trial {trial}"

    def test_centrality_value_through_oracle(self):
        pqv = build_pqv_independent(2)
        indices = frozenset(range(3))
        S = frozenset(range(2))
        sigma = {0: 1, 1: 2, 2: 0}
        word = elementary(pqv.algebra, indices, pqv.v, S)
        diff = TensorSum.from_word(permute(word, sigma)) - TensorSum.from_word(word)
        _, nsq = dense_oracle(diff)
        moved = displacement(S, sigma)
        assert nsq == centrality_defect(pqv.tau_p, pqv.tau_pq, 2, moved)

    def test_index_cap(self):
        alg = toy_algebra()
        w = elementary(alg, range(4), AlgebraElement.identity(alg), set())
        with pytest.raises(ValueError):
            dense_oracle(TensorSum.from_word(w))
