"""Tests for the block-algebra calculus and the p/q/v constructions."""

from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from centcert.blockop import (
    AlgebraElement,
    TracialAlgebra,
    algebra_from_wedderburn,
    build_pqv_alternating,
    build_pqv_independent,
    certified_floor_pow2_scale,
    pqv_trace_bounds,
    trace,
    trace_real,
    two_norm,
    two_norm_squared,
)
from centcert.exact import ComplexExact, ExactScalar, GaussianRational
from centcert.repalg import alternating_wedderburn, convex_trace


def toy_algebra():
    return TracialAlgebra([(1, Fraction(1, 2)), (2, Fraction(1, 2))])


entries = st.builds(
    GaussianRational,
    st.fractions(min_value=-3, max_value=3, max_denominator=7),
    st.fractions(min_value=-3, max_value=3, max_denominator=7),
)


@st.composite
def toy_elements(draw):
    alg = toy_algebra()
    mats = []
    for size, _ in alg.blocks:
        mat = {}
        for i in range(size):
            for j in range(size):
                if draw(st.booleans()):
                    mat[(i, j)] = draw(entries)
        mats.append(mat)
    return AlgebraElement(alg, mats)


class TestAlgebraBasics:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            TracialAlgebra([(1, Fraction(1, 2)), (2, Fraction(1, 3))])
        with pytest.raises(ValueError):
            TracialAlgebra([(1, Fraction(3, 2)), (2, Fraction(-1, 2))])

    def test_irrational_weights_allowed(self):
        t = ExactScalar.pow2(mpq(-1, 2))
        one = ExactScalar.one()
        alg = TracialAlgebra([(1, t), (1, one - t)])
        assert trace_real(alg, AlgebraElement.identity(alg)) == one

    def test_entry_bounds_checked(self):
        alg = toy_algebra()
        with pytest.raises(ValueError):
            AlgebraElement(alg, [{(1, 0): GaussianRational(1, 0)}, {}])

    def test_trace_examples(self):
        alg = toy_algebra()
        ident = AlgebraElement.identity(alg)
        assert trace_real(alg, ident) == ExactScalar.one()
        a = AlgebraElement(alg, [{(0, 0): GaussianRational(1, 0)},
                                 {(0, 0): GaussianRational(1, 0)}])
        assert trace_real(alg, a) == ExactScalar.from_rational(Fraction(3, 4))

    def test_two_norm_of_matrix_unit(self):
        alg = TracialAlgebra([(2, 1)])
        e12 = AlgebraElement.matrix_unit(alg, 0, 0, 1)
        assert two_norm_squared(alg, e12) == ExactScalar.from_rational(Fraction(1, 2))
        assert two_norm(alg, e12) == ExactScalar.pow2(mpq(-1, 2))

    def test_two_norm_of_zero_and_unitary(self):
        alg = toy_algebra()
        assert two_norm(alg, AlgebraElement.zero(alg)).is_zero()
        assert two_norm(alg, AlgebraElement.identity(alg)) == ExactScalar.one()


class TestAlgebraProperties:
    @given(toy_elements(), toy_elements())
    @settings(max_examples=50)
    def test_trace_is_tracial(self, a, b):
        alg = a.algebra
        assert trace(alg, a * b) == trace(alg, b * a)

    @given(toy_elements())
    @settings(max_examples=50)
    def test_adjoint_involution_and_positivity(self, a):
        alg = a.algebra
        assert a.adjoint().adjoint() == a
        nsq = two_norm_squared(alg, a)
        assert nsq.sign() >= 0
        assert trace(alg, a.adjoint() * a) == ComplexExact.from_real(nsq)

    @given(toy_elements(), toy_elements())
    @settings(max_examples=40)
    def test_cauchy_schwarz_via_squares(self, a, b):
        alg = a.algebra
        inner = trace(alg, b.adjoint() * a)
        lhs = inner.abs2()
        rhs = two_norm_squared(alg, a) * two_norm_squared(alg, b)
        assert lhs.compare(rhs) <= 0

    @given(toy_elements(), toy_elements(), toy_elements())
    @settings(max_examples=30)
    def test_ring_axioms(self, a, b, c):
        assert (a + b) * c == a * c + b * c
        assert (a * b) * c == a * (b * c)
        assert (a * b).adjoint() == b.adjoint() * a.adjoint()


class TestCertifiedFloor:
    def test_rational_cases(self):
        # 2^-1 * k exactly representable
        assert certified_floor_pow2_scale(1, 7) == 3
        assert certified_floor_pow2_scale(2, 7) == 1
        assert certified_floor_pow2_scale(10, 7) == 0

    @given(st.integers(1, 400), st.integers(2, 64), st.integers(1, 6))
    @settings(max_examples=120)
    def test_matches_high_precision_float(self, k, b, a):
        import mpmath

        got = certified_floor_pow2_scale(Fraction(a, b), k)
        with mpmath.workprec(200):
            want = int(mpmath.floor(k * mpmath.power(2, -mpmath.mpf(a) / b)))
        assert got == want

    def test_floor_inequality_postcondition(self):
        for k in (7, 40, 215):
            d = certified_floor_pow2_scale(Fraction(1, 38), k)
            # d^38 * 2 <= k^38 < (d+1)^38 * 2
            assert d ** 38 * 2 <= k ** 38 < (d + 1) ** 38 * 2


class TestWedderburnBridge:
    def test_algebra_matches_weights(self):
        W = alternating_wedderburn(5)
        alg = algebra_from_wedderburn(W)
        assert alg.sizes == (1, 3, 3, 4, 5)
        assert trace_real(alg, AlgebraElement.identity(alg)) == ExactScalar.one()

    def test_trivial_block_unit_trace(self):
        W = alternating_wedderburn(5)
        alg = algebra_from_wedderburn(W)
        f = AlgebraElement.matrix_unit(alg, 0, 0, 0)
        assert trace_real(alg, f) == ExactScalar.from_rational(Fraction(1, 60))

    @given(st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=5),
                    min_size=5, max_size=5))
    @settings(max_examples=25)
    def test_convex_trace_agrees_with_block_trace(self, diag):
        # same diagonal data fed through repalg's convex sum and the
        # matrix trace must agree
        W = alternating_wedderburn(5)
        alg = algebra_from_wedderburn(W)
        trivial, *rest = diag
        mats = [{(0, 0): GaussianRational(trivial, 0)}]
        for (k, _), value in zip(W.blocks, rest):
            mats.append({(i, i): GaussianRational(value, 0) for i in range(k)})
        elem = AlgebraElement(alg, mats)
        assert trace_real(alg, elem) == ExactScalar.from_rational(
            convex_trace(W, trivial, rest)
        )


class TestAlternatingPqv:
    @pytest.mark.parametrize("n", [7, 9])
    def test_identities_and_traces(self, n):
        W = alternating_wedderburn(n)
        data = build_pqv_alternating(W, Fraction(1, 20), 40)
        alg = data.algebra
        # identities re-checked here against the returned elements
        assert data.v.adjoint() * data.v == data.p
        assert data.v * data.v.adjoint() == data.q
        assert data.v * data.p * data.q == data.p * data.q
        assert trace_real(alg, data.p) == data.tau_p
        assert trace_real(alg, data.q) == data.tau_p
        assert trace_real(alg, data.v) == data.tau_pq

    def test_tau_p_dominates_tau_pq(self):
        W = alternating_wedderburn(7)
        data = build_pqv_alternating(W, Fraction(1, 20), 40)
        assert data.tau_p.compare(data.tau_pq) >= 0

    def test_trace_upper_bound_from_floor(self):
        W = alternating_wedderburn(9)
        data = build_pqv_alternating(W, Fraction(1, 20), 40)
        x = ExactScalar.pow2(mpq(-1, 38))
        assert data.tau_p.compare(x) <= 0
        assert data.tau_pq.compare(x.scale(2) - ExactScalar.one()) <= 0

    def test_infeasible_block_reports_guidance(self):
        W = alternating_wedderburn(5)
        # tiny (1-delta)|T| forces x near 1/2 and 2d-k < 0 on odd blocks
        with pytest.raises(ValueError, match="increase"):
            build_pqv_alternating(W, Fraction(1, 2), 2)


class TestTraceBounds:
    def test_bounds_bracket_enumerated_values(self):
        for n in (7, 9, 12):
            W = alternating_wedderburn(n)
            data = build_pqv_alternating(W, Fraction(1, 20), 40)
            bounds = pqv_trace_bounds(n, Fraction(1, 20), 40)
            assert bounds.tau_p_lower.compare(data.tau_p) <= 0
            assert bounds.tau_p_upper.compare(data.tau_p) >= 0
            assert bounds.tau_pq_lower.compare(data.tau_pq) <= 0
            assert bounds.tau_pq_upper.compare(data.tau_pq) >= 0

    def test_large_n_formula_evaluation(self):
        bounds = pqv_trace_bounds(2000, Fraction(1, 200), 400)
        x = ExactScalar.pow2(mpq(-1, 398))
        gap = x - bounds.tau_p_lower
        # lower bound sits within 1/1999 + 1/|A_2000| of x
        import math

        slack = Fraction(1, 1999) + Fraction(2, math.factorial(2000))
        assert gap.sign() >= 0
        assert (ExactScalar.from_rational(slack) - gap).sign() >= 0

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            pqv_trace_bounds(5, Fraction(1, 20), 40)


class TestIndependentPqv:
    @pytest.mark.parametrize("m", [1, 2, 5, 50])
    def test_construction(self, m):
        data = build_pqv_independent(m)
        t = ExactScalar.pow2(mpq(-1, m))
        assert data.tau_p == t
        assert data.tau_pq == t * t
        alg = data.algebra
        assert trace(alg, data.p * data.q) == trace(alg, data.p) * trace(alg, data.q)
        assert trace_real(alg, data.v) == data.tau_pq

    def test_m1_weights(self):
        data = build_pqv_independent(1)
        weights = [w for _, w in data.algebra.blocks]
        assert weights[0] == ExactScalar.from_rational(Fraction(1, 4))
        assert weights[1] == ExactScalar.from_rational(Fraction(1, 2))
        assert weights[2] == ExactScalar.from_rational(Fraction(1, 4))

    def test_m2_trace_is_dyadic(self):
        data = build_pqv_independent(2)
        assert data.tau_p == ExactScalar.pow2(mpq(-1, 2))
        assert data.tau_pq == ExactScalar.from_rational(Fraction(1, 2))

    @pytest.mark.parametrize("m", [1, 3, 8])
    def test_complement_atoms_share_a_trace(self, m):
        data = build_pqv_independent(m)
        alg = data.algebra
        pq = data.p * data.q
        left = trace(alg, data.p - pq)
        right = trace(alg, data.q - pq)
        assert left == right
