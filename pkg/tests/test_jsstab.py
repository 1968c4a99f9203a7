"""Rectangle calculus, witness search, and stability certificates."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from centcert.exact import ExactScalar
from centcert.groups import SearchExhausted, translation_action
from centcert import jsstab as js
from centcert.jsstab import (
    MAX_DNF_TERMS,
    MAX_IE_TERMS,
    RectangleEvent,
    WreathModel,
    base_event,
    build_witness,
    choose_eps_js,
    exact_measure,
    mc_estimate,
    nu_equivariance,
    nu_good_set,
    nu_sym_diff_shift,
    nu_sym_diff_shift_closed,
    nu_tzero_sym_diff,
    omega_trivial_event,
    pullback_tzero,
    stability_report,
    standard_model,
    tallies_csv,
)

ONE = ExactScalar.one()
HALF = ExactScalar.from_rational(Fraction(1, 2))


@pytest.fixture(scope="module")
def model():
    return standard_model(3)


@pytest.fixture(scope="module")
def witness(model):
    return build_witness(model)


class TestEpsChoice:
    def test_three_elements(self):
        eps = choose_eps_js(3)
        assert eps.literal == Fraction(1, 6)
        assert eps.safe == Fraction(1, 11)

    def test_singleton(self):
        assert choose_eps_js(1) == (Fraction(1), Fraction(1))

    def test_four_elements(self):
        assert choose_eps_js(4).literal == Fraction(1, 8)

    @pytest.mark.parametrize("f_size", [2, 3, 4, 7, 25])
    def test_minimality(self, f_size):
        c, d = f_size - 1, f_size
        for eps, factor in [(choose_eps_js(f_size).literal, 8), (choose_eps_js(f_size).safe, 64)]:
            b = eps.denominator
            assert d**b > factor * c**b
            if b > 1:
                assert d ** (b - 1) <= factor * c ** (b - 1)

    def test_safe_below_literal(self):
        for f_size in range(2, 12):
            eps = choose_eps_js(f_size)
            assert eps.safe < eps.literal

    def test_rejects_empty_family(self):
        with pytest.raises(ValueError):
            choose_eps_js(0)


class TestModel:
    def test_standard_family(self, model):
        gs = [f.g for f in model.F]
        assert gs == [1, -1, 0]
        assert model.F[2].htilde == ((0, 1),)
        assert sorted(model.W) == [0]
        assert sorted(model.forbidden_lines()) == [-1, 0, 1]

    def test_twist_normalization(self):
        m = WreathModel(F=[({0: 0, 5: 3, 2: -1}, 0)], h=1)
        assert m.F[0].htilde == ((2, -1), (5, 3))
        assert m.F[0].support == {2, 5}
        assert m.F[0].twist(5) == 3
        assert m.F[0].twist(7) == 0

    def test_twist_reduced_mod_order(self):
        m = WreathModel(F=[({0: 2, 1: 3}, 0)], h=1, h_modulus=2)
        assert m.F[0].htilde == ((1, 1),)

    def test_h_canonical(self):
        m = WreathModel(F=[((), 1)], h=-1, h_modulus=5)
        assert m.h == 4
        assert m.h_inv == 1

    def test_trivial_h_rejected(self):
        with pytest.raises(ValueError):
            WreathModel(F=[((), 1)], h=4, h_modulus=2)
        with pytest.raises(ValueError):
            WreathModel(F=[((), 1)], h=0)

    def test_order_one_rejected(self):
        with pytest.raises(ValueError):
            WreathModel(F=[((), 1)], h=1, h_modulus=1)

    def test_empty_family_rejected(self):
        with pytest.raises(ValueError):
            WreathModel(F=[], h=1)

    def test_lines_must_be_integer_rank(self):
        with pytest.raises(ValueError):
            WreathModel(F=[((), (1, 0))], h=1, action=translation_action(2))

    def test_shift_part_validated(self):
        with pytest.raises(ValueError):
            WreathModel(F=[((), "x")], h=1)

    def test_singleton_family(self):
        m = standard_model(1)
        assert len(m.F) == 1
        assert m.F[0].g == 0


class TestWitness:
    def test_box_and_cutoff(self, witness):
        assert witness.E == tuple(range(2, 24))
        assert witness.defect == Fraction(1, 11)
        assert witness.epsilon == Fraction(1, 11)
        assert witness.eps_literal == Fraction(1, 6)
        assert witness.t == ExactScalar.pow2(Fraction(-1, 22))

    def test_boundary_lines(self, witness):
        assert witness.moved_out(0) == 1
        assert witness.delta_lines(0) == (1, 23)
        assert witness.moved_out(1) == 1
        assert witness.delta_lines(1) == (2, 24)
        assert witness.moved_out(2) == 0
        assert witness.delta_lines(2) == ()
        assert witness.active_lines() == (1, 2, 23, 24)

    def test_override_defect_reported_honestly(self, model):
        w = build_witness(model, E_override=range(2, 24, 2))
        assert w.defect == 1

    def test_override_must_avoid_twists(self, model):
        with pytest.raises(ValueError):
            build_witness(model, E_override=range(0, 22))

    def test_override_must_be_nonempty(self, model):
        with pytest.raises(ValueError):
            build_witness(model, E_override=[])

    def test_singleton_family_witness(self):
        w = build_witness(standard_model(1))
        assert len(w.E) == 1
        assert w.t == HALF


def _ev(*terms):
    return RectangleEvent(terms)


class TestRectangleEvent:
    def test_term_measure(self, witness):
        t = witness.t
        ev = RectangleEvent.conjunction([((0, 5), 0), ((1, 5), 1), ((0, 6), 0)])
        assert exact_measure(ev, t) == t * t * (ONE - t)

    def test_contradiction_dropped(self):
        ev = _ev([((0, 1), 0), ((0, 1), 1)])
        assert ev.is_empty()
        assert exact_measure(ev, HALF).is_zero()

    def test_full_and_empty(self):
        assert exact_measure(RectangleEvent.full(), HALF) == ONE
        assert exact_measure(RectangleEvent.empty(), HALF).is_zero()

    def test_duplicate_terms_merged(self):
        ev = _ev([((0, 1), 0)], [((0, 1), 0)])
        assert len(ev.terms) == 1

    def test_footprint(self):
        ev = _ev([((0, 1), 0), ((2, 3), 1)])
        assert ev.footprint() == {(0, 1), (2, 3)}
        assert ev.lines() == {1, 3}

    def test_union_inclusion_exclusion(self):
        a = RectangleEvent.conjunction([((0, 1), 0)])
        b = RectangleEvent.conjunction([((0, 2), 0)])
        got = exact_measure(a.union(b), HALF)
        assert got.as_fraction() == Fraction(3, 4)

    def test_minus(self):
        a = RectangleEvent.conjunction([((0, 1), 0)])
        b = RectangleEvent.conjunction([((0, 2), 0)])
        diff = a.minus(b)
        assert diff.disjoint
        assert exact_measure(diff, HALF).as_fraction() == Fraction(1, 4)
        assert a.minus(a).is_empty()

    def test_delta_symmetric(self):
        a = RectangleEvent.conjunction([((0, 1), 0), ((0, 2), 0)])
        b = RectangleEvent.conjunction([((0, 2), 0), ((0, 3), 0)])
        d1 = exact_measure(a.delta(b), HALF)
        d2 = exact_measure(b.delta(a), HALF)
        assert d1 == d2
        assert d1.as_fraction() == Fraction(1, 4)

    def test_equivalent(self):
        a = RectangleEvent.conjunction([((0, 1), 0)])
        spelled = _ev(
            [((0, 1), 0), ((0, 2), 0)],
            [((0, 1), 0), ((0, 2), 1)],
        )
        assert a.equivalent(spelled, HALF)
        assert not a.equivalent(RectangleEvent.empty(), HALF)

    def test_immutable(self):
        ev = RectangleEvent.full()
        with pytest.raises(AttributeError):
            ev.terms = ()

    def test_term_cap(self):
        with pytest.raises(SearchExhausted):
            RectangleEvent([[((0, i), 0)] for i in range(MAX_DNF_TERMS + 1)])

    def test_inclusion_exclusion_cap(self):
        ev = RectangleEvent([[((0, i), 0)] for i in range(MAX_IE_TERMS + 1)])
        with pytest.raises(SearchExhausted):
            exact_measure(ev, HALF)

    @settings(max_examples=30, deadline=None)
    @given(st.data())
    def test_sym_diff_identity(self, data):
        coords = [(0, 0), (0, 1), (1, 0)]
        def event(tag):
            terms = data.draw(
                st.lists(
                    st.lists(
                        st.tuples(st.sampled_from(coords), st.integers(0, 1)),
                        min_size=1,
                        max_size=3,
                    ),
                    min_size=0,
                    max_size=3,
                ),
                label=tag,
            )
            return RectangleEvent(terms)
        a, b = event("a"), event("b")
        t = ExactScalar.pow2(Fraction(-1, 3))
        lhs = exact_measure(a.delta(b), t)
        rhs = (
            exact_measure(a, t)
            + exact_measure(b, t)
            - exact_measure(a.intersect(b), t).scale(2)
        )
        assert lhs == rhs


class TestPullback:
    def test_off_box_events_fixed(self, witness):
        ev = RectangleEvent.conjunction([((0, -5), 0), ((3, 30), 1)])
        assert pullback_tzero(ev, witness) == ev

    def test_preserves_measure(self, witness):
        t = witness.t
        events = js._roundtrip_events(witness)
        events.append(RectangleEvent.conjunction([((0, 5), 0), ((1, 5), 1), ((0, -4), 0)]))
        for ev in events:
            assert exact_measure(pullback_tzero(ev, witness), t) == exact_measure(ev, t)

    def test_involution(self, witness):
        for ev in js._roundtrip_events(witness):
            back = pullback_tzero(pullback_tzero(ev, witness), witness)
            assert back.equivalent(ev, witness.t)

    def test_one_line_overlap_is_t_squared(self, witness):
        # a line agrees with its image at the identity coordinate exactly
        # when both u_0 and u_h sit below the cutoff
        t = witness.t
        loc = RectangleEvent.conjunction([((0, witness.E[0]), 0)])
        overlap = loc.intersect(pullback_tzero(loc, witness))
        assert exact_measure(overlap, t) == t * t

    def test_term_cap(self, witness):
        wide = RectangleEvent.conjunction([((0, x), 0) for x in witness.E])
        with pytest.raises(SearchExhausted):
            pullback_tzero(wide, witness)


class TestExactConditions:
    def test_base_measure_is_half(self, witness):
        assert exact_measure(base_event(witness), witness.t) == HALF

    def test_tzero_sym_diff_is_half(self, witness):
        assert nu_tzero_sym_diff(witness) == HALF

    @pytest.mark.parametrize("i", [0, 1, 2])
    def test_shift_sym_diff_closed_form(self, witness, i):
        assert nu_sym_diff_shift(witness, i) == nu_sym_diff_shift_closed(witness, i)

    def test_fixed_shift_has_zero_diff(self, witness):
        assert nu_sym_diff_shift(witness, 2).is_zero()

    def test_shift_sym_diff_value(self, witness):
        assert nu_sym_diff_shift(witness, 0) == ONE - witness.t

    def test_equivariance_via_events(self, witness):
        for i in range(3):
            ev = omega_trivial_event(witness, witness.delta_lines(i))
            assert exact_measure(ev, witness.t) == nu_equivariance(witness, i)

    def test_good_set_inside_equivariance(self, witness):
        for i in range(3):
            c, y = nu_good_set(witness, i), nu_equivariance(witness, i)
            assert c.compare(y) <= 0
        assert nu_good_set(witness, 0) == witness.t**6

    def test_good_set_event_matches(self, witness):
        ev = js.good_set_event(witness, 0)
        assert exact_measure(ev, witness.t) == nu_good_set(witness, 0)

    def test_good_set_clears_target(self, witness):
        target = ExactScalar.from_rational(Fraction(2, 3))
        assert nu_good_set(witness, 0).compare(target) > 0

    def test_order_two_stencil(self):
        # h of order 2 collapses h^2 to the identity, leaving two pins
        w = build_witness(standard_model(3, h_modulus=2))
        assert nu_good_set(w, 0) == w.t**4


class TestMonteCarlo:
    def test_deterministic(self, model, witness):
        a = mc_estimate(model, witness, 1, 2000, 11)
        b = mc_estimate(model, witness, 1, 2000, 11)
        assert a == b

    def test_seed_sensitivity(self, model, witness):
        a = mc_estimate(model, witness, 1, 5000, 1)
        b = mc_estimate(model, witness, 1, 5000, 2)
        assert a.successes != b.successes

    def test_sample_floor(self, model, witness):
        with pytest.raises(ValueError):
            mc_estimate(model, witness, 1, 999, 1)

    def test_unknown_condition(self, model, witness):
        with pytest.raises(ValueError):
            mc_estimate(model, witness, 5, 2000, 1)

    def test_model_mismatch(self, witness):
        other = standard_model(4)
        with pytest.raises(ValueError):
            mc_estimate(other, witness, 1, 2000, 1)

    def test_invariance_exact(self, model, witness):
        tally = mc_estimate(model, witness, 2, 5000, 3)
        assert tally.successes == 5000

    def test_fixed_shift_never_separates(self, model, witness):
        tally = mc_estimate(model, witness, 3, 2000, 3, f_index=2)
        assert tally.successes == 0

    @pytest.mark.parametrize("cond", [1, 3, 4])
    def test_covers_exact_value(self, model, witness, cond):
        t = witness.t
        base = ONE - (t * (ONE - t)).scale(2)
        exact = {
            1: base ** len(witness.active_lines()),
            3: nu_sym_diff_shift(witness, 0),
            4: nu_tzero_sym_diff(witness),
        }[cond]
        tally = mc_estimate(model, witness, cond, 20_000, 7)
        assert tally.covers(float(exact))

    def test_tally_csv(self, model, witness):
        rows = tallies_csv([mc_estimate(model, witness, c, 2000, 3) for c in (1, 2)])
        lines = rows.strip().splitlines()
        assert lines[0] == "condition,samples,successes,seed"
        assert lines[1].startswith("cond1,2000,")
        assert len(lines) == 3


@pytest.fixture(scope="module")
def report(model):
    return stability_report(model, samples=20_000, seed=1)


class TestReport:
    def test_passes(self, report):
        assert report.passed

    def test_exact_items(self, report):
        assert report.item("nu-base").value == "1/2"
        assert report.item("nu-tzero-diff").passed
        assert report.item("folner-defect").value == "1/11"
        assert report.item("mc-cond2").value == "20000/20000"

    def test_params(self, report):
        assert report.params["E_size"] == 22
        assert report.params["literal_bound_holds"] is True
        assert report.params["twisted_lines"] == [-1, 0, 1]

    def test_json_roundtrip(self, report):
        from centcert.certificate import Certificate

        back = Certificate.from_json(report.to_json())
        assert back.passed
        assert len(back.items) == len(report.items)

    def test_deterministic_modulo_timestamp(self, model):
        a = stability_report(model, samples=5000, seed=9).to_json(timestamp=False)
        b = stability_report(model, samples=5000, seed=9).to_json(timestamp=False)
        assert a == b

    def test_bad_box_fails_honestly(self, model):
        cert = stability_report(model, samples=2000, seed=5, E_override=range(2, 24, 2))
        assert not cert.passed
        assert not cert.item("folner-defect").passed
        assert cert.item("nu-base").passed

    def test_order_two_model(self):
        cert = stability_report(standard_model(3, h_modulus=2), samples=5000, seed=4)
        assert cert.passed
