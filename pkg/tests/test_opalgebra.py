import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwm import opalgebra as oa
from qwm import reference
from qwm.opalgebra import (
    EmptySequence,
    InvalidComponent,
    Letter,
    OperatorSum,
    RotationAngles,
    alternating_pattern,
    evaluate_component,
    parse_sum,
)

# reference expansions of the σ⁻ matrix element, grouped by side peak
TERMS_N3 = {
    -5: ["-bAsAbA"],
    -3: ["+sAbA", "-aAsAbA", "+2bAsA"],
    -1: ["-2sA", "+2aAsA", "-aBsAbA", "+bAsB"],
    1: ["-sB", "+aAsB", "+2aBsA"],
    3: ["+aBsB"],
}
TERMS_N4 = {
    -5: ["-bAsAbA"],
    -3: ["+sAbA", "-aAsAbA", "+2bAsA", "-bAsBbA", "-bBsAbA"],
    -1: ["-2sA", "+sBbA", "+2aAsA", "-aAsBbA", "-3aBsAbA", "+2bAsB", "-bAsBaA", "+2bBsA", "-bBsBbA"],
    1: ["-2sB", "+sBaA", "+2aAsB", "-aAsBaA", "+6aBsA", "-3aBsBbA", "-bAsBaB", "+2bBsB", "-bBsBaA",
        "+aBaBsAbA"],
    3: ["+sBaB", "-aAsBaB", "+6aBsB", "-3aBsBaA", "-bBsBaB", "-2aBaBsA", "+aBaBsBbA"],
    5: ["-3aBsBaB", "-2aBaBsB", "+aBaBsBaA"],
    7: ["+aBaBsBaB"],
}
TERM_COUNTS = {
    5: {-9: 1, -7: 3, -5: 10, -3: 17, -1: 26, 1: 23, 3: 14, 5: 5, 7: 1},
    6: {-9: 1, -7: 5, -5: 17, -3: 37, -1: 58, 1: 65, 3: 47, 5: 26, 7: 12, 9: 3, 11: 1},
}

letters = st.sampled_from(list(Letter))
words = st.lists(letters, max_size=6).map(tuple)
sums = st.lists(st.tuples(words, st.integers(-5, 5)), max_size=8).map(OperatorSum.from_terms)


def test_letter_phases_and_carriers():
    assert [x.phase for x in (Letter.A, Letter.ADAG, Letter.B, Letter.BDAG)] == [1, -1, -1, 1]
    assert Letter.A.carrier == Letter.ADAG.carrier == "-"
    assert Letter.B.lowering and not Letter.BDAG.lowering
    assert Letter.A.dagger() is Letter.ADAG


def test_single_pulse_skeletons():
    assert oa.single_pulse_operator("-") == parse_sum("1 + a - A")
    assert oa.single_pulse_operator("+") == parse_sum("1 + b - B")
    with pytest.raises(ValueError):
        oa.single_pulse_operator("x")


def test_first_pulse_stands_rightmost():
    full = oa.evolution_operator(["-", "+"])
    assert full.as_dict()[oa.parse_word("bA")] == -1
    assert oa.parse_word("Ab") not in full.as_dict()


def test_adjacent_same_direction_letters_vanish():
    assert not parse_sum("aa + AB + ba + BB")
    assert parse_sum("aB + ab") == parse_sum("aB")
    assert parse_sum("bA - bA") == OperatorSum.from_terms([])


def test_empty_pattern_rejected():
    with pytest.raises(EmptySequence):
        oa.evolution_operator([])
    with pytest.raises(EmptySequence):
        evaluate_component([], 1, RotationAngles(1.0, 1.0))


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("kind,table", [("pruned", reference.PRUNED), ("right", reference.RIGHT)])
def test_reference_operator_lists(n, kind, table):
    assert oa.reduced_operators(alternating_pattern(n))[kind] == parse_sum(table[n])


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_reference_left_lists(n):
    assert oa.reduced_operators(alternating_pattern(n))["left"] == parse_sum(reference.LEFT[n])


def test_left_list_n5_differs_from_reference_by_one_word():
    built = oa.reduced_operators(alternating_pattern(5))["left"].as_dict()
    printed = parse_sum(reference.LEFT[5]).as_dict()
    diff = {oa.word_str(w) for w in set(built) ^ set(printed)}
    assert diff == {"A", "bAbA"}
    assert built[oa.parse_word("bAbA")] == printed[oa.parse_word("A")] == 1


@pytest.mark.parametrize("n,table", [(3, TERMS_N3), (4, TERMS_N4)])
def test_matrix_element_expansion(n, table):
    got = {p: sorted(str(t) for t in ts) for p, ts in oa.matrix_element_terms(alternating_pattern(n)).items()}
    assert got == {p: sorted(ts) for p, ts in table.items()}


@pytest.mark.parametrize("n", [5, 6])
def test_matrix_element_term_counts(n):
    got = {p: len(ts) for p, ts in oa.matrix_element_terms(alternating_pattern(n)).items()}
    assert got == TERM_COUNTS[n]


@settings(max_examples=60, deadline=None)
@given(sums)
def test_canonical_idempotent(s):
    assert s.canonical() == s.canonical().canonical()
    assert parse_sum(str(s)) == s


@settings(max_examples=60, deadline=None)
@given(sums)
def test_dagger_involution(s):
    assert oa.dagger(oa.dagger(s)) == s


@settings(max_examples=40, deadline=None)
@given(sums, sums, sums)
def test_product_associative(x, y, z):
    assert (x * y) * z == x * (y * z)


def test_word_phase_matches_component():
    for p, pairs in oa.matrix_element_terms(alternating_pattern(4)).items():
        assert all(pair.phase == p for pair in pairs)


@pytest.mark.parametrize("p", [-5, -3, -1, 1, 3])
def test_closed_forms_n3(p):
    form = reference.CLOSED_FORMS[3][p]
    grid = 2 * math.pi * np.arange(17) / 17
    for tm in grid:
        for tp in grid:
            assert evaluate_component(alternating_pattern(3), p, RotationAngles(tm, tp)) == pytest.approx(
                form(tm, tp), abs=1e-12
            )


@pytest.mark.parametrize("p", [7, 5, 3, -1, -3, -5])
def test_n4_reference_forms_carry_extra_secant_squared(p):
    form = reference.CLOSED_FORMS[4][p]
    for tm, tp in [(0.7, 1.1), (2.3, 0.4), (4.0, 5.5)]:
        alg = evaluate_component(alternating_pattern(4), p, RotationAngles(tm, tp))
        assert form(tm, tp) * math.cos(tp / 2) ** 2 == pytest.approx(alg, rel=1e-10, abs=1e-14)


def test_n4_reference_p1_has_factor_two_more():
    tm, tp = 0.9, 1.3
    alg = evaluate_component(alternating_pattern(4), 1, RotationAngles(tm, tp))
    assert reference.CLOSED_FORMS[4][1](tm, tp) * math.cos(tp / 2) ** 2 == pytest.approx(2 * alg, rel=1e-10)


def test_spot_values():
    for (n, p, tm, tp), want in reference.SPOT_VALUES.items():
        assert evaluate_component(alternating_pattern(n), p, RotationAngles(tm, tp)) == pytest.approx(want, abs=1e-12)


def test_two_pulse_p3_is_sine_form():
    for tm, tp in [(0.3, 1.0), (1.2, 2.2), (2.5, 0.8)]:
        got = evaluate_component(alternating_pattern(2), 3, RotationAngles(tm, tp))
        assert got == pytest.approx(0.5 * math.sin(tm) * math.sin(tp / 2) ** 2, abs=1e-14)


@pytest.mark.parametrize("n", range(2, 7))
def test_zero_at_pi_pi(n):
    table = oa.component_table(alternating_pattern(n), RotationAngles(math.pi, math.pi))
    assert all(abs(v) < 1e-12 for v in table.entries.values())


@pytest.mark.parametrize("n", range(2, 7))
def test_support_and_single_term_extremes(n):
    terms = oa.matrix_element_terms(alternating_pattern(n))
    assert len(terms) == 2 * n - 1
    assert all(p % 2 and abs(p) <= 2 * n - 1 for p in terms)
    assert len(terms[min(terms)]) == 1 and len(terms[max(terms)]) == 1


def test_even_and_empty_components():
    with pytest.raises(InvalidComponent):
        evaluate_component(alternating_pattern(3), 2, RotationAngles(1.0, 1.0))
    assert evaluate_component(alternating_pattern(3), 7, RotationAngles(1.0, 1.0)) == 0.0
    assert evaluate_component(alternating_pattern(3), -11, RotationAngles(1.0, 1.0)) == 0.0


def test_angles_must_be_finite():
    with pytest.raises(ValueError):
        RotationAngles(float("nan"), 1.0)


@pytest.mark.parametrize("n", [3, 4])
def test_mirror_antisymmetry(n):
    rng = np.random.default_rng(5)
    pattern = alternating_pattern(n)
    for p in oa.matrix_element_terms(pattern):
        for tm, tp in rng.uniform(0, 2 * math.pi, size=(10, 2)):
            f = lambda a, b: evaluate_component(pattern, p, RotationAngles(a, b))  # noqa: E731
            if p % 4 == 3:
                assert f(2 * math.pi - tm, tp) == pytest.approx(-f(tm, tp), abs=1e-12)
                assert abs(f(math.pi, tp)) < 1e-12
            else:
                assert f(tm, 2 * math.pi - tp) == pytest.approx(-f(tm, tp), abs=1e-12)
                assert abs(f(tm, math.pi)) < 1e-12


def test_net_field_two_pulses():
    for t in np.linspace(0, 2 * math.pi, 40, endpoint=False):
        assert oa.net_field(alternating_pattern(2), RotationAngles(t, t)) == pytest.approx(
            -0.5 * math.sin(2 * t), abs=1e-12
        )


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_net_field_is_harmonic(n):
    # equal angles: the train is one rotation by Nθ
    for t in np.linspace(0, 2 * math.pi, 25, endpoint=False):
        assert oa.net_field(alternating_pattern(n), RotationAngles(t, t)) == pytest.approx(
            -0.5 * math.sin(n * t), abs=1e-12
        )


def test_starting_with_plus_mirrors_components():
    a = RotationAngles(0.8, 1.9)
    swapped = RotationAngles(1.9, 0.8)
    minus_first = oa.component_table(alternating_pattern(3, "-"), a)
    plus_first = oa.component_table(alternating_pattern(3, "+"), swapped)
    assert sorted(plus_first.entries) == sorted(-p for p in minus_first.entries)
    for p, v in minus_first.entries.items():
        assert abs(plus_first[-p]) == pytest.approx(abs(v), abs=1e-14)
