"""The three group backends: one-element, integer translations, staged."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbitcode import (
    CompletedStage,
    PartialInjection,
    UnknownGroupElement,
    WindowTooSmall,
    dagger_condition,
    open_orbits,
    oracle_from_descriptor,
    stage_from_data,
    stage_to_data,
    staged_oracle,
    translation_oracle,
    trivial_oracle,
    x_power,
    zigzag_decode,
    zigzag_encode,
)

import helpers


def test_one_element_group_basics(trivial):
    e = trivial.identity()
    assert trivial.is_identity(e)
    assert trivial.compose(e, e) == e
    assert trivial.invert(e) == e
    assert trivial.eval(e, 17) == 17


def test_one_element_group_rejects_foreign_elements(trivial):
    with pytest.raises(UnknownGroupElement):
        trivial.eval(1, 0)


def test_identity_fixed_points_are_everything(trivial):
    report = trivial.fixed_points(trivial.identity())
    assert report.all_naturals


def test_translations_are_fixed_point_free(translation):
    report = translation.fixed_points(3)
    assert report.exact
    assert not report.all_naturals
    assert report.points == frozenset()


def test_translation_composition_cancels(translation):
    assert translation.is_identity(translation.compose(2, -2))


def test_translation_action_through_the_integer_pairing(translation):
    assert translation.eval(1, zigzag_encode(0)) == zigzag_encode(1)


def test_integer_pairing_is_the_documented_sequence():
    assert [zigzag_decode(n) for n in range(5)] == [0, -1, 1, -2, 2]
    for n in range(50):
        assert zigzag_encode(zigzag_decode(n)) == n
    for z, n in ((0, 0), (-1, 1), (1, 2), (-2, 3), (2, 4)):
        assert zigzag_encode(z) == n
        assert helpers.zag(z) == n
        assert helpers.zig(n) == z


@given(st.integers(-40, 40), st.integers(0, 200))
def test_translation_eval_matches_integer_arithmetic(k, n):
    translation = translation_oracle()
    assert translation.eval(k, n) == helpers.zag(helpers.zig(n) + k)


@given(st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9))
def test_translation_group_laws(a, b, c):
    translation = translation_oracle()
    lhs = translation.compose(translation.compose(a, b), c)
    rhs = translation.compose(a, translation.compose(b, c))
    assert lhs == rhs
    assert translation.is_identity(translation.compose(a, translation.invert(a)))


def sealed_stage():
    """A hand-built stage: two 2-cycles, window 4."""
    s = PartialInjection([(0, 1), (1, 0), (2, 3), (3, 2)])
    cond = dagger_condition((0,), s, [x_power(1)])
    return CompletedStage(generator_index=0, condition=cond, window=4)


def test_staged_lookup_inside_the_window():
    oracle = staged_oracle([sealed_stage()])
    g = oracle.generator(0)
    assert oracle.eval(g, 0) == 1
    assert oracle.eval(g, 3) == 2
    assert oracle.eval_inverse(g, 1) == 0


def test_staged_free_reduction_gives_identity():
    oracle = staged_oracle([sealed_stage()])
    g = oracle.generator(0)
    assert oracle.is_identity(oracle.compose(g, oracle.invert(g)))


def test_staged_words_evaluate_right_to_left():
    oracle = staged_oracle([sealed_stage()])
    g = oracle.generator(0)
    gg = oracle.compose(g, g)
    assert oracle.eval(gg, 0) == 0
    assert oracle.eval(gg, 2) == 2


def test_staged_query_past_the_window_fails_loudly():
    oracle = staged_oracle([sealed_stage()])
    g = oracle.generator(0)
    with pytest.raises(WindowTooSmall) as info:
        oracle.eval(g, 4)
    assert info.value.required == 5


def test_growing_the_window_preserves_the_old_graph():
    oracle = staged_oracle([sealed_stage()])
    g = oracle.generator(0)
    before = {n: oracle.eval(g, n) for n in range(4)}
    oracle.grow_window(9)
    assert oracle.window() >= 9
    for n, value in before.items():
        assert oracle.eval(g, n) == value
    stage = oracle.stages()[0]
    assert not open_orbits(stage.injection)
    for n in range(9):
        assert oracle.eval(g, n) is not None


def test_grown_stage_respects_the_word_constraints():
    oracle = staged_oracle([sealed_stage()])
    oracle.grow_window(9)
    stage = oracle.stages()[0]
    g = oracle.generator(0)
    for n in range(oracle.window()):
        assert oracle.eval(g, n) != n


def test_staged_fixed_points_are_certified_within_window():
    oracle = staged_oracle([sealed_stage()])
    g = oracle.generator(0)
    report = oracle.fixed_points(g)
    assert not report.exact
    assert report.window == 4
    assert report.points == frozenset()


def test_staged_powers_stay_off_the_identity():
    oracle = staged_oracle([sealed_stage()])
    oracle.grow_window(12)
    g = oracle.generator(0)
    word = g
    for _ in range(4):
        assert not oracle.is_identity(word)
        word = oracle.compose(word, g)


def test_element_text_round_trip():
    oracle = staged_oracle([sealed_stage(), sealed_stage_one()])
    g0, g1 = oracle.generator(0), oracle.generator(1)
    elt = oracle.compose(oracle.compose(g0, g0), oracle.invert(g1))
    text = oracle.format_element(elt)
    assert text == "0^2*1^-1"
    assert oracle.parse_element(text) == elt
    assert oracle.format_element(oracle.identity()) == ""
    assert oracle.parse_element("") == oracle.identity()


def sealed_stage_one():
    s = PartialInjection([(0, 2), (2, 0), (1, 3), (3, 1)])
    cond = dagger_condition((0,), s, [x_power(1)])
    return CompletedStage(generator_index=1, condition=cond, window=4)


def test_staged_rejects_malformed_elements():
    oracle = staged_oracle([sealed_stage()])
    with pytest.raises(UnknownGroupElement):
        oracle.eval(((5, 1),), 0)
    with pytest.raises(UnknownGroupElement):
        oracle.eval("g0", 0)


def test_staged_group_laws_on_random_elements():
    oracle = staged_oracle([sealed_stage(), sealed_stage_one()])
    pool = [
        oracle.generator(0),
        oracle.generator(1),
        oracle.invert(oracle.generator(0)),
        oracle.compose(oracle.generator(0), oracle.generator(1)),
        oracle.identity(),
    ]
    for a in pool:
        for b in pool:
            for c in pool:
                assert oracle.compose(oracle.compose(a, b), c) == oracle.compose(
                    a, oracle.compose(b, c)
                )
        assert oracle.is_identity(oracle.compose(a, oracle.invert(a)))


def test_stage_serialization_round_trip():
    stage = sealed_stage()
    data = stage_to_data(stage)
    assert set(data) == {"generator_index", "injection", "words", "target_bits", "window"}
    back = stage_from_data(data)
    assert back.generator_index == stage.generator_index
    assert back.window == stage.window
    assert back.injection == stage.injection
    assert back.condition.words == stage.condition.words
    assert back.target_bits == stage.target_bits


def test_descriptor_round_trip_for_all_backends():
    stages = [sealed_stage()]
    for oracle in (trivial_oracle(), translation_oracle(), staged_oracle(stages)):
        back = oracle_from_descriptor(oracle.descriptor())
        assert back.descriptor() == oracle.descriptor()


def test_empty_staged_oracle_is_the_one_element_group():
    oracle = staged_oracle([])
    assert oracle.is_identity(oracle.identity())
    assert oracle.eval(oracle.identity(), 40) == 40


def test_growth_from_a_minimal_stage():
    s = PartialInjection([(0, 1), (1, 0)])
    cond = dagger_condition((), s, [x_power(1)])
    stage = CompletedStage(generator_index=0, condition=cond, window=2)
    oracle = staged_oracle([stage])
    oracle.grow_window(6)
    assert oracle.window() >= 6
    assert oracle.eval(oracle.generator(0), 0) == 1
