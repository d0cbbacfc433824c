import math

import pytest

import pressurelab as pl
from brute import (
    admissible_words,
    all_words,
    ball_agreement_length,
    birkhoff,
    max_separated_set_size,
    metric,
    orbit_metric,
    sup_birkhoff,
)

FULL2 = pl.full_shift(2)
GM = pl.golden_mean_shift()


def test_word_counts_full_shift():
    assert pl.count_words(FULL2, 3) == 8


def test_word_counts_golden_mean_against_filter():
    for n in (4, 10):
        expected = len(admissible_words(GM.allowed, n))
        assert pl.count_words(GM, n) == expected
    assert pl.count_words(GM, 4) == 8
    assert pl.count_words(GM, 10) == 144


def test_enumerate_words_matches_filter_oracle():
    for n in range(1, 7):
        assert sorted(pl.enumerate_words(GM, n)) == sorted(
            admissible_words(GM.allowed, n)
        )


def test_ball_word_length_small_cases_by_enumeration():
    assert pl.bowen_ball_word_length(3, pl.Scale(2)) == ball_agreement_length(
        3, 2, probe_len=7
    )
    assert pl.bowen_ball_word_length(1, pl.Scale(0)) == ball_agreement_length(
        1, 0, probe_len=4
    )
    assert pl.bowen_ball_word_length(3, pl.Scale(2)) == 5
    assert pl.bowen_ball_word_length(1, pl.Scale(0)) == 1


def test_ball_word_length_deep_case_by_witness_pairs():
    # For each candidate first-difference index j, build the literal pair
    # and evaluate the orbit metric directly; the ball membership threshold
    # must flip exactly at the claimed agreement length.
    n, m = 10, 3
    claimed = pl.bowen_ball_word_length(n, pl.Scale(m))
    assert claimed == 13
    for j in range(20):
        x = (0,) * 24
        y = (0,) * j + (1,) + (0,) * (23 - j)
        inside = orbit_metric(x, y, n) < 2.0 ** (-m)
        assert inside == (j >= claimed)


def test_separated_word_length_small_cases():
    assert pl.separated_word_length(2, pl.Scale(1)) == 2
    assert pl.separated_word_length(1, pl.Scale(1)) == 1
    assert pl.separated_word_length(5, pl.Scale(2)) == 6
    # pairs with distinct prefixes of that length are strictly separated
    n, m = 5, 2
    q = pl.separated_word_length(n, pl.Scale(m))
    for j in range(10):
        x = (0,) * 16
        y = (0,) * j + (1,) + (0,) * (15 - j)
        separated = orbit_metric(x, y, n) > 2.0 ** (-m)
        assert separated == (j < q)


def test_max_separated_family_full_shift():
    assert max_separated_set_size(2, n=2, m=1, probe_len=4) == 4


def test_separated_scale_zero_rejected():
    with pytest.raises(pl.ScaleTooCoarse):
        pl.separated_word_length(3, pl.Scale(0))


def test_metric_is_literal_power_of_two():
    assert metric((0, 1, 1), (0, 1, 0)) == 0.25
    assert metric((1, 1), (1, 1)) == 0.0
    assert orbit_metric((0, 0, 1, 0), (0, 0, 0, 0), 2) == 0.5


def test_birkhoff_sum_zero_potential():
    f = pl.zero_potential(FULL2)
    assert pl.birkhoff_sum(f, (0, 1, 0, 1, 1, 0, 1, 0), 7) == 0.0


def test_birkhoff_sum_depth_one_literal():
    f = pl.potential_from_table(FULL2, 1, {(0,): 1.0, (1,): 0.0})
    w = (0, 0, 1, 1, 0)
    assert pl.birkhoff_sum(f, w, 4) == pytest.approx(
        birkhoff({(0,): 1.0, (1,): 0.0}, 1, w, 4)
    )
    assert pl.birkhoff_sum(f, w, 4) == 2.0


def test_birkhoff_sum_depth_two_literal():
    table = {
        (0, 0): 0.0,
        (0, 1): 1.0,
        (1, 0): 0.0,
    }
    f = pl.potential_from_table(GM, 2, table)
    w = (0, 1, 0, 1, 0)
    assert pl.birkhoff_sum(f, w, 4) == 2.0


def test_sup_birkhoff_zero_potential_is_zero():
    f = pl.zero_potential(FULL2)
    assert pl.sup_birkhoff_on_cylinder(FULL2, f, (0, 1), 5) == 0.0


def test_sup_birkhoff_full_shift_favors_zeros():
    table = {(0,): 1.0, (1,): 0.0}
    f = pl.potential_from_table(FULL2, 1, table)
    got = pl.sup_birkhoff_on_cylinder(FULL2, f, (0,), 3)
    assert got == sup_birkhoff(FULL2.allowed, table, 1, (0,), 3)
    assert got == 3.0


def test_sup_birkhoff_respects_forbidden_transitions():
    table = {(0,): 1.0, (1,): 0.0}
    f = pl.potential_from_table(GM, 1, table)
    got = pl.sup_birkhoff_on_cylinder(GM, f, (1,), 2)
    assert got == sup_birkhoff(GM.allowed, table, 1, (1,), 2)
    assert got == 1.0


def test_sup_and_inf_birkhoff_bracket_random_cases():
    import numpy as np

    rng = np.random.default_rng(42)
    for _ in range(25):
        table = {
            (a, b): float(rng.uniform(-1, 1))
            for a in range(2)
            for b in range(2)
            if GM.allowed[a][b]
        }
        f = pl.potential_from_table(GM, 2, table)
        n = int(rng.integers(1, 5))
        for w in pl.enumerate_words(GM, int(rng.integers(1, 4))):
            hi = pl.sup_birkhoff_on_cylinder(GM, f, w, n)
            lo = pl.inf_birkhoff_on_cylinder(GM, f, w, n)
            assert lo <= hi + 1e-12
            assert hi == pytest.approx(
                sup_birkhoff(GM.allowed, table, 2, w, n), abs=1e-12
            )


def test_potential_table_rejects_forbidden_word():
    with pytest.raises(pl.InadmissibleWord):
        pl.potential_from_table(
            GM, 2, {(0, 0): 0.1, (0, 1): 0.2, (1, 0): 0.3, (1, 1): 0.4}
        )


def test_potential_table_requires_full_coverage():
    with pytest.raises(ValueError):
        pl.potential_from_table(FULL2, 1, {(0,): 1.0})


def test_subshift_from_pairs_roundtrip():
    sft = pl.subshift_from_pairs(2, [(0, 0), (0, 1), (1, 0)])
    assert sft.allowed == GM.allowed


def test_subset_validation():
    gm_inside = pl.sub_sft(((True, True), (True, False)))
    pl.validate_spec(gm_inside, FULL2)
    not_sub = pl.sub_sft(((True, True), (True, True)))
    with pytest.raises(ValueError):
        pl.validate_spec(not_sub, GM)
    with pytest.raises(ValueError):
        pl.frequency_level(0, 1.5, 0.1)
    with pytest.raises(ValueError):
        pl.frequency_level(0, 0.5, -0.1)


def test_target_words_of_sub_sft():
    gm_inside = pl.sub_sft(((True, True), (True, False)))
    for n in range(1, 8):
        words = pl.iter_target_words(FULL2, gm_inside, n)
        assert sorted(words) == sorted(admissible_words(GM.allowed, n))
        assert pl.count_target_words(FULL2, gm_inside, n) == len(words)


def test_target_words_of_finite_union_is_set_union():
    a = pl.sub_sft(((True, False), (False, False)))
    b = pl.sub_sft(((False, False), (False, True)))
    u = pl.finite_union(a, b)
    words = pl.iter_target_words(FULL2, u, 5)
    assert sorted(words) == [(0,) * 5, (1,) * 5]


def test_frequency_level_words_by_filter():
    spec = pl.frequency_level(0, 0.5, 0.1)
    got = sorted(pl.iter_target_words(FULL2, spec, 6))
    expected = sorted(
        w for w in all_words(2, 6) if abs(w.count(0) / 6 - 0.5) <= 0.1 + 1e-12
    )
    assert got == expected
