import math

import pytest

import pressurelab as pl

FULL2 = pl.full_shift(2)
GM = pl.golden_mean_shift()
F0 = pl.zero_potential(FULL2)
F10 = pl.potential_from_table(FULL2, 1, {(0,): 1.0, (1,): 0.0})
LOG_PHI = math.log((1 + math.sqrt(5)) / 2)

GM_INSIDE = pl.sub_sft(((True, True), (True, False)))
FIXED0 = pl.sub_sft(((True, False), (False, False)))
FIXED1 = pl.sub_sft(((False, False), (False, True)))


def test_variational_whole_space_weighted_potential():
    rep = pl.verify_variational(FULL2, pl.whole(), F10, pl.Scale(1), 3, 16, tol=5e-3, seed=11)
    assert rep.passed
    assert abs(rep.gap) <= 5e-3
    assert rep.argmax_is_equilibrium
    assert rep.p_bowen.midpoint == pytest.approx(math.log(math.e + 1), abs=5e-3)
    assert rep.measure_sup == pytest.approx(math.log(math.e + 1), abs=1e-9)
    assert rep.grid_size >= 200


def test_variational_sub_shift_target():
    rep = pl.verify_variational(FULL2, GM_INSIDE, F0, pl.Scale(1), 3, 18, tol=1e-2, seed=11)
    assert rep.passed
    assert rep.measure_sup == pytest.approx(LOG_PHI, abs=1e-9)
    assert abs(rep.gap) <= 1e-2
    assert rep.argmax_is_equilibrium


def test_variational_fixed_point_exact():
    fc = pl.potential_from_table(FULL2, 1, {(0,): 0.3, (1,): 0.0})
    rep = pl.verify_variational(FULL2, FIXED0, fc, pl.Scale(1), 3, 20, tol=1e-4, seed=11)
    assert rep.passed
    assert rep.measure_sup == pytest.approx(0.3, abs=1e-12)
    assert abs(rep.gap) <= 1e-4
    assert rep.argmax_is_equilibrium


def test_variational_lower_bound_flag():
    rep = pl.verify_variational(FULL2, pl.whole(), F0, pl.Scale(1), 3, 16, tol=5e-3, seed=2)
    assert rep.lower_bound_ok
    assert rep.measure_sup <= rep.p_bowen.s_high + 5e-3


def test_variational_frequency_band_compares_only():
    spec = pl.frequency_level(0, 0.3, 0.02)
    rep = pl.verify_variational(FULL2, spec, F0, pl.Scale(1), 3, 20, tol=5e-2, measure_grid=60, seed=4)
    assert rep.mode == "compare_only"
    assert rep.passed
    # the family sup is the Bernoulli band entropy maximum
    top = max(
        -p * math.log(p) - (1 - p) * math.log(1 - p)
        for p in (0.28, 0.32)
    )
    assert rep.measure_sup >= top - 1e-3


def test_variational_rejects_union_targets():
    with pytest.raises(ValueError):
        pl.verify_variational(FULL2, pl.finite_union(FIXED0, FIXED1), F0, pl.Scale(1), 3, 12, tol=1e-3)


def test_unions_disjoint_fixed_points():
    rep = pl.verify_unions(FULL2, (FIXED0, FIXED1), F0, pl.Scale(1), 3, 120, tol=5e-3)
    assert rep.passed
    assert max(p.midpoint for p in rep.component_pressures) == pytest.approx(0.0, abs=5e-3)
    assert abs(rep.gap) <= 1e-2


def test_unions_golden_mean_dominates_fixed_point():
    rep = pl.verify_unions(FULL2, (GM_INSIDE, FIXED1), F0, pl.Scale(1), 3, 16, tol=1e-3)
    assert rep.passed
    assert rep.union_pressure.midpoint == pytest.approx(LOG_PHI, abs=5e-3)


def test_unions_nested_components_gap_zero():
    full_rel = pl.sub_sft(((True, True), (True, True)))
    rep = pl.verify_unions(FULL2, (GM_INSIDE, full_rel), F0, pl.Scale(1), 3, 16, tol=1e-3)
    assert rep.passed
    assert rep.gap == 0.0
    assert rep.union_pressure.midpoint == pytest.approx(math.log(2), abs=5e-3)


def test_unions_reject_duplicate_components():
    with pytest.raises(ValueError):
        pl.verify_unions(FULL2, (FIXED0, FIXED0), F0, pl.Scale(1), 3, 12)


def test_unions_equal_pressure_finite_depth_offset():
    # components with identical pressure double the union's cover cost, so
    # the union crossing sits about log(2)/L above the component crossing;
    # at shallow depth that exceeds a tight tolerance and the check reports
    # failure honestly
    mirror = pl.sub_sft(((False, True), (True, True)))
    rep = pl.verify_unions(FULL2, (GM_INSIDE, mirror), F0, pl.Scale(1), 3, 16, tol=1e-3)
    assert not rep.passed
    assert rep.gap > 2e-3
    assert rep.gap == pytest.approx(math.log(2) / 16, abs=2e-2)


def test_gibbs_bound_full_shift():
    rep = pl.verify_gibbs_bound(FULL2, pl.whole(), F0, pl.Scale(1), 3, 24)
    assert rep.passed
    assert not rep.control["bounded"]
    for row in rep.rows:
        assert row["bounded"]
        assert row["s"] < rep.pressure.midpoint


def test_gibbs_bound_weighted_potential():
    rep = pl.verify_gibbs_bound(FULL2, pl.whole(), F10, pl.Scale(1), 3, 24)
    assert rep.passed


def test_gibbs_bound_golden_mean():
    rep = pl.verify_gibbs_bound(GM, pl.whole(), pl.zero_potential(GM), pl.Scale(1), 3, 24)
    assert rep.passed
    # the beta = 0.1 row sits near exponent 0.38
    ss = sorted(row["s"] for row in rep.rows)
    assert ss[0] == pytest.approx(LOG_PHI - 0.1, abs=5e-3)


def test_property_suite_random_trials_green():
    rep = pl.property_suite(seed=2, trials=40)
    assert rep.passed
    assert rep.trials == 40
    assert all(not v for v in rep.failures.values())


def test_property_suite_deterministic():
    a = pl.property_suite(seed=8, trials=10)
    b = pl.property_suite(seed=8, trials=10)
    assert a.failures == b.failures


def test_random_invariant_agreement_small_run():
    rep = pl.random_invariant_agreement(seed=1, trials=6)
    assert rep.passed
    assert rep.max_abs_gap <= 2e-2
    assert len(rep.rows) == 6
