import math

import numpy as np
import pytest

import pressurelab as pl
from brute import markov_entropy

FULL2 = pl.full_shift(2)
GM = pl.golden_mean_shift()
F0 = pl.zero_potential(FULL2)
F10 = pl.potential_from_table(FULL2, 1, {(0,): 1.0, (1,): 0.0})
LOG_PHI = math.log((1 + math.sqrt(5)) / 2)
LOG2 = math.log(2)


def test_cylinder_measure_uniform():
    mu = pl.bernoulli_measure([0.5, 0.5])
    assert pl.cylinder_measure(mu, (0, 1, 1)) == pytest.approx(0.125, abs=1e-15)


def test_cylinder_measure_bernoulli_literal_product():
    mu = pl.bernoulli_measure([0.3, 0.7])
    assert pl.cylinder_measure(mu, (0, 0, 1)) == pytest.approx(0.063, abs=1e-15)


def test_cylinder_measure_forbidden_word_is_zero():
    mu = pl.equilibrium_measure(GM, pl.zero_potential(GM))
    assert pl.cylinder_measure(mu, (1, 1)) == 0.0


def test_cylinder_measure_empty_word_is_one():
    mu = pl.bernoulli_measure([0.4, 0.6])
    assert pl.cylinder_measure(mu, ()) == 1.0


def test_cylinder_measure_markov_literal_chain_rule():
    mu = pl.markov_measure([[0.9, 0.1], [0.4, 0.6]])
    w = (0, 1, 1, 0)
    pi = mu.initial
    expected = pi[0] * 0.1 * 0.6 * 0.4
    assert pl.cylinder_measure(mu, w) == pytest.approx(expected, rel=1e-12)


def test_local_pressure_uniform_closed_form():
    mu = pl.bernoulli_measure([0.5, 0.5])
    x = tuple(int(b) for b in np.random.default_rng(0).integers(0, 2, size=120))
    tr = pl.local_pressure(mu, F0, x, pl.Scale(2), [10])
    assert tr.values[0][1] == pytest.approx(1.2 * LOG2, rel=1e-12)
    tr100 = pl.local_pressure(mu, F0, x, pl.Scale(2), [100])
    assert tr100.values[0][1] == pytest.approx(1.02 * LOG2, rel=1e-12)


def test_local_pressure_constant_shift():
    mu = pl.bernoulli_measure([0.5, 0.5])
    x = tuple(int(b) for b in np.random.default_rng(1).integers(0, 2, size=64))
    base = pl.local_pressure(mu, F0, x, pl.Scale(2), [5, 10, 20])
    fc = pl.constant_potential(FULL2, 0.31)
    shifted = pl.local_pressure(mu, fc, x, pl.Scale(2), [5, 10, 20])
    for (n1, v1), (n2, v2) in zip(base.values, shifted.values):
        assert n1 == n2
        assert v2 == pytest.approx(v1 + 0.31, rel=1e-12)


def test_local_pressure_needs_enough_symbols():
    mu = pl.bernoulli_measure([0.5, 0.5])
    with pytest.raises(pl.InsufficientDepth):
        pl.local_pressure(mu, F0, (0, 1, 0), pl.Scale(2), [10])


def test_local_pressure_zero_measure_ball_flagged():
    mu = pl.equilibrium_measure(GM, pl.zero_potential(GM))
    # a word with the forbidden block has measure zero under the Parry
    # measure, so its trace rows carry an infinite estimate and are flagged
    x = (1, 1) + (0,) * 30
    tr = pl.local_pressure(mu, pl.zero_potential(GM), x, pl.Scale(1), [4, 8])
    assert tr.zero_measure_n == (4, 5, 6, 7, 8)
    assert all(math.isinf(v) for _, v in tr.values)


def test_sample_orbit_deterministic_and_admissible():
    mu = pl.equilibrium_measure(GM, pl.zero_potential(GM))
    a = pl.sample_orbit(mu, 50, pl.Scale(2), seed=9)
    b = pl.sample_orbit(mu, 50, pl.Scale(2), seed=9)
    assert a.word == b.word
    assert len(a.word) >= 50
    for u, v in zip(a.word, a.word[1:]):
        assert GM.allowed[u][v]


def test_sample_orbit_matches_marginals():
    mu = pl.bernoulli_measure([0.2, 0.8])
    counts = np.zeros(2)
    for seed in range(40):
        w = pl.sample_orbit(mu, 200, pl.Scale(1), seed=seed).word
        for c in w:
            counts[c] += 1
    freq = counts / counts.sum()
    assert abs(freq[0] - 0.2) < 0.02


def test_exact_invariant_pressure_uniform():
    mu = pl.bernoulli_measure([0.5, 0.5])
    assert pl.exact_invariant_pressure(mu, F0) == pytest.approx(LOG2, abs=1e-14)


def test_exact_invariant_pressure_weighted_equilibrium():
    p = math.e / (math.e + 1)
    mu = pl.bernoulli_measure([p, 1 - p])
    got = pl.exact_invariant_pressure(mu, F10)
    assert got == pytest.approx(math.log(math.e + 1), abs=1e-14)


def test_exact_invariant_pressure_parry():
    mu = pl.equilibrium_measure(GM, pl.zero_potential(GM))
    got = pl.exact_invariant_pressure(mu, pl.zero_potential(GM))
    assert got == pytest.approx(LOG_PHI, abs=1e-12)


def test_exact_invariant_pressure_is_entropy_plus_integral():
    rng = np.random.default_rng(12)
    for _ in range(10):
        P = rng.uniform(0.05, 1.0, size=(3, 3))
        P /= P.sum(axis=1, keepdims=True)
        pi = pl.stationary_distribution(P)
        mu = pl.MarkovMeasure(P, pi)
        table = {}
        host = pl.full_shift(3)
        for a in range(3):
            for b in range(3):
                table[(a, b)] = float(rng.uniform(-1, 1))
        f = pl.potential_from_table(host, 2, table)
        got = pl.exact_invariant_pressure(mu, f)
        integral = sum(
            pi[a] * P[a, b] * table[(a, b)] for a in range(3) for b in range(3)
        )
        expected = markov_entropy(P, pi) + integral
        assert got == pytest.approx(expected, rel=1e-10)


def test_exact_invariant_pressure_rejects_non_invariant():
    mu = pl.MarkovMeasure(
        np.array([[0.5, 0.5], [0.5, 0.5]]), np.array([0.9, 0.1])
    )
    with pytest.raises(pl.NonInvariantMeasure):
        pl.exact_invariant_pressure(mu, F0)


def test_exact_invariant_pressure_rejects_reducible_support():
    # two absorbing states: invariant but not ergodic on its support
    mu = pl.MarkovMeasure(np.eye(2), np.array([0.5, 0.5]))
    with pytest.raises(pl.ReducibleSystem):
        pl.exact_invariant_pressure(mu, F0)


def test_point_mass_local_pressure_is_exactly_potential():
    mu = pl.MarkovMeasure(np.eye(2), np.array([1.0, 0.0]))
    fc = pl.potential_from_table(FULL2, 1, {(0,): 0.41, (1,): 0.0})
    x = (0,) * 64
    tr = pl.local_pressure(mu, fc, x, pl.Scale(2), [4, 16, 32])
    for _, v in tr.values:
        assert v == pytest.approx(0.41, abs=1e-12)


def test_mc_estimate_uniform_tight():
    mu = pl.bernoulli_measure([0.5, 0.5])
    est = pl.measure_pressure_mc(mu, F0, pl.Scale(2), (400, 500), samples=20, seed=3)
    assert est.excluded == 0
    assert abs(est.mean - LOG2) < 5e-3
    assert est.samples == 20


def test_mc_estimate_deterministic_and_thread_invariant():
    mu = pl.equilibrium_measure(GM, pl.zero_potential(GM))
    f = pl.zero_potential(GM)
    a = pl.measure_pressure_mc(mu, f, pl.Scale(2), (300, 400), samples=16, seed=7)
    b = pl.measure_pressure_mc(mu, f, pl.Scale(2), (300, 400), samples=16, seed=7)
    c = pl.measure_pressure_mc(mu, f, pl.Scale(2), (300, 400), samples=16, seed=7, threads=4)
    assert a.per_orbit == b.per_orbit == c.per_orbit
    assert a.mean == c.mean


def test_mc_estimate_seed_changes_orbits():
    mu = pl.bernoulli_measure([0.3, 0.7])
    a = pl.measure_pressure_mc(mu, F0, pl.Scale(2), (300, 400), samples=8, seed=1)
    b = pl.measure_pressure_mc(mu, F0, pl.Scale(2), (300, 400), samples=8, seed=2)
    assert a.per_orbit != b.per_orbit
