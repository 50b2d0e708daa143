"""Closed-form hit-ratio formulas: exact values and structural properties."""

import random
from fractions import Fraction

import pytest

from vodsim.analytics import (AnalyticParams, evaluate, hr_mining, hr_none,
                              hr_popularity, hr_random, validate_against_sim)
from vodsim.metrics import MetricsReport


def test_mining_saturation_and_zero():
    assert hr_mining(1, 4, 8, 4).hr_r == 1
    both = hr_mining(0, 4, 8, 10)
    assert both.hr_r == 0 and both.hr_r_plus_g == 0


def test_mining_substitution():
    pair = hr_mining(Fraction(1, 2), 4, 10, 10)
    assert pair.hr_r == Fraction(1, 5)
    assert pair.hr_r_plus_g == Fraction(1, 2)
    assert not pair.clamped


def test_none_is_exactly_zero():
    pair = hr_none()
    assert pair.hr_r == 0
    assert pair.hr_r_plus_g == 0
    assert pair.note


def test_random_substitution_and_saturation():
    pair = hr_random(5, 10, 20)
    assert pair.hr_r == Fraction(1, 4)
    assert pair.hr_r_plus_g == Fraction(1, 2)
    assert hr_random(20, 20, 20).hr_r == 1


def test_popularity_substitution_and_degeneracy():
    pair = hr_popularity(Fraction(4, 5), 5, 10, 20)
    assert pair.hr_r == Fraction(1, 5)
    assert pair.hr_r_plus_g == Fraction(2, 5)
    # P = 1 reduces to the random formula
    assert hr_popularity(1, 5, 10, 20) == hr_random(5, 10, 20)


def test_mining_equals_popularity_when_sets_coincide():
    # mined set size == reachable set size
    for p in (Fraction(1, 3), Fraction(9, 10), 1):
        assert hr_mining(p, 5, 12, 24) == hr_popularity(p, 5, 12, 24)


def test_domain_errors():
    with pytest.raises(ValueError):
        hr_mining(1, 4, 8, 0)
    with pytest.raises(ValueError):
        hr_random(5, 10, 0)
    with pytest.raises(ValueError):
        hr_popularity(1, 5, 10, 0)


def test_clamping_flag():
    pair = hr_mining(1, 8, 16, 10)  # 8/10 fine, 16/10 clamps
    assert pair.hr_r == Fraction(4, 5)
    assert pair.hr_r_plus_g == 1
    assert pair.clamped


def test_params_validation():
    with pytest.raises(ValueError):
        AnalyticParams(cache_slots=0, session_slots=5)
    with pytest.raises(ValueError):
        AnalyticParams(cache_slots=6, session_slots=5)
    with pytest.raises(ValueError):
        AnalyticParams(cache_slots=2, session_slots=5, hit_probability=2)
    with pytest.raises(ValueError):
        AnalyticParams(cache_slots=2, session_slots=5, reachable=10, mined_set_size=11)


def _random_grid(rng):
    v = rng.randint(2, 200)
    vi = rng.randint(1, v)
    s = rng.randint(1, vi)
    S = rng.randint(s, max(s, v))
    p = Fraction(rng.randint(0, 100), 100)
    return p, s, S, v, vi


def test_monotonicity_and_bounds_over_random_grids():
    rng = random.Random(23)
    for _ in range(400):
        p, s, S, v, vi = _random_grid(rng)
        for pair in (hr_mining(p, s, S, vi), hr_random(s, S, v), hr_popularity(p, s, S, v)):
            assert 0 <= pair.hr_r <= 1
            assert 0 <= pair.hr_r_plus_g <= 1
            assert pair.hr_r <= pair.hr_r_plus_g
        # nondecreasing in cache slots and session slots (pre-clamp values only grow)
        if s + 1 <= vi:
            assert hr_mining(p, s + 1, S + 1, vi).hr_r >= hr_mining(p, s, S, vi).hr_r
        assert hr_random(s, S + 1, v).hr_r_plus_g >= hr_random(s, S, v).hr_r_plus_g
        # mining beats popularity whenever its candidate set is no larger
        assert hr_mining(p, s, S, vi).hr_r >= hr_popularity(p, s, S, v).hr_r


def test_evaluate_builds_full_table():
    params = AnalyticParams(cache_slots=5, session_slots=10, reachable=20,
                            mined_set_size=10, hit_probability=Fraction(1, 2))
    table = evaluate(params)
    assert set(table) == {"none", "random", "popularity", "mining"}
    assert table["random"].hr_r == Fraction(1, 4)


def _report(strategy, hr_r, seeks=100):
    return MetricsReport(strategy=strategy, seed=0, seeks=seeks, hr_r=hr_r)


def test_validate_none_exact():
    params = AnalyticParams(cache_slots=5, session_slots=10, reachable=20)
    verdict = validate_against_sim(params, _report("none", 0.0), tolerance=0.0)
    assert verdict.passed


def test_validate_random_within_tolerance():
    params = AnalyticParams(cache_slots=5, session_slots=10, reachable=20)
    verdict = validate_against_sim(params, _report("random", 0.262), tolerance=0.03)
    assert verdict.passed
    assert verdict.analytic_hr_r == 0.25


def test_validate_mismatched_parameters_fail():
    params = AnalyticParams(cache_slots=5, session_slots=10, reachable=40)
    verdict = validate_against_sim(params, _report("random", 0.25), tolerance=0.03)
    assert not verdict.passed  # formula says 0.125 for V=40


def test_validate_refuses_unusable_reports():
    params = AnalyticParams(cache_slots=5, session_slots=10, reachable=20)
    with pytest.raises(ValueError):
        validate_against_sim(params, _report("cooperative", 0.5), 0.03)
    with pytest.raises(ValueError):
        validate_against_sim(params, _report("random", None, seeks=0), 0.03)
