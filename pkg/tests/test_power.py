import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onoffnet.power import (ASYMPTOTIC, EXACT, FIXED_POINT, GRID, PowerStrategy, ThresholdSolution,
                            expected_onoff_utility, first_order_condition, grid_maximizer, on_off_power,
                            solve_threshold, threshold_asymptotic, threshold_exact, threshold_fixed_point)
from onoffnet.channel import substream


def test_on_off_power_examples():
    assert on_off_power(0.5, 0.5) == 0
    assert on_off_power(3.1, 3.0) == 1
    assert on_off_power(1e-9, 0.0) == 1
    with pytest.raises(ValueError):
        on_off_power(-1, 1)


def test_zero_threshold_activates_everyone():
    h = substream(0).standard_exponential(10 ** 5)
    assert PowerStrategy.custom(0.0).powers(h).mean() == 1.0


@given(st.floats(0, 20), st.floats(0, 20), st.floats(0, 10))
def test_policy_monotone_in_h(h1, h2, tau):
    lo, hi = sorted((h1, h2))
    assert on_off_power(lo, tau) <= on_off_power(hi, tau)


def test_strategy_powers():
    h = np.array([0.1, 1.0, 2.5])
    assert list(PowerStrategy.full_power().powers(h)) == [1, 1, 1]
    assert list(PowerStrategy.custom(1.0).powers(h)) == [0, 0, 1]
    s = PowerStrategy.on_off(threshold_exact(1000, 0.5))
    assert s.method == EXACT and s.kind == "onoff"
    with pytest.raises(ValueError):
        PowerStrategy("full", 1.0)
    with pytest.raises(ValueError):
        PowerStrategy("onoff")
    with pytest.raises(ValueError):
        PowerStrategy("sometimes", 1.0)


def test_asymptotic_threshold_values():
    sol = threshold_asymptotic(1000)
    assert sol.tau == pytest.approx(3.042465, abs=1e-6)
    assert sol.q == pytest.approx(math.log(1000) ** 2 / 1000, rel=1e-12)
    assert sol.q == pytest.approx(0.047713, abs=1e-5)
    assert threshold_asymptotic(10 ** 4).tau > sol.tau
    with pytest.raises(ValueError):
        threshold_asymptotic(2)


def test_utility_limits():
    assert expected_onoff_utility(0.0, 1000, 0.5) == 0.0
    assert expected_onoff_utility(math.inf, 1000, 0.5) == 0.0
    assert expected_onoff_utility(200.0, 1000, 0.5) < 1e-80
    vals = expected_onoff_utility(np.array([0.0, 1.0, 2.0]), 1000, 0.5)
    assert vals.shape == (3,)


def test_utility_at_grid_max_matches_exact():
    sol = threshold_exact(1000, 0.5)
    grid_tau = grid_maximizer(1000, 0.5)
    assert sol.objective_value == pytest.approx(expected_onoff_utility(grid_tau, 1000, 0.5), rel=1e-6)
    # the asymptotic threshold is a worse choice for the utility at this n
    assert expected_onoff_utility(threshold_asymptotic(1000).tau, 1000, 0.5) < sol.objective_value


@pytest.mark.parametrize("n", [10 ** 2, 10 ** 3, 10 ** 4])
@pytest.mark.parametrize("ah", [0.1, 0.25, 0.5, 1.0])
def test_exact_matches_grid(n, ah):
    sol = threshold_exact(n, ah)
    assert sol.method == EXACT
    assert abs(first_order_condition(sol.tau, n, ah)) < 1e-6
    assert abs(sol.tau - grid_maximizer(n, ah)) < 1e-3


def test_exact_close_to_asymptotic_and_increasing():
    taus = [threshold_exact(n, 0.5).tau for n in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5)]
    for n, t in zip((10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5), taus):
        assert abs(t - threshold_asymptotic(n).tau) <= 3
    assert all(b > a for a, b in zip(taus, taus[1:]))


def test_exact_falls_back_to_grid():
    sol = threshold_exact(3, 1.0)
    assert sol.method == GRID
    assert sol.tau == pytest.approx(math.log(3), abs=1e-4)


def test_fixed_point_values():
    sol = threshold_fixed_point(1000, 1.0)
    assert sol.tau == pytest.approx(4.0904468447955651, abs=1e-12)  # mpmath root, frozen
    assert sol.tau ** 2 * math.exp(sol.tau) == pytest.approx(1000, rel=1e-12)
    assert threshold_fixed_point(math.e, 1.0).tau == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(ValueError):
        threshold_fixed_point(1, 0.5)


@pytest.mark.parametrize("n", [10 ** 3, 10 ** 4, 10 ** 5])
def test_fixed_point_gap_to_exact(n):
    assert abs(threshold_fixed_point(n, 0.5).tau - threshold_exact(n, 0.5).tau) <= 3


@given(st.sampled_from([ASYMPTOTIC, EXACT, FIXED_POINT]), st.integers(100, 10 ** 5), st.floats(0.05, 1.0))
@settings(max_examples=60, deadline=None)
def test_q_is_exp_minus_tau(method, n, ah):
    sol = solve_threshold(method, n, ah)
    assert sol.q == math.exp(-sol.tau)
    assert 0 < sol.q <= 1


@given(st.integers(100, 10 ** 5), st.floats(0.05, 1.0))
@settings(max_examples=30, deadline=None)
def test_utility_unimodal(n, ah):
    grid = np.arange(0.1, math.log(n), 1e-3)
    vals = expected_onoff_utility(grid, n, ah)
    k = int(np.argmax(vals))
    assert 0 < k < len(grid) - 1
    assert np.all(np.diff(vals[: k + 1]) >= 0)
    assert np.all(np.diff(vals[k:]) <= 0)


@given(st.integers(100, 10 ** 5), st.floats(0.05, 1.0), st.floats(0.01, 100))
@settings(max_examples=30, deadline=None)
def test_threshold_invariant_to_bandwidth(n, ah, W):
    assert threshold_exact(n, ah, W=W).tau == threshold_exact(n, ah).tau


def test_active_count_scales_like_log_squared():
    # observed range over this grid is about 0.198 to 1.36
    for n in (10 ** 3, 3 * 10 ** 3, 10 ** 4, 3 * 10 ** 4, 10 ** 5):
        for ah in (0.1, 0.25, 0.5, 0.75, 1.0):
            ratio = n * threshold_exact(n, ah).q / math.log(n) ** 2
            assert 0.15 <= ratio <= 5


def test_solve_threshold_dispatch():
    assert solve_threshold(ASYMPTOTIC, 1000, 0.5).method == ASYMPTOTIC
    with pytest.raises(ValueError):
        solve_threshold("newton", 1000, 0.5)
    with pytest.raises(ValueError):
        threshold_exact(1000, 0.0)


def test_solution_build():
    s = ThresholdSolution.build(2.0, EXACT, 1.0)
    assert s.q == math.exp(-2.0)
