"""Tests for the three-step QoS tuner and its feasibility check."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtpslab.optimizer import (
    OptimizationInput,
    feasibility,
    optimize_profile,
    recommend_utilization,
)
from rtpslab.sim.types import HistoryKind, ReliabilityKind


def test_optimize_reference_case():
    profile = optimize_profile(OptimizationInput(30, 231000, 54.125e6, 0.6))
    assert profile.max_rtps_message_bytes == 1472
    assert profile.retransmission_rate_hz == 60.0
    assert profile.history_cache_capacity == 140
    assert profile.reliability_kind is ReliabilityKind.RELIABLE
    assert profile.history_kind is HistoryKind.KEEP_ALL


def test_optimize_fig7_threshold_setting():
    # 240 Mb/s budget folded into the throughput (utilization 1.0)
    profile = optimize_profile(OptimizationInput(30, 231000, 30e6, 1.0))
    assert profile.history_cache_capacity == 129


def test_retransmission_rate_depends_only_on_publish_rate():
    for u, t, omega in [(1000, 1e6, 0.5), (500000, 9e9, 1.0), (77, 1e4, 0.9)]:
        profile = optimize_profile(OptimizationInput(1, u, t, omega))
        assert profile.retransmission_rate_hz == 2.0


def test_message_cap_follows_mtu():
    assert optimize_profile(OptimizationInput(30, 1000, 1e9, 0.6)).max_rtps_message_bytes == 1472
    jumbo = optimize_profile(OptimizationInput(30, 1000, 1e9, 0.6), mtu_bytes=9000)
    assert jumbo.max_rtps_message_bytes == 9000 - 28


def test_low_budget_clamps_with_warning():
    with pytest.warns(RuntimeWarning):
        profile = optimize_profile(OptimizationInput(30, 231000, 100_000, 0.5))
    assert profile.history_cache_capacity == 1


def test_input_validation():
    with pytest.raises(ValueError):
        OptimizationInput(0, 1000, 1e6, 0.5)
    with pytest.raises(ValueError):
        OptimizationInput(30, 1000, 1e6, 1.5)


@given(
    rate=st.floats(min_value=0.1, max_value=500.0),
    u=st.integers(min_value=1, max_value=500_000),
    t=st.floats(min_value=1e5, max_value=1e10),
    omega=st.floats(min_value=0.05, max_value=1.0),
)
@settings(max_examples=150)
def test_cache_bound_matches_budget(rate, u, t, omega):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        profile = optimize_profile(OptimizationInput(rate, u, t, omega))
    n = profile.history_cache_capacity
    budget = t * omega
    if budget >= u:
        assert n * u <= budget
        assert budget < (n + 1) * u or (budget - n * u) < 1e-6 * budget
    else:
        assert n == 1
    assert profile.retransmission_rate_hz == pytest.approx(2.0 * rate)


def test_scale_consistency_off_boundary():
    base = optimize_profile(OptimizationInput(30, 231000, 54.125e6, 0.6))
    doubled = optimize_profile(OptimizationInput(30, 462000, 108.25e6, 0.6))
    assert doubled.history_cache_capacity == base.history_cache_capacity


def test_feasibility_reference_case():
    report = feasibility(OptimizationInput(30, 231000, 54.125e6, 0.6), packet_delivery_prob=0.8)
    assert report.offered_rate_bytes_per_s == pytest.approx(7.947e6, rel=1e-3)
    assert report.link_budget_bytes_per_s == pytest.approx(32.475e6)
    assert report.feasible


def test_feasibility_lossless_offered_equals_publish():
    report = feasibility(OptimizationInput(30, 231000, 54.125e6, 0.6), packet_delivery_prob=1.0)
    assert report.offered_rate_bytes_per_s == pytest.approx(30 * 231000)


def test_feasibility_overload_flagged():
    # 512 KB at 30 Hz exceeds a 100 Mb/s budget share even before losses
    report = feasibility(OptimizationInput(30, 512000, 12.5e6, 0.6), packet_delivery_prob=0.99)
    assert not report.feasible


def test_recommended_utilization():
    assert recommend_utilization(exclusive=True) == (0.6, 0.7)
    assert recommend_utilization(exclusive=False) == (0.3, 0.3)
