"""Unit and property tests for the closed-form traffic model."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtpslab.model import (
    FragmentationPlan,
    LayerThroughputs,
    NumericDomainError,
    TrafficParams,
    bottleneck_throughput,
    burst_size,
    delivery_rate_table,
    fragmentation_plan,
    history_cache_limit,
    iterate_round_traffic,
    publish_rate,
    round_traffic_recursion,
    staircase_delta,
    steady_state_rate,
    steady_state_round_traffic,
    unit_delivery_prob,
)


# -- publish rate and bottleneck ---------------------------------------------

def test_publish_rate_values():
    assert publish_rate(30, 65000) == 1_950_000
    assert publish_rate(1, 1) == 1
    assert publish_rate(30, 231000) == 6_930_000


def test_publish_rate_rejects_nonpositive():
    with pytest.raises(ValueError):
        publish_rate(0, 1000)
    with pytest.raises(ValueError):
        publish_rate(30, 0)


def test_bottleneck_is_minimum():
    assert bottleneck_throughput(LayerThroughputs(300e6, 280e6, 54.125e6)) == 54.125e6
    assert bottleneck_throughput(LayerThroughputs(5.0, 5.0, 5.0)) == 5.0
    assert bottleneck_throughput(LayerThroughputs(275e6, 330e6, 3.0e6)) == 3.0e6


def test_layer_throughputs_must_be_positive():
    with pytest.raises(ValueError):
        LayerThroughputs(1.0, -1.0, 1.0)


# -- fragmentation ------------------------------------------------------------

def test_fragmentation_default_message_cap():
    plan = fragmentation_plan(65000, 65536, 1500)
    assert plan.n_rtps_messages == 1
    assert plan.total_packets == 44


def test_fragmentation_sub_mtu():
    plan = fragmentation_plan(1000, 65536, 1500)
    assert plan.n_rtps_messages == 1
    assert plan.total_packets == 1


def test_fragmentation_single_packet_messages():
    plan = fragmentation_plan(231000, 1472, 1500)
    assert plan.n_rtps_messages == 157
    assert plan.total_packets == 157
    assert all(p == 1 for p in plan.packets_per_message)


def test_fragmentation_last_message_remainder():
    # 5 full 64 KiB messages of 44 packets, then 2320 B -> 2 packets
    plan = fragmentation_plan(330000, 65536, 1500)
    assert plan.packets_per_message == (44, 44, 44, 44, 44, 2)
    assert plan.total_packets == 222


def test_fragmentation_rejects_zero_sizes():
    for args in [(0, 65536, 1500), (1000, 0, 1500), (1000, 65536, 0)]:
        with pytest.raises(ValueError):
            fragmentation_plan(*args)


@given(
    u=st.integers(min_value=1, max_value=2_000_000),
    m=st.integers(min_value=100, max_value=70_000),
    mtu=st.integers(min_value=1, max_value=9000),
)
@settings(max_examples=200, deadline=None)
def test_fragmentation_invariants(u, m, mtu):
    plan = fragmentation_plan(u, m, mtu)
    assert plan.n_rtps_messages == math.ceil(u / m)
    assert plan.n_rtps_messages >= 1
    assert plan.total_packets == sum(plan.packets_per_message)
    assert all(p >= 1 for p in plan.packets_per_message)
    if m <= mtu:
        assert all(p == 1 for p in plan.packets_per_message)


@given(u=st.integers(min_value=1, max_value=5_000_000))
def test_fragmentation_free_at_recommended_cap(u):
    plan = fragmentation_plan(u, 1472, 1500)
    assert all(p == 1 for p in plan.packets_per_message)


def test_unit_delivery_prob_values():
    assert unit_delivery_prob(1.0, 44) == 1.0
    assert unit_delivery_prob(0.999, 22) == pytest.approx(0.9782294672887404, rel=1e-12)
    assert unit_delivery_prob(0.9, 44) == pytest.approx(0.009697737297875247, rel=1e-12)
    with pytest.raises(ValueError):
        unit_delivery_prob(0.5, 0)
    with pytest.raises(ValueError):
        unit_delivery_prob(1.5, 3)


def test_traffic_params_derives_unit_prob():
    params = TrafficParams(30, 65000, 60, 0.9, 44)
    assert params.unit_delivery_prob == pytest.approx(0.9**44)
    with pytest.raises(ValueError):
        TrafficParams(30, 65000, 60, 1.2, 44)


# -- staircase ---------------------------------------------------------------

def test_staircase_integer_ratio():
    assert all(staircase_delta(30, 10, k) == 3 for k in range(1, 50))


def test_staircase_floor_arithmetic():
    assert staircase_delta(30, 60, 1) == 0
    assert staircase_delta(30, 60, 2) == 1


def test_staircase_long_run_mean():
    n = 0.333
    total = sum(staircase_delta(30, n, k) for k in range(1, 100_001))
    assert total / 100_000 == pytest.approx(30 / n, rel=1e-4)


def test_staircase_rejects_round_zero():
    with pytest.raises(ValueError):
        staircase_delta(30, 10, 0)


# -- round recursion and steady state ------------------------------------------

def test_recursion_first_round_no_backlog():
    assert round_traffic_recursion(0.0, 1, 65000, 0.9, 0.5) == 65000


def test_recursion_lossless_backlog_cleared():
    assert round_traffic_recursion(100.0, 0, 0, 1.0, 1.0) == 0.0


def test_recursion_fixed_point_is_stationary():
    q = 0.9**44
    x_star = steady_state_round_traffic(30, 65000, 1 / 3, 0.9, q)
    stepped = round_traffic_recursion(x_star, 30 / (1 / 3), 65000, 0.9, q)
    assert stepped == pytest.approx(x_star, rel=1e-9)


def test_steady_state_round_traffic_values():
    q = 0.9**44
    assert steady_state_round_traffic(30, 65000, 1 / 3, 0.9, q) == pytest.approx(29.567e6, rel=1e-3)
    assert steady_state_round_traffic(30, 65000, 60, 0.9, q) == pytest.approx(164_261.6, rel=1e-4)
    # lossless: q = 1 collapses the denominator to 1
    assert steady_state_round_traffic(30, 65000, 60, 1.0, 1.0) == pytest.approx(30 * 65000 / 60)


@given(
    p=st.floats(min_value=0.0, max_value=1.0),
    k=st.integers(min_value=1, max_value=300),
    r=st.floats(min_value=0.1, max_value=200.0),
    u=st.integers(min_value=1, max_value=1_000_000),
    n=st.floats(min_value=0.05, max_value=200.0),
)
@settings(max_examples=200)
def test_fixed_point_equivalence(p, k, r, u, n):
    """1000 recursion steps land on the closed form, and the contraction
    factor stays below one for every delivery probability."""
    q = p**k
    contraction = p * p * (1.0 - q)
    assert contraction < 1.0
    x_iter = iterate_round_traffic(r, u, n, p, q, rounds=1000)
    x_closed = steady_state_round_traffic(r, u, n, p, q)
    assert x_iter == pytest.approx(x_closed, rel=1e-6)


@given(
    p=st.floats(min_value=0.0, max_value=1.0),
    k=st.integers(min_value=1, max_value=300),
    r=st.floats(min_value=0.1, max_value=200.0),
    u=st.integers(min_value=1, max_value=1_000_000),
)
@settings(max_examples=200)
def test_round_traffic_n_invariance(p, k, r, u):
    q = p**k
    reference = None
    for n in (1 / 3, 1.0, 30.0, 60.0):
        value = n * steady_state_round_traffic(r, u, n, p, q)
        if reference is None:
            reference = value
        else:
            assert value == pytest.approx(reference, rel=1e-9)


def test_steady_state_rate_values():
    assert steady_state_rate(123.0, 1.0, 44) == 123.0
    assert steady_state_rate(1.0, 0.9, 44) == pytest.approx(5.0542, abs=1e-4)
    assert steady_state_rate(1.0, 0.9, 1) == pytest.approx(1.088139, abs=1e-6)


def test_steady_state_rate_equals_n_times_round_traffic():
    q = 0.9**44
    rate = steady_state_rate(30 * 65000, 0.9, 44)
    for n in (1 / 3, 1.0, 30.0, 60.0):
        assert n * steady_state_round_traffic(30, 65000, n, 0.9, q) == pytest.approx(rate, rel=1e-12)


def test_steady_state_rate_linear_in_publish_rate():
    amp1 = steady_state_rate(1.0, 0.93, 44)
    for r_pub in (7.0, 1e3, 6.93e6):
        assert steady_state_rate(r_pub, 0.93, 44) == pytest.approx(r_pub * amp1, rel=1e-12)


def test_steady_state_rate_monotonicity():
    """Non-decreasing in packets per unit everywhere; non-increasing in p on
    the high-reliability flank (the surface peaks near p = (2/(k+2))^(1/k),
    so the global claim holds only past the peak)."""
    for p in (0.3, 0.9, 0.99):
        values = [steady_state_rate(1.0, p, k) for k in (1, 2, 5, 44, 220)]
        assert values == sorted(values)
    for k in (1, 5, 44, 220):
        ps = [0.98 + 0.002 * i for i in range(11)]
        values = [steady_state_rate(1.0, p, k) for p in ps]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))


def test_burst_values():
    q = 0.9**44
    assert burst_size(65000, 30, 1 / 3, 1.0, 1.0) == 65000
    assert burst_size(65000, 30, 1 / 3, 0.9, q) == pytest.approx(23.782e6, rel=1e-3)
    assert burst_size(65000, 30, 60, 0.9, q) == pytest.approx(196_761.6, rel=1e-4)


def test_burst_decreases_with_retransmission_rate():
    q = 0.9**44
    values = [burst_size(65000, 30, n, 0.9, q) for n in (1 / 3, 1, 10, 30, 60)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_degenerate_denominator_raises():
    with pytest.raises(NumericDomainError):
        steady_state_round_traffic(30, 65000, 0.0, 0.9, 0.5)


# -- history cache sizing ------------------------------------------------------

def test_history_cache_limit_values():
    assert history_cache_limit(30e6, 1.0, 231000) == 129
    assert history_cache_limit(54.125e6, 0.6, 231000) == 140
    assert history_cache_limit(1000.0, 1.0, 1000) == 1


def test_history_cache_limit_clamps_to_one_with_warning():
    with pytest.warns(RuntimeWarning):
        assert history_cache_limit(500.0, 1.0, 1000) == 1


def test_history_cache_limit_rejects_bad_inputs():
    with pytest.raises(ValueError):
        history_cache_limit(-1.0, 0.5, 1000)
    with pytest.raises(ValueError):
        history_cache_limit(1e6, 0.0, 1000)
    with pytest.raises(ValueError):
        history_cache_limit(1e6, 1.5, 1000)


@given(
    link=st.floats(min_value=1e3, max_value=1e9),
    omega=st.floats(min_value=0.01, max_value=1.0),
    u=st.integers(min_value=1, max_value=1_000_000),
)
@settings(max_examples=200)
def test_history_cache_limit_floor_bounds(link, omega, u):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        n = history_cache_limit(link, omega, u)
    budget = link * omega
    if budget >= u:
        assert n * u <= budget < (n + 1) * u or math.isclose(n * u, budget, rel_tol=1e-12)
    else:
        assert n == 1


# -- delivery-rate table --------------------------------------------------------

def test_delivery_table_values():
    table = delivery_rate_table([33000, 330000], [0.0, 0.001, 0.01])
    assert table[(33000, 0.0)] == 1.0
    assert table[(33000, 0.001)] == pytest.approx(0.9782, abs=1e-4)
    # 222 packets once the 64 KiB message remainders are counted
    assert table[(330000, 0.01)] == pytest.approx(0.99**222, rel=1e-12)


def test_delivery_table_monotone_on_grid():
    payloads = [33000 * i for i in range(1, 11)]
    table = delivery_rate_table(payloads, [0.001, 0.01])
    for per in (0.001, 0.01):
        row = [table[(u, per)] for u in payloads]
        assert all(a > b for a, b in zip(row, row[1:]))
    for u in payloads:
        assert table[(u, 0.001)] > table[(u, 0.01)]


def test_delivery_table_rejects_empty_and_bad_per():
    with pytest.raises(ValueError):
        delivery_rate_table([], [0.01])
    with pytest.raises(ValueError):
        delivery_rate_table([1000], [1.5])


def test_plan_is_value_object():
    plan = fragmentation_plan(1000, 65536, 1500)
    assert plan == FragmentationPlan(1000, 65536, 1500, 1, (1,), 1)
