"""Viewer trace generation and trace files."""

import random

import numpy as np
import pytest
from scipy import stats

from vodsim.domain import Video
from vodsim.workload import (LEAVE, SEEK, WorkloadParams, _JumpSampler,
                             dumps_traces, generate_traces, parse_traces)

VIDEO = Video(600)


def test_regeneration_is_bit_identical():
    params = WorkloadParams(peer_count=40, seed=5)
    a = dumps_traces(generate_traces(params, VIDEO))
    b = dumps_traces(generate_traces(params, VIDEO))
    assert a == b


def test_zero_seek_rate_means_no_seeks():
    params = WorkloadParams(peer_count=30, seek_rate=0.0, seed=1)
    for trace in generate_traces(params, VIDEO):
        assert all(ev.kind != SEEK for ev in trace.events)


def test_all_short_sessions_leave_before_300s():
    params = WorkloadParams(peer_count=50, short_session_fraction=1.0, seed=2)
    for trace in generate_traces(params, VIDEO):
        leaves = [ev for ev in trace.events if ev.kind == LEAVE]
        assert len(leaves) == 1
        assert leaves[0] is trace.events[-1]
        assert 30.0 <= leaves[0].time - trace.arrival_time < 300.0


def test_no_short_sessions_when_fraction_zero():
    params = WorkloadParams(peer_count=50, short_session_fraction=0.0, seed=2)
    for trace in generate_traces(params, VIDEO):
        assert all(ev.kind != LEAVE for ev in trace.events)


def test_targets_always_inside_video():
    params = WorkloadParams(peer_count=80, seek_rate=1 / 30, seed=3)
    for trace in generate_traces(params, VIDEO):
        for ev in trace.events:
            if ev.kind == SEEK:
                assert 0 <= ev.target < VIDEO.segment_count


def test_event_times_strictly_increase_and_leave_is_last():
    params = WorkloadParams(peer_count=60, seek_rate=1 / 40,
                            short_session_fraction=0.5, pause_rate=1 / 200, seed=4)
    for trace in generate_traces(params, VIDEO):
        times = [ev.time for ev in trace.events]
        assert times == sorted(times)
        assert len(set(times)) == len(times)
        for i, ev in enumerate(trace.events):
            if ev.kind == LEAVE:
                assert i == len(trace.events) - 1


def test_arrivals_are_poisson_ordered():
    params = WorkloadParams(peer_count=100, arrival_rate=0.5, seed=6)
    traces = generate_traces(params, VIDEO)
    arrivals = [t.arrival_time for t in traces]
    assert arrivals == sorted(arrivals)
    assert [t.peer_id for t in traces] == list(range(100))


def test_uniform_sampler_chi_square():
    rng = random.Random(7)
    sampler = _JumpSampler("uniform", 0.8, 200)
    counts = np.zeros(50)
    for _ in range(20000):
        counts[sampler.rank(rng, 50)] += 1
    _, p = stats.chisquare(counts)
    assert p > 0.001


def test_zipf_sampler_matches_power_law_weights():
    rng = random.Random(8)
    alpha, n = 0.8, 40
    sampler = _JumpSampler("zipf", alpha, 200)
    counts = np.zeros(n)
    draws = 40000
    for _ in range(draws):
        counts[sampler.rank(rng, n)] += 1
    weights = np.arange(1, n + 1, dtype=float) ** -alpha
    expected = draws * weights / weights.sum()
    _, p = stats.chisquare(counts, expected)
    assert p > 0.001


def test_uniform_end_to_end_targets_uniform_over_forward_range():
    """First-seek forward targets, normalised by their admissible range,
    should be uniform; checked with a chi-square over deciles."""
    params = WorkloadParams(peer_count=4000, seek_rate=1 / 20,
                            seek_distribution="uniform",
                            short_session_fraction=0.0, seed=9)
    traces = generate_traces(params, VIDEO)
    normalised = []
    for trace in traces:
        first = next((ev for ev in trace.events if ev.kind == SEEK), None)
        if first is None:
            continue
        position = min(VIDEO.segment_count - 1, int(first.time - trace.arrival_time))
        lo = position + 3
        if first.target >= lo:  # forward seeks only
            span = VIDEO.segment_count - lo
            if span >= 10:
                normalised.append((first.target - lo) / span)
    assert len(normalised) > 1000
    counts, _ = np.histogram(normalised, bins=10, range=(0.0, 1.0))
    _, p = stats.chisquare(counts)
    assert p > 0.001


def test_forward_fraction_matches_direction_mix():
    params = WorkloadParams(peer_count=3000, seek_rate=1 / 25,
                            short_session_fraction=0.0, seed=10)
    traces = generate_traces(params, VIDEO)
    forward = backward = 0
    for trace in traces:
        position = 0.0
        last_t = trace.arrival_time
        for ev in trace.events:
            if ev.kind != SEEK:
                continue
            position = min(VIDEO.segment_count - 1, position + (ev.time - last_t))
            if ev.target > position:
                forward += 1
            else:
                backward += 1
            position = float(ev.target)
            last_t = ev.time
    frac = forward / (forward + backward)
    assert 0.65 < frac < 0.75


def test_rejects_invalid_params():
    with pytest.raises(ValueError):
        generate_traces(WorkloadParams(peer_count=0), VIDEO)
    with pytest.raises(ValueError):
        generate_traces(WorkloadParams(short_session_fraction=1.5), VIDEO)
    with pytest.raises(ValueError):
        generate_traces(WorkloadParams(seek_distribution="pareto"), VIDEO)


def test_trace_file_round_trip_is_exact():
    params = WorkloadParams(peer_count=50, seek_rate=1 / 40,
                            short_session_fraction=0.4, pause_rate=1 / 300, seed=11)
    traces = generate_traces(params, VIDEO)
    text = dumps_traces(traces)
    parsed = parse_traces(text)
    assert dumps_traces(parsed) == text
    assert parsed == traces


def test_parse_rejects_malformed_events():
    with pytest.raises(ValueError):
        parse_traces("0 1.000000; 2.0 SEEK 3 extra\n")
