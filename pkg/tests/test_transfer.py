"""Provider scoring (delivery-rate history), selection and transfer timing."""

import random

import pytest

from vodsim.transfer import (FlowRegistry, SegmentRequest, TransferHistory,
                             choose_provider, score_provider, transfer_time)


def history_with_counts(counts, window):
    """Build a history whose ring for provider 1 holds exactly `counts`."""
    h = TransferHistory(window=window, period_s=10.0)
    for i, c in enumerate(counts):
        if c == 0:
            h.record(1, now=i * 10.0, segments=0)
        else:
            h.record(1, now=i * 10.0, segments=c)
    return h


def test_score_mean_of_equal_counts():
    assert score_provider(history_with_counts([5, 5, 5], window=3), 1) == 5.0


def test_score_single_period_identity():
    assert score_provider(history_with_counts([7], window=1), 1) == 7.0


def test_score_sum_then_divide():
    assert score_provider(history_with_counts([3, 6, 9], window=3), 1) == 6.0


def test_score_cold_start_and_missing_periods():
    h = TransferHistory(window=4, period_s=10.0)
    assert score_provider(h, 99) == 0.0
    h.record(1, now=0.0)
    # Three empty periods later the single delivery still averages over 4.
    assert score_provider(h, 1, now=35.0) == pytest.approx(1 / 4)
    # Once it falls out of the window the score returns to zero.
    assert score_provider(h, 1, now=45.0) == 0.0


def test_score_matches_sum_oracle_on_random_histories():
    rng = random.Random(29)
    for _ in range(2000):
        window = rng.randint(1, 8)
        counts = [rng.randint(0, 20) for _ in range(rng.randint(1, window))]
        h = history_with_counts(counts, window)
        assert score_provider(h, 1) == sum(counts) / window


def test_argmax_invariant_under_scaling():
    rng = random.Random(31)
    for _ in range(200):
        window = rng.randint(1, 5)
        raw = {pid: [rng.randint(0, 9) for _ in range(window)] for pid in range(4)}
        scale = rng.randint(2, 7)

        def build(mult):
            h = TransferHistory(window=window, period_s=10.0)
            for pid, counts in raw.items():
                for i, c in enumerate(counts):
                    h.record(pid, now=i * 10.0, segments=c * mult)
            return h

        playheads = {pid: 0 for pid in range(4)}
        base = choose_provider(range(4), build(1), playheads, 0, lambda q: 0.0)
        scaled = choose_provider(range(4), build(scale), playheads, 0, lambda q: 0.0)
        assert base == scaled


def test_choose_provider_trivials():
    h = TransferHistory(window=1)
    assert choose_provider([3], h, {3: 0}, 0, lambda q: 1.0) == 3
    h.record(0, 0.0, 6)
    h.record(1, 0.0, 2)
    assert choose_provider([0, 1], h, {0: 50, 1: 0}, 0, lambda q: 1.0) == 0
    assert choose_provider([], h, {}, 0, lambda q: 1.0) is None


def test_choose_provider_matches_reference_sort():
    rng = random.Random(37)
    for _ in range(300):
        cands = list(range(10))
        h = TransferHistory(window=2, period_s=10.0)
        playheads, lats = {}, {}
        for pid in cands:
            for _i in range(rng.randint(0, 2)):
                h.record(pid, now=_i * 10.0, segments=rng.randint(0, 5))
            playheads[pid] = rng.randint(0, 100)
            lats[pid] = rng.choice([5.0, 10.0, 20.0])
        my = 40
        expected = sorted(
            cands,
            key=lambda p: (-score_provider(h, p), abs(playheads[p] - my), lats[p], p),
        )[0]
        got = choose_provider(cands, h, playheads, my, lambda q: lats[q])
        assert got == expected


def test_transfer_time_rate_equals_size():
    assert transfer_time(512_000, 512_000, 512_000, 1, 1) == 1.0


def test_transfer_time_fair_share_split():
    # two concurrent uploads through a 512 kbps uplink get 256 kbps each
    assert transfer_time(512_000, 512_000, 10_000_000, 2, 1) == 2.0


def test_transfer_time_bottleneck_is_min_share():
    rng = random.Random(41)
    for _ in range(300):
        bits = rng.choice([128_000, 512_000, 1_024_000])
        up, down = rng.choice([256_000, 512_000, 2_000_000]), rng.choice([512_000, 1_000_000])
        fu, fd = rng.randint(1, 5), rng.randint(1, 5)
        expected = bits / min(up / fu, down / fd)
        assert transfer_time(bits, up, down, fu, fd) == pytest.approx(expected)


def test_transfer_time_validation():
    with pytest.raises(ValueError):
        transfer_time(0, 1, 1)
    with pytest.raises(ValueError):
        transfer_time(1, 1, 1, provider_flows=0)


def test_flow_registry_share_accounting_conserves_capacity():
    rng = random.Random(43)
    flows = FlowRegistry()
    capacity = 512_000.0
    active = []
    for _ in range(200):
        if active and rng.random() < 0.4:
            prov, req = active.pop(rng.randrange(len(active)))
            flows.finish(prov, req)
        else:
            prov, req = rng.randint(0, 4), rng.randint(5, 9)
            flows.start(prov, req)
            active.append((prov, req))
        # fair shares at any endpoint never add up past its capacity
        for prov in range(5):
            n = flows.uploads(prov)
            if n:
                assert n * (capacity / n) <= capacity + 1e-9


def test_segment_request_requires_future_deadline():
    with pytest.raises(ValueError):
        SegmentRequest(requester=1, segment=2, issued_at=5.0,
                       scope="SESSION", deadline=5.0)
