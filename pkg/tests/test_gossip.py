"""State tables, session unions and missing-segment scans."""

import random

import pytest

from vodsim.gossip import (BufferMapMsg, StateTable, missing_segments,
                           session_union)

# The seven buffer-map rows of the worked redundancy-removal example.
EXAMPLE_ROWS = {
    "J": {1, 3, 4, 5, 7, 8, 9, 12},
    "K": {2, 3, 4, 8, 9, 11, 12, 13},
    "L": {7, 8, 9, 12, 13, 14, 15, 16, 17},
    "M": {1, 4, 5, 6, 7, 13, 14, 15, 20},
    "N": {5, 6, 8, 9, 13, 14, 15, 16, 17},
    "P": {1, 2, 3, 4, 5, 6, 7, 8, 11, 12},
    "Q": {1, 2, 4, 5, 6, 7, 11, 12, 14, 15},
}


def example_table():
    table = StateTable()
    for i, (name, segs) in enumerate(sorted(EXAMPLE_ROWS.items())):
        table.apply(BufferMapMsg(sender=i, segments=frozenset(segs),
                                 playhead=0, issued_at=0.0))
    return table


def test_example_union():
    union = session_union(example_table(), set())
    assert union == set(range(1, 10)) | set(range(11, 18)) | {20}


def test_example_missing_segments():
    union = session_union(example_table(), set())
    assert missing_segments(union, 1, 20) == [10, 18, 19]


def test_union_empty_table_is_own_cache():
    assert session_union(StateTable(), {2}) == {2}


def test_missing_nothing_when_union_covers_range():
    assert missing_segments(set(range(0, 30)), 5, 25) == []


def test_missing_rejects_inverted_range():
    with pytest.raises(ValueError):
        missing_segments(set(), 5, 4)


def test_union_matches_fold_oracle():
    rng = random.Random(13)
    for _ in range(50):
        table = StateTable()
        sets = []
        for pid in range(20):
            segs = frozenset(rng.sample(range(100), rng.randint(0, 15)))
            sets.append(set(segs))
            table.apply(BufferMapMsg(pid, segs, 0, 0.0))
        own = set(rng.sample(range(100), 5))
        expected = set(own)
        for s in sets:
            expected |= s
        assert session_union(table, own) == expected


def test_missing_matches_membership_scan_and_identities():
    rng = random.Random(17)
    for _ in range(100):
        union = set(rng.sample(range(60), rng.randint(0, 40)))
        lo = rng.randint(0, 30)
        hi = lo + rng.randint(0, 25)
        missing = missing_segments(union, lo, hi)
        assert missing == [s for s in range(lo, hi + 1) if s not in union]
        assert set(missing) & union == set()
        assert set(missing) | (union & set(range(lo, hi + 1))) == set(range(lo, hi + 1))


def test_union_idempotent_commutative_monotone():
    rng = random.Random(19)
    for _ in range(30):
        msgs = [
            BufferMapMsg(pid, frozenset(rng.sample(range(50), rng.randint(0, 10))), 0, 0.0)
            for pid in range(8)
        ]
        t1, t2 = StateTable(), StateTable()
        for m in msgs:
            t1.apply(m)
        for m in reversed(msgs):
            t2.apply(m)
        own = {49}
        # commutative (row order irrelevant) and idempotent (reapply changes nothing)
        assert session_union(t1, own) == session_union(t2, own)
        before = session_union(t1, own)
        t1.apply(msgs[0])
        assert session_union(t1, own) == before
        # monotone: adding a row never shrinks the union
        t1.apply(BufferMapMsg(99, frozenset({48}), 0, 0.0))
        assert session_union(t1, own) >= before


def test_stale_rows_are_dropped():
    table = StateTable()
    table.apply(BufferMapMsg(1, frozenset({1}), 0, issued_at=0.0))
    table.apply(BufferMapMsg(2, frozenset({2}), 0, issued_at=25.0))
    table.drop_stale(now=30.0, max_age=30.0)
    assert set(table.rows) == {1, 2}
    table.drop_stale(now=30.5, max_age=30.0)
    assert set(table.rows) == {2}


def test_holders_sorted():
    table = example_table()
    assert table.holders(20) == [3]          # row M only
    assert table.holders(9) == [0, 1, 2, 4]  # J, K, L, N
    assert table.holders(10) == []
