"""Tests for scanning, the overlapping (N, Q) rule and pooling."""

import numpy as np
import pytest

from changeset_scan.core.errors import DomainError
from changeset_scan.core.lattice import Lattice, Point, PointSet
from changeset_scan.core.scan import (
    SENTINEL,
    OverlapRule,
    ScanField,
    limiting_scan,
    pool,
    scan,
    select_relevant,
)
from changeset_scan.core.slicing import FrameSequence, Orientation


def test_rule_parse_and_bounds():
    """Rules parse from 'N,Q' or '(N,Q)' and enforce even N >= 4, 1 <= Q <= N-2."""
    assert OverlapRule.parse("6,2") == OverlapRule(6, 2)
    assert OverlapRule.parse("(4,1)") == OverlapRule(4, 1)
    assert str(OverlapRule(6, 4)) == "(6,4)"
    for window, run in ((5, 1), (2, 1), (4, 3), (6, 0)):
        with pytest.raises(DomainError):
            OverlapRule(window, run)
    with pytest.raises(DomainError):
        OverlapRule.parse("six")


def test_limiting_scan_on_fragment(fragment):
    """Entering windows point at column 5, leaving windows at column 12, the rest at r + N/2 - 1."""
    lat, truth = fragment
    field = limiting_scan(truth, Orientation.HORIZONTAL, 6)
    row = field.positions[9]
    assert list(row[:15]) == [5, 5, 5, 5, 5, 8, 9, 12, 12, 12, 12, 12, 15, 16, 17]
    assert not np.any(row[15:])
    assert list(field.positions[0, :15]) == [r + 2 for r in range(1, 16)]


def test_rule_selects_fragment_endpoints(fragment):
    """(6,4) and (4,2) both keep columns 5 and 12 on row 10 and nothing elsewhere."""
    lat, truth = fragment
    for rule in (OverlapRule(6, 4), OverlapRule(4, 2)):
        relevant = select_relevant(limiting_scan(truth, Orientation.HORIZONTAL, rule.window), rule)
        assert len(relevant) == lat.rows
        assert relevant[9] == PointSet.of(lat, [(10, 5), (10, 12)])
        assert all(not relevant[i] for i in range(lat.rows) if i != 9)


def test_runs_into_sentinel_never_fire():
    """A run needing a tail offset is dropped."""
    lat = Lattice(4, 8)
    positions = np.array([[1, 2, 3, 4, 5, 0, 0, 0]] * 4, dtype=np.int64)
    positions[1] = [2, 3, 4, 7, 7, 0, 0, 0]
    field = ScanField(Orientation.HORIZONTAL, 4, 0.0, positions, np.zeros(4, dtype=bool), lat)
    assert select_relevant(field, OverlapRule(4, 1))[1] == PointSet.of(lat, [(2, 7)])
    assert not select_relevant(field, OverlapRule(4, 2))[1]


def test_scan_field_rejects_bad_tail():
    """Non-sentinel tail entries are rejected."""
    lat = Lattice(4, 8)
    positions = np.array([[1, 2, 3, 4, 5, 0, 0, 6]] * 4, dtype=np.int64)
    with pytest.raises(DomainError):
        ScanField(Orientation.HORIZONTAL, 4, 0.0, positions, np.zeros(4, dtype=bool), lat)


def test_rule_window_must_match_field(fragment):
    """Selecting with a different N than the scan is an error."""
    _, truth = fragment
    field = limiting_scan(truth, Orientation.HORIZONTAL, 6)
    with pytest.raises(DomainError):
        select_relevant(field, OverlapRule(4, 1))


def test_scan_shape_and_sentinel_tail():
    """Every slice has L - N + 1 genuine entries followed by sentinels."""
    rng = np.random.default_rng(3)
    seq = FrameSequence(rng.standard_normal((5, 6, 10)))
    field = scan(seq, Orientation.VERTICAL, 4, 0.1)
    assert field.positions.shape == (10, 6)
    assert np.all(field.positions[:, 3:] == SENTINEL)
    assert np.all(field.positions[:, :3] >= 1)
    assert field.gamma == pytest.approx(0.1)
    assert not field.degenerate.any()


def test_scan_flat_slices_are_degenerate():
    """Constant frames give zero statistics and the first break in every window."""
    seq = FrameSequence(np.ones((3, 5, 8)))
    field = scan(seq, Orientation.HORIZONTAL, 4, 0.0)
    assert field.degenerate.all()
    assert list(field.positions[0, :5]) == [1, 2, 3, 4, 5]


def test_scan_noise_free_step_hits_boundary():
    """A clean column step is located in every window that crosses it."""
    data = np.zeros((4, 5, 12))
    data[:, :, 6:] = np.array([1.0, -1.0, 2.0, -2.0])[:, None, None]
    field = scan(FrameSequence(data), Orientation.HORIZONTAL, 6, 0.2)
    for r in range(2, 7):
        assert field.entry(3, r) == (3, 6)


def test_scan_workers_agree():
    """Threaded scanning gives the same field as the serial loop."""
    rng = np.random.default_rng(5)
    seq = FrameSequence(rng.standard_normal((20, 8, 9)))
    serial = scan(seq, Orientation.HORIZONTAL, 6, 0.0)
    threaded = scan(seq, Orientation.HORIZONTAL, 6, 0.0, workers=3)
    np.testing.assert_array_equal(serial.positions, threaded.positions)


def test_entries_include_sentinels():
    """entries() walks every stored offset, reporting sentinels as coordinate 0."""
    lat = Lattice(4, 8)
    positions = np.array([[1, 2, 3, 4, 5, 0, 0, 0]] * 4, dtype=np.int64)
    field = ScanField(Orientation.HORIZONTAL, 4, 0.0, positions, np.zeros(4, dtype=bool), lat)
    entries = list(field.entries())
    assert len(entries) == 32
    assert entries[0] == (1, 1, 1, 1)
    assert entries[5] == (1, 6, 1, 0)


def test_pool_unions_and_checks_lattice():
    """G is the union of all relevant sets on one lattice."""
    lat = Lattice(5, 5)
    h = [PointSet.of(lat, [(1, 2)]), PointSet.empty(lat)]
    v = [PointSet.of(lat, [(1, 2), (4, 1)])]
    assert pool(h, v) == PointSet.of(lat, [(1, 2), (4, 1)])
    assert pool([], [], lat) == PointSet.empty(lat)
    with pytest.raises(DomainError):
        pool([], [])
    with pytest.raises(DomainError):
        pool(h, [PointSet.of(Lattice(6, 6), [(1, 1)])])
    assert Point(4, 1) in pool(h, v)


def noisy_step_field(N, seed=13):
    rng = np.random.default_rng(seed)
    d, m, n = 200, 8, 30
    data = rng.standard_normal((d, m, n))
    signs = np.where(np.arange(d) % 2 == 0, 1.0, -1.0)
    data[:, :4, 15:] += signs[:, None, None]
    return scan(FrameSequence(data), Orientation.HORIZONTAL, N, 0.0)


def test_selection_shrinks_as_q_grows():
    """A larger run length Q keeps a subset of the points kept by a smaller one."""
    field = noisy_step_field(6)
    selections = [select_relevant(field, OverlapRule(6, q)) for q in range(1, 5)]
    assert any(selections[0])
    for looser, stricter in zip(selections, selections[1:]):
        for loose, strict in zip(looser, stricter):
            assert strict.issubset(loose)


def test_selection_matches_direct_runs_on_noisy_field():
    """Only genuine offsets take part; each slice keeps at most L - N + 1 - Q points."""
    N = 6
    field = noisy_step_field(N)
    offsets = field.lattice.cols - N + 1
    for q in range(1, N - 1):
        relevant = select_relevant(field, OverlapRule(N, q))
        for s in range(field.lattice.rows):
            row = field.positions[s]
            expected = {
                int(row[r])
                for r in range(offsets - q)
                if all(row[r + k] == row[r] for k in range(1, q + 1))
            }
            assert {p.col for p in relevant[s]} == expected
            assert len(relevant[s]) <= offsets - q
