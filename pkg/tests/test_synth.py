"""Tests for shapes, mean generators, noise streams and scenario presets."""

import math
from fractions import Fraction

import numpy as np
import pytest

from changeset_scan.core.errors import DomainError
from changeset_scan.core.lattice import Lattice, Point, is_connected
from changeset_scan.core.synth import (
    DRIFT,
    DRIFT_PLUS_ALT,
    MeanModel,
    MeanSequence,
    NoiseSpec,
    Scenario,
    ShapeBlock,
    ShapeSpec,
    averaging_scenario,
    frame_average,
    frame_noise,
    make_shape,
    noise_to_change_ratio,
    parse_norm,
    parse_radius,
    scenario_summary,
    table_scenario,
    total_average_change,
    two_shape_scenario,
)


def test_norm_and_radius_parsing():
    """Norms 1, 2, inf are accepted; radii stay exact fractions."""
    assert parse_norm("inf") == math.inf
    assert parse_norm("2") == 2
    assert parse_radius("100/3") == Fraction(100, 3)
    with pytest.raises(DomainError):
        parse_norm("3")
    with pytest.raises(DomainError):
        parse_radius("0")
    with pytest.raises(DomainError):
        parse_radius("abc")


def test_small_ball_sizes():
    """Unit balls have 9 (inf), 5 (1) points; the radius-2 disc has 13."""
    lat = Lattice(9, 9)
    center = Point(5, 5)
    assert len(make_shape(ShapeSpec(math.inf, 1, center), lat)) == 9
    assert len(make_shape(ShapeSpec(1, 1, center), lat)) == 5
    assert len(make_shape(ShapeSpec(2, 2, center), lat)) == 13


def test_table_rectangle_geometry():
    """w = 100/3 gives the 67 x 67 block rows and columns 17..83."""
    truth = table_scenario().truth()
    assert len(truth) == 67 * 67
    rows = {p.row for p in truth}
    assert min(rows) == 17 and max(rows) == 83


def test_shape_must_fit():
    """Shapes reaching past the edge are rejected."""
    with pytest.raises(DomainError):
        make_shape(ShapeSpec(1, 5, (3, 10)), Lattice(20, 20))


def test_mean_sequences():
    """Generators follow k, k +/- (-1)^k, (-1)^k, 0 and constants."""
    assert list(DRIFT_PLUS_ALT.values(4)) == [0.0, 3.0, 2.0, 5.0]
    assert list(MeanSequence("drift_minus_alt").values(3)) == [2.0, 1.0, 4.0]
    assert list(MeanSequence("alt").values(3)) == [-1.0, 1.0, -1.0]
    assert list(MeanSequence.parse("const(2.5)").values(2)) == [2.5, 2.5]
    assert str(MeanSequence.parse("const(1)")) == "const(1)"
    with pytest.raises(DomainError):
        MeanSequence.parse("sine")


def test_total_average_change_and_ratio():
    """Delta^2 of drift vs drift plus alternation is 1; rho follows sigma2 / (N Delta^2)."""
    model = MeanModel((DRIFT, DRIFT_PLUS_ALT))
    assert total_average_change(model, 0, 1, 1000) == pytest.approx(1.0)
    assert noise_to_change_ratio(2.0, 1.0, 4) == pytest.approx(0.5)
    assert noise_to_change_ratio(2.0, 1.0, 6) == pytest.approx(1 / 3)
    with pytest.raises(DomainError):
        noise_to_change_ratio(2.0, 0.0, 6)


def test_frame_noise_is_per_frame():
    """Frame k noise depends only on (seed, k)."""
    a = frame_noise(42, 3, (5, 5))
    np.testing.assert_array_equal(a, frame_noise(42, 3, (5, 5)))
    assert not np.array_equal(a, frame_noise(42, 4, (5, 5)))
    assert not np.array_equal(a, frame_noise(43, 3, (5, 5)))


def test_frames_do_not_depend_on_d_or_workers():
    """Shorter runs are prefixes of longer ones; threading changes nothing."""
    base = table_scenario(frames=10, seed=5)
    long_run = base.generate()
    short_run = base.with_frames(5).generate()
    np.testing.assert_array_equal(short_run.data, long_run.data[:5])
    np.testing.assert_array_equal(base.generate(workers=3).data, long_run.data)


def test_noise_free_frames_equal_means():
    """With noise off every pixel is its block mean."""
    scenario = table_scenario(frames=4).with_noise(enabled=False)
    seq = scenario.generate()
    assert seq.data[1, 50, 50] == 3.0
    assert seq.data[1, 0, 0] == 2.0


def test_noise_variance_by_law_of_large_numbers():
    """Residual variance matches sigma2 within four standard errors."""
    scenario = Scenario(Lattice(40, 40), noise=NoiseSpec(2.0, 8), frames=50)
    seq = scenario.generate()
    residual = seq.data - np.arange(1, 51)[:, None, None]
    count = residual.size
    assert abs(residual.mean()) < 4 * math.sqrt(2.0 / count)
    assert abs(residual.var() - 2.0) < 4 * 2.0 * math.sqrt(2.0 / count)


def test_noise_spec_validation():
    """Variance must be positive and the seed a u64."""
    with pytest.raises(DomainError):
        NoiseSpec(0.0)
    with pytest.raises(DomainError):
        NoiseSpec(1.0, -1)
    with pytest.raises(DomainError):
        NoiseSpec(1.0, 2**64)


def test_two_shape_scenario():
    """Diamond and round set are disjoint, connected and leave a connected complement."""
    scenario = two_shape_scenario()
    diamond, round_set = scenario.shape_sets()
    assert not diamond.members & round_set.members
    assert is_connected(diamond) and is_connected(round_set)
    assert len(scenario.partition().blocks) == 3
    model = scenario.mean_model()
    assert total_average_change(model, 0, 2, 1000) == pytest.approx(1.0)


def test_overlapping_shapes_rejected():
    """Shapes that share points cannot form a partition."""
    lat = Lattice(20, 20)
    shapes = (ShapeBlock(ShapeSpec(1, 3, (10, 10))), ShapeBlock(ShapeSpec(1, 3, (10, 12))))
    with pytest.raises(DomainError):
        Scenario(lat, shapes).truth()


def test_averaging_kinds():
    """Only the constant pair shows up in the frame average."""
    averages = {}
    for kind in ("a", "b", "c"):
        scenario = averaging_scenario(kind, frames=20).with_noise(enabled=False)
        averages[kind] = frame_average(scenario.generate())
    assert averages["a"][49, 49] == 0.0
    assert averages["a"][0, 0] == 1.0
    assert averages["b"][49, 49] == averages["b"][0, 0]
    assert averages["c"][49, 49] == averages["c"][0, 0]
    with pytest.raises(DomainError):
        averaging_scenario("d")


def test_scenario_summary():
    """Summaries list the shapes with their sizes."""
    summary = scenario_summary(table_scenario())
    assert summary["rows"] == 100
    assert summary["shapes"][0]["size"] == 4489
    assert summary["shapes"][0]["means"] == "drift_plus_alt"


def test_shapes_are_symmetric_about_their_centre():
    """Every ball is mirror symmetric in both axes and under transposition."""
    lat = Lattice(19, 19)
    for norm in (1, 2, math.inf):
        for radius in (3, Fraction(7, 2), Fraction(13, 4)):
            mask = make_shape(ShapeSpec(norm, radius, (10, 10)), lat).to_mask()
            assert np.array_equal(mask, mask[::-1, :])
            assert np.array_equal(mask, mask[:, ::-1])
            assert np.array_equal(mask, mask.T)
