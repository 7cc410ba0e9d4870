"""Tests for frame, point-set, scan and raster files."""

import numpy as np
import pytest

from changeset_scan.core.errors import ArtifactIOError, DomainError
from changeset_scan.core.io import (
    SCAN_HEADER,
    TableCsvWriter,
    overlay_image,
    read_frames,
    read_frames_csv,
    read_pgm,
    read_point_set,
    scale_to_gray,
    write_frames,
    write_frames_csv,
    write_pgm,
    write_point_set,
    write_scan_csv,
)
from changeset_scan.core.lattice import Lattice, PointSet
from changeset_scan.core.scan import limiting_scan
from changeset_scan.core.slicing import FrameSequence, Orientation


def test_frames_survive_binary_file(tmp_path):
    """Binary frame files keep every value bit for bit."""
    rng = np.random.default_rng(1)
    seq = FrameSequence(rng.standard_normal((3, 4, 5)))
    path = write_frames(tmp_path / "sub" / "frames.csf", seq)
    np.testing.assert_array_equal(read_frames(path).data, seq.data)


def test_frame_file_errors(tmp_path):
    """Truncated or foreign files raise ArtifactIOError."""
    seq = FrameSequence(np.zeros((2, 4, 4)))
    path = write_frames(tmp_path / "frames.csf", seq)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ArtifactIOError):
        read_frames(path)
    other = tmp_path / "other.csf"
    other.write_bytes(b"\x00" * 64)
    with pytest.raises(ArtifactIOError):
        read_frames(other)
    with pytest.raises(ArtifactIOError):
        read_frames(tmp_path / "missing.csf")


def test_csv_frames(tmp_path):
    """One CSV per frame, read back in frame order."""
    data = np.arange(2 * 4 * 5, dtype=float).reshape(2, 4, 5) / 7.0
    written = write_frames_csv(tmp_path / "frames", FrameSequence(data))
    assert [p.name for p in written] == ["frame_0001.csv", "frame_0002.csv"]
    np.testing.assert_array_equal(read_frames_csv(tmp_path / "frames").data, data)
    with pytest.raises(ArtifactIOError):
        read_frames_csv(tmp_path / "empty")


def test_point_set_file(tmp_path):
    """Point files hold a header and one 'i j' per line."""
    lat = Lattice(6, 6)
    s = PointSet.of(lat, [(3, 2), (1, 5)])
    path = write_point_set(tmp_path / "s.txt", s)
    lines = path.read_text().splitlines()
    assert lines == ["# 6x6 lattice, 2 points", "1 5", "3 2"]
    assert read_point_set(path, lat) == s


def test_point_set_file_errors(tmp_path):
    """Malformed lines are I/O errors, points off the lattice are domain errors."""
    lat = Lattice(6, 6)
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3\n")
    with pytest.raises(ArtifactIOError):
        read_point_set(bad, lat)
    outside = tmp_path / "outside.txt"
    outside.write_text("7 1\n")
    with pytest.raises(DomainError):
        read_point_set(outside, lat)


def test_scan_csv(tmp_path, fragment):
    """Scan CSVs list every stored entry of every field."""
    lat, truth = fragment
    field = limiting_scan(truth, Orientation.HORIZONTAL, 6)
    path = write_scan_csv(tmp_path / "scan.csv", [field])
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SCAN_HEADER)
    assert len(lines) == 1 + lat.rows * lat.cols
    assert lines[1] == "horizontal,1,1,1,3"


def test_table_writer_flushes(tmp_path):
    """Rows are on disk before the writer closes."""
    path = tmp_path / "table.csv"
    with TableCsvWriter(path) as writer:
        writer.write_rows([[4, 1, "0.000000", 100, "horizontal", "0.1", "0.0", "1.0"]])
        assert len(path.read_text().splitlines()) == 2
    with pytest.raises(RuntimeError):
        TableCsvWriter(path).write_rows([])


def test_pgm_file(tmp_path):
    """P2 rasters keep their levels; out-of-range levels are rejected."""
    image = np.array([[0, 128], [200, 255]])
    path = write_pgm(tmp_path / "img.pgm", image)
    assert path.read_text().startswith("P2\n2 2\n255\n")
    np.testing.assert_array_equal(read_pgm(path), image)
    with pytest.raises(DomainError):
        write_pgm(tmp_path / "bad.pgm", np.array([[256]]))
    with pytest.raises(DomainError):
        write_pgm(tmp_path / "bad.pgm", np.zeros(3))


def test_overlay_and_scaling():
    """Later layers win; scaling spans 0..255 and maps constants to 0."""
    lat = Lattice(4, 4)
    truth = PointSet.of(lat, [(1, 1), (1, 2)])
    estimate = PointSet.of(lat, [(1, 2)])
    relevant = PointSet.of(lat, [(1, 1)])
    image = overlay_image(lat, truth, estimate, relevant)
    assert image[0, 0] == 200
    assert image[0, 1] == 255
    assert image[3, 3] == 0
    scaled = scale_to_gray(np.array([[1.0, 2.0], [3.0, 5.0]]))
    assert scaled.min() == 0 and scaled.max() == 255
    assert not scale_to_gray(np.full((2, 2), 4.0)).any()
