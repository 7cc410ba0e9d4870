"""
File formats for frames, point sets, scan fields, result tables and PGM rasters.

Every read or write failure is re-raised as ArtifactIOError carrying the path.
"""

import csv
import logging
import os
from pathlib import Path
from typing import IO, Iterable, List, Optional, Sequence, Union

import numpy as np

from .errors import ArtifactIOError, DomainError
from .lattice import Lattice, PointSet
from .scan import ScanField
from .slicing import FrameSequence

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

FRAME_MAGIC = 0x31465343  # b"CSF1" little-endian
HEADER_DTYPE = np.dtype("<u4")
DATA_DTYPE = np.dtype("<f8")

SCAN_HEADER = ("orientation", "slice", "offset", "row", "col")
TABLE_HEADER = ("rule_N", "rule_Q", "gamma", "d", "mode", "mean", "stderr", "exact_freq")

PGM_MAX = 255
BACKGROUND = 0
TRUTH_LEVEL = 128
RELEVANT_LEVEL = 200
ESTIMATE_LEVEL = 255


def _ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def write_point_set(path: PathLike, s: PointSet) -> Path:
    """``i j`` per line in row-major order."""
    path = Path(path)
    try:
        _ensure_parent(path)
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# {s.lattice.rows}x{s.lattice.cols} lattice, {len(s)} points\n")
            for p in s.sorted():
                f.write(f"{p.row} {p.col}\n")
    except OSError as e:
        raise ArtifactIOError(str(path), "writing", e) from e
    logger.info(f"Saved {len(s)} points to {path}")
    return path


def read_point_set(path: PathLike, lat: Lattice) -> PointSet:
    path = Path(path)
    points = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                fields = line.split()
                if len(fields) != 2:
                    raise ValueError(f"line {lineno}: expected 'i j', got {line!r}")
                points.append((int(fields[0]), int(fields[1])))
        result = PointSet.of(lat, points)
    except (OSError, ValueError) as e:
        if isinstance(e, DomainError):
            raise
        raise ArtifactIOError(str(path), "reading", e) from e
    logger.info(f"Loaded {len(result)} points from {path}")
    return result


def write_frames(path: PathLike, seq: FrameSequence) -> Path:
    """Binary frame file: magic, m, n, d as <u4, then d*m*n <f8 values."""
    path = Path(path)
    d, m, n = seq.data.shape
    header = np.array([FRAME_MAGIC, m, n, d], dtype=HEADER_DTYPE)
    try:
        _ensure_parent(path)
        with open(path, "wb") as f:
            f.write(header.tobytes())
            f.write(np.ascontiguousarray(seq.data, dtype=DATA_DTYPE).tobytes())
    except OSError as e:
        raise ArtifactIOError(str(path), "writing", e) from e
    logger.info(f"Saved {d} frames of {m}x{n} to {path}")
    return path


def read_frames(path: PathLike) -> FrameSequence:
    path = Path(path)
    try:
        raw = path.read_bytes()
        if len(raw) < 4 * HEADER_DTYPE.itemsize:
            raise ValueError("file too short for a frame header")
        magic, m, n, d = (int(v) for v in np.frombuffer(raw[:16], dtype=HEADER_DTYPE))
        if magic != FRAME_MAGIC:
            raise ValueError(f"bad magic 0x{magic:08x}")
        expected = 16 + d * m * n * DATA_DTYPE.itemsize
        if len(raw) != expected:
            raise ValueError(f"expected {expected} bytes for {d}x{m}x{n}, got {len(raw)}")
        data = np.frombuffer(raw[16:], dtype=DATA_DTYPE).reshape(d, m, n).astype(np.float64)
        seq = FrameSequence(data)
    except (OSError, ValueError) as e:
        if isinstance(e, DomainError):
            raise
        raise ArtifactIOError(str(path), "reading", e) from e
    logger.info(f"Loaded {d} frames of {m}x{n} from {path}")
    return seq


def write_frames_csv(directory: PathLike, seq: FrameSequence) -> List[Path]:
    """One ``frame_XXXX.csv`` per frame, rows of the lattice as CSV rows."""
    directory = Path(directory)
    written = []
    width = max(4, len(str(seq.frames)))
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for k in range(seq.frames):
            target = directory / f"frame_{k + 1:0{width}d}.csv"
            np.savetxt(target, seq.data[k], delimiter=",", fmt="%.17g")
            written.append(target)
    except OSError as e:
        raise ArtifactIOError(str(directory), "writing", e) from e
    logger.info(f"Saved {seq.frames} CSV frames to {directory}")
    return written


def read_frames_csv(directory: PathLike) -> FrameSequence:
    directory = Path(directory)
    try:
        files = sorted(directory.glob("frame_*.csv"))
        if not files:
            raise FileNotFoundError("no frame_*.csv files")
        frames = [np.loadtxt(f, delimiter=",", ndmin=2) for f in files]
        seq = FrameSequence(np.stack(frames))
    except (OSError, ValueError) as e:
        if isinstance(e, DomainError):
            raise
        raise ArtifactIOError(str(directory), "reading", e) from e
    logger.info(f"Loaded {seq.frames} CSV frames from {directory}")
    return seq


def write_scan_csv(path: PathLike, fields: Iterable[ScanField]) -> Path:
    """Critical points of one or more scan fields; sentinel entries are written too."""
    path = Path(path)
    try:
        _ensure_parent(path)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(SCAN_HEADER)
            for scan_field in fields:
                for s, r, row, col in scan_field.entries():
                    writer.writerow([scan_field.orientation.value, s, r, row, col])
    except OSError as e:
        raise ArtifactIOError(str(path), "writing", e) from e
    logger.info(f"Saved scan field to {path}")
    return path


class TableCsvWriter:
    """Writes result rows as they complete; the header goes out on open."""

    def __init__(self, path: PathLike):
        self.path = Path(path)
        self._handle: Optional[IO[str]] = None
        self._writer = None

    def __enter__(self) -> "TableCsvWriter":
        try:
            _ensure_parent(self.path)
            self._handle = open(self.path, "w", newline="", encoding="utf-8")
            self._writer = csv.writer(self._handle, lineterminator="\n")
            self._writer.writerow(TABLE_HEADER)
            self._handle.flush()
        except OSError as e:
            raise ArtifactIOError(str(self.path), "writing", e) from e
        return self

    def write_rows(self, rows: Sequence[Sequence[object]]) -> None:
        if self._writer is None or self._handle is None:
            raise RuntimeError("TableCsvWriter used outside its context")
        try:
            for row in rows:
                self._writer.writerow(row)
            self._handle.flush()
        except OSError as e:
            raise ArtifactIOError(str(self.path), "writing", e) from e

    def __exit__(self, *exc: object) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None


def write_pgm(path: PathLike, image: np.ndarray) -> Path:
    """ASCII P2 raster with max value 255; ``image`` holds integer levels."""
    path = Path(path)
    levels = np.asarray(image)
    if levels.ndim != 2:
        raise DomainError(f"PGM image must be 2-D, got shape {levels.shape}")
    if levels.min() < 0 or levels.max() > PGM_MAX:
        raise DomainError(f"PGM levels must lie in [0, {PGM_MAX}]")
    height, width = levels.shape
    try:
        _ensure_parent(path)
        with open(path, "w", encoding="ascii") as f:
            f.write(f"P2\n{width} {height}\n{PGM_MAX}\n")
            for row in levels.astype(int):
                f.write(" ".join(str(v) for v in row) + "\n")
    except OSError as e:
        raise ArtifactIOError(str(path), "writing", e) from e
    logger.info(f"Saved {width}x{height} image to {path}")
    return path


def read_pgm(path: PathLike) -> np.ndarray:
    """Read an ASCII P2 raster back into an integer array."""
    path = Path(path)
    try:
        with open(path, "r", encoding="ascii") as f:
            tokens = []
            for line in f:
                line = line.split("#", 1)[0]
                tokens.extend(line.split())
        if not tokens or tokens[0] != "P2":
            raise ValueError(f"{path} is not a P2 PGM file")
        width, height, _ = (int(t) for t in tokens[1:4])
        values = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
        if values.size != width * height:
            raise ValueError(f"expected {width * height} pixels, got {values.size}")
    except (OSError, ValueError) as e:
        raise ArtifactIOError(str(path), "reading", e) from e
    return values.reshape(height, width)


def overlay_image(
    lat: Lattice,
    truth: Optional[PointSet] = None,
    estimate: Optional[PointSet] = None,
    relevant: Optional[PointSet] = None,
) -> np.ndarray:
    """Gray levels: background, truth, relevant points, estimate (later layers win)."""
    image = np.full(lat.shape, BACKGROUND, dtype=np.int64)
    layers = ((truth, TRUTH_LEVEL), (relevant, RELEVANT_LEVEL), (estimate, ESTIMATE_LEVEL))
    for layer, level in layers:
        if layer is not None:
            image[layer.to_mask()] = level
    return image


def scale_to_gray(values: np.ndarray) -> np.ndarray:
    """Linear map of [min, max] onto [0, 255]; a constant field maps to 0."""
    low = float(values.min())
    high = float(values.max())
    if high == low:
        return np.zeros(values.shape, dtype=np.int64)
    return np.rint((values - low) / (high - low) * PGM_MAX).astype(np.int64)
