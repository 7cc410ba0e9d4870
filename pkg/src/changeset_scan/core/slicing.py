"""
Slices and overlapping sub-slices of a frame sequence.

The i-th horizontal slice is the row X_k(i, .) over all frames k; a sub-slice is a
length-N window of it starting at offset r, seen as an N x d panel series. Vertical
slices run down columns. Indices are 1-based throughout.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .cusum import MIN_LENGTH, PanelSeries
from .errors import ConditionViolation, DomainError
from .lattice import Lattice, Point, PointSet

logger = logging.getLogger(__name__)


class Orientation(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


@dataclass(frozen=True, eq=False)
class FrameSequence:
    """d frames of m x n observations, stored as a (d, m, n) float64 array."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise DomainError(f"Frame data must be 3-D (d, m, n), got shape {data.shape}")
        if data.shape[0] < 1:
            raise DomainError("Frame sequence needs at least one frame")
        if not np.all(np.isfinite(data)):
            raise DomainError("Frame sequence contains non-finite entries")
        # validates m, n >= 4
        Lattice(int(data.shape[1]), int(data.shape[2]))
        object.__setattr__(self, "data", data)

    @property
    def frames(self) -> int:
        return int(self.data.shape[0])

    @property
    def lattice(self) -> Lattice:
        return Lattice(int(self.data.shape[1]), int(self.data.shape[2]))


def slice_length(lat: Lattice, orientation: Orientation) -> int:
    return lat.cols if orientation is Orientation.HORIZONTAL else lat.rows


def slice_count(lat: Lattice, orientation: Orientation) -> int:
    return lat.rows if orientation is Orientation.HORIZONTAL else lat.cols


def check_window(N: int, length: int) -> None:
    """Windows must be even with 4 <= N <= slice length."""
    if N % 2 != 0:
        raise DomainError(f"Window N={N} must be even")
    if not (MIN_LENGTH <= N <= length):
        raise DomainError(f"Window N={N} outside [{MIN_LENGTH}, {length}]")


def offset_count(lat: Lattice, orientation: Orientation, N: int) -> int:
    """Number of admissible offsets r = 1..L-N+1."""
    length = slice_length(lat, orientation)
    check_window(N, length)
    return length - N + 1


@dataclass(frozen=True)
class SubSliceSpec:
    orientation: Orientation
    index: int
    offset: int
    window: int

    def validate(self, lat: Lattice) -> None:
        length = slice_length(lat, self.orientation)
        check_window(self.window, length)
        count = slice_count(lat, self.orientation)
        if not (1 <= self.index <= count):
            raise DomainError(f"Slice index {self.index} outside [1, {count}]")
        last = length - self.window + 1
        if not (1 <= self.offset <= last):
            raise DomainError(f"Offset r={self.offset} outside [1, {last}]")

    def point(self, position: int) -> Point:
        """Grid point at along-slice ``position``."""
        return grid_point(self.orientation, self.index, position)


def grid_point(orientation: Orientation, index: int, position: int) -> Point:
    """Point ``position`` along the ``index``-th slice of the given orientation."""
    if orientation is Orientation.HORIZONTAL:
        return Point(index, position)
    return Point(position, index)


def slice_values(seq: FrameSequence, orientation: Orientation, index: int) -> np.ndarray:
    """The whole ``index``-th slice as a (d, L) array."""
    if orientation is Orientation.HORIZONTAL:
        return seq.data[:, index - 1, :]
    return seq.data[:, :, index - 1]


def extract_subslice(seq: FrameSequence, spec: SubSliceSpec) -> PanelSeries:
    """Entry (j, k) = X_k at along-slice position r + j - 1."""
    spec.validate(seq.lattice)
    start = spec.offset - 1
    window = slice_values(seq, spec.orientation, spec.index)[:, start:start + spec.window]
    return PanelSeries(np.ascontiguousarray(window.T))


def true_change_index(truth: PointSet, spec: SubSliceSpec) -> Optional[int]:
    """
    Position u of the single boundary crossing inside the window, or None.

    Returns None when the window lies entirely inside or entirely outside ``truth``.
    Raises ConditionViolation when it crosses more than once.
    """
    spec.validate(truth.lattice)
    flags = [spec.point(spec.offset + j) in truth for j in range(spec.window)]
    switches = [j for j in range(1, spec.window) if flags[j] != flags[j - 1]]
    if not switches:
        return None
    if len(switches) > 1:
        raise ConditionViolation(
            f"{spec.orientation.value} sub-slice (index={spec.index}, r={spec.offset}, "
            f"N={spec.window}) crosses the change set {len(switches)} times"
        )
    return switches[0]


def map_to_grid(spec: SubSliceSpec, u_hat: int) -> Point:
    """Critical point U(i, r) = (i, u_hat + r - 1), or the vertical mirror."""
    if not (1 <= u_hat <= spec.window - 1):
        raise DomainError(f"u_hat={u_hat} outside [1, {spec.window - 1}]")
    return spec.point(u_hat + spec.offset - 1)
