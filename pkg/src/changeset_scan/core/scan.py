"""
Scanning for critical points and the overlapping (N, Q) selection rule.

A scan runs the CUSUM estimate on every length-N window of every slice and maps each
estimate back onto the lattice. For a slice of length L only offsets r = 1..L-N+1 carry
genuine critical points; the remaining N-1 entries hold the sentinel position 0, which
never equals a genuine coordinate.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .cusum import GammaLike, as_gamma, cusum_profile
from .errors import DomainError
from .lattice import Lattice, PointSet
from .slicing import (
    FrameSequence,
    Orientation,
    SubSliceSpec,
    check_window,
    grid_point,
    offset_count,
    slice_count,
    slice_length,
    slice_values,
    true_change_index,
)

logger = logging.getLogger(__name__)

SENTINEL = 0


@dataclass(frozen=True, eq=False)
class ScanField:
    """
    Critical points U(slice, r) of one orientation.

    ``positions[s, r-1]`` is the along-slice coordinate of U(s+1, r): the column for a
    horizontal field, the row for a vertical one. ``degenerate[s]`` marks slices whose
    statistics were identically zero in every window. ``gamma`` is None for limiting
    fields, which do not depend on it.
    """

    orientation: Orientation
    window: int
    gamma: Optional[float]
    positions: np.ndarray
    degenerate: np.ndarray
    lattice: Lattice

    def __post_init__(self) -> None:
        count = slice_count(self.lattice, self.orientation)
        length = slice_length(self.lattice, self.orientation)
        if self.positions.shape != (count, length):
            raise DomainError(
                f"Scan positions shape {self.positions.shape} != ({count}, {length})"
            )
        if self.degenerate.shape != (count,):
            raise DomainError(f"Degenerate flags shape {self.degenerate.shape} != ({count},)")
        genuine = self.offsets
        if np.any(self.positions[:, genuine:] != SENTINEL):
            raise DomainError("Tail offsets of a scan field must hold the sentinel")
        if np.any(self.positions[:, :genuine] < 1) or np.any(self.positions > length):
            raise DomainError("Genuine scan entries must be grid coordinates")

    @property
    def offsets(self) -> int:
        """Number of genuine offsets, L - N + 1."""
        return slice_length(self.lattice, self.orientation) - self.window + 1

    @property
    def slices(self) -> int:
        return int(self.positions.shape[0])

    def entry(self, index: int, r: int) -> Tuple[int, int]:
        """U(index, r) as (row, col); sentinels come back as (i, 0) or (0, j)."""
        position = int(self.positions[index - 1, r - 1])
        if self.orientation is Orientation.HORIZONTAL:
            return (index, position)
        return (position, index)

    def entries(self) -> Iterator[Tuple[int, int, int, int]]:
        """(slice, offset, row, col) for every stored entry, sentinels included."""
        for s in range(1, self.slices + 1):
            for r in range(1, self.positions.shape[1] + 1):
                row, col = self.entry(s, r)
                yield s, r, row, col


@dataclass(frozen=True)
class OverlapRule:
    """Overlapping (N, Q) rule: even N >= 4, 1 <= Q <= N - 2."""

    window: int
    run: int

    def __post_init__(self) -> None:
        if self.window % 2 != 0 or self.window < 4:
            raise DomainError(f"Rule window N={self.window} must be even and >= 4")
        if not (1 <= self.run <= self.window - 2):
            raise DomainError(f"Rule run Q={self.run} outside [1, {self.window - 2}]")

    @classmethod
    def parse(cls, text: str) -> "OverlapRule":
        """Parse ``"N,Q"``."""
        parts = text.replace("(", "").replace(")", "").split(",")
        try:
            window, run = (int(part) for part in parts)
        except ValueError as e:
            raise DomainError(f"Rule must look like 'N,Q', got {text!r}") from e
        return cls(window, run)

    def __str__(self) -> str:
        return f"({self.window},{self.run})"


def _scan_slice(values: np.ndarray, N: int, gamma: GammaLike) -> Tuple[np.ndarray, bool]:
    """Along-slice critical points for one (d, L) slice and its degeneracy flag."""
    windows = sliding_window_view(values, N, axis=1)
    panels = np.ascontiguousarray(windows.transpose(1, 2, 0))
    profile = cusum_profile(panels, gamma)
    u_hat = np.argmax(profile, axis=1) + 1
    positions = u_hat + np.arange(profile.shape[0])
    return positions, not bool(np.any(profile))


def scan(
    seq: FrameSequence,
    orientation: Orientation,
    N: int,
    gamma: GammaLike,
    workers: int = 1,
) -> ScanField:
    """Critical-point field of every sub-slice of one orientation."""
    g = as_gamma(gamma)
    lat = seq.lattice
    genuine = offset_count(lat, orientation, N)
    count = slice_count(lat, orientation)
    length = slice_length(lat, orientation)

    def run(index: int) -> Tuple[np.ndarray, bool]:
        return _scan_slice(slice_values(seq, orientation, index), N, g)

    indices = range(1, count + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, indices))
    else:
        results = [run(i) for i in indices]

    positions = np.zeros((count, length), dtype=np.int64)
    degenerate = np.zeros(count, dtype=bool)
    for s, (pos, flat) in enumerate(results):
        positions[s, :genuine] = pos
        degenerate[s] = flat
    if degenerate.any():
        logger.warning(
            f"{int(degenerate.sum())} {orientation.value} slices have identically zero statistics"
        )
    logger.debug(f"Scanned {count} {orientation.value} slices with N={N}, gamma={g.value}")
    return ScanField(orientation, N, g.value, positions, degenerate, lat)


def limiting_scan(truth: PointSet, orientation: Orientation, N: int) -> ScanField:
    """
    The field the scan converges to as d grows.

    Windows with a single crossing give the true critical point, windows without a change
    give the spurious midpoint u = N/2. Raises ConditionViolation on multiple crossings.
    """
    lat = truth.lattice
    genuine = offset_count(lat, orientation, N)
    count = slice_count(lat, orientation)
    positions = np.zeros((count, slice_length(lat, orientation)), dtype=np.int64)
    for s in range(1, count + 1):
        for r in range(1, genuine + 1):
            u = true_change_index(truth, SubSliceSpec(orientation, s, r, N))
            positions[s - 1, r - 1] = (N // 2 if u is None else u) + r - 1
    return ScanField(orientation, N, None, positions, np.zeros(count, dtype=bool), lat)


def select_relevant(field: ScanField, rule: OverlapRule) -> List[PointSet]:
    """
    Relevant critical points per slice under the overlapping (N, Q) rule.

    For r = 1..L-N+1, U(s, r) is kept when U(s, r) = U(s, r+1) = ... = U(s, r+Q).
    Runs reaching into the sentinel tail never fire.
    """
    if rule.window != field.window:
        raise DomainError(f"Rule window N={rule.window} != scan window N={field.window}")
    check_window(rule.window, slice_length(field.lattice, field.orientation))
    genuine = field.offsets
    positions = field.positions
    head = positions[:, :genuine]
    fires = np.ones(head.shape, dtype=bool)
    for q in range(1, rule.run + 1):
        fires &= positions[:, q:q + genuine] == head

    relevant = []
    for s in range(field.slices):
        chosen = np.unique(head[s][fires[s]])
        points = (grid_point(field.orientation, s + 1, int(c)) for c in chosen)
        relevant.append(PointSet.of(field.lattice, points))
    return relevant


def pool(
    h_sets: Sequence[PointSet],
    v_sets: Sequence[PointSet],
    lattice: Optional[Lattice] = None,
) -> PointSet:
    """G = H(1) u ... u H(m) u V(1) u ... u V(n)."""
    sets = list(h_sets) + list(v_sets)
    if lattice is None:
        if not sets:
            raise DomainError("pool needs at least one set or an explicit lattice")
        lattice = sets[0].lattice
    members: frozenset = frozenset()
    for s in sets:
        if s.lattice != lattice:
            raise DomainError("Relevant sets live on different lattices")
        members = members | s.members
    return PointSet(members, lattice)
