"""
Grid-domain geometry for rectangular lattices.

Points are 1-based ``(row, col)`` pairs. Adjacency is strictly 4-adjacency: a node
touches ``(i, j±1)`` and ``(i±1, j)``. Boundaries, connectivity, set distances and
components are all defined on the graph that adjacency induces.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, NamedTuple, Tuple, Union

import numpy as np
from scipy import ndimage

from .errors import DomainError

logger = logging.getLogger(__name__)

# 4-connectivity structure for scipy.ndimage.label
STRUCTURE_4 = np.array([[0, 1, 0],
                        [1, 1, 1],
                        [0, 1, 0]], dtype=int)

MIN_SIDE = 4

Distance = Union[int, float]


class Point(NamedTuple):
    """A lattice node, 1-based."""

    row: int
    col: int


@dataclass(frozen=True)
class Lattice:
    """Rectangular domain D = {1..rows} x {1..cols}."""

    rows: int
    cols: int

    def __post_init__(self) -> None:
        if self.rows < MIN_SIDE or self.cols < MIN_SIDE:
            raise DomainError(
                f"Lattice must be at least {MIN_SIDE}x{MIN_SIDE}, got {self.rows}x{self.cols}"
            )

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def contains(self, p: Tuple[int, int]) -> bool:
        return 1 <= p[0] <= self.rows and 1 <= p[1] <= self.cols

    def check(self, p: Tuple[int, int]) -> Point:
        """Return ``p`` as a Point, raising DomainError when it lies outside."""
        if not self.contains(p):
            raise DomainError(f"Point {tuple(p)} outside {self.rows}x{self.cols} lattice")
        return Point(int(p[0]), int(p[1]))

    def nodes(self) -> Iterator[Point]:
        for i in range(1, self.rows + 1):
            for j in range(1, self.cols + 1):
                yield Point(i, j)

    def full(self) -> "PointSet":
        return PointSet.from_mask(np.ones(self.shape, dtype=bool), self)


@dataclass(frozen=True)
class PointSet:
    """Finite set of lattice nodes tied to the lattice they live on."""

    members: frozenset
    lattice: Lattice

    def __post_init__(self) -> None:
        for p in self.members:
            if not isinstance(p, Point) or not self.lattice.contains(p):
                raise DomainError(f"Member {p!r} is not a point of the lattice")

    @classmethod
    def of(cls, lattice: Lattice, points: Iterable[Tuple[int, int]]) -> "PointSet":
        return cls(frozenset(lattice.check(p) for p in points), lattice)

    @classmethod
    def empty(cls, lattice: Lattice) -> "PointSet":
        return cls(frozenset(), lattice)

    @classmethod
    def from_mask(cls, mask: np.ndarray, lattice: Lattice) -> "PointSet":
        if mask.shape != lattice.shape:
            raise DomainError(f"Mask shape {mask.shape} != lattice shape {lattice.shape}")
        rows, cols = np.nonzero(mask)
        return cls(frozenset(Point(int(i) + 1, int(j) + 1) for i, j in zip(rows, cols)), lattice)

    def to_mask(self) -> np.ndarray:
        mask = np.zeros(self.lattice.shape, dtype=bool)
        for p in self.members:
            mask[p.row - 1, p.col - 1] = True
        return mask

    def sorted(self) -> List[Point]:
        """Members in row-major order."""
        return sorted(self.members)

    def row(self, i: int) -> "PointSet":
        return PointSet(frozenset(p for p in self.members if p.row == i), self.lattice)

    def column(self, j: int) -> "PointSet":
        return PointSet(frozenset(p for p in self.members if p.col == j), self.lattice)

    def _same_lattice(self, other: "PointSet") -> None:
        if other.lattice != self.lattice:
            raise DomainError("Point sets live on different lattices")

    def __or__(self, other: "PointSet") -> "PointSet":
        self._same_lattice(other)
        return PointSet(self.members | other.members, self.lattice)

    def __and__(self, other: "PointSet") -> "PointSet":
        self._same_lattice(other)
        return PointSet(self.members & other.members, self.lattice)

    def __sub__(self, other: "PointSet") -> "PointSet":
        self._same_lattice(other)
        return PointSet(self.members - other.members, self.lattice)

    def issubset(self, other: "PointSet") -> bool:
        return self.members <= other.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.sorted())

    def __contains__(self, p: object) -> bool:
        return p in self.members

    def __bool__(self) -> bool:
        return bool(self.members)


@dataclass(frozen=True)
class Partition:
    """Ordered decomposition D = S_1 + ... + S_K into connected, disjoint blocks."""

    blocks: Tuple[PointSet, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) < 2:
            raise DomainError(f"A partition needs at least 2 blocks, got {len(self.blocks)}")
        lattice = self.blocks[0].lattice
        covered: set = set()
        for idx, block in enumerate(self.blocks):
            if block.lattice != lattice:
                raise DomainError("Partition blocks live on different lattices")
            if not block:
                raise DomainError(f"Partition block {idx} is empty")
            if not is_connected(block):
                raise DomainError(f"Partition block {idx} is not connected")
            if covered & block.members:
                raise DomainError(f"Partition block {idx} overlaps an earlier block")
            covered |= block.members
        if len(covered) != lattice.rows * lattice.cols:
            raise DomainError("Partition blocks do not cover the whole domain")

    @property
    def lattice(self) -> Lattice:
        return self.blocks[0].lattice

    def labels(self) -> np.ndarray:
        """Block index of every node as a (rows, cols) integer array."""
        out = np.zeros(self.lattice.shape, dtype=np.intp)
        for idx, block in enumerate(self.blocks):
            out[block.to_mask()] = idx
        return out


def neighbors(p: Tuple[int, int], lat: Lattice) -> List[Point]:
    """4-neighbours of ``p`` inside ``lat``, row-then-column ascending."""
    p = lat.check(p)
    candidates = [
        (p.row - 1, p.col),
        (p.row, p.col - 1),
        (p.row, p.col + 1),
        (p.row + 1, p.col),
    ]
    return [Point(*c) for c in candidates if lat.contains(c)]


def label_components(s: PointSet) -> Tuple[np.ndarray, int]:
    """4-connected component labels of ``s`` (0 = outside) and their count."""
    labeled, count = ndimage.label(s.to_mask(), structure=STRUCTURE_4)
    return labeled, int(count)


def is_connected(s: PointSet) -> bool:
    """True iff the 4-adjacency graph on ``s`` is connected; the empty set counts as connected."""
    if len(s) <= 1:
        return True
    _, count = label_components(s)
    return count == 1


def boundary(s: PointSet) -> PointSet:
    """Nodes of ``s`` with fewer than four neighbours inside ``s``."""
    if not s:
        return s
    mask = s.to_mask()
    padded = np.pad(mask, 1, mode="constant", constant_values=False).astype(np.int8)
    inside = (
        padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
    )
    return PointSet.from_mask(mask & (inside < 4), s.lattice)


def set_distance(a: PointSet, b: PointSet, within: PointSet) -> Distance:
    """Shortest-path distance between ``a`` and ``b`` inside ``within``; ``math.inf`` if none."""
    if not a.issubset(within) or not b.issubset(within):
        raise DomainError("set_distance requires both sets to lie inside `within`")
    if not a or not b:
        return math.inf
    if a.members & b.members:
        return 0

    allowed = within.members
    targets = b.members
    seen = set(a.members)
    queue: deque = deque((p, 0) for p in a.sorted())
    while queue:
        node, dist = queue.popleft()
        for nxt in neighbors(node, within.lattice):
            if nxt in seen or nxt not in allowed:
                continue
            if nxt in targets:
                return dist + 1
            seen.add(nxt)
            queue.append((nxt, dist + 1))
    return math.inf


def jaccard_distance(a: PointSet, b: PointSet) -> float:
    """(|A u B| - |A n B|) / |A u B|; two empty sets are at distance 0."""
    union = len(a.members | b.members)
    if union == 0:
        return 0.0
    inter = len(a.members & b.members)
    return float(Fraction(union - inter, union))


def domain_boundary(lat: Lattice) -> PointSet:
    """Boundary B of the whole rectangle."""
    return boundary(lat.full())


def row_chord(s: PointSet, i: int) -> PointSet:
    """H_i: the intersection of ``s`` with row ``i``."""
    return s.row(i)


def column_chord(s: PointSet, j: int) -> PointSet:
    """V_j: the intersection of ``s`` with column ``j``."""
    return s.column(j)

