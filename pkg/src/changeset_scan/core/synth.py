"""
Synthetic change sets and frame sequences.

Change sets are p-norm balls S = {u : ||u - v||_p <= w} for p in {1, 2, inf}. Every
block of the partition carries its own mean sequence m_k, and frame k is

    X_k(i, j) = m_k(block(i, j)) + eps_k(i, j),   eps i.i.d. N(0, sigma2).

Noise for frame k comes from a Philox stream keyed by the seed with counter k, so each
frame is reproducible on its own, whatever order or thread produces it.
"""

import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError
from .lattice import Lattice, Partition, Point, PointSet, is_connected
from .slicing import FrameSequence

logger = logging.getLogger(__name__)

NORMS = (1, 2, math.inf)
SEED_LIMIT = 2**64

Radius = Union[Fraction, int, float, str]


def parse_norm(text: Union[str, int, float]) -> Union[int, float]:
    """Accept 1, 2, inf (also ``"infty"``, ``"max"``)."""
    if isinstance(text, (int, float)):
        value = text
    else:
        token = text.strip().lower()
        if token in ("inf", "infty", "infinity", "max"):
            return math.inf
        try:
            value = int(token)
        except ValueError:
            raise DomainError(f"Unknown norm {text!r}. Valid: 1, 2, inf") from None
    if value not in NORMS:
        raise DomainError(f"Norm p={value} not supported. Valid: 1, 2, inf")
    return math.inf if value == math.inf else int(value)


def parse_radius(value: Radius) -> Fraction:
    """Exact radius; ``"100/3"`` stays a fraction."""
    try:
        radius = Fraction(value.strip()) if isinstance(value, str) else Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise DomainError(f"Invalid radius {value!r}: {e}") from e
    if radius <= 0:
        raise DomainError(f"Radius must be positive, got {value}")
    return radius


@dataclass(frozen=True)
class ShapeSpec:
    norm: Union[int, float]
    radius: Fraction
    center: Point

    def __post_init__(self) -> None:
        object.__setattr__(self, "norm", parse_norm(self.norm))
        object.__setattr__(self, "radius", parse_radius(self.radius))
        object.__setattr__(self, "center", Point(int(self.center[0]), int(self.center[1])))

    @property
    def reach(self) -> int:
        """Largest axis offset inside the shape, floor(w), for every norm."""
        return math.floor(self.radius)

    def __str__(self) -> str:
        p = "inf" if self.norm == math.inf else str(self.norm)
        return f"p={p} w={self.radius} v=({self.center.row},{self.center.col})"


def make_shape(spec: ShapeSpec, lat: Lattice) -> PointSet:
    """All lattice points within p-distance w of the centre."""
    center = lat.check(spec.center)
    reach = spec.reach
    if (
        center.row - reach < 1
        or center.col - reach < 1
        or center.row + reach > lat.rows
        or center.col + reach > lat.cols
    ):
        raise DomainError(f"Shape {spec} reaches outside the {lat.rows}x{lat.cols} lattice")

    ii, jj = np.indices(lat.shape)
    di = np.abs(ii + 1 - center.row)
    dj = np.abs(jj + 1 - center.col)
    if spec.norm == math.inf:
        mask = np.maximum(di, dj) <= reach
    elif spec.norm == 1:
        mask = di + dj <= reach
    else:
        w = spec.radius
        # floor(w^2) compared against integer squared distances
        limit = (w.numerator * w.numerator) // (w.denominator * w.denominator)
        mask = di * di + dj * dj <= limit

    shape = PointSet.from_mask(mask, lat)
    if not shape:
        raise DomainError(f"Shape {spec} is empty")
    return shape


_CONST = re.compile(r"^const\(\s*([^)]+?)\s*\)$")


@dataclass(frozen=True)
class MeanSequence:
    """Named mean generator k -> m_k, k = 1..d."""

    kind: str
    constant: float = 0.0

    KINDS = ("drift", "drift_plus_alt", "drift_minus_alt", "zero", "alt", "const")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            valid = ", ".join(self.KINDS)
            raise DomainError(f"Unknown mean generator {self.kind!r}. Valid: {valid}")
        if not math.isfinite(self.constant):
            raise DomainError("Constant mean must be finite")

    @classmethod
    def parse(cls, text: str) -> "MeanSequence":
        token = text.strip()
        match = _CONST.match(token)
        if match:
            try:
                return cls("const", float(match.group(1)))
            except ValueError:
                raise DomainError(f"Invalid constant in {text!r}") from None
        return cls(token)

    def values(self, d: int) -> np.ndarray:
        if d < 1:
            raise DomainError(f"Need d >= 1 frames, got {d}")
        k = np.arange(1, d + 1, dtype=np.float64)
        alt = np.where(np.arange(1, d + 1) % 2 == 0, 1.0, -1.0)
        if self.kind == "drift":
            return k
        if self.kind == "drift_plus_alt":
            return k + alt
        if self.kind == "drift_minus_alt":
            return k - alt
        if self.kind == "alt":
            return alt
        if self.kind == "zero":
            return np.zeros(d)
        return np.full(d, self.constant)

    def __str__(self) -> str:
        return f"const({self.constant:g})" if self.kind == "const" else self.kind


DRIFT = MeanSequence("drift")
DRIFT_PLUS_ALT = MeanSequence("drift_plus_alt")
DRIFT_MINUS_ALT = MeanSequence("drift_minus_alt")


@dataclass(frozen=True)
class MeanModel:
    """One mean sequence per partition block, in block order."""

    sequences: Tuple[MeanSequence, ...]

    def __post_init__(self) -> None:
        if not self.sequences:
            raise DomainError("Mean model needs at least one block")

    def table(self, d: int) -> np.ndarray:
        """(blocks, d) array of m_k(S_l)."""
        return np.stack([seq.values(d) for seq in self.sequences])


@dataclass(frozen=True)
class NoiseSpec:
    sigma2: float = 2.0
    seed: int = 0
    enabled: bool = True

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise DomainError(f"Noise variance must be positive and finite, got {self.sigma2}")
        if not (0 <= self.seed < SEED_LIMIT):
            raise DomainError(f"Seed must be an unsigned 64-bit integer, got {self.seed}")


def frame_noise(seed: int, k: int, shape: Tuple[int, int]) -> np.ndarray:
    """Standard normal field for frame k (1-based)."""
    gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, k]))
    return gen.standard_normal(shape)


def _render(
    labels: np.ndarray,
    table: np.ndarray,
    noise: NoiseSpec,
    d: int,
    workers: int = 1,
) -> np.ndarray:
    m, n = labels.shape
    data = np.empty((d, m, n), dtype=np.float64)
    sigma = math.sqrt(noise.sigma2)

    def fill(k: int) -> None:
        data[k - 1] = table[labels, k - 1]
        if noise.enabled:
            data[k - 1] += sigma * frame_noise(noise.seed, k, (m, n))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            list(executor.map(fill, range(1, d + 1)))
    else:
        for k in range(1, d + 1):
            fill(k)
    return data


def generate(
    lat: Lattice,
    partition: Partition,
    means: MeanModel,
    noise: NoiseSpec,
    d: int,
    workers: int = 1,
) -> FrameSequence:
    """Frames X_1..X_d of the signal-plus-noise model."""
    if partition.lattice != lat:
        raise DomainError("Partition lives on a different lattice")
    if len(means.sequences) != len(partition.blocks):
        raise DomainError(
            f"Mean model has {len(means.sequences)} sequences for {len(partition.blocks)} blocks"
        )
    data = _render(partition.labels(), means.table(d), noise, d, workers)
    logger.debug(f"Generated {d} frames of {lat.rows}x{lat.cols} (seed {noise.seed})")
    return FrameSequence(data)


def total_average_change(means: MeanModel, block_a: int, block_b: int, d: int) -> float:
    """Finite-d total average change sum_k |m_k(a) - m_k(b)|^2 / d."""
    if d < 1:
        raise DomainError(f"Need d >= 1 frames, got {d}")
    count = len(means.sequences)
    for block in (block_a, block_b):
        if not (0 <= block < count):
            raise DomainError(f"Block {block} outside [0, {count - 1}]")
    delta = means.sequences[block_a].values(d) - means.sequences[block_b].values(d)
    return float(np.mean(delta * delta))


def noise_to_change_ratio(sigma2: float, delta2_inf: float, N: int) -> float:
    """rho = sigma2 / (N * delta2_inf)."""
    if delta2_inf <= 0:
        raise DomainError("Total average change must be positive for a common change set")
    if N < 4:
        raise DomainError(f"Window N={N} must be >= 4")
    if sigma2 <= 0:
        raise DomainError(f"Noise variance must be positive, got {sigma2}")
    return sigma2 / (N * delta2_inf)


def frame_average(seq: FrameSequence) -> np.ndarray:
    """Pointwise mean over the frames."""
    return seq.data.mean(axis=0)


@dataclass(frozen=True)
class ShapeBlock:
    shape: ShapeSpec
    means: MeanSequence = DRIFT_PLUS_ALT


@dataclass(frozen=True)
class Scenario:
    """Lattice, change-set shapes with their mean generators, background, noise and d."""

    lattice: Lattice
    shapes: Tuple[ShapeBlock, ...] = ()
    background: MeanSequence = DRIFT
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    frames: int = 1000

    def __post_init__(self) -> None:
        if self.frames < 1:
            raise DomainError(f"Need d >= 1 frames, got {self.frames}")
        object.__setattr__(self, "shapes", tuple(self.shapes))

    def shape_sets(self) -> Tuple[PointSet, ...]:
        return tuple(make_shape(block.shape, self.lattice) for block in self.shapes)

    def truth(self) -> PointSet:
        """Union of all change sets; empty without shapes."""
        truth = PointSet.empty(self.lattice)
        for part in self.shape_sets():
            if truth.members & part.members:
                raise DomainError("Scenario shapes overlap")
            truth = truth | part
        return truth

    def partition(self) -> Optional[Partition]:
        """S^c followed by the shapes; None when there is no change set."""
        parts = self.shape_sets()
        if not parts:
            return None
        rest = self.lattice.full()
        for part in parts:
            rest = rest - part
        if not is_connected(rest):
            raise DomainError("Complement of the change sets is not connected")
        return Partition((rest,) + parts)

    def mean_model(self) -> MeanModel:
        return MeanModel((self.background,) + tuple(block.means for block in self.shapes))

    def with_frames(self, frames: int) -> "Scenario":
        return replace(self, frames=frames)

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, noise=replace(self.noise, seed=seed))

    def with_noise(
        self, sigma2: Optional[float] = None, enabled: Optional[bool] = None
    ) -> "Scenario":
        noise = self.noise
        if sigma2 is not None:
            noise = replace(noise, sigma2=sigma2)
        if enabled is not None:
            noise = replace(noise, enabled=enabled)
        return replace(self, noise=noise)

    def generate(self, workers: int = 1) -> FrameSequence:
        """One frame sequence for the scenario's current seed."""
        partition = self.partition()
        if partition is not None:
            return generate(
                self.lattice, partition, self.mean_model(), self.noise, self.frames, workers
            )
        labels = np.zeros(self.lattice.shape, dtype=np.intp)
        table = self.background.values(self.frames)[None, :]
        return FrameSequence(_render(labels, table, self.noise, self.frames, workers))


def _lattice_100() -> Lattice:
    return Lattice(100, 100)


def table_scenario(frames: int = 1000, sigma2: float = 2.0, seed: int = 0) -> Scenario:
    """Rectangle w=100/3 at (50,50) on 100x100, m_k(S)=k+(-1)^k against m_k(S^c)=k."""
    rect = ShapeSpec(math.inf, Fraction(100, 3), Point(50, 50))
    return Scenario(
        _lattice_100(),
        (ShapeBlock(rect, DRIFT_PLUS_ALT),),
        DRIFT,
        NoiseSpec(sigma2, seed),
        frames,
    )


def diamond_scenario(frames: int = 1000, sigma2: float = 2.0, seed: int = 0) -> Scenario:
    """Diamond w=100/3 at (50,50) on 100x100 with the same means as the rectangle study."""
    diamond = ShapeSpec(1, Fraction(100, 3), Point(50, 50))
    return Scenario(
        _lattice_100(),
        (ShapeBlock(diamond, DRIFT_PLUS_ALT),),
        DRIFT,
        NoiseSpec(sigma2, seed),
        frames,
    )


def two_shape_scenario(frames: int = 1000, sigma2: float = 1.0, seed: int = 0) -> Scenario:
    """
    Diamond at (32,32) and round set at (68,68), both w=100/6, on 100x100.

    The diamond gets k+(-1)^k and the round set k-(-1)^k against the drift k, so both
    are common change sets with unit total average change.
    """
    w = Fraction(100, 6)
    return Scenario(
        _lattice_100(),
        (
            ShapeBlock(ShapeSpec(1, w, Point(32, 32)), DRIFT_PLUS_ALT),
            ShapeBlock(ShapeSpec(2, w, Point(68, 68)), DRIFT_MINUS_ALT),
        ),
        DRIFT,
        NoiseSpec(sigma2, seed),
        frames,
    )


AVERAGING_KINDS = {
    # kind: (m_k(S), m_k(S^c))
    "a": (MeanSequence("const", 0.0), MeanSequence("const", 1.0)),
    "b": (MeanSequence("zero"), MeanSequence("alt")),
    "c": (MeanSequence("drift"), MeanSequence("drift_plus_alt")),
}


def averaging_scenario(
    kind: str, frames: int = 500, sigma2: float = 2.0, seed: int = 0
) -> Scenario:
    """
    Rectangle study geometry with the mean pairs of the averaging illustration.

    ``a``: 0 inside against 1 outside, ``b``: 0 against (-1)^k, ``c``: k against k+(-1)^k.
    Only ``a`` is visible in the frame average.
    """
    try:
        inside, outside = AVERAGING_KINDS[kind]
    except KeyError:
        raise DomainError(f"Unknown averaging kind {kind!r}. Valid: a, b, c") from None
    base = table_scenario(frames, sigma2, seed)
    return replace(base, shapes=(ShapeBlock(base.shapes[0].shape, inside),), background=outside)


def scenario_summary(scenario: Scenario, shapes: Optional[Sequence[PointSet]] = None) -> dict:
    parts = shapes if shapes is not None else scenario.shape_sets()
    return {
        "rows": scenario.lattice.rows,
        "cols": scenario.lattice.cols,
        "frames": scenario.frames,
        "sigma2": scenario.noise.sigma2,
        "noise": scenario.noise.enabled,
        "seed": scenario.noise.seed,
        "background": str(scenario.background),
        "shapes": [
            {"shape": str(block.shape), "means": str(block.means), "size": len(part)}
            for block, part in zip(scenario.shapes, parts)
        ],
    }
