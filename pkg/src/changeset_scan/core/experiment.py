"""
Monte-Carlo harness: repeated generate -> estimate -> score runs.

Each trial draws one frame sequence and evaluates every (mode, rule, gamma) of interest
on it, so cells of the same d share their random draws. Trial seeds depend only on the
base seed, d and the trial index, which keeps results identical for any worker count
or cell order.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass
from itertools import repeat
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .connect import ScanMode, estimate_change_set, estimate_from_fields
from .cusum import Gamma
from .errors import DomainError
from .io import TableCsvWriter, overlay_image, scale_to_gray, write_pgm
from .lattice import Lattice, PointSet, jaccard_distance
from .scan import OverlapRule, ScanField, scan
from .slicing import Orientation
from .synth import SEED_LIMIT, Scenario

logger = logging.getLogger(__name__)

DESK_RULES = (OverlapRule(4, 1), OverlapRule(6, 2))
DESK_GAMMAS = (0.0, 0.1, 0.3)
DESK_D = (300, 500, 1000)

FULL_RULES = (OverlapRule(4, 1), OverlapRule(4, 2), OverlapRule(6, 2), OverlapRule(6, 4))
FULL_GAMMAS = (0.0, 0.1, 0.2, 0.3, 0.4)
FULL_D = (100, 200, 300, 500, 1000)

Config = Tuple[ScanMode, OverlapRule, float]
Score = Tuple[float, bool]


@dataclass(frozen=True)
class CellKey:
    d: int
    rule: OverlapRule
    gamma: float
    mode: ScanMode


@dataclass(frozen=True)
class ExperimentGrid:
    """Axes of a result table; cells are visited by d, rule, gamma, mode."""

    d_values: Tuple[int, ...]
    rules: Tuple[OverlapRule, ...]
    gammas: Tuple[float, ...]
    modes: Tuple[ScanMode, ...] = (ScanMode.HORIZONTAL, ScanMode.BOTH)
    reps: int = 100
    base_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("d_values", "rules", "gammas", "modes"):
            values = tuple(getattr(self, name))
            if not values:
                raise DomainError(f"Experiment grid needs at least one entry in {name}")
            object.__setattr__(self, name, values)
        if any(d < 1 for d in self.d_values):
            raise DomainError(f"Every d must be >= 1, got {self.d_values}")
        object.__setattr__(self, "gammas", tuple(Gamma(float(g)).value for g in self.gammas))
        if self.reps < 1:
            raise DomainError(f"Repetitions must be >= 1, got {self.reps}")
        if not (0 <= self.base_seed < SEED_LIMIT):
            raise DomainError(f"Base seed must be an unsigned 64-bit integer, got {self.base_seed}")

    @classmethod
    def desk(cls, reps: int = 100, base_seed: int = 0) -> "ExperimentGrid":
        return cls(DESK_D, DESK_RULES, DESK_GAMMAS, reps=reps, base_seed=base_seed)

    @classmethod
    def full(cls, reps: int = 100, base_seed: int = 0) -> "ExperimentGrid":
        return cls(FULL_D, FULL_RULES, FULL_GAMMAS, reps=reps, base_seed=base_seed)

    def configs(self) -> List[Config]:
        return [
            (mode, rule, gamma)
            for rule in self.rules
            for gamma in self.gammas
            for mode in self.modes
        ]

    def cells(self) -> Iterator[CellKey]:
        for d in self.d_values:
            for mode, rule, gamma in self.configs():
                yield CellKey(d, rule, gamma, mode)

    @property
    def size(self) -> int:
        return len(self.d_values) * len(self.rules) * len(self.gammas) * len(self.modes)


@dataclass(frozen=True)
class CellResult:
    """Expected Jaccard distance of one cell with its Monte-Carlo error."""

    mean: float
    stderr: float
    exact_freq: float
    reps: int

    @classmethod
    def from_trials(cls, scores: Sequence[Score]) -> "CellResult":
        if not scores:
            raise DomainError("A cell needs at least one trial")
        jaccards = np.array([s[0] for s in scores], dtype=np.float64)
        exact = np.array([s[1] for s in scores], dtype=bool)
        reps = len(scores)
        stderr = float(jaccards.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
        return cls(float(jaccards.mean()), stderr, float(exact.mean()), reps)


@dataclass(frozen=True)
class TableRow:
    key: CellKey
    result: CellResult

    def as_csv(self) -> List[Union[int, str]]:
        return [
            self.key.rule.window,
            self.key.rule.run,
            f"{self.key.gamma:.6f}",
            self.key.d,
            self.key.mode.value,
            f"{self.result.mean:.6f}",
            f"{self.result.stderr:.6f}",
            f"{self.result.exact_freq:.6f}",
        ]


def trial_seed(base_seed: int, d: int, trial: int) -> int:
    """64-bit seed of one trial, mixed from (base seed, d, trial index)."""
    seq = np.random.SeedSequence(base_seed, spawn_key=(d, trial))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def score(estimate: PointSet, truth: PointSet) -> Score:
    return jaccard_distance(estimate, truth), estimate == truth


def _evaluate(scenario: Scenario, seed: int, configs: Sequence[Config]) -> List[Score]:
    """One draw, every config estimated on it; scans are shared between configs."""
    seq = scenario.with_seed(seed).generate()
    truth = scenario.truth()
    cache: Dict[Tuple[Orientation, int, float], ScanField] = {}
    scores = []
    for mode, rule, gamma in configs:
        fields = {}
        for orientation in mode.orientations:
            key = (orientation, rule.window, gamma)
            if key not in cache:
                cache[key] = scan(seq, orientation, rule.window, gamma)
            fields[orientation] = cache[key]
        estimate = estimate_from_fields(fields, rule, seq.lattice).estimate
        scores.append(score(estimate, truth))
    logger.debug(f"Trial seed {seed}: {len(configs)} configs scored")
    return scores


def _run_trials(
    scenario: Scenario,
    configs: Sequence[Config],
    seeds: Sequence[int],
    workers: int,
) -> List[List[Score]]:
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(_evaluate, repeat(scenario), seeds, repeat(list(configs))))
    return [_evaluate(scenario, seed, configs) for seed in seeds]


def run_trial(
    scenario: Scenario,
    mode: ScanMode,
    rule: OverlapRule,
    gamma: float,
    seed: int,
) -> Score:
    """Jaccard distance to the truth and the exact-recovery flag for one seeded draw."""
    seq = scenario.with_seed(seed).generate()
    estimate = estimate_change_set(seq, mode, rule, gamma)
    return score(estimate, scenario.truth())


def run_cell(
    scenario: Scenario,
    mode: ScanMode,
    rule: OverlapRule,
    gamma: float,
    d: int,
    reps: int,
    base_seed: int,
    workers: int = 1,
) -> CellResult:
    """Average of ``reps`` independent trials with d frames each."""
    if reps < 1:
        raise DomainError(f"Repetitions must be >= 1, got {reps}")
    Gamma(float(gamma))
    seeds = [trial_seed(base_seed, d, t) for t in range(reps)]
    trials = _run_trials(scenario.with_frames(d), [(mode, rule, float(gamma))], seeds, workers)
    result = CellResult.from_trials([t[0] for t in trials])
    logger.info(
        f"Cell {rule} gamma={gamma} d={d} {mode.value}: Ed_J={result.mean:.3f} "
        f"(+/- {result.stderr:.3f}, exact {result.exact_freq:.2f})"
    )
    return result


def run_table(
    grid: ExperimentGrid,
    scenario: Scenario,
    out_path: Optional[Union[str, Path]] = None,
    workers: int = 1,
) -> List[TableRow]:
    """
    Fill every cell of ``grid``.

    With ``out_path`` the CSV is written as rows complete: all cells of one d finish
    together because they share their draws, and are flushed before the next d starts.
    """
    configs = grid.configs()
    rows: List[TableRow] = []
    sink = TableCsvWriter(out_path) if out_path is not None else nullcontext()
    with sink as writer:
        for d in grid.d_values:
            seeds = [trial_seed(grid.base_seed, d, t) for t in range(grid.reps)]
            trials = _run_trials(scenario.with_frames(d), configs, seeds, workers)
            batch = []
            for c, (mode, rule, gamma) in enumerate(configs):
                result = CellResult.from_trials([t[c] for t in trials])
                batch.append(TableRow(CellKey(d, rule, gamma, mode), result))
            if writer is not None:
                writer.write_rows([row.as_csv() for row in batch])
            rows.extend(batch)
            logger.info(f"Finished {len(batch)} cells for d={d} ({grid.reps} reps)")
    return rows


def render_figure(
    out_dir: Union[str, Path],
    prefix: str = "figure",
    truth: Optional[PointSet] = None,
    estimate: Optional[PointSet] = None,
    relevant: Optional[PointSet] = None,
    average: Optional[np.ndarray] = None,
) -> Dict[str, Path]:
    """
    PGM rasters in ``out_dir``.

    ``<prefix>_truth.pgm`` shows the truth, ``<prefix>_est.pgm`` the estimate over the
    truth, ``<prefix>_rel.pgm`` the relevant points over the truth and
    ``<prefix>_avg.pgm`` a linearly scaled frame average.
    """
    sets = [s for s in (truth, estimate, relevant) if s is not None]
    if not sets and average is None:
        raise DomainError("Nothing to render")
    lat: Optional[Lattice] = sets[0].lattice if sets else None
    if lat is None and average is not None:
        lat = Lattice(*average.shape)
    out = Path(out_dir)
    written: Dict[str, Path] = {}
    if truth is not None:
        written["truth"] = write_pgm(out / f"{prefix}_truth.pgm", overlay_image(lat, truth))
    if estimate is not None:
        image = overlay_image(lat, truth, estimate=estimate)
        written["estimate"] = write_pgm(out / f"{prefix}_est.pgm", image)
    if relevant is not None:
        image = overlay_image(lat, truth, relevant=relevant)
        written["relevant"] = write_pgm(out / f"{prefix}_rel.pgm", image)
    if average is not None:
        written["average"] = write_pgm(out / f"{prefix}_avg.pgm", scale_to_gray(average))
    return written
