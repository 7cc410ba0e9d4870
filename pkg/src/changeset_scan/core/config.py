"""
Environment settings and the key/value scenario and grid files.

A config file holds ``key = value`` lines; ``#`` starts a comment and blank lines are
ignored. ``shape`` may repeat:

    rows = 100
    cols = 100
    frames = 1000
    sigma2 = 2
    seed = 0
    background = drift
    shape = inf 100/3 50 50 drift_plus_alt

    d_values = 300 500 1000
    rules = 4,1 6,2
    gammas = 0 0.1 0.3
    modes = horizontal both
    reps = 100
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

from .connect import ScanMode
from .errors import ArtifactIOError, DomainError
from .experiment import DESK_D, DESK_GAMMAS, DESK_RULES, ExperimentGrid
from .lattice import Lattice, Point
from .scan import OverlapRule
from .synth import DRIFT_PLUS_ALT, MeanSequence, NoiseSpec, Scenario, ShapeBlock, ShapeSpec

logger = logging.getLogger(__name__)

SCENARIO_KEYS = {"rows", "cols", "frames", "sigma2", "noise", "seed", "background", "shape"}
GRID_KEYS = {"d_values", "rules", "gammas", "modes", "reps"}

DEFAULT_OUT_DIR = "./changeset-out"


@dataclass(frozen=True)
class Settings:
    out_dir: Path
    workers: int = 1
    log_level: str = "INFO"
    default_frames: Optional[str] = None

    @classmethod
    def from_env(cls) -> "Settings":
        workers_raw = os.getenv("CHANGESET_SCAN_WORKERS", "1")
        try:
            workers = max(1, int(workers_raw))
        except ValueError:
            raise DomainError(
                f"CHANGESET_SCAN_WORKERS must be an integer, got {workers_raw!r}"
            ) from None
        return cls(
            out_dir=Path(os.getenv("CHANGESET_SCAN_OUT_DIR", DEFAULT_OUT_DIR)).expanduser(),
            workers=workers,
            log_level=os.getenv("CHANGESET_SCAN_LOG_LEVEL", "INFO").upper(),
            default_frames=os.getenv("CHANGESET_SCAN_DEFAULT_FRAMES"),
        )


def parse_config(text: str) -> Dict[str, List[str]]:
    """Key -> list of raw values, in file order."""
    entries: Dict[str, List[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"Config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCENARIO_KEYS | GRID_KEYS:
            raise DomainError(f"Config line {lineno}: unknown key {key!r}")
        entries.setdefault(key, []).append(value)
    return entries


def read_config(path: Union[str, Path]) -> Dict[str, List[str]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(str(path), "reading", e) from e
    entries = parse_config(text)
    logger.info(f"Loaded {sum(len(v) for v in entries.values())} config entries from {path}")
    return entries


def _single(entries: Dict[str, List[str]], key: str) -> Optional[str]:
    values = entries.get(key)
    if not values:
        return None
    if len(values) > 1:
        raise DomainError(f"Config key {key!r} given {len(values)} times")
    return values[0]


def _int(entries: Dict[str, List[str]], key: str, default: int) -> int:
    raw = _single(entries, key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"Config key {key!r}: {raw!r} is not an integer") from None


def _float(entries: Dict[str, List[str]], key: str, default: float) -> float:
    raw = _single(entries, key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise DomainError(f"Config key {key!r}: {raw!r} is not a number") from None


def parse_shape(value: str) -> ShapeBlock:
    """``<p> <w> <row> <col> [<generator>]``."""
    fields = value.split()
    if len(fields) not in (4, 5):
        raise DomainError(f"Shape must be '<p> <w> <row> <col> [<generator>]', got {value!r}")
    try:
        center = Point(int(fields[2]), int(fields[3]))
    except ValueError:
        raise DomainError(f"Shape centre must be integers, got {value!r}") from None
    means = MeanSequence.parse(fields[4]) if len(fields) == 5 else DRIFT_PLUS_ALT
    return ShapeBlock(ShapeSpec(fields[0], fields[1], center), means)


def scenario_from_entries(entries: Dict[str, List[str]]) -> Scenario:
    rows = _int(entries, "rows", 100)
    cols = _int(entries, "cols", 100)
    noise_flag = (_single(entries, "noise") or "on").lower()
    if noise_flag not in ("on", "off"):
        raise DomainError(f"Config key 'noise' must be on or off, got {noise_flag!r}")
    noise = NoiseSpec(
        sigma2=_float(entries, "sigma2", 2.0),
        seed=_int(entries, "seed", 0),
        enabled=noise_flag == "on",
    )
    background = _single(entries, "background")
    return Scenario(
        Lattice(rows, cols),
        tuple(parse_shape(v) for v in entries.get("shape", [])),
        MeanSequence.parse(background) if background else MeanSequence("drift"),
        noise,
        _int(entries, "frames", 1000),
    )


def grid_from_entries(
    entries: Dict[str, List[str]],
    base_seed: int = 0,
    reps: Optional[int] = None,
) -> ExperimentGrid:
    """Grid keys override the desk-scale defaults; ``reps`` overrides the file."""

    def tokens(key: str) -> Optional[List[str]]:
        raw = _single(entries, key)
        return raw.split() if raw is not None else None

    try:
        d_values = tuple(int(t) for t in tokens("d_values") or []) or DESK_D
        gammas = tuple(float(t) for t in tokens("gammas") or []) or DESK_GAMMAS
    except ValueError as e:
        raise DomainError(f"Invalid grid value: {e}") from e
    rules = tuple(OverlapRule.parse(t) for t in tokens("rules") or []) or DESK_RULES
    modes = tuple(ScanMode.parse(t) for t in tokens("modes") or []) or (
        ScanMode.HORIZONTAL,
        ScanMode.BOTH,
    )
    file_reps = _int(entries, "reps", 100)
    return ExperimentGrid(
        d_values,
        rules,
        gammas,
        modes,
        reps=reps if reps is not None else file_reps,
        base_seed=base_seed,
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    return scenario_from_entries(read_config(path))


def load_grid(
    path: Union[str, Path], base_seed: int = 0, reps: Optional[int] = None
) -> ExperimentGrid:
    return grid_from_entries(read_config(path), base_seed, reps)
