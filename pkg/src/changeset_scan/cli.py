"""
Command-line surface: generate, estimate, table, figure and validate.

Exit codes: 0 success, 2 invalid input or failed conditions, 3 file errors.
"""

import logging
from pathlib import Path
from typing import Callable, Optional, TypeVar

import typer

from .core.config import Settings, load_grid, load_scenario
from .core.connect import ScanMode, estimate_change_set_detailed, validate_theorem_conditions
from .core.errors import ArtifactIOError, DomainError
from .core.experiment import ExperimentGrid, render_figure, run_table
from .core.io import (
    read_frames,
    read_frames_csv,
    read_point_set,
    write_frames,
    write_frames_csv,
    write_point_set,
    write_scan_csv,
)
from .core.lattice import Lattice, PointSet, jaccard_distance
from .core.scan import OverlapRule
from .core.slicing import FrameSequence
from .core.synth import Scenario, frame_average, table_scenario
from .core.tools import PRESETS

logger = logging.getLogger(__name__)

EXIT_INVALID = 2
EXIT_IO = 3

app = typer.Typer(
    name="changeset-scan",
    help="Estimate common change-in-the-mean sets by overlapping CUSUM scanning.",
    no_args_is_help=True,
)

T = TypeVar("T")


@app.callback()
def main_callback(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level."),
) -> None:
    level = "DEBUG" if verbose else Settings.from_env().log_level
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        force=True,
    )


def _run(action: Callable[[], T]) -> T:
    """Map library errors onto exit codes."""
    try:
        return action()
    except DomainError as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=EXIT_INVALID)
    except (ArtifactIOError, OSError) as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=EXIT_IO)


def _out_dir(out: Optional[Path]) -> Path:
    return out if out is not None else Settings.from_env().out_dir


def _scenario(config: Optional[Path], preset: str) -> Scenario:
    if config is not None:
        return load_scenario(config)
    if preset not in PRESETS:
        raise DomainError(f"Unknown preset {preset!r}. Valid: {', '.join(sorted(PRESETS))}")
    return PRESETS[preset]()


def _load_frames(path: Path) -> FrameSequence:
    return read_frames_csv(path) if path.is_dir() else read_frames(path)


@app.command()
def generate(
    config: Optional[Path] = typer.Option(None, "--config", help="Scenario config file."),
    preset: str = typer.Option("table", "--preset", help="Scenario preset without --config."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Noise seed (u64)."),
    frames: Optional[int] = typer.Option(None, "--frames", help="Override d."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory."),
    csv: bool = typer.Option(False, "--csv", help="Also write one CSV file per frame."),
) -> None:
    """Draw a frame sequence and its truth set."""

    def action() -> None:
        scenario = _scenario(config, preset)
        if seed is not None:
            scenario = scenario.with_seed(seed)
        if frames is not None:
            scenario = scenario.with_frames(frames)
        target = _out_dir(out)
        seq = scenario.generate(Settings.from_env().workers)
        write_frames(target / "frames.csf", seq)
        write_point_set(target / "truth.txt", scenario.truth())
        if csv:
            write_frames_csv(target / "frames_csv", seq)
        lat = seq.lattice
        typer.echo(f"wrote {seq.frames} frames of {lat.rows}x{lat.cols} to {target}")

    _run(action)


@app.command()
def estimate(
    frames: Path = typer.Argument(..., help="Frame file or CSV frame directory."),
    mode: str = typer.Option("h", "--mode", help="h, v or both."),
    rule: str = typer.Option("6,2", "--rule", help="Overlapping rule N,Q."),
    gamma: float = typer.Option(0.0, "--gamma", help="Weight exponent in [0, 0.5)."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory."),
    truth: Optional[Path] = typer.Option(None, "--truth", help="Truth point file to score."),
) -> None:
    """Estimate the change set of a frame sequence."""

    def action() -> None:
        seq = _load_frames(frames)
        result = estimate_change_set_detailed(
            seq, ScanMode.parse(mode), OverlapRule.parse(rule), gamma,
            Settings.from_env().workers,
        )
        target = _out_dir(out)
        write_point_set(target / "estimate.txt", result.estimate)
        write_point_set(target / "relevant.txt", result.relevant)
        write_scan_csv(target / "scan.csv", result.fields.values())
        truth_set = read_point_set(truth, seq.lattice) if truth is not None else None
        render_figure(
            target, "estimate", truth=truth_set, estimate=result.estimate, relevant=result.relevant
        )
        typer.echo(f"estimate: {len(result.estimate)} points, relevant: {len(result.relevant)}")
        if truth_set is not None:
            typer.echo(f"jaccard: {jaccard_distance(result.estimate, truth_set):.6f}")
            typer.echo(f"exact: {result.estimate == truth_set}")

    _run(action)


@app.command()
def table(
    config: Optional[Path] = typer.Option(None, "--config", help="Scenario and grid config."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Base seed (u64)."),
    reps: Optional[int] = typer.Option(None, "--reps", help="Repetitions per cell."),
    full_table: bool = typer.Option(False, "--full-table", help="4 rules x 5 gammas x 5 d."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory."),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker processes."),
) -> None:
    """Expected Jaccard distances over a grid of d, rules, gammas and modes."""

    def action() -> None:
        scenario = load_scenario(config) if config is not None else table_scenario()
        base_seed = seed if seed is not None else scenario.noise.seed
        if full_table:
            grid = ExperimentGrid.full(reps if reps is not None else 100, base_seed)
        elif config is not None:
            grid = load_grid(config, base_seed, reps)
        else:
            grid = ExperimentGrid.desk(reps if reps is not None else 100, base_seed)
        count = workers if workers is not None else Settings.from_env().workers
        target = _out_dir(out) / "table.csv"
        rows = run_table(grid, scenario, target, count)
        typer.echo(f"wrote {len(rows)} cells to {target}")

    _run(action)


@app.command()
def figure(
    truth: Optional[Path] = typer.Option(None, "--truth", help="Truth point file."),
    estimate_file: Optional[Path] = typer.Option(None, "--estimate", help="Estimate point file."),
    relevant: Optional[Path] = typer.Option(None, "--relevant", help="Relevant point file."),
    frames: Optional[Path] = typer.Option(None, "--frames", help="Frames to average."),
    rows: int = typer.Option(100, "--rows", help="Lattice rows for point files."),
    cols: int = typer.Option(100, "--cols", help="Lattice columns for point files."),
    prefix: str = typer.Option("figure", "--prefix", help="File name prefix."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory."),
) -> None:
    """Render point sets and frame averages as PGM rasters."""

    def action() -> None:
        average = None
        lat = Lattice(rows, cols)
        if frames is not None:
            seq = _load_frames(frames)
            average = frame_average(seq)
            lat = seq.lattice

        def points(path: Optional[Path]) -> Optional[PointSet]:
            return read_point_set(path, lat) if path is not None else None

        written = render_figure(
            _out_dir(out),
            prefix,
            truth=points(truth),
            estimate=points(estimate_file),
            relevant=points(relevant),
            average=average,
        )
        for path in written.values():
            typer.echo(str(path))

    _run(action)


@app.command()
def validate(
    truth: Optional[Path] = typer.Argument(None, help="Truth point file (or use --config)."),
    xi: int = typer.Option(..., "--xi", help="Minimal chord length xi."),
    mode: str = typer.Option("h", "--mode", help="h, v or both."),
    window: Optional[int] = typer.Option(None, "--window", help="Rule window N (default xi)."),
    rule: Optional[str] = typer.Option(None, "--rule", help="Take N from a rule N,Q."),
    config: Optional[Path] = typer.Option(None, "--config", help="Scenario whose truth to check."),
    rows: int = typer.Option(100, "--rows", help="Lattice rows for the point file."),
    cols: int = typer.Option(100, "--cols", help="Lattice columns for the point file."),
) -> None:
    """Check the exact-recovery conditions for a truth set."""

    def action() -> bool:
        if config is not None:
            scenario = load_scenario(config)
            lat, truth_set = scenario.lattice, scenario.truth()
        elif truth is not None:
            lat = Lattice(rows, cols)
            truth_set = read_point_set(truth, lat)
        else:
            raise DomainError("Give a truth point file or --config")
        n = OverlapRule.parse(rule).window if rule is not None else window
        report = validate_theorem_conditions(truth_set, lat, xi, ScanMode.parse(mode), n)
        for clause in report.clauses:
            status = "PASS" if clause.passed else "FAIL"
            typer.echo(f"{status}  {clause.name}: {clause.detail}")
        if report.multi_set:
            typer.echo("note: several change sets; checked per component")
        return report.passed

    if not _run(action):
        raise typer.Exit(code=EXIT_INVALID)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
