"""
Tool-server operations: generation, estimation, validation and Monte-Carlo cells.

Every function returns a result dict with ``success`` and ``message``; failures carry
``error`` instead of raising.
"""

import logging
import os
from typing import Any, Callable, Dict, Optional

from .config import Settings, load_scenario
from .connect import ScanMode, estimate_change_set_detailed, validate_theorem_conditions
from .experiment import render_figure, run_cell
from .io import read_point_set, write_point_set
from .lattice import Lattice
from .scan import OverlapRule
from .synth import (
    Scenario,
    averaging_scenario,
    diamond_scenario,
    noise_to_change_ratio,
    scenario_summary,
    table_scenario,
    two_shape_scenario,
)
from .state import get_state

logger = logging.getLogger(__name__)

MAX_LISTED_POINTS = 200

PRESETS: Dict[str, Callable[[], Scenario]] = {
    "table": table_scenario,
    "diamond": diamond_scenario,
    "two_shape": two_shape_scenario,
    "averaging_a": lambda: averaging_scenario("a"),
    "averaging_b": lambda: averaging_scenario("b"),
    "averaging_c": lambda: averaging_scenario("c"),
}


def resolve_scenario(config_path: Optional[str] = None, preset: str = "table") -> Scenario:
    """Scenario from a config file, else from a named preset."""
    if config_path:
        return load_scenario(os.path.expanduser(config_path))
    if preset not in PRESETS:
        raise ValueError(f"Unknown preset {preset!r}. Valid: {', '.join(sorted(PRESETS))}")
    return PRESETS[preset]()


def changeset_generate(
    out_file: str,
    config_path: Optional[str] = None,
    preset: str = "table",
    seed: Optional[int] = None,
    frames: Optional[int] = None,
) -> Dict[str, Any]:
    """Draw a frame sequence for a scenario and save it as a frame file."""
    try:
        scenario = resolve_scenario(config_path, preset)
        if seed is not None:
            scenario = scenario.with_seed(seed)
        if frames is not None:
            scenario = scenario.with_frames(frames)
        seq = scenario.generate()
        state = get_state()
        actual_file_path = os.path.expanduser(out_file)
        state.store_frames(actual_file_path, seq)
        return {
            "success": True,
            "file_path": actual_file_path,
            "scenario": scenario_summary(scenario),
            "truth_size": len(scenario.truth()),
            "message": f"Generated {scenario.frames} frames into {actual_file_path}",
        }
    except Exception as e:
        return {
            "success": False,
            "error": str(e),
            "message": f"Error generating frames: {str(e)}",
        }


def changeset_estimate(
    file_path: Optional[str] = None,
    mode: str = "h",
    rule: str = "6,2",
    gamma: float = 0.0,
    out_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """Estimate the change set of a frame file; writes the point set and PGM rasters."""
    try:
        state = get_state()
        actual_file_path = state.get_file_path(file_path)
        seq = state.load_frames(actual_file_path)
        scan_mode = ScanMode.parse(mode)
        overlap = OverlapRule.parse(rule)
        result = estimate_change_set_detailed(seq, scan_mode, overlap, gamma)
        state.remember_estimate(actual_file_path, result)

        target = os.path.expanduser(out_dir or state.out_dir)
        stem = os.path.splitext(os.path.basename(actual_file_path))[0]
        points_path = os.path.join(target, f"{stem}_estimate.txt")
        points_file = write_point_set(points_path, result.estimate)
        images = render_figure(target, stem, estimate=result.estimate, relevant=result.relevant)
        response: Dict[str, Any] = {
            "success": True,
            "file_path": actual_file_path,
            "mode": scan_mode.value,
            "rule": str(overlap),
            "gamma": float(gamma),
            "estimate_size": len(result.estimate),
            "relevant_size": len(result.relevant),
            "points_file": str(points_file),
            "images": {k: str(v) for k, v in images.items()},
            "message": f"Estimated {len(result.estimate)} change points in {actual_file_path}",
        }
        if len(result.estimate) <= MAX_LISTED_POINTS:
            response["points"] = [list(p) for p in result.estimate.sorted()]
        return response
    except Exception as e:
        return {
            "success": False,
            "error": str(e),
            "message": f"Error estimating change set: {str(e)}",
        }


def changeset_validate(
    points_file: str,
    rows: int,
    cols: int,
    xi: int,
    mode: str = "h",
    window: Optional[int] = None,
) -> Dict[str, Any]:
    """Check the exact-recovery conditions for a truth set stored as a point file."""
    try:
        lat = Lattice(rows, cols)
        truth = read_point_set(os.path.expanduser(points_file), lat)
        report = validate_theorem_conditions(truth, lat, xi, ScanMode.parse(mode), window)
        response = report.to_dict()
        response["success"] = True
        response["message"] = (
            "All conditions hold" if report.passed
            else f"{len(report.failures())} conditions fail"
        )
        return response
    except Exception as e:
        return {
            "success": False,
            "error": str(e),
            "message": f"Error validating conditions: {str(e)}",
        }


def changeset_run_cell(
    config_path: Optional[str] = None,
    preset: str = "table",
    mode: str = "h",
    rule: str = "6,2",
    gamma: float = 0.0,
    d: int = 1000,
    reps: int = 10,
    seed: int = 0,
) -> Dict[str, Any]:
    """Expected Jaccard distance of one table cell."""
    try:
        scenario = resolve_scenario(config_path, preset)
        workers = Settings.from_env().workers
        result = run_cell(
            scenario, ScanMode.parse(mode), OverlapRule.parse(rule), gamma, d, reps, seed, workers
        )
        return {
            "success": True,
            "mean": result.mean,
            "stderr": result.stderr,
            "exact_freq": result.exact_freq,
            "reps": result.reps,
            "message": f"Ed_J = {result.mean:.3f} +/- {result.stderr:.3f} over {reps} trials",
        }
    except Exception as e:
        return {
            "success": False,
            "error": str(e),
            "message": f"Error running cell: {str(e)}",
        }


def changeset_noise_ratio(sigma2: float, delta2: float, window: int) -> Dict[str, Any]:
    """Noise-to-change ratio sigma2 / (N * delta2)."""
    try:
        rho = noise_to_change_ratio(sigma2, delta2, window)
        return {
            "success": True,
            "rho": rho,
            "message": f"rho = {rho:.6f}",
        }
    except Exception as e:
        return {
            "success": False,
            "error": str(e),
            "message": f"Error computing noise-to-change ratio: {str(e)}",
        }
