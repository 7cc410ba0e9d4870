"""MCP server exposing change-set estimation and the Monte-Carlo harness as tools."""

import logging
import os
from typing import Any, Dict, Optional

from mcp.server.fastmcp import FastMCP

from .core.config import Settings
from .core.memory import changeset_load_to_memory, changeset_memory_status, changeset_unload_file
from .core.state import init_state
from .core.tools import (
    PRESETS,
    changeset_estimate,
    changeset_generate,
    changeset_noise_ratio,
    changeset_run_cell,
    changeset_validate,
)

logging.basicConfig(
    level=os.getenv("CHANGESET_SCAN_LOG_LEVEL", "INFO").upper(),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

GUIDE = f"""
Change-set scanning server.

Frames are d observations of an m x n lattice. A change set is a region whose mean
sequence differs from its surroundings in every frame. The estimator slices rows
(and, in mode "both", columns) into overlapping windows of length N, estimates one
CUSUM change point per window, keeps points repeated over Q+1 consecutive windows
(the (N,Q) rule, even N >= 4, 1 <= Q <= N-2) and connects them per slice.

Typical flow:
  1. generate_frames(out_file, preset=...)   presets: {", ".join(sorted(PRESETS))}
  2. estimate_change_set(file_path, mode="both", rule="6,2", gamma=0.0)
  3. validate_conditions(points_file, rows, cols, xi, mode)
  4. run_cell(...) for expected Jaccard distances over repeated draws
"""


def create_server(
    default_frames_file: Optional[str] = None, out_dir: Optional[str] = None
) -> FastMCP:
    """Create and configure the FastMCP server."""
    mcp = FastMCP(name="changeset-scan")
    init_state(default_frames_file, out_dir)

    @mcp.tool()
    def initialize_changeset() -> str:
        """Usage notes for the change-set tools."""
        return GUIDE

    @mcp.tool()
    def generate_frames(
        out_file: str,
        config_path: Optional[str] = None,
        preset: str = "table",
        seed: Optional[int] = None,
        frames: Optional[int] = None,
    ) -> Dict[str, Any]:
        """Draw synthetic frames for a scenario (config file or preset) and save them."""
        return changeset_generate(out_file, config_path, preset, seed, frames)

    @mcp.tool()
    def estimate_change_set(
        file_path: Optional[str] = None,
        mode: str = "h",
        rule: str = "6,2",
        gamma: float = 0.0,
        out_dir: Optional[str] = None,
    ) -> Dict[str, Any]:
        """Estimate the change set of a frame file with the overlapping (N,Q) rule."""
        return changeset_estimate(file_path, mode, rule, gamma, out_dir)

    @mcp.tool()
    def validate_conditions(
        points_file: str, rows: int, cols: int, xi: int, mode: str = "h",
        window: Optional[int] = None,
    ) -> Dict[str, Any]:
        """Check the exact-recovery conditions for a truth point set."""
        return changeset_validate(points_file, rows, cols, xi, mode, window)

    @mcp.tool()
    def run_cell(
        config_path: Optional[str] = None,
        preset: str = "table",
        mode: str = "h",
        rule: str = "6,2",
        gamma: float = 0.0,
        d: int = 1000,
        reps: int = 10,
        seed: int = 0,
    ) -> Dict[str, Any]:
        """Expected Jaccard distance, standard error and exact-recovery rate of one cell."""
        return changeset_run_cell(config_path, preset, mode, rule, gamma, d, reps, seed)

    @mcp.tool()
    def noise_to_change_ratio(sigma2: float, delta2: float, window: int) -> Dict[str, Any]:
        """rho = sigma2 / (N * delta2)."""
        return changeset_noise_ratio(sigma2, delta2, window)

    @mcp.tool()
    def load_frames(file_path: Optional[str] = None) -> Dict[str, Any]:
        """Load a frame file or CSV frame directory into memory."""
        return changeset_load_to_memory(file_path)

    @mcp.tool()
    def memory_status() -> Dict[str, Any]:
        """Frame sequences currently held in memory."""
        return changeset_memory_status()

    @mcp.tool()
    def unload_frames(file_path: Optional[str] = None) -> Dict[str, Any]:
        """Drop a frame sequence from memory."""
        return changeset_unload_file(file_path)

    logger.info("Registered change-set tools")
    return mcp


def main():
    """Main entry point for the MCP server."""
    settings = Settings.from_env()
    server = create_server(settings.default_frames, str(settings.out_dir))
    logger.info("Starting change-set scanning MCP server")
    server.run()


if __name__ == "__main__":
    main()
