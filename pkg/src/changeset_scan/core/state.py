"""
In-memory state for the tool server: frame sequences cached by path.

Frame files are read once and kept as arrays until unloaded. The last estimate computed on
a file is kept under the same path and its size reported by the memory status.
"""

import logging
import os
from typing import Any, Dict, Optional

from .connect import ChangeSetEstimate
from .io import read_frames, read_frames_csv, write_frames
from .slicing import FrameSequence

logger = logging.getLogger(__name__)


class ScanServerState:
    """Frame cache keyed by expanded file path."""

    def __init__(self, default_frames_file: Optional[str] = None, out_dir: Optional[str] = None):
        self.default_frames_file = default_frames_file
        self.out_dir = out_dir or "./changeset-out"
        self.frames: Dict[str, FrameSequence] = {}
        self.estimates: Dict[str, ChangeSetEstimate] = {}

    def get_file_path(self, file_path: Optional[str] = None) -> str:
        """Get the file path to use, defaulting to the configured default."""
        if file_path is None:
            file_path = self.default_frames_file
        if file_path is None:
            raise ValueError("No frame file specified and no default set")
        return os.path.expanduser(file_path)

    def load_frames(self, file_path: str) -> FrameSequence:
        """Frame file or ``frame_*.csv`` directory, cached after the first read."""
        if file_path not in self.frames:
            if os.path.isdir(file_path):
                self.frames[file_path] = read_frames_csv(file_path)
            else:
                self.frames[file_path] = read_frames(file_path)
        return self.frames[file_path]

    def store_frames(self, file_path: str, seq: FrameSequence) -> None:
        write_frames(file_path, seq)
        self.frames[file_path] = seq
        self.estimates.pop(file_path, None)

    def remember_estimate(self, file_path: str, estimate: ChangeSetEstimate) -> None:
        self.estimates[file_path] = estimate

    def get_memory_status(self) -> Dict[str, Any]:
        status: Dict[str, Any] = {
            "files_loaded": len(self.frames),
            "total_bytes": sum(seq.data.nbytes for seq in self.frames.values()),
            "files": {},
        }
        for file_path, seq in self.frames.items():
            d, m, n = seq.data.shape
            status["files"][file_path] = {
                "frames": d,
                "rows": m,
                "cols": n,
                "bytes": seq.data.nbytes,
                "has_estimate": file_path in self.estimates,
                "estimate_points": (
                    len(self.estimates[file_path].estimate) if file_path in self.estimates else 0
                ),
            }
        return status

    def unload_file(self, file_path: str) -> bool:
        """Drop a cached sequence; False if it was not loaded."""
        self.estimates.pop(file_path, None)
        dropped = self.frames.pop(file_path, None) is not None
        if dropped:
            logger.info(f"Unloaded {file_path}")
        return dropped


_state: Optional[ScanServerState] = None


def get_state() -> ScanServerState:
    """Get the global state instance."""
    global _state
    if _state is None:
        _state = ScanServerState()
    return _state


def init_state(
    default_frames_file: Optional[str] = None, out_dir: Optional[str] = None
) -> ScanServerState:
    """Initialize the global state with configuration."""
    global _state
    _state = ScanServerState(default_frames_file, out_dir)
    return _state
