"""Tool-server operations on the frame cache."""

import logging
from typing import Any, Dict, Optional

from .state import get_state

logger = logging.getLogger(__name__)


def changeset_load_to_memory(file_path: Optional[str] = None) -> Dict[str, Any]:
    """Load a frame file (or CSV frame directory) into the cache."""
    try:
        state = get_state()
        actual_file_path = state.get_file_path(file_path)
        seq = state.load_frames(actual_file_path)
        d, m, n = seq.data.shape
        return {
            "success": True,
            "file_path": actual_file_path,
            "frames": d,
            "rows": m,
            "cols": n,
            "message": f"Loaded {d} frames of {m}x{n} from {actual_file_path}",
        }
    except Exception as e:
        return {
            "success": False,
            "error": str(e),
            "message": f"Error loading frames to memory: {str(e)}",
        }


def changeset_memory_status() -> Dict[str, Any]:
    """Cached sequences and their sizes."""
    try:
        status = get_state().get_memory_status()
        status["success"] = True
        status["message"] = f"{status['files_loaded']} frame sequences in memory"
        return status
    except Exception as e:
        return {
            "success": False,
            "error": str(e),
            "message": f"Error getting memory status: {str(e)}",
        }


def changeset_unload_file(file_path: Optional[str] = None) -> Dict[str, Any]:
    """Drop a sequence and its remembered estimate from the cache."""
    try:
        state = get_state()
        actual_file_path = state.get_file_path(file_path)
        if not state.unload_file(actual_file_path):
            return {
                "success": False,
                "error": f"File {actual_file_path} not loaded in memory",
                "message": f"File {actual_file_path} not loaded in memory",
            }
        return {
            "success": True,
            "file_path": actual_file_path,
            "message": f"Unloaded {actual_file_path} from memory",
        }
    except Exception as e:
        return {
            "success": False,
            "error": str(e),
            "message": f"Error unloading file: {str(e)}",
        }
