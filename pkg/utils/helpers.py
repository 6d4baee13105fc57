import os
import time
import uuid
from pathlib import Path
from typing import List, Optional, Sequence, Union

from config import GRAPH_EXTENSIONS, REPORTS_DIR, WORKLOAD_EXTENSIONS

PathLike = Union[str, Path]


def validate_file_extension(path: PathLike, allowed_extensions: Sequence[str]) -> bool:
    """Validate that a file has an allowed extension"""
    ext = os.path.splitext(str(path))[1].lower()
    return ext in allowed_extensions


def validate_graph_file(path: PathLike) -> bool:
    """Validate that a file looks like an edge-list graph file"""
    return validate_file_extension(path, GRAPH_EXTENSIONS)


def validate_workload_file(path: PathLike) -> bool:
    """Validate that a file is a JSON workload"""
    return validate_file_extension(path, WORKLOAD_EXTENSIONS)


def parse_vertex_list(text: Optional[str]) -> List[int]:
    """Parse a comma- or space-separated list of vertex ids"""
    if not text:
        return []
    tokens = text.replace(",", " ").split()
    try:
        return [int(tok) for tok in tokens]
    except ValueError as e:
        raise ValueError(f"bad vertex list: {text!r}") from e


def create_report_path(prefix: str = "report", suffix: str = ".json", directory: Optional[PathLike] = None) -> Path:
    """Return a fresh, unique path inside the reports directory"""
    if directory is None:
        directory = REPORTS_DIR
    os.makedirs(directory, exist_ok=True)

    timestamp = int(time.time())
    unique_id = uuid.uuid4().hex[:8]
    return Path(directory) / f"{prefix}_{timestamp}_{unique_id}{suffix}"


def clean_old_reports(max_age_hours: int = 24, directory: Optional[PathLike] = None) -> int:
    """Delete report files older than the specified age"""
    if directory is None:
        directory = REPORTS_DIR
    max_age_seconds = max_age_hours * 3600
    now = time.time()
    count = 0

    folder = Path(directory)
    if not folder.exists():
        return 0
    for item in folder.glob("*"):
        if item.is_file() and now - item.stat().st_mtime > max_age_seconds:
            try:
                os.remove(item)
                count += 1
            except OSError:
                continue

    return count
