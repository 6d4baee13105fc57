import os
import logging
from typing import Optional, Union
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, ValidationError

from config import REPORTS_DIR
from models.schemas import Workload
from services.errors import OracleError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

class StorageService:
    """Service for writing verify reports and bench tables and reading workloads"""

    @staticmethod
    def _report_path(name: str, directory: Optional[PathLike] = None) -> Path:
        folder = Path(directory or REPORTS_DIR)
        filename = name if name.endswith(".json") else f"{name}.json"
        return folder / filename

    @staticmethod
    def save_report(name: str, report: BaseModel, directory: Optional[PathLike] = None) -> bool:
        """Save a report model as JSON"""
        try:
            path = StorageService._report_path(name, directory)
            os.makedirs(path.parent, exist_ok=True)
            with open(path, "w") as f:
                f.write(report.model_dump_json(indent=2))
            return True
        except Exception as e:
            logger.error(f"Error saving report {name}: {e}")
            return False

    @staticmethod
    def save_csv(path: PathLike, frame: pd.DataFrame) -> bool:
        """Write a benchmark table as CSV"""
        try:
            path = Path(path)
            if path.parent and not path.parent.exists():
                os.makedirs(path.parent, exist_ok=True)
            frame.to_csv(path, index=False)
            return True
        except Exception as e:
            logger.error(f"Error saving CSV {path}: {e}")
            return False

    @staticmethod
    def load_workload(path: PathLike) -> Workload:
        """Parse a JSON workload file"""
        try:
            with open(path, "r") as f:
                return Workload.model_validate_json(f.read())
        except (OSError, ValidationError) as e:
            raise OracleError(f"invalid workload {path}: {e}") from e
