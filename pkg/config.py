import os
import logging
from fractions import Fraction
from pathlib import Path

logger = logging.getLogger(__name__)

# Logging settings
LOG_LEVEL = os.environ.get("ORACLE_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# CLI settings
APP_NAME = "conn-oracle"
APP_DESCRIPTION = "Fully dynamic sensitivity oracle for subgraph connectivity"
APP_VERSION = "1.0.0"

# Exit codes
EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2

# Preprocessing limits
MEMORY_CAP = int(os.environ.get("ORACLE_MEMORY_CAP", 20_000_000))  # cap on sum |A||B|
BITMAP_CAP = int(os.environ.get("ORACLE_BITMAP_CAP", 50_000_000))  # off-indicator cells
SHADOW_EDGE_CAP = int(os.environ.get("ORACLE_SHADOW_EDGE_CAP", 1_000_000))

# Hierarchy settings
HIERARCHY_EPS = Fraction(1, 2)
ROUND_CAP_FACTOR = int(os.environ.get("ORACLE_ROUND_CAP_FACTOR", 50))
DELTA_CEILING_FACTOR = int(os.environ.get("ORACLE_DELTA_CEILING_FACTOR", 8))

# Workload settings
DEFAULT_SEED = int(os.environ.get("ORACLE_SEED", 0))
DEFAULT_QUERIES_PER_TRIAL = int(os.environ.get("ORACLE_QUERIES_PER_TRIAL", 100))
GENERATOR_KINDS = ("gnm", "path", "star", "grid", "cliques-bridge")

# Paths
BASE_DIR = Path(__file__).resolve().parent
REPORTS_DIR = Path(os.environ.get("ORACLE_REPORTS_DIR", BASE_DIR / "reports"))

# Accepted input files
GRAPH_EXTENSIONS = ['.txt', '.el', '.edges', '.graph']
WORKLOAD_EXTENSIONS = ['.json']
