import os
import logging
from dotenv import load_dotenv

from edge_fabric.errors import ConfigError

logger = logging.getLogger("edge_fabric.settings")

# Get the absolute path to the project root
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..'))
env_path = os.path.join(project_root, '.env.local')

# Load .env.local from the project root; a missing file just means defaults
load_dotenv(dotenv_path=env_path)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}")


# Logging
LOG_LEVEL = os.getenv("EDGE_FABRIC_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Simulator defaults
DEFAULT_TICK_MS = _env_int("EDGE_FABRIC_TICK_MS", 100)
DEFAULT_CONTROL_INTERVAL_MS = _env_int("EDGE_FABRIC_CONTROL_INTERVAL_MS", 1000)
DEFAULT_METRICS_WINDOW_S = _env_float("EDGE_FABRIC_METRICS_WINDOW_S", 10.0)

# Communication optimizer
DEFAULT_EWMA_ALPHA = _env_float("EDGE_FABRIC_EWMA_ALPHA", 0.3)

# Artifacts
OUTPUT_DIR = os.getenv("EDGE_FABRIC_OUTPUT_DIR", "output")
