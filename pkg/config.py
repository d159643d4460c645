# config.py - Workbench configuration: caps, paths and logging

import os
import sys
import logging
from typing import Dict, Optional
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def get_setting(key: str, default: Optional[str] = None) -> Optional[str]:
    """Retrieve a setting from the environment (a local .env file is honoured)."""
    val = os.getenv(key)
    if val:
        return val
    return default


# --- Cache / Temp Directory ---
# The only value the environment may override.
CACHE_DIR = Path(get_setting("WORKBENCH_CACHE_DIR", ".workbench"))

# --- Logging Configuration ---
LOG_DIR = CACHE_DIR / "logs"
LOG_FILE = LOG_DIR / "workbench.log"
LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# --- Propositional Layer ---
MAX_VARIABLES = 16
MATERIALIZE_MAX_N = 4  # 2^(2^4) = 65536 table entries
REPRESENTABLE_FULL_MAX_N = 3

# --- Exhaustive Scans ---
EXHAUSTIVE_TUPLE_LIMIT = 2 ** 24
DEFAULT_SAMPLE_SIZE = 1000

# --- Ehrenfeucht-Fraisse Caps ---
# rounds -> largest universe the exact solver accepts (None = unbounded)
EF_SIZE_CAPS: Dict[int, Optional[int]] = {
    0: None,
    1: 4096,
    2: 300,
    3: 64,
}

# --- Neighborhood Canonicalization ---
CANONICAL_VERTEX_CAP = 12

# --- Reports ---
REPORT_SCHEMA = "workbench-report"
REPORT_VERSION = 1


def ef_size_cap(q: int, caps: Optional[Dict[int, Optional[int]]] = None) -> Optional[int]:
    """Return the universe-size cap for a q-round game; raises KeyError when q has no entry."""
    table = EF_SIZE_CAPS if caps is None else caps
    return table[q]


def configure_logging(level: str = LOG_LEVEL) -> None:
    """Configure root logging with a file handler and a stderr stream handler."""
    LOG_DIR.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, level),
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(LOG_FILE),
            logging.StreamHandler(sys.stderr),
        ],
        force=True,
    )


# --- Validation Functions ---
def validate_caps() -> bool:
    """Validate the cap tables."""
    if not 1 <= MATERIALIZE_MAX_N <= MAX_VARIABLES:
        raise ValueError(f"Invalid materialization cap {MATERIALIZE_MAX_N}")
    if REPRESENTABLE_FULL_MAX_N > MATERIALIZE_MAX_N:
        raise ValueError("Full representability checks need materializable tables")
    previous = None
    for q in sorted(EF_SIZE_CAPS):
        cap = EF_SIZE_CAPS[q]
        if cap is not None and cap < 1:
            raise ValueError(f"Invalid EF cap for q={q}: {cap}")
        if previous is not None and cap is not None and cap > previous:
            raise ValueError(f"EF caps must not grow with the number of rounds (q={q})")
        if cap is not None:
            previous = cap
    return True


# Run validation on import
validate_caps()
