"""
Lorenz Attractors - Configuration Helper

Path: /lorenz_config.py
Purpose: Provides numeric tolerances and run defaults from the environment (or a .env file),
         with per-map overrides layered on top.
"""

import os
import logging
from dataclasses import dataclass, asdict, replace
from typing import Any, Dict, Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

LOG_LEVEL = os.getenv("LORENZ_LOG_LEVEL", "INFO").upper()

# Set up logging
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger("lorenz_config")

# Tolerance defaults
EPS_POINT = float(os.getenv("LORENZ_EPS_POINT", "1e-10"))
EPS_CRITICAL = float(os.getenv("LORENZ_EPS_CRITICAL", "1e-12"))
EPS_VALUE = float(os.getenv("LORENZ_EPS_VALUE", "1e-9"))
MAX_BISECT = int(os.getenv("LORENZ_MAX_BISECT", "80"))

# Analysis defaults
DEFAULT_GRID = int(os.getenv("LORENZ_GRID", "4096"))
DEFAULT_HORIZON = int(os.getenv("LORENZ_HORIZON", "100000"))
DEFAULT_MAX_PERIOD = int(os.getenv("LORENZ_MAX_PERIOD", "16"))
DEFAULT_SEED = int(os.getenv("LORENZ_SEED", "20240229"))
DEFAULT_WORKERS = int(os.getenv("LORENZ_WORKERS", str(os.cpu_count() or 1)))

TOLERANCE_KEYS = ("eps_point", "eps_critical", "eps_value", "max_bisect")


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances shared by every operation on a map"""

    eps_point: float = EPS_POINT
    eps_critical: float = EPS_CRITICAL
    eps_value: float = EPS_VALUE
    max_bisect: int = MAX_BISECT

    def __post_init__(self):
        for name in ("eps_point", "eps_critical", "eps_value"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_bisect < 1:
            raise ValueError(f"max_bisect must be positive, got {self.max_bisect}")
        if self.eps_critical > self.eps_point:
            raise ValueError(
                f"eps_critical ({self.eps_critical}) must not exceed eps_point ({self.eps_point})"
            )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def get_tolerances(overrides: Optional[Dict[str, Any]] = None) -> Tolerances:
    """
    Build tolerances from environment defaults plus optional overrides

    Args:
        overrides: Mapping with any of eps_point, eps_critical, eps_value, max_bisect

    Returns:
        A validated Tolerances instance

    Raises:
        ValueError: If an override key is unknown or a value is out of range
    """
    tol = Tolerances()
    if not overrides:
        return tol

    unknown = set(overrides) - set(TOLERANCE_KEYS)
    if unknown:
        raise ValueError(f"Unknown tolerance keys: {sorted(unknown)}")

    values = {key: overrides[key] for key in TOLERANCE_KEYS if key in overrides}
    if "max_bisect" in values:
        values["max_bisect"] = int(values["max_bisect"])
    logger.debug(f"Applying tolerance overrides: {values}")
    return replace(tol, **values)


def run_defaults() -> Dict[str, Any]:
    """Analysis defaults as recorded in reports"""
    return {
        "grid": DEFAULT_GRID,
        "horizon": DEFAULT_HORIZON,
        "max_period": DEFAULT_MAX_PERIOD,
        "seed": DEFAULT_SEED,
        "workers": DEFAULT_WORKERS,
    }
