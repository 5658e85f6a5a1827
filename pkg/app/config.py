import logging
import logging.config
import os
from pathlib import Path
from typing import Dict, Optional

from dotenv import dotenv_values, load_dotenv

from app.exceptions import InputError

load_dotenv()

PACKAGE_DIR = Path(__file__).resolve().parent

LOG_LEVEL = os.getenv("VFI_LOG_LEVEL", "INFO")
LOG_CONFIG = os.getenv("VFI_LOG_CONFIG", str(PACKAGE_DIR / "logging.ini"))
DEFAULT_WORKERS = int(os.getenv("VFI_WORKERS", "1"))
ALLOWED_ORIGINS = [o for o in os.getenv("ALLOWED_ORIGINS", "").split(",") if o]
RATE_LIMITS = [r for r in os.getenv("VFI_RATE_LIMITS", "60/minute,1000/day").split(",") if r]


def setup_logging(level: Optional[str] = None) -> None:
    """Configure logging from the ini file, then apply the requested level."""
    if Path(LOG_CONFIG).is_file():
        logging.config.fileConfig(LOG_CONFIG, disable_existing_loggers=False)
    else:
        logging.basicConfig(format="%(levelname)-5.5s [%(name)s] %(message)s")
    logging.getLogger("app").setLevel((level or LOG_LEVEL).upper())


def read_config_file(path: str) -> Dict[str, str]:
    """Read a flat key=value run configuration.

    Keys are CLI flag names with dashes turned into underscores, so
    ``pyramid-levels`` is written ``pyramid_levels=4``.
    """
    if not Path(path).is_file():
        raise InputError(f"config file not found: {path}")
    values = dotenv_values(path)
    return {key.strip().lower().replace("-", "_"): value for key, value in values.items() if value is not None}


def write_config_file(path: Path, values: Dict[str, object]) -> None:
    lines = []
    for key in sorted(values):
        value = values[key]
        if value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key}={value}")
    path.write_text("\n".join(lines) + "\n")
