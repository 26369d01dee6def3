"""
Environment settings for the toolkit.
Values come from the process environment, with a local .env file loaded first.
"""
import logging
import os

from dotenv import load_dotenv

# Load .env for local runs (does not override variables already set)
load_dotenv()

SETTING_KEYS = [
    "SSCS_OUTPUT_DIR",
    "SSCS_LOG_LEVEL",
    "SSCS_WORKERS",
]

DEFAULT_LOG_LEVEL = "INFO"


def get_setting(key: str, default: str = None) -> str:
    """
    Get a setting from the environment.

    Args:
        key: Setting name
        default: Value returned when the variable is unset or blank

    Returns:
        Stripped setting value or default
    """
    value = os.getenv(key, default)
    if value:
        return str(value).strip()
    return default


def get_output_dir(default: str = None) -> str:
    return get_setting("SSCS_OUTPUT_DIR", default)


def get_log_level() -> int:
    """Numeric logging level from SSCS_LOG_LEVEL; unknown names fall back to INFO"""
    name = get_setting("SSCS_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def get_workers(default: int = 1) -> int:
    value = get_setting("SSCS_WORKERS")
    if value is None:
        return default
    try:
        workers = int(value)
    except ValueError:
        return default
    return max(workers, 1)


def get_all_settings() -> dict:
    """All known settings that are currently set"""
    settings = {}
    for key in SETTING_KEYS:
        value = get_setting(key)
        if value:
            settings[key] = value
    return settings


def validate_settings(required_keys: list = None) -> tuple:
    """
    Check that required settings are present and that set values parse.

    Args:
        required_keys: Setting names that must be set

    Returns:
        Tuple of (is_valid: bool, problems: list); missing keys are listed by name
    """
    if required_keys is None:
        required_keys = []

    problems = [key for key in required_keys if not get_setting(key)]
    workers = get_setting("SSCS_WORKERS")
    if workers is not None and not (workers.isdigit() and int(workers) >= 1):
        problems.append(f"SSCS_WORKERS={workers!r} is not a positive integer")
    level = get_setting("SSCS_LOG_LEVEL")
    if level is not None and not isinstance(logging.getLevelName(level.upper()), int):
        problems.append(f"SSCS_LOG_LEVEL={level!r} is not a logging level")
    return len(problems) == 0, problems
