# storage/provenance.py

"""
JSON sidecars (<file>.json) recording how an output file was produced.
No timestamps are stored, so identical runs give identical sidecars.
"""
import json
import logging
import platform
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

logger = logging.getLogger(__name__)


def versions() -> dict:
    import core

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "toolkit": core.__version__,
    }


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_sidecar(path, config=None, seed: int = None, extra: dict = None) -> Path:
    """Write <path>.json with the full config, its hash, seed, versions and the output file name"""
    from core.config import config_hash, config_to_dict

    record = {
        "file": Path(path).name,
        "config": config_to_dict(config) if config is not None else None,
        "config_hash": config_hash(config) if config is not None else None,
        "seed": seed,
        "versions": versions(),
    }
    record.update(extra or {})
    target = sidecar_path(path)
    target.write_text(json.dumps(record, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")
    logger.debug(f"[IO] Wrote provenance {target}")
    return target


def read_sidecar(path) -> dict:
    return json.loads(sidecar_path(path).read_text(encoding="utf-8"))


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def sidecar_config(path):
    """PipelineConfig stored in the sidecar of ``path``, or None"""
    from core.config import config_from_dict

    data = read_sidecar(path).get("config")
    return None if data is None else config_from_dict(data)
