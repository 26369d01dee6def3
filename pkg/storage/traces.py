# storage/traces.py

"""
SSCT trace files: a little-endian header (magic, version, N, dt, seed)
followed by N interleaved float64 pairs (dw_1, dw_2) in rad/s.
"""
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from core.errors import FormatError
from core.noise import NoiseTracePair

logger = logging.getLogger(__name__)

MAGIC = b"SSCT"
VERSION = 1
HEADER = np.dtype([("magic", "S4"), ("version", "<u2"), ("n", "<u8"), ("dt", "<f8"), ("seed", "<i8")])
CSV_COLUMNS = ["t_s", "delta_omega_1", "delta_omega_2"]


def write_traces(path, pair: NoiseTracePair) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = np.array([(MAGIC, VERSION, pair.n, pair.dt, -1 if pair.seed is None else pair.seed)], dtype=HEADER)
    payload = np.column_stack([pair.delta_omega_1, pair.delta_omega_2]).astype("<f8")
    with open(path, "wb") as handle:
        handle.write(header.tobytes())
        handle.write(payload.tobytes())
    logger.info(f"[IO] Wrote {pair.n} trace samples to {path}")
    return path


def read_traces(path) -> NoiseTracePair:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < HEADER.itemsize:
        raise FormatError(f"{path}: file shorter than the SSCT header")
    header = np.frombuffer(raw[: HEADER.itemsize], dtype=HEADER)[0]
    if header["magic"] != MAGIC:
        raise FormatError(f"{path}: bad magic {header['magic']!r}, expected {MAGIC!r}")
    if header["version"] != VERSION:
        raise FormatError(f"{path}: unsupported SSCT version {header['version']}")
    n = int(header["n"])
    body = raw[HEADER.itemsize:]
    if len(body) != n * 16:
        raise FormatError(f"{path}: payload holds {len(body)} bytes, header promises {n * 16}")
    data = np.frombuffer(body, dtype="<f8").reshape(n, 2)
    seed = int(header["seed"])
    logger.info(f"[IO] Read {n} trace samples from {path}")
    return NoiseTracePair(data[:, 0].copy(), data[:, 1].copy(), float(header["dt"]), None if seed < 0 else seed)


def export_traces_csv(path, pair: NoiseTracePair) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame({"t_s": pair.times, "delta_omega_1": pair.delta_omega_1, "delta_omega_2": pair.delta_omega_2})
    df.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"[IO] Exported traces to {path}")
    return path


def import_traces_csv(path) -> NoiseTracePair:
    """Traces from CSV; dt is taken from the (uniform) t_s column"""
    df = pd.read_csv(path)
    missing = [c for c in CSV_COLUMNS if c not in df.columns]
    if missing:
        raise FormatError(f"{path}: missing columns {missing}")
    t = df["t_s"].to_numpy(dtype=float)
    if t.size < 2:
        raise FormatError(f"{path}: need at least two samples")
    steps = np.diff(t)
    dt = float(steps.mean())
    if not np.allclose(steps, dt, rtol=1e-6, atol=0.0):
        raise FormatError(f"{path}: t_s is not uniformly spaced")
    return NoiseTracePair(df["delta_omega_1"].to_numpy(dtype=float), df["delta_omega_2"].to_numpy(dtype=float), dt)
