# storage/spectra.py

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from core.errors import FormatError
from core.spectra import SpectrumEstimate

logger = logging.getLogger(__name__)

COLUMNS = ["f_Hz", "re", "im", "abs", "phase_rad", "bin_count", "stderr"]


def spectrum_frame(spec: SpectrumEstimate) -> pd.DataFrame:
    n = len(spec)
    counts = spec.bin_counts if spec.bin_counts is not None else [pd.NA] * n
    stderr = spec.stderr if spec.stderr is not None else np.full(n, np.nan)
    return pd.DataFrame({
        "f_Hz": spec.frequencies,
        "re": spec.values.real,
        "im": spec.values.imag,
        "abs": spec.magnitude,
        "phase_rad": spec.phase,
        "bin_count": pd.array(counts, dtype="Int64"),
        "stderr": np.real(stderr).astype(float),
    })


def write_spectrum_csv(path, spec: SpectrumEstimate) -> Path:
    """One row per frequency; empty bin_count for unbinned spectra, NaN stderr when unknown"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    spectrum_frame(spec).to_csv(path, index=False, lineterminator="\n")
    logger.info(f"[IO] Wrote {spec.kind} spectrum ({len(spec)} points) to {path}")
    return path


def _sidecar_kind(path: Path):
    sidecar = Path(str(path) + ".json")
    if not sidecar.exists():
        return None
    try:
        return json.loads(sidecar.read_text(encoding="utf-8")).get("kind")
    except json.JSONDecodeError:
        return None


def read_spectrum_csv(path, kind: str = None) -> SpectrumEstimate:
    """Kind comes from the argument, then the sidecar, then the data (all-real -> auto)"""
    path = Path(path)
    df = pd.read_csv(path)
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise FormatError(f"{path}: missing spectrum columns {missing}")
    values = df["re"].to_numpy(dtype=float) + 1j * df["im"].to_numpy(dtype=float)
    kind = kind or _sidecar_kind(path) or ("auto" if not np.any(values.imag) else "cross")
    counts = df["bin_count"]
    stderr = df["stderr"].to_numpy(dtype=float)
    return SpectrumEstimate(
        frequencies=df["f_Hz"].to_numpy(dtype=float),
        values=values,
        kind=kind,
        bin_counts=None if counts.isna().all() else counts.to_numpy(dtype=int),
        stderr=None if np.isnan(stderr).all() else stderr,
    )
