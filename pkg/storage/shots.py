# storage/shots.py

"""
SSCS shot files.

Header: magic, version, flags (bit 0: bit-packed payload), delta_t, N, seed and
per-qubit tau, omega, T2*, p_e, p_b (NaN when unknown). Payload: the streams
(1,XX), (1,XY), (2,XX), (2,XY), each as N int8 values or ceil(N/8) packed bytes.
"""
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from core.errors import FormatError
from core.ramsey import LABELS, QubitParams, ShotRecord, SpamModel

logger = logging.getLogger(__name__)

MAGIC = b"SSCS"
VERSION = 1
FLAG_PACKED = 1
STREAM_ORDER = [(alpha, label) for alpha in (1, 2) for label in LABELS]
CSV_COLUMNS = ["n", "t_xx_s", "t_xy_s", "q1_xx", "q1_xy", "q2_xx", "q2_xy"]

_QUBIT_FIELDS = [
    (f"{name}_{q}", "<f8") for q in (1, 2) for name in ("tau", "omega", "t2star", "p_e", "p_b")
]
HEADER = np.dtype(
    [("magic", "S4"), ("version", "<u2"), ("flags", "<u2"), ("delta_t", "<f8"), ("n", "<u8"), ("seed", "<i8")]
    + _QUBIT_FIELDS
)


def _nan(value):
    return np.nan if value is None else float(value)


def write_shots(path, record: ShotRecord, packed: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = np.zeros(1, dtype=HEADER)
    header["magic"] = MAGIC
    header["version"] = VERSION
    header["flags"] = FLAG_PACKED if packed else 0
    header["delta_t"] = record.delta_t
    header["n"] = record.n_pairs
    header["seed"] = -1 if record.seed is None else record.seed
    for q in (1, 2):
        qubit = record.qubit(q)
        spam = record.spam[q - 1]
        header[f"tau_{q}"] = qubit.tau
        header[f"omega_{q}"] = qubit.omega
        header[f"t2star_{q}"] = _nan(qubit.t2star)
        header[f"p_e_{q}"] = np.nan if spam is None else spam.p_e
        header[f"p_b_{q}"] = np.nan if spam is None else spam.p_b

    with open(path, "wb") as handle:
        handle.write(header.tobytes())
        for key in STREAM_ORDER:
            stream = record.stream(*key)
            if packed:
                handle.write(np.packbits(stream == 1).tobytes())
            else:
                handle.write(stream.astype(np.int8).tobytes())
    logger.info(f"[IO] Wrote {record.n_pairs} shot pairs to {path} (packed={packed})")
    return path


def read_shots(path) -> ShotRecord:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < HEADER.itemsize:
        raise FormatError(f"{path}: file shorter than the SSCS header")
    header = np.frombuffer(raw[: HEADER.itemsize], dtype=HEADER)[0]
    if header["magic"] != MAGIC:
        raise FormatError(f"{path}: bad magic {header['magic']!r}, expected {MAGIC!r}")
    if header["version"] != VERSION:
        raise FormatError(f"{path}: unsupported SSCS version {header['version']}")

    n = int(header["n"])
    packed = bool(header["flags"] & FLAG_PACKED)
    width = (n + 7) // 8 if packed else n
    body = raw[HEADER.itemsize:]
    if len(body) != width * len(STREAM_ORDER):
        raise FormatError(f"{path}: payload holds {len(body)} bytes, header promises {width * len(STREAM_ORDER)}")

    outcomes = {}
    for index, key in enumerate(STREAM_ORDER):
        chunk = np.frombuffer(body[index * width:(index + 1) * width], dtype=np.uint8 if packed else np.int8)
        if packed:
            bits = np.unpackbits(chunk, count=n)
            outcomes[key] = np.where(bits == 1, 1, -1).astype(np.int8)
        else:
            outcomes[key] = chunk.copy()

    qubits, spam = [], []
    for q in (1, 2):
        t2 = float(header[f"t2star_{q}"])
        qubits.append(QubitParams(tau=float(header[f"tau_{q}"]), omega=float(header[f"omega_{q}"]),
                                  t2star=None if np.isnan(t2) else t2))
        p_e, p_b = float(header[f"p_e_{q}"]), float(header[f"p_b_{q}"])
        spam.append(None if np.isnan(p_e) or np.isnan(p_b) else SpamModel(p_e, p_b))
    seed = int(header["seed"])
    logger.info(f"[IO] Read {n} shot pairs from {path}")
    return ShotRecord(outcomes=outcomes, delta_t=float(header["delta_t"]), qubits=tuple(qubits),
                      spam=tuple(spam), seed=None if seed < 0 else seed)


def export_shots_csv(path, record: ShotRecord) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame({
        "n": np.arange(record.n_pairs),
        "t_xx_s": record.times("XX"),
        "t_xy_s": record.times("XY"),
        "q1_xx": record.stream(1, "XX"),
        "q1_xy": record.stream(1, "XY"),
        "q2_xx": record.stream(2, "XX"),
        "q2_xy": record.stream(2, "XY"),
    })
    df.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"[IO] Exported {record.n_pairs} shot pairs to {path}")
    return path


def import_shots_csv(path, taus, omegas=(0.0, 0.0), delta_t: float = None) -> ShotRecord:
    """Shot record from an external CSV.

    Evolution times and detunings come from the caller. SPAM stays unknown,
    since the analysis never needs it.
    """
    df = pd.read_csv(path)
    missing = [c for c in CSV_COLUMNS if c not in df.columns]
    if missing:
        raise FormatError(f"{path}: missing columns {missing}")
    if delta_t is None:
        if len(df) == 0:
            raise FormatError(f"{path}: no rows")
        delta_t = float(df["t_xy_s"].iloc[0] - df["t_xx_s"].iloc[0])
    outcomes = {
        (1, "XX"): df["q1_xx"].to_numpy(), (1, "XY"): df["q1_xy"].to_numpy(),
        (2, "XX"): df["q2_xx"].to_numpy(), (2, "XY"): df["q2_xy"].to_numpy(),
    }
    qubits = (QubitParams(tau=taus[0], omega=omegas[0]), QubitParams(tau=taus[1], omega=omegas[1]))
    logger.info(f"[IO] Imported {len(df)} shot pairs from {path} (delta_t={delta_t:.6g} s)")
    return ShotRecord(outcomes=outcomes, delta_t=delta_t, qubits=qubits, spam=(None, None))
