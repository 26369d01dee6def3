# core/ramsey.py

"""
Interleaved single-shot Ramsey simulation for two qubits.

Subsequence slots alternate XX (even multiples of delta_t) and XY (odd
multiples). Each qubit returns +1 with probability (1 + P)/2 where
P = A + B sin((omega + dw) tau + theta), theta = pi/2 for XX and 0 for XY.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from core import rng
from core.errors import ConfigurationError, InsufficientDataError
from core.noise import NoiseTracePair

logger = logging.getLogger(__name__)

LABELS = ("XX", "XY")
THETA = {"XX": np.pi / 2.0, "XY": 0.0}
SLOT_BLOCK = 4096


def delta(label: str) -> int:
    """Kronecker delta_if: 1 for XX, 0 for XY"""
    if label not in THETA:
        raise ConfigurationError(f"Unknown subsequence label '{label}', expected XX or XY")
    return 1 if label == "XX" else 0


@dataclass(frozen=True)
class QubitParams:
    tau: float
    omega: float = 0.0
    t2star: float = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError(f"Evolution time must be positive, got tau={self.tau}")
        if self.t2star is not None and not self.t2star > 0:
            raise ConfigurationError(f"T2* must be positive when given, got {self.t2star}")


@dataclass(frozen=True)
class SpamModel:
    """Readout inversion p_e and bias-to-minus-one p_b"""

    p_e: float = 0.0
    p_b: float = 0.0

    def __post_init__(self):
        for name in ("p_e", "p_b"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"SPAM probability {name} must lie in [0, 1], got {value}")

    @property
    def A(self) -> float:
        return -self.p_b

    @property
    def B(self) -> float:
        return (1.0 - self.p_b) * (1.0 - 2.0 * self.p_e)


@dataclass(frozen=True)
class SequenceConfig:
    qubit1: QubitParams
    qubit2: QubitParams
    delta_t: float
    n_pairs: int
    spam1: SpamModel = field(default_factory=SpamModel)
    spam2: SpamModel = field(default_factory=SpamModel)
    seed: int = 0
    quasi_static_substeps: int = 1

    def __post_init__(self):
        if not self.delta_t > max(self.qubit1.tau, self.qubit2.tau):
            raise ConfigurationError(
                f"delta_t={self.delta_t} must exceed both evolution times "
                f"({self.qubit1.tau}, {self.qubit2.tau})"
            )
        if self.n_pairs < 2:
            raise ConfigurationError(f"Need at least two XX/XY pairs, got n_pairs={self.n_pairs}")
        if self.quasi_static_substeps < 1:
            raise ConfigurationError("quasi_static_substeps must be >= 1")

    def qubit(self, alpha: int) -> QubitParams:
        return {1: self.qubit1, 2: self.qubit2}[alpha]

    def spam(self, alpha: int) -> SpamModel:
        return {1: self.spam1, 2: self.spam2}[alpha]


@dataclass(frozen=True, eq=False)
class ShotRecord:
    """+-1 outcomes keyed by (qubit, label), each of length n_pairs"""

    outcomes: dict
    delta_t: float
    qubits: tuple
    spam: tuple = (None, None)
    seed: int = None

    def __post_init__(self):
        frozen = {}
        lengths = set()
        for alpha in (1, 2):
            for label in LABELS:
                if (alpha, label) not in self.outcomes:
                    raise ConfigurationError(f"Shot record lacks stream ({alpha}, {label})")
                data = np.asarray(self.outcomes[(alpha, label)], dtype=np.int8)
                if data.ndim != 1 or not np.all((data == 1) | (data == -1)):
                    raise ConfigurationError(f"Stream ({alpha}, {label}) must be a 1-D array of +1/-1")
                data = data.copy()
                data.flags.writeable = False
                frozen[(alpha, label)] = data
                lengths.add(data.size)
        if len(lengths) != 1:
            raise ConfigurationError(f"All four shot streams need the same length, got {sorted(lengths)}")
        if not self.delta_t > 0:
            raise ConfigurationError("delta_t must be positive")
        object.__setattr__(self, "outcomes", frozen)

    @property
    def n_pairs(self) -> int:
        return self.outcomes[(1, "XX")].size

    def stream(self, alpha: int, label: str) -> np.ndarray:
        return self.outcomes[(alpha, label)]

    def times(self, label: str) -> np.ndarray:
        """t_n = (2n + 1 - delta_if) * delta_t"""
        n = np.arange(self.n_pairs)
        return (2 * n + 1 - delta(label)) * self.delta_t

    def qubit(self, alpha: int) -> QubitParams:
        return self.qubits[alpha - 1]


def expectation(q: QubitParams, label: str, delta_omega, spam: SpamModel):
    """P = A + B sin((omega + dw) tau + theta_if)"""
    A, B = spam.A, spam.B
    if abs(A) + abs(B) > 1.0 + 1e-12:
        raise ConfigurationError(f"|A| + |B| = {abs(A) + abs(B):.6g} exceeds 1")
    delta(label)
    theta = THETA[label]
    return A + B * np.sin((q.omega + np.asarray(delta_omega, dtype=float)) * q.tau + theta)


def sample_shot(P, gen: np.random.Generator):
    """+1 with probability (1 + P)/2, else -1; vectorized over P"""
    P = np.asarray(P, dtype=float)
    if np.any(np.abs(P) > 1.0 + 1e-12):
        raise ValueError("Expectation values must lie in [-1, 1]")
    u = gen.random(P.shape) if P.ndim else gen.random()
    shots = np.where(u < (1.0 + P) / 2.0, 1, -1).astype(np.int8)
    return int(shots) if shots.ndim == 0 else shots


def spam_equivalence_check(p_e: float, p_b: float, phases) -> float:
    """Largest gap between the SPAM process model and A + B sin(phi).

    Process: ideal shot, then with probability p_b force -1, otherwise flip
    with probability p_e.
    """
    spam = SpamModel(p_e, p_b)
    phases = np.asarray(phases, dtype=float)
    p_plus_ideal = (1.0 + np.sin(phases)) / 2.0
    p_plus = (1.0 - p_b) * ((1.0 - p_e) * p_plus_ideal + p_e * (1.0 - p_plus_ideal))
    process = 2.0 * p_plus - 1.0
    model = spam.A + spam.B * np.sin(phases)
    return float(np.max(np.abs(process - model))) if phases.size else 0.0


def _slot_noise(cfg: SequenceConfig, noise: NoiseTracePair, alpha: int, ratio: int) -> np.ndarray:
    n_slots = 2 * cfg.n_pairs
    trace = noise.trace(alpha)
    slot_index = np.arange(n_slots) * ratio
    substeps = cfg.quasi_static_substeps
    if substeps == 1:
        return trace[slot_index]
    tau = cfg.qubit(alpha).tau
    offsets = np.linspace(0.0, tau, substeps)
    sub_times = slot_index[:, None] * noise.dt + offsets[None, :]
    return np.interp(sub_times, noise.times, trace).mean(axis=1)


def _block_uniforms(seed: int, batch: int, block: int, size: int) -> np.ndarray:
    return rng.stream(seed, rng.SHOTS, batch, block).random((size, 2))


def run_sequence(cfg: SequenceConfig, noise: NoiseTracePair, batch: int = 0, workers: int = 1) -> ShotRecord:
    """Simulate N interleaved XX/XY pairs on both qubits.

    Args:
        cfg: Sequence configuration
        noise: Trace pair sampled at delta_t or at delta_t / R for integer R
        batch: Batch index selecting the shot streams
        workers: Threads used to draw slot blocks (results do not depend on it)

    Returns:
        ShotRecord with XX shots at slots 2n and XY shots at slots 2n+1
    """
    ratio_f = cfg.delta_t / noise.dt
    ratio = int(round(ratio_f))
    if ratio < 1 or abs(ratio_f - ratio) > 1e-9 * ratio_f:
        raise ConfigurationError(f"dt mismatch: trace dt={noise.dt} does not divide delta_t={cfg.delta_t}")

    n_slots = 2 * cfg.n_pairs
    needed = (n_slots - 1) * ratio + 1
    if cfg.quasi_static_substeps > 1:
        needed += int(np.ceil(max(cfg.qubit1.tau, cfg.qubit2.tau) / noise.dt))
    if noise.n < needed:
        raise InsufficientDataError(f"Trace too short: {noise.n} samples, need {needed}")

    theta = np.where(np.arange(n_slots) % 2 == 0, THETA["XX"], THETA["XY"])
    probs = np.empty((n_slots, 2))
    for alpha in (1, 2):
        q, spam = cfg.qubit(alpha), cfg.spam(alpha)
        if abs(spam.A) + abs(spam.B) > 1.0 + 1e-12:
            raise ConfigurationError(f"|A| + |B| exceeds 1 for qubit {alpha}")
        dw = _slot_noise(cfg, noise, alpha, ratio)
        P = spam.A + spam.B * np.sin((q.omega + dw) * q.tau + theta)
        probs[:, alpha - 1] = (1.0 + P) / 2.0

    starts = list(range(0, n_slots, SLOT_BLOCK))
    sizes = [min(SLOT_BLOCK, n_slots - s) for s in starts]

    def draw(block):
        return _block_uniforms(cfg.seed, batch, block, sizes[block])

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(draw, range(len(starts))))
    else:
        blocks = [draw(b) for b in range(len(starts))]
    uniforms = np.concatenate(blocks, axis=0)
    shots = np.where(uniforms < probs, 1, -1).astype(np.int8)

    outcomes = {
        (1, "XX"): shots[0::2, 0], (1, "XY"): shots[1::2, 0],
        (2, "XX"): shots[0::2, 1], (2, "XY"): shots[1::2, 1],
    }
    logger.info(f"[SIM] Simulated {cfg.n_pairs} pairs (seed={cfg.seed}, batch={batch}, ratio={ratio})")
    return ShotRecord(
        outcomes=outcomes,
        delta_t=cfg.delta_t,
        qubits=(cfg.qubit1, cfg.qubit2),
        spam=(cfg.spam1, cfg.spam2),
        seed=cfg.seed,
    )
