# core/noise.py

"""
Correlated Gaussian qubit-frequency noise and the periodogram benchmark.

Traces are synthesized in the frequency domain: each positive rfft bin gets a
2x2 factor of the target spectral matrix applied to independent complex
normals, then the pair is brought back with an inverse real FFT.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import fft, signal

from core import rng
from core.errors import ConfigurationError, InvalidSpecError
from core.spectra import PsdSpec, SpectrumEstimate, validate_spec

logger = logging.getLogger(__name__)

CLAMP_FRACTION = 1e-12
WINDOWS = {"rectangular": "boxcar", "hann": "hann"}


@dataclass(frozen=True, eq=False)
class NoiseTracePair:
    """Two equally long frequency-fluctuation traces in rad/s"""

    delta_omega_1: np.ndarray
    delta_omega_2: np.ndarray
    dt: float
    seed: int = None

    def __post_init__(self):
        a = np.asarray(self.delta_omega_1, dtype=float)
        b = np.asarray(self.delta_omega_2, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ConfigurationError("Noise traces must be 1-D arrays of equal length")
        if not self.dt > 0:
            raise ConfigurationError(f"Trace time step must be positive, got dt={self.dt}")
        object.__setattr__(self, "delta_omega_1", a)
        object.__setattr__(self, "delta_omega_2", b)

    @property
    def n(self) -> int:
        return self.delta_omega_1.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt

    def trace(self, qubit: int) -> np.ndarray:
        if qubit == 1:
            return self.delta_omega_1
        if qubit == 2:
            return self.delta_omega_2
        raise ValueError(f"Qubit index must be 1 or 2, got {qubit}")


def _factor(matrices: np.ndarray) -> np.ndarray:
    """Hermitian square-root factors L with L L^H = C, small eigenvalues clamped to 0"""
    w, v = np.linalg.eigh(matrices)
    trace = np.trace(matrices, axis1=-2, axis2=-1).real
    floor = CLAMP_FRACTION * np.abs(trace)[..., None]
    w = np.where(w > floor, w, 0.0)
    return v * np.sqrt(w)[..., None, :]


def synthesize(spec, n: int, dt: float, seed: int, batch: int = 0) -> NoiseTracePair:
    """Generate a correlated trace pair whose spectral matrix follows ``spec``.

    Args:
        spec: PsdSpec, TabulatedSpectrum or any object exposing matrix(f)
        n: Number of samples (power of two preferred)
        dt: Sampling step in seconds
        seed: Root seed
        batch: Batch index selecting an independent stream

    Returns:
        NoiseTracePair with zero-mean traces in rad/s
    """
    if n < 2:
        raise ConfigurationError(f"Need at least two samples, got n={n}")
    if not dt > 0:
        raise ConfigurationError(f"Sampling step must be positive, got dt={dt}")
    if n & (n - 1):
        logger.debug(f"[SYNTH] n={n} is not a power of two")

    if isinstance(spec, PsdSpec):
        band = (1.0 / (n * dt), 1.0 / (2.0 * dt))
        report = validate_spec(spec, band)
        if not report["valid"]:
            f_bad = report["first_violation_hz"]
            raise InvalidSpecError(f"Spectral model violates Cauchy-Schwarz at {f_bad:.6g} Hz", frequency=f_bad)

    k = np.arange(1, n // 2 + 1)
    f = k / (n * dt)
    factors = _factor(spec.matrix(f))

    gen = rng.stream(seed, rng.NOISE, batch)
    z = (gen.standard_normal((k.size, 2)) + 1j * gen.standard_normal((k.size, 2))) / np.sqrt(2.0)
    if n % 2 == 0:
        # Nyquist bin must be real
        z[-1] = z[-1].real * np.sqrt(2.0)

    bins = np.zeros((n // 2 + 1, 2), dtype=complex)
    bins[1:] = 2.0 * np.pi * np.sqrt(n / dt) * np.einsum("kij,kj->ki", factors, z)
    traces = fft.irfft(bins, n=n, axis=0)
    logger.info(f"[SYNTH] Synthesized {n} samples at dt={dt:.6g} s (seed={seed}, batch={batch})")
    return NoiseTracePair(traces[:, 0].copy(), traces[:, 1].copy(), dt, seed)


def synthesize_batches(spec, n: int, dt: float, seed: int, batches: int, workers: int = 1) -> list:
    """Independent trace pairs for batches 0..batches-1, in batch order"""
    def one(b):
        return synthesize(spec, n, dt, seed, batch=b)

    if workers > 1 and batches > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(batches)))
    return [one(b) for b in range(batches)]


def inject_tone(pair: NoiseTracePair, frequency: float, amplitude: float, phase: float = 0.0,
                qubits=(1, 2)) -> NoiseTracePair:
    """Add amplitude * sin(2 pi f t + phase) (rad/s) to the selected traces"""
    tone = amplitude * np.sin(2.0 * np.pi * frequency * pair.times + phase)
    a = pair.delta_omega_1 + (tone if 1 in qubits else 0.0)
    b = pair.delta_omega_2 + (tone if 2 in qubits else 0.0)
    logger.info(f"[SYNTH] Injected {frequency} Hz tone, amplitude {amplitude:.6g} rad/s, qubits {tuple(qubits)}")
    return NoiseTracePair(a, b, pair.dt, pair.seed)


def coherence_time(trace) -> float:
    """T2* = sqrt(2 / <dw^2>) of a trace"""
    variance = float(np.mean(np.square(trace)))
    if variance <= 0:
        raise ConfigurationError("Coherence time is unbounded for a zero-variance trace")
    return float(np.sqrt(2.0 / variance))


def periodogram_cross(a, b, dt: float, segments: int = 16, window: str = "hann") -> SpectrumEstimate:
    """Welch-averaged cross-periodogram in the same units as the SSCS output.

    Inputs are in rad/s. The output is the two-sided density at f > 0, divided
    by 4 pi^2 so it reads in Hz^2/Hz. Kind is "auto" when a and b are the same data.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ConfigurationError(f"Length mismatch: {a.size} vs {b.size}")
    if segments < 1 or a.size % segments:
        raise ConfigurationError(f"segments={segments} must be >= 1 and divide the length {a.size}")
    if window not in WINDOWS:
        raise ConfigurationError(f"Unknown window '{window}', expected one of {sorted(WINDOWS)}")

    nperseg = a.size // segments
    f, pxy = signal.csd(
        a, b, fs=1.0 / dt, window=WINDOWS[window], nperseg=nperseg, noverlap=0,
        detrend=False, return_onesided=False, scaling="density",
    )
    keep = f > 0
    order = np.argsort(f[keep])
    values = np.conj(pxy[keep][order]) / (4.0 * np.pi**2)
    kind = "auto" if a is b or np.array_equal(a, b) else "cross"
    return SpectrumEstimate(
        frequencies=f[keep][order],
        values=values,
        kind=kind,
        metadata={"estimator": "periodogram", "dt": dt, "segments": segments, "window": window},
    )
