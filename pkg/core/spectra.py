# core/spectra.py

"""
Parametric noise spectra (1/f + Lorentzian) and spectrum containers.

Spectra follow a two-sided convention in Hz^2/Hz for the qubit frequency
fluctuations: <dw_a(t') dw_b(t'+t)> = 4 pi^2 * integral C_ab(f) exp(-2 pi i f t) df,
with dw in rad/s.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from core.errors import DomainError, InvalidSpecError

logger = logging.getLogger(__name__)

ENTRY_KEYS = ((1, 1), (2, 2), (1, 2))
SPECTRUM_KINDS = ("auto", "cross")


@dataclass(frozen=True)
class PsdComponentParams:
    """One entry of the 2x2 spectral model: I/f + J/(1 + 4 pi^2 f^2 t_c^2).

    t_c has no default; it may be left unset only when J = 0.
    """

    one_over_f: float = 0.0
    lorentzian: float = 0.0
    t_c: float = None

    def __post_init__(self):
        if self.t_c is None:
            if self.lorentzian != 0:
                raise InvalidSpecError(f"A Lorentzian entry (J={self.lorentzian}) needs its correlation time t_c")
        elif not self.t_c > 0:
            raise InvalidSpecError(f"Correlation time must be positive, got t_c={self.t_c}")

    def evaluate(self, f):
        f = np.abs(np.asarray(f, dtype=float))
        with np.errstate(divide="ignore"):
            value = self.one_over_f / f
        if self.lorentzian:
            value = value + self.lorentzian / (1.0 + 4.0 * np.pi**2 * f**2 * self.t_c**2)
        return value

    def to_dict(self) -> dict:
        return {"I": self.one_over_f, "J": self.lorentzian, "t_c": self.t_c}

    @classmethod
    def from_dict(cls, data: dict) -> "PsdComponentParams":
        lorentzian = float(data.get("J", 0.0))
        t_c = data.get("t_c")
        if t_c is None and lorentzian != 0:
            raise InvalidSpecError(f"Spectral entry {data} has J={lorentzian} but no 't_c'")
        return cls(
            one_over_f=float(data.get("I", 0.0)),
            lorentzian=lorentzian,
            t_c=None if t_c is None else float(t_c),
        )


@dataclass(frozen=True)
class PsdSpec:
    """Hermitian 2x2 matrix of component parameters indexed by qubit pair"""

    entries: dict

    def __post_init__(self):
        entries = dict(self.entries)
        for key in ENTRY_KEYS:
            if key not in entries:
                raise InvalidSpecError(f"Missing spectral entry {key}")
        if (2, 1) in entries and entries[(2, 1)] != entries[(1, 2)]:
            raise InvalidSpecError("Entry (2,1) must equal entry (1,2) for this real model family")
        for q in (1, 2):
            params = entries[(q, q)]
            if params.one_over_f < 0 or params.lorentzian < 0:
                raise InvalidSpecError(f"Auto-PSD entry ({q},{q}) needs I >= 0 and J >= 0")
        entries.pop((2, 1), None)
        object.__setattr__(self, "entries", entries)

    def entry(self, alpha: int, beta: int) -> PsdComponentParams:
        if (alpha, beta) == (2, 1):
            return self.entries[(1, 2)]
        try:
            return self.entries[(alpha, beta)]
        except KeyError:
            raise InvalidSpecError(f"No spectral entry for qubit pair ({alpha},{beta})") from None

    def matrix(self, f) -> np.ndarray:
        """Spectral matrices C(f), shape f.shape + (2, 2), complex Hermitian"""
        f = np.asarray(f, dtype=float)
        out = np.empty(f.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = self.entry(1, 1).evaluate(f)
        out[..., 1, 1] = self.entry(2, 2).evaluate(f)
        out[..., 0, 1] = self.entry(1, 2).evaluate(f)
        out[..., 1, 0] = out[..., 0, 1]
        return out

    def to_dict(self) -> dict:
        return {"entries": {f"{a}{b}": self.entries[(a, b)].to_dict() for a, b in ENTRY_KEYS}}

    @classmethod
    def from_dict(cls, data: dict) -> "PsdSpec":
        raw = data.get("entries", data)
        entries = {}
        for key, value in raw.items():
            if len(key) != 2 or not key.isdigit():
                raise InvalidSpecError(f"Bad entry key '{key}', expected e.g. '11', '22', '12'")
            entries[(int(key[0]), int(key[1]))] = PsdComponentParams.from_dict(value)
        return cls(entries=entries)


class TabulatedSpectrum:
    """2x2 spectral matrices given on a frequency table, interpolated linearly"""

    def __init__(self, frequencies, matrices):
        frequencies = np.asarray(frequencies, dtype=float)
        matrices = np.asarray(matrices, dtype=complex)
        if frequencies.ndim != 1 or matrices.shape != frequencies.shape + (2, 2):
            raise InvalidSpecError("Tabulated spectrum needs frequencies (n,) and matrices (n, 2, 2)")
        if np.any(frequencies <= 0) or np.any(np.diff(frequencies) <= 0):
            raise InvalidSpecError("Tabulated frequencies must be positive and strictly increasing")
        if not np.allclose(matrices, np.conj(np.swapaxes(matrices, -1, -2))):
            raise InvalidSpecError("Tabulated spectral matrices must be Hermitian")
        bad = _first_violation(matrices, frequencies)
        if bad is not None:
            raise InvalidSpecError(f"Tabulated spectrum violates Cauchy-Schwarz at {bad:.6g} Hz", frequency=bad)
        self.frequencies = frequencies
        self.matrices = matrices

    def matrix(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        af = np.abs(f)
        out = np.empty(f.shape + (2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                re = np.interp(af, self.frequencies, self.matrices[:, i, j].real)
                im = np.interp(af, self.frequencies, self.matrices[:, i, j].imag)
                out[..., i, j] = re + 1j * np.where(f < 0, -im, im)
        return out


@dataclass
class SpectrumEstimate:
    """Complex PSD samples on a strictly increasing frequency grid"""

    frequencies: np.ndarray
    values: np.ndarray
    kind: str = "cross"
    bin_counts: np.ndarray = None
    bins_per_decade: int = None
    stderr: np.ndarray = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.kind not in SPECTRUM_KINDS:
            raise ValueError(f"Spectrum kind must be one of {SPECTRUM_KINDS}, got '{self.kind}'")
        if self.frequencies.shape != self.values.shape or self.frequencies.ndim != 1:
            raise ValueError("Spectrum frequencies and values must be 1-D arrays of equal length")
        if self.frequencies.size > 1 and np.any(np.diff(self.frequencies) <= 0):
            raise ValueError("Spectrum frequencies must be strictly increasing")
        if self.kind == "auto":
            self.values = self.values.real + 0j
        for name in ("bin_counts", "stderr"):
            extra = getattr(self, name)
            if extra is not None and np.shape(extra) != self.frequencies.shape:
                raise ValueError(f"Spectrum {name} must match the frequency grid")

    def __len__(self):
        return self.frequencies.size

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)

    def positive(self) -> "SpectrumEstimate":
        """Restrict to f > 0"""
        keep = self.frequencies > 0
        return SpectrumEstimate(
            frequencies=self.frequencies[keep],
            values=self.values[keep],
            kind=self.kind,
            bin_counts=None if self.bin_counts is None else self.bin_counts[keep],
            bins_per_decade=self.bins_per_decade,
            stderr=None if self.stderr is None else self.stderr[keep],
            metadata=dict(self.metadata),
        )


def eval_psd(spec: PsdSpec, alpha: int, beta: int, f):
    """Evaluate C_ab(f) = I/f + J/(1 + 4 pi^2 f^2 t_c^2), even in f.

    Args:
        spec: Spectral model
        alpha, beta: Qubit indices in {1, 2}
        f: Frequency in Hz (scalar or array), nonzero

    Returns:
        Real PSD value(s) in Hz^2/Hz
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr == 0):
        raise DomainError("eval_psd is undefined at f = 0 (1/f divergence)")
    value = spec.entry(alpha, beta).evaluate(f_arr)
    return float(value) if np.ndim(f) == 0 else value


def spectral_matrix(spec, f) -> np.ndarray:
    return spec.matrix(f)


def _first_violation(matrices: np.ndarray, frequencies: np.ndarray):
    s1 = matrices[..., 0, 0].real
    s2 = matrices[..., 1, 1].real
    c12 = np.abs(matrices[..., 0, 1])
    bad = (s1 < 0) | (s2 < 0) | (c12**2 > s1 * s2 * (1.0 + 1e-9) + 1e-300)
    if not np.any(bad):
        return None
    return float(frequencies[np.argmax(bad)])


def validate_spec(spec, band: tuple, n_samples: int = 512) -> dict:
    """Check |C12(f)|^2 <= S1(f) S2(f) on a log-spaced grid over the band.

    Returns:
        dict: {"valid", "first_violation_hz", "max_coherence", "band", "n_samples"}
    """
    f_min, f_max = float(band[0]), float(band[1])
    if not 0 < f_min < f_max:
        raise ValueError(f"Validation band needs 0 < f_min < f_max, got ({f_min}, {f_max})")
    f = np.geomspace(f_min, f_max, int(n_samples))
    m = spec.matrix(f)
    first = _first_violation(m, f)
    denom = np.sqrt(np.clip(m[..., 0, 0].real * m[..., 1, 1].real, 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        coherence = np.where(denom > 0, np.abs(m[..., 0, 1]) / denom, 0.0)
    report = {
        "valid": first is None,
        "first_violation_hz": first,
        "max_coherence": float(np.max(coherence)),
        "band": [f_min, f_max],
        "n_samples": int(n_samples),
    }
    if first is not None:
        logger.warning(f"[SPEC] Cauchy-Schwarz violated, first at {first:.6g} Hz")
    return report


def crossing_frequencies(params: PsdComponentParams):
    """Roots of I/f = |J|/(1 + 4 pi^2 f^2 t_c^2) for opposite-sign I, J.

    Returns:
        (lower, upper) in Hz, or None when the entry never changes sign
    """
    i_amp, j_amp, t_c = abs(params.one_over_f), abs(params.lorentzian), params.t_c
    if params.one_over_f * params.lorentzian >= 0:
        return None

    def balance(f):
        return i_amp * (1.0 + 4.0 * np.pi**2 * f**2 * t_c**2) - f * j_amp

    f_peak = 1.0 / (2.0 * np.pi * t_c)
    if balance(f_peak) >= 0:
        return None
    lower = brentq(balance, 0.0, f_peak, xtol=1e-14, rtol=1e-14)
    upper = 1.0 / (4.0 * np.pi**2 * t_c**2 * lower)
    return lower, upper


def solve_correlation_time(one_over_f: float, lorentzian: float, flip_hz: float) -> float:
    """t_c that puts a root of I/f = |J| * Lorentzian at flip_hz"""
    if one_over_f <= 0 or lorentzian == 0 or flip_hz <= 0:
        raise InvalidSpecError("Sign-flip solve needs I > 0, J != 0 and flip_hz > 0")
    ratio = flip_hz * abs(lorentzian) / one_over_f
    if ratio <= 1.0:
        raise InvalidSpecError(
            f"No t_c places the flip at {flip_hz} Hz: the balance has no root below I/|J| = "
            f"{one_over_f / abs(lorentzian):.6g} Hz",
            frequency=flip_hz,
        )
    return float(np.sqrt(ratio - 1.0) / (2.0 * np.pi * flip_hz))


def reference_spec(flip_hz: float = 10.0, one_over_f: float = 9.99e6, lorentzian: float = 1e6) -> PsdSpec:
    """Mixture spec with equal 1/f entries and a negative Lorentzian cross term.

    t_c is solved so the cross-PSD changes sign at flip_hz.
    """
    t_c = solve_correlation_time(one_over_f, lorentzian, flip_hz)
    auto = PsdComponentParams(one_over_f, abs(lorentzian), t_c)
    cross = PsdComponentParams(one_over_f, -abs(lorentzian), t_c)
    spec = PsdSpec(entries={(1, 1): auto, (2, 2): auto, (1, 2): cross})
    roots = crossing_frequencies(cross)
    if roots is not None and abs(roots[0] - flip_hz) > 1e-6 * flip_hz:
        logger.warning(f"[SPEC] Requested flip {flip_hz} Hz is the upper root; lower root at {roots[0]:.6g} Hz")
    logger.info(f"[SPEC] Reference spec: t_c={t_c:.6g} s, sign changes at {roots}")
    return spec


def lorentzian_spec(amplitude: float, t_c: float, cross_fraction: float = 0.0) -> PsdSpec:
    auto = PsdComponentParams(0.0, amplitude, t_c)
    cross = PsdComponentParams(0.0, cross_fraction * amplitude, t_c)
    return PsdSpec(entries={(1, 1): auto, (2, 2): auto, (1, 2): cross})


def one_over_f_spec(amplitude: float, cross_fraction: float = 0.0) -> PsdSpec:
    auto = PsdComponentParams(amplitude, 0.0)
    cross = PsdComponentParams(cross_fraction * amplitude, 0.0)
    return PsdSpec(entries={(1, 1): auto, (2, 2): auto, (1, 2): cross})


def load_spec(path) -> PsdSpec:
    with open(path, "r", encoding="utf-8") as handle:
        return PsdSpec.from_dict(json.load(handle))


def save_spec(spec: PsdSpec, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    logger.info(f"[IO] Wrote spectral model to {path}")
    return path
