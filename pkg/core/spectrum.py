# core/spectrum.py

"""
Spectra from log-combinations, log-binning and batch averaging.

A two-sided series v[n] sampled at t_n = (2n + offset) dt, n = -L..L-1, is
transformed as F(f) = 2 dt * sum_n v[n] exp(2 pi i f t_n) on the grid
f_k = k / (4 L dt), k = -L..L-1. U1 and U2 use offsets 0 and 1. Averaging the
two transforms cancels the images folded in by odd multiples of the
sampling rate.
"""
import logging

import numpy as np
from scipy import fft

from core.combinations import LogCombination, extend_negative_time, extrapolate_lag0
from core.errors import ConfigurationError, FlaggedLagsError, GridMismatchError, InsufficientDataError
from core.spectra import SpectrumEstimate

logger = logging.getLogger(__name__)

PREFACTOR_MODES = ("quasi_static", "generalized")
ESTIMATORS = ("averaged", "U1", "U2")
TAPERS = ("none", "hann")


def prefactor(f, tau_alpha: float, tau_beta: float, mode: str = "quasi_static") -> np.ndarray:
    """1/(4 pi^2 tau_a tau_b), or (1/4) f^2 / [sin(pi f tau_a) sin(pi f tau_b)] in generalized mode"""
    f = np.asarray(f, dtype=float)
    base = 1.0 / (4.0 * np.pi**2 * tau_alpha * tau_beta)
    if mode == "quasi_static":
        return np.full(f.shape, base)
    if mode == "generalized":
        # sin(pi f tau) = pi f tau sinc(f tau); finite at f = 0
        return base / (np.sinc(f * tau_alpha) * np.sinc(f * tau_beta))
    raise ConfigurationError(f"Unknown prefactor mode '{mode}', expected one of {PREFACTOR_MODES}")


def _fill_flagged(series: LogCombination):
    values = series.values.copy()
    valid = ~series.flagged & np.isfinite(values)
    if not valid.any():
        raise FlaggedLagsError(f"{series.kind} pair {series.pair}: every lag is flagged")
    missing = ~valid
    if missing.any():
        idx = np.arange(values.size)
        real = np.interp(idx[missing], idx[valid], values.real[valid])
        imag = np.interp(idx[missing], idx[valid], values.imag[valid])
        values[missing] = real + 1j * np.where(imag > np.pi / 2.0, np.pi, 0.0)
    return values, int(missing.sum())


def taper_weights(n_lags: int, offset: int, taper: str = "none") -> np.ndarray:
    """Lag window on t_n = (2n + offset) dt, n = -L..L-1: ones, or cos^2(pi t / 2T) with T = 2 L dt"""
    if taper not in TAPERS:
        raise ConfigurationError(f"Unknown taper '{taper}', expected one of {TAPERS}")
    n = np.arange(-n_lags, n_lags)
    if taper == "none":
        return np.ones(n.size)
    return np.cos(np.pi * (2 * n + offset) / (4.0 * n_lags)) ** 2


def _transform(values: np.ndarray, n_lags: int, delta_t: float, offset: int, taper: str = "none"):
    size = 2 * n_lags
    n = np.arange(-n_lags, n_lags)
    if taper != "none":
        # the edge level passes untapered and lands at k = 0
        edge = 0.5 * (values[0] + values[-1])
        values = edge + (values - edge) * taper_weights(n_lags, offset, taper)
    folded = np.zeros(size, dtype=complex)
    folded[n % size] = values
    k = np.arange(-n_lags, n_lags)
    sums = size * fft.ifft(folded)[k % size]
    f = k / (4.0 * n_lags * delta_t)
    return f, 2.0 * delta_t * sums * np.exp(2j * np.pi * f * offset * delta_t)


def _replace_lag0(series: LogCombination, fit_lags: int):
    """Swap the degenerate same-channel lag-0 value for a quadratic extrapolation"""
    zero = np.flatnonzero(series.times == 0)
    if zero.size == 0:
        raise InsufficientDataError(f"{series.kind} has no lag-0 sample to replace")
    raw = series.values[zero[0]]
    value, stderr = extrapolate_lag0(series, fit_lags, with_error=True)
    values = series.values.copy()
    flagged = series.flagged.copy()
    values[zero[0]] = value
    flagged[zero[0]] = False
    replaced = LogCombination(
        kind=series.kind, times=series.times, values=values, pair=series.pair,
        delta_t=series.delta_t, taus=series.taus, flagged=flagged, metadata=dict(series.metadata),
    )
    return replaced, raw, value, stderr


def _lag0_report(raw, value, stderr, delta_t, scale) -> dict:
    raw_offset = float((raw - value).real * 2.0 * delta_t * scale) if np.isfinite(raw) else None
    return {"lag0_value": complex(value), "lag0_floor": float(stderr * 2.0 * delta_t * scale),
            "lag0_raw_offset": raw_offset}


def _finish(f, values, kind, metadata):
    keep = f != 0
    if kind == "cross":
        k_pos = np.flatnonzero(f > 0)
        mirror = np.searchsorted(f, -f[k_pos])
        inside = (mirror < f.size) & (mirror >= 0)
        inside[inside] = np.isclose(f[mirror[inside]], -f[k_pos][inside])
        if inside.any():
            scale = np.max(np.abs(values[keep])) or 1.0
            residual = np.max(np.abs(values[mirror[inside]] - np.conj(values[k_pos][inside]))) / scale
            metadata["hermitian_residual"] = float(residual)
            if residual > 1e-3:
                logger.warning(f"[PSD] C(-f) departs from conj C(f) by {residual:.3g} (relative)")
    return SpectrumEstimate(frequencies=f[keep], values=values[keep], kind=kind, metadata=metadata)


def spectrum_from_U(u1: LogCombination, u2: LogCombination = None, mode: str = "quasi_static",
                    u1_reverse: LogCombination = None, u2_reverse: LogCombination = None,
                    estimator: str = "averaged", fit_lags: int = 8, taper: str = "none") -> SpectrumEstimate:
    """Cross- or auto-PSD from U1 (even lags) and U2 (odd lags).

    Args:
        u1, u2: One-sided or already two-sided log-combinations
        mode: "quasi_static" or "generalized" prefactor
        u1_reverse, u2_reverse: Series of the reversed pair for negative times
        estimator: "averaged" (both transforms), "U1" or "U2" alone
        fit_lags: Lags used to replace a degenerate same-qubit lag 0
        taper: Lag window, "none" or "hann"

    Returns:
        SpectrumEstimate on f_k = k/(4 L dt), f = 0 dropped
    """
    if estimator not in ESTIMATORS:
        raise ConfigurationError(f"Unknown estimator '{estimator}', expected one of {ESTIMATORS}")
    if u1 is not None and u1.kind != "U1":
        raise ConfigurationError(f"u1 must be a U1 series, got {u1.kind}")
    if u2 is not None and u2.kind != "U2":
        raise ConfigurationError(f"u2 must be a U2 series, got {u2.kind}")
    use = {"averaged": (True, True), "U1": (True, False), "U2": (False, True)}[estimator]
    needed = [s for s, wanted in zip((u1, u2), use) if wanted]
    if any(s is None for s in needed):
        raise ConfigurationError(f"Estimator '{estimator}' is missing an input series")
    if u1 is not None and u2 is not None:
        if u1.delta_t != u2.delta_t or tuple(u1.taus) != tuple(u2.taus) or u1.pair != u2.pair:
            raise GridMismatchError("U1 and U2 must share delta_t, evolution times and qubit pair")

    ref = needed[0]
    metadata = {
        "delta_t": ref.delta_t, "tau_alpha": ref.taus[0], "tau_beta": ref.taus[1], "pair": list(ref.pair),
        "prefactor": mode, "estimator": estimator, "batches": 1, "taper": taper,
    }
    transforms = []
    flagged_total = filled_total = 0
    n_lags_seen = set()
    for series, reverse, offset, wanted in ((u1, u1_reverse, 0, use[0]), (u2, u2_reverse, 1, use[1])):
        if not wanted:
            continue
        if series.same_qubit and series.kind == "U1" and not series.two_sided:
            series, raw, value, stderr = _replace_lag0(series, fit_lags)
            metadata.update(_lag0_report(raw, value, stderr, series.delta_t,
                                         prefactor(0.0, *series.taus, mode)[()]))
            if reverse is None:
                reverse = series
        two_sided = extend_negative_time(series, reverse)
        parity = two_sided.steps % 2
        if np.any(parity != offset):
            raise GridMismatchError(f"{series.kind} samples are not on the {'odd' if offset else 'even'} lag grid")
        values, filled = _fill_flagged(two_sided)
        n_lags = two_sided.metadata["n_lags"]
        n_lags_seen.add(n_lags)
        flagged_total += int(two_sided.flagged.sum())
        filled_total += filled
        transforms.append(_transform(values, n_lags, series.delta_t, offset, taper))
    if len(n_lags_seen) != 1:
        raise GridMismatchError(f"U1 and U2 cover different lag ranges: {sorted(n_lags_seen)}")

    f = transforms[0][0]
    combined = sum(t[1] for t in transforms) / len(transforms)
    tau_a, tau_b = ref.taus
    values = combined * prefactor(f, tau_a, tau_b, mode)
    n_lags = n_lags_seen.pop()
    metadata.update({
        "n_lags": n_lags,
        "flagged_lags": flagged_total,
        "filled_lags": filled_total,
        "flagged_fraction": flagged_total / (2 * n_lags * len(transforms)),
    })
    kind = "auto" if ref.same_qubit else "cross"
    logger.info(f"[PSD] {kind} spectrum {ref.pair} ({estimator}, {mode}): {n_lags} lags, "
                f"{filled_total} filled")
    return _finish(f, values, kind, metadata)


def spectrum_from_W(w: LogCombination, mode: str = "quasi_static", lag0=None, fit_lags: int = 8,
                    taper: str = "none") -> SpectrumEstimate:
    """Auto-PSD from W on even lags; lag 0 comes from extrapolate_lag0 unless supplied.

    A lag-0 error shows up only as a flat floor, which is reported in the
    metadata and left in the spectrum.
    """
    if w.kind != "W":
        raise ConfigurationError(f"spectrum_from_W needs a W series, got {w.kind}")
    if w.two_sided:
        raise ConfigurationError("spectrum_from_W expects the one-sided W series")
    tau = w.taus[0]
    scale = prefactor(0.0, tau, tau, mode)[()]
    metadata = {"delta_t": w.delta_t, "tau_alpha": tau, "tau_beta": tau, "pair": list(w.pair),
                "prefactor": mode, "estimator": "W", "batches": 1, "taper": taper}

    if lag0 is None:
        series, raw, value, stderr = _replace_lag0(w, fit_lags)
    else:
        zero = np.flatnonzero(w.times == 0)
        if zero.size == 0:
            raise InsufficientDataError("W has no lag-0 sample")
        raw, value, stderr = w.values[zero[0]], complex(lag0), 0.0
        values = w.values.copy()
        flagged = w.flagged.copy()
        values[zero[0]], flagged[zero[0]] = value, False
        series = LogCombination(kind="W", times=w.times, values=values, pair=w.pair, delta_t=w.delta_t,
                                taus=w.taus, flagged=flagged, metadata=dict(w.metadata))
    metadata.update(_lag0_report(raw, value, stderr, w.delta_t, scale))

    two_sided = extend_negative_time(series)
    values, filled = _fill_flagged(two_sided)
    n_lags = two_sided.metadata["n_lags"]
    f, transformed = _transform(values, n_lags, w.delta_t, 0, taper)
    spectrum = transformed * prefactor(f, tau, tau, mode)
    metadata.update({
        "n_lags": n_lags,
        "flagged_lags": int(two_sided.flagged.sum()),
        "filled_lags": filled,
        "flagged_fraction": float(two_sided.flagged.mean()),
    })
    logger.info(f"[PSD] auto spectrum from W, qubit {w.pair[0]}: floor {metadata['lag0_floor']:.3g} Hz^2/Hz")
    return _finish(f, spectrum, "auto", metadata)


def log_bin(spec: SpectrumEstimate, bins_per_decade: int = 10) -> SpectrumEstimate:
    """Arithmetic mean of the complex values in each log-spaced bin (f > 0).

    Bin centers are the geometric means of the bin edges; a bin holding a single
    point keeps that point's frequency and value.
    """
    if bins_per_decade < 1:
        raise ConfigurationError(f"bins_per_decade must be >= 1, got {bins_per_decade}")
    pos = spec.positive()
    if len(pos) == 0:
        raise InsufficientDataError("Nothing to bin: the spectrum has no positive frequencies")

    ids = np.floor(bins_per_decade * np.log10(pos.frequencies) + 1e-9).astype(int)
    bins, inverse = np.unique(ids, return_inverse=True)
    counts = np.bincount(inverse)
    real = np.bincount(inverse, weights=pos.values.real) / counts
    imag = np.bincount(inverse, weights=pos.values.imag) / counts
    single = np.bincount(inverse, weights=pos.frequencies) / counts
    centers = np.where(counts == 1, single, 10.0 ** ((bins + 0.5) / bins_per_decade))
    stderr = None
    if pos.stderr is not None:
        stderr = np.sqrt(np.bincount(inverse, weights=np.square(pos.stderr))) / counts
    metadata = dict(pos.metadata)
    metadata["bins_per_decade"] = bins_per_decade
    return SpectrumEstimate(
        frequencies=centers,
        values=real + 1j * imag,
        kind=pos.kind,
        bin_counts=counts,
        bins_per_decade=bins_per_decade,
        stderr=stderr,
        metadata=metadata,
    )


def average_batches(specs: list) -> SpectrumEstimate:
    """Pointwise complex mean over batches with standard error SD/sqrt(batches)"""
    if not specs:
        raise InsufficientDataError("No batch spectra to average")
    first = specs[0]
    for other in specs[1:]:
        same = (other.frequencies.shape == first.frequencies.shape
                and np.allclose(other.frequencies, first.frequencies, rtol=1e-12, atol=0.0))
        if not same or other.kind != first.kind:
            raise GridMismatchError("Batch spectra must share kind and frequency grid")
    stack = np.vstack([s.values for s in specs])
    count = len(specs)
    stderr = stack.std(axis=0, ddof=1) / np.sqrt(count) if count > 1 else np.full(first.frequencies.shape, np.nan)
    metadata = dict(first.metadata)
    metadata["batches"] = count
    if all("flagged_fraction" in s.metadata for s in specs):
        metadata["flagged_fraction"] = float(np.mean([s.metadata["flagged_fraction"] for s in specs]))
    return SpectrumEstimate(
        frequencies=first.frequencies.copy(),
        values=stack.mean(axis=0),
        kind=first.kind,
        bin_counts=first.bin_counts,
        bins_per_decade=first.bins_per_decade,
        stderr=stderr,
        metadata=metadata,
    )
