# core/analysis.py

"""
Per-batch orchestration: shot record -> correlators -> U/W -> spectra -> log bins.

Spectra whose flagged-lag fraction exceeds the threshold are kept out of the
accepted set; a spectrum with no usable lag at all counts as fully flagged.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from core.combinations import compute_U, compute_W
from core.config import AnalysisOptions, lag_limit
from core.correlators import estimate_correlators, smooth_correlators
from core.errors import FlaggedLagsError, GridMismatchError, InsufficientDataError
from core.ramsey import ShotRecord
from core.spectrum import average_batches, log_bin, spectrum_from_U, spectrum_from_W

logger = logging.getLogger(__name__)


@dataclass
class BatchAnalysis:
    """Spectra keyed by name ("cross_12", "auto_1", "auto_2"), raw and log-binned.

    flagged holds every requested name, including spectra that could not be
    formed (fraction 1.0, absent from raw and binned).
    """

    raw: dict
    binned: dict
    flagged: dict = field(default_factory=dict)
    batches: int = 1
    threshold: float = 1.0

    @property
    def flagged_fraction(self) -> float:
        return max(self.flagged.values(), default=0.0)

    @property
    def rejected(self) -> list:
        """Names whose flagged fraction exceeds the threshold"""
        return sorted(name for name, fraction in self.flagged.items() if fraction > self.threshold)

    def accepted(self) -> dict:
        """Binned spectra within the threshold"""
        return {name: spec for name, spec in self.binned.items() if name not in self.rejected}


def _correlators(record: ShotRecord, pair, options: AnalysisOptions, max_lag: int):
    """Correlators up to max_lag, smoothed over lags when lag_smoothing > 0.

    The raw range reaches half a window past max_lag so the last kept lags
    average over a full window.
    """
    width = options.lag_smoothing
    reach = min(record.n_pairs - 1, max_lag + int(np.ceil(width * max_lag / 2.0)) + 1) if width > 0 else max_lag
    corr = estimate_correlators(record, pair, reach, options.correlator_method, options.jackknife_blocks)
    if width > 0:
        corr = smooth_correlators(corr, width, max_lag)
    return corr


def _max_lag(record: ShotRecord, options: AnalysisOptions) -> int:
    max_lag = lag_limit(options, record.n_pairs)
    if max_lag >= record.n_pairs:
        raise InsufficientDataError(f"max_lag={max_lag} must be smaller than N={record.n_pairs}")
    return max_lag


def cross_spectrum(record: ShotRecord, options: AnalysisOptions, estimator: str = None):
    """Cross-PSD C_12 from the (1,2) and (2,1) correlator sets"""
    max_lag = _max_lag(record, options)
    forward = _correlators(record, (1, 2), options, max_lag)
    reverse = _correlators(record, (2, 1), options, max_lag)
    floor, bias = options.ratio_floor, options.bias_correction
    return spectrum_from_U(
        compute_U(forward, 1, floor, bias),
        compute_U(forward, 2, floor, bias),
        mode=options.prefactor,
        u1_reverse=compute_U(reverse, 1, floor, bias),
        u2_reverse=compute_U(reverse, 2, floor, bias),
        estimator=estimator or options.estimator,
        fit_lags=options.fit_lags,
        taper=options.taper,
    )


def auto_spectrum(record: ShotRecord, alpha: int, options: AnalysisOptions):
    """Auto-PSD of one qubit via W (default) or the same-qubit U1"""
    max_lag = _max_lag(record, options)
    corr = _correlators(record, (alpha, alpha), options, max_lag)
    if options.auto_method == "U":
        u1 = compute_U(corr, 1, options.ratio_floor, options.bias_correction)
        return spectrum_from_U(u1, None, mode=options.prefactor, estimator="U1",
                               fit_lags=options.fit_lags, taper=options.taper)
    w = compute_W(corr, options.ratio_floor, record.qubit(alpha).t2star, options.bias_correction)
    return spectrum_from_W(w, mode=options.prefactor, fit_lags=options.fit_lags, taper=options.taper)


def _requested(options: AnalysisOptions) -> dict:
    wanted = {}
    if "cross" in options.outputs:
        wanted["cross_12"] = lambda record: cross_spectrum(record, options)
    if "auto" in options.outputs:
        for alpha in (1, 2):
            wanted[f"auto_{alpha}"] = lambda record, alpha=alpha: auto_spectrum(record, alpha, options)
    return wanted


def analyze_record(record: ShotRecord, options: AnalysisOptions) -> BatchAnalysis:
    """All requested spectra of one batch.

    Args:
        record: Shot record of one batch
        options: Analysis options (max_lag, bins, prefactor, estimator, auto method, ...)

    Returns:
        BatchAnalysis with raw and log-binned spectra and per-spectrum flagged fractions.
        A spectrum whose lags are all flagged is left out and recorded as fully flagged.
    """
    if record.n_pairs < 2:
        raise InsufficientDataError("A batch needs at least two XX/XY pairs")
    raw, flagged = {}, {}
    for name, build in _requested(options).items():
        try:
            raw[name] = build(record)
        except FlaggedLagsError as e:
            logger.error(f"[PSD] {name}: no usable lags ({e})")
            flagged[name] = 1.0
            continue
        flagged[name] = float(raw[name].metadata.get("flagged_fraction", 0.0))

    binned = {name: log_bin(spec, options.bins_per_decade) for name, spec in raw.items()}
    analysis = BatchAnalysis(raw=raw, binned=binned, flagged=flagged, threshold=options.flagged_threshold)
    for name in analysis.rejected:
        logger.warning(f"[PSD] {name}: {flagged[name]:.1%} of lags flagged "
                       f"(threshold {options.flagged_threshold:.0%})")
    return analysis


def combine_batches(analyses: list) -> BatchAnalysis:
    """Batch-averaged raw and binned spectra; flagged fractions are averaged.

    A spectrum missing from any batch is dropped and counted as fully flagged.
    """
    if not analyses:
        raise InsufficientDataError("No batch analyses to combine")
    names = list(analyses[0].flagged)
    complete = [name for name in names if all(name in a.raw for a in analyses)]
    raw = {name: average_batches([a.raw[name] for a in analyses]) for name in complete}
    binned = {name: average_batches([a.binned[name] for a in analyses]) for name in complete}
    flagged = {
        name: float(np.mean([a.flagged[name] for a in analyses])) if name in complete else 1.0
        for name in names
    }
    logger.info(f"[PSD] Combined {len(analyses)} batches: {sorted(complete)}")
    return BatchAnalysis(raw=raw, binned=binned, flagged=flagged, batches=len(analyses),
                         threshold=analyses[0].threshold)


def check_compatible(records: list):
    """Batches must share delta_t, N and evolution times"""
    if not records:
        raise InsufficientDataError("No shot records to analyze")
    first = records[0]
    for index, other in enumerate(records[1:], start=1):
        same = (
            other.delta_t == first.delta_t
            and other.n_pairs == first.n_pairs
            and all(other.qubit(a).tau == first.qubit(a).tau for a in (1, 2))
        )
        if not same:
            raise GridMismatchError(f"Shot record {index} does not match record 0 (delta_t, N or tau differ)")


def analyze_batches(records: list, options: AnalysisOptions) -> BatchAnalysis:
    """analyze_record over every batch (threaded when workers > 1), then combine_batches"""
    check_compatible(records)
    if options.workers > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            analyses = list(pool.map(lambda r: analyze_record(r, options), records))
    else:
        analyses = [analyze_record(r, options) for r in records]
    return combine_batches(analyses)
