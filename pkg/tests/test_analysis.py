"""
Tests for per-batch analysis, batch combination and end-to-end spectra
"""
from pathlib import Path

import numpy as np
import pytest

from commands.synth_command import synthesize_for
from core import rng
from core.analysis import BatchAnalysis, analyze_batches, analyze_record, combine_batches, cross_spectrum
from core.config import AnalysisOptions, build_spec, load_config, resolve_sequence
from core.errors import GridMismatchError, InsufficientDataError
from core.ramsey import QubitParams, ShotRecord, run_sequence
from core.spectra import SpectrumEstimate, crossing_frequencies, eval_psd
from core.spectrum import average_batches, log_bin

SEED = 42
CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _simulate(config) -> list:
    pairs = synthesize_for(config)
    sequence = resolve_sequence(config, pairs[0])
    return [run_sequence(sequence, pair, batch=b, workers=config.analysis.workers) for b, pair in enumerate(pairs)]


def _truth(spec, a, b, estimate: SpectrumEstimate, bins_per_decade: int) -> np.ndarray:
    """Model PSD on the raw grid, binned the same way as the estimate"""
    values = eval_psd(spec, a, b, estimate.frequencies)
    kind = "auto" if a == b else "cross"
    return log_bin(SpectrumEstimate(estimate.frequencies, values, kind=kind), bins_per_decade).values


def _db(estimate, truth) -> np.ndarray:
    return 10.0 * np.log10(np.abs(estimate) / np.abs(truth))


def _flat(n=256, value=1, delta_t=1e-3) -> ShotRecord:
    outcomes = {(a, l): np.full(n, value, dtype=int) for a in (1, 2) for l in ("XX", "XY")}
    q = QubitParams(tau=1e-4)
    return ShotRecord(outcomes=outcomes, delta_t=delta_t, qubits=(q, q))


def _estimate(values, kind="auto") -> SpectrumEstimate:
    return SpectrumEstimate(np.arange(1, len(values) + 1, dtype=float), values, kind=kind,
                            metadata={"flagged_fraction": 0.0})


@pytest.fixture(scope="module")
def reference():
    config = load_config(CONFIG_DIR / "reference.json")
    return config, _simulate(config)


class TestBatchAnalysis:

    def test_rejected_and_accepted(self):
        spectra = {name: _estimate(np.ones(4)) for name in ("cross_12", "auto_1", "auto_2")}
        analysis = BatchAnalysis(raw=spectra, binned=spectra,
                                 flagged={"cross_12": 0.05, "auto_1": 0.5, "auto_2": 0.2}, threshold=0.2)
        assert analysis.rejected == ["auto_1"]
        assert sorted(analysis.accepted()) == ["auto_2", "cross_12"]
        assert analysis.flagged_fraction == 0.5

    def test_nothing_flagged(self):
        analysis = BatchAnalysis(raw={}, binned={})
        assert analysis.flagged_fraction == 0.0
        assert analysis.rejected == []

    def test_constant_shots_are_fully_flagged(self):
        analysis = analyze_record(_flat(), AnalysisOptions(max_lag=16))
        assert analysis.flagged == {"cross_12": 1.0, "auto_1": 1.0, "auto_2": 1.0}
        assert analysis.raw == {} and analysis.accepted() == {}

    def test_record_too_short(self):
        with pytest.raises(InsufficientDataError):
            analyze_record(_flat(n=4), AnalysisOptions(max_lag=8))


class TestCombineBatches:

    def test_spectrum_missing_from_a_batch(self):
        full = {"cross_12": _estimate(np.ones(4) + 1j, "cross"), "auto_1": _estimate(np.ones(4))}
        first = BatchAnalysis(raw=full, binned=full, flagged={"cross_12": 0.1, "auto_1": 0.0}, threshold=0.25)
        partial = {"cross_12": _estimate(np.full(4, 3.0) + 1j, "cross")}
        second = BatchAnalysis(raw=partial, binned=partial, flagged={"cross_12": 0.3, "auto_1": 1.0},
                               threshold=0.25)
        combined = combine_batches([first, second])
        assert combined.batches == 2
        assert set(combined.raw) == {"cross_12"}
        assert combined.flagged["auto_1"] == 1.0
        assert combined.flagged["cross_12"] == pytest.approx(0.2)
        np.testing.assert_allclose(combined.binned["cross_12"].values, np.full(4, 2.0 + 1j))
        assert combined.rejected == ["auto_1"]

    def test_empty(self):
        with pytest.raises(InsufficientDataError):
            combine_batches([])

    @pytest.mark.parametrize("batches", [4, 16])
    def test_standard_error_shrinks_with_batches(self, batches):
        """SE per point is SD / sqrt(B), so B * <SE^2> recovers the per-batch variance"""
        sigma = 2.0
        gen = rng.stream(SEED, rng.TESTS, 80 + batches)
        specs = [_estimate(5.0 + gen.normal(0.0, sigma, 2000)) for _ in range(batches)]
        averaged = average_batches(specs)
        assert averaged.metadata["batches"] == batches
        assert batches * np.mean(averaged.stderr**2) == pytest.approx(sigma**2, rel=0.1)

    def test_mismatched_batches(self):
        with pytest.raises(GridMismatchError):
            analyze_batches([_flat(), _flat(delta_t=2e-3)], AnalysisOptions(max_lag=16))


class TestReferenceCrossSpectrum:
    """Cross-PSD of the reference mixture recovered from simulated shots"""

    @pytest.mark.slow
    def test_magnitude_and_phase(self, reference):
        config, records = reference
        analysis = analyze_batches(records, config.analysis)
        assert analysis.rejected == []
        spec = build_spec(config)
        bins = config.analysis.bins_per_decade
        est = analysis.binned["cross_12"]
        truth = _truth(spec, 1, 2, analysis.raw["cross_12"], bins)
        f = est.frequencies

        root = crossing_frequencies(spec.entry(1, 2))[0]
        near = np.argmin(np.abs(np.log10(f) - np.log10(root)))
        away = np.abs(np.arange(f.size) - near) > 1
        band = (f >= 0.5) & (f <= 500.0) & away
        errors = _db(est.values[band], truth[band])
        assert np.all(np.abs(errors) < 3.0), f"up to {np.abs(errors).max():.2f} dB off"

        phase = np.abs(est.phase)
        below = band & (f < root)
        above = band & (f > root)
        assert below.sum() >= 5 and above.sum() >= 5
        assert np.all(phase[below] < np.pi / 4.0)
        assert np.all(phase[above] > 3.0 * np.pi / 4.0)

    @pytest.mark.slow
    def test_spam_leaves_spectrum_within_errors(self, reference):
        config, records = reference
        clean = analyze_batches(records, config.analysis).binned["cross_12"]
        spam_config = load_config(CONFIG_DIR / "reference_spam.json")
        noisy = analyze_batches(_simulate(spam_config), spam_config.analysis).binned["cross_12"]
        band = (clean.frequencies >= 0.5) & (clean.frequencies <= 500.0)
        se = np.sqrt(clean.stderr**2 + noisy.stderr**2)
        deviation = np.abs(noisy.values - clean.values)
        assert np.all(deviation[band] < 5.0 * se[band])

    @pytest.mark.slow
    def test_averaged_estimator_reduces_aliasing(self, reference):
        config, records = reference
        spec = build_spec(config)
        bins = config.analysis.bins_per_decade
        errors = {}
        for estimator in ("averaged", "U1", "U2"):
            raw = average_batches([cross_spectrum(r, config.analysis, estimator) for r in records])
            binned = log_bin(raw, bins)
            truth = _truth(spec, 1, 2, raw, bins)
            top = binned.frequencies >= binned.frequencies.max() / np.sqrt(10.0)
            errors[estimator] = np.median(np.abs(_db(binned.values[top], truth[top])))
        assert errors["averaged"] < errors["U1"]
        assert errors["averaged"] < errors["U2"]


class TestAutoSpectrum:

    @pytest.mark.slow
    def test_lorentzian_from_w(self):
        config = load_config(CONFIG_DIR / "auto_lorentzian.json")
        analysis = analyze_batches(_simulate(config), config.analysis)
        assert analysis.rejected == []
        spec = build_spec(config)
        bins = config.analysis.bins_per_decade
        for alpha in (1, 2):
            name = f"auto_{alpha}"
            est = analysis.binned[name]
            truth = _truth(spec, alpha, alpha, analysis.raw[name], bins).real
            band = (est.frequencies >= 4.0) & (est.frequencies <= 400.0)
            errors = _db(est.values.real[band], truth[band])
            assert np.all(np.abs(errors) < 3.0), f"{name} up to {np.abs(errors).max():.2f} dB off"
            assert analysis.raw[name].metadata["lag0_floor"] < truth[band].min()


class TestToneDemo:

    @pytest.mark.slow
    def test_line_stands_out(self):
        config = load_config(CONFIG_DIR / "tone_demo.json")
        analysis = analyze_batches(_simulate(config), config.analysis)
        line_bin = np.floor(config.analysis.bins_per_decade * np.log10(config.tone.frequency))
        for name in ("cross_12", "auto_1", "auto_2"):
            est = analysis.binned[name]
            ids = np.floor(config.analysis.bins_per_decade * np.log10(est.frequencies) + 1e-9)
            peak = np.flatnonzero(ids == line_bin)[0]
            neighbours = np.r_[est.magnitude[peak - 5:peak], est.magnitude[peak + 1:peak + 6]]
            contrast = 10.0 * np.log10(est.magnitude[peak] / np.median(neighbours))
            assert contrast >= 10.0, f"{name}: line only {contrast:.1f} dB above its neighbours"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
