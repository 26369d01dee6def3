"""
Tests for correlated noise synthesis and the periodogram benchmark
"""
import numpy as np
import pytest

from core.errors import ConfigurationError, InvalidSpecError
from core.noise import (
    NoiseTracePair,
    coherence_time,
    inject_tone,
    periodogram_cross,
    synthesize,
    synthesize_batches,
)
from core.spectra import PsdComponentParams, PsdSpec, eval_psd, lorentzian_spec, one_over_f_spec, reference_spec
from core.spectrum import log_bin

SEED = 42


def _white_spec(level: float, cross_fraction: float = 0.0) -> PsdSpec:
    # a Lorentzian with t_c far below any sampling step is flat
    auto = PsdComponentParams(0.0, level, 1e-12)
    cross = PsdComponentParams(0.0, cross_fraction * level, 1e-12)
    return PsdSpec(entries={(1, 1): auto, (2, 2): auto, (1, 2): cross})


class TestSynthesize:

    def test_shapes_and_times(self):
        pair = synthesize(lorentzian_spec(1e6, 1e-3), 1024, 1e-4, SEED)
        assert pair.n == 1024
        assert pair.delta_omega_1.shape == pair.delta_omega_2.shape == (1024,)
        np.testing.assert_allclose(pair.times[:3], [0.0, 1e-4, 2e-4])
        assert pair.seed == SEED

    def test_deterministic_per_batch(self):
        spec = lorentzian_spec(1e6, 1e-3, cross_fraction=0.5)
        a = synthesize(spec, 2048, 1e-4, SEED, batch=3)
        b = synthesize(spec, 2048, 1e-4, SEED, batch=3)
        c = synthesize(spec, 2048, 1e-4, SEED, batch=4)
        np.testing.assert_array_equal(a.delta_omega_1, b.delta_omega_1)
        np.testing.assert_array_equal(a.delta_omega_2, b.delta_omega_2)
        assert not np.allclose(a.delta_omega_1, c.delta_omega_1)

    def test_zero_spec_gives_zero_traces(self):
        zero = PsdComponentParams()
        spec = PsdSpec(entries={(1, 1): zero, (2, 2): zero, (1, 2): zero})
        pair = synthesize(spec, 256, 1e-3, SEED)
        assert not np.any(pair.delta_omega_1)
        assert not np.any(pair.delta_omega_2)

    def test_white_noise_variance(self):
        """Flat C gives <dw^2> = 4 pi^2 C / dt"""
        level, dt = 1e3, 1e-4
        pair = synthesize(_white_spec(level), 2**16, dt, SEED)
        expected = 4.0 * np.pi**2 * level / dt
        assert np.var(pair.delta_omega_1) == pytest.approx(expected, rel=0.03)
        assert np.var(pair.delta_omega_2) == pytest.approx(expected, rel=0.03)

    def test_cross_correlation_coefficient(self):
        pair = synthesize(_white_spec(1e3, cross_fraction=0.5), 2**16, 1e-4, SEED)
        rho = np.corrcoef(pair.delta_omega_1, pair.delta_omega_2)[0, 1]
        assert rho == pytest.approx(0.5, abs=0.02)

    def test_anticorrelated_cross_term(self):
        pair = synthesize(_white_spec(1e3, cross_fraction=-0.8), 2**16, 1e-4, SEED)
        rho = np.corrcoef(pair.delta_omega_1, pair.delta_omega_2)[0, 1]
        assert rho == pytest.approx(-0.8, abs=0.02)

    def test_fully_correlated_is_identical(self):
        pair = synthesize(_white_spec(1e3, cross_fraction=1.0), 4096, 1e-4, SEED)
        np.testing.assert_allclose(pair.delta_omega_1, pair.delta_omega_2,
                                   atol=1e-6 * np.std(pair.delta_omega_1))

    def test_rejects_cauchy_schwarz_violation(self):
        with pytest.raises(InvalidSpecError):
            synthesize(_white_spec(1e3, cross_fraction=1.5), 1024, 1e-4, SEED)

    def test_bad_arguments(self):
        spec = _white_spec(1.0)
        with pytest.raises(ConfigurationError):
            synthesize(spec, 1, 1e-4, SEED)
        with pytest.raises(ConfigurationError):
            synthesize(spec, 1024, 0.0, SEED)
        with pytest.raises(ValueError):
            synthesize(spec, 1024, 1e-4, None)

    def test_batches_in_order_for_any_worker_count(self):
        spec = lorentzian_spec(1e6, 1e-3)
        serial = synthesize_batches(spec, 1024, 1e-4, SEED, batches=3, workers=1)
        threaded = synthesize_batches(spec, 1024, 1e-4, SEED, batches=3, workers=3)
        for b, (x, y) in enumerate(zip(serial, threaded)):
            np.testing.assert_array_equal(x.delta_omega_1, y.delta_omega_1)
            np.testing.assert_array_equal(x.delta_omega_1, synthesize(spec, 1024, 1e-4, SEED, batch=b).delta_omega_1)


class TestWelchRoundTrip:
    """Synthesized traces reproduce the target PSD within a few dB"""

    @pytest.mark.slow
    def test_lorentzian_auto_and_cross(self):
        amplitude, t_c, dt = 1e6, 1e-3, 1e-4
        spec = lorentzian_spec(amplitude, t_c, cross_fraction=-0.5)
        pair = synthesize(spec, 2**16, dt, SEED)

        auto = log_bin(periodogram_cross(pair.delta_omega_1, pair.delta_omega_1, dt, segments=16), 10)
        keep = auto.bin_counts >= 4
        ratio = auto.values.real[keep] / eval_psd(spec, 1, 1, auto.frequencies[keep])
        assert np.all(np.abs(10.0 * np.log10(ratio)) < 3.0), "auto PSD off by more than 3 dB"

        cross = log_bin(periodogram_cross(pair.delta_omega_1, pair.delta_omega_2, dt, segments=16), 10)
        keep = cross.bin_counts >= 16
        ratio = cross.values.real[keep] / eval_psd(spec, 1, 2, cross.frequencies[keep])
        assert np.all(ratio > 0), "cross PSD has the wrong sign"
        assert np.all(np.abs(10.0 * np.log10(ratio)) < 3.0), "cross PSD off by more than 3 dB"

    @staticmethod
    def _db_errors(pair, spec, a, b, dt, min_count, f_max):
        est = log_bin(periodogram_cross(pair.trace(a), pair.trace(b), dt, segments=16), 10)
        keep = (est.bin_counts >= min_count) & (est.frequencies <= f_max)
        truth = eval_psd(spec, a, b, est.frequencies)
        if a != b:
            # only bins where the cross term is resolvable against the autos
            coherence = np.abs(truth) / np.sqrt(eval_psd(spec, 1, 1, est.frequencies)
                                                * eval_psd(spec, 2, 2, est.frequencies))
            keep &= coherence >= 0.5
        assert keep.sum() >= 5
        ratio = est.values.real[keep] / truth[keep]
        assert np.all(ratio > 0), f"PSD ({a},{b}) has the wrong sign"
        return np.abs(10.0 * np.log10(ratio))

    @pytest.mark.slow
    def test_one_over_f(self):
        dt = 1e-4
        spec = one_over_f_spec(1e6, cross_fraction=0.6)
        pair = synthesize(spec, 2**16, dt, SEED)
        f_max = 1.0 / (8.0 * dt)
        for a, b in ((1, 1), (2, 2), (1, 2)):
            errors = self._db_errors(pair, spec, a, b, dt, 4 if a == b else 16, f_max)
            assert np.all(errors < 3.0), f"({a},{b}) off by up to {errors.max():.2f} dB"

    @pytest.mark.slow
    def test_reference_mixture(self):
        dt = 250e-6
        spec = reference_spec()
        pair = synthesize(spec, 2**18, dt, SEED)
        f_max = 1.0 / (8.0 * dt)
        for a, b in ((1, 1), (2, 2), (1, 2)):
            errors = self._db_errors(pair, spec, a, b, dt, 4 if a == b else 16, f_max)
            assert np.all(errors < 3.0), f"({a},{b}) off by up to {errors.max():.2f} dB"

    def test_white_noise_level(self):
        level, dt = 1e3, 1e-4
        pair = synthesize(_white_spec(level), 2**15, dt, SEED)
        est = periodogram_cross(pair.delta_omega_1, pair.delta_omega_1, dt, segments=32)
        assert est.kind == "auto"
        assert np.mean(est.values.real) == pytest.approx(level, rel=0.05)


class TestHelpers:

    def test_inject_tone_selected_qubits(self):
        pair = NoiseTracePair(np.zeros(8), np.zeros(8), 0.25)
        toned = inject_tone(pair, 1.0, 2.0, qubits=(2,))
        assert not np.any(toned.delta_omega_1)
        np.testing.assert_allclose(toned.delta_omega_2, 2.0 * np.sin(2.0 * np.pi * pair.times), atol=1e-12)

    def test_coherence_time(self):
        assert coherence_time(np.ones(10)) == pytest.approx(np.sqrt(2.0))
        with pytest.raises(ConfigurationError):
            coherence_time(np.zeros(10))

    def test_trace_pair_validation(self):
        with pytest.raises(ConfigurationError):
            NoiseTracePair(np.zeros(4), np.zeros(5), 1.0)
        with pytest.raises(ConfigurationError):
            NoiseTracePair(np.zeros(4), np.zeros(4), -1.0)
        with pytest.raises(ValueError):
            NoiseTracePair(np.zeros(4), np.zeros(4), 1.0).trace(3)

    def test_periodogram_argument_checks(self):
        x = np.zeros(100)
        with pytest.raises(ConfigurationError):
            periodogram_cross(x, x, 1.0, segments=3)
        with pytest.raises(ConfigurationError):
            periodogram_cross(x, np.zeros(50), 1.0, segments=2)
        with pytest.raises(ConfigurationError):
            periodogram_cross(x, x, 1.0, segments=2, window="blackman")

    def test_periodogram_cross_sign_convention(self):
        """Qubit 2 leading qubit 1 by pi/4 reads as phase -pi/4 under the e^{+2 pi i f t} kernel"""
        dt, n = 1e-3, 4096
        t = np.arange(n) * dt
        f0 = 62.5
        a = np.sin(2.0 * np.pi * f0 * t)
        b = np.sin(2.0 * np.pi * f0 * t + np.pi / 4.0)
        est = periodogram_cross(a, b, dt, segments=4)
        peak = np.argmax(est.magnitude)
        assert est.frequencies[peak] == pytest.approx(f0)
        assert est.phase[peak] == pytest.approx(-np.pi / 4.0, abs=1e-6)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
