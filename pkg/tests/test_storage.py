"""
Tests for trace, shot and spectrum files and their provenance sidecars
"""
import numpy as np
import pandas as pd
import pytest

from core import rng
from core.config import PipelineConfig, apply_overrides, config_hash
from core.errors import FormatError
from core.noise import NoiseTracePair
from core.ramsey import QubitParams, ShotRecord, SpamModel
from core.spectra import SpectrumEstimate
from storage import (
    export_shots_csv,
    export_traces_csv,
    import_shots_csv,
    import_traces_csv,
    read_shots,
    read_sidecar,
    read_spectrum_csv,
    read_traces,
    sidecar_config,
    write_shots,
    write_sidecar,
    write_spectrum_csv,
    write_traces,
)
from storage.traces import HEADER as TRACE_HEADER

SEED = 42


@pytest.fixture
def traces():
    gen = rng.stream(SEED, rng.TESTS, 40)
    return NoiseTracePair(gen.normal(size=64), gen.normal(size=64), 2.5e-4, seed=SEED)


@pytest.fixture
def record():
    gen = rng.stream(SEED, rng.TESTS, 41)
    n = 13
    outcomes = {(a, l): np.where(gen.random(n) < 0.5, 1, -1) for a in (1, 2) for l in ("XX", "XY")}
    qubits = (QubitParams(tau=1e-4, omega=7853.98, t2star=1.2e-4), QubitParams(tau=2e-4, omega=0.0))
    return ShotRecord(outcomes=outcomes, delta_t=1e-3, qubits=qubits,
                      spam=(SpamModel(0.05, 0.1), None), seed=SEED)


class TestTraceFiles:

    def test_round_trip(self, tmp_path, traces):
        path = write_traces(tmp_path / "noise.ssct", traces)
        back = read_traces(path)
        np.testing.assert_array_equal(back.delta_omega_1, traces.delta_omega_1)
        np.testing.assert_array_equal(back.delta_omega_2, traces.delta_omega_2)
        assert back.dt == traces.dt
        assert back.seed == SEED

    def test_unseeded_trace(self, tmp_path):
        path = write_traces(tmp_path / "zero.ssct", NoiseTracePair(np.zeros(4), np.zeros(4), 1.0))
        assert read_traces(path).seed is None

    def test_bad_magic(self, tmp_path, traces):
        path = write_traces(tmp_path / "noise.ssct", traces)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="magic"):
            read_traces(path)

    def test_unknown_version(self, tmp_path, traces):
        path = write_traces(tmp_path / "noise.ssct", traces)
        raw = bytearray(path.read_bytes())
        raw[4:6] = np.array([2], dtype="<u2").tobytes()
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="version"):
            read_traces(path)

    def test_truncated(self, tmp_path, traces):
        path = write_traces(tmp_path / "noise.ssct", traces)
        path.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(FormatError, match="payload"):
            read_traces(path)
        path.write_bytes(path.read_bytes()[: TRACE_HEADER.itemsize - 1])
        with pytest.raises(FormatError, match="header"):
            read_traces(path)

    def test_csv_round_trip(self, tmp_path, traces):
        path = export_traces_csv(tmp_path / "noise.csv", traces)
        back = import_traces_csv(path)
        assert back.dt == pytest.approx(traces.dt, rel=1e-9)
        np.testing.assert_allclose(back.delta_omega_1, traces.delta_omega_1, rtol=1e-12)

    def test_csv_needs_uniform_times(self, tmp_path):
        path = tmp_path / "bad.csv"
        pd.DataFrame({"t_s": [0.0, 1.0, 3.0], "delta_omega_1": [0.0] * 3,
                      "delta_omega_2": [0.0] * 3}).to_csv(path, index=False)
        with pytest.raises(FormatError):
            import_traces_csv(path)

    def test_csv_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        pd.DataFrame({"t_s": [0.0, 1.0]}).to_csv(path, index=False)
        with pytest.raises(FormatError, match="missing"):
            import_traces_csv(path)


class TestShotFiles:

    @pytest.mark.parametrize("packed", [False, True])
    def test_round_trip(self, tmp_path, record, packed):
        path = write_shots(tmp_path / "shots.sscs", record, packed=packed)
        back = read_shots(path)
        for key in record.outcomes:
            np.testing.assert_array_equal(back.stream(*key), record.stream(*key))
        assert back.delta_t == record.delta_t
        assert back.qubits == record.qubits
        assert back.spam == record.spam
        assert back.seed == SEED

    def test_packed_is_smaller(self, tmp_path, record):
        plain = write_shots(tmp_path / "plain.sscs", record)
        packed = write_shots(tmp_path / "packed.sscs", record, packed=True)
        assert packed.stat().st_size < plain.stat().st_size

    def test_truncated(self, tmp_path, record):
        path = write_shots(tmp_path / "shots.sscs", record)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(FormatError):
            read_shots(path)

    def test_csv_import_takes_evolution_times(self, tmp_path, record):
        path = export_shots_csv(tmp_path / "shots.csv", record)
        back = import_shots_csv(path, taus=(1e-4, 2e-4), omegas=(1.0, 2.0))
        assert back.delta_t == pytest.approx(record.delta_t)
        assert back.qubit(2).tau == 2e-4
        assert back.qubit(1).omega == 1.0
        assert back.spam == (None, None)
        np.testing.assert_array_equal(back.stream(2, "XY"), record.stream(2, "XY"))

    def test_csv_missing_columns(self, tmp_path):
        path = tmp_path / "shots.csv"
        pd.DataFrame({"n": [0], "q1_xx": [1]}).to_csv(path, index=False)
        with pytest.raises(FormatError):
            import_shots_csv(path, taus=(1e-4, 1e-4))


class TestSpectrumFiles:

    def test_binned_cross_round_trip(self, tmp_path):
        spec = SpectrumEstimate(frequencies=[1.0, 10.0, 100.0], values=[1 + 1j, 2 - 0.5j, 0.1j],
                                kind="cross", bin_counts=np.array([9, 90, 1]), stderr=np.array([0.1, 0.2, 0.3]))
        path = write_spectrum_csv(tmp_path / "cross.csv", spec)
        back = read_spectrum_csv(path)
        assert back.kind == "cross"
        np.testing.assert_allclose(back.values, spec.values)
        np.testing.assert_array_equal(back.bin_counts, [9, 90, 1])
        np.testing.assert_allclose(back.stderr, spec.stderr)

    def test_unbinned_columns(self, tmp_path):
        spec = SpectrumEstimate(frequencies=[1.0, 2.0], values=[3.0, -4.0], kind="auto")
        path = write_spectrum_csv(tmp_path / "auto.csv", spec)
        df = pd.read_csv(path)
        assert list(df.columns) == ["f_Hz", "re", "im", "abs", "phase_rad", "bin_count", "stderr"]
        assert df["bin_count"].isna().all()
        back = read_spectrum_csv(path)
        assert back.kind == "auto"
        assert back.bin_counts is None and back.stderr is None
        np.testing.assert_allclose(back.phase, [0.0, np.pi])

    def test_kind_from_sidecar(self, tmp_path):
        spec = SpectrumEstimate(frequencies=[1.0, 2.0], values=[3.0, 4.0], kind="cross")
        path = write_spectrum_csv(tmp_path / "real_cross.csv", spec)
        assert read_spectrum_csv(path).kind == "auto"
        write_sidecar(path, extra={"kind": "cross"})
        assert read_spectrum_csv(path).kind == "cross"
        assert read_spectrum_csv(path, kind="auto").kind == "auto"

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        pd.DataFrame({"f_Hz": [1.0], "re": [1.0]}).to_csv(path, index=False)
        with pytest.raises(FormatError):
            read_spectrum_csv(path)


class TestProvenance:

    def test_sidecar_content(self, tmp_path):
        config = PipelineConfig(seed=SEED)
        target = tmp_path / "spectrum_cross.csv"
        target.write_text("f_Hz\n", encoding="utf-8")
        sidecar = write_sidecar(target, config=config, seed=SEED, extra={"kind": "cross"})
        assert sidecar.name == "spectrum_cross.csv.json"
        data = read_sidecar(target)
        assert data["file"] == "spectrum_cross.csv"
        assert data["config_hash"] == config_hash(config)
        assert data["seed"] == SEED
        assert {"python", "numpy", "scipy", "pandas", "toolkit"} <= set(data["versions"])

    def test_sidecar_reproduces_config(self, tmp_path):
        config = apply_overrides(PipelineConfig(seed=SEED), {
            "spec": {"11": {"I": 1e6}, "22": {"I": 1e6}, "12": {"J": 5e5, "t_c": 0.02}},
            "sequence.qubit1.p_e": 0.15,
            "analysis.batches": 4,
            "analysis.taper": "none",
            "tone": {"frequency": 50.0, "amplitude": 10.0},
        })
        target = tmp_path / "spectrum_auto_1.csv"
        write_sidecar(target, config=config, seed=SEED)
        assert read_sidecar(target)["config"]["analysis"]["batches"] == 4
        restored = sidecar_config(target)
        assert restored == config
        assert config_hash(restored) == read_sidecar(target)["config_hash"]

    def test_sidecar_without_config(self, tmp_path):
        write_sidecar(tmp_path / "c.csv", seed=SEED)
        assert sidecar_config(tmp_path / "c.csv") is None

    def test_identical_runs_give_identical_sidecars(self, tmp_path):
        config = PipelineConfig(seed=SEED)
        first = write_sidecar(tmp_path / "a.csv", config=config, seed=SEED).read_text()
        second = write_sidecar(tmp_path / "a.csv", config=config, seed=SEED).read_text()
        assert first == second

    def test_numpy_values_serialize(self, tmp_path):
        write_sidecar(tmp_path / "b.csv", extra={"flagged": np.float64(0.25), "lags": np.arange(3)})
        data = read_sidecar(tmp_path / "b.csv")
        assert data["flagged"] == 0.25
        assert data["lags"] == [0, 1, 2]
        assert data["config_hash"] is None


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
