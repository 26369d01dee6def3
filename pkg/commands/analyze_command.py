# commands/analyze_command.py

import logging
from pathlib import Path

from commands.base_command import BaseCommand
from core.analysis import analyze_batches
from core.errors import ConfigurationError
from storage.shots import import_shots_csv, read_shots
from storage.spectra import write_spectrum_csv

logger = logging.getLogger(__name__)

METADATA_KEYS = ("estimator", "prefactor", "n_lags", "batches", "flagged_fraction", "filled_lags",
                 "lag0_floor", "lag0_raw_offset", "hermitian_residual", "bins_per_decade", "taper")


def load_record(path, config):
    """SSCS file, or an external CSV whose tau/omega come from the config's qubit settings"""
    if str(path).lower().endswith(".csv"):
        seq = config.sequence
        taus = (seq.qubit1.tau, seq.qubit2.tau)
        if None in taus:
            raise ConfigurationError(f"{path}: CSV shots need tau for both qubits (--tau1/--tau2)")
        omegas = (seq.qubit1.omega or 0.0, seq.qubit2.omega or 0.0)
        return import_shots_csv(path, taus, omegas)
    return read_shots(path)


def write_spectra(command: BaseCommand, result: dict, analysis, config, prefix: str = ""):
    """Binned spectra as <name>.csv and linear-grid spectra as <name>_linear.csv.

    Spectra over the flagged-lag threshold are not written.
    """
    out = command.output_dir(config)
    for name in analysis.rejected:
        logger.error(f"[CMD] {name}: {analysis.flagged[name]:.1%} of lags flagged; no output written")
    for name, spec in analysis.accepted().items():
        for suffix, data in (("", spec), ("_linear", analysis.raw[name])):
            path = write_spectrum_csv(out / f"{prefix}{name}{suffix}.csv", data)
            extra = {"kind": data.kind, "spectrum": name}
            extra.update({k: data.metadata[k] for k in METADATA_KEYS if k in data.metadata})
            command.record_output(result, path, config, config.seed, extra)


class AnalyzeCommand(BaseCommand):
    """Shot records -> batch-averaged cross/auto spectra (CSV)"""

    def validate(self, config=None, records=None, **kwargs):
        if config is None:
            return False, "No configuration given"
        if records is None:
            if not config.shot_paths:
                return False, "No shot files given"
            missing = [p for p in config.shot_paths if not Path(p).exists()]
            if missing:
                return False, f"Shot files not found: {', '.join(missing)}"
        return True, "OK"

    def execute(self, config=None, records=None, **kwargs):
        if records is None:
            records = [load_record(p, config) for p in config.shot_paths]
        analysis = analyze_batches(records, config.analysis)
        result = {"analysis": analysis, "outputs": []}
        write_spectra(self, result, analysis, config)

        threshold = config.analysis.flagged_threshold
        result["flagged_fraction"] = analysis.flagged_fraction
        result["flagged_exceeded"] = analysis.flagged_fraction > threshold
        result["rejected"] = analysis.rejected
        if result["flagged_exceeded"]:
            logger.warning(f"[CMD] Flagged-lag fraction {analysis.flagged_fraction:.1%} exceeds {threshold:.0%}")
        return result
