# commands/pipeline_command.py

import logging

from commands.analyze_command import AnalyzeCommand
from commands.base_command import BaseCommand
from commands.simulate_command import SimulateCommand
from commands.synth_command import SynthCommand
from core.noise import periodogram_cross
from core.spectrum import average_batches, log_bin
from storage.spectra import write_spectrum_csv

logger = logging.getLogger(__name__)

TRACE_PAIRS = {"cross_12": (1, 2), "auto_1": (1, 1), "auto_2": (2, 2)}


def periodogram_spectra(pairs: list, options) -> dict:
    """Batch-averaged, log-binned Welch spectra of the true traces"""
    wanted = [name for name in TRACE_PAIRS if name.split("_")[0] in options.outputs]
    spectra = {}
    for name in wanted:
        a, b = TRACE_PAIRS[name]
        per_batch = [
            log_bin(periodogram_cross(p.trace(a), p.trace(b), p.dt, options.periodogram_segments),
                    options.bins_per_decade)
            for p in pairs
        ]
        spectra[name] = average_batches(per_batch)
    return spectra


class PipelineCommand(BaseCommand):
    """synth -> simulate -> analyze, plus periodogram spectra of the true traces"""

    def validate(self, config=None, **kwargs):
        return SynthCommand().validate(config=config)

    def execute(self, config=None, **kwargs):
        synth = SynthCommand().run(config=config)
        if not synth["success"]:
            return {"success": False, "outputs": synth["outputs"], "error": synth["error"]}
        sim = SimulateCommand().run(config=config, pairs=synth["pairs"])
        if not sim["success"]:
            return {"success": False, "outputs": synth["outputs"] + sim["outputs"], "error": sim["error"]}
        analysis = AnalyzeCommand().run(config=config, records=sim["records"])
        outputs = synth["outputs"] + sim["outputs"] + analysis["outputs"]
        if not analysis["success"]:
            return {"success": False, "outputs": outputs, "error": analysis["error"]}

        result = {
            "outputs": outputs,
            "analysis": analysis["analysis"],
            "sequence": sim["sequence"],
            "flagged_fraction": analysis["flagged_fraction"],
            "flagged_exceeded": analysis["flagged_exceeded"],
        }
        out = self.output_dir(config)
        oracle = periodogram_spectra(synth["pairs"], config.analysis)
        for name, spec in oracle.items():
            path = write_spectrum_csv(out / f"periodogram_{name}.csv", spec)
            self.record_output(result, path, config, config.seed,
                               {"kind": spec.kind, "spectrum": name, "estimator": "periodogram"})
        result["periodogram"] = oracle
        return result
