# commands/synth_command.py

import logging

from commands.base_command import BaseCommand
from core.config import build_spec, trace_length, trace_step
from core.noise import inject_tone, synthesize_batches
from core.spectra import validate_spec
from storage.traces import write_traces

logger = logging.getLogger(__name__)


def synthesize_for(config) -> list:
    """Trace pairs for every batch of the config, tone included"""
    spec = build_spec(config)
    n, dt = trace_length(config), trace_step(config)
    pairs = synthesize_batches(spec, n, dt, config.seed, config.analysis.batches, config.analysis.workers)
    tone = config.tone
    if tone is not None and tone.amplitude:
        pairs = [inject_tone(p, tone.frequency, tone.amplitude, tone.phase, tone.qubits) for p in pairs]
    return pairs


class SynthCommand(BaseCommand):
    """Correlated noise traces written as SSCT files, one per batch"""

    def validate(self, config=None, **kwargs):
        if config is None:
            return False, "No configuration given"
        if config.seed is None:
            return False, "A seed is required for synthesis"
        return True, "OK"

    def execute(self, config=None, **kwargs):
        pairs = synthesize_for(config)
        spec = build_spec(config)
        n, dt = pairs[0].n, pairs[0].dt
        report = validate_spec(spec, (1.0 / (n * dt), 1.0 / (2.0 * dt)))
        out = self.output_dir(config)
        result = {"pairs": pairs, "outputs": []}
        for batch, pair in enumerate(pairs):
            path = write_traces(out / f"traces_{batch:03d}.ssct", pair)
            self.record_output(result, path, config, config.seed,
                               {"batch": batch, "n": n, "dt": dt, "max_coherence": report["max_coherence"]})
        logger.info(f"[CMD] Synthesized {len(pairs)} trace pair(s) of {n} samples")
        return result
