# commands/simulate_command.py

import logging

from commands.base_command import BaseCommand
from commands.synth_command import synthesize_for
from core.config import resolve_sequence
from core.ramsey import run_sequence
from storage.shots import write_shots
from storage.traces import read_traces

logger = logging.getLogger(__name__)


class SimulateCommand(BaseCommand):
    """Single-shot Ramsey records written as SSCS files, one per batch"""

    def validate(self, config=None, pairs=None, **kwargs):
        if config is None:
            return False, "No configuration given"
        if config.seed is None:
            return False, "A seed is required for simulation"
        return True, "OK"

    def load_noise(self, config) -> list:
        if config.trace_path:
            if config.analysis.batches > 1:
                logger.warning("[CMD] A single trace file was given; simulating one batch")
            return [read_traces(config.trace_path)]
        return synthesize_for(config)

    def execute(self, config=None, pairs=None, packed: bool = False, **kwargs):
        pairs = pairs if pairs is not None else self.load_noise(config)
        # one resolution for every batch so all records share tau and omega
        sequence = resolve_sequence(config, pairs[0])
        out = self.output_dir(config)
        result = {"pairs": pairs, "records": [], "sequence": sequence, "outputs": []}
        for batch, noise in enumerate(pairs):
            record = run_sequence(sequence, noise, batch=batch, workers=config.analysis.workers)
            result["records"].append(record)
            path = write_shots(out / f"shots_{batch:03d}.sscs", record, packed=packed)
            self.record_output(result, path, config, config.seed, {
                "batch": batch,
                "n_pairs": record.n_pairs,
                "tau_s": [sequence.qubit1.tau, sequence.qubit2.tau],
                "omega_rad_s": [sequence.qubit1.omega, sequence.qubit2.omega],
            })
        return result
