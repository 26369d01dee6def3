# commands/alias_command.py

import logging
from pathlib import Path

from commands.base_command import BaseCommand
from core.aliasing import alias_curves, exp_kernel_spectrum, nyquist_bound_check

logger = logging.getLogger(__name__)


class AliasCommand(BaseCommand):
    """Folded exponential-kernel spectra on [0, f_N] as CSV, with the Nyquist check"""

    def __init__(self):
        super().__init__()
        self.command_name = "alias-demo"

    def validate(self, t0=1.0, dt=0.01, n_points=200, **kwargs):
        if not (t0 > 0 and dt > 0):
            return False, "t0 and dt must be positive"
        if n_points < 2:
            return False, "n_points must be at least 2"
        return True, "OK"

    def execute(self, t0=1.0, dt=0.01, n_points=200, output="alias_curves.csv", n_terms=10_000, **kwargs):
        curves = alias_curves(t0, dt, n_points)
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        curves.to_csv(path, index=False, lineterminator="\n")
        report = nyquist_bound_check(exp_kernel_spectrum(t0), 1.0 / (2.0 * dt), n_terms)
        result = {"curves": curves, "report": report, "outputs": []}
        self.record_output(result, path, extra={"t0": t0, "dt": dt, "n_points": n_points, "nyquist": report})
        return result
