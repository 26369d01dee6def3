# commands/optimize_command.py

import json
import logging
from pathlib import Path

from commands.base_command import BaseCommand
from core.errors import InfeasibleSettingError
from core.optimal import FREQUENCY_MODES, TAU_RULES, parameter_card

logger = logging.getLogger(__name__)


class OptimizeCommand(BaseCommand):
    """Parameter card (tau, omega, factors) for given T2* values"""

    def validate(self, t2stars=None, mode="cross", tau_rule="optimal", **kwargs):
        if not t2stars or len(t2stars) != 2:
            return False, "Two T2* values are required"
        if any(not t > 0 for t in t2stars):
            return False, "T2* values must be positive"
        if mode not in FREQUENCY_MODES:
            return False, f"Unknown mode '{mode}'"
        if tau_rule not in TAU_RULES:
            return False, f"Unknown tau rule '{tau_rule}'"
        return True, "OK"

    def execute(self, t2stars=None, mode="cross", m=0, l=0, tau_rule="optimal", threshold=0.2,
                output=None, **kwargs):
        try:
            card = parameter_card(t2stars[0], t2stars[1], mode, m, l, tau_rule, threshold)
        except InfeasibleSettingError as e:
            return {"success": False, "outputs": [], "error": str(e), "best": e.best}
        result = {"card": card, "outputs": []}
        if output:
            path = Path(output)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(card, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            self.record_output(result, path, extra={"kind": "parameter_card"})
        return result
