# commands/__init__.py

from .base_command import BaseCommand
from .synth_command import SynthCommand
from .simulate_command import SimulateCommand
from .analyze_command import AnalyzeCommand
from .pipeline_command import PipelineCommand
from .optimize_command import OptimizeCommand
from .alias_command import AliasCommand

__all__ = [
    'BaseCommand',
    'SynthCommand',
    'SimulateCommand',
    'AnalyzeCommand',
    'PipelineCommand',
    'OptimizeCommand',
    'AliasCommand',
]
