# core/__init__.py

from .errors import (
    SSCSError,
    InvalidSpecError,
    DomainError,
    ConfigurationError,
    InsufficientDataError,
    FlaggedLagsError,
    GridMismatchError,
    FormatError,
    InfeasibleSettingError,
)
from .spectra import (
    PsdComponentParams,
    PsdSpec,
    TabulatedSpectrum,
    SpectrumEstimate,
    eval_psd,
    spectral_matrix,
    validate_spec,
    crossing_frequencies,
    solve_correlation_time,
    reference_spec,
    lorentzian_spec,
    one_over_f_spec,
    load_spec,
    save_spec,
)
from .noise import NoiseTracePair, synthesize, synthesize_batches, inject_tone, coherence_time, periodogram_cross
from .ramsey import QubitParams, SpamModel, SequenceConfig, ShotRecord, expectation, sample_shot, run_sequence
from .correlators import (
    CorrelatorChannel,
    CorrelatorSet,
    estimate_means,
    estimate_correlators,
    smooth_correlators,
    analytic_correlator,
    model_correlator_set,
)
from .combinations import LogCombination, compute_U, compute_W, extend_negative_time, extrapolate_lag0
from .spectrum import prefactor, spectrum_from_U, spectrum_from_W, log_bin, average_batches
from .optimal import (
    VisibilityPoint,
    g_averaged,
    visibility,
    optimize_evolution_times,
    suggest_frequencies,
    cosine_factors,
    parameter_card,
)
from .aliasing import (
    FoldingConfig,
    fold_spectrum,
    exp_kernel_spectrum,
    exp_kernel_closed_forms,
    kernel_spectrum,
    nyquist_bound_check,
    alias_curves,
)
from .config import PipelineConfig, AnalysisOptions, load_config, resolve_config, config_hash
from .analysis import BatchAnalysis, analyze_record, combine_batches, analyze_batches

__version__ = "0.3.0"

__all__ = [
    'SSCSError',
    'InvalidSpecError',
    'DomainError',
    'ConfigurationError',
    'InsufficientDataError',
    'FlaggedLagsError',
    'GridMismatchError',
    'FormatError',
    'InfeasibleSettingError',
    'PsdComponentParams',
    'PsdSpec',
    'TabulatedSpectrum',
    'SpectrumEstimate',
    'eval_psd',
    'spectral_matrix',
    'validate_spec',
    'crossing_frequencies',
    'solve_correlation_time',
    'reference_spec',
    'lorentzian_spec',
    'one_over_f_spec',
    'load_spec',
    'save_spec',
    'NoiseTracePair',
    'synthesize',
    'synthesize_batches',
    'inject_tone',
    'coherence_time',
    'periodogram_cross',
    'QubitParams',
    'SpamModel',
    'SequenceConfig',
    'ShotRecord',
    'expectation',
    'sample_shot',
    'run_sequence',
    'CorrelatorChannel',
    'CorrelatorSet',
    'estimate_means',
    'estimate_correlators',
    'smooth_correlators',
    'analytic_correlator',
    'model_correlator_set',
    'LogCombination',
    'compute_U',
    'compute_W',
    'extend_negative_time',
    'extrapolate_lag0',
    'prefactor',
    'spectrum_from_U',
    'spectrum_from_W',
    'log_bin',
    'average_batches',
    'VisibilityPoint',
    'g_averaged',
    'visibility',
    'optimize_evolution_times',
    'suggest_frequencies',
    'cosine_factors',
    'parameter_card',
    'FoldingConfig',
    'fold_spectrum',
    'exp_kernel_spectrum',
    'exp_kernel_closed_forms',
    'kernel_spectrum',
    'nyquist_bound_check',
    'alias_curves',
    'PipelineConfig',
    'AnalysisOptions',
    'load_config',
    'resolve_config',
    'config_hash',
    'BatchAnalysis',
    'analyze_record',
    'combine_batches',
    'analyze_batches',
]
