# core/config.py

"""
Pipeline configuration: dataclasses, JSON loading, CLI overrides and hashing.

Precedence, lowest first: dataclass defaults, the JSON file, SSCS_OUTPUT_DIR
(output directory only), then explicit overrides.
"""
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from core import settings
from core.errors import ConfigurationError
from core.noise import NoiseTracePair, coherence_time
from core.optimal import FREQUENCY_MODES, TAU_RULES, optimize_evolution_times, suggest_frequencies
from core.ramsey import QubitParams, SequenceConfig, SpamModel
from core.spectra import PsdComponentParams, PsdSpec, load_spec, reference_spec
from core.combinations import RATIO_FLOOR
from core.spectrum import ESTIMATORS, PREFACTOR_MODES, TAPERS

logger = logging.getLogger(__name__)

AUTO_METHODS = ("W", "U")
OUTPUT_KINDS = ("cross", "auto")
# default lag range N // LAG_DIVISOR, never below MIN_LAGS
LAG_DIVISOR = 32
MIN_LAGS = 64


@dataclass
class QubitSetting:
    """Unset tau, omega or t2star are resolved from the noise and the sequence rules"""

    tau: float = None
    omega: float = None
    t2star: float = None
    p_e: float = 0.0
    p_b: float = 0.0


@dataclass
class SequenceSettings:
    delta_t: float = 250e-6
    n_pairs: int = 2**14
    substeps: int = 1
    trace_oversample: int = 1
    tau_rule: str = "t2star"
    frequency_mode: str = "cross"
    m: int = 0
    l: int = 0
    threshold: float = 0.2
    tau_scale: float = 1.0
    qubit1: QubitSetting = field(default_factory=QubitSetting)
    qubit2: QubitSetting = field(default_factory=QubitSetting)

    def qubit(self, alpha: int) -> QubitSetting:
        return {1: self.qubit1, 2: self.qubit2}[alpha]


@dataclass
class AnalysisOptions:
    max_lag: int = None
    bins_per_decade: int = 10
    prefactor: str = "quasi_static"
    batches: int = 1
    fit_lags: int = 8
    ratio_floor: float = RATIO_FLOOR
    jackknife_blocks: int = 8
    flagged_threshold: float = 0.2
    auto_method: str = "W"
    estimator: str = "averaged"
    correlator_method: str = "fft"
    outputs: list = field(default_factory=lambda: list(OUTPUT_KINDS))
    workers: int = 1
    periodogram_segments: int = 16
    lag_smoothing: float = 0.1
    taper: str = "hann"
    bias_correction: bool = True


@dataclass
class ToneConfig:
    frequency: float = 50.0
    amplitude: float = 0.0
    phase: float = 0.0
    qubits: list = field(default_factory=lambda: [1, 2])


@dataclass
class PipelineConfig:
    seed: int = None
    output_dir: str = "output"
    spec: dict = None
    spec_path: str = None
    trace_path: str = None
    shot_paths: list = field(default_factory=list)
    sequence: SequenceSettings = field(default_factory=SequenceSettings)
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    tone: ToneConfig = None


NESTED = {
    "sequence": SequenceSettings,
    "analysis": AnalysisOptions,
    "tone": ToneConfig,
    "qubit1": QubitSetting,
    "qubit2": QubitSetting,
}


def _build(cls, data: dict):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{cls.__name__} expects an object, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"Unknown {cls.__name__} keys: {unknown}")
    kwargs = {}
    for key, value in data.items():
        if key in NESTED and value is not None:
            value = _build(NESTED[key], value)
        kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> PipelineConfig:
    config = _build(PipelineConfig, data)
    check_config(config)
    return config


def config_to_dict(config: PipelineConfig) -> dict:
    return asdict(config)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Config {path} is not valid JSON: {e}") from e
    logger.info(f"[CMD] Loaded config from {path}")
    return config_from_dict(data)


def apply_overrides(config: PipelineConfig, overrides: dict) -> PipelineConfig:
    """New config with dotted-key overrides applied, e.g. {"analysis.batches": 4}; None values are skipped"""
    data = config_to_dict(config)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        target = data
        parts = key.split(".")
        for part in parts[:-1]:
            if target.get(part) is None:
                target[part] = {}
            target = target[part]
        target[parts[-1]] = value
    return config_from_dict(data)


def resolve_config(path=None, overrides: dict = None) -> PipelineConfig:
    """Defaults, then the file, then SSCS_OUTPUT_DIR, then overrides"""
    config = load_config(path) if path else PipelineConfig()
    env_dir = settings.get_output_dir()
    if env_dir:
        config.output_dir = env_dir
    return apply_overrides(config, overrides)


def config_hash(config: PipelineConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def check_config(config: PipelineConfig):
    seq, opts = config.sequence, config.analysis
    if seq.tau_rule not in TAU_RULES:
        raise ConfigurationError(f"tau_rule must be one of {TAU_RULES}, got '{seq.tau_rule}'")
    if seq.frequency_mode not in FREQUENCY_MODES:
        raise ConfigurationError(f"frequency_mode must be one of {FREQUENCY_MODES}, got '{seq.frequency_mode}'")
    if seq.trace_oversample < 1 or seq.substeps < 1:
        raise ConfigurationError("trace_oversample and substeps must be >= 1")
    if opts.prefactor not in PREFACTOR_MODES:
        raise ConfigurationError(f"prefactor must be one of {PREFACTOR_MODES}, got '{opts.prefactor}'")
    if opts.estimator not in ESTIMATORS:
        raise ConfigurationError(f"estimator must be one of {ESTIMATORS}, got '{opts.estimator}'")
    if opts.auto_method not in AUTO_METHODS:
        raise ConfigurationError(f"auto_method must be one of {AUTO_METHODS}, got '{opts.auto_method}'")
    if not set(opts.outputs) <= set(OUTPUT_KINDS) or not opts.outputs:
        raise ConfigurationError(f"outputs must be a non-empty subset of {OUTPUT_KINDS}")
    if opts.batches < 1 or opts.workers < 1:
        raise ConfigurationError("batches and workers must be >= 1")
    if not 0.0 <= opts.flagged_threshold <= 1.0:
        raise ConfigurationError(f"flagged_threshold must lie in [0, 1], got {opts.flagged_threshold}")
    if opts.taper not in TAPERS:
        raise ConfigurationError(f"taper must be one of {TAPERS}, got '{opts.taper}'")
    if not 0.0 <= opts.lag_smoothing <= 1.0:
        raise ConfigurationError(f"lag_smoothing must lie in [0, 1], got {opts.lag_smoothing}")
    if opts.ratio_floor < 0:
        raise ConfigurationError(f"ratio_floor must be >= 0, got {opts.ratio_floor}")
    if opts.max_lag is not None and opts.max_lag < 1:
        raise ConfigurationError(f"max_lag must be >= 1 when given, got {opts.max_lag}")
    if not seq.tau_scale > 0:
        raise ConfigurationError(f"tau_scale must be positive, got {seq.tau_scale}")


def build_spec(config: PipelineConfig) -> PsdSpec:
    """Spectral model from spec_path, an inline spec, or the reference mixture"""
    if config.spec_path:
        return load_spec(config.spec_path)
    spec = config.spec
    if spec is None:
        return reference_spec()
    if "reference" in spec:
        return reference_spec(**spec["reference"])
    if spec.get("zero"):
        zero = PsdComponentParams()
        return PsdSpec(entries={(1, 1): zero, (2, 2): zero, (1, 2): zero})
    return PsdSpec.from_dict(spec)


def trace_step(config: PipelineConfig) -> float:
    return config.sequence.delta_t / config.sequence.trace_oversample


def trace_length(config: PipelineConfig) -> int:
    """Power-of-two sample count covering every slot of the sequence"""
    seq = config.sequence
    needed = (2 * seq.n_pairs - 1) * seq.trace_oversample + 1
    if seq.substeps > 1:
        taus = [q.tau for q in (seq.qubit1, seq.qubit2) if q.tau is not None]
        needed += int(np.ceil(max(taus, default=seq.delta_t) / trace_step(config)))
    return int(2 ** int(np.ceil(np.log2(needed))))


def _t2star(setting: QubitSetting, noise: NoiseTracePair, alpha: int):
    if setting.t2star is not None:
        return setting.t2star
    trace = noise.trace(alpha)
    if not np.any(trace):
        return None
    return coherence_time(trace)


def resolve_sequence(config: PipelineConfig, noise: NoiseTracePair) -> SequenceConfig:
    """SequenceConfig with evolution times and detunings filled in.

    Unset T2* is measured from the trace; unset tau follows tau_rule times
    tau_scale; unset omegas follow frequency_mode.
    """
    seq = config.sequence
    if config.seed is None:
        raise ConfigurationError("A seed is required to simulate shots")

    t2stars, taus = [], []
    for alpha in (1, 2):
        setting = seq.qubit(alpha)
        t2 = _t2star(setting, noise, alpha)
        if setting.tau is not None:
            tau = setting.tau
        elif t2 is None:
            raise ConfigurationError(f"Qubit {alpha}: cannot choose tau without T2* (noise trace is zero)")
        elif seq.tau_rule == "optimal":
            tau = seq.tau_scale * optimize_evolution_times(t2, t2)[0]
        else:
            tau = seq.tau_scale * t2
        t2stars.append(t2)
        taus.append(float(tau))

    omegas = [seq.qubit1.omega, seq.qubit2.omega]
    if None in omegas:
        suggested = suggest_frequencies(seq.frequency_mode, taus[0], taus[1], seq.m, seq.l, seq.threshold)
        omegas = [suggested[i] if omegas[i] is None else omegas[i] for i in range(2)]

    logger.info(f"[CMD] Sequence: tau={taus}, omega={omegas}, T2*={t2stars}")
    return SequenceConfig(
        qubit1=QubitParams(tau=taus[0], omega=float(omegas[0]), t2star=t2stars[0]),
        qubit2=QubitParams(tau=taus[1], omega=float(omegas[1]), t2star=t2stars[1]),
        delta_t=seq.delta_t,
        n_pairs=seq.n_pairs,
        spam1=SpamModel(seq.qubit1.p_e, seq.qubit1.p_b),
        spam2=SpamModel(seq.qubit2.p_e, seq.qubit2.p_b),
        seed=config.seed,
        quasi_static_substeps=seq.substeps,
    )


def lag_limit(options: AnalysisOptions, n_pairs: int) -> int:
    """options.max_lag, or N // LAG_DIVISOR (at least MIN_LAGS) capped at N - 1"""
    if options.max_lag is not None:
        return int(options.max_lag)
    return min(n_pairs - 1, max(MIN_LAGS, n_pairs // LAG_DIVISOR))
