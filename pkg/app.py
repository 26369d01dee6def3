import argparse
import json
import logging
import sys

from core import settings
from core.config import resolve_config
from core.errors import SSCSError
from commands import (
    AliasCommand,
    AnalyzeCommand,
    OptimizeCommand,
    PipelineCommand,
    SimulateCommand,
    SynthCommand,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_FLAGGED = 3

REFERENCE_HELP = (
    "Spectral model JSON. Default: the reference mixture with I = 9.99e6 Hz^2, J = 1e6 Hz^2/Hz and "
    "t_c solved for a 10 Hz sign flip of C_12. Note I = 9.99e6, not 1e11: with J = 1e6 no t_c puts "
    "the flip at 10 Hz once I >= 1e7"
)

# flag dest -> dotted PipelineConfig key
OVERRIDES = {
    "seed": "seed",
    "output_dir": "output_dir",
    "spec": "spec_path",
    "trace": "trace_path",
    "n_pairs": "sequence.n_pairs",
    "delta_t": "sequence.delta_t",
    "substeps": "sequence.substeps",
    "trace_oversample": "sequence.trace_oversample",
    "tau_rule": "sequence.tau_rule",
    "frequency_mode": "sequence.frequency_mode",
    "m": "sequence.m",
    "l": "sequence.l",
    "tau_scale": "sequence.tau_scale",
    "tau1": "sequence.qubit1.tau",
    "tau2": "sequence.qubit2.tau",
    "omega1": "sequence.qubit1.omega",
    "omega2": "sequence.qubit2.omega",
    "p_e1": "sequence.qubit1.p_e",
    "p_e2": "sequence.qubit2.p_e",
    "p_b1": "sequence.qubit1.p_b",
    "p_b2": "sequence.qubit2.p_b",
    "max_lag": "analysis.max_lag",
    "bins_per_decade": "analysis.bins_per_decade",
    "prefactor": "analysis.prefactor",
    "batches": "analysis.batches",
    "fit_lags": "analysis.fit_lags",
    "ratio_floor": "analysis.ratio_floor",
    "estimator": "analysis.estimator",
    "auto_method": "analysis.auto_method",
    "flagged_threshold": "analysis.flagged_threshold",
    "lag_smoothing": "analysis.lag_smoothing",
    "taper": "analysis.taper",
    "workers": "analysis.workers",
}


def _add_common(parser):
    parser.add_argument("--config", help="JSON pipeline configuration")
    parser.add_argument("--output-dir", dest="output_dir", help="Directory for output files")
    parser.add_argument("--seed", type=int, help="Root seed")
    parser.add_argument("--workers", type=int, help="Threads used for batches")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")


def _add_sequence(parser):
    parser.add_argument("--spec", help=REFERENCE_HELP)
    parser.add_argument("--n-pairs", dest="n_pairs", type=int)
    parser.add_argument("--delta-t", dest="delta_t", type=float, help="Subsequence period in seconds")
    parser.add_argument("--substeps", type=int, help="Noise sub-samples averaged per shot")
    parser.add_argument("--trace-oversample", dest="trace_oversample", type=int)
    parser.add_argument("--tau-rule", dest="tau_rule", choices=["optimal", "t2star"])
    parser.add_argument("--frequency-mode", dest="frequency_mode",
                        choices=["cross", "auto_short", "auto_long", "joint"])
    parser.add_argument("--m", type=int)
    parser.add_argument("--l", type=int)
    parser.add_argument("--tau-scale", dest="tau_scale", type=float,
                        help="Multiplier on the tau chosen by --tau-rule (e.g. 3 for tau = 3 T2*)")
    parser.add_argument("--omega1", type=float)
    parser.add_argument("--omega2", type=float)
    parser.add_argument("--p-e1", dest="p_e1", type=float)
    parser.add_argument("--p-e2", dest="p_e2", type=float)
    parser.add_argument("--p-b1", dest="p_b1", type=float)
    parser.add_argument("--p-b2", dest="p_b2", type=float)
    parser.add_argument("--batches", type=int)


def _add_taus(parser):
    parser.add_argument("--tau1", type=float, help="Evolution time of qubit 1 (s)")
    parser.add_argument("--tau2", type=float, help="Evolution time of qubit 2 (s)")


def _add_analysis(parser):
    parser.add_argument("--max-lag", dest="max_lag", type=int, help="Largest lag index (default N // 32)")
    parser.add_argument("--bins-per-decade", dest="bins_per_decade", type=int)
    parser.add_argument("--prefactor", choices=["quasi_static", "generalized"])
    parser.add_argument("--fit-lags", dest="fit_lags", type=int)
    parser.add_argument("--ratio-floor", dest="ratio_floor", type=float)
    parser.add_argument("--estimator", choices=["averaged", "U1", "U2"])
    parser.add_argument("--auto-method", dest="auto_method", choices=["W", "U"])
    parser.add_argument("--flagged-threshold", dest="flagged_threshold", type=float)
    parser.add_argument("--lag-smoothing", dest="lag_smoothing", type=float,
                        help="Relative width of the lag smoothing window, 0 to disable")
    parser.add_argument("--taper", choices=["none", "hann"], help="Lag window before the transform")


def _parse_args(argv=None):
    parser = argparse.ArgumentParser(prog="sscs", description="Single-shot cross-spectroscopy toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Synthesize correlated noise traces")
    _add_common(synth)
    _add_sequence(synth)
    _add_taus(synth)

    simulate = sub.add_parser("simulate", help="Simulate single-shot Ramsey records")
    _add_common(simulate)
    _add_sequence(simulate)
    _add_taus(simulate)
    simulate.add_argument("--trace", help="SSCT trace file to use instead of synthesizing")
    simulate.add_argument("--packed", action="store_true", help="Bit-pack the shot payload")

    analyze = sub.add_parser("analyze", help="Estimate spectra from shot files")
    _add_common(analyze)
    _add_analysis(analyze)
    _add_taus(analyze)
    analyze.add_argument("--omega1", type=float)
    analyze.add_argument("--omega2", type=float)
    analyze.add_argument("shots", nargs="*", help="SSCS or CSV shot files, one per batch")

    pipeline = sub.add_parser("pipeline", help="synth, simulate and analyze in one run")
    _add_common(pipeline)
    _add_sequence(pipeline)
    _add_taus(pipeline)
    _add_analysis(pipeline)

    optimize = sub.add_parser("optimize", help="Print an optimal parameter card")
    optimize.add_argument("t2star", nargs=2, type=float, help="T2* of qubits 1 and 2 (s)")
    optimize.add_argument("--mode", default="cross", choices=["cross", "auto_short", "auto_long", "joint"])
    optimize.add_argument("--m", type=int, default=0)
    optimize.add_argument("--l", type=int, default=0)
    optimize.add_argument("--tau-rule", dest="tau_rule", default="optimal", choices=["optimal", "t2star"])
    optimize.add_argument("--threshold", type=float, default=0.2)
    optimize.add_argument("--output", help="Also write the card to this JSON file")
    optimize.add_argument("-v", "--verbose", action="store_true")

    alias = sub.add_parser("alias-demo", help="Folded exponential-kernel spectra as CSV")
    alias.add_argument("--t0", type=float, default=1.0)
    alias.add_argument("--dt", type=float, default=0.01)
    alias.add_argument("--n-points", dest="n_points", type=int, default=200)
    alias.add_argument("--n-terms", dest="n_terms", type=int, default=10_000)
    alias.add_argument("--output", default=None, help="CSV path (default: <output dir>/alias_curves.csv)")
    alias.add_argument("-v", "--verbose", action="store_true")

    return parser.parse_args(argv)


def _configure_logging(verbose: bool):
    level = logging.DEBUG if verbose else settings.get_log_level()
    logging.basicConfig(level=level, format="%(asctime)s - %(levelname)s - %(message)s")


def check_settings() -> bool:
    """Log the SSCS_* settings in effect and warn about values that will be ignored"""
    active = settings.get_all_settings()
    if active:
        logger.info(f"[CMD] Environment settings: {active}")
    ok, problems = settings.validate_settings()
    for problem in problems:
        logger.warning(f"[CMD] Ignoring setting: {problem}")
    return ok


def build_config(args):
    """--config file, then SSCS_OUTPUT_DIR, then individual flags"""
    overrides = {}
    for dest, key in OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "shots", None):
        overrides["shot_paths"] = list(args.shots)
    if "analysis.workers" not in overrides and getattr(args, "config", None) is None:
        overrides["analysis.workers"] = settings.get_workers()
    return resolve_config(getattr(args, "config", None), overrides)


def _exit_code(result: dict) -> int:
    if not result.get("success"):
        print(f"Error: {result.get('error')}", file=sys.stderr)
        return EXIT_FAILURE
    for path in result.get("outputs", []):
        print(path)
    if result.get("flagged_exceeded"):
        return EXIT_FLAGGED
    return EXIT_OK


def main(argv=None) -> int:
    args = _parse_args(argv)
    _configure_logging(args.verbose)
    check_settings()

    if args.command == "optimize":
        result = OptimizeCommand().run(t2stars=args.t2star, mode=args.mode, m=args.m, l=args.l,
                                       tau_rule=args.tau_rule, threshold=args.threshold, output=args.output)
        if result.get("success"):
            print(json.dumps(result["card"], indent=2, sort_keys=True))
            return EXIT_OK
        return _exit_code(result)

    if args.command == "alias-demo":
        output = args.output
        if output is None:
            output = f"{settings.get_output_dir('output')}/alias_curves.csv"
        result = AliasCommand().run(t0=args.t0, dt=args.dt, n_points=args.n_points, n_terms=args.n_terms,
                                    output=output)
        return _exit_code(result)

    try:
        config = build_config(args)
    except SSCSError as e:
        logger.error(f"[CMD] Bad configuration: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILURE

    commands = {
        "synth": SynthCommand,
        "simulate": SimulateCommand,
        "analyze": AnalyzeCommand,
        "pipeline": PipelineCommand,
    }
    kwargs = {"config": config}
    if args.command == "simulate":
        kwargs["packed"] = args.packed
    result = commands[args.command]().run(**kwargs)
    return _exit_code(result)


if __name__ == "__main__":
    raise SystemExit(main())
