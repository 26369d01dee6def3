# core/combinations.py

"""
Log-combinations of correlators.

    U1 = log[(Q_XX,XX + Q_XY,XY) / (Q_XX,XX - Q_XY,XY)]    even lags 2k dt
    U2 = log[(Q_XY,XX - Q_XX,XY) / (Q_XY,XX + Q_XX,XY)]    odd lags (2k+1) dt
    W  = log[Q_XX,XX + Q_XY,XY]                            even lags, same qubit

Logs are taken of real arguments as ln|r| + i pi [r < 0], so every imaginary
part is exactly 0 or pi. Up to an additive constant, U equals
tau_a tau_b <dw_a(t') dw_b(t'+t)>.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from core.correlators import CorrelatorSet
from core.errors import ConfigurationError, FlaggedLagsError, InsufficientDataError

logger = logging.getLogger(__name__)

KINDS = ("U1", "U2", "W")
RATIO_FLOOR = 2.0


@dataclass
class LogCombination:
    kind: str
    times: np.ndarray
    values: np.ndarray
    pair: tuple
    delta_t: float
    taus: tuple
    flagged: np.ndarray = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Unknown log-combination kind '{self.kind}'")
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.flagged is None:
            self.flagged = ~np.isfinite(self.values)
        self.flagged = np.asarray(self.flagged, dtype=bool)
        if not (self.times.shape == self.values.shape == self.flagged.shape):
            raise ValueError("Log-combination times, values and flags must share one shape")

    @property
    def steps(self) -> np.ndarray:
        """Lag times in units of delta_t"""
        return np.rint(self.times / self.delta_t).astype(int)

    @property
    def same_qubit(self) -> bool:
        return self.pair[0] == self.pair[1]

    @property
    def two_sided(self) -> bool:
        return bool(self.metadata.get("two_sided", False))

    @property
    def flagged_fraction(self) -> float:
        return float(np.mean(self.flagged)) if self.flagged.size else 0.0


def complex_log(ratio) -> np.ndarray:
    """ln|r| + i pi [r < 0]; zero or non-finite r gives nan"""
    r = np.asarray(ratio, dtype=float)
    out = np.full(r.shape, np.nan, dtype=complex)
    ok = np.isfinite(r) & (r != 0)
    out[ok] = np.log(np.abs(r[ok])) + 1j * np.pi * (r[ok] < 0)
    return out


def _jackknife_se(replicates) -> np.ndarray:
    if replicates is None:
        return None
    g = replicates.shape[0]
    with np.errstate(invalid="ignore"):
        centered = replicates - np.nanmean(replicates, axis=0)
        return np.sqrt((g - 1) / g * np.nansum(centered**2, axis=0))


def _flags(operands, errors, ratio_floor: float) -> np.ndarray:
    """A lag is flagged when any log operand is zero, non-finite or within ratio_floor jackknife errors of zero"""
    flagged = np.zeros(np.shape(operands[0]), dtype=bool)
    for operand, se in zip(operands, errors):
        flagged |= ~np.isfinite(operand) | (operand == 0)
        if se is not None and ratio_floor > 0:
            with np.errstate(invalid="ignore"):
                flagged |= np.isfinite(se) & (np.abs(operand) < ratio_floor * se)
    return flagged


def _log_bias(operand, se) -> np.ndarray:
    """Second-order bias of ln|x| for a noisy x: -se^2 / (2 x^2)"""
    if se is None:
        return np.zeros(np.shape(operand))
    with np.errstate(divide="ignore", invalid="ignore"):
        bias = -0.5 * np.square(se / operand)
    return np.where(np.isfinite(bias), bias, 0.0)


def _replicates(corr: CorrelatorSet, key, sl) -> np.ndarray:
    rep = corr.channel(*key).replicates
    return None if rep is None else rep[:, sl]


def compute_U(corr: CorrelatorSet, a: int, ratio_floor: float = RATIO_FLOOR,
              bias_correction: bool = True) -> LogCombination:
    """U1 (a=1) on even lags or U2 (a=2) on odd lags for the set's qubit pair.

    For U2, Q_XY,XX is re-indexed k -> k+1 so both operands sit at (2k+1) dt.
    A lag is flagged (stored as nan) when the numerator or denominator is zero,
    non-finite or within ratio_floor jackknife errors of zero. With replicates
    and bias_correction, the second-order log bias of both operands is removed.
    """
    if a == 1:
        p = corr.channel("XX", "XX").values
        q = corr.channel("XY", "XY").values
        num, den = p + q, p - q
        rp = _replicates(corr, ("XX", "XX"), slice(None))
        rq = _replicates(corr, ("XY", "XY"), slice(None))
        rep_num = None if rp is None or rq is None else rp + rq
        rep_den = None if rp is None or rq is None else rp - rq
        times = corr.channel("XX", "XX").times
    elif a == 2:
        p = corr.channel("XY", "XX").values[1:]
        q = corr.channel("XX", "XY").values[:-1]
        num, den = p - q, p + q
        rp = _replicates(corr, ("XY", "XX"), slice(1, None))
        rq = _replicates(corr, ("XX", "XY"), slice(None, -1))
        rep_num = None if rp is None or rq is None else rp - rq
        rep_den = None if rp is None or rq is None else rp + rq
        times = corr.channel("XX", "XY").times[:-1]
    else:
        raise ConfigurationError(f"U index must be 1 or 2, got {a}")
    if num.size == 0:
        raise InsufficientDataError(f"U{a} needs at least {a} correlator lags")

    se_num, se_den = _jackknife_se(rep_num), _jackknife_se(rep_den)
    flagged = _flags((num, den), (se_num, se_den), ratio_floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = complex_log(num / den)
    if bias_correction:
        values -= _log_bias(num, se_num) - _log_bias(den, se_den)
    values[flagged] = np.nan
    degenerate = corr.same_qubit and a == 1
    if flagged.any():
        logger.warning(f"[LOGC] U{a} pair {corr.pair}: {int(flagged.sum())}/{flagged.size} lags flagged")
    return LogCombination(
        kind=f"U{a}",
        times=times,
        values=values,
        pair=corr.pair,
        delta_t=corr.delta_t,
        taus=corr.taus,
        flagged=flagged,
        metadata={
            "additive_constant": None,
            "operand_se": (se_num, se_den),
            "degenerate_lag0": degenerate,
            "ratio_floor": ratio_floor,
            "gaps": np.flatnonzero(flagged).tolist(),
        },
    )


def compute_W(corr: CorrelatorSet, ratio_floor: float = RATIO_FLOOR, t2star: float = None,
              bias_correction: bool = True) -> LogCombination:
    """W = log[Q_XX,XX + Q_XY,XY] for a same-qubit correlator set"""
    if not corr.same_qubit:
        raise ConfigurationError(f"W needs a same-qubit correlator set, got pair {corr.pair}")
    t2star = t2star if t2star is not None else corr.t2stars[0]
    tau = corr.taus[0]
    if t2star is not None and tau < t2star:
        logger.warning(f"[LOGC] W used with tau={tau:.3g} s below T2*={t2star:.3g} s; chi+ >> chi- does not hold")

    p = corr.channel("XX", "XX").values
    q = corr.channel("XY", "XY").values
    argument = p + q
    rp = _replicates(corr, ("XX", "XX"), slice(None))
    rq = _replicates(corr, ("XY", "XY"), slice(None))
    se = _jackknife_se(None if rp is None or rq is None else rp + rq)
    flagged = _flags((argument,), (se,), ratio_floor)
    values = complex_log(argument)
    if bias_correction:
        values -= _log_bias(argument, se)
    values[flagged] = np.nan
    if flagged.all():
        logger.warning(f"[LOGC] W qubit {corr.pair[0]}: every lag flagged")
    return LogCombination(
        kind="W",
        times=corr.channel("XX", "XX").times,
        values=values,
        pair=corr.pair,
        delta_t=corr.delta_t,
        taus=corr.taus,
        flagged=flagged,
        metadata={
            "additive_constant": None,
            "operand_se": (se,),
            "degenerate_lag0": True,
            "ratio_floor": ratio_floor,
            "gaps": np.flatnonzero(flagged).tolist(),
        },
    )


def _wrap_branch(values: np.ndarray) -> np.ndarray:
    """Map imaginary parts onto {0, pi}"""
    imag = np.mod(values.imag, 2.0 * np.pi)
    imag = np.where(np.isclose(imag, np.pi), np.pi, 0.0)
    return values.real + 1j * imag


def extend_negative_time(forward: LogCombination, reverse: LogCombination = None) -> LogCombination:
    """Two-sided series on n = -L..L-1 (U1, W: 2n dt; U2: (2n+1) dt).

    U1_ab(-t) = U1_ba(t), U2_ab(-t) = U2_ba(t) + i pi, W(-t) = W(t).
    """
    if forward.two_sided:
        return forward
    if reverse is None:
        if not forward.same_qubit:
            raise ConfigurationError(f"Cross pair {forward.pair} needs the reversed series for negative times")
        reverse = forward
    if reverse.kind != forward.kind or reverse.delta_t != forward.delta_t:
        raise ConfigurationError("Forward and reversed series must share kind and delta_t")

    if forward.kind == "U2":
        n_lags = min(forward.values.size, reverse.values.size)
        pos = slice(0, n_lags)
        neg = slice(0, n_lags)
        neg_shift = 1j * np.pi
    else:
        n_lags = min(forward.values.size, reverse.values.size) - 1
        pos = slice(0, n_lags)
        neg = slice(1, n_lags + 1)
        neg_shift = 0.0
    if n_lags < 1:
        raise InsufficientDataError("Too few lags to build a two-sided series")

    neg_times = -reverse.times[neg][::-1]
    neg_values = reverse.values[neg][::-1] + neg_shift
    neg_flags = reverse.flagged[neg][::-1]
    times = np.concatenate([neg_times, forward.times[pos]])
    values = np.concatenate([neg_values, forward.values[pos]])
    values = np.where(np.isfinite(values), _wrap_branch(values), np.nan + 0j)
    flagged = np.concatenate([neg_flags, forward.flagged[pos]])

    metadata = dict(forward.metadata)
    metadata.update({"two_sided": True, "n_lags": n_lags, "reverse_pair": reverse.pair})
    return LogCombination(
        kind=forward.kind,
        times=times,
        values=values,
        pair=forward.pair,
        delta_t=forward.delta_t,
        taus=forward.taus,
        flagged=flagged,
        metadata=metadata,
    )


def _quadratic_intercept(t, y):
    design = np.vander(t, 3, increasing=True)
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    dof = t.size - 3
    if dof > 0:
        resid = y - design @ coef
        sigma2 = float(resid @ resid) / dof
        cov = sigma2 * np.linalg.inv(design.T @ design)
        stderr = float(np.sqrt(max(cov[0, 0], 0.0)))
    else:
        stderr = 0.0
    return float(coef[0]), stderr


def extrapolate_lag0(series, fit_lags: int = 8, with_error: bool = False):
    """Least-squares quadratic in t over the first fit_lags valid positive lags, evaluated at t = 0.

    Args:
        series: LogCombination or CorrelatorChannel
        fit_lags: Number of positive lags used in the fit (>= 3)
        with_error: Also return the intercept's standard error

    Returns:
        value (complex for log-combinations), or (value, stderr)
    """
    if fit_lags < 3:
        raise InsufficientDataError(f"fit_lags={fit_lags}; a quadratic needs at least 3 lags")
    times = np.asarray(series.times, dtype=float)
    values = np.asarray(series.values)
    flagged = getattr(series, "flagged", None)
    valid = (times > 0) & np.isfinite(values)
    if flagged is not None:
        valid &= ~flagged
    order = np.argsort(times[valid])
    t = times[valid][order][:fit_lags]
    y = values[valid][order][:fit_lags]
    if t.size < 3:
        raise FlaggedLagsError(f"Only {t.size} valid positive lags for the lag-0 fit")

    delta_t = getattr(series, "delta_t", None) or float(t[0])
    intercept, stderr = _quadratic_intercept(t / delta_t, np.real(y))
    if np.iscomplexobj(values):
        value = intercept + 1j * float(np.imag(y[0]))
    else:
        value = intercept
    return (value, stderr) if with_error else value
