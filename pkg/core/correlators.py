# core/correlators.py

"""
Shot correlators Q^{if,jh}_{a,b}(t_k), their analytic counterparts and the
four-channel CorrelatorSet they are collected into.

Lag times follow t_k = (2k + delta_if - delta_jh) * delta_t.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from core.errors import ConfigurationError, InsufficientDataError, InvalidSpecError
from core.ramsey import LABELS, THETA, ShotRecord, delta

logger = logging.getLogger(__name__)

CHANNELS = (("XX", "XX"), ("XY", "XY"), ("XY", "XX"), ("XX", "XY"))


@dataclass
class CorrelatorChannel:
    labels: tuple
    lags: np.ndarray
    times: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    replicates: np.ndarray = None

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Correlator lag times must increase with k")


@dataclass
class CorrelatorSet:
    """All four (if, jh) channels for one ordered qubit pair"""

    pair: tuple
    delta_t: float
    taus: tuple
    channels: dict
    means: dict = field(default_factory=dict)
    n_pairs: int = None
    t2stars: tuple = (None, None)

    @property
    def same_qubit(self) -> bool:
        return self.pair[0] == self.pair[1]

    @property
    def max_lag(self) -> int:
        return int(self.channels[CHANNELS[0]].lags[-1])

    def channel(self, first: str, second: str) -> CorrelatorChannel:
        try:
            return self.channels[(first, second)]
        except KeyError:
            raise ConfigurationError(f"Correlator set has no channel ({first},{second})") from None


def lag_times(first: str, second: str, lags, delta_t: float) -> np.ndarray:
    return (2 * np.asarray(lags) + delta(first) - delta(second)) * delta_t


def estimate_means(shots: ShotRecord) -> dict:
    """<P^{if}_a> = (1/N) sum_n xi^{if}_a(t_n) for all four streams"""
    if shots.n_pairs < 1:
        raise InsufficientDataError("Cannot average an empty shot record")
    return {
        (alpha, label): float(np.mean(shots.stream(alpha, label), dtype=float))
        for alpha in (1, 2) for label in LABELS
    }


def lagged_products(x, y, max_lag: int, method: str = "fft") -> np.ndarray:
    """S(k) = sum_{n=0}^{N-1-k} x[n] y[n+k] for k = 0..max_lag"""
    x = np.asarray(x)
    y = np.asarray(y)
    n = x.size
    if y.size != n:
        raise ConfigurationError(f"Streams differ in length: {n} vs {y.size}")
    if max_lag >= n or max_lag < 0:
        raise InsufficientDataError(f"max_lag={max_lag} must lie in [0, N-1] for N={n}")

    if method == "direct":
        xf = x.astype(float)
        yf = y.astype(float)
        return np.array([np.dot(xf[: n - k], yf[k:]) for k in range(max_lag + 1)])
    if method != "fft":
        raise ConfigurationError(f"Unknown correlator method '{method}'")

    nfft = fft.next_fast_len(n + max_lag + 1, real=True)
    spectrum = np.conj(fft.rfft(x.astype(float), nfft)) * fft.rfft(y.astype(float), nfft)
    sums = fft.irfft(spectrum, nfft)[: max_lag + 1]
    if np.issubdtype(x.dtype, np.integer) and np.issubdtype(y.dtype, np.integer):
        # integer streams have integer lag sums
        sums = np.rint(sums)
    return sums


def correlate_streams(a, b, max_lag: int, method: str = "fft"):
    """Q(k) = S(k)/(N-k) - mean(a) mean(b).

    Returns:
        tuple: (values, counts)
    """
    a = np.asarray(a)
    b = np.asarray(b)
    sums = lagged_products(a, b, max_lag, method)
    counts = a.size - np.arange(max_lag + 1)
    values = sums / counts - np.mean(a, dtype=float) * np.mean(b, dtype=float)
    return values, counts


def _jackknife(a, b, max_lag: int, blocks: int, method: str) -> np.ndarray:
    """Delete-one-block replicates of Q(k), shape (blocks, max_lag + 1)"""
    n = a.size
    af = a.astype(float)
    bf = b.astype(float)
    edges = np.linspace(0, n, blocks + 1).astype(int)
    lags = np.arange(max_lag + 1)
    total = lagged_products(a, b, max_lag, method)
    counts = n - lags
    sum_a, sum_b = af.sum(), bf.sum()
    out = np.empty((blocks, max_lag + 1))
    for g in range(blocks):
        lo, hi = edges[g], edges[g + 1]
        masked = np.zeros_like(af)
        masked[lo:hi] = af[lo:hi]
        part = lagged_products(masked, bf, max_lag, method)
        part_counts = np.clip(np.minimum(hi, n - lags) - lo, 0, None)
        kept = n - (hi - lo)
        mean_a = (sum_a - af[lo:hi].sum()) / kept
        mean_b = (sum_b - bf[lo:hi].sum()) / kept
        with np.errstate(divide="ignore", invalid="ignore"):
            out[g] = (total - part) / (counts - part_counts) - mean_a * mean_b
    out[~np.isfinite(out)] = np.nan
    return out


def estimate_correlators(shots: ShotRecord, pair=(1, 2), max_lag: int = None, method: str = "fft",
                         jackknife_blocks: int = 8) -> CorrelatorSet:
    """Correlators of qubit pair[0]'s streams against qubit pair[1]'s, all four channels.

    Args:
        shots: Shot record
        pair: Ordered qubit pair (alpha, beta)
        max_lag: Largest lag index k (default N - 1)
        method: "fft" (O(N log N)) or "direct" (O(N max_lag))
        jackknife_blocks: Delete-one blocks for ratio errors, 0 to skip

    Returns:
        CorrelatorSet
    """
    alpha, beta = pair
    n = shots.n_pairs
    max_lag = n - 1 if max_lag is None else int(max_lag)
    if max_lag >= n:
        raise InsufficientDataError(f"max_lag={max_lag} must be smaller than N={n}")
    if jackknife_blocks == 1 or jackknife_blocks < 0:
        raise ConfigurationError("jackknife_blocks must be 0 or at least 2")

    lags = np.arange(max_lag + 1)
    channels = {}
    for first, second in CHANNELS:
        a = shots.stream(alpha, first)
        b = shots.stream(beta, second)
        values, counts = correlate_streams(a, b, max_lag, method)
        replicates = _jackknife(a, b, max_lag, jackknife_blocks, method) if jackknife_blocks else None
        channels[(first, second)] = CorrelatorChannel(
            labels=(first, second),
            lags=lags,
            times=lag_times(first, second, lags, shots.delta_t),
            values=values,
            counts=counts,
            replicates=replicates,
        )
    logger.info(f"[CORR] Pair {pair}: {len(CHANNELS)} channels up to lag {max_lag} (N={n}, method={method})")
    qa, qb = shots.qubit(alpha), shots.qubit(beta)
    return CorrelatorSet(
        pair=(alpha, beta),
        delta_t=shots.delta_t,
        taus=(qa.tau, qb.tau),
        channels=channels,
        means=estimate_means(shots),
        n_pairs=n,
        t2stars=(qa.t2star, qb.t2star),
    )


def analytic_correlator(b_alpha, b_beta, phi_alpha, phi_beta, tau_alpha, tau_beta,
                        var_alpha, var_beta, cross):
    """Quasi-static Gaussian correlator.

    Q = (B_a B_b / 2) [cos(phi_a - phi_b) e^{-chi-/2} - cos(phi_a + phi_b) e^{-chi+/2}
                       - 2 sin(phi_a) sin(phi_b) e^{-(x_a + x_b)/2}]
    with x = tau^2 var and chi+- = x_a + x_b +- 2 tau_a tau_b cross.
    """
    var_alpha = np.asarray(var_alpha, dtype=float)
    var_beta = np.asarray(var_beta, dtype=float)
    cross = np.asarray(cross, dtype=float)
    if np.any(var_alpha < 0) or np.any(var_beta < 0):
        raise InvalidSpecError("Variances must be non-negative")
    bound = np.sqrt(var_alpha * var_beta)
    if np.any(np.abs(cross) > bound * (1.0 + 1e-12) + 1e-300):
        raise InvalidSpecError("Cross value violates Cauchy-Schwarz: |cross| > sqrt(var_a var_b)")

    x_a = tau_alpha**2 * var_alpha
    x_b = tau_beta**2 * var_beta
    c = tau_alpha * tau_beta * cross
    chi_minus = x_a + x_b - 2.0 * c
    chi_plus = x_a + x_b + 2.0 * c
    return 0.5 * b_alpha * b_beta * (
        np.cos(phi_alpha - phi_beta) * np.exp(-chi_minus / 2.0)
        - np.cos(phi_alpha + phi_beta) * np.exp(-chi_plus / 2.0)
        - 2.0 * np.sin(phi_alpha) * np.sin(phi_beta) * np.exp(-(x_a + x_b) / 2.0)
    )


def model_correlator_set(pair, delta_t: float, taus, omegas, correlation, max_lag: int,
                         b_factors=(1.0, 1.0), offsets=(0.0, 0.0)) -> CorrelatorSet:
    """CorrelatorSet evaluated from analytic_correlator for a correlation model.

    Args:
        pair: Ordered qubit pair (alpha, beta)
        delta_t: Subsequence period
        taus, omegas: Evolution times and detunings of alpha and beta
        correlation: callable(t) -> (var_alpha, var_beta, <dw_a(t') dw_b(t'+t)>)
        max_lag: Largest lag index
        b_factors, offsets: Visibility B and offset A of alpha and beta
    """
    alpha, beta = pair
    lags = np.arange(max_lag + 1)
    channels = {}
    means = {}
    var_a = var_b = None
    for first, second in CHANNELS:
        times = lag_times(first, second, lags, delta_t)
        var_a, var_b, cross = correlation(times)
        phi_a = omegas[0] * taus[0] + THETA[first]
        phi_b = omegas[1] * taus[1] + THETA[second]
        values = analytic_correlator(b_factors[0], b_factors[1], phi_a, phi_b, taus[0], taus[1],
                                     var_a, var_b, cross)
        channels[(first, second)] = CorrelatorChannel(
            labels=(first, second), lags=lags, times=times,
            values=np.broadcast_to(values, lags.shape).astype(float),
            counts=np.full(lags.shape, np.inf),
        )
    for label in LABELS:
        for idx, qubit, var in ((0, alpha, var_a), (1, beta, var_b)):
            phase = omegas[idx] * taus[idx] + THETA[label]
            x = taus[idx] ** 2 * float(np.mean(var))
            means[(qubit, label)] = offsets[idx] + b_factors[idx] * np.sin(phase) * np.exp(-x / 2.0)
    return CorrelatorSet(
        pair=(alpha, beta),
        delta_t=delta_t,
        taus=tuple(taus),
        channels=channels,
        means=means,
        n_pairs=None,
    )


def smooth_lags(values, width: float) -> np.ndarray:
    """Centered moving average along the last axis over k -/+ floor(width * k / 2) lags.

    The window grows in proportion to the lag, so short lags are untouched for
    width * k < 2 and the relative resolution is the same at every lag. Near the
    last lag the window shrinks symmetrically. Non-finite entries are skipped.
    """
    values = np.asarray(values, dtype=float)
    if width < 0:
        raise ConfigurationError(f"Lag smoothing width must be >= 0, got {width}")
    n = values.shape[-1]
    k = np.arange(n)
    half = np.minimum(np.floor(width * k / 2.0).astype(int), np.minimum(k, n - 1 - k))
    if n == 0 or not half.any():
        return values.copy()
    finite = np.isfinite(values)
    pad = [(0, 0)] * (values.ndim - 1) + [(1, 0)]
    sums = np.pad(np.cumsum(np.where(finite, values, 0.0), axis=-1), pad)
    counts = np.pad(np.cumsum(finite, axis=-1), pad)
    lo, hi = k - half, k + half + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (sums[..., hi] - sums[..., lo]) / (counts[..., hi] - counts[..., lo])
    return np.where(np.isfinite(out), out, np.nan)


def smooth_correlators(corr: CorrelatorSet, width: float, max_lag: int = None) -> CorrelatorSet:
    """Every channel (values and jackknife replicates) through smooth_lags, then cut to max_lag"""
    keep = slice(0, corr.max_lag + 1 if max_lag is None else int(max_lag) + 1)
    channels = {}
    for key, channel in corr.channels.items():
        replicates = channel.replicates
        if replicates is not None:
            replicates = smooth_lags(replicates, width)[:, keep]
        channels[key] = CorrelatorChannel(
            labels=channel.labels,
            lags=channel.lags[keep],
            times=channel.times[keep],
            values=smooth_lags(channel.values, width)[keep],
            counts=channel.counts[keep],
            replicates=replicates,
        )
    logger.debug(f"[CORR] Pair {corr.pair}: smoothed lags with relative width {width}")
    return CorrelatorSet(
        pair=corr.pair,
        delta_t=corr.delta_t,
        taus=corr.taus,
        channels=channels,
        means=dict(corr.means),
        n_pairs=corr.n_pairs,
        t2stars=corr.t2stars,
    )
