# core/optimal.py

"""
SNR-optimal sequence parameters.

Evolution times maximize the rho-averaged visibility bracket
g(x_a, x_b) = e^{-(x_a+x_b)/2} (sinh u - u)/u, u = sqrt(x_a x_b), x = <dw^2> tau^2.
Detunings follow the cross, auto and joint rules of suggest_frequencies.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from core.errors import ConfigurationError, DomainError, InfeasibleSettingError

logger = logging.getLogger(__name__)

FREQUENCY_MODES = ("cross", "auto_short", "auto_long", "joint")
TAU_RULES = ("optimal", "t2star")
SEARCH_BOUND = 8
X_BOUNDS = (0.0, 20.0)
SERIES_CUTOFF = 1e-2


@dataclass(frozen=True)
class VisibilityPoint:
    x_alpha: float
    x_beta: float
    g_value: float

    def __post_init__(self):
        if self.x_alpha < 0 or self.x_beta < 0:
            raise DomainError(f"x must be non-negative, got ({self.x_alpha}, {self.x_beta})")


def g_averaged(x_alpha, x_beta):
    """rho-averaged visibility bracket; series limit for small sqrt(x_a x_b)"""
    xa = np.asarray(x_alpha, dtype=float)
    xb = np.asarray(x_beta, dtype=float)
    if np.any(xa < 0) or np.any(xb < 0):
        raise DomainError("g_averaged needs x_alpha, x_beta >= 0")
    s = (xa + xb) / 2.0
    u = np.sqrt(xa * xb)
    u2 = u * u
    series = np.exp(-s) * (u2 / 6.0 + u2**2 / 120.0 + u2**3 / 5040.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # u <= s, so both exponents stay non-positive
        closed = (np.exp(u - s) - np.exp(-u - s)) / (2.0 * u) - np.exp(-s)
    out = np.where(u < SERIES_CUTOFF, series, closed)
    out = np.where(np.isinf(s), 0.0, out)
    return out[()] if out.ndim == 0 else out


def visibility(x_alpha, x_beta, rho, sign: int = 1, b_alpha: float = 1.0, b_beta: float = 1.0,
               phase_alpha: float = 0.0, phase_beta: float = 0.0):
    """G(+-) for a fixed correlation coefficient rho in [-1, 1].

    B_a B_b cos(phi_a -+ phi_b) [e^{-(x_a + x_b -+ 2 sqrt(x_a x_b) rho)/2} - e^{-(x_a + x_b)/2}]
    """
    if sign not in (1, -1):
        raise ConfigurationError(f"sign must be +1 or -1, got {sign}")
    xa = np.asarray(x_alpha, dtype=float)
    xb = np.asarray(x_beta, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(xa < 0) or np.any(xb < 0):
        raise DomainError("visibility needs x_alpha, x_beta >= 0")
    if np.any(np.abs(rho) > 1.0):
        raise DomainError("rho must lie in [-1, 1]")
    s = xa + xb
    u = np.sqrt(xa * xb)
    bracket = np.exp(-(s - sign * 2.0 * u * rho) / 2.0) - np.exp(-s / 2.0)
    return b_alpha * b_beta * np.cos(phase_alpha - sign * phase_beta) * bracket


def max_visibility() -> VisibilityPoint:
    """Maximize g_averaged over [0, 20]^2 with bounded Nelder-Mead"""
    result = optimize.minimize(
        lambda x: -g_averaged(x[0], x[1]),
        x0=np.array([1.0, 1.5]),
        method="Nelder-Mead",
        bounds=[X_BOUNDS, X_BOUNDS],
        options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 4000},
    )
    if not result.success:
        logger.warning(f"[OPT] Nelder-Mead stopped early: {result.message}")
    xa, xb = (float(v) for v in result.x)
    return VisibilityPoint(x_alpha=xa, x_beta=xb, g_value=float(-result.fun))


def optimize_evolution_times(t2star_a: float, t2star_b: float):
    """Optimal evolution times tau = sqrt(x*/2) T2*.

    Returns:
        tuple: (tau_a, tau_b, x_star)
    """
    for name, value in (("t2star_a", t2star_a), ("t2star_b", t2star_b)):
        if not value > 0:
            raise ConfigurationError(f"{name} must be positive, got {value}")
    point = max_visibility()
    x_star = (point.x_alpha + point.x_beta) / 2.0
    scale = np.sqrt(x_star / 2.0)
    logger.info(f"[OPT] x* = {x_star:.6f}, tau/T2* = {scale:.6f}")
    return float(scale * t2star_a), float(scale * t2star_b), float(x_star)


def cosine_factors(omega_1: float, omega_2: float, tau_1: float, tau_2: float) -> dict:
    """Phase factors that must stay away from zero for U1, U2 and the same-qubit U1"""
    p1 = omega_1 * tau_1
    p2 = omega_2 * tau_2
    return {
        "cos_minus": float(np.cos(p1 - p2)),
        "cos_plus": float(np.cos(p1 + p2)),
        "sin_minus": float(np.sin(p1 - p2)),
        "sin_plus": float(np.sin(p1 + p2)),
        "cos_2phi_1": float(np.cos(2.0 * p1)),
        "cos_2phi_2": float(np.cos(2.0 * p2)),
    }


def _weakest(factors: dict) -> float:
    return min(abs(v) for v in factors.values())


def joint_search(tau_1: float, tau_2: float, threshold: float = 0.2, bound: int = SEARCH_BOUND) -> dict:
    """Smallest (m, l) on omega_1 = m pi/8tau_1, omega_2 = l pi/8tau_2 with every factor above threshold"""
    candidates = [(m, l) for m in range(-bound, bound + 1) for l in range(-bound, bound + 1)]
    candidates.sort(key=lambda ml: (abs(ml[0]) + abs(ml[1]), abs(ml[0]), -ml[0], -ml[1]))
    best = None
    for m, l in candidates:
        omega_1 = m * np.pi / (8.0 * tau_1)
        omega_2 = l * np.pi / (8.0 * tau_2)
        factors = cosine_factors(omega_1, omega_2, tau_1, tau_2)
        entry = {"m": m, "l": l, "omega_1": omega_1, "omega_2": omega_2, "factors": factors,
                 "weakest": _weakest(factors)}
        if entry["weakest"] > threshold:
            logger.info(f"[OPT] Joint setting (m, l) = ({m}, {l})")
            return entry
        if best is None or entry["weakest"] > best["weakest"]:
            best = entry
    raise InfeasibleSettingError(
        f"No joint setting with |m|, |l| <= {bound} clears threshold {threshold}; "
        f"best (m, l) = ({best['m']}, {best['l']}) reaches {best['weakest']:.3f}",
        best=best,
    )


def suggest_frequencies(mode: str, tau_1: float, tau_2: float, m: int = 0, l: int = 0,
                        threshold: float = 0.2):
    """Detunings (omega_1, omega_2) in rad/s.

    cross:      omega_1 = (m+l+1) pi/4tau_1, omega_2 = (m-l) pi/4tau_2
    auto_short: omega_1 = m pi/2tau_1, omega_2 = l pi/2tau_2
    auto_long:  omega_1 = (2m+1) pi/4tau_1, omega_2 = (2l+1) pi/4tau_2
    joint:      joint_search (m and l are ignored)
    """
    if not (tau_1 > 0 and tau_2 > 0):
        raise ConfigurationError(f"Evolution times must be positive, got ({tau_1}, {tau_2})")
    if mode == "cross":
        return (m + l + 1) * np.pi / (4.0 * tau_1), (m - l) * np.pi / (4.0 * tau_2)
    if mode == "auto_short":
        return m * np.pi / (2.0 * tau_1), l * np.pi / (2.0 * tau_2)
    if mode == "auto_long":
        return (2 * m + 1) * np.pi / (4.0 * tau_1), (2 * l + 1) * np.pi / (4.0 * tau_2)
    if mode == "joint":
        found = joint_search(tau_1, tau_2, threshold)
        return found["omega_1"], found["omega_2"]
    raise ConfigurationError(f"Unknown frequency mode '{mode}', expected one of {FREQUENCY_MODES}")


def parameter_card(t2star_1: float, t2star_2: float, mode: str = "cross", m: int = 0, l: int = 0,
                   tau_rule: str = "optimal", threshold: float = 0.2) -> dict:
    """JSON-ready sequence parameters for a pair of coherence times"""
    if tau_rule not in TAU_RULES:
        raise ConfigurationError(f"Unknown tau rule '{tau_rule}', expected one of {TAU_RULES}")
    tau_1, tau_2, x_star = optimize_evolution_times(t2star_1, t2star_2)
    if tau_rule == "t2star":
        tau_1, tau_2 = float(t2star_1), float(t2star_2)
    if mode == "joint":
        found = joint_search(tau_1, tau_2, threshold)
        omega_1, omega_2, m, l = found["omega_1"], found["omega_2"], found["m"], found["l"]
    else:
        omega_1, omega_2 = suggest_frequencies(mode, tau_1, tau_2, m, l, threshold)
    x_1 = 2.0 * (tau_1 / t2star_1) ** 2
    x_2 = 2.0 * (tau_2 / t2star_2) ** 2
    return {
        "mode": mode,
        "tau_rule": tau_rule,
        "m": m,
        "l": l,
        "threshold": threshold,
        "t2star_s": [float(t2star_1), float(t2star_2)],
        "tau_s": [tau_1, tau_2],
        "omega_rad_s": [float(omega_1), float(omega_2)],
        "x": [x_1, x_2],
        "x_star": x_star,
        "g_value": float(g_averaged(x_1, x_2)),
        "cosine_factors": cosine_factors(omega_1, omega_2, tau_1, tau_2),
    }
