# app/services/gaussian.py
"""
Closed-form Gaussian packet algebra.

psi_{beta,sigma}(y) = (2 pi sigma^2)^(-1/4) exp(-(y-beta)^2 / 4 sigma^2)

The product of two packets of equal width is a scaled normal density,
    psi_a psi_b = exp(-(a-b)^2 / 8 sigma^2) * N((a+b)/2, sigma)(y),
so every band probability of the three-branch source state is a finite sum of
normal CDF differences, cross terms included.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
from scipy import special, stats

from app.core.errors import InvalidInputError, UndefinedConditionalError
from app.models.physics import GaussianMode, PhysicalParams, PopperState

# Conditioning events below this probability are rejected
CONDITIONAL_FLOOR = 1e-12

Band = tuple[float, float]
WHOLE_LINE: Band = (-math.inf, math.inf)


def _check_t(t: float, strict: bool) -> None:
    if not math.isfinite(t) or t < 0 or (strict and t == 0):
        raise InvalidInputError(f"t must be {'> 0' if strict else '>= 0'}, got {t}")


# ---------------------------------------------------------------------
# Single packet
# ---------------------------------------------------------------------
def gaussian_amplitude(mode: GaussianMode, y: float | np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    s = mode.sigma
    return (2.0 * math.pi * s * s) ** -0.25 * np.exp(-((y - mode.mean) ** 2) / (4.0 * s * s))


def spread_after_time(sigma: float, t: float, p: PhysicalParams) -> float:
    """sigma_bar = sigma sqrt(1 + hbar^2 t^2 / (4 m^2 sigma^4))."""
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be > 0, got {sigma}")
    _check_t(t, strict=False)
    return sigma * math.sqrt(1.0 + (p.hbar * t / (2.0 * p.mass * sigma * sigma)) ** 2)


def optimal_sigma(t: float, p: PhysicalParams) -> float:
    """Initial width that minimises the spread after time t: sqrt(hbar t / 2m)."""
    _check_t(t, strict=True)
    return math.sqrt(p.hbar * t / (2.0 * p.mass))


def evolved_gaussian_amplitude(
    mode: GaussianMode, t: float, p: PhysicalParams, y: float | np.ndarray
) -> np.ndarray:
    """Free evolution of a zero-momentum packet, exact."""
    _check_t(t, strict=False)
    y = np.asarray(y, dtype=float)
    s2 = mode.sigma**2
    z = 1.0 + 1j * p.hbar * t / (2.0 * p.mass * s2)
    return (2.0 * math.pi * s2) ** -0.25 / np.sqrt(z) * np.exp(-((y - mode.mean) ** 2) / (4.0 * s2 * z))


def evolved_gaussian_density(
    mode: GaussianMode, t: float, p: PhysicalParams, y: float | np.ndarray
) -> np.ndarray:
    return stats.norm.pdf(y, loc=mode.mean, scale=spread_after_time(mode.sigma, t, p))


def _check_band(band: Band) -> Band:
    a, b = float(band[0]), float(band[1])
    if not a < b:
        raise InvalidInputError(f"interval needs a < b, got [{a}, {b}]")
    return a, b


def _normal_mass(mean: float | np.ndarray, sigma: float, band: Band) -> np.ndarray:
    a, b = band
    return special.ndtr((b - mean) / sigma) - special.ndtr((a - mean) / sigma)


def interval_probability(mode: GaussianMode, a: float, b: float) -> float:
    """Integral of |psi|^2 over [a, b] through the normal CDF."""
    band = _check_band((a, b))
    return float(np.clip(_normal_mass(mode.mean, mode.sigma, band), 0.0, 1.0))


def tail_mass(mode: GaussianMode, lower: float, upper: float) -> float:
    """Probability outside [lower, upper], computed from both tails directly."""
    s = mode.sigma
    return float(special.ndtr((lower - mode.mean) / s) + special.ndtr((mode.mean - upper) / s))


def gaussian_overlap(a: float | np.ndarray, b: float | np.ndarray, sigma: float) -> np.ndarray:
    """<psi_{a,sigma} | psi_{b,sigma}>."""
    return np.exp(-((np.asarray(a) - np.asarray(b)) ** 2) / (8.0 * sigma * sigma))


# ---------------------------------------------------------------------
# Three-branch source state
# ---------------------------------------------------------------------
def popper_state_amplitude(
    state: PopperState, y1: float | np.ndarray, y2: float | np.ndarray
) -> np.ndarray:
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    total = np.zeros(np.broadcast(y1, y2).shape)
    for m1, m2 in state.branches:
        total = total + gaussian_amplitude(GaussianMode(mean=m1, sigma=state.sigma), y1) * gaussian_amplitude(
            GaussianMode(mean=m2, sigma=state.sigma), y2
        )
    return state.weight * total


def _pair_terms(state: PopperState):
    """(weight, mid1, mid2) for every ordered branch pair (i, j)."""
    s = state.sigma
    for a1, a2 in state.branches:
        for b1, b2 in state.branches:
            w = float(gaussian_overlap(a1, b1, s) * gaussian_overlap(a2, b2, s)) / 3.0
            yield w, 0.5 * (a1 + b1), 0.5 * (a2 + b2)


def popper_marginal_density(
    state: PopperState, y: float | np.ndarray, axis: Literal[1, 2] = 1
) -> np.ndarray:
    """Exact single-particle density of the normalised source state."""
    if axis not in (1, 2):
        raise InvalidInputError(f"axis must be 1 or 2, got {axis}")
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    for w, mid1, mid2 in _pair_terms(state):
        out = out + w * stats.norm.pdf(y, loc=mid1 if axis == 1 else mid2, scale=state.sigma)
    return out / state.squared_norm


def joint_band_probability(state: PopperState, band1: Band, band2: Band) -> float:
    """P(y1 in band1 and y2 in band2) for the normalised source state."""
    band1, band2 = _check_band(band1), _check_band(band2)
    s = state.sigma
    total = 0.0
    for w, mid1, mid2 in _pair_terms(state):
        total += w * float(_normal_mass(mid1, s, band1) * _normal_mass(mid2, s, band2))
    return min(max(total / state.squared_norm, 0.0), 1.0)


def marginal_band_probability(state: PopperState, band: Band, axis: Literal[1, 2] = 1) -> float:
    if axis not in (1, 2):
        raise InvalidInputError(f"axis must be 1 or 2, got {axis}")
    if axis == 1:
        return joint_band_probability(state, band, WHOLE_LINE)
    return joint_band_probability(state, WHOLE_LINE, band)


def conditional_band_probability(state: PopperState, band1: Band, band2: Band) -> float:
    """P(y2 in band2 | y1 in band1)."""
    given = joint_band_probability(state, band1, WHOLE_LINE)
    if given < CONDITIONAL_FLOOR:
        raise UndefinedConditionalError(
            f"P(y1 in {tuple(band1)}) = {given:.3e} is below the floor {CONDITIONAL_FLOOR:g}"
        )
    return min(joint_band_probability(state, band1, band2) / given, 1.0)
