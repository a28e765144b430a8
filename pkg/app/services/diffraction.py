# app/services/diffraction.py
"""
Closed-form single-slit diffraction of a particle released from a slit of
width d at t=0 (initial state: normalised characteristic function of the slit).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from app.core.errors import InvalidInputError
from app.models.physics import PhysicalParams
from app.models.slit import SlitEvolutionParams
from app.services.gaussian import optimal_sigma, spread_after_time

log = logging.getLogger(__name__)

# Fresnel parameter up to which the far-field pattern is trusted
FRAUNHOFER_V_MAX = 0.25


def fresnel_c(theta: float | np.ndarray) -> np.ndarray:
    """C(theta) = int_0^theta cos(pi z^2 / 2) dz."""
    return special.fresnel(theta)[1]


def fresnel_s(theta: float | np.ndarray) -> np.ndarray:
    """S(theta) = int_0^theta sin(pi z^2 / 2) dz."""
    return special.fresnel(theta)[0]


def slit_density_exact(y2: float | np.ndarray, sp: SlitEvolutionParams) -> np.ndarray:
    """(1/2d) [(C(u+v) - C(u-v))^2 + (S(u+v) - S(u-v))^2]."""
    u = sp.u(y2)
    v = sp.v
    s_plus, c_plus = special.fresnel(u + v)
    s_minus, c_minus = special.fresnel(u - v)
    return ((c_plus - c_minus) ** 2 + (s_plus - s_minus) ** 2) / (2.0 * sp.d)


def slit_density_fraunhofer(y2: float | np.ndarray, sp: SlitEvolutionParams) -> np.ndarray:
    """
    Far-field pattern (2 hbar t / (m d pi)) sin^2(m d y2 / 2 hbar t) / y2^2.

    Written as peak * sinc^2 so y2 = 0 gives the limit m d / (2 pi hbar t).
    """
    hbar, m = sp.p.hbar, sp.p.mass
    x = m * sp.d * np.asarray(y2, dtype=float) / (2.0 * hbar * sp.t)
    peak = m * sp.d / (2.0 * math.pi * hbar * sp.t)
    return peak * np.sinc(x / math.pi) ** 2


def fraunhofer_width(sp: SlitEvolutionParams) -> float:
    """Distance between the two first minima, 4 pi hbar t / (m d)."""
    if sp.v > FRAUNHOFER_V_MAX:
        log.warning("v=%.3g is outside the far-field regime (v <= %g)", sp.v, FRAUNHOFER_V_MAX)
    return 4.0 * math.pi * sp.p.hbar * sp.t / (sp.p.mass * sp.d)


def fraunhofer_zero(k: int, sp: SlitEvolutionParams) -> float:
    if k == 0:
        raise InvalidInputError("the far-field pattern has no zero at k=0")
    return 2.0 * math.pi * sp.p.hbar * sp.t * k / (sp.p.mass * sp.d)


def fraunhofer_regime_limit(t: float, p: PhysicalParams) -> float:
    """Slit width with v = 1: 2 sqrt(pi hbar t / m)."""
    return 2.0 * math.sqrt(math.pi * p.hbar * t / p.mass)


def scatter_ratio(n: int, t: float, p: PhysicalParams) -> float:
    """
    Width of the R pattern for d = sigma/n over 6 sigma_bar, with sigma the
    optimal initial width. Equals (4 pi / (3 sqrt 2)) n.
    """
    if int(n) != n or n < 1:
        raise InvalidInputError(f"n must be a positive integer, got {n}")
    sigma = optimal_sigma(t, p)
    sp = SlitEvolutionParams(d=sigma / n, t=t, p=p)
    return 4.0 * math.pi * p.hbar * t / (p.mass * sp.d) / (6.0 * spread_after_time(sigma, t, p))


def central_lobe_deviation(sp: SlitEvolutionParams, n_points: int = 2001) -> float:
    """Sup-norm of (far field - exact) on the central lobe, over the exact peak."""
    half = 0.5 * 4.0 * math.pi * sp.p.hbar * sp.t / (sp.p.mass * sp.d)
    y = np.linspace(-half, half, n_points)
    exact = slit_density_exact(y, sp)
    far = slit_density_fraunhofer(y, sp)
    return float(np.max(np.abs(far - exact)) / np.max(exact))


@dataclass(frozen=True)
class DensityCurve:
    y2: np.ndarray
    exact: np.ndarray
    fraunhofer: np.ndarray

    def rows(self) -> list[tuple[float, float, float]]:
        return [(float(a), float(b), float(c)) for a, b, c in zip(self.y2, self.exact, self.fraunhofer)]


def density_curve(sp: SlitEvolutionParams, half_width: float, n_points: int = 1001) -> DensityCurve:
    if half_width <= 0 or n_points < 2:
        raise InvalidInputError("half_width must be > 0 and n_points >= 2")
    y = np.linspace(-half_width, half_width, n_points)
    return DensityCurve(y2=y, exact=slit_density_exact(y, sp), fraunhofer=slit_density_fraunhofer(y, sp))
