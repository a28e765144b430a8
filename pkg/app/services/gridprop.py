# app/services/gridprop.py
"""
Sampled one- and two-particle wavefunctions on uniform grids.

Free evolution is spectral: each axis is multiplied by exp(-i hbar k^2 t / 2m)
in momentum space. The grid is periodic, so every propagation is followed by
a boundary-mass guard that raises GridTooSmallError instead of silently
letting probability wrap around.

Apertures are hard: the state is multiplied by the characteristic function
of the slit and the removed part is kept as an "absorbed" branch.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np
import scipy.fft
import scipy.linalg as la
from scipy.ndimage import uniform_filter1d

from app.core.config import get_settings
from app.core.errors import EmptyPostSelectionError, GridTooSmallError, InvalidInputError
from app.models.grid import Aperture, Grid1D
from app.models.physics import GaussianMode, PhysicalParams, PopperState
from app.services import gaussian

log = logging.getLogger(__name__)

SUPPORT_TOL = 1e-12
EDGE_MASS_TOL = 1e-6
EDGE_NODES = 5
POST_SELECTION_FLOOR = 1e-12
SCHMIDT_FLOOR = 1e-14
DENSITY_FLOOR = 1e-12
# Padded grids reach this multiple of the Nyquist travel distance
NYQUIST_TRAVEL_FACTOR = 1.25
# First-minima search
SMOOTH_NODES = 5
MINIMA_PROMINENCE = 0.01

Axis = Literal[1, 2]


def _readonly(a: np.ndarray, dtype=complex) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _check_axis(axis: int) -> None:
    if axis not in (1, 2):
        raise InvalidInputError(f"axis must be 1 or 2, got {axis}")


# ---------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class SampledWavefunction1D:
    grid: Grid1D
    amplitudes: np.ndarray
    norm_tracked: float

    def __post_init__(self) -> None:
        amps = _readonly(self.amplitudes)
        if amps.shape != (self.grid.n_points,):
            raise InvalidInputError(f"amplitudes shape {amps.shape} does not match grid ({self.grid.n_points},)")
        object.__setattr__(self, "amplitudes", amps)
        if abs(self.norm - self.norm_tracked) > 1e-10 * max(1.0, self.norm_tracked):
            raise InvalidInputError(f"tracked norm {self.norm_tracked} differs from discrete norm {self.norm}")

    @classmethod
    def from_amplitudes(cls, grid: Grid1D, amplitudes: np.ndarray) -> "SampledWavefunction1D":
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(grid=grid, amplitudes=amps, norm_tracked=float(np.sum(np.abs(amps) ** 2) * grid.spacing))

    @property
    def norm(self) -> float:
        """Discrete squared norm sum |psi|^2 dy."""
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.spacing)

    def density(self) -> "SampledDensity":
        return SampledDensity(self.grid.points, np.abs(self.amplitudes) ** 2, self.grid.spacing)


@dataclass(frozen=True)
class SampledWavefunction2D:
    """amplitudes[i, j] = psi(grid1.points[i], grid2.points[j])."""

    grid1: Grid1D
    grid2: Grid1D
    amplitudes: np.ndarray
    norm_tracked: float

    def __post_init__(self) -> None:
        amps = _readonly(self.amplitudes)
        shape = (self.grid1.n_points, self.grid2.n_points)
        if amps.shape != shape:
            raise InvalidInputError(f"amplitudes shape {amps.shape} does not match grids {shape}")
        object.__setattr__(self, "amplitudes", amps)
        if abs(self.norm - self.norm_tracked) > 1e-8 * max(1.0, self.norm_tracked):
            raise InvalidInputError(f"tracked norm {self.norm_tracked} differs from discrete norm {self.norm}")

    @classmethod
    def from_amplitudes(cls, grid1: Grid1D, grid2: Grid1D, amplitudes: np.ndarray) -> "SampledWavefunction2D":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = float(np.sum(np.abs(amps) ** 2) * grid1.spacing * grid2.spacing)
        return cls(grid1=grid1, grid2=grid2, amplitudes=amps, norm_tracked=norm)

    @property
    def cell(self) -> float:
        return self.grid1.spacing * self.grid2.spacing

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.cell)

    def grid(self, axis: Axis) -> Grid1D:
        return self.grid1 if axis == 1 else self.grid2


@dataclass(frozen=True)
class SampledDensity:
    """Probability density sampled at `points` with uniform `spacing`."""

    points: np.ndarray
    values: np.ndarray
    spacing: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", _readonly(self.points, float))
        object.__setattr__(self, "values", _readonly(self.values, float))
        if self.points.shape != self.values.shape:
            raise InvalidInputError("points and values differ in shape")

    @property
    def mass(self) -> float:
        return float(np.sum(self.values) * self.spacing)

    @property
    def mean(self) -> float:
        return float(np.sum(self.points * self.values) * self.spacing / self.mass)

    def restrict(self, lower: float, upper: float) -> "SampledDensity":
        keep = (self.points >= lower) & (self.points <= upper)
        return SampledDensity(self.points[keep], self.values[keep], self.spacing)

    def metadata(self) -> dict[str, float | int]:
        """Grid description written above exported density tables."""
        return {
            "y_min": float(self.points[0]),
            "y_max": float(self.points[-1]),
            "n_points": int(self.points.size),
            "spacing": float(self.spacing),
            "probability": self.mass,
        }

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.points.tolist(), self.values.tolist()))

    def __add__(self, other: "SampledDensity") -> "SampledDensity":
        if other.points.shape != self.points.shape or not np.array_equal(other.points, self.points):
            raise InvalidInputError("densities live on different grids")
        return SampledDensity(self.points, self.values + other.values, self.spacing)


@dataclass(frozen=True)
class ApertureResult:
    passed: SampledWavefunction2D
    pass_probability: float
    absorbed: SampledWavefunction2D


@dataclass(frozen=True)
class SchmidtDecomposition:
    """psi(y1, y2) = sum_j coefficients[j] modes1[j](y1) modes2[j](y2), modes unit-normalised."""

    grid1: Grid1D
    grid2: Grid1D
    coefficients: np.ndarray
    modes1: np.ndarray
    modes2: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.coefficients.size)


Wavefunction = Union[SampledWavefunction1D, SampledWavefunction2D]


# ---------------------------------------------------------------------
# Discretisation
# ---------------------------------------------------------------------
def discretize_1d(analytic: Union[GaussianMode, Aperture], grid: Grid1D) -> SampledWavefunction1D:
    """Sample a Gaussian packet or a normalised slit function; renormalise to 1."""
    y = grid.points
    if isinstance(analytic, GaussianMode):
        outside = gaussian.tail_mass(analytic, grid.y_min, y[-1])
        if outside > SUPPORT_TOL:
            raise GridTooSmallError(
                f"packet mass {outside:.3e} outside [{grid.y_min}, {y[-1]}]", edge_mass=outside
            )
        amps = gaussian.gaussian_amplitude(analytic, y).astype(complex)
    elif isinstance(analytic, Aperture):
        if not analytic.fits(grid):
            raise GridTooSmallError(f"slit [{analytic.lower}, {analytic.upper}] does not fit the grid")
        amps = analytic.characteristic(y).astype(complex)
    else:
        raise InvalidInputError(f"cannot discretise {type(analytic).__name__}")

    norm = float(np.sum(np.abs(amps) ** 2) * grid.spacing)
    if norm <= 0:
        raise InvalidInputError("sampled function vanishes on every node")
    return SampledWavefunction1D.from_amplitudes(grid, amps / math.sqrt(norm))


def discretize_2d(state: PopperState, grid1: Grid1D, grid2: Grid1D) -> SampledWavefunction2D:
    outside = 0.0
    for axis, grid in ((1, grid1), (2, grid2)):
        lo, hi = grid.y_min, grid.points[-1]
        outside += gaussian.marginal_band_probability(state, (-math.inf, lo), axis)
        outside += gaussian.marginal_band_probability(state, (hi, math.inf), axis)
    if outside > SUPPORT_TOL:
        raise GridTooSmallError(f"source state mass {outside:.3e} falls outside the grids", edge_mass=outside)

    amps = gaussian.popper_state_amplitude(state, grid1.points[:, None], grid2.points[None, :])
    norm = float(np.sum(amps**2) * grid1.spacing * grid2.spacing)
    log.debug("discretised source state on %dx%d nodes", grid1.n_points, grid2.n_points)
    return SampledWavefunction2D.from_amplitudes(grid1, grid2, amps / math.sqrt(norm))


def normalize(psi: SampledWavefunction2D) -> SampledWavefunction2D:
    norm = psi.norm
    if norm <= 0:
        raise InvalidInputError("cannot normalise a zero state")
    return SampledWavefunction2D.from_amplitudes(psi.grid1, psi.grid2, psi.amplitudes / math.sqrt(norm))


def product_state(a: SampledWavefunction1D, b: SampledWavefunction1D) -> SampledWavefunction2D:
    return SampledWavefunction2D.from_amplitudes(a.grid, b.grid, np.outer(a.amplitudes, b.amplitudes))


# ---------------------------------------------------------------------
# Free evolution
# ---------------------------------------------------------------------
def _phase(grid: Grid1D, t: float, p: PhysicalParams) -> np.ndarray:
    k = grid.wavenumbers
    return np.exp(-1j * p.hbar * k * k * t / (2.0 * p.mass))


def _edge_mass(values: np.ndarray, spacing: float) -> float:
    return float(max(np.sum(values[:EDGE_NODES]), np.sum(values[-EDGE_NODES:])) * spacing)


def _guard(density: np.ndarray, spacing: float, what: str) -> None:
    edge = _edge_mass(density, spacing)
    if edge >= EDGE_MASS_TOL:
        raise GridTooSmallError(
            f"{what}: mass {edge:.3e} within {EDGE_NODES} nodes of a grid edge; enlarge the grid or shorten t",
            edge_mass=edge,
        )


def propagate_free(
    psi: Wavefunction,
    t: float,
    p: PhysicalParams,
    *,
    workers: Optional[int] = None,
) -> Wavefunction:
    """Evolve freely for time t; 2D states use the product of per-axis propagators."""
    if not math.isfinite(t) or t < 0:
        raise InvalidInputError(f"t must be >= 0, got {t}")
    if t == 0:
        return psi
    workers = get_settings().FFT_WORKERS if workers is None else workers

    if isinstance(psi, SampledWavefunction1D):
        spec = scipy.fft.fft(psi.amplitudes, workers=workers)
        out = scipy.fft.ifft(spec * _phase(psi.grid, t, p), workers=workers)
        _guard(np.abs(out) ** 2, psi.grid.spacing, "propagation")
        return SampledWavefunction1D(grid=psi.grid, amplitudes=out, norm_tracked=psi.norm_tracked)

    spec = scipy.fft.fft2(psi.amplitudes, workers=workers)
    phase = np.outer(_phase(psi.grid1, t, p), _phase(psi.grid2, t, p))
    out = scipy.fft.ifft2(spec * phase, workers=workers)
    dens = np.abs(out) ** 2
    _guard(dens.sum(axis=1) * psi.grid2.spacing, psi.grid1.spacing, "propagation along axis 1")
    _guard(dens.sum(axis=0) * psi.grid1.spacing, psi.grid2.spacing, "propagation along axis 2")
    return SampledWavefunction2D(grid1=psi.grid1, grid2=psi.grid2, amplitudes=out, norm_tracked=psi.norm_tracked)


# ---------------------------------------------------------------------
# Slits and post-selection
# ---------------------------------------------------------------------
def apply_aperture(psi: SampledWavefunction2D, axis: Axis, ap: Aperture) -> ApertureResult:
    _check_axis(axis)
    grid = psi.grid(axis)
    if not ap.fits(grid):
        raise InvalidInputError(f"slit [{ap.lower}, {ap.upper}] does not fit inside axis {axis}")
    chi = ap.mask(grid.points).astype(float)
    chi = chi[:, None] if axis == 1 else chi[None, :]
    passed = SampledWavefunction2D.from_amplitudes(psi.grid1, psi.grid2, psi.amplitudes * chi)
    absorbed = SampledWavefunction2D.from_amplitudes(psi.grid1, psi.grid2, psi.amplitudes * (1.0 - chi))
    return ApertureResult(passed=passed, pass_probability=min(passed.norm, 1.0), absorbed=absorbed)


def condition_on_coincidence(passed: SampledWavefunction2D) -> SampledWavefunction2D:
    """Renormalise the both-slits-passed branch."""
    norm = passed.norm
    if norm < POST_SELECTION_FLOOR:
        raise EmptyPostSelectionError(f"coincidence probability {norm:.3e} below floor {POST_SELECTION_FLOOR:g}")
    return SampledWavefunction2D.from_amplitudes(passed.grid1, passed.grid2, passed.amplitudes / math.sqrt(norm))


def trace_distance_pure(a: SampledWavefunction2D, b: SampledWavefunction2D) -> float:
    """sqrt(1 - |<a|b>|^2) for unit-norm states on the same grids."""
    if a.amplitudes.shape != b.amplitudes.shape:
        raise InvalidInputError("states live on different grids")
    overlap = np.vdot(a.amplitudes, b.amplitudes) * a.cell
    return math.sqrt(max(0.0, 1.0 - abs(overlap) ** 2))


# ---------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------
def marginal_density(psi: SampledWavefunction2D, axis: Axis) -> SampledDensity:
    _check_axis(axis)
    dens = np.abs(psi.amplitudes) ** 2
    if axis == 1:
        return SampledDensity(psi.grid1.points, dens.sum(axis=1) * psi.grid2.spacing, psi.grid1.spacing)
    return SampledDensity(psi.grid2.points, dens.sum(axis=0) * psi.grid1.spacing, psi.grid2.spacing)


def density_stdev(density: SampledDensity) -> float:
    mass = density.mass
    if mass < DENSITY_FLOOR:
        raise InvalidInputError(f"density mass {mass:.3e} is too small for a standard deviation")
    mean = float(np.sum(density.points * density.values) * density.spacing / mass)
    var = float(np.sum((density.points - mean) ** 2 * density.values) * density.spacing / mass)
    return math.sqrt(max(var, 0.0))


def _first_minimum(f: np.ndarray, rise: float) -> int:
    """Offset of the first minimum along f that is followed by a climb of at least `rise`."""
    floor = np.minimum.accumulate(f)
    climbed = np.flatnonzero(f - floor >= rise)
    if climbed.size == 0:
        raise InvalidInputError("no minimum on both sides of the central maximum")
    return int(np.argmin(f[: climbed[0]]))


def first_minima_width(density: SampledDensity) -> float:
    """
    Distance between the first minima either side of the central maximum.

    The density is averaged over SMOOTH_NODES nodes first: hard slits leave a
    node-to-node ripple from their Nyquist-band content. A minimum only counts
    once the density climbs MINIMA_PROMINENCE of the peak beyond it. Each
    minimum is refined by a parabola through three nodes.
    """
    f = uniform_filter1d(np.asarray(density.values, dtype=float), SMOOTH_NODES, mode="nearest")
    i0 = int(np.argmax(f))
    rise = MINIMA_PROMINENCE * f[i0]
    right = i0 + _first_minimum(f[i0:], rise)
    left = i0 - _first_minimum(f[i0::-1], rise)

    def refine(i: int) -> float:
        a, b, c = f[i - 1], f[i], f[i + 1]
        curv = a - 2.0 * b + c
        shift = 0.5 * (a - c) / curv if curv > 0 else 0.0
        return float(density.points[i] + shift * density.spacing)

    return refine(right) - refine(left)


# ---------------------------------------------------------------------
# Detector-plane marginals through the Schmidt form
# ---------------------------------------------------------------------
def schmidt_decompose(psi: SampledWavefunction2D) -> SchmidtDecomposition:
    """SVD of the amplitude matrix; drops modes with weight below SCHMIDT_FLOOR * norm."""
    scale = math.sqrt(psi.cell)
    u, s, vh = la.svd(psi.amplitudes * scale, full_matrices=False)
    keep = s**2 >= SCHMIDT_FLOOR * max(psi.norm, np.finfo(float).tiny)
    r = max(1, int(np.count_nonzero(keep)))
    log.debug("Schmidt rank %d (of %d singular values)", r, s.size)
    return SchmidtDecomposition(
        grid1=psi.grid1,
        grid2=psi.grid2,
        coefficients=_readonly(s[:r], float),
        modes1=_readonly(u[:, :r].T / math.sqrt(psi.grid1.spacing)),
        modes2=_readonly(vh[:r, :] / math.sqrt(psi.grid2.spacing)),
    )


def padded_grid(grid: Grid1D, t: float, p: PhysicalParams, margin: float = 0.0) -> Grid1D:
    """Grid with the same nodes extended by the farthest distance a grid mode travels in t."""
    travel = NYQUIST_TRAVEL_FACTOR * p.hbar * grid.k_nyquist * t / p.mass
    return grid.padded(grid.y_max + travel + margin)


def _pad(values: np.ndarray, grid: Grid1D, big: Grid1D) -> np.ndarray:
    out = np.zeros(big.n_points, dtype=complex)
    start = big.center_index - grid.center_index
    out[start : start + grid.n_points] = values
    return out


def evolve_marginals(
    psi: Union[SampledWavefunction2D, SchmidtDecomposition],
    t: float,
    p: PhysicalParams,
    *,
    margin: float = 0.0,
    workers: Optional[int] = None,
) -> tuple[SampledDensity, SampledDensity]:
    """
    Detector-plane densities of both particles after free evolution.

    The propagator factorises over the axes, so the axis-k marginal is
    sum_j s_j^2 |U_k(t) mode_j|^2. Each mode is propagated alone on a padded
    1D grid, which lets the narrow-slit side spread far beyond the 2D grid.
    A precomputed SchmidtDecomposition may be passed instead of the state.
    """
    sd = psi if isinstance(psi, SchmidtDecomposition) else schmidt_decompose(psi)
    weights = sd.coefficients**2
    out: list[SampledDensity] = []
    for grid, modes in ((sd.grid1, sd.modes1), (sd.grid2, sd.modes2)):
        big = padded_grid(grid, t, p, margin)
        log.debug("padded %d -> %d nodes for t=%g", grid.n_points, big.n_points, t)
        acc = np.zeros(big.n_points)
        for w, mode in zip(weights, modes):
            wave = SampledWavefunction1D.from_amplitudes(big, _pad(mode, grid, big))
            evolved = propagate_free(wave, t, p, workers=workers)
            acc += w * np.abs(evolved.amplitudes) ** 2
        out.append(SampledDensity(big.points, acc, big.spacing))
    return out[0], out[1]
