# app/services/experiment.py
"""
End-to-end slit experiment.

run_popper:
  sample the source state -> L slit -> R slit -> record pass probability and
  the unconditional L marginal -> keep the coincidence branch -> evolve to
  the detectors -> L/R scatter, R first-minima width, optional clicks.

Also holds the rival L-scatter formula and its comparison sweep, the spread
scan behind the optimal initial width, and the correlated-Gaussian probe of
the perfectly correlated limit.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np
from pydantic import ValidationError
from scipy.optimize import minimize_scalar

from app.core.config import get_settings
from app.core.errors import InvalidInputError
from app.models.grid import Aperture, Grid1D
from app.models.physics import GaussianMode, PhysicalParams
from app.models.scenario import (
    CollettLoudonParams,
    ComparisonRecord,
    ComparisonRow,
    EprProbeResult,
    EprProbeRow,
    GridSettings,
    ScenarioConfig,
    ScenarioReport,
    SpreadRow,
)
from app.models.slit import SlitEvolutionParams
from app.services import gridprop
from app.services.clicks import sample_clicks
from app.services.diffraction import FRAUNHOFER_V_MAX, fraunhofer_zero
from app.services.gaussian import gaussian_amplitude, optimal_sigma, spread_after_time

log = logging.getLogger(__name__)

BASELINE_SLIT_SIGMAS = 6.0
DEFAULT_SLIT_L_SIGMAS = 6.0
DEFAULT_S_R_LIST = (0.03, 0.05, 0.1, 0.2, 0.3)
EPR_BROAD_SIGMAS = 4.0
# Click histogram bin = 6 sigma_bar / CLICK_BINS_PER_SPOT
CLICK_BINS_PER_SPOT = 10
# R counters reach this many far-field zeros out
R_WINDOW_ZEROS = 4.0

T = TypeVar("T")
R = TypeVar("R")


def _ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: Optional[int]) -> list[R]:
    workers = get_settings().SWEEP_WORKERS if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------
# Scenario construction
# ---------------------------------------------------------------------
def build_scenario(
    *,
    t: float = 2.0,
    p: Optional[PhysicalParams] = None,
    sigma: Optional[float] = None,
    alpha: Optional[float] = None,
    slit_l_width: Optional[float] = None,
    slit_r_width: Optional[float] = None,
    n: Optional[int] = None,
    grid: Optional[GridSettings] = None,
    n_clicks: int = 0,
    seed: Optional[int] = None,
) -> ScenarioConfig:
    """
    ScenarioConfig with defaults: sigma = optimal width for t, alpha = 8 sigma,
    L slit 2(alpha + 6 sigma), R slit sigma/n or the 6 sigma baseline.
    """
    p = p or PhysicalParams()
    try:
        sigma = optimal_sigma(t, p) if sigma is None else sigma
        alpha = 8.0 * sigma if alpha is None else alpha
        if slit_l_width is None:
            slit_l_width = 2.0 * (alpha + DEFAULT_SLIT_L_SIGMAS * sigma)
        if slit_r_width is None:
            slit_r_width = sigma / n if n is not None else BASELINE_SLIT_SIGMAS * sigma
        return ScenarioConfig(
            alpha=alpha,
            sigma=sigma,
            slit_l_width=slit_l_width,
            slit_r_width=slit_r_width,
            n=n,
            t=t,
            p=p,
            grid=grid or GridSettings(),
            n_clicks=n_clicks,
            seed=seed,
        )
    except ValidationError as exc:
        raise InvalidInputError(f"invalid scenario: {exc}") from exc


def with_r_slit(config: ScenarioConfig, *, n: Optional[int] = None, width: Optional[float] = None) -> ScenarioConfig:
    """Same scenario with another R slit: sigma/n, an explicit width, or the baseline."""
    if width is None:
        width = config.sigma / n if n is not None else BASELINE_SLIT_SIGMAS * config.sigma
    data = config.model_dump()
    data.update(n=n, slit_r_width=width)
    try:
        return ScenarioConfig(**data)
    except ValidationError as exc:
        raise InvalidInputError(f"invalid scenario: {exc}") from exc


def scenario_grids(config: ScenarioConfig) -> tuple[Grid1D, Grid1D]:
    """Axis 1 resolves sigma; axis 2 also has slit_r_width spanning an odd number of nodes."""
    gs = config.grid
    sigma_bar = spread_after_time(config.sigma, config.t, config.p)
    half = config.alpha + gs.extent_sigma_bars * sigma_bar
    grid1 = Grid1D.centered(half, config.sigma / gs.sigma_resolution)
    across = max(gs.nodes_across_slit, math.ceil(gs.sigma_resolution * config.slit_r_width / config.sigma))
    grid2 = Grid1D.aligned(half, config.slit_r_width, across)
    return grid1, grid2


# ---------------------------------------------------------------------
# Popper scenario
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class PopperRun:
    """Report plus the detector-window densities it was measured on."""

    report: ScenarioReport
    l_density: gridprop.SampledDensity
    r_density: gridprop.SampledDensity


def simulate_popper(config: ScenarioConfig, *, workers: Optional[int] = None) -> PopperRun:
    p, t = config.p, config.t
    sigma_bar = spread_after_time(config.sigma, t, p)
    grid1, grid2 = scenario_grids(config)
    log.debug("grids: axis 1 %d nodes (dy=%.4g), axis 2 %d nodes (dy=%.4g)",
              grid1.n_points, grid1.spacing, grid2.n_points, grid2.spacing)

    psi = gridprop.discretize_2d(config.state, grid1, grid2)
    left = gridprop.apply_aperture(psi, 1, Aperture(width=config.slit_l_width))
    right = gridprop.apply_aperture(left.passed, 2, Aperture(width=config.slit_r_width))

    # What L sees without coincidence selection is untouched by the R slit
    baseline_l = gridprop.marginal_density(left.passed, 1)
    split_l = gridprop.marginal_density(right.passed, 1) + gridprop.marginal_density(right.absorbed, 1)
    l_distance = float(np.max(np.abs(split_l.values - baseline_l.values)))

    post = gridprop.condition_on_coincidence(right.passed)
    sd = gridprop.schmidt_decompose(post)
    dens_l, dens_r = gridprop.evolve_marginals(
        sd, t, p, margin=config.grid.pad_margin_sigma_bars * sigma_bar, workers=workers
    )

    sp = SlitEvolutionParams(d=config.slit_r_width, t=t, p=p)
    window = config.alpha + config.grid.extent_sigma_bars * sigma_bar
    # A narrow R slit spreads far past the L counters
    r_window = max(window, R_WINDOW_ZEROS * fraunhofer_zero(1, sp))
    seen_l = dens_l.restrict(-window, window)
    seen_r = dens_r.restrict(-r_window, r_window)

    predicted = 2.0 * fraunhofer_zero(1, sp) / (6.0 * sigma_bar)
    r_width = gridprop.first_minima_width(dens_r) if sp.v <= FRAUNHOFER_V_MAX else None

    l_clicks = r_clicks = None
    seed = config.seed
    if config.n_clicks > 0:
        seed = get_settings().DEFAULT_SEED if seed is None else seed
        rng = np.random.default_rng(seed)
        bin_width = 6.0 * sigma_bar / CLICK_BINS_PER_SPOT
        l_clicks = sample_clicks(seen_l, config.n_clicks, bin_width, rng).stdev()
        r_clicks = sample_clicks(seen_r, config.n_clicks, bin_width, rng).stdev()

    report = ScenarioReport(
        slit_r_width=config.slit_r_width,
        n=config.n,
        sigma=config.sigma,
        sigma_bar=sigma_bar,
        v=sp.v,
        pass_probability=right.pass_probability,
        l_conditional_stdev=gridprop.density_stdev(seen_l),
        r_conditional_stdev=gridprop.density_stdev(seen_r),
        r_window=r_window,
        l_unconditional_marginal_distance=l_distance,
        r_width_firstminima=r_width,
        predicted_ratio=predicted,
        measured_ratio=None if r_width is None else r_width / (6.0 * sigma_bar),
        schmidt_rank=sd.rank,
        l_click_stdev=l_clicks,
        r_click_stdev=r_clicks,
        seed=seed,
    )
    log.info(
        "slit_r=%.4g n=%s: pass=%.4f L stdev=%.4f R stdev=%.4f R width=%s",
        report.slit_r_width, report.n, report.pass_probability, report.l_conditional_stdev,
        report.r_conditional_stdev, "n/a" if r_width is None else f"{r_width:.4g}",
    )
    return PopperRun(report=report, l_density=seen_l, r_density=seen_r)


def run_popper(config: ScenarioConfig, *, workers: Optional[int] = None) -> ScenarioReport:
    return simulate_popper(config, workers=workers).report


def popper_sweep_runs(
    base: ScenarioConfig,
    n_list: Iterable[int],
    *,
    workers: Optional[int] = None,
) -> list[PopperRun]:
    """Baseline 6 sigma slit first, then one scenario per n, in input order."""
    configs = [with_r_slit(base)] + [with_r_slit(base, n=int(n)) for n in n_list]
    return _ordered_map(simulate_popper, configs, workers)


def popper_sweep(
    base: ScenarioConfig,
    n_list: Iterable[int],
    *,
    workers: Optional[int] = None,
) -> list[ScenarioReport]:
    return [run.report for run in popper_sweep_runs(base, n_list, workers=workers)]


# ---------------------------------------------------------------------
# Rival L-scatter formula
# ---------------------------------------------------------------------
def _cl_terms(cl: CollettLoudonParams) -> tuple[float, float]:
    return (cl.d_src + cl.r) / cl.d_src, cl.r * cl.lam / (4.0 * math.pi)


def collett_loudon_delta_L(cl: CollettLoudonParams) -> float:
    """sqrt((((d+r)/d) s_R)^2 + (r lambda / (4 pi s_R))^2)."""
    a, b = _cl_terms(cl)
    return math.hypot(a * cl.s_r, b / cl.s_r)


def collett_loudon_minimizer(cl: CollettLoudonParams) -> tuple[float, float]:
    """(s_R minimising the formula, minimum value); s_R is also where both terms are equal."""
    a, b = _cl_terms(cl)
    return math.sqrt(b / a), math.sqrt(2.0 * a * b)


def quoted_dominance_threshold(cl: CollettLoudonParams) -> float:
    """sqrt(r / (d + r)), the dominance condition as usually quoted (no lambda)."""
    return math.sqrt(cl.r / (cl.d_src + cl.r))


def refute_collett_loudon(
    cl: CollettLoudonParams,
    base: ScenarioConfig,
    s_r_list: Sequence[float] = DEFAULT_S_R_LIST,
    *,
    workers: Optional[int] = None,
) -> ComparisonRecord:
    """
    Tabulate the formula against the simulated conditional L scatter over s_R,
    with the R slit width set to 2 s_R.
    """
    s_values = [float(s) for s in s_r_list]
    if not s_values or any(s <= 0 for s in s_values):
        raise InvalidInputError("s_r values must be positive and non-empty")
    configs = [with_r_slit(base, width=2.0 * s) for s in s_values]
    reports = _ordered_map(run_popper, configs, workers)

    predicted = [collett_loudon_delta_L(cl.model_copy(update={"s_r": s})) for s in s_values]
    simulated = [r.l_conditional_stdev for r in reports]
    rows = [
        ComparisonRow(
            s_r=s,
            slit_r_width=2.0 * s,
            predicted_delta_l=pr,
            simulated_l_stdev=sim,
            predicted_change=pr / predicted[0] - 1.0,
            simulated_change=sim / simulated[0] - 1.0,
        )
        for s, pr, sim in zip(s_values, predicted, simulated)
    ]
    divergence = next(
        (r.s_r for r in rows if abs(r.predicted_change) > 0.5 and abs(r.simulated_change) < 0.02),
        None,
    )
    s_star, d_min = collett_loudon_minimizer(cl)
    record = ComparisonRecord(
        params=cl,
        rows=rows,
        s_r_minimizer=s_star,
        min_predicted_delta_l=d_min,
        true_crossover=s_star,
        quoted_threshold=quoted_dominance_threshold(cl),
        predicted_ratio=max(predicted) / min(predicted),
        simulated_ratio=max(simulated) / min(simulated),
        divergence_s_r=divergence,
    )
    log.info(
        "comparison: prediction varies x%.3f, simulation x%.4f", record.predicted_ratio, record.simulated_ratio
    )
    return record


# ---------------------------------------------------------------------
# Spread law on the grid
# ---------------------------------------------------------------------
def grid_spread(sigma: float, t: float, p: PhysicalParams, *, workers: Optional[int] = None) -> float:
    """Stdev of a grid-propagated Gaussian of initial width sigma."""
    sigma_bar = spread_after_time(sigma, t, p)
    grid = Grid1D.centered(14.0 * sigma_bar, min(sigma, sigma_bar) / 20.0)
    psi = gridprop.discretize_1d(GaussianMode(mean=0.0, sigma=sigma), grid)
    return gridprop.density_stdev(gridprop.propagate_free(psi, t, p, workers=workers).density())


def spread_scan(t: float, p: PhysicalParams, sigmas: Iterable[float]) -> list[SpreadRow]:
    rows = []
    for s in sigmas:
        if not s > 0:
            raise InvalidInputError(f"sigma must be > 0, got {s}")
        rows.append(SpreadRow(sigma=s, sigma_bar_analytic=spread_after_time(s, t, p), sigma_bar_grid=grid_spread(s, t, p)))
    return rows


def locate_spread_minimum(t: float, p: PhysicalParams, *, span: float = 4.0) -> float:
    """Initial width minimising the grid-propagated spread, searched in [s*/span, s* span]."""
    s_star = optimal_sigma(t, p)
    res = minimize_scalar(
        lambda s: grid_spread(s, t, p),
        bounds=(s_star / span, s_star * span),
        method="bounded",
        options={"xatol": 1e-4 * s_star},
    )
    log.info("grid spread minimum at sigma=%.6g (optimal %.6g)", res.x, s_star)
    return float(res.x)


def default_spread_sigmas(t: float, p: PhysicalParams) -> list[float]:
    s_star = optimal_sigma(t, p)
    return [s_star * f for f in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0)]


# ---------------------------------------------------------------------
# Correlated-Gaussian probe of the perfectly correlated limit
# ---------------------------------------------------------------------
def epr_probe_analytic_stdev(width: float, broad_width: float, t: float, p: PhysicalParams) -> float:
    """Marginal stdev of G_width((y1+y2)/sqrt2) G_broad((y1-y2)/sqrt2) after time t."""
    s = spread_after_time(width, t, p)
    d = spread_after_time(broad_width, t, p)
    return math.sqrt(0.5 * (s * s + d * d))


def epr_limit_probe(
    correlation_widths: Sequence[float],
    t: float,
    p: PhysicalParams,
    *,
    broad_width: Optional[float] = None,
    workers: Optional[int] = None,
) -> EprProbeResult:
    """
    For each width w: a two-particle Gaussian sharp (width w) along y1+y2 and
    broad along y1-y2, evolved for t on one grid; returns the y1 marginal stdev.
    """
    widths = [float(w) for w in correlation_widths]
    if not widths or any(not w > 0 for w in widths):
        raise InvalidInputError("correlation widths must be positive and non-empty")
    if any(b >= a for a, b in zip(widths, widths[1:])):
        raise InvalidInputError(f"correlation widths must be strictly descending, got {widths}")
    if not math.isfinite(t) or t < 0:
        raise InvalidInputError(f"t must be >= 0, got {t}")
    if broad_width is None:
        ref = optimal_sigma(t, p) if t > 0 else widths[0]
        broad_width = EPR_BROAD_SIGMAS * ref

    largest = max(epr_probe_analytic_stdev(w, broad_width, t, p) for w in widths)
    grid = Grid1D.centered(8.0 * largest, min(widths) / 8.0)
    y = grid.points
    s_coord = (y[:, None] + y[None, :]) / math.sqrt(2.0)
    d_coord = (y[:, None] - y[None, :]) / math.sqrt(2.0)
    broad = gaussian_amplitude(GaussianMode(sigma=broad_width), d_coord)
    log.debug("probe grid %d^2 nodes, dy=%.4g", grid.n_points, grid.spacing)

    rows = []
    for w in widths:
        amps = gaussian_amplitude(GaussianMode(sigma=w), s_coord) * broad
        psi = gridprop.normalize(gridprop.SampledWavefunction2D.from_amplitudes(grid, grid, amps))
        evolved = gridprop.propagate_free(psi, t, p, workers=workers)
        stdev = gridprop.density_stdev(gridprop.marginal_density(evolved, 1))
        rows.append(EprProbeRow(width=w, marginal_stdev=stdev, analytic_stdev=epr_probe_analytic_stdev(w, broad_width, t, p)))
        log.info("probe width %.4g: marginal stdev %.5g", w, stdev)
    return EprProbeResult(t=t, broad_width=broad_width, rows=rows)
