# app/models/scenario.py
"""
Scenario configuration and result records for the slit experiment pipeline.

Configs are validated on construction; reports are plain frozen records that
serialise straight to JSON / CSV rows (see app.core.output).
"""

from __future__ import annotations

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.physics import PhysicalParams, PopperState


class GridSettings(BaseModel):
    """How fine and how wide the sampling grids are."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    # Grid nodes across the narrowest slit (rounded up to an odd count)
    nodes_across_slit: int = Field(default=11, ge=3)
    # Grid spacing is at most sigma / sigma_resolution
    sigma_resolution: int = Field(default=10, ge=4)
    # Axis half extent is alpha + extent_sigma_bars * sigma_bar
    extent_sigma_bars: float = Field(default=10.0, gt=0)
    # Extra distance added to padded 1D propagation grids, in sigma_bar
    pad_margin_sigma_bars: float = Field(default=10.0, ge=0)


class ScenarioConfig(BaseModel):
    """
    One run of the slit experiment. Build it through
    app.services.experiment.build_scenario to get the defaults
    (sigma = optimal width, alpha = 8 sigma, wide L slit) applied.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    alpha: float = Field(gt=0)
    sigma: float = Field(gt=0)
    slit_l_width: float = Field(gt=0, description="Width of the left slit (Delta).")
    slit_r_width: float = Field(gt=0, description="Width of the right slit (Delta, delta or sigma/n).")
    n: Optional[int] = Field(default=None, ge=1, description="Narrowing factor, slit_r_width = sigma/n.")
    t: float = Field(gt=0, description="Time of flight from the slits to the detectors.")
    p: PhysicalParams = Field(default_factory=PhysicalParams)
    grid: GridSettings = Field(default_factory=GridSettings)
    n_clicks: int = Field(default=0, ge=0, description="Monte Carlo detector clicks per side (0 = off).")
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check(self) -> "ScenarioConfig":
        if self.slit_l_width <= 2.0 * (self.alpha + self.sigma):
            raise ValueError(
                f"slit_l_width={self.slit_l_width} must exceed 2(alpha+sigma)={2.0 * (self.alpha + self.sigma)}"
            )
        if self.n is not None and not math.isclose(self.slit_r_width, self.sigma / self.n, rel_tol=1e-12):
            raise ValueError(f"slit_r_width must equal sigma/n={self.sigma / self.n} when n is set")
        # Also enforces the separation and norm conditions of the source state
        PopperState(alpha=self.alpha, sigma=self.sigma)
        return self

    @property
    def state(self) -> PopperState:
        return PopperState(alpha=self.alpha, sigma=self.sigma)


class ScenarioReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    slit_r_width: float
    n: Optional[int] = None
    sigma: float
    sigma_bar: float
    v: float = Field(description="Fresnel parameter of the right slit.")
    pass_probability: float = Field(ge=0, le=1)
    l_conditional_stdev: float = Field(ge=0)
    r_conditional_stdev: float = Field(ge=0)
    r_window: float = Field(gt=0, description="Half width of the R detector window the R stdev is taken over.")
    l_unconditional_marginal_distance: float = Field(
        ge=0, description="Sup-norm between passed+absorbed and no-R-slit L marginals."
    )
    r_width_firstminima: Optional[float] = Field(default=None, ge=0)
    predicted_ratio: float = Field(description="Fraunhofer width of the R pattern over 6 sigma_bar.")
    measured_ratio: Optional[float] = None
    schmidt_rank: int = Field(ge=1)
    l_click_stdev: Optional[float] = None
    r_click_stdev: Optional[float] = None
    seed: Optional[int] = None


class CollettLoudonParams(BaseModel):
    """Symbols of the rival L-scatter formula. d_src is the source-to-slit distance."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False, populate_by_name=True)

    s_r: float = Field(default=1.0, gt=0)
    d_src: float = Field(default=1.0, gt=0)
    r: float = Field(default=1.0, gt=0)
    lam: float = Field(default=1.0, gt=0, alias="lambda")


class ComparisonRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    s_r: float
    slit_r_width: float
    predicted_delta_l: float
    simulated_l_stdev: float
    predicted_change: float = Field(description="Relative change vs. the first row.")
    simulated_change: float = Field(description="Relative change vs. the first row.")


class ComparisonRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: CollettLoudonParams
    width_mapping: str = "slit_r_width = 2 * s_r"
    rows: list[ComparisonRow]
    s_r_minimizer: float
    min_predicted_delta_l: float
    true_crossover: float
    quoted_threshold: float
    predicted_ratio: float = Field(description="max/min of the prediction column.")
    simulated_ratio: float = Field(description="max/min of the simulated column.")
    divergence_s_r: Optional[float] = Field(
        default=None, description="First s_r where prediction moves > 50% and simulation < 2%."
    )

    @property
    def uncorrelated(self) -> bool:
        return self.divergence_s_r is not None


class EprProbeRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: float
    marginal_stdev: float
    analytic_stdev: float


class EprProbeResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float
    broad_width: float
    rows: list[EprProbeRow]

    @property
    def monotone(self) -> Optional[bool]:
        """Strictly increasing stdev as widths shrink; None for a single width."""
        if len(self.rows) < 2:
            return None
        s = [r.marginal_stdev for r in self.rows]
        return all(b > a for a, b in zip(s, s[1:]))


class SpreadRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma: float
    sigma_bar_analytic: float
    sigma_bar_grid: float
