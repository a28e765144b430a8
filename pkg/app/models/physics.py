# app/models/physics.py
"""
Analytic parameter types: physical constants, single Gaussian packets and the
three-branch entangled source state.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Minimum alpha / sigma for the source state (branches "almost orthogonal")
MIN_SEPARATION = 8.0
# Allowed deviation of the analytic norm from 1
NORM_EPS = 1e-6
BRANCH_WEIGHT = 1.0 / math.sqrt(3.0)


class PhysicalParams(BaseModel):
    """hbar and particle mass; natural units by default."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    hbar: float = Field(default=1.0, gt=0, description="Reduced Planck constant.")
    mass: float = Field(default=1.0, gt=0, description="Particle mass.")


class GaussianMode(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    mean: float = Field(default=0.0, description="Centre beta of the packet.")
    sigma: float = Field(gt=0, description="Position standard deviation at t=0.")


class PopperState(BaseModel):
    """
    (1/sqrt3) [psi_{a}(y1) psi_{-a}(y2) + psi_0(y1) psi_0(y2) + psi_{-a}(y1) psi_{a}(y2)]

    All six packets share the width sigma. alpha >= 8 sigma is enforced so the
    branches are nearly orthogonal and the state norm is 1 within NORM_EPS.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    alpha: float = Field(gt=0, description="Offset of the outer branches.")
    sigma: float = Field(gt=0, description="Width of every packet.")

    @model_validator(mode="after")
    def _check_separation(self) -> "PopperState":
        if self.alpha < MIN_SEPARATION * self.sigma * (1.0 - 1e-12):
            raise ValueError(
                f"alpha={self.alpha} must be at least {MIN_SEPARATION:g}*sigma={MIN_SEPARATION * self.sigma}"
            )
        if abs(math.sqrt(self.squared_norm) - 1.0) > NORM_EPS:
            raise ValueError(f"state norm deviates from 1 by more than {NORM_EPS:g}")
        return self

    @property
    def weight(self) -> float:
        return BRANCH_WEIGHT

    @property
    def branches(self) -> tuple[tuple[float, float], ...]:
        """(mean y1, mean y2) of each branch."""
        a = self.alpha
        return ((a, -a), (0.0, 0.0), (-a, a))

    @property
    def squared_norm(self) -> float:
        # Cross terms: overlaps exp(-D^2/8s^2) per factor, D = alpha or 2 alpha
        r = (self.alpha / self.sigma) ** 2
        return 1.0 + (4.0 / 3.0) * math.exp(-r / 4.0) + (2.0 / 3.0) * math.exp(-r)
