# app/models/slit.py
from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.models.physics import PhysicalParams


class SlitEvolutionParams(BaseModel):
    """
    Single slit of width d, flight time t.

    The Fresnel arguments are u = y2*scale and v = (d/2)*scale with
    scale = sqrt(m / (pi hbar t)). They are derived on access.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    d: float = Field(gt=0, description="Slit width.")
    t: float = Field(gt=0, description="Time of flight from slit to detector.")
    p: PhysicalParams = Field(default_factory=PhysicalParams)

    @property
    def scale(self) -> float:
        return math.sqrt(self.p.mass / (math.pi * self.p.hbar * self.t))

    @property
    def v(self) -> float:
        return 0.5 * self.d * self.scale

    def u(self, y2: float | np.ndarray) -> float | np.ndarray:
        return np.asarray(y2, dtype=float) * self.scale
