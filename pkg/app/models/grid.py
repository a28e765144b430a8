# app/models/grid.py
from __future__ import annotations

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

MIN_POINTS = 64


def _next_pow2(n: int) -> int:
    return 1 << max(0, math.ceil(math.log2(max(n, 1))))


class Grid1D(BaseModel):
    """
    Uniform periodic grid: nodes y_min + j*spacing for j = 0..n_points-1,
    spacing = (y_max - y_min) / n_points. n_points is a power of two >= 64.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    y_min: float
    y_max: float
    n_points: int = Field(ge=MIN_POINTS)

    @model_validator(mode="after")
    def _check(self) -> "Grid1D":
        if not self.y_min < self.y_max:
            raise ValueError(f"y_min={self.y_min} must be below y_max={self.y_max}")
        if self.n_points & (self.n_points - 1):
            raise ValueError(f"n_points={self.n_points} is not a power of two")
        return self

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def centered(cls, half_extent: float, spacing: float) -> "Grid1D":
        """Grid with a node at 0 covering at least [-half_extent, half_extent]."""
        if half_extent <= 0 or spacing <= 0:
            raise ValueError("half_extent and spacing must be positive")
        n = max(MIN_POINTS, _next_pow2(math.ceil(2.0 * half_extent / spacing)))
        half = n // 2
        return cls(y_min=-half * spacing, y_max=half * spacing, n_points=n)

    @classmethod
    def aligned(cls, half_extent: float, feature_width: float, nodes_across: int) -> "Grid1D":
        """
        Centred grid whose spacing is feature_width / (odd integer >= nodes_across).

        A centred aperture of width feature_width then has its edges halfway
        between nodes, so it covers exactly `odd` nodes.
        """
        odd = max(1, int(nodes_across))
        if odd % 2 == 0:
            odd += 1
        return cls.centered(half_extent, feature_width / odd)

    # ------------------------------------------------------------------
    # Derived values
    # ------------------------------------------------------------------
    @property
    def spacing(self) -> float:
        return (self.y_max - self.y_min) / self.n_points

    @property
    def points(self) -> np.ndarray:
        return self.y_min + self.spacing * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    @property
    def k_nyquist(self) -> float:
        return math.pi / self.spacing

    @property
    def center_index(self) -> int:
        return int(round(-self.y_min / self.spacing))

    def padded(self, half_extent: float) -> "Grid1D":
        """Same spacing and node alignment, extended to cover +-half_extent."""
        if -self.y_min != self.y_max:
            raise ValueError("only centred grids can be padded")
        if half_extent <= self.y_max:
            return self
        spacing = self.spacing
        n = _next_pow2(math.ceil(2.0 * half_extent / spacing))
        half = n // 2
        return Grid1D(y_min=-half * spacing, y_max=half * spacing, n_points=n)


class Aperture(BaseModel):
    """Hard slit: transmission is the characteristic function of the interval."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    center: float = 0.0
    width: float = Field(gt=0)
    kind: Literal["hard"] = "hard"

    @property
    def lower(self) -> float:
        return self.center - 0.5 * self.width

    @property
    def upper(self) -> float:
        return self.center + 0.5 * self.width

    def fits(self, grid: Grid1D) -> bool:
        return grid.y_min <= self.lower and self.upper <= grid.y_max

    def mask(self, points: np.ndarray) -> np.ndarray:
        # Tolerance keeps nominal edges that land on a node inside the slit
        tol = 1e-9 * self.width
        return np.abs(np.asarray(points) - self.center) <= 0.5 * self.width + tol

    def characteristic(self, points: np.ndarray) -> np.ndarray:
        """Normalised characteristic function 1/sqrt(width) on the slit."""
        return self.mask(points) / math.sqrt(self.width)
