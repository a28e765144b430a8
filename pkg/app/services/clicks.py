# app/services/clicks.py
"""Monte Carlo detector clicks drawn from a sampled density."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from app.core.errors import InvalidInputError
from app.services.gridprop import SampledDensity


@dataclass(frozen=True)
class ClickHistogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def stdev(self) -> float:
        if self.total == 0:
            raise InvalidInputError("no clicks recorded")
        w = self.counts / self.total
        mean = float(np.sum(w * self.centers))
        return math.sqrt(float(np.sum(w * (self.centers - mean) ** 2)))


def bin_probabilities(density: SampledDensity, edges: np.ndarray) -> np.ndarray:
    cdf = cumulative_trapezoid(density.values, density.points, initial=0.0)
    probs = np.clip(np.diff(np.interp(edges, density.points, cdf)), 0.0, None)
    total = probs.sum()
    if total <= 0:
        raise InvalidInputError("density has no mass inside the detector array")
    return probs / total


def sample_clicks(
    density: SampledDensity,
    n_clicks: int,
    bin_width: float,
    rng: np.random.Generator,
) -> ClickHistogram:
    """
    Counter array of bins of `bin_width` centred on 0 and covering the density;
    counts are one multinomial draw of n_clicks.
    """
    if n_clicks < 1 or bin_width <= 0:
        raise InvalidInputError("n_clicks must be >= 1 and bin_width > 0")
    reach = max(abs(density.points[0]), abs(density.points[-1]))
    half_bins = int(math.floor(reach / bin_width - 0.5))
    if half_bins < 0:
        raise InvalidInputError("bin_width is wider than the detector window")
    edges = bin_width * (np.arange(-half_bins, half_bins + 2) - 0.5)
    counts = rng.multinomial(n_clicks, bin_probabilities(density, edges))
    return ClickHistogram(edges=edges, counts=counts)
