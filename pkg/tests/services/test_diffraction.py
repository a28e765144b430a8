import logging
import math

import numpy as np
import pytest
from scipy.integrate import quad, trapezoid

from app.core.errors import InvalidInputError
from app.models.grid import Aperture, Grid1D
from app.models.slit import SlitEvolutionParams
from app.services import diffraction, gridprop


def test_fresnel_integrals_at_one():
    assert float(diffraction.fresnel_c(1.0)) == pytest.approx(0.77989, abs=1e-5)
    assert float(diffraction.fresnel_s(1.0)) == pytest.approx(0.43826, abs=1e-5)


@pytest.mark.parametrize("theta", [0.3, 1.7, 4.2])
def test_fresnel_integrals_match_quadrature(theta):
    c, _ = quad(lambda z: math.cos(math.pi * z * z / 2.0), 0.0, theta, limit=200, epsabs=1e-13, epsrel=1e-13)
    s, _ = quad(lambda z: math.sin(math.pi * z * z / 2.0), 0.0, theta, limit=200, epsabs=1e-13, epsrel=1e-13)
    assert float(diffraction.fresnel_c(theta)) == pytest.approx(c, abs=1e-10)
    assert float(diffraction.fresnel_s(theta)) == pytest.approx(s, abs=1e-10)


def test_fresnel_parameter(units):
    sp = SlitEvolutionParams(d=1.0, t=1.0, p=units)
    assert sp.v == pytest.approx(0.5 * math.sqrt(1.0 / math.pi))
    assert float(sp.u(2.0)) == pytest.approx(2.0 / math.sqrt(math.pi))


def test_near_field_is_the_slit_itself(units):
    # v = 10: the particle has barely left the slit
    d = 1.0
    t = (0.5 * d) ** 2 / (math.pi * 100.0)
    sp = SlitEvolutionParams(d=d, t=t, p=units)
    assert sp.v == pytest.approx(10.0)
    assert float(diffraction.slit_density_exact(0.0, sp)) == pytest.approx(1.0 / d, rel=0.1)
    assert float(diffraction.slit_density_exact(2.0 * d, sp)) < 0.01 / d


def test_exact_density_is_symmetric_and_normalised(units):
    sp = SlitEvolutionParams(d=1.0, t=0.05, p=units)
    y = np.linspace(-60.0, 60.0, 240001)
    dens = diffraction.slit_density_exact(y, sp)
    assert np.allclose(dens, dens[::-1])
    # The 1/y^2 tails beyond the window hold well under 1% of the mass
    assert trapezoid(dens, y) == pytest.approx(1.0, abs=0.01)


def test_far_field_peak(units):
    sp = SlitEvolutionParams(d=0.2, t=1.0, p=units)
    assert float(diffraction.slit_density_fraunhofer(0.0, sp)) == pytest.approx(0.2 / (2.0 * math.pi))


def test_far_field_matches_exact_for_small_v(units):
    d = 0.1 * math.sqrt(math.pi)
    sp = SlitEvolutionParams(d=d, t=1.0, p=units)
    assert sp.v == pytest.approx(0.05)
    assert diffraction.central_lobe_deviation(sp) < 0.01


def test_fraunhofer_width(units, caplog):
    sp = SlitEvolutionParams(d=1.0, t=1.0, p=units)
    with caplog.at_level(logging.WARNING, logger="app.services.diffraction"):
        assert diffraction.fraunhofer_width(sp) == pytest.approx(4.0 * math.pi)
    # v = 0.28 is past the far-field limit
    assert "far-field" in caplog.text


def test_fraunhofer_zeros(units):
    sp = SlitEvolutionParams(d=0.5, t=2.0, p=units)
    assert diffraction.fraunhofer_zero(1, sp) == pytest.approx(8.0 * math.pi)
    assert diffraction.fraunhofer_zero(-2, sp) == pytest.approx(-16.0 * math.pi)
    assert float(diffraction.slit_density_fraunhofer(diffraction.fraunhofer_zero(3, sp), sp)) < 1e-12
    with pytest.raises(InvalidInputError):
        diffraction.fraunhofer_zero(0, sp)


@pytest.mark.parametrize("n", [1, 2, 4, 8])
def test_scatter_ratio_grows_linearly(units, n):
    expected = 4.0 * math.pi / (3.0 * math.sqrt(2.0)) * n
    assert diffraction.scatter_ratio(n, 2.0, units) == pytest.approx(expected)
    assert diffraction.scatter_ratio(n, 2.0, units) == pytest.approx(2.962 * n, rel=1e-3)


def test_scatter_ratio_rejects_bad_n(units):
    with pytest.raises(InvalidInputError):
        diffraction.scatter_ratio(0, 2.0, units)


def test_regime_limit_in_units_of_optimal_width(units):
    t = 3.0
    sigma = math.sqrt(t / 2.0)
    assert diffraction.fraunhofer_regime_limit(t, units) / sigma == pytest.approx(2.0 * math.sqrt(2.0 * math.pi), abs=1e-12)


def test_density_curve_rows(units):
    sp = SlitEvolutionParams(d=1.0, t=1.0, p=units)
    curve = diffraction.density_curve(sp, 10.0, 11)
    rows = curve.rows()
    assert len(rows) == 11
    assert rows[5][0] == pytest.approx(0.0)
    assert rows[5][1] == pytest.approx(float(diffraction.slit_density_exact(0.0, sp)))
    with pytest.raises(InvalidInputError):
        diffraction.density_curve(sp, -1.0)


# ---------------------------------------------------------------------
# Grid propagation of the sampled slit as an independent oracle
# ---------------------------------------------------------------------
def propagated_slit(d, t, p, nodes_across=61):
    grid = gridprop.padded_grid(Grid1D.aligned(d, d, nodes_across), t, p)
    psi = gridprop.discretize_1d(Aperture(width=d), grid)
    return gridprop.propagate_free(psi, t, p).density()


@pytest.mark.parametrize("d, t", [(1.0, 0.05), (1.0, 0.5), (0.5, 1.0)])
def test_exact_density_matches_grid_on_central_lobe(units, d, t):
    sp = SlitEvolutionParams(d=d, t=t, p=units)
    dens = propagated_slit(d, t, units)
    lobe = dens.restrict(-diffraction.fraunhofer_zero(1, sp), diffraction.fraunhofer_zero(1, sp))
    exact = diffraction.slit_density_exact(lobe.points, sp)
    assert np.max(np.abs(lobe.values - exact)) / np.max(exact) < 0.01


def test_first_minima_spacing_on_grid(units):
    d, t = 0.2, 1.0
    dens = propagated_slit(d, t, units, nodes_across=31)
    assert gridprop.first_minima_width(dens) == pytest.approx(4.0 * math.pi * t / d, rel=5e-3)


def test_far_field_error_shrinks_with_v(units):
    deviations = []
    for v in (0.5, 0.2, 0.1, 0.05, 0.02):
        sp = SlitEvolutionParams(d=2.0 * v * math.sqrt(math.pi), t=1.0, p=units)
        assert sp.v == pytest.approx(v)
        deviations.append(diffraction.central_lobe_deviation(sp))
    assert all(b < a for a, b in zip(deviations, deviations[1:]))
