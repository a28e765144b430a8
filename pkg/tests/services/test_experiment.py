import math

import pytest
from scipy.integrate import quad

from app.core.errors import InvalidInputError
from app.models.scenario import CollettLoudonParams, EprProbeResult, EprProbeRow
from app.models.slit import SlitEvolutionParams
from app.services import experiment, gridprop
from app.services.diffraction import fraunhofer_zero, slit_density_fraunhofer
from app.services.gaussian import optimal_sigma

SIGMA_BAR = math.sqrt(2.0)


# ---------------------------------------------------------------------
# Scenario construction
# ---------------------------------------------------------------------
def test_scenario_defaults(units):
    cfg = experiment.build_scenario(t=2.0, p=units)
    assert cfg.sigma == pytest.approx(1.0)
    assert cfg.alpha == pytest.approx(8.0)
    assert cfg.slit_l_width == pytest.approx(28.0)
    assert cfg.slit_r_width == pytest.approx(6.0)
    assert cfg.n is None


def test_narrowed_slit(units):
    base = experiment.build_scenario(t=2.0, p=units)
    cfg = experiment.with_r_slit(base, n=4)
    assert cfg.slit_r_width == pytest.approx(0.25)
    assert cfg.n == 4
    assert experiment.with_r_slit(cfg).slit_r_width == pytest.approx(6.0)


def test_scenario_rejects_narrow_left_slit(units):
    with pytest.raises(InvalidInputError):
        experiment.build_scenario(t=2.0, p=units, slit_l_width=10.0)


def test_scenario_rejects_close_branches(units):
    with pytest.raises(InvalidInputError):
        experiment.build_scenario(t=2.0, p=units, alpha=5.0)


def test_axis_two_grid_aligned_to_slit(units):
    cfg = experiment.build_scenario(t=2.0, p=units, n=2)
    _, grid2 = experiment.scenario_grids(cfg)
    across = cfg.slit_r_width / grid2.spacing
    assert across == pytest.approx(round(across))
    assert round(across) % 2 == 1


# ---------------------------------------------------------------------
# Popper runs
# ---------------------------------------------------------------------
def test_baseline_run(units):
    report = experiment.run_popper(experiment.build_scenario(t=2.0, p=units))
    assert report.sigma_bar == pytest.approx(SIGMA_BAR)
    assert report.pass_probability == pytest.approx(0.3324, abs=0.002)
    assert report.l_conditional_stdev == pytest.approx(SIGMA_BAR, rel=0.01)
    # The truncated right packet picks up 1/k^2 momentum tails
    assert report.r_conditional_stdev == pytest.approx(SIGMA_BAR, rel=0.05)
    assert report.l_unconditional_marginal_distance < 1e-12
    # 6 sigma slit is outside the far-field regime
    assert report.r_width_firstminima is None
    assert report.measured_ratio is None


def test_narrowed_run_matches_far_field(units):
    cfg = experiment.build_scenario(t=2.0, p=units, n=2)
    report = experiment.run_popper(cfg)
    assert report.n == 2
    assert report.v <= 0.25
    assert report.predicted_ratio == pytest.approx(2.962 * 2, rel=1e-3)
    assert report.measured_ratio == pytest.approx(report.predicted_ratio, rel=0.1)
    assert report.l_conditional_stdev == pytest.approx(SIGMA_BAR, rel=0.01)
    assert report.l_unconditional_marginal_distance < 1e-12


def far_field_stdev(sp, half):
    mass = quad(lambda y: float(slit_density_fraunhofer(y, sp)), -half, half, limit=400)[0]
    second = quad(lambda y: y * y * float(slit_density_fraunhofer(y, sp)), -half, half, limit=400)[0]
    return math.sqrt(second / mass)


def test_right_scatter_follows_the_narrow_slit(units):
    base = experiment.build_scenario(t=2.0, p=units)
    stdevs = []
    for n in (2, 4):
        run = experiment.simulate_popper(experiment.with_r_slit(base, n=n))
        report = run.report
        sp = SlitEvolutionParams(d=1.0 / n, t=2.0, p=units)
        # Counters cover four far-field zeros, well past the L window
        assert report.r_window == pytest.approx(4.0 * fraunhofer_zero(1, sp))
        assert report.r_window > 8.0 + 10.0 * SIGMA_BAR
        assert run.r_density.points[-1] == pytest.approx(report.r_window, abs=2 * run.r_density.spacing)
        assert report.r_conditional_stdev == pytest.approx(far_field_stdev(sp, report.r_window), rel=0.05)
        stdevs.append(report.r_conditional_stdev)
    assert stdevs[1] / stdevs[0] == pytest.approx(2.0, rel=0.05)


def test_detector_densities_are_kept(units):
    run = experiment.simulate_popper(experiment.build_scenario(t=2.0, p=units))
    window = 8.0 + 10.0 * SIGMA_BAR
    assert run.report.r_window == pytest.approx(window)
    assert run.l_density.points[0] >= -window
    assert run.l_density.mass == pytest.approx(1.0, abs=1e-3)
    assert gridprop.density_stdev(run.l_density) == pytest.approx(run.report.l_conditional_stdev)


def test_clicks_default_to_settings_seed(units):
    cfg = experiment.build_scenario(t=2.0, p=units, n_clicks=5000)
    report = experiment.run_popper(cfg)
    assert report.seed == 12345
    assert report.l_click_stdev == pytest.approx(report.l_conditional_stdev, rel=0.05)
    again = experiment.run_popper(cfg)
    assert again.l_click_stdev == report.l_click_stdev


@pytest.mark.slow
def test_sweep_leaves_left_scatter_alone(units):
    base = experiment.build_scenario(t=2.0, p=units)
    reports = experiment.popper_sweep(base, [2, 4, 8])
    assert [r.n for r in reports] == [None, 2, 4, 8]

    l_values = [r.l_conditional_stdev for r in reports]
    assert max(l_values) / min(l_values) < 1.02
    for r in reports:
        assert r.l_conditional_stdev == pytest.approx(SIGMA_BAR, rel=0.01)

    narrowed = reports[1:]
    for r in narrowed:
        assert r.measured_ratio == pytest.approx(2.962 * r.n, rel=0.1)
    # R width grows linearly with n
    assert narrowed[2].r_width_firstminima / narrowed[0].r_width_firstminima == pytest.approx(4.0, rel=0.1)


# ---------------------------------------------------------------------
# Rival L-scatter formula
# ---------------------------------------------------------------------
def test_rival_formula_at_unit_parameters():
    cl = CollettLoudonParams(s_r=1.0, d_src=1.0, r=1.0, lam=1.0)
    assert experiment.collett_loudon_delta_L(cl) == pytest.approx(math.sqrt(4.0 + 1.0 / (16.0 * math.pi**2)))
    assert experiment.collett_loudon_delta_L(cl) == pytest.approx(2.00158, abs=1e-5)


def test_rival_formula_minimum():
    cl = CollettLoudonParams()
    s_star, d_min = experiment.collett_loudon_minimizer(cl)
    assert s_star == pytest.approx((64.0 * math.pi**2) ** -0.25)
    assert s_star == pytest.approx(0.19947, abs=1e-5)
    assert experiment.collett_loudon_delta_L(cl.model_copy(update={"s_r": s_star})) == pytest.approx(d_min)
    for factor in (0.9, 1.1):
        assert experiment.collett_loudon_delta_L(cl.model_copy(update={"s_r": factor * s_star})) > d_min


def test_quoted_threshold_ignores_wavelength():
    a = CollettLoudonParams(d_src=3.0, r=1.0, lam=1.0)
    b = CollettLoudonParams(d_src=3.0, r=1.0, lam=50.0)
    assert experiment.quoted_dominance_threshold(a) == pytest.approx(0.5)
    assert experiment.quoted_dominance_threshold(b) == experiment.quoted_dominance_threshold(a)
    assert experiment.collett_loudon_minimizer(b)[0] != experiment.collett_loudon_minimizer(a)[0]


def test_lambda_alias():
    cl = CollettLoudonParams.model_validate({"lambda": 2.0})
    assert cl.lam == 2.0
    assert cl.model_dump(by_alias=True)["lambda"] == 2.0


def test_comparison_rejects_bad_widths(units):
    base = experiment.build_scenario(t=2.0, p=units)
    with pytest.raises(InvalidInputError):
        experiment.refute_collett_loudon(CollettLoudonParams(), base, [0.1, -0.2])


@pytest.mark.slow
def test_simulation_ignores_rival_prediction(units):
    base = experiment.build_scenario(t=2.0, p=units)
    # One decade of s_R around the formula minimum
    record = experiment.refute_collett_loudon(CollettLoudonParams(), base, [0.03, 0.05, 0.1, 0.2, 0.3])
    assert [r.slit_r_width for r in record.rows] == pytest.approx([0.06, 0.1, 0.2, 0.4, 0.6])
    assert record.rows[-1].predicted_change == pytest.approx(0.656 / 2.654 - 1.0, abs=0.01)
    assert record.predicted_ratio > 2.0
    assert record.simulated_ratio < 1.02
    assert all(abs(r.simulated_change) < 0.02 for r in record.rows)
    assert record.divergence_s_r == pytest.approx(0.1)
    assert record.uncorrelated


# ---------------------------------------------------------------------
# Spread law on the grid
# ---------------------------------------------------------------------
def test_grid_spread_matches_law(units):
    assert experiment.grid_spread(1.0, 2.0, units) == pytest.approx(SIGMA_BAR, rel=1e-3)
    assert experiment.grid_spread(0.5, 2.0, units) == pytest.approx(0.5 * math.sqrt(17.0), rel=1e-3)


def test_spread_minimum_found_on_grid(units):
    located = experiment.locate_spread_minimum(2.0, units)
    assert located == pytest.approx(optimal_sigma(2.0, units), rel=0.01)


def test_spread_scan_rows(units):
    rows = experiment.spread_scan(2.0, units, [0.5, 1.0])
    assert [r.sigma for r in rows] == [0.5, 1.0]
    assert rows[1].sigma_bar_analytic == pytest.approx(SIGMA_BAR)
    with pytest.raises(InvalidInputError):
        experiment.spread_scan(2.0, units, [0.0])


# ---------------------------------------------------------------------
# Correlated-Gaussian probe
# ---------------------------------------------------------------------
def test_probe_analytic_values(units):
    broad = 4.0 * optimal_sigma(2.0, units)
    values = [experiment.epr_probe_analytic_stdev(w, broad, 2.0, units) for w in (1.0, 0.5, 0.25)]
    assert values == pytest.approx([3.005, 3.187, 4.008], abs=2e-3)


def test_probe_scatter_grows_as_correlation_tightens(units):
    result = experiment.epr_limit_probe([1.0, 0.5, 0.25], 2.0, units)
    assert [r.width for r in result.rows] == [1.0, 0.5, 0.25]
    assert result.broad_width == pytest.approx(4.0)
    assert result.monotone is True
    for row in result.rows:
        assert row.marginal_stdev == pytest.approx(row.analytic_stdev, rel=0.01)


@pytest.mark.parametrize("widths", [[1.0, -0.5], [0.5, 1.0], [1.0, 1.0], []])
def test_probe_rejects_bad_widths(units, widths):
    with pytest.raises(InvalidInputError):
        experiment.epr_limit_probe(widths, 1.0, units)


def test_single_width_has_no_trend():
    result = EprProbeResult(t=1.0, broad_width=2.0, rows=[EprProbeRow(width=1.0, marginal_stdev=1.5, analytic_stdev=1.5)])
    assert result.monotone is None
