# app/commands/popper.py
"""`popper`: baseline slit plus one narrowed R slit per n, one report row each."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from app.core.deps import add_common_arguments, get_out_path, get_run_config, get_seed, wants_json
from app.core.errors import EXIT_OK
from app.core.output import resolve_out_path, write_csv, write_density_csv, write_json
from app.core.run_config import RunConfig
from app.models.scenario import ScenarioConfig
from app.services.experiment import PopperRun, build_scenario, popper_sweep_runs

log = logging.getLogger(__name__)

COLUMNS = [
    "kind",
    "n",
    "slit_r_width",
    "v",
    "pass_probability",
    "l_conditional_stdev",
    "r_conditional_stdev",
    "r_window",
    "l_unconditional_marginal_distance",
    "r_width_firstminima",
    "predicted_ratio",
    "measured_ratio",
    "l_click_stdev",
    "r_click_stdev",
    "schmidt_rank",
]


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("popper", help="sweep the R slit width and record L/R scatter")
    add_common_arguments(parser, seed=True)
    parser.add_argument("--n-list", dest="n_list", type=str, default=None, help="comma-separated n values")
    parser.add_argument("--t", type=float, default=None)
    parser.add_argument("--n-clicks", dest="n_clicks", type=int, default=None)
    parser.add_argument(
        "--density-dir",
        dest="density_dir",
        type=Path,
        default=None,
        help="also write the L/R detector densities of every scenario here",
    )
    parser.set_defaults(func=cmd_popper)


def base_scenario(cfg: RunConfig) -> ScenarioConfig:
    seed = get_seed(cfg) if cfg.n_clicks > 0 else cfg.seed
    return build_scenario(
        t=cfg.t,
        p=cfg.physical,
        sigma=cfg.sigma,
        alpha=cfg.alpha,
        slit_l_width=cfg.slit_l_width,
        grid=cfg.grid_settings,
        n_clicks=cfg.n_clicks,
        seed=seed,
    )


def scenario_echo(cfg: RunConfig, base: ScenarioConfig, *keys: str) -> dict:
    return cfg.echo(
        "t", "hbar", "mass", "nodes_across_slit", "sigma_resolution", "extent_sigma_bars",
        "pad_margin_sigma_bars", "n_clicks", *keys,
        sigma=base.sigma, alpha=base.alpha, slit_l_width=base.slit_l_width, seed=base.seed,
    )


def write_densities(directory: Path, config: dict, runs: list[PopperRun]) -> None:
    for run in runs:
        label = "baseline" if run.report.n is None else f"n{run.report.n}"
        for side, density in (("l", run.l_density), ("r", run.r_density)):
            write_density_csv(
                directory / f"{label}_{side}.csv",
                command="popper",
                config=config,
                label=f"{label} {side.upper()}",
                density=density,
            )
    log.info("wrote %d detector densities to %s", 2 * len(runs), directory)


def cmd_popper(args: argparse.Namespace) -> int:
    cfg = get_run_config(args, n_list=args.n_list, t=args.t, n_clicks=args.n_clicks)
    base = base_scenario(cfg)
    runs = popper_sweep_runs(base, cfg.n_list)
    reports = [run.report for run in runs]
    config = scenario_echo(cfg, base, "n_list")
    if args.density_dir is not None:
        write_densities(resolve_out_path(args.density_dir, "densities"), config, runs)
    out = get_out_path(args, "popper.csv")

    if wants_json(out):
        write_json(out, config, [r.model_dump(mode="json") for r in reports])
        return EXIT_OK

    l_values = [r.l_conditional_stdev for r in reports]
    write_csv(
        out,
        command="popper",
        config=config,
        derived={"sigma_bar": reports[0].sigma_bar, "slit_r_mapping": "slit_r_width = sigma / n"},
        columns=COLUMNS,
        rows=[
            ("baseline" if r.n is None else "narrowed", *(getattr(r, c) for c in COLUMNS[1:]))
            for r in reports
        ],
        footer={
            "l_stdev_ratio": max(l_values) / min(l_values),
            "locality_max_distance": max(r.l_unconditional_marginal_distance for r in reports),
        },
    )
    return EXIT_OK
