# app/commands/collett_loudon.py
"""`collett-loudon`: rival L-scatter formula against the simulated L scatter."""

from __future__ import annotations

import argparse

from app.commands.popper import base_scenario, scenario_echo
from app.core.deps import add_common_arguments, get_out_path, get_run_config, wants_json
from app.core.errors import EXIT_OK
from app.core.output import write_csv, write_json
from app.services.experiment import refute_collett_loudon


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("collett-loudon", help="compare the rival formula with the simulation")
    add_common_arguments(parser)
    parser.add_argument("--s-r-list", dest="s_r_list", type=str, default=None, help="comma-separated s_R values")
    parser.add_argument("--d-src", dest="d_src", type=float, default=None)
    parser.add_argument("--r", type=float, default=None)
    parser.add_argument("--lambda", dest="lam", type=float, default=None)
    parser.add_argument("--t", type=float, default=None)
    parser.set_defaults(func=cmd_collett_loudon)


def cmd_collett_loudon(args: argparse.Namespace) -> int:
    cfg = get_run_config(args, s_r_list=args.s_r_list, d_src=args.d_src, r=args.r, lam=args.lam, t=args.t)
    base = base_scenario(cfg)
    record = refute_collett_loudon(cfg.collett_loudon, base, cfg.s_r_list)
    config = scenario_echo(cfg, base, "s_r_list", "d_src", "r", "lambda")
    out = get_out_path(args, "collett_loudon.csv")

    if wants_json(out):
        write_json(out, config, record.model_dump(mode="json", by_alias=True))
        return EXIT_OK

    write_csv(
        out,
        command="collett-loudon",
        config=config,
        derived={
            "width_mapping": record.width_mapping,
            "s_r_minimizer": record.s_r_minimizer,
            "min_predicted_delta_l": record.min_predicted_delta_l,
            "true_crossover": record.true_crossover,
            "quoted_threshold": record.quoted_threshold,
        },
        columns=["s_r", "slit_r_width", "predicted_delta_l", "simulated_l_stdev", "predicted_change", "simulated_change"],
        rows=[
            (r.s_r, r.slit_r_width, r.predicted_delta_l, r.simulated_l_stdev, r.predicted_change, r.simulated_change)
            for r in record.rows
        ],
        footer={
            "predicted_ratio": record.predicted_ratio,
            "simulated_ratio": record.simulated_ratio,
            "divergence_s_r": record.divergence_s_r,
            "uncorrelated": record.uncorrelated,
        },
    )
    return EXIT_OK
