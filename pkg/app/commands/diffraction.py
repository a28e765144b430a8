# app/commands/diffraction.py
"""`diffraction`: exact vs. far-field single-slit densities."""

from __future__ import annotations

import argparse

from app.core.deps import add_common_arguments, get_out_path, get_run_config
from app.core.errors import EXIT_OK
from app.core.output import write_csv
from app.models.slit import SlitEvolutionParams
from app.services import diffraction


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("diffraction", help="single-slit density curves")
    add_common_arguments(parser)
    parser.add_argument("--d", type=float, default=None, help="slit width")
    parser.add_argument("--t", type=float, default=None, help="time of flight")
    parser.add_argument("--points", dest="curve_points", type=int, default=None)
    parser.set_defaults(func=cmd_diffraction)


def cmd_diffraction(args: argparse.Namespace) -> int:
    cfg = get_run_config(args, d=args.d, t=args.t, curve_points=args.curve_points)
    sp = SlitEvolutionParams(d=cfg.d, t=cfg.t, p=cfg.physical)
    width = diffraction.fraunhofer_width(sp)
    half = cfg.curve_half_width or width
    curve = diffraction.density_curve(sp, half, cfg.curve_points)

    write_csv(
        get_out_path(args, "diffraction.csv"),
        command="diffraction",
        config=cfg.echo("d", "t", "hbar", "mass", "curve_points", curve_half_width=half),
        derived={
            "v": sp.v,
            "fraunhofer_width": width,
            "central_lobe_deviation": diffraction.central_lobe_deviation(sp),
            "regime_limit_d": diffraction.fraunhofer_regime_limit(cfg.t, cfg.physical),
        },
        columns=["y2", "exact_density", "fraunhofer_density"],
        rows=curve.rows(),
    )
    return EXIT_OK
