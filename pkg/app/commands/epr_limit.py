# app/commands/epr_limit.py
"""`epr-limit`: marginal scatter of ever more tightly correlated Gaussian pairs."""

from __future__ import annotations

import argparse
import logging

from app.core.deps import add_common_arguments, get_out_path, get_run_config
from app.core.errors import EXIT_OK
from app.core.output import write_csv
from app.services.experiment import epr_limit_probe

log = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("epr-limit", help="probe the perfectly correlated limit")
    add_common_arguments(parser)
    parser.add_argument("--widths", type=str, default=None, help="descending correlation widths")
    parser.add_argument("--t", type=float, default=None)
    parser.add_argument("--broad-width", dest="broad_width", type=float, default=None)
    parser.set_defaults(func=cmd_epr_limit)


def cmd_epr_limit(args: argparse.Namespace) -> int:
    cfg = get_run_config(args, widths=args.widths, t=args.t, broad_width=args.broad_width)
    result = epr_limit_probe(cfg.widths, cfg.t, cfg.physical, broad_width=cfg.broad_width)
    if result.monotone is False:
        log.warning("marginal stdev is not strictly increasing as the widths shrink")

    write_csv(
        get_out_path(args, "epr_limit.csv"),
        command="epr-limit",
        config=cfg.echo("widths", "t", "hbar", "mass", broad_width=result.broad_width),
        derived={},
        columns=["width", "marginal_stdev", "analytic_stdev"],
        rows=[(r.width, r.marginal_stdev, r.analytic_stdev) for r in result.rows],
        footer=None if result.monotone is None else {"monotone": result.monotone},
    )
    return EXIT_OK
