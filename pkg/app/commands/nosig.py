# app/commands/nosig.py
"""`nosig`: random-trial audit of the no-signalling theorem."""

from __future__ import annotations

import argparse
import json
import logging

from app.core.deps import add_common_arguments, get_out_path, get_run_config, get_seed
from app.core.errors import EXIT_FAILURE, EXIT_OK
from app.core.output import write_json
from app.services.finite_qm import no_signaling_audit

log = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("nosig", help="audit no-signalling on random bipartite states")
    add_common_arguments(parser, seed=True)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--dims", type=str, default=None, help="d1,d2 (each >= 2)")
    parser.set_defaults(func=cmd_nosig)


def cmd_nosig(args: argparse.Namespace) -> int:
    cfg = get_run_config(args, trials=args.trials, dims=args.dims)
    seed = get_seed(cfg)
    report = no_signaling_audit(cfg.trials, cfg.dims, seed)

    config = cfg.echo("trials", "dims", seed=seed)
    write_json(get_out_path(args, "nosig.json"), config, report.model_dump(mode="json"))

    summary = {"passed": report.passed, "max_deviation": report.max_deviation, "failures": report.failures}
    print(json.dumps(summary, sort_keys=True))
    if not report.passed:
        log.error("no-signalling audit failed; failing trials %s (seed %d)", report.failures, seed)
        return EXIT_FAILURE
    return EXIT_OK
