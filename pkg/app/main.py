# app/main.py
import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from app.commands import collett_loudon, diffraction, epr_limit, nosig, popper, spread
from app.core.config import get_settings
from app.core.errors import EXIT_FAILURE, EXIT_USAGE, PopperSlitError
from app.core.logging import setup_logging

log = logging.getLogger("app")

# -----------------------------------------------------------------------------
# Parser
# -----------------------------------------------------------------------------
COMMANDS = (nosig, spread, diffraction, popper, collett_loudon, epr_limit)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="popper-slit",
        description="Entangled-pair slit experiment: no-signalling audit, spreading, diffraction, scatter sweeps.",
    )
    parser.add_argument("--log-level", default=None, help="overrides POPPER_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)
    for module in COMMANDS:
        module.register(sub)
    return parser


# -----------------------------------------------------------------------------
# Entry point + error mapping
# -----------------------------------------------------------------------------
def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand and return its exit code.

    - 0: success
    - 1: audit failure or unexpected error (logged with traceback)
    - 2: usage, configuration or rejected input
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the usage message
        return EXIT_USAGE if exc.code not in (0, None) else 0

    setup_logging(args.log_level or get_settings().LOG_LEVEL)
    log.info("command %s started", args.command)
    try:
        code = args.func(args)
    except PopperSlitError as exc:
        log.error("%s", exc.detail)
        return exc.exit_code
    except ValidationError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.exception("unexpected failure: %s", exc)
        return EXIT_FAILURE
    log.info("command %s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
