# app/core/deps.py
"""
Common command dependencies:

- Shared flags (`add_common_arguments`)
- Effective run configuration (`get_run_config`)
- Seed resolution (`get_seed`)
- Output path and format (`get_out_path`, `wants_json`)
"""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Any, Optional

from app.core.config import get_settings
from app.core.output import resolve_out_path
from app.core.run_config import RunConfig, load_run_config


def add_common_arguments(parser: argparse.ArgumentParser, *, seed: bool = False) -> None:
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        help="key=value run config, or a CSV/JSON written by a previous run",
    )
    parser.add_argument(
        "--out",
        type=Path,
        default=None,
        help="output file; bare names go to POPPER_OUTPUT_DIR",
    )
    if seed:
        parser.add_argument("--seed", type=int, default=None)


def get_run_config(args: argparse.Namespace, **overrides: Any) -> RunConfig:
    """--config file plus command-line overrides (None means not given)."""
    if getattr(args, "seed", None) is not None:
        overrides.setdefault("seed", args.seed)
    return load_run_config(args.config, overrides)


def get_seed(cfg: RunConfig) -> int:
    return get_settings().DEFAULT_SEED if cfg.seed is None else cfg.seed


def get_out_path(args: argparse.Namespace, default_name: str) -> Path:
    return resolve_out_path(args.out, default_name)


def wants_json(path: Optional[Path]) -> bool:
    return path is not None and Path(path).suffix.lower() == ".json"
