# app/core/run_config.py
"""
Run-configuration files: flat `key=value` text with `#` comments.

Lines are tokenised with python-dotenv's parser so each binding keeps its line
number, then validated by `RunConfig` (unknown keys are rejected). A CSV or
JSON file previously written by this tool is accepted too: its embedded
effective configuration is read back, so a run can be reproduced from its own
output.
"""

from __future__ import annotations

import io
import json
import logging
from pathlib import Path
from typing import Any, Optional

from dotenv.parser import Binding, parse_stream
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.core.errors import ConfigError
from app.models.physics import PhysicalParams
from app.models.scenario import CollettLoudonParams, GridSettings

log = logging.getLogger(__name__)

# Marks the end of the embedded configuration in CSV metadata
DERIVED_MARKER = "# --"

LIST_KEYS = ("n_list", "widths", "s_r_list", "sigmas", "dims")


class RunConfig(BaseModel):
    """Everything a command can be told through --config or flags."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True, allow_inf_nan=False)

    # Physics
    t: float = Field(default=2.0, gt=0, description="Time of flight.")
    hbar: float = Field(default=1.0, gt=0)
    mass: float = Field(default=1.0, gt=0)

    # Source state and slits (unset values resolve to defaults)
    sigma: Optional[float] = Field(default=None, gt=0)
    alpha: Optional[float] = Field(default=None, gt=0)
    slit_l_width: Optional[float] = Field(default=None, gt=0)
    n_list: list[int] = Field(default_factory=lambda: [2, 4, 8])

    # Grid
    nodes_across_slit: int = Field(default=11, ge=3)
    sigma_resolution: int = Field(default=10, ge=4)
    extent_sigma_bars: float = Field(default=10.0, gt=0)
    pad_margin_sigma_bars: float = Field(default=10.0, ge=0)

    # Detector clicks and randomness
    n_clicks: int = Field(default=0, ge=0)
    seed: Optional[int] = None

    # nosig
    trials: int = Field(default=100, ge=1)
    dims: tuple[int, int] = (2, 2)

    # diffraction
    d: float = Field(default=1.0, gt=0, description="Slit width for the diffraction curves.")
    curve_half_width: Optional[float] = Field(default=None, gt=0)
    curve_points: int = Field(default=1001, ge=2)

    # collett-loudon
    s_r_list: list[float] = Field(default_factory=lambda: [0.03, 0.05, 0.1, 0.2, 0.3])
    d_src: float = Field(default=1.0, gt=0)
    r: float = Field(default=1.0, gt=0)
    lam: float = Field(default=1.0, gt=0, alias="lambda")

    # epr-limit
    widths: list[float] = Field(default_factory=lambda: [1.0, 0.5, 0.25])
    broad_width: Optional[float] = Field(default=None, gt=0)

    # spread
    sigmas: Optional[list[float]] = None

    @field_validator(*LIST_KEYS, mode="before")
    @classmethod
    def _split_commas(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [part.strip() for part in v.split(",") if part.strip()]
        return v

    @field_validator("dims")
    @classmethod
    def _dims_at_least_two(cls, v: tuple[int, int]) -> tuple[int, int]:
        if min(v) < 2:
            raise ValueError(f"both dimensions must be >= 2, got {v}")
        return v

    @field_validator("n_list")
    @classmethod
    def _positive_n(cls, v: list[int]) -> list[int]:
        if any(n < 1 for n in v):
            raise ValueError("every n must be >= 1")
        return v

    @field_validator("widths", "s_r_list", "sigmas")
    @classmethod
    def _positive_lengths(cls, v: Optional[list[float]]) -> Optional[list[float]]:
        if v is not None and (not v or any(not x > 0 for x in v)):
            raise ValueError("values must be positive and the list non-empty")
        return v

    # ------------------------------------------------------------------
    # Views for the services
    # ------------------------------------------------------------------
    @property
    def physical(self) -> PhysicalParams:
        return PhysicalParams(hbar=self.hbar, mass=self.mass)

    @property
    def grid_settings(self) -> GridSettings:
        return GridSettings(
            nodes_across_slit=self.nodes_across_slit,
            sigma_resolution=self.sigma_resolution,
            extent_sigma_bars=self.extent_sigma_bars,
            pad_margin_sigma_bars=self.pad_margin_sigma_bars,
        )

    @property
    def collett_loudon(self) -> CollettLoudonParams:
        return CollettLoudonParams(d_src=self.d_src, r=self.r, lam=self.lam)

    def echo(self, *keys: str, **resolved: Any) -> dict[str, Any]:
        """Effective settings for an output header: selected keys plus resolved defaults."""
        data = self.model_dump(by_alias=True)
        unknown = [k for k in (*keys, *resolved) if k not in data]
        if unknown:
            raise KeyError(f"not run-config keys: {unknown}")
        out = {k: data[k] for k in keys}
        out.update(resolved)
        return out


# ---------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------
def _binding_line(binding: Binding) -> int:
    # The parser starts a binding at the blank lines before it
    raw = binding.original.string
    leading = raw[: len(raw) - len(raw.lstrip())]
    return binding.original.line + leading.count("\n")


def parse_bindings(text: str) -> tuple[dict[str, str], dict[str, int]]:
    """key -> raw value and key -> line number; malformed lines raise ConfigError."""
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    problems: list[tuple[Optional[int], str]] = []
    for b in parse_stream(io.StringIO(text)):
        line = _binding_line(b)
        if b.error or (b.key is not None and b.value is None):
            problems.append((line, f"cannot parse {b.original.string.strip()!r}, expected key=value"))
            continue
        if b.key is None:
            continue
        if b.key in values:
            problems.append((line, f"{b.key}: duplicate key (first set on line {lines[b.key]})"))
            continue
        values[b.key] = b.value
        lines[b.key] = line
    if problems:
        raise ConfigError("malformed run configuration", problems)
    return values, lines


def embedded_config_text(text: str) -> str:
    """`key=value` lines from the metadata block of a CSV written by app.core.output."""
    kept = []
    for raw in text.splitlines():
        if not raw.startswith("#"):
            break
        if raw.startswith(DERIVED_MARKER):
            break
        body = raw[1:].strip()
        if "=" in body:
            kept.append(body)
    return "\n".join(kept) + "\n"


def build_run_config(
    values: dict[str, Any],
    lines: Optional[dict[str, int]] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> RunConfig:
    """Validate values (command-line overrides win); errors carry line numbers."""
    lines = lines or {}
    merged = dict(values)
    overridden: set[str] = set()
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        # Overrides use field names; files use the alias ("lambda")
        field = RunConfig.model_fields.get(key)
        name = field.alias if field is not None and field.alias else key
        merged.pop(key, None)
        merged[name] = value
        overridden.add(name)
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as exc:
        problems: list[tuple[Optional[int], str]] = []
        for err in exc.errors():
            key = str(err["loc"][0]) if err["loc"] else ""
            msg = "unknown key" if err["type"] == "extra_forbidden" else err["msg"]
            line = lines.get(key) if key not in overridden else None
            problems.append((line, f"{key}: {msg}"))
        raise ConfigError("invalid run configuration", problems) from exc


def load_run_config(path: Optional[Path], overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    """Read --config (key=value, or a previous CSV/JSON output) and apply overrides."""
    if path is None:
        return build_run_config({}, overrides=overrides)

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from exc

    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON", [(exc.lineno, exc.msg)]) from exc
        embedded = data.get("config") if isinstance(data, dict) else None
        if not isinstance(embedded, dict):
            raise ConfigError(f"{path}: no embedded 'config' object")
        log.info("reusing configuration embedded in %s", path)
        return build_run_config(embedded, overrides=overrides)

    if path.suffix.lower() == ".csv":
        log.info("reusing configuration embedded in %s", path)
        text = embedded_config_text(text)

    values, lines = parse_bindings(text)
    return build_run_config(values, lines, overrides)
