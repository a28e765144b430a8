# app/core/output.py
"""
Data files written by the commands.

CSV layout:
    # popper-slit <command>
    # key=value          effective configuration, one per line
    # --
    # key=value          derived quantities
    col_a,col_b,...
    rows
    # key=value          optional footer

Floats are written with repr() so they read back exactly. Nothing time- or
host-dependent goes into a file, so re-running a config reproduces it byte
for byte. Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from app.core.config import get_settings
from app.core.errors import OutputError
from app.core.run_config import DERIVED_MARKER

log = logging.getLogger(__name__)

TOOL_NAME = "popper-slit"


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def resolve_out_path(out: Optional[Path], default_name: str) -> Path:
    """Bare file names (and no --out at all) land in settings.OUTPUT_DIR."""
    if out is None:
        return get_settings().OUTPUT_DIR / default_name
    out = Path(out)
    if out.parent == Path("."):
        return get_settings().OUTPUT_DIR / out
    return out


def atomic_write_text(path: Path, text: str) -> Path:
    path = Path(path)
    tmp_name: Optional[str] = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", newline="", dir=path.parent, prefix=f".{path.name}.", delete=False
        ) as fh:
            tmp_name = fh.name
            fh.write(text)
        os.replace(tmp_name, path)
    except OSError as exc:
        if tmp_name is not None and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    log.info("wrote %s", path)
    return path


def _meta_lines(items: Mapping[str, Any]) -> list[str]:
    return [f"# {k}={format_value(v)}\n" for k, v in items.items() if v is not None]


def render_csv(
    *,
    command: str,
    config: Mapping[str, Any],
    derived: Mapping[str, Any],
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    footer: Optional[Mapping[str, Any]] = None,
) -> str:
    buf = io.StringIO()
    buf.write(f"# {TOOL_NAME} {command}\n")
    buf.writelines(_meta_lines(config))
    buf.write(DERIVED_MARKER + "\n")
    buf.writelines(_meta_lines(derived))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    if footer:
        buf.writelines(_meta_lines(footer))
    return buf.getvalue()


def write_csv(path: Path, **kwargs: Any) -> Path:
    return atomic_write_text(path, render_csv(**kwargs))


def render_json(config: Mapping[str, Any], report: Any) -> str:
    return json.dumps({"config": dict(config), "report": report}, sort_keys=True, indent=2) + "\n"


def write_json(path: Path, config: Mapping[str, Any], report: Any) -> Path:
    return atomic_write_text(path, render_json(config, report))


def read_csv_table(path: Path) -> tuple[dict[str, str], list[dict[str, str]], dict[str, str]]:
    """(metadata header, data rows, footer) of a CSV written by render_csv."""
    meta: dict[str, str] = {}
    footer: dict[str, str] = {}
    body: list[str] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                text = line[1:].strip()
                if "=" in text:
                    key, _, value = text.partition("=")
                    (footer if body else meta)[key] = value
                continue
            body.append(line)
    return meta, list(csv.DictReader(body)), footer


DENSITY_COLUMNS = ("y", "density")


def write_density_csv(path: Path, *, command: str, config: Mapping[str, Any], label: str, density: Any) -> Path:
    """One sampled density as (y, density) rows; grid description in the derived header."""
    return write_csv(
        path,
        command=command,
        config=config,
        derived={"density": label, **density.metadata()},
        columns=DENSITY_COLUMNS,
        rows=density.rows(),
    )
