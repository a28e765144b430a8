import json
from pathlib import Path

import numpy as np
import pytest

from app.core.config import get_settings
from app.core.errors import OutputError
from app.core.output import (
    atomic_write_text,
    format_value,
    read_csv_table,
    render_csv,
    render_json,
    resolve_out_path,
    write_csv,
    write_density_csv,
)
from app.core.run_config import embedded_config_text
from app.services.gridprop import SampledDensity


@pytest.mark.parametrize(
    "value, text",
    [(None, ""), (True, "true"), (0.1, "0.1"), (1 / 3, "0.3333333333333333"), ([2, 4, 8], "2,4,8"), ("x", "x")],
)
def test_format_value(value, text):
    assert format_value(value) == text


def test_csv_layout():
    text = render_csv(
        command="epr-limit",
        config={"t": 2.0, "broad_width": None},
        derived={"v": 0.5},
        columns=["width", "marginal_stdev"],
        rows=[(1.0, 3.0), (0.5, 3.2)],
        footer={"monotone": True},
    )
    assert text.splitlines() == [
        "# popper-slit epr-limit",
        "# t=2.0",
        "# --",
        "# v=0.5",
        "width,marginal_stdev",
        "1.0,3.0",
        "0.5,3.2",
        "# monotone=true",
    ]


def test_bare_names_go_to_output_dir():
    out_dir = get_settings().OUTPUT_DIR
    assert resolve_out_path(None, "popper.csv") == out_dir / "popper.csv"
    assert resolve_out_path(Path("mine.csv"), "popper.csv") == out_dir / "mine.csv"
    assert resolve_out_path(Path("/tmp/x/mine.csv"), "popper.csv") == Path("/tmp/x/mine.csv")


def test_write_and_read_back(tmp_path):
    path = write_csv(
        tmp_path / "sub" / "t.csv",
        command="spread",
        config={"t": 2.0},
        derived={"optimal_sigma": 1.0},
        columns=["sigma", "sigma_bar_grid"],
        rows=[(1.0, 1.4142135623730951)],
        footer={"located_minimum": 1.0001},
    )
    meta, rows, footer = read_csv_table(path)
    assert meta == {"t": "2.0", "optimal_sigma": "1.0"}
    assert rows == [{"sigma": "1.0", "sigma_bar_grid": "1.4142135623730951"}]
    assert footer == {"located_minimum": "1.0001"}
    # No temporary files left behind
    assert [p.name for p in path.parent.iterdir()] == ["t.csv"]


def test_json_document():
    doc = json.loads(render_json({"seed": 3}, {"passed": True}))
    assert doc == {"config": {"seed": 3}, "report": {"passed": True}}


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError):
        atomic_write_text(blocker / "out.csv", "data")


def test_density_table(tmp_path):
    points = np.array([-0.5, 0.0, 0.5])
    density = SampledDensity(points=points, values=np.array([0.25, 1.5, 0.25]), spacing=0.5)
    path = write_density_csv(tmp_path / "n2_r.csv", command="popper", config={"t": 2.0}, label="n2 R", density=density)
    meta, rows, footer = read_csv_table(path)
    assert meta == {
        "t": "2.0",
        "density": "n2 R",
        "y_min": "-0.5",
        "y_max": "0.5",
        "n_points": "3",
        "spacing": "0.5",
        "probability": "1.0",
    }
    assert rows == [
        {"y": "-0.5", "density": "0.25"},
        {"y": "0.0", "density": "1.5"},
        {"y": "0.5", "density": "0.25"},
    ]
    assert footer == {}
    # Grid description stays out of the re-runnable config
    assert embedded_config_text(path.read_text()) == "t=2.0\n"
