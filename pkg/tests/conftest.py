import pytest

from app.core.config import get_settings
from app.models.physics import PhysicalParams


# Every test writes into its own output directory
@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    monkeypatch.setenv("POPPER_OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.setenv("POPPER_SWEEP_WORKERS", "1")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def units():
    """hbar = m = 1."""
    return PhysicalParams()
