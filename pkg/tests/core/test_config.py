import app.core.config as config_module
from app.core.config import get_settings


def test_settings_follow_environment(monkeypatch):
    monkeypatch.setenv("POPPER_DEFAULT_SEED", "7")
    get_settings.cache_clear()
    assert get_settings().DEFAULT_SEED == 7
    assert get_settings() is get_settings()


def test_no_settings_built_at_import():
    # Callers go through get_settings so env changes are seen after a cache clear
    assert not hasattr(config_module, "config")
