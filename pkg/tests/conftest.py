"""Shared fixtures for the Majorana toolkit tests"""

import numpy as np
import pytest

from debug_config import DebugConfig
import settings_manager


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def quiet_debug():
    """Tests start with every debug switch off and leave them that way"""
    saved = DebugConfig.get_all_settings()
    DebugConfig.disable_all()
    yield
    DebugConfig.set_from_dict(saved)


@pytest.fixture
def settings_file(tmp_path, monkeypatch):
    """Point the settings manager at a throwaway file"""
    path = tmp_path / "settings.json"
    monkeypatch.setattr(settings_manager, "SETTINGS_FILE", str(path))
    settings_manager.reset_cache()
    yield path
    settings_manager.reset_cache()
