"""
Settings Manager for the Majorana toolkit
Handles saving and loading run settings to/from a JSON file
"""

import json
import os

from debug_config import DebugConfig, debug_log
import config


SETTINGS_FILE = os.getenv("MAJORANA_SETTINGS_FILE", "majorana_settings.json")
_settings_cache = None  # In-memory cache to avoid repeated file reads
_cache_loaded = False

DEFAULT_SETTINGS = {
    "round_timeout": config.ROUND_TIMEOUT,
    "referee_host": config.REFEREE_HOST,
    "referee_port": config.REFEREE_PORT,
    "threads": 1,
    "debug_settings": {},
}


def load_settings():
    """Load settings from file (cached in memory after first load)
    
    Returns:
        dict: Settings dictionary with defaults filled in for missing keys
    """
    global _settings_cache, _cache_loaded
    
    if _cache_loaded and _settings_cache is not None:
        return _settings_cache
    
    _settings_cache = {}
    if os.path.exists(SETTINGS_FILE):
        try:
            with open(SETTINGS_FILE, 'r', encoding='utf-8') as f:
                _settings_cache = json.load(f)
            if DebugConfig.settings_save_load:
                debug_log("DEBUG-SETTINGS", f"load_settings: Loaded {len(_settings_cache)} settings from {SETTINGS_FILE}")
        except (OSError, json.JSONDecodeError) as e:
            debug_log("ERROR-SETTINGS", f"Error loading settings: {e}")
            _settings_cache = {}
    elif DebugConfig.settings_enabled:
        debug_log("DEBUG-SETTINGS", f"load_settings: File {SETTINGS_FILE} does not exist, using defaults")
    _cache_loaded = True
    
    # Ensure every known setting exists with a sensible default
    for key, value in DEFAULT_SETTINGS.items():
        if key not in _settings_cache:
            _settings_cache[key] = value
            if DebugConfig.settings_enabled:
                debug_log("DEBUG-SETTINGS", f"Added missing {key} setting (default {value!r})")
    
    debug_settings = _settings_cache.get("debug_settings") or {}
    if isinstance(debug_settings, dict) and debug_settings:
        ignored = DebugConfig.set_from_dict(debug_settings)
        if ignored:
            debug_log("ERROR-SETTINGS", f"Ignoring unknown debug settings: {', '.join(sorted(ignored))}")
    
    return _settings_cache


def save_settings(settings):
    """Save settings to file and refresh the cache
    
    Args:
        settings: Dictionary of settings to save
    """
    global _settings_cache, _cache_loaded
    
    try:
        with open(SETTINGS_FILE, 'w', encoding='utf-8') as f:
            json.dump(settings, f, indent=2, sort_keys=True)
            f.flush()
        _settings_cache = dict(settings)
        _cache_loaded = True
        if DebugConfig.settings_save_load:
            debug_log("DEBUG-SETTINGS", f"Successfully wrote {len(settings)} settings to {SETTINGS_FILE}")
    except OSError as e:
        debug_log("ERROR-SETTINGS", f"Error saving settings: {e}")


def reset_cache():
    """Forget the cached settings so the next load re-reads the file"""
    global _settings_cache, _cache_loaded
    _settings_cache = None
    _cache_loaded = False


def get_setting(key, default=None):
    """Get a specific setting
    
    Args:
        key: Setting key
        default: Default value if key doesn't exist
        
    Returns:
        Setting value or default
    """
    return load_settings().get(key, default)


def set_setting(key, value):
    """Set a specific setting and persist it
    
    Args:
        key: Setting key
        value: Setting value
    """
    settings = load_settings()
    settings[key] = value
    if DebugConfig.settings_enabled:
        debug_log("DEBUG-SETTINGS", f"set_setting: {key} = {value!r}")
    save_settings(settings)
