"""
Debug Configuration Module
Centralized debug switches for every simulator and the net harness
"""

import sys


class DebugConfig:
    """Global debug configuration - controls what diagnostic info is printed to stderr"""

    # Operator algebra
    algebra_enabled = False

    # Stabilizer simulator
    stabilizer_enabled = False
    stabilizer_measurements = False  # Show every charge measurement and its branch

    # Dense (Jordan-Wigner) oracle
    oracle_enabled = False

    # Covariance-matrix backend
    gaussian_enabled = False
    gaussian_conditioning = False  # Show each conditional update

    # Games & bounds
    games_enabled = False
    games_scan_progress = False  # Show per-chunk progress of the classical scan

    # GHZ no-go checker
    ghz_enabled = False

    # Teleportation / dense coding
    protocols_enabled = False

    # Backend cross-checks
    crosscheck_enabled = False

    # Net harness
    net_enabled = False
    net_messages = False  # Show every wire message
    net_rounds = False  # Show per-round referee decisions

    # Settings & CLI
    settings_enabled = False
    settings_save_load = False
    cli_enabled = False

    # Subsystem name -> its switches; every switch above belongs to exactly one
    SUBSYSTEMS = {
        "algebra": ("algebra_enabled",),
        "stabilizer": ("stabilizer_enabled", "stabilizer_measurements"),
        "oracle": ("oracle_enabled",),
        "gaussian": ("gaussian_enabled", "gaussian_conditioning"),
        "games": ("games_enabled", "games_scan_progress"),
        "ghz": ("ghz_enabled",),
        "protocols": ("protocols_enabled",),
        "crosscheck": ("crosscheck_enabled",),
        "net": ("net_enabled", "net_messages", "net_rounds"),
        "settings": ("settings_enabled", "settings_save_load"),
        "cli": ("cli_enabled",),
    }

    @classmethod
    def flags(cls):
        """Every switch name, grouped by subsystem"""
        return tuple(flag for group in cls.SUBSYSTEMS.values() for flag in group)

    @classmethod
    def enable(cls, subsystem, value=True):
        """Turn one subsystem's switches on (or off)

        Args:
            subsystem: Key of SUBSYSTEMS, e.g. "net"
            value: New state for its switches
        """
        if subsystem not in cls.SUBSYSTEMS:
            raise KeyError(f"Unknown debug subsystem {subsystem!r} (known: {', '.join(cls.SUBSYSTEMS)})")
        for flag in cls.SUBSYSTEMS[subsystem]:
            setattr(cls, flag, bool(value))

    @classmethod
    def enable_all(cls):
        """Enable all debug output"""
        for subsystem in cls.SUBSYSTEMS:
            cls.enable(subsystem, True)

    @classmethod
    def disable_all(cls):
        """Disable all debug output"""
        for subsystem in cls.SUBSYSTEMS:
            cls.enable(subsystem, False)

    @classmethod
    def get_all_settings(cls):
        """Current value of every switch, in subsystem order"""
        return {flag: getattr(cls, flag) for flag in cls.flags()}

    @classmethod
    def set_from_dict(cls, settings_dict):
        """Apply switch values (by switch or subsystem name) from a settings dict

        Returns:
            list: Keys that name neither a switch nor a subsystem, or carry a non-bool value
        """
        known = set(cls.flags())
        ignored = []
        for key, value in settings_dict.items():
            if not isinstance(value, bool):
                ignored.append(key)
            elif key in known:
                setattr(cls, key, value)
            elif key in cls.SUBSYSTEMS:
                cls.enable(key, value)
            else:
                ignored.append(key)
        return ignored


def debug_log(tag, message):
    """Write one tagged diagnostic line to stderr (stdout is reserved for reports)"""
    print(f"[{tag}] {message}", file=sys.stderr)
    sys.stderr.flush()
