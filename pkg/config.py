"""
Configuration settings for the Majorana nonlocality toolkit
"""

import os

from dotenv import load_dotenv

# Pick up MAJORANA_* overrides from a local .env file (if present)
load_dotenv()


def _env_float(name, default):
    value = os.getenv(name)
    return float(value) if value not in (None, "") else default


def _env_int(name, default):
    value = os.getenv(name)
    return int(value) if value not in (None, "") else default


# Numeric tolerances
ORTHOGONALITY_TOL = 1e-10   # V V^T = 1 check for mode rotations
PHYSICALITY_TOL = 1e-10     # eigenvalues of -gamma^2 may exceed 1 by this much
ORACLE_ZERO_TOL = 1e-12     # projector norms below this count as impossible branches
FLOAT_MATCH_TOL = 1e-9      # float backends compared against exact ones

# Resource caps
MAX_ORACLE_MODES = 12       # 2n modes -> n qubits, so 64-dimensional at most
MAX_SCAN_PAIRS = 8          # full stabilizer groups have 2^n elements

# Experiment defaults
DEFAULT_SEED = _env_int("MAJORANA_SEED", 0)
DEFAULT_TRIALS = _env_int("MAJORANA_TRIALS", 1000)
NOISE_GRID_POINTS = 51
DEFAULT_MC_ROUNDS = 100000

# Net harness (referee + Alice + Bob over loopback TCP)
REFEREE_HOST = os.getenv("MAJORANA_REFEREE_HOST", "127.0.0.1")
REFEREE_PORT = _env_int("MAJORANA_REFEREE_PORT", 7643)
ROUND_TIMEOUT = _env_float("MAJORANA_ROUND_TIMEOUT", 5.0)   # seconds per round
CONNECT_TIMEOUT = 10.0
WIRE_VERSION = 1

# Output
SCHEMA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "schemas")
