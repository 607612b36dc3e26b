#!/usr/bin/env python
"""Diagnostic script to check the toolkit's dependencies and a few known results"""

import sys

DEPENDENCIES = {
    'numpy': 'Numerical computing',
    'scipy': 'Linear algebra & statistics',
    'pydantic': 'Wire message validation',
    'jsonschema': 'Report schema validation',
    'colorama': 'Coloured PASS/FAIL',
    'psutil': 'Session process cleanup',
    'dotenv': 'Environment configuration',
}


def check_dependencies():
    """Try every import

    Returns:
        dict: module name -> True if importable
    """
    found = {}
    for module, desc in DEPENDENCIES.items():
        try:
            __import__(module)
            found[module] = True
            print(f"✓ {module:15} - {desc}")
        except ImportError:
            found[module] = False
            print(f"✗ {module:15} - {desc} (NOT INSTALLED)")
    return found


def _sanity_checks():
    from fractions import Fraction

    import numpy as np

    import dense_oracle
    import nonlocal_games as ng
    import protocols

    game = ng.magic_square_game()
    c = dense_oracle.majorana_matrices(4)
    anticommute = all(np.allclose(c[a] @ c[b] + c[b] @ c[a], 2 * np.eye(16) * (a == b))
                      for a in range(8) for b in range(8))
    plain = protocols.TeleportSetup(protocols.SCENARIO_PLAIN)
    return [
        ("Majorana matrices anticommute", anticommute),
        ("Magic-square quantum value is 9", ng.game_value(game, ng.quantum_distribution()) == 9),
        ("Parity tables reach 7", ng.game_value(game, ng.strategy_distribution(ng.parity_strategy())) == 7),
        ("Noise-free Gaussian value is 9", abs(ng.noisy_value(0.0) - 9.0) < 1e-9),
        ("Teleportation is exact", protocols.total_variation(protocols.corrected_distribution(plain),
                                                             protocols.direct_input_distribution(plain)) == 0),
        ("Dense coding decodes all messages", protocols.dense_round_trip()["successes"] == 4),
        ("Teleport scenarios 3/4 distinguishable", protocols.discrimination_probability() == Fraction(3, 4)),
    ]


def run_sanity_checks():
    """Small known results that exercise every backend

    Returns:
        list: (description, passed) pairs
    """
    results = _sanity_checks()
    for desc, ok in results:
        print(f"{'✓' if ok else '✗'} {desc}")
    return results


def main():
    print("\n" + "="*60)
    print("MAJORANA TOOLKIT DIAGNOSTIC")
    print("="*60)

    print(f"\n{'='*60}")
    print("Dependencies:")
    print(f"{'='*60}")
    found = check_dependencies()
    if not all(found.values()):
        print(f"\n  Install the missing packages with:")
        print(f"    pip install -r requirements.txt")
        print(f"\n{'='*60}\n")
        return 1

    print(f"\n{'='*60}")
    print("Known results:")
    print(f"{'='*60}")
    try:
        results = run_sanity_checks()
    except Exception as e:
        print(f"✗ Error running checks: {e}")
        return 1

    print(f"\n{'='*60}\n")
    return 0 if all(ok for _, ok in results) else 1


if __name__ == "__main__":
    sys.exit(main())
