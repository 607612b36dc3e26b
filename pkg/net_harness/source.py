"""
Correlated-outcome source for the quantum-emulated mode

A trusted source pre-samples, for every round and every one of the nine
setting pairs, one joint (alpha, beta) draw from the quantum magic-square
distribution. Alice's tape keeps only the alphas and Bob's only the
betas. At run time the referee names the setting pair (slot) of the round
so each party can look up its half.

This is a classical emulation of shared entanglement: it reproduces the
statistics, it does not and cannot close any loophole.
"""

import json
from typing import Dict, List, Tuple

import numpy as np

from debug_config import DebugConfig, debug_log
import nonlocal_games as ng


N_SLOTS = 9


def slot_of(j: int, k: int) -> int:
    return 3 * (j - 1) + (k - 1)


def settings_of(slot: int) -> Tuple[int, int]:
    return slot // 3 + 1, slot % 3 + 1


def generate_records(rounds: int, seed: int) -> List[dict]:
    """Joint records {round, setting_pair, alpha, beta}, round-major then slot order"""
    rng = np.random.default_rng(seed)
    distribution = ng.quantum_distribution()
    draws = {}
    for slot in range(N_SLOTS):
        j, k = settings_of(slot)
        support = distribution.support(j, k)
        weights = np.array([float(distribution.probability(a, b, j, k)) for a, b in support])
        picks = rng.choice(len(support), size=rounds, p=weights / weights.sum())
        draws[slot] = [support[int(p)] for p in picks]
    records = []
    for r in range(rounds):
        for slot in range(N_SLOTS):
            alpha, beta = draws[slot][r]
            records.append({"round": r, "setting_pair": list(settings_of(slot)),
                            "alpha": list(alpha), "beta": list(beta)})
    return records


def source_generate(rounds: int, seed: int, alice_path: str, bob_path: str) -> int:
    """Write the two tape files; returns the number of records per tape"""
    records = generate_records(rounds, seed)
    with open(alice_path, "w", encoding="utf-8") as alice_file, open(bob_path, "w", encoding="utf-8") as bob_file:
        for record in records:
            base = {"round": record["round"], "setting_pair": record["setting_pair"]}
            alice_file.write(json.dumps({**base, "alpha": record["alpha"]}, sort_keys=True) + "\n")
            bob_file.write(json.dumps({**base, "beta": record["beta"]}, sort_keys=True) + "\n")
    if DebugConfig.net_enabled:
        debug_log("DEBUG-NET", f"source wrote {len(records)} records per tape (seed={seed})")
    return len(records)


def split_tapes(records: List[dict]):
    """In-memory (alice_tape, bob_tape), same keys as load_tape"""
    alice, bob = {}, {}
    for record in records:
        key = (record["round"], slot_of(*record["setting_pair"]))
        alice[key] = tuple(record["alpha"])
        bob[key] = tuple(record["beta"])
    return alice, bob


def load_tape(path: str) -> Dict[Tuple[int, int], Tuple[int, int, int]]:
    """(round, slot) -> own outcome string"""
    tape = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            record = json.loads(line)
            outcome = record.get("alpha", record.get("beta"))
            j, k = record["setting_pair"]
            tape[(record["round"], slot_of(j, k))] = tuple(outcome)
    return tape
