"""
Teleportation and dense coding with braids and charge measurements

Teleportation (12 modes): a_1..a_8 = c_1..c_8 are Alice's, b_1..b_4 =
c_9..c_12 Bob's. Four shared pairs i a_j b_j carry Alice's input register
a_5..a_8, which starts stabilised by i a5a6 and i a7a8 and is optionally
braided (a_6, a_7) before the protocol starts.

Dense coding (6 modes): a_1..a_4 = c_1..c_4, b_1, b_2 = c_5, c_6. Shared
pairs i a1b1, i a2b2 plus Alice's local ancilla i a3a4.
"""

import inspect
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.stats import chi2_contingency

from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError, ConsistencyError
import dense_oracle
import gaussian_sim as gs
import stabilizer_sim as ss


SCENARIO_BRAIDED = "I"
SCENARIO_PLAIN = "II"
SCENARIOS = (SCENARIO_BRAIDED, SCENARIO_PLAIN)

TELEPORT_PAIRS = 6
ALICE_TELEPORT_MODES = tuple(range(1, 9))
BOB_TELEPORT_MODES = tuple(range(9, 13))


# ---------------------------------------------------------------------------
# Teleportation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TeleportSetup:
    scenario: str = SCENARIO_PLAIN

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ArgumentError(f"Scenario must be one of {SCENARIOS}, got {self.scenario!r}")


class TeleportOutcome(NamedTuple):
    message: Tuple[int, int, int, int]
    bob_raw: Tuple[int, int]
    corrected: Tuple[int, int]


def shared_resource() -> ss.AccessibleState:
    """i a_j b_j for j = 1..4, input register i a5a6 and i a7a8"""
    records = [(j, 8 + j, 1) for j in range(1, 5)] + [(5, 6, 1), (7, 8, 1)]
    return ss.AccessibleState.from_records(TELEPORT_PAIRS, records)


def prepare_input(setup: TeleportSetup) -> ss.AccessibleState:
    """The only step that reads the scenario"""
    state = shared_resource()
    if setup.scenario == SCENARIO_BRAIDED:
        state = ss.braid(state, 6, 7)
    return state


def teleport_program() -> List[ss.Instruction]:
    """Alice's cross measurements i a5a1, i a6a2, i a7a3, i a8a4, then Bob's i b1b2, i b3b4"""
    alice = [ss.Instruction(ss.MEASURE, 4 + j, j) for j in range(1, 5)]
    bob = [ss.Instruction(ss.MEASURE, 9, 10), ss.Instruction(ss.MEASURE, 11, 12)]
    return alice + bob


def correct(message: Sequence[int], bob_raw: Sequence[int]) -> Tuple[int, int]:
    """Bob's corrected outcomes: b12 * m1 * m2 and b34 * m3 * m4"""
    m1, m2, m3, m4 = message
    return bob_raw[0] * m1 * m2, bob_raw[1] * m3 * m4


def _split_transcript(transcript: Sequence[int]) -> TeleportOutcome:
    message, raw = tuple(transcript[:4]), tuple(transcript[4:])
    return TeleportOutcome(message, raw, correct(message, raw))


def run_teleport(state: ss.AccessibleState, rng: np.random.Generator) -> TeleportOutcome:
    """One run of the protocol on an already prepared state"""
    transcript, _ = ss.run_program(state, teleport_program(), rng)
    outcome = _split_transcript(transcript)
    if DebugConfig.protocols_enabled:
        debug_log("DEBUG-PROTOCOLS", f"teleport message={outcome.message} raw={outcome.bob_raw}")
    return outcome


def teleport(setup: TeleportSetup, seed: int) -> TeleportOutcome:
    return run_teleport(prepare_input(setup), np.random.default_rng(seed))


def teleport_transcript_lines(outcome: TeleportOutcome) -> List[str]:
    """JSON lines (step, operator, outcome) of one run"""
    observables = ["i a5 a1", "i a6 a2", "i a7 a3", "i a8 a4", "i b1 b2", "i b3 b4"]
    values = list(outcome.message) + list(outcome.bob_raw)
    lines = [json.dumps({"step": step, "operator": op, "outcome": m}, sort_keys=True)
             for step, (op, m) in enumerate(zip(observables, values))]
    lines.append(json.dumps({"step": len(values), "operator": "correction", "outcome": list(outcome.corrected)},
                            sort_keys=True))
    return lines


def _transcripts(state: ss.AccessibleState, program: Sequence[ss.Instruction], backend: str) -> Dict:
    if backend == "stabilizer":
        return ss.transcript_distribution(state, program)
    if backend == "gaussian":
        return gs.transcript_distribution(gs.from_state(state), program)
    if backend == "oracle":
        initial = dense_oracle.state_from_accessible(state)
        return {t: dense_oracle.as_dyadic(p)
                for t, p in dense_oracle.transcript_distribution(program, state.n_pairs, initial).items()}
    raise ArgumentError(f"Unknown backend {backend!r}")


def teleport_distribution(setup: TeleportSetup, backend: str = "stabilizer") -> Dict[TeleportOutcome, object]:
    """Exact distribution of (message, raw Bob outcomes, corrected outcomes)"""
    transcripts = _transcripts(prepare_input(setup), teleport_program(), backend)
    return {_split_transcript(t): p for t, p in transcripts.items()}


def corrected_distribution(setup: TeleportSetup, backend: str = "stabilizer") -> Dict[Tuple[int, int], object]:
    result: Dict[Tuple[int, int], object] = {}
    for outcome, p in teleport_distribution(setup, backend).items():
        result[outcome.corrected] = result.get(outcome.corrected, 0) + p
    return result


def direct_input_distribution(setup: TeleportSetup, backend: str = "stabilizer") -> Dict[Tuple[int, int], object]:
    """Outcomes of measuring i a5a6 and i a7a8 straight on the prepared input"""
    program = [ss.Instruction(ss.MEASURE, 5, 6), ss.Instruction(ss.MEASURE, 7, 8)]
    return dict(_transcripts(prepare_input(setup), program, backend))


def message_marginal(setup: TeleportSetup) -> Dict[Tuple[int, ...], Fraction]:
    result: Dict[Tuple[int, ...], Fraction] = {}
    for outcome, p in teleport_distribution(setup).items():
        result[outcome.message] = result.get(outcome.message, Fraction(0)) + p
    return result


def total_variation(p: Dict, q: Dict):
    keys = set(p) | set(q)
    return sum(abs(p.get(key, 0) - q.get(key, 0)) for key in keys) / 2


def discrimination_probability() -> Fraction:
    """Best success probability for telling scenario I from II given everything Bob holds, equal priors"""
    braided = teleport_distribution(TeleportSetup(SCENARIO_BRAIDED))
    plain = teleport_distribution(TeleportSetup(SCENARIO_PLAIN))
    observed_braided: Dict[Tuple, Fraction] = {}
    observed_plain: Dict[Tuple, Fraction] = {}
    for source, target in ((braided, observed_braided), (plain, observed_plain)):
        for outcome, p in source.items():
            key = (outcome.message, outcome.bob_raw)
            target[key] = target.get(key, Fraction(0)) + p
    keys = set(observed_braided) | set(observed_plain)
    return sum(max(observed_braided.get(k, Fraction(0)), observed_plain.get(k, Fraction(0))) for k in keys) / 2


def split_seeds(seed: int, count: int) -> List[np.random.SeedSequence]:
    """Per-worker seeds: SeedSequence(seed).spawn(count)"""
    return np.random.SeedSequence(seed).spawn(count)


def teleport_trials(setup: TeleportSetup, trials: int, seed: int, threads: int = 1) -> Dict[Tuple[int, int], int]:
    """Counts of corrected outcomes over sampled runs"""
    threads = max(1, int(threads))
    state = prepare_input(setup)
    sizes = [trials // threads + (1 if w < trials % threads else 0) for w in range(threads)]

    def work(args):
        size, seed_seq = args
        rng = np.random.default_rng(seed_seq)
        counts: Dict[Tuple[int, int], int] = {}
        for _ in range(size):
            corrected = run_teleport(state, rng).corrected
            counts[corrected] = counts.get(corrected, 0) + 1
        return counts

    jobs = list(zip(sizes, split_seeds(seed, threads)))
    if threads == 1:
        partials = [work(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(work, jobs))
    total: Dict[Tuple[int, int], int] = {}
    for counts in partials:
        for key, value in counts.items():
            total[key] = total.get(key, 0) + value
    return total


def direct_trials(setup: TeleportSetup, trials: int, seed: int) -> Dict[Tuple[int, int], int]:
    state = prepare_input(setup)
    program = [ss.Instruction(ss.MEASURE, 5, 6), ss.Instruction(ss.MEASURE, 7, 8)]
    rng = np.random.default_rng(seed)
    counts: Dict[Tuple[int, int], int] = {}
    for _ in range(trials):
        transcript, _ = ss.run_program(state, program, rng)
        counts[transcript] = counts.get(transcript, 0) + 1
    return counts


def two_sample_pvalue(first: Dict, second: Dict) -> float:
    """Chi-square homogeneity test between two count tables"""
    keys = sorted(set(first) | set(second))
    if len(keys) < 2:
        return 1.0
    table = np.array([[first.get(k, 0) for k in keys], [second.get(k, 0) for k in keys]])
    _, pvalue, _, _ = chi2_contingency(table)
    return float(pvalue)


def teleport_summary(setup: TeleportSetup, trials: int, seed: int, threads: int = 1) -> dict:
    corrected = corrected_distribution(setup)
    direct = direct_input_distribution(setup)
    sampled = teleport_trials(setup, trials, seed, threads) if trials > 0 else {}
    sampled_direct = direct_trials(setup, trials, seed + 1) if trials > 0 else {}
    return {
        "scenario": setup.scenario,
        "seed": seed,
        "trials": trials,
        "corrected_distribution": _fraction_rows(corrected),
        "direct_distribution": _fraction_rows(direct),
        "total_variation": str(total_variation(corrected, direct)),
        "discrimination_probability": str(discrimination_probability()),
        "sampled_counts": {_key(k): v for k, v in sorted(sampled.items())},
        "two_sample_pvalue": two_sample_pvalue(sampled, sampled_direct) if trials > 0 else None,
    }


def _key(outcome: Sequence[int]) -> str:
    return ",".join(f"{m:+d}" for m in outcome)


def _fraction_rows(distribution: Dict) -> Dict[str, str]:
    return {_key(k): str(Fraction(v)) for k, v in sorted(distribution.items())}


def protocol_reads_scenario(function) -> bool:
    """True if a post-preparation step could see the scenario through its signature"""
    parameters = inspect.signature(function).parameters
    return any(name in ("setup", "scenario") for name in parameters)


# ---------------------------------------------------------------------------
# Dense coding
# ---------------------------------------------------------------------------

DENSE_PAIRS = 3
ALICE_DENSE_MODES = (1, 2, 3, 4)
TRANSMITTED_MODES = (1, 2)
_SINK = 3


@dataclass
class DenseCodeSetup:
    state: ss.AccessibleState = field(
        default_factory=lambda: ss.AccessibleState.from_records(DENSE_PAIRS, [(1, 5, 1), (2, 6, 1), (3, 4, 1)]))
    op_log: List[ss.Instruction] = field(default_factory=list)


def flip_pairs(message_bits: Tuple[int, int]) -> List[Tuple[int, int]]:
    """Mode pairs whose double exchange realises the sign pattern

    Modes a1 (if gamma1), a2 (if gamma2) and the sink a3 (if gamma1 xor
    gamma2) are negated; the set always has even size.
    """
    gamma1, gamma2 = message_bits
    if gamma1 not in (0, 1) or gamma2 not in (0, 1):
        raise ArgumentError(f"Message bits must be 0 or 1, got {message_bits}")
    flips = [m for m, bit in ((1, gamma1), (2, gamma2), (_SINK, gamma1 ^ gamma2)) if bit]
    if len(flips) % 2:
        raise ConsistencyError(f"Odd number of sign flips {flips}")
    return [tuple(flips[i:i + 2]) for i in range(0, len(flips), 2)]


def audit_alice_local(op_log: Sequence[ss.Instruction]):
    for instruction in op_log:
        if instruction.op != ss.BRAID or not {instruction.j, instruction.k} <= set(ALICE_DENSE_MODES):
            raise ConsistencyError(f"Non-local or non-braid operation in Alice's encoding: {instruction}")


def dense_encode(setup: DenseCodeSetup, message_bits: Tuple[int, int]) -> ss.AccessibleState:
    """Alice-local double braids giving signs (-1)^g1 on a1b1, (-1)^g2 on a2b2, (-1)^(g1+g2) on a3a4"""
    state = setup.state
    for p, q in flip_pairs(message_bits):
        for _ in range(2):
            instruction = ss.Instruction(ss.BRAID, p, q)
            setup.op_log.append(instruction)
            state = ss.braid(state, p, q)
    audit_alice_local(setup.op_log)
    if DebugConfig.protocols_enabled:
        debug_log("DEBUG-PROTOCOLS", f"dense_encode {message_bits} -> {state}")
    return state


def dense_decode(state: ss.AccessibleState) -> Tuple[int, int]:
    """Bob measures i a1b1 and i a2b2 after receiving a1, a2; -1 reads as bit 1"""
    bits = []
    for a, b in ((1, 5), (2, 6)):
        branches = ss.measure_branches(state, a, b)
        if len(branches) != 1:
            raise ConsistencyError(f"Decoding measurement i c{a} c{b} is not deterministic")
        _, m, state = branches[0]
        bits.append(0 if m == 1 else 1)
    return bits[0], bits[1]


def dense_round_trip() -> Dict[str, object]:
    results = {}
    for bits in itertools.product((0, 1), repeat=2):
        setup = DenseCodeSetup()
        decoded = dense_decode(dense_encode(setup, bits))
        results[f"{bits[0]}{bits[1]}"] = {"decoded": list(decoded), "ok": decoded == bits,
                                          "braids": [list(i[1:]) for i in setup.op_log]}
    return {"messages": results, "successes": sum(r["ok"] for r in results.values())}


def _matchings(modes: Sequence[int]):
    if not modes:
        yield []
        return
    first, rest = modes[0], modes[1:]
    for index, partner in enumerate(rest):
        remaining = rest[:index] + rest[index + 1:]
        for tail in _matchings(remaining):
            yield [(first, partner)] + tail


def accessible_states(n_pairs: int) -> List[ss.AccessibleState]:
    """Every signed perfect matching on 2n modes"""
    states = []
    for matching in _matchings(list(range(1, 2 * n_pairs + 1))):
        for signs in itertools.product((1, -1), repeat=n_pairs):
            states.append(ss.AccessibleState.from_records(
                n_pairs, [(j, k, s) for (j, k), s in zip(matching, signs)]))
    return states


def _distinguishable(first: np.ndarray, second: np.ndarray) -> bool:
    # some charge measurement on the received modes is deterministic with opposite outcomes
    return bool(np.any(np.abs(first - second) == 2))


def unassisted_capacity_check(transmitted_modes: int = 2, ancilla_pairs: int = 1) -> dict:
    """Largest perfectly distinguishable set of preparations of the transmitted modes without shared pairs"""
    if transmitted_modes < 0 or transmitted_modes % 2:
        raise ArgumentError(f"Transmitted mode count must be even and non-negative, got {transmitted_modes}")
    if transmitted_modes == 0:
        return {"transmitted_modes": 0, "preparations": 1, "distinct_reduced_states": 1,
                "max_distinguishable": 1, "distinguishable_set": [[]], "bits": 0.0,
                "entanglement_assisted_bits": 0.0}
    n_pairs = transmitted_modes // 2 + ancilla_pairs
    received = list(range(1, transmitted_modes + 1))
    preparations = accessible_states(n_pairs)
    reduced_states: List[np.ndarray] = []
    for state in preparations:
        block = gs.reduced(gs.from_state(state), received)
        if not any(np.array_equal(block, seen) for seen in reduced_states):
            reduced_states.append(block)
    best: List[int] = []
    for size in range(len(reduced_states), 0, -1):
        for subset in itertools.combinations(range(len(reduced_states)), size):
            if all(_distinguishable(reduced_states[a], reduced_states[b])
                   for a, b in itertools.combinations(subset, 2)):
                best = list(subset)
                break
        if best:
            break
    assisted = dense_round_trip()["successes"]
    return {
        "transmitted_modes": transmitted_modes,
        "preparations": len(preparations),
        "distinct_reduced_states": len(reduced_states),
        "max_distinguishable": len(best),
        "distinguishable_set": [reduced_states[i].tolist() for i in best],
        "bits": math.log2(len(best)),
        "entanglement_assisted_bits": math.log2(assisted) if transmitted_modes == 2 else None,
    }
