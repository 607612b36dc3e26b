"""
Stabilizer simulator for accessible Majorana states

An accessible state (reachable from the standard initialisation by braids
and pairwise charge measurements) is a signed perfect matching of the 2n
modes: each record (j, k, sign) with j < k says the state is stabilised by
sign * i c_j c_k. Braids relabel modes with signs; a charge measurement of
an unmatched pair re-pairs four modes with a fair-coin outcome.

Anyonic reading: fusing anyons j and k is the charge measurement of
i c_j c_k, the vacuum channel is the +1 outcome and the psi channel is -1.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError, ConsistencyError, DimensionError
import majorana_algebra as ma


class PairRecord(NamedTuple):
    """sign * i c_j c_k stabilises the state (j < k)"""
    j: int
    k: int
    sign: int


class MeasurementRecord(NamedTuple):
    observable: ma.MajoranaString
    outcome: int


class Instruction(NamedTuple):
    """One step of a braid/measure program; op is 'braid' or 'measure'"""
    op: str
    j: int
    k: int


BRAID = "braid"
MEASURE = "measure"


@dataclass(frozen=True)
class AccessibleState:
    n_pairs: int
    records: Tuple[PairRecord, ...]

    def __post_init__(self):
        if self.n_pairs < 1:
            raise ArgumentError(f"An accessible state needs at least one pair, got {self.n_pairs}")
        object.__setattr__(self, "records", tuple(PairRecord(*r) for r in self.records))
        if len(self.records) != self.n_pairs:
            raise ArgumentError(f"Expected {self.n_pairs} matching records, got {len(self.records)}")
        seen = set()
        for record in self.records:
            if not (1 <= record.j < record.k <= self.n_modes):
                raise ArgumentError(f"Bad matching record {tuple(record)} for {self.n_modes} modes")
            if record.sign not in (1, -1):
                raise ArgumentError(f"Record sign must be +1 or -1, got {record.sign}")
            if record.j in seen or record.k in seen:
                raise ArgumentError(f"Mode appears twice in matching {self.records}")
            seen.update((record.j, record.k))
        object.__setattr__(self, "records", tuple(sorted(self.records)))

    @classmethod
    def from_records(cls, n_pairs: int, records: Iterable[Sequence[int]]) -> "AccessibleState":
        """Build from (j, k, sign) triples in any orientation"""
        normalised = []
        for j, k, sign in records:
            if j > k:
                # i c_k c_j = -i c_j c_k
                j, k, sign = k, j, -sign
            normalised.append(PairRecord(j, k, sign))
        return cls(n_pairs, tuple(normalised))

    @property
    def n_modes(self) -> int:
        return 2 * self.n_pairs

    @cached_property
    def _partners(self) -> Dict[int, PairRecord]:
        lookup = {}
        for record in self.records:
            lookup[record.j] = record
            lookup[record.k] = record
        return lookup

    def record_of(self, j: int) -> PairRecord:
        return self._partners[j]

    def partner(self, j: int) -> int:
        record = self._partners[j]
        return record.k if record.j == j else record.j

    def stabilizers(self) -> List[ma.MajoranaString]:
        """The n generators sign * i c_j c_k"""
        return [ma.pair(self.n_modes, r.j, r.k, r.sign) for r in self.records]

    def stabilizer_group(self) -> List[ma.MajoranaString]:
        """All 2^n products of generators"""
        group = [ma.identity(self.n_modes)]
        for generator in self.stabilizers():
            group += [ma.multiply(element, generator) for element in group]
        return group

    def to_dict(self) -> dict:
        return {"n_pairs": self.n_pairs, "matching": [list(r) for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AccessibleState":
        data = json.loads(text)
        return cls.from_records(data["n_pairs"], data["matching"])

    def __str__(self):
        return ", ".join(str(ma.pair(self.n_modes, r.j, r.k, r.sign)) for r in self.records)


def init(n_pairs: int) -> AccessibleState:
    """Standard initialisation, stabilised by i c_{2j-1} c_{2j}"""
    if n_pairs < 1:
        raise ArgumentError(f"n_pairs must be >= 1, got {n_pairs}")
    return AccessibleState(n_pairs, tuple(PairRecord(2 * j - 1, 2 * j, 1) for j in range(1, n_pairs + 1)))


def shared_pairs(n_pairs: int) -> AccessibleState:
    """Canonical two-party form: i a_j b_j with a_j = c_j and b_j = c_{j+n}"""
    if n_pairs < 1:
        raise ArgumentError(f"n_pairs must be >= 1, got {n_pairs}")
    return AccessibleState(n_pairs, tuple(PairRecord(j, j + n_pairs, 1) for j in range(1, n_pairs + 1)))


def braid(state: AccessibleState, j: int, k: int) -> AccessibleState:
    """Exchange modes j and k: c_j -> c_k, c_k -> -c_j on every stabilizer"""
    _check_pair(state, j, k)
    image = {j: (k, 1), k: (j, -1)}
    records = []
    for record in state.records:
        a, sign_a = image.get(record.j, (record.j, 1))
        b, sign_b = image.get(record.k, (record.k, 1))
        records.append((a, b, record.sign * sign_a * sign_b))
    if DebugConfig.stabilizer_enabled:
        debug_log("DEBUG-STABILIZER", f"braid({j},{k})")
    return AccessibleState.from_records(state.n_pairs, records)


def measure_branches(state: AccessibleState, j: int, k: int) -> List[Tuple[Fraction, int, AccessibleState]]:
    """Every possible outcome of measuring i c_j c_k with its exact probability"""
    _check_pair(state, j, k)
    record = state.record_of(j)
    if state.partner(j) == k:
        outcome = record.sign if record.j == j else -record.sign
        return [(Fraction(1), outcome, state)]
    return [(Fraction(1, 2), m, _collapse(state, j, k, m)) for m in (1, -1)]


def measure_pair(state: AccessibleState, j: int, k: int, rng: Optional[np.random.Generator] = None,
                 outcome: Optional[int] = None) -> Tuple[int, AccessibleState]:
    """Charge measurement of i c_j c_k

    Outcomes of an unmatched pair are drawn from rng; passing outcome
    post-selects that branch instead (it must have non-zero probability).
    """
    branches = measure_branches(state, j, k)
    if outcome is not None:
        for _, m, post in branches:
            if m == outcome:
                return m, post
        raise ArgumentError(f"Outcome {outcome} of i c{j} c{k} has probability zero")
    if len(branches) == 1:
        _, m, post = branches[0]
    else:
        if rng is None:
            raise ArgumentError("A random outcome needs an explicit rng")
        _, m, post = branches[int(rng.integers(2))]
    if DebugConfig.stabilizer_measurements:
        debug_log("DEBUG-STABILIZER", f"measure i c{j} c{k} -> {m:+d} ({fusion_channel(m)})")
    return m, post


def _collapse(state: AccessibleState, j: int, k: int, m: int) -> AccessibleState:
    # New group keeps (old s_j)(old s_k) and gains m i c_j c_k; their
    # product fixes the sign of the re-paired partners p, q.
    n_modes = state.n_modes
    old_j, old_k = state.record_of(j), state.record_of(k)
    p, q = state.partner(j), state.partner(k)
    observed = ma.pair(n_modes, j, k, m)
    joined = ma.product([ma.pair(n_modes, old_j.j, old_j.k, old_j.sign),
                         ma.pair(n_modes, old_k.j, old_k.k, old_k.sign),
                         observed], n_modes)
    if joined == ma.pair(n_modes, p, q, 1):
        partner_sign = 1
    elif joined == ma.pair(n_modes, p, q, -1):
        partner_sign = -1
    else:
        raise ConsistencyError(f"Re-pairing produced {joined}, expected +-i c{p} c{q}")
    records = [tuple(r) for r in state.records if r not in (old_j, old_k)]
    records += [(j, k, m), (p, q, partner_sign)]
    return AccessibleState.from_records(state.n_pairs, records)


def expectation(state: AccessibleState, s: ma.MajoranaString) -> int:
    """<s> on the state: +-1 when +-s is in the stabilizer group, else 0"""
    if s.n_modes != state.n_modes:
        raise DimensionError(f"Observable on {s.n_modes} modes, state has {state.n_modes}")
    if not s.is_physical or not s.is_hermitian:
        raise ArgumentError(f"Expectation needs a physical Hermitian observable, got {s}")
    covering = []
    for j in s.modes:
        if state.partner(j) not in s.modes:
            return 0
        record = state.record_of(j)
        if record.j == j:
            covering.append(ma.pair(state.n_modes, record.j, record.k, record.sign))
    element = ma.product(covering, state.n_modes)
    if element == s:
        return 1
    if element == -s:
        return -1
    raise ConsistencyError(f"Group element {element} and observable {s} differ by a non-real phase")


def global_parity(state: AccessibleState) -> int:
    """Sign relating the product of all records to i^n c_1 c_2 ... c_2n"""
    total = ma.product(state.stabilizers(), state.n_modes)
    reference = ma.MajoranaString(state.n_modes, (1 << state.n_modes) - 1, state.n_pairs)
    return 1 if total == reference else -1


def fusion_channel(outcome: int) -> str:
    """Ising-anyon name of a charge-measurement outcome"""
    return "1" if outcome == 1 else "psi"


def split_setting(triple: Sequence[ma.MajoranaString]):
    # -> ((index, mode j, mode k, coefficient) x 2, index of the inferred entry, relative sign)
    if len(triple) != 3:
        raise ArgumentError(f"A setting has three observables, got {len(triple)}")
    light = [i for i, s in enumerate(triple) if s.weight == 2]
    heavy = [i for i, s in enumerate(triple) if s.weight == 4]
    if len(light) != 2 or len(heavy) != 1:
        raise ArgumentError("A setting needs two weight-2 observables and one weight-4 observable")
    measured = []
    for i in light:
        s = triple[i]
        if not s.is_hermitian:
            raise ArgumentError(f"Observable {s} is not Hermitian")
        j, k = s.modes
        coefficient = 1 if s == ma.pair(s.n_modes, j, k) else -1
        measured.append((i, j, k, coefficient))
    first, second = triple[light[0]], triple[light[1]]
    if ma.overlap(first, second) != 0:
        raise ArgumentError(f"Measured observables {first} and {second} must be disjoint")
    joint = ma.multiply(first, second)
    inferred = triple[heavy[0]]
    if inferred == joint:
        relative = 1
    elif inferred == -joint:
        relative = -1
    else:
        raise ArgumentError(f"{inferred} is not +- the product of {first} and {second}")
    return measured, heavy[0], relative


def setting_branches(state: AccessibleState, triple: Sequence[ma.MajoranaString]):
    """Exact (probability, outcome triple, post-state) list for one magic-square setting"""
    measured, inferred_index, relative = split_setting(triple)
    branches = [(Fraction(1), {}, state)]
    for index, j, k, coefficient in measured:
        grown = []
        for probability, outcomes, current in branches:
            for p, m, post in measure_branches(current, j, k):
                grown.append((probability * p, {**outcomes, index: coefficient * m}, post))
        branches = grown
    result = []
    for probability, outcomes, post in branches:
        light_values = list(outcomes.values())
        outcomes[inferred_index] = relative * light_values[0] * light_values[1]
        result.append((probability, tuple(outcomes[i] for i in range(3)), post))
    return result


def measure_setting(state: AccessibleState, triple: Sequence[ma.MajoranaString],
                    rng: np.random.Generator) -> Tuple[Tuple[int, int, int], AccessibleState]:
    """Measure the two weight-2 observables, infer the weight-4 one"""
    measured, inferred_index, relative = split_setting(triple)
    outcomes = {}
    for index, j, k, coefficient in measured:
        m, state = measure_pair(state, j, k, rng)
        outcomes[index] = coefficient * m
    light_values = list(outcomes.values())
    outcomes[inferred_index] = relative * light_values[0] * light_values[1]
    return tuple(outcomes[i] for i in range(3)), state


def apply(state: AccessibleState, instruction: Instruction, rng=None, outcome=None):
    """Run one instruction; returns (outcome or None, new state)"""
    if instruction.op == BRAID:
        return None, braid(state, instruction.j, instruction.k)
    if instruction.op == MEASURE:
        return measure_pair(state, instruction.j, instruction.k, rng, outcome)
    raise ArgumentError(f"Unknown instruction {instruction.op!r}")


def run_program(state: AccessibleState, program: Sequence[Instruction],
                rng: np.random.Generator) -> Tuple[Tuple[int, ...], AccessibleState]:
    """Sample one transcript (measurement outcomes in order)"""
    transcript = []
    for instruction in program:
        m, state = apply(state, instruction, rng)
        if m is not None:
            transcript.append(m)
    return tuple(transcript), state


def transcript_distribution(state: AccessibleState, program: Sequence[Instruction]) -> Dict[Tuple[int, ...], Fraction]:
    """Exact distribution over measurement transcripts of a program"""
    branches = [(Fraction(1), (), state)]
    for instruction in program:
        if instruction.op == BRAID:
            branches = [(p, t, braid(s, instruction.j, instruction.k)) for p, t, s in branches]
            continue
        grown = []
        for p, transcript, current in branches:
            for q, m, post in measure_branches(current, instruction.j, instruction.k):
                grown.append((p * q, transcript + (m,), post))
        branches = grown
    distribution: Dict[Tuple[int, ...], Fraction] = {}
    for p, transcript, _ in branches:
        distribution[transcript] = distribution.get(transcript, Fraction(0)) + p
    return distribution


def transcript_lines(program: Sequence[Instruction], transcript: Sequence[int]) -> List[str]:
    """JSON lines (step, op, modes, outcome) for a sampled run"""
    lines = []
    outcomes = iter(transcript)
    for step, instruction in enumerate(program):
        entry = {"step": step, "op": instruction.op, "j": instruction.j, "k": instruction.k}
        if instruction.op == MEASURE:
            entry["outcome"] = next(outcomes)
        lines.append(json.dumps(entry, sort_keys=True))
    return lines


def _check_pair(state: AccessibleState, j: int, k: int):
    if j == k:
        raise ArgumentError(f"Modes must differ, got ({j}, {k})")
    for index in (j, k):
        if not 1 <= index <= state.n_modes:
            raise ArgumentError(f"Mode {index} outside 1..{state.n_modes}")
