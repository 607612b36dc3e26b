"""
Backend equivalence checks: stabilizer_sim vs gaussian_sim vs dense_oracle

Two passes:
  - exhaustive: every accessible state reachable from init(n) within
    `depth` instructions, and every instruction of the grammar applied to
    it, must give the same branch probabilities and post-states on all
    three backends. Agreement on every single step implies agreement on
    every program of that depth.
  - random: whole programs run independently on each backend and the
    transcript distributions are compared (exact rationals for the
    stabilizer and oracle paths, FLOAT_MATCH_TOL for the float paths).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence

import numpy as np

import config
from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError, ConsistencyError
import dense_oracle as do
import gaussian_sim as gs
import stabilizer_sim as ss

EXHAUSTIVE_MAX_PAIRS = 4
MAX_REPORTED_MISMATCHES = 20


def instruction_alphabet(n_pairs: int) -> List[ss.Instruction]:
    """Braids on every ordered mode pair, measurements on every unordered one"""
    n_modes = 2 * n_pairs
    braids = [ss.Instruction(ss.BRAID, j, k)
              for j in range(1, n_modes + 1) for k in range(1, n_modes + 1) if j != k]
    measures = [ss.Instruction(ss.MEASURE, j, k)
                for j in range(1, n_modes + 1) for k in range(j + 1, n_modes + 1)]
    return braids + measures


def random_program(n_pairs: int, length: int, rng: np.random.Generator) -> List[ss.Instruction]:
    """Uniform ops on uniform ordered mode pairs (measurement orientation included)"""
    n_modes = 2 * n_pairs
    program = []
    for _ in range(length):
        j, k = (int(x) + 1 for x in rng.choice(n_modes, size=2, replace=False))
        op = ss.BRAID if rng.random() < 0.5 else ss.MEASURE
        program.append(ss.Instruction(op, j, k))
    return program


def parse_program(text: str) -> List[ss.Instruction]:
    """'braid 1 3; measure 2 3' -> instructions"""
    program = []
    for chunk in text.replace("\n", ";").split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split()
        if len(parts) != 3 or parts[0] not in (ss.BRAID, ss.MEASURE):
            raise ArgumentError(f"Bad instruction {chunk.strip()!r} (expected 'braid J K' or 'measure J K')")
        program.append(ss.Instruction(parts[0], int(parts[1]), int(parts[2])))
    return program


def reachable_states(n_pairs: int, depth: int) -> Dict[ss.AccessibleState, int]:
    """Accessible states reachable from init(n) within depth instructions -> first depth seen"""
    alphabet = instruction_alphabet(n_pairs)
    seen = {ss.init(n_pairs): 0}
    frontier = [ss.init(n_pairs)]
    for level in range(1, depth + 1):
        grown = []
        for state in frontier:
            for instruction in alphabet:
                for _, _, post in _stabilizer_step(state, instruction):
                    if post not in seen:
                        seen[post] = level
                        grown.append(post)
        if not grown:
            break
        frontier = grown
    return seen


# States are hashable values; the conversions are reused across the alphabet
_dense_of = lru_cache(maxsize=None)(do.state_from_accessible)
_covariance_of = lru_cache(maxsize=None)(gs.from_state)


def _stabilizer_step(state: ss.AccessibleState, instruction: ss.Instruction):
    if instruction.op == ss.BRAID:
        return [(Fraction(1), None, ss.braid(state, instruction.j, instruction.k))]
    return ss.measure_branches(state, instruction.j, instruction.k)


def _gaussian_step(cov: gs.CovarianceMatrix, instruction: ss.Instruction):
    if instruction.op == ss.BRAID:
        return [(1.0, None, gs.braid(cov, instruction.j, instruction.k))]
    return gs.measure_branches(cov, instruction.j, instruction.k)


def _oracle_step(psi: do.DenseState, instruction: ss.Instruction):
    if instruction.op == ss.BRAID:
        unitary = do.braid_unitary(psi.n_pairs, instruction.j, instruction.k)
        return [(1.0, None, do.DenseState(unitary @ psi.amplitudes, psi.mode_count))]
    return do.measurement_branches(psi, instruction.j, instruction.k)


def _dyadic_equals(value: float, exact: Fraction) -> bool:
    try:
        return do.as_dyadic(value) == exact
    except ConsistencyError:
        return False


def _same_ray(left: do.DenseState, right: do.DenseState) -> bool:
    return abs(abs(np.vdot(left.amplitudes, right.amplitudes)) - 1.0) < config.FLOAT_MATCH_TOL


def step_mismatches(state: ss.AccessibleState, instruction: ss.Instruction) -> List[str]:
    """Disagreements between the three backends for one instruction on one state"""
    where = f"{instruction.op}({instruction.j},{instruction.k}) on [{state}]"
    exact = {m: (p, post) for p, m, post in _stabilizer_step(state, instruction)}
    problems = []

    gaussian = {m: (p, post) for p, m, post in _gaussian_step(_covariance_of(state), instruction)}
    if set(gaussian) != set(exact):
        problems.append(f"{where}: gaussian outcomes {sorted(gaussian, key=str)} != {sorted(exact, key=str)}")
    else:
        for m, (p, post) in exact.items():
            q, cov = gaussian[m]
            if abs(q - float(p)) > config.FLOAT_MATCH_TOL:
                problems.append(f"{where}: gaussian P({m}) = {q} != {p}")
            elif not cov.allclose(_covariance_of(post)):
                problems.append(f"{where}: gaussian post-state differs for outcome {m}")

    if state.n_modes <= config.MAX_ORACLE_MODES:
        oracle = {m: (p, post) for p, m, post in _oracle_step(_dense_of(state), instruction)}
        if set(oracle) != set(exact):
            problems.append(f"{where}: oracle outcomes {sorted(oracle, key=str)} != {sorted(exact, key=str)}")
        else:
            for m, (p, post) in exact.items():
                q, psi = oracle[m]
                if not _dyadic_equals(q, p):
                    problems.append(f"{where}: oracle P({m}) = {q} != {p}")
                elif not _same_ray(psi, _dense_of(post)):
                    problems.append(f"{where}: oracle post-state differs for outcome {m}")
    return problems


def program_mismatches(program: Sequence[ss.Instruction], n_pairs: int) -> List[str]:
    """Whole-program transcript distributions, each backend propagating on its own"""
    where = "; ".join(f"{i.op} {i.j} {i.k}" for i in program)
    exact = ss.transcript_distribution(ss.init(n_pairs), program)
    problems = []
    floats = gs.transcript_distribution(gs.from_state(ss.init(n_pairs)), program)
    if set(floats) != set(exact):
        problems.append(f"[{where}]: gaussian transcripts {sorted(floats)} != {sorted(exact)}")
    elif any(abs(floats[t] - float(p)) > config.FLOAT_MATCH_TOL for t, p in exact.items()):
        problems.append(f"[{where}]: gaussian transcript probabilities differ")
    if 2 * n_pairs <= config.MAX_ORACLE_MODES:
        dense = do.transcript_distribution(program, n_pairs)
        if set(dense) != set(exact):
            problems.append(f"[{where}]: oracle transcripts {sorted(dense)} != {sorted(exact)}")
        elif not all(_dyadic_equals(dense[t], p) for t, p in exact.items()):
            problems.append(f"[{where}]: oracle transcript probabilities differ")
    return problems


@dataclass
class CrosscheckReport:
    n_pairs: int
    depth: int
    seed: int
    states_visited: int = 0
    steps_checked: int = 0
    random_programs: int = 0
    mismatch_count: int = 0
    mismatches: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.mismatch_count == 0

    def add(self, problems: List[str]):
        self.mismatch_count += len(problems)
        room = MAX_REPORTED_MISMATCHES - len(self.mismatches)
        self.mismatches.extend(problems[:max(room, 0)])

    def to_dict(self) -> dict:
        return {
            "pairs": self.n_pairs,
            "depth": self.depth,
            "seed": self.seed,
            "states_visited": self.states_visited,
            "steps_checked": self.steps_checked,
            "random_programs": self.random_programs,
            "mismatches": self.mismatch_count,
            "examples": self.mismatches,
            "verdict": "PASS" if self.passed else "FAIL",
        }


def crosscheck(n_pairs: int, depth: int, trials: int = 0, seed: int = config.DEFAULT_SEED) -> CrosscheckReport:
    """Exhaustive single-step pass (small n) plus `trials` random programs of length `depth`"""
    if n_pairs < 1 or depth < 0 or trials < 0:
        raise ArgumentError(f"Need n_pairs >= 1, depth >= 0, trials >= 0; got {n_pairs}, {depth}, {trials}")
    report = CrosscheckReport(n_pairs, depth, seed)
    if n_pairs <= EXHAUSTIVE_MAX_PAIRS:
        states = reachable_states(n_pairs, depth)
        alphabet = instruction_alphabet(n_pairs)
        report.states_visited = len(states)
        for state, level in states.items():
            if level == depth:
                # Successors of the last layer are deeper than asked for
                continue
            for instruction in alphabet:
                report.add(step_mismatches(state, instruction))
                report.steps_checked += 1
        if DebugConfig.crosscheck_enabled:
            debug_log("DEBUG-CROSSCHECK", f"exhaustive pass: {report.states_visited} states, "
                                          f"{report.steps_checked} steps, {report.mismatch_count} mismatches")
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        report.add(program_mismatches(random_program(n_pairs, depth, rng), n_pairs))
        report.random_programs += 1
    if DebugConfig.crosscheck_enabled:
        debug_log("DEBUG-CROSSCHECK", f"random pass: {report.random_programs} programs, "
                                      f"{report.mismatch_count} mismatches total")
    return report
