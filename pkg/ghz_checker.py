"""
GHZ no-go checker

Every accessible stabilizer group has even pairwise and even triplewise
support overlaps. A GHZ stabilizer set built from local encodings has
triple overlap sum_j |X_j & Z_j|, which is odd because each X_j must
anticommute with Z_j. These functions check both sides of that argument.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError
import config
import majorana_algebra as ma
import stabilizer_sim as ss


@dataclass
class ParityReport:
    checked: int
    violations: List[dict] = field(default_factory=list)
    noncommuting: int = 0  # groups holding a non-commuting pair (not a stabilizer group)

    @property
    def verdict(self) -> str:
        return "pass" if not self.violations else "violation"

    def to_dict(self) -> dict:
        return {"checked": self.checked, "violations": self.violations,
                "noncommuting": self.noncommuting, "verdict": self.verdict}


def _support_matrix(group: Sequence[ma.MajoranaString]) -> np.ndarray:
    n_modes = group[0].n_modes
    matrix = np.zeros((len(group), n_modes), dtype=np.int64)
    for row, s in enumerate(group):
        for j in s.modes:
            matrix[row, j - 1] = 1
    return matrix


def pair_violations(group: Sequence[ma.MajoranaString], limit: int = 10) -> List[dict]:
    """Pairs with odd overlap (at most limit of them)"""
    if len(group) < 2:
        return []
    supports = _support_matrix(group)
    overlaps = supports @ supports.T
    odd = np.argwhere(np.triu(overlaps % 2, 1))
    return [{"operators": [str(group[a]), str(group[b])], "overlap": int(overlaps[a, b])}
            for a, b in odd[:limit]]


def triple_violations(group: Sequence[ma.MajoranaString], limit: int = 10) -> List[dict]:
    """Triples (distinct members) with odd common overlap"""
    if len(group) < 3:
        return []
    supports = _support_matrix(group).astype(np.float64)
    found = []
    for a in range(len(group) - 2):
        # rows: b = a + 1 + r; keep columns c > b
        common = supports[a] * supports[a + 1:]
        overlaps = np.rint(common @ supports.T).astype(np.int64)
        odd = np.argwhere(np.triu(overlaps % 2, a + 2))
        for r, c in odd:
            b = a + 1 + int(r)
            found.append({"operators": [str(group[a]), str(group[b]), str(group[c])],
                          "overlap": int(overlaps[r, c])})
            if len(found) >= limit:
                return found
    return found


def noncommuting_pair(group: Sequence[ma.MajoranaString]) -> Optional[Tuple[ma.MajoranaString, ma.MajoranaString]]:
    """First pair of members that anticommute, or None for a commuting group

    Same rule as ma.commutes (|s||t| - overlap even), over the whole group at once.
    """
    if len(group) < 2:
        return None
    supports = _support_matrix(group)
    weights = supports.sum(axis=1)
    odd = np.argwhere(np.triu((np.outer(weights, weights) - supports @ supports.T) % 2, 1))
    if not len(odd):
        return None
    s, t = group[int(odd[0][0])], group[int(odd[0][1])]
    if DebugConfig.ghz_enabled:
        debug_log("DEBUG-GHZ", f"group members {s} and {t} do not commute")
    return s, t


def check_pair_parity(group: Sequence[ma.MajoranaString]) -> bool:
    """True iff every pair of members shares an even number of modes"""
    if DebugConfig.ghz_enabled:
        noncommuting_pair(group)
    return not pair_violations(group, limit=1)


def check_triple_parity(group: Sequence[ma.MajoranaString]) -> bool:
    """True iff every triple of members shares an even number of modes"""
    if DebugConfig.ghz_enabled:
        noncommuting_pair(group)
    return not triple_violations(group, limit=1)


# ---------------------------------------------------------------------------
# Encodings
# ---------------------------------------------------------------------------

@dataclass
class EncodingCandidate:
    """Local X_j, Z_j per party, each supported on that party's modes"""
    parties: Tuple[Tuple[int, ...], ...]
    x: Tuple[ma.MajoranaString, ...]
    z: Tuple[ma.MajoranaString, ...]

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def n_modes(self) -> int:
        return self.x[0].n_modes

    def validate(self):
        if self.n_parties < 3:
            raise ArgumentError(f"A GHZ encoding needs at least three parties, got {self.n_parties}")
        if not (len(self.x) == len(self.z) == self.n_parties):
            raise ArgumentError("Need one X and one Z per party")
        seen = set()
        for index, modes in enumerate(self.parties, start=1):
            if seen & set(modes):
                raise ArgumentError(f"Party {index} shares modes with another party")
            seen.update(modes)
        for index, (modes, x, z) in enumerate(zip(self.parties, self.x, self.z), start=1):
            for label, s in (("X", x), ("Z", z)):
                if s.n_modes != self.n_modes:
                    raise ArgumentError(f"{label}_{index} lives on {s.n_modes} modes, expected {self.n_modes}")
                if not set(s.modes) <= set(modes):
                    raise ArgumentError(f"{label}_{index} = {s} leaves party {index}'s modes {modes}")
                if s.is_identity or not s.is_physical:
                    raise ArgumentError(f"{label}_{index} = {s} must be a product of an even number of modes")
                if not s.is_hermitian:
                    raise ArgumentError(f"{label}_{index} = {s} is not Hermitian")
            if ma.commutes(x, z):
                raise ArgumentError(f"X_{index} = {x} and Z_{index} = {z} commute; not an encoding")


def _canonical_modes(n_parties: int) -> int:
    top = 3 * n_parties + 2
    return top if top % 2 == 0 else top + 1


def canonical_encoding(n_parties: int = 3) -> EncodingCandidate:
    """Z_j = i c_{3j} c_{3j+1}, X_j = i c_{3j} c_{3j+2}"""
    n_modes = _canonical_modes(n_parties)
    parties, xs, zs = [], [], []
    for j in range(1, n_parties + 1):
        parties.append((3 * j, 3 * j + 1, 3 * j + 2))
        zs.append(ma.pair(n_modes, 3 * j, 3 * j + 1))
        xs.append(ma.pair(n_modes, 3 * j, 3 * j + 2))
    return EncodingCandidate(tuple(parties), tuple(xs), tuple(zs))


def ghz_stabilizers(candidate: EncodingCandidate) -> List[ma.MajoranaString]:
    """S_l = X_l prod_{i != l} Z_i for every party, then S_3 S_2 S_1"""
    candidate.validate()
    n_modes = candidate.n_modes
    stabilizers = []
    for l in range(candidate.n_parties):
        factors = [candidate.x[i] if i == l else candidate.z[i] for i in range(candidate.n_parties)]
        stabilizers.append(ma.product(factors, n_modes))
    stabilizers.append(ma.product([stabilizers[2], stabilizers[1], stabilizers[0]], n_modes))
    return stabilizers


def ghz_obstruction(candidate: EncodingCandidate) -> dict:
    """Parity bookkeeping showing the GHZ set is not an accessible stabilizer group"""
    stabilizers = ghz_stabilizers(candidate)
    parities = [ma.overlap(x, z) % 2 for x, z in zip(candidate.x, candidate.z)]
    first_three = stabilizers[:3]
    overlap = ma.triple_overlap(*first_three)
    expected = sum(ma.overlap(x, z) for x, z in zip(candidate.x[:3], candidate.z[:3]))
    expected += sum(z.weight for z in candidate.z[3:])
    if overlap != expected:
        raise ArgumentError(f"Triple overlap {overlap} differs from the local sum {expected}")
    obstructed = overlap % 2 == 1
    report = {
        "anticomm_parity": parities,
        "parity_sum": sum(parities[:3]),
        "triple_overlap": overlap,
        "stabilizers": [str(s) for s in stabilizers],
        "triple_parity_holds": check_triple_parity(first_three),
        "verdict": "obstructed" if obstructed else "not obstructed",
    }
    if DebugConfig.ghz_enabled:
        debug_log("DEBUG-GHZ", f"obstruction report: overlap={overlap} parities={parities}")
    return report


def local_strings(modes: Sequence[int], n_modes: int, weights: Sequence[int] = (2, 4)) -> List[ma.MajoranaString]:
    """Hermitian even-weight strings on the given modes, one per support

    Signs do not change overlaps, so each support is taken once with the
    Hermitian phase of its weight.
    """
    strings = []
    for weight in weights:
        for support in itertools.combinations(modes, weight):
            phase = 1 if (weight * (weight - 1) // 2) % 2 else 0
            strings.append(ma.from_modes(n_modes, support, phase))
    return strings


def local_encodings(modes: Sequence[int], n_modes: int,
                    weights: Sequence[int] = (2, 4)) -> List[Tuple[ma.MajoranaString, ma.MajoranaString]]:
    """Every anticommuting (X, Z) pair of local strings"""
    strings = local_strings(modes, n_modes, weights)
    return [(x, z) for x in strings for z in strings if not ma.commutes(x, z)]


@dataclass
class EncodingScan:
    modes_per_party: int
    per_party: int
    parity_counts: Dict[str, int]
    combinations: int
    even_sum_candidates: int
    symbolic_checked: int
    rejected_pairs: int = 0
    rejected_candidates: int = 0
    sampled: int = 0

    @property
    def verdict(self) -> str:
        return "obstructed" if self.even_sum_candidates == 0 else "counterexample"

    def to_dict(self) -> dict:
        return {
            "modes_per_party": self.modes_per_party,
            "per_party": self.per_party,
            "parity_counts": self.parity_counts,
            "combinations": self.combinations,
            "even_sum_candidates": self.even_sum_candidates,
            "symbolic_checked": self.symbolic_checked,
            "rejected_pairs": self.rejected_pairs,
            "rejected_candidates": self.rejected_candidates,
            "sampled": self.sampled,
            "verdict": self.verdict,
        }


def exhaustive_encoding_scan(modes_per_party: int = 6, n_parties: int = 3, samples: int = 0,
                             seed: int = config.DEFAULT_SEED) -> EncodingScan:
    """All weight-2/weight-4 local encodings on modes_per_party modes per party

    Every ordered (X, Z) pair of local strings is classified: commuting
    pairs are rejected, the rest are split by the parity of |X & Z|. The
    number of full combinations with an even first-three parity sum
    follows from those per-party counts. On top of that, every
    single-party variation of a base encoding and `samples` random full
    combinations go through ghz_obstruction, which rebuilds the
    stabilizers and measures their triple overlap directly.
    """
    if not 2 <= modes_per_party <= 6:
        raise ArgumentError(f"modes_per_party must lie in 2..6, got {modes_per_party}")
    if samples < 0:
        raise ArgumentError(f"samples must be non-negative, got {samples}")
    n_modes = n_parties * modes_per_party
    parties = [tuple(range(p * modes_per_party + 1, (p + 1) * modes_per_party + 1)) for p in range(n_parties)]

    choices = []
    scan = EncodingScan(modes_per_party, 0, {"odd": 0, "even": 0}, 0, 0, 0)
    for modes in parties:
        strings = local_strings(modes, n_modes)
        accepted = []
        for x in strings:
            for z in strings:
                if ma.commutes(x, z):
                    scan.rejected_pairs += 1
                else:
                    accepted.append((x, z))
        choices.append(accepted)
    if not choices[0]:
        raise ArgumentError(f"No anticommuting local pair on {modes_per_party} modes")
    scan.per_party = len(choices[0])
    odd = sum(1 for x, z in choices[0] if ma.overlap(x, z) % 2)
    scan.parity_counts = {"odd": odd, "even": scan.per_party - odd}
    scan.combinations = scan.per_party ** n_parties

    # number of combinations whose first-three parity sum is even
    for pattern in itertools.product((0, 1), repeat=3):
        if sum(pattern) % 2 == 0:
            ways = 1
            for bit in pattern:
                ways *= scan.parity_counts["odd"] if bit else scan.parity_counts["even"]
            scan.even_sum_candidates += ways * scan.per_party ** (n_parties - 3)

    def check(pick):
        candidate = EncodingCandidate(tuple(parties), tuple(p[0] for p in pick), tuple(p[1] for p in pick))
        try:
            verdict = ghz_obstruction(candidate)["verdict"]
        except ArgumentError as e:
            scan.rejected_candidates += 1
            if DebugConfig.ghz_enabled:
                debug_log("DEBUG-GHZ", f"rejected candidate: {e}")
            return
        scan.symbolic_checked += 1
        if verdict != "obstructed":
            scan.even_sum_candidates += 1

    base = [choice[0] for choice in choices]
    for party in range(n_parties):
        for pair in choices[party]:
            pick = list(base)
            pick[party] = pair
            check(pick)
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        check([choice[int(rng.integers(len(choice)))] for choice in choices])
        scan.sampled += 1
    if DebugConfig.ghz_enabled:
        debug_log("DEBUG-GHZ", f"encoding scan: {scan.per_party} pairs per party, "
                               f"{scan.rejected_pairs} rejected pairs, {scan.symbolic_checked} checked")
    return scan


# ---------------------------------------------------------------------------
# Random accessible states
# ---------------------------------------------------------------------------

def random_accessible_state(n_pairs: int, rng: np.random.Generator, length: Optional[int] = None) -> ss.AccessibleState:
    """init(n) followed by a random word of braids and charge measurements"""
    state = ss.init(n_pairs)
    if n_pairs == 1:
        return state
    length = 4 * n_pairs if length is None else length
    for _ in range(length):
        j, k = (int(x) + 1 for x in rng.choice(2 * n_pairs, size=2, replace=False))
        if rng.random() < 0.5:
            state = ss.braid(state, min(j, k), max(j, k))
        else:
            _, state = ss.measure_pair(state, j, k, rng)
    return state


def random_accessible_scan(n_pairs: int, trials: int, seed: int,
                           inject: Optional[Sequence[ma.MajoranaString]] = None) -> ParityReport:
    """Pair and triple parities on the full stabilizer groups of random accessible states

    inject appends extra operators to every group (negative control).
    """
    if not 1 <= n_pairs <= config.MAX_SCAN_PAIRS:
        raise ArgumentError(f"n_pairs must lie in 1..{config.MAX_SCAN_PAIRS}, got {n_pairs}")
    rng = np.random.default_rng(seed)
    report = ParityReport(checked=0)
    for trial in range(trials):
        state = random_accessible_state(n_pairs, rng)
        group = state.stabilizer_group() + list(inject or [])
        found = pair_violations(group) + triple_violations(group)
        if noncommuting_pair(group) is not None:
            report.noncommuting += 1
        for violation in found:
            violation["trial"] = trial
        report.violations.extend(found)
        report.checked += 1
    if DebugConfig.ghz_enabled:
        debug_log("DEBUG-GHZ", f"scan n_pairs={n_pairs}: {report.checked} groups, {len(report.violations)} violations")
    return report
