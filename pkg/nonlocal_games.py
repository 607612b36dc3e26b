"""
Nonlocal games engine

Joint distributions P(alpha, beta | j, k), game functions V, the
magic-square observables on five shared Majorana pairs, exhaustive
classical bounds over deterministic strategies, the four-pair
distribution with its hidden-variable model, and noise sweeps.

Conventions:
    - settings are 1-based; outcome strings are tuples of +1/-1
    - Alice's setting j is column j of her table, Bob's setting k is row k
      of his, so they share the cell (row k, column j): alpha_k = beta_j
    - exact probabilities are Fractions, noisy ones floats
"""

import csv
import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

import config
from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError, ConsistencyError
import dense_oracle
import gaussian_sim as gs
import majorana_algebra as ma
import stabilizer_sim as ss


MAGIC_SQUARE_PAIRS = 5
FOUR_PAIR_PAIRS = 4
BELL_BOUND = 7

Outcome = Tuple[int, ...]


def outcome_strings(length: int) -> List[Outcome]:
    """All +-1 strings of the given length, (+,...,+) first"""
    return list(itertools.product((1, -1), repeat=length))


def outcome_index(outcome: Sequence[int]) -> int:
    index = 0
    for value in outcome:
        index = (index << 1) | (1 if value == -1 else 0)
    return index


def _exact(value):
    if isinstance(value, (int, Fraction)):
        return value
    value = float(value)
    return int(value) if value.is_integer() else value


# ---------------------------------------------------------------------------
# Distributions and games
# ---------------------------------------------------------------------------

@dataclass
class JointDistribution:
    """P(alpha, beta | j, k); missing entries are zero"""
    n_settings: int
    outcome_length: int
    table: Dict[Tuple[int, int], Dict[Tuple[Outcome, Outcome], object]] = field(default_factory=dict)

    def probability(self, alpha: Outcome, beta: Outcome, j: int, k: int):
        return self.table.get((j, k), {}).get((tuple(alpha), tuple(beta)), 0)

    def add(self, alpha: Outcome, beta: Outcome, j: int, k: int, p):
        cell = self.table.setdefault((j, k), {})
        key = (tuple(alpha), tuple(beta))
        cell[key] = cell.get(key, 0) + p

    def settings(self) -> List[Tuple[int, int]]:
        return [(j, k) for j in range(1, self.n_settings + 1) for k in range(1, self.n_settings + 1)]

    def validate(self, tol: float = 0.0):
        """Normalization and non-negativity per setting pair"""
        for j, k in self.settings():
            cell = self.table.get((j, k), {})
            if any(p < -tol for p in cell.values()):
                raise ArgumentError(f"Negative probability at setting ({j}, {k})")
            total = sum(cell.values())
            if abs(total - 1) > tol:
                raise ArgumentError(f"Setting ({j}, {k}) sums to {total}, not 1")

    def alice_marginal(self, j: int, k: int) -> Dict[Outcome, object]:
        marginal: Dict[Outcome, object] = {}
        for (alpha, _), p in self.table.get((j, k), {}).items():
            marginal[alpha] = marginal.get(alpha, 0) + p
        return {a: p for a, p in marginal.items() if p != 0}

    def bob_marginal(self, j: int, k: int) -> Dict[Outcome, object]:
        marginal: Dict[Outcome, object] = {}
        for (_, beta), p in self.table.get((j, k), {}).items():
            marginal[beta] = marginal.get(beta, 0) + p
        return {b: p for b, p in marginal.items() if p != 0}

    def is_non_signalling(self, tol: float = 0.0) -> bool:
        settings = range(1, self.n_settings + 1)
        for j in settings:
            reference = self.alice_marginal(j, 1)
            for k in settings:
                if not _same_support_values(reference, self.alice_marginal(j, k), tol):
                    return False
        for k in settings:
            reference = self.bob_marginal(1, k)
            for j in settings:
                if not _same_support_values(reference, self.bob_marginal(j, k), tol):
                    return False
        return True

    def equals(self, other: "JointDistribution", tol: float = 0.0) -> bool:
        if (self.n_settings, self.outcome_length) != (other.n_settings, other.outcome_length):
            return False
        for j, k in self.settings():
            keys = set(self.table.get((j, k), {})) | set(other.table.get((j, k), {}))
            for alpha, beta in keys:
                if abs(self.probability(alpha, beta, j, k) - other.probability(alpha, beta, j, k)) > tol:
                    return False
        return True

    def support(self, j: int, k: int) -> List[Tuple[Outcome, Outcome]]:
        """Outcome pairs with non-zero probability, in a fixed order"""
        return sorted(key for key, p in self.table.get((j, k), {}).items() if p != 0)

    def to_dict(self) -> dict:
        entries = []
        for j, k in self.settings():
            for alpha, beta in self.support(j, k):
                p = Fraction(self.probability(alpha, beta, j, k))
                entries.append({"j": j, "k": k, "alpha": list(alpha), "beta": list(beta),
                                "p_num": p.numerator, "p_den": p.denominator})
        return {
            "settings": list(range(1, self.n_settings + 1)),
            "outcomes": [list(o) for o in outcome_strings(self.outcome_length)],
            "entries": entries,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "JointDistribution":
        outcomes = data["outcomes"]
        distribution = cls(len(data["settings"]), len(outcomes[0]) if outcomes else 0)
        for entry in data["entries"]:
            p = Fraction(entry["p_num"], entry["p_den"])
            distribution.add(tuple(entry["alpha"]), tuple(entry["beta"]), entry["j"], entry["k"], p)
        return distribution

    @classmethod
    def from_json(cls, text: str) -> "JointDistribution":
        return cls.from_dict(json.loads(text))


def _same_support_values(left: dict, right: dict, tol: float) -> bool:
    for key in set(left) | set(right):
        if abs(left.get(key, 0) - right.get(key, 0)) > tol:
            return False
    return True


@dataclass
class GameFunction:
    """V(alpha, beta, j, k) tabulated as values[a_index, b_index, j-1, k-1]"""
    name: str
    n_settings: int
    outcome_length: int
    values: np.ndarray

    @classmethod
    def from_rule(cls, name: str, n_settings: int, outcome_length: int,
                  rule: Callable[[Outcome, Outcome, int, int], float]) -> "GameFunction":
        strings = outcome_strings(outcome_length)
        values = np.zeros((len(strings), len(strings), n_settings, n_settings))
        for a, alpha in enumerate(strings):
            for b, beta in enumerate(strings):
                for j in range(1, n_settings + 1):
                    for k in range(1, n_settings + 1):
                        values[a, b, j - 1, k - 1] = rule(alpha, beta, j, k)
        values.setflags(write=False)
        return cls(name, n_settings, outcome_length, values)

    def __call__(self, alpha: Outcome, beta: Outcome, j: int, k: int):
        return _exact(self.values[outcome_index(alpha), outcome_index(beta), j - 1, k - 1])


def magic_square_rule(alpha: Outcome, beta: Outcome, j: int, k: int) -> int:
    """+1 when the shared cell agrees and both local parities hold, else -1"""
    wins = (alpha[k - 1] == beta[j - 1]
            and alpha[0] * alpha[1] == alpha[2]
            and beta[0] * beta[1] == -beta[2])
    return 1 if wins else -1


def magic_square_game() -> GameFunction:
    return GameFunction.from_rule("magic_square", 3, 3, magic_square_rule)


def constant_game(value: float = 1, n_settings: int = 3, outcome_length: int = 3) -> GameFunction:
    return GameFunction.from_rule("constant", n_settings, outcome_length, lambda a, b, j, k: value)


def game_value(game: GameFunction, distribution: JointDistribution):
    """G(P) = sum V(alpha, beta, j, k) P(alpha, beta | j, k)"""
    if (game.n_settings, game.outcome_length) != (distribution.n_settings, distribution.outcome_length):
        raise ArgumentError(
            f"Game shape ({game.n_settings} settings, {game.outcome_length} outcomes) does not match "
            f"distribution ({distribution.n_settings}, {distribution.outcome_length})")
    total = 0
    for (j, k), cell in distribution.table.items():
        for (alpha, beta), p in cell.items():
            if p:
                total += game(alpha, beta, j, k) * p
    return total


def relabel_game(game: GameFunction, alice_settings: Sequence[int], bob_settings: Sequence[int],
                 alice_flips: Optional[Sequence[Outcome]] = None,
                 bob_flips: Optional[Sequence[Outcome]] = None) -> GameFunction:
    """V'(alpha, beta, j, k) = V(alpha * f_j, beta * g_k, pi(j), sigma(k))

    Settings are permuted by the given 1-based permutations; outputs are
    flipped elementwise per setting by the optional sign masks.
    """
    n = game.n_settings
    for perm in (alice_settings, bob_settings):
        if sorted(perm) != list(range(1, n + 1)):
            raise ArgumentError(f"{perm} is not a permutation of 1..{n}")
    ones = tuple([1] * game.outcome_length)
    alice_flips = alice_flips or [ones] * n
    bob_flips = bob_flips or [ones] * n

    def rule(alpha, beta, j, k):
        flipped_a = tuple(x * f for x, f in zip(alpha, alice_flips[j - 1]))
        flipped_b = tuple(x * f for x, f in zip(beta, bob_flips[k - 1]))
        return game(flipped_a, flipped_b, alice_settings[j - 1], bob_settings[k - 1])

    return GameFunction.from_rule(f"{game.name}_relabelled", n, game.outcome_length, rule)


# ---------------------------------------------------------------------------
# Deterministic strategies and the classical bound
# ---------------------------------------------------------------------------

SignTable = Tuple[Tuple[int, int, int], Tuple[int, int, int], Tuple[int, int, int]]


@dataclass(frozen=True)
class DeterministicStrategy:
    """Sign tables T^A, T^B; Alice answers columns, Bob answers rows"""
    alice_table: SignTable
    bob_table: SignTable

    def alice_output(self, j: int) -> Outcome:
        return tuple(row[j - 1] for row in self.alice_table)

    def bob_output(self, k: int) -> Outcome:
        return tuple(self.bob_table[k - 1])

    def to_dict(self) -> dict:
        return {"alice_table": [list(r) for r in self.alice_table],
                "bob_table": [list(r) for r in self.bob_table]}

    @classmethod
    def from_dict(cls, data: dict) -> "DeterministicStrategy":
        return cls(_as_table(data["alice_table"]), _as_table(data["bob_table"]))


def _as_table(rows) -> SignTable:
    table = tuple(tuple(int(x) for x in row) for row in rows)
    if len(table) != 3 or any(len(row) != 3 for row in table) or any(x not in (1, -1) for r in table for x in r):
        raise ArgumentError(f"A strategy table is 3x3 with +-1 entries, got {rows!r}")
    return table


def parity_strategy() -> DeterministicStrategy:
    """Parity-respecting tables that differ only in the bottom-right cell"""
    return DeterministicStrategy(
        ((1, 1, -1), (1, -1, 1), (1, -1, -1)),
        ((1, 1, -1), (1, -1, 1), (1, -1, 1)),
    )


def strategy_distribution(strategy: DeterministicStrategy) -> JointDistribution:
    distribution = JointDistribution(3, 3)
    for j, k in distribution.settings():
        distribution.add(strategy.alice_output(j), strategy.bob_output(k), j, k, Fraction(1))
    return distribution


class ClassicalBound(NamedTuple):
    value: object
    strategy: object
    checked: int


_ALL_TABLES = np.array(list(itertools.product((1, -1), repeat=9)), dtype=int).reshape(512, 3, 3)
_BIT_WEIGHTS = np.array([4, 2, 1])


def _table_outputs():
    # per table: outcome index of each column (Alice) and each row (Bob)
    columns = ((_ALL_TABLES.transpose(0, 2, 1) == -1) * _BIT_WEIGHTS).sum(axis=-1)
    rows = ((_ALL_TABLES == -1) * _BIT_WEIGHTS).sum(axis=-1)
    return columns, rows


def _generic_outputs(game: GameFunction):
    # every map setting -> outcome index, enumerated lexicographically
    n_outcomes = 2 ** game.outcome_length
    maps = np.array(list(itertools.product(range(n_outcomes), repeat=game.n_settings)), dtype=int)
    return maps, maps


def _score_block(values: np.ndarray, alice: np.ndarray, bob: np.ndarray) -> np.ndarray:
    n_settings = values.shape[2]
    scores = np.zeros((alice.shape[0], bob.shape[0]))
    for j in range(n_settings):
        for k in range(n_settings):
            scores += values[alice[:, j][:, None], bob[:, k][None, :], j, k]
    return scores


def classical_bound(game: GameFunction, identical: bool = False, threads: int = 1) -> ClassicalBound:
    """Exhaustive maximum of G over deterministic strategy pairs

    For 3 settings with 3-bit outcomes the strategies are sign tables (512
    per party); otherwise every map from settings to outcomes is scanned.
    Ties go to the lexicographically smallest (alice, bob) pair.
    """
    tables = game.n_settings == 3 and game.outcome_length == 3
    if identical and not tables:
        raise ArgumentError("Identical-table strategies need 3 settings and 3-bit outcomes")
    alice, bob = _table_outputs() if tables else _generic_outputs(game)

    if identical:
        scores = np.array([_score_block(game.values, alice[t:t + 1], bob[t:t + 1])[0, 0]
                           for t in range(alice.shape[0])])
        best = int(np.argmax(scores))
        strategy = _strategy_from(tables, alice, bob, best, best)
        return ClassicalBound(_exact(scores[best]), strategy, alice.shape[0])

    threads = max(1, int(threads))
    bounds = np.linspace(0, alice.shape[0], threads + 1, dtype=int)
    chunks = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]

    def scan(chunk):
        lo, hi = chunk
        scores = _score_block(game.values, alice[lo:hi], bob)
        flat = int(np.argmax(scores))
        a, b = divmod(flat, bob.shape[0])
        if DebugConfig.games_scan_progress:
            debug_log("DEBUG-GAMES", f"scanned alice strategies {lo}..{hi - 1}: best {scores[a, b]}")
        return scores[a, b], lo + a, b

    if threads == 1:
        results = [scan(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(scan, chunks))
    value, a, b = max(results, key=lambda r: (r[0], -r[1], -r[2]))
    strategy = _strategy_from(tables, alice, bob, a, b)
    if DebugConfig.games_enabled:
        debug_log("DEBUG-GAMES", f"classical bound of {game.name}: {value}")
    return ClassicalBound(_exact(value), strategy, alice.shape[0] * bob.shape[0])


def _strategy_from(tables: bool, alice: np.ndarray, bob: np.ndarray, a: int, b: int):
    if tables:
        return DeterministicStrategy(_as_table(_ALL_TABLES[a]), _as_table(_ALL_TABLES[b]))
    return {"alice": [int(x) + 1 for x in alice[a]], "bob": [int(x) + 1 for x in bob[b]]}


# ---------------------------------------------------------------------------
# Magic square on five shared pairs
# ---------------------------------------------------------------------------

# (phase power, a-modes) per cell, row-major; Bob's table swaps a for b
_ALICE_CELLS = (
    ((2, (1, 3, 4, 5)), (1, (1, 4)), (1, (3, 5))),
    ((1, (3, 4)), (2, (1, 2, 3, 4)), (3, (1, 2))),
    ((1, (1, 5)), (1, (2, 3)), (0, (1, 2, 3, 5))),
)
_BOB_CELLS = (
    ((2, (1, 3, 4, 5)), (3, (1, 4)), (3, (3, 5))),
    ((3, (3, 4)), (2, (1, 2, 3, 4)), (1, (1, 2))),
    ((3, (1, 5)), (3, (2, 3)), (0, (1, 2, 3, 5))),
)


class MagicSquare(NamedTuple):
    alice: Tuple[Tuple[ma.MajoranaString, ...], ...]
    bob: Tuple[Tuple[ma.MajoranaString, ...], ...]

    def alice_setting(self, j: int) -> Tuple[ma.MajoranaString, ...]:
        """Column j"""
        return tuple(self.alice[row][j - 1] for row in range(3))

    def bob_setting(self, k: int) -> Tuple[ma.MajoranaString, ...]:
        """Row k"""
        return self.bob[k - 1]


def magic_square_observables() -> MagicSquare:
    """Alice on a_1..a_5 = c_1..c_5, Bob on b_1..b_5 = c_6..c_10"""
    n_modes = 2 * MAGIC_SQUARE_PAIRS
    alice = tuple(tuple(ma.from_modes(n_modes, modes, phase) for phase, modes in row) for row in _ALICE_CELLS)
    bob = tuple(tuple(ma.from_modes(n_modes, [m + MAGIC_SQUARE_PAIRS for m in modes], phase)
                      for phase, modes in row) for row in _BOB_CELLS)
    square = MagicSquare(alice, bob)
    _check_square(square)
    return square


def square_checks(square: MagicSquare) -> List[Tuple[str, bool]]:
    """Every column product +1, every row product -1, every A.B cell a stabilizer"""
    n_modes = 2 * MAGIC_SQUARE_PAIRS
    plus, minus = ma.identity(n_modes), -ma.identity(n_modes)
    state = ss.shared_pairs(MAGIC_SQUARE_PAIRS)
    checks = []
    for name, table in (("alice", square.alice), ("bob", square.bob)):
        for c in range(3):
            column = ma.product((table[r][c] for r in range(3)), n_modes)
            checks.append((f"{name} column {c + 1} product", column == plus))
        for r in range(3):
            checks.append((f"{name} row {r + 1} product", ma.product(table[r], n_modes) == minus))
    for r in range(3):
        for c in range(3):
            cell = ma.multiply(square.alice[r][c], square.bob[r][c])
            checks.append((f"cell ({r + 1},{c + 1}) stabilizer", ss.expectation(state, cell) == 1))
    return checks


def _check_square(square: MagicSquare):
    failed = [name for name, ok in square_checks(square) if not ok]
    if failed:
        raise ConsistencyError(f"Magic square self-check failed: {', '.join(failed)}")


def quantum_distribution() -> JointDistribution:
    """Quantum magic-square distribution: 1/8 on shared-cell agreement with both parities, else 0"""
    distribution = JointDistribution(3, 3)
    alphas = [a for a in outcome_strings(3) if a[0] * a[1] == a[2]]
    betas = [b for b in outcome_strings(3) if b[0] * b[1] == -b[2]]
    for j, k in distribution.settings():
        for alpha in alphas:
            for beta in betas:
                if alpha[k - 1] == beta[j - 1]:
                    distribution.add(alpha, beta, j, k, Fraction(1, 8))
    return distribution


def simulated_quantum_distribution() -> JointDistribution:
    """The quantum distribution by exact branching of the stabilizer simulation on five shared pairs"""
    square = magic_square_observables()
    state = ss.shared_pairs(MAGIC_SQUARE_PAIRS)
    distribution = JointDistribution(3, 3)
    for j, k in distribution.settings():
        for p, alpha, post in ss.setting_branches(state, square.alice_setting(j)):
            for q, beta, _ in ss.setting_branches(post, square.bob_setting(k)):
                distribution.add(alpha, beta, j, k, p * q)
    return distribution


def sampled_quantum_distribution(rounds: int, seed: int) -> JointDistribution:
    """Empirical frequencies from sampled stabilizer runs, uniform settings"""
    square = magic_square_observables()
    rng = np.random.default_rng(seed)
    state = ss.shared_pairs(MAGIC_SQUARE_PAIRS)
    counts: Dict[Tuple[int, int], Dict] = {}
    for _ in range(rounds):
        j, k = (int(x) + 1 for x in rng.integers(3, size=2))
        alpha, post = ss.measure_setting(state, square.alice_setting(j), rng)
        beta, _ = ss.measure_setting(post, square.bob_setting(k), rng)
        cell = counts.setdefault((j, k), {})
        cell[(alpha, beta)] = cell.get((alpha, beta), 0) + 1
    distribution = JointDistribution(3, 3)
    for (j, k), cell in counts.items():
        total = sum(cell.values())
        for (alpha, beta), count in cell.items():
            distribution.add(alpha, beta, j, k, count / total)
    return distribution


def sample_joint(distribution: JointDistribution, j: int, k: int,
                 rng: np.random.Generator) -> Tuple[Outcome, Outcome]:
    """One (alpha, beta) draw for setting pair (j, k)"""
    support = distribution.support(j, k)
    weights = np.array([float(distribution.probability(a, b, j, k)) for a, b in support])
    return support[int(rng.choice(len(support), p=weights / weights.sum()))]


# ---------------------------------------------------------------------------
# Three and four shared pairs
# ---------------------------------------------------------------------------

class PauliTriple(NamedTuple):
    x: ma.MajoranaString
    y: ma.MajoranaString
    z: ma.MajoranaString


def pauli_triple(offset: int = 0, n_modes: int = 6) -> PauliTriple:
    """X = i m1 m2, Y = i m1 m3, Z = i m2 m3 on three modes starting after offset"""
    m1, m2, m3 = offset + 1, offset + 2, offset + 3
    triple = PauliTriple(ma.pair(n_modes, m1, m2), ma.pair(n_modes, m1, m3), ma.pair(n_modes, m2, m3))
    for first, second in itertools.combinations(triple, 2):
        if ma.commutes(first, second):
            raise ConsistencyError(f"{first} and {second} should anticommute")
    for s in triple:
        if ma.multiply(s, s) != ma.identity(n_modes):
            raise ConsistencyError(f"{s} does not square to the identity")
    xy = ma.multiply(triple.x, triple.y)
    if xy.support != triple.z.support:
        raise ConsistencyError(f"XY = {xy} is not proportional to Z = {triple.z}")
    return triple


def three_pair_correlations() -> np.ndarray:
    """<sigma_A sigma_B> on three shared pairs, rows/columns ordered X, Y, Z"""
    state = ss.shared_pairs(3)
    alice = pauli_triple(0, 6)
    bob = pauli_triple(3, 6)
    table = np.zeros((3, 3), dtype=int)
    for a, sa in enumerate(alice):
        for b, sb in enumerate(bob):
            table[a, b] = ss.expectation(state, ma.multiply(sa, sb))
    return table


_FOUR_PAIR_SETS = (((1, 2), (3, 4)), ((1, 3), (4, 2)), ((1, 4), (2, 3)))


def four_pair_observables() -> Tuple[List[Tuple[ma.MajoranaString, ...]], List[Tuple[ma.MajoranaString, ...]]]:
    """Alice's three commuting pairs on a_1..a_4 = c_1..c_4 and Bob's on b_j = c_{4+j}"""
    n_modes = 2 * FOUR_PAIR_PAIRS
    alice = [tuple(ma.pair(n_modes, j, k) for j, k in s) for s in _FOUR_PAIR_SETS]
    bob = [tuple(ma.pair(n_modes, j + FOUR_PAIR_PAIRS, k + FOUR_PAIR_PAIRS) for j, k in s) for s in _FOUR_PAIR_SETS]
    return alice, bob


def four_pair_distribution() -> JointDistribution:
    """1/4 on full anticorrelation for equal settings, 1/8 on matching parities otherwise"""
    distribution = JointDistribution(3, 2)
    strings = outcome_strings(2)
    for j, k in distribution.settings():
        for alpha in strings:
            for beta in strings:
                if j == k and beta == (-alpha[0], -alpha[1]):
                    distribution.add(alpha, beta, j, k, Fraction(1, 4))
                elif j != k and alpha[0] * alpha[1] == beta[0] * beta[1]:
                    distribution.add(alpha, beta, j, k, Fraction(1, 8))
    return distribution


def simulated_four_pair_distribution() -> JointDistribution:
    """Exact branching of Alice's then Bob's pair measurements on four shared pairs"""
    state = ss.shared_pairs(FOUR_PAIR_PAIRS)
    distribution = JointDistribution(3, 2)
    for j, k in distribution.settings():
        pairs = list(_FOUR_PAIR_SETS[j - 1])
        pairs += [(a + FOUR_PAIR_PAIRS, b + FOUR_PAIR_PAIRS) for a, b in _FOUR_PAIR_SETS[k - 1]]
        branches = [(Fraction(1), (), state)]
        for a, b in pairs:
            branches = [(p * q, t + (m,), post)
                        for p, t, current in branches
                        for q, m, post in ss.measure_branches(current, a, b)]
        for p, transcript, _ in branches:
            distribution.add(transcript[:2], transcript[2:], j, k, p)
    return distribution


class HiddenVariable(NamedTuple):
    nu: Tuple[int, int, int]
    mu: int


def hidden_variables() -> List[HiddenVariable]:
    return [HiddenVariable(tuple(nu), mu) for nu in itertools.product((1, -1), repeat=3) for mu in (1, -1)]


def lhv_alice(hv: HiddenVariable, j: int) -> Outcome:
    return hv.nu[j - 1], hv.mu * hv.nu[j - 1]


def lhv_bob(hv: HiddenVariable, k: int) -> Outcome:
    return -hv.nu[k - 1], -hv.mu * hv.nu[k - 1]


def four_pair_lhv() -> JointDistribution:
    """Distribution induced by the deterministic responses under uniform p(lambda) = 1/16"""
    distribution = JointDistribution(3, 2)
    weight = Fraction(1, 16)
    for hv in hidden_variables():
        for j, k in distribution.settings():
            distribution.add(lhv_alice(hv, j), lhv_bob(hv, k), j, k, weight)
    return distribution


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

class NoisePoint(NamedTuple):
    eps: float
    value: float
    mc_value: Optional[float]
    stderr: Optional[float]


@dataclass
class NoiseSweep:
    points: List[NoisePoint]
    threshold: Optional[float] = None
    bracket: Optional[Tuple[float, float]] = None
    rounds: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "points": [p._asdict() for p in self.points],
            "threshold": self.threshold,
            "bracket": list(self.bracket) if self.bracket else None,
            "rounds": self.rounds,
            "seed": self.seed,
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["eps", "G", "G_mc", "stderr"])
        for p in self.points:
            writer.writerow([repr(p.eps), repr(p.value),
                             "" if p.mc_value is None else repr(p.mc_value),
                             "" if p.stderr is None else repr(p.stderr)])
        return buffer.getvalue()


def _setting_plan(square: MagicSquare, j: int, k: int):
    alice = ss.split_setting(square.alice_setting(j))
    bob = ss.split_setting(square.bob_setting(k))
    return alice, bob


def _assemble(plan, raw: Sequence[int]) -> Outcome:
    # raw outcomes of the two measured pairs -> full outcome string
    measured, inferred_index, relative = plan
    outcomes = {}
    for (index, _, _, coefficient), m in zip(measured, raw):
        outcomes[index] = coefficient * m
    first, second = (outcomes[i] for i, _, _, _ in measured)
    outcomes[inferred_index] = relative * first * second
    return tuple(outcomes[i] for i in range(3))


def noisy_distribution(eps: float) -> JointDistribution:
    """Magic-square experiment on depolarize(gamma, eps) through the Gaussian backend"""
    square = magic_square_observables()
    start = gs.depolarize(gs.from_state(ss.shared_pairs(MAGIC_SQUARE_PAIRS)), eps)
    distribution = JointDistribution(3, 3)
    for j, k in distribution.settings():
        alice_plan, bob_plan = _setting_plan(square, j, k)
        pairs = [(a, b) for _, a, b, _ in alice_plan[0]] + [(a, b) for _, a, b, _ in bob_plan[0]]
        branches = [(1.0, (), start)]
        for a, b in pairs:
            branches = [(p * q, t + (m,), post)
                        for p, t, current in branches
                        for q, m, post in gs.measure_branches(current, a, b)]
        for p, raw, _ in branches:
            distribution.add(_assemble(alice_plan, raw[:2]), _assemble(bob_plan, raw[2:]), j, k, p)
    return distribution


def oracle_noisy_distribution(eps: float, channel: str = "pairs") -> JointDistribution:
    """Same experiment on an explicit density matrix

    channel "pairs" depolarises each shared pair independently (the state
    whose covariance is (1 - eps) gamma); "global" mixes the whole state
    with the identity.
    """
    square = magic_square_observables()
    state = ss.shared_pairs(MAGIC_SQUARE_PAIRS)
    if channel == "pairs":
        rho = dense_oracle.depolarize_pairs(state, eps)
    elif channel == "global":
        pure = dense_oracle.density_from_state(dense_oracle.state_from_accessible(state))
        rho = dense_oracle.depolarize_global(pure, eps)
    else:
        raise ArgumentError(f"Unknown noise channel {channel!r}")
    distribution = JointDistribution(3, 3)
    for j, k in distribution.settings():
        alice_plan, bob_plan = _setting_plan(square, j, k)
        pairs = [(a, b) for _, a, b, _ in alice_plan[0]] + [(a, b) for _, a, b, _ in bob_plan[0]]
        probabilities = dense_oracle.joint_outcome_probabilities(rho, MAGIC_SQUARE_PAIRS, pairs)
        for raw, p in probabilities.items():
            if p > config.ORACLE_ZERO_TOL:
                distribution.add(_assemble(alice_plan, raw[:2]), _assemble(bob_plan, raw[2:]), j, k, p)
    return distribution


def noisy_value(eps: float) -> float:
    return float(game_value(magic_square_game(), noisy_distribution(eps)))


def oracle_noisy_value(eps: float, channel: str = "pairs") -> float:
    return float(game_value(magic_square_game(), oracle_noisy_distribution(eps, channel)))


def monte_carlo_value(distribution: JointDistribution, rounds: int,
                      rng: np.random.Generator) -> Tuple[float, float]:
    """Empirical G with uniform setting pairs; returns (estimate, standard error)"""
    game = magic_square_game()
    settings = distribution.settings()
    picks = rng.integers(len(settings), size=rounds)
    scores = np.empty(rounds)
    for s, (j, k) in enumerate(settings):
        mask = picks == s
        count = int(mask.sum())
        if not count:
            continue
        support = distribution.support(j, k)
        weights = np.array([float(distribution.probability(a, b, j, k)) for a, b in support])
        values = np.array([float(game(a, b, j, k)) for a, b in support])
        drawn = rng.choice(len(support), size=count, p=weights / weights.sum())
        scores[mask] = values[drawn]
    scale = len(settings)
    stderr = scale * scores.std(ddof=1) / np.sqrt(rounds) if rounds > 1 else float("nan")
    return float(scale * scores.mean()), float(stderr)


def find_threshold(value_at: Callable[[float], float], lower: float, upper: float,
                   target: float = BELL_BOUND, tol: float = 1e-12) -> float:
    """Bisection for value_at(eps) = target on a decreasing bracket"""
    lo, hi = lower, upper
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if value_at(mid) >= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def noise_sweep(eps_grid: Sequence[float], rounds: int = 0, seed: int = config.DEFAULT_SEED) -> NoiseSweep:
    """G(eps) on the grid, optional Monte-Carlo estimates, and the crossing of the Bell bound"""
    for eps in eps_grid:
        if not 0.0 <= eps <= 1.0:
            raise ArgumentError(f"Grid value {eps} outside [0, 1]")
    rng = np.random.default_rng(seed)
    points = []
    for eps in eps_grid:
        distribution = noisy_distribution(float(eps))
        value = float(game_value(magic_square_game(), distribution))
        mc_value = stderr = None
        if rounds > 0:
            mc_value, stderr = monte_carlo_value(distribution, rounds, rng)
        points.append(NoisePoint(float(eps), value, mc_value, stderr))
        if DebugConfig.games_enabled:
            debug_log("DEBUG-GAMES", f"noise eps={eps:.6g} G={value:.12g}")
    sweep = NoiseSweep(points, rounds=rounds, seed=seed)
    ordered = sorted(points, key=lambda p: p.eps)
    for left, right in zip(ordered, ordered[1:]):
        if left.value > BELL_BOUND >= right.value:
            sweep.bracket = (left.eps, right.eps)
            sweep.threshold = find_threshold(noisy_value, left.eps, right.eps)
            break
    return sweep


def default_grid(points: int = config.NOISE_GRID_POINTS) -> List[float]:
    return [float(x) for x in np.linspace(0.0, 1.0, points)]
