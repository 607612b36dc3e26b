"""
Dense reference simulator

Explicit matrices for Majorana operators on the 2^n-dimensional Fock space
of n pairs (Jordan-Wigner chain):

    c_{2j-1} = Z x ... x Z x X x 1 x ... x 1
    c_{2j}   = Z x ... x Z x Y x 1 x ... x 1      (X/Y on qubit j)

so i c_{2j-1} c_{2j} = -Z_j and the standard initialisation is |1...1>.
Only meant for small instances; everything else is validated against it.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError, ConsistencyError, DimensionError, ResourceError
import majorana_algebra as ma
import stabilizer_sim as ss


_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass
class DenseState:
    amplitudes: np.ndarray
    mode_count: int

    def __post_init__(self):
        dim = self.amplitudes.shape[0]
        if dim != 2 ** (self.mode_count // 2) or self.mode_count % 2:
            raise DimensionError(f"{dim} amplitudes do not fit {self.mode_count} modes")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-9:
            raise ArgumentError(f"State vector has norm {norm}")

    @property
    def n_pairs(self) -> int:
        return self.mode_count // 2


@dataclass
class OracleRun:
    transcript: Tuple[int, ...]
    state: DenseState


def _check_size(n_pairs: int):
    if n_pairs < 1:
        raise ArgumentError(f"n_pairs must be >= 1, got {n_pairs}")
    if 2 * n_pairs > config.MAX_ORACLE_MODES:
        raise ResourceError(f"{2 * n_pairs} modes exceed the oracle cap of {config.MAX_ORACLE_MODES}")


@lru_cache(maxsize=None)
def majorana_matrices(n_pairs: int) -> Tuple[np.ndarray, ...]:
    """c_1 ... c_2n as dense matrices"""
    _check_size(n_pairs)
    matrices = []
    for j in range(n_pairs):
        for local in (_X, _Y):
            factors = [_Z] * j + [local] + [_I2] * (n_pairs - j - 1)
            matrices.append(reduce(np.kron, factors))
    for matrix in matrices:
        matrix.setflags(write=False)
    return tuple(matrices)


def represent(s: ma.MajoranaString, n_pairs: int) -> np.ndarray:
    """Matrix of i^q c_a1 ... c_ak on n pairs"""
    if s.modes and s.modes[-1] > 2 * n_pairs:
        raise DimensionError(f"{s} does not fit on {2 * n_pairs} modes")
    c = majorana_matrices(n_pairs)
    result = (1j ** s.phase_power) * np.eye(2 ** n_pairs, dtype=complex)
    for j in s.modes:
        result = result @ c[j - 1]
    return result


def charge_observable(n_pairs: int, j: int, k: int) -> np.ndarray:
    c = majorana_matrices(n_pairs)
    return 1j * c[j - 1] @ c[k - 1]


def projector(n_pairs: int, j: int, k: int, outcome: int) -> np.ndarray:
    """(1 + m i c_j c_k) / 2"""
    return 0.5 * (np.eye(2 ** n_pairs, dtype=complex) + outcome * charge_observable(n_pairs, j, k))


def braid_unitary(n_pairs: int, j: int, k: int) -> np.ndarray:
    """exp((pi/4) c_k c_j) = (1 + c_k c_j)/sqrt(2); conjugation sends c_j -> c_k, c_k -> -c_j"""
    c = majorana_matrices(n_pairs)
    return (np.eye(2 ** n_pairs, dtype=complex) + c[k - 1] @ c[j - 1]) / np.sqrt(2.0)


def init_state(n_pairs: int) -> DenseState:
    _check_size(n_pairs)
    amplitudes = np.zeros(2 ** n_pairs, dtype=complex)
    amplitudes[-1] = 1.0
    return DenseState(amplitudes, 2 * n_pairs)


def state_from_accessible(state: ss.AccessibleState) -> DenseState:
    """Vector stabilised by every matching record (global phase arbitrary)"""
    _check_size(state.n_pairs)
    dim = 2 ** state.n_pairs
    projection = np.eye(dim, dtype=complex)
    for generator in state.stabilizers():
        projection = projection @ (0.5 * (np.eye(dim) + represent(generator, state.n_pairs)))
    column = int(np.argmax(np.linalg.norm(projection, axis=0)))
    vector = projection[:, column]
    return DenseState(vector / np.linalg.norm(vector), state.n_modes)


def _check_modes(n_pairs: int, j: int, k: int):
    if j == k or not (1 <= j <= 2 * n_pairs and 1 <= k <= 2 * n_pairs):
        raise ArgumentError(f"Invalid mode pair ({j}, {k}) for {2 * n_pairs} modes")


def measurement_branches(psi: DenseState, j: int, k: int) -> List[Tuple[float, int, DenseState]]:
    """Born-rule branches of measuring i c_j c_k on a pure state"""
    _check_modes(psi.n_pairs, j, k)
    branches = []
    for m in (1, -1):
        projected = projector(psi.n_pairs, j, k, m) @ psi.amplitudes
        probability = float(np.vdot(projected, projected).real)
        if probability > config.ORACLE_ZERO_TOL:
            branches.append((probability, m, DenseState(projected / np.sqrt(probability), psi.mode_count)))
    return branches


def oracle_run(program: Sequence[ss.Instruction], seed: int, n_pairs: int,
               initial: Optional[DenseState] = None) -> OracleRun:
    """Sample one transcript of a braid/measure program from the dense state"""
    rng = np.random.default_rng(seed)
    psi = initial if initial is not None else init_state(n_pairs)
    transcript = []
    for instruction in program:
        _check_modes(psi.n_pairs, instruction.j, instruction.k)
        if instruction.op == ss.BRAID:
            amplitudes = braid_unitary(psi.n_pairs, instruction.j, instruction.k) @ psi.amplitudes
            psi = DenseState(amplitudes, psi.mode_count)
        elif instruction.op == ss.MEASURE:
            branches = measurement_branches(psi, instruction.j, instruction.k)
            draw = rng.random()
            chosen = branches[-1]
            cumulative = 0.0
            for branch in branches:
                cumulative += branch[0]
                if draw < cumulative:
                    chosen = branch
                    break
            transcript.append(chosen[1])
            psi = chosen[2]
        else:
            raise ArgumentError(f"Unknown instruction {instruction.op!r}")
    if DebugConfig.oracle_enabled:
        debug_log("DEBUG-ORACLE", f"oracle_run seed={seed} transcript={transcript}")
    return OracleRun(tuple(transcript), psi)


def transcript_distribution(program: Sequence[ss.Instruction], n_pairs: int,
                            initial: Optional[DenseState] = None) -> Dict[Tuple[int, ...], float]:
    """Exact (floating point) transcript distribution by branching on every measurement"""
    psi = initial if initial is not None else init_state(n_pairs)
    branches = [(1.0, (), psi)]
    for instruction in program:
        if instruction.op == ss.BRAID:
            unitary = braid_unitary(psi.n_pairs, instruction.j, instruction.k)
            branches = [(p, t, DenseState(unitary @ s.amplitudes, s.mode_count)) for p, t, s in branches]
            continue
        grown = []
        for p, transcript, current in branches:
            for q, m, post in measurement_branches(current, instruction.j, instruction.k):
                grown.append((p * q, transcript + (m,), post))
        branches = grown
    distribution: Dict[Tuple[int, ...], float] = {}
    for p, transcript, _ in branches:
        distribution[transcript] = distribution.get(transcript, 0.0) + p
    return distribution


def as_dyadic(probability: float) -> Fraction:
    """Exact value of a stabilizer-state probability; denominators must be powers of two"""
    exact = Fraction(probability).limit_denominator(1 << 20)
    if exact.denominator & (exact.denominator - 1) or abs(float(exact) - probability) > config.ORACLE_ZERO_TOL:
        raise ConsistencyError(f"Probability {probability!r} is not dyadic")
    return exact


def covariance_of(psi: DenseState) -> np.ndarray:
    """gamma_jk = <i c_j c_k> for j != k"""
    return covariance_of_density(density_from_state(psi), psi.n_pairs)


def covariance_of_density(rho: np.ndarray, n_pairs: int) -> np.ndarray:
    n_modes = 2 * n_pairs
    gamma = np.zeros((n_modes, n_modes))
    for j in range(1, n_modes + 1):
        for k in range(j + 1, n_modes + 1):
            value = np.trace(rho @ charge_observable(n_pairs, j, k)).real
            gamma[j - 1, k - 1] = value
            gamma[k - 1, j - 1] = -value
    return gamma


def density_from_state(psi: DenseState) -> np.ndarray:
    return np.outer(psi.amplitudes, psi.amplitudes.conj())


def depolarize_global(rho: np.ndarray, eps: float) -> np.ndarray:
    """(1 - eps) rho + eps 1/d"""
    if not 0.0 <= eps <= 1.0:
        raise ArgumentError(f"eps must lie in [0, 1], got {eps}")
    dim = rho.shape[0]
    return (1.0 - eps) * rho + eps * np.eye(dim) / dim


def depolarize_pairs(state: ss.AccessibleState, eps: float) -> np.ndarray:
    """Independent depolarisation of every matched pair: 2^-n prod_r (1 + (1-eps) g_r)

    This is the state whose covariance matrix is (1 - eps) gamma.
    """
    if not 0.0 <= eps <= 1.0:
        raise ArgumentError(f"eps must lie in [0, 1], got {eps}")
    _check_size(state.n_pairs)
    dim = 2 ** state.n_pairs
    rho = np.eye(dim, dtype=complex)
    for generator in state.stabilizers():
        rho = rho @ (np.eye(dim) + (1.0 - eps) * represent(generator, state.n_pairs))
    return rho / dim


def joint_outcome_probabilities(rho: np.ndarray, n_pairs: int,
                                pairs: Sequence[Tuple[int, int]]) -> Dict[Tuple[int, ...], float]:
    """P(m_1, ..., m_r) for commuting charge observables measured together on rho"""
    for j, k in pairs:
        _check_modes(n_pairs, j, k)
    result = {}
    outcomes_list = [()]
    for _ in pairs:
        outcomes_list = [o + (m,) for o in outcomes_list for m in (1, -1)]
    for outcomes in outcomes_list:
        joint = np.eye(2 ** n_pairs, dtype=complex)
        for (j, k), m in zip(pairs, outcomes):
            joint = joint @ projector(n_pairs, j, k, m)
        result[outcomes] = float(np.trace(joint @ rho).real)
    return result
