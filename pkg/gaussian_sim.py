"""
Covariance-matrix backend for Gaussian fermionic states

A state of 2n Majorana modes is carried by its real antisymmetric
covariance matrix gamma_jk = <i c_j c_k> (j != k). Braids act as signed
permutation congruences, charge measurements by the Gaussian conditioning
rule, and noise as a uniform contraction toward the maximally mixed state.

Only the strict upper triangle is stored, so antisymmetry is exact.
"""

import json
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

import config
from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError, StateError
import stabilizer_sim as ss


class CovarianceMatrix:
    """Real antisymmetric 2n x 2n matrix; treat instances as immutable values"""

    def __init__(self, gamma):
        gamma = np.asarray(gamma, dtype=float)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1] or gamma.shape[0] % 2:
            raise ArgumentError(f"Covariance matrix must be square with even size, got shape {gamma.shape}")
        if not np.array_equal(gamma, -gamma.T):
            raise ArgumentError("Covariance matrix is not antisymmetric")
        self._upper = np.triu(gamma, 1)
        self._upper.setflags(write=False)

    @classmethod
    def _from_upper(cls, matrix: np.ndarray) -> "CovarianceMatrix":
        # trusted internal path: keep the upper triangle of a computed matrix
        obj = cls.__new__(cls)
        obj._upper = np.triu(np.asarray(matrix, dtype=float), 1)
        obj._upper.setflags(write=False)
        return obj

    @property
    def n_modes(self) -> int:
        return self._upper.shape[0]

    @property
    def n_pairs(self) -> int:
        return self.n_modes // 2

    @property
    def gamma(self) -> np.ndarray:
        return self._upper - self._upper.T

    def entry(self, j: int, k: int) -> float:
        """gamma_jk with 1-based modes"""
        if j == k:
            return 0.0
        if j < k:
            return float(self._upper[j - 1, k - 1])
        return -float(self._upper[k - 1, j - 1])

    def __eq__(self, other):
        if not isinstance(other, CovarianceMatrix):
            return NotImplemented
        return np.array_equal(self._upper, other._upper)

    def __hash__(self):
        return hash(self._upper.tobytes())

    def __repr__(self):
        return f"CovarianceMatrix({self.gamma.tolist()!r})"

    def allclose(self, other: "CovarianceMatrix", tol: float = config.FLOAT_MATCH_TOL) -> bool:
        return self.n_modes == other.n_modes and np.allclose(self._upper, other._upper, atol=tol, rtol=0)

    def to_json(self) -> str:
        return json.dumps({"n_modes": self.n_modes, "gamma": self.gamma.tolist()}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CovarianceMatrix":
        data = json.loads(text)
        cov = cls(data["gamma"])
        if cov.n_modes != data.get("n_modes", cov.n_modes):
            raise ArgumentError(f"Declared {data['n_modes']} modes, matrix has {cov.n_modes}")
        return cov

    def save_csv(self, path: str):
        np.savetxt(path, self.gamma, delimiter=",", fmt="%.17g")

    @classmethod
    def load_csv(cls, path: str) -> "CovarianceMatrix":
        return cls(np.atleast_2d(np.loadtxt(path, delimiter=",")))


MatrixLike = Union[CovarianceMatrix, np.ndarray]


def _as_array(gamma: MatrixLike) -> np.ndarray:
    if isinstance(gamma, CovarianceMatrix):
        return gamma.gamma
    array = np.asarray(gamma, dtype=float)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ArgumentError(f"Expected a square matrix, got shape {array.shape}")
    if not np.allclose(array, -array.T, atol=config.PHYSICALITY_TOL, rtol=0):
        raise ArgumentError("Matrix is not antisymmetric")
    return array


def _check_modes(cov: CovarianceMatrix, j: int, k: int):
    if j == k:
        raise ArgumentError(f"Modes must differ, got ({j}, {k})")
    for index in (j, k):
        if not 1 <= index <= cov.n_modes:
            raise ArgumentError(f"Mode {index} outside 1..{cov.n_modes}")


def from_state(state: ss.AccessibleState) -> CovarianceMatrix:
    """gamma_jk = sign for every matched record, zero elsewhere"""
    upper = np.zeros((state.n_modes, state.n_modes))
    for record in state.records:
        upper[record.j - 1, record.k - 1] = record.sign
    return CovarianceMatrix._from_upper(upper)


def is_physical(gamma: MatrixLike) -> bool:
    """All eigenvalues of -gamma^2 at most 1 (within tolerance)"""
    array = _as_array(gamma)
    eigenvalues = np.linalg.eigvalsh(-array @ array)
    return bool(np.all(eigenvalues <= 1.0 + config.PHYSICALITY_TOL))


def is_pure(gamma: MatrixLike) -> bool:
    array = _as_array(gamma)
    return bool(np.allclose(array @ array, -np.eye(array.shape[0]), atol=config.PHYSICALITY_TOL, rtol=0))


def apply_rotation(cov: CovarianceMatrix, rotation: np.ndarray) -> CovarianceMatrix:
    """Congruence gamma -> R gamma R^T for orthogonal R"""
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape != (cov.n_modes, cov.n_modes):
        raise ArgumentError(f"Rotation shape {rotation.shape} does not match {cov.n_modes} modes")
    if not np.allclose(rotation @ rotation.T, np.eye(cov.n_modes), atol=config.ORTHOGONALITY_TOL, rtol=0):
        raise ArgumentError("Rotation matrix is not orthogonal")
    return CovarianceMatrix._from_upper(rotation @ cov.gamma @ rotation.T)


def braid_rotation(n_modes: int, j: int, k: int) -> np.ndarray:
    """Signed permutation R of the braid (j, k) acting on covariance matrices

    The braid sends c_j -> c_k and c_k -> -c_j on operators; expectation
    values pull back through the inverse map, which puts +1 at (k, j) and -1
    at (j, k).
    """
    if j == k or not (1 <= j <= n_modes and 1 <= k <= n_modes):
        raise ArgumentError(f"Invalid braid ({j}, {k}) on {n_modes} modes")
    rotation = np.eye(n_modes)
    rotation[j - 1, j - 1] = 0.0
    rotation[k - 1, k - 1] = 0.0
    rotation[k - 1, j - 1] = 1.0
    rotation[j - 1, k - 1] = -1.0
    return rotation


def braid(cov: CovarianceMatrix, j: int, k: int) -> CovarianceMatrix:
    _check_modes(cov, j, k)
    return apply_rotation(cov, braid_rotation(cov.n_modes, j, k))


def born_probability(cov: CovarianceMatrix, j: int, k: int) -> float:
    """p(+1) for the charge measurement of i c_j c_k"""
    _check_modes(cov, j, k)
    if not is_physical(cov):
        raise StateError("Covariance matrix violates -gamma^2 <= 1")
    return (1.0 + cov.entry(j, k)) / 2.0


def conditional_update(cov: CovarianceMatrix, j: int, k: int, outcome: int) -> CovarianceMatrix:
    """Post-measurement covariance for outcome m of i c_j c_k

    With u = gamma[:, j], v = gamma[:, k]:
        gamma' = gamma + m / (1 + m gamma_jk) (v u^T - u v^T)
    then rows and columns j, k are cleared and gamma'_jk = m.
    """
    _check_modes(cov, j, k)
    if outcome not in (1, -1):
        raise ArgumentError(f"Outcome must be +1 or -1, got {outcome}")
    weight = 1.0 + outcome * cov.entry(j, k)
    if weight / 2.0 <= config.ORACLE_ZERO_TOL:
        raise ArgumentError(f"Outcome {outcome:+d} of i c{j} c{k} has probability zero")
    gamma = cov.gamma
    u = gamma[:, j - 1].copy()
    v = gamma[:, k - 1].copy()
    updated = gamma + (outcome / weight) * (np.outer(v, u) - np.outer(u, v))
    updated[[j - 1, k - 1], :] = 0.0
    updated[:, [j - 1, k - 1]] = 0.0
    updated[j - 1, k - 1] = outcome
    updated[k - 1, j - 1] = -outcome
    if DebugConfig.gaussian_conditioning:
        debug_log("DEBUG-GAUSSIAN", f"condition i c{j} c{k} = {outcome:+d} (p={weight / 2.0:.6g})")
    return CovarianceMatrix._from_upper(updated)


def depolarize(cov: CovarianceMatrix, eps: float) -> CovarianceMatrix:
    """(1 - eps) gamma"""
    if not 0.0 <= eps <= 1.0:
        raise ArgumentError(f"eps must lie in [0, 1], got {eps}")
    return CovarianceMatrix._from_upper((1.0 - eps) * cov.gamma)


def reduced(cov: CovarianceMatrix, modes: Sequence[int]) -> np.ndarray:
    """Covariance submatrix on the given 1-based modes (in that order)"""
    indices = [j - 1 for j in modes]
    return cov.gamma[np.ix_(indices, indices)]


def measure_branches(cov: CovarianceMatrix, j: int, k: int) -> List[Tuple[float, int, CovarianceMatrix]]:
    plus = born_probability(cov, j, k)
    branches = []
    for m, p in ((1, plus), (-1, 1.0 - plus)):
        if p > config.ORACLE_ZERO_TOL:
            branches.append((p, m, conditional_update(cov, j, k, m)))
    return branches


def measure_pair(cov: CovarianceMatrix, j: int, k: int,
                 rng: np.random.Generator) -> Tuple[int, CovarianceMatrix]:
    """Sample the charge measurement of i c_j c_k"""
    plus = born_probability(cov, j, k)
    m = 1 if rng.random() < plus else -1
    if DebugConfig.gaussian_enabled:
        debug_log("DEBUG-GAUSSIAN", f"measure i c{j} c{k} -> {m:+d}")
    return m, conditional_update(cov, j, k, m)


def run_program(cov: CovarianceMatrix, program: Sequence[ss.Instruction],
                rng: np.random.Generator) -> Tuple[Tuple[int, ...], CovarianceMatrix]:
    transcript = []
    for instruction in program:
        if instruction.op == ss.BRAID:
            cov = braid(cov, instruction.j, instruction.k)
        elif instruction.op == ss.MEASURE:
            m, cov = measure_pair(cov, instruction.j, instruction.k, rng)
            transcript.append(m)
        else:
            raise ArgumentError(f"Unknown instruction {instruction.op!r}")
    return tuple(transcript), cov


def transcript_distribution(cov: CovarianceMatrix,
                            program: Sequence[ss.Instruction]) -> Dict[Tuple[int, ...], float]:
    """Exact transcript distribution (floating point) by branching on measurements"""
    branches = [(1.0, (), cov)]
    for instruction in program:
        if instruction.op == ss.BRAID:
            branches = [(p, t, braid(c, instruction.j, instruction.k)) for p, t, c in branches]
            continue
        if instruction.op != ss.MEASURE:
            raise ArgumentError(f"Unknown instruction {instruction.op!r}")
        grown = []
        for p, transcript, current in branches:
            for q, m, post in measure_branches(current, instruction.j, instruction.k):
                grown.append((p * q, transcript + (m,), post))
        branches = grown
    distribution: Dict[Tuple[int, ...], float] = {}
    for p, transcript, _ in branches:
        distribution[transcript] = distribution.get(transcript, 0.0) + p
    return distribution
