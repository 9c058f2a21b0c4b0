# coherent_qec/Oracle/DenseOracle.py

import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from coherent_qec.Decoder.MatchingDecoder import RecoveryMask, decode
from coherent_qec.Errors import InvalidArgument
from coherent_qec.Fermion.JordanWigner import PauliString, majorana
from coherent_qec.Fermion.KrausCatalog import KrausKind, KrausSpec
from coherent_qec.Repetition.CircuitSchedule import (CircuitSchedule, FinalNoise, NoiseSite,
                                                     ParityMeasurement)

log = logging.getLogger(__name__)

MAX_QUBITS = 13
MAX_BRANCHES = 10_000_000
# Children whose norm falls below this fraction of their parent's are not expanded.
PRUNE_RELATIVE = 1e-15

_LOCAL = {
    "I": sp.identity(2, dtype=complex, format="csr"),
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
}


@dataclass(frozen=True, eq=False)
class DenseState:
    """
    Unnormalized state vector on m qubits, little-endian: qubit 1 is the lowest bit.
    The norm <psi|psi> plays the role of Gamma.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        size = self.amplitudes.size
        if size < 2 or size & (size - 1):
            raise InvalidArgument(f"State length {size} is not a power of two.")
        if not np.all(np.isfinite(self.amplitudes)):
            raise InvalidArgument("State vector has non-finite entries.")
        if size > 2 ** MAX_QUBITS:
            raise InvalidArgument(f"Dense oracle is limited to {MAX_QUBITS} qubits.")

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1


def ghz_plus_dense(m: int) -> DenseState:
    if m > MAX_QUBITS:
        raise InvalidArgument(f"Dense oracle is limited to {MAX_QUBITS} qubits, got {m}.")
    amplitudes = np.zeros(2 ** m, dtype=complex)
    amplitudes[0] = amplitudes[-1] = 1.0 / math.sqrt(2.0)
    return DenseState(amplitudes)


def pauli_matrix(pauli: PauliString) -> sp.csr_matrix:
    """Sparse matrix of a Pauli string including its phase; qubit m is the leftmost factor."""
    letters = pauli.letters()
    out = sp.identity(1, dtype=complex, format="csr")
    for q in range(pauli.m, 0, -1):
        out = sp.kron(out, _LOCAL[letters.get(q, "I")], format="csr")
    return pauli.sign() * out


def _identity(m: int) -> sp.csr_matrix:
    return sp.identity(2 ** m, dtype=complex, format="csr")


def rotation_matrix(pauli: PauliString, phi: float, weight: float = 1.0) -> sp.csr_matrix:
    """sqrt(weight) * exp(i phi P) for a Hermitian Pauli string P."""
    return math.sqrt(weight) * (math.cos(phi) * _identity(pauli.m) + 1j * math.sin(phi) * pauli_matrix(pauli))


def projector_matrix(pauli: PauliString, s: int, phi: float = 0.0, weight: float = 1.0) -> sp.csr_matrix:
    """sqrt(weight) * (I + (-1)^s e^{-2 i phi} P)/2."""
    sigma = -1.0 if s else 1.0
    phase = cmath.exp(-2j * phi)
    return math.sqrt(weight) * 0.5 * (_identity(pauli.m) + sigma * phase * pauli_matrix(pauli))


@lru_cache(maxsize=512)
def _single(letter: str, qubit: int, m: int) -> PauliString:
    return PauliString.from_letters({qubit: letter}, m)


@lru_cache(maxsize=512)
def _zz(i: int, m: int) -> PauliString:
    return PauliString.from_letters({i: "Z", i + 1: "Z"}, m)


def kraus_matrix(spec: KrausSpec, m: int) -> sp.csr_matrix:
    """The literal operator of a catalog branch on m qubits."""
    if spec.kind == KrausKind.NOISE:
        return rotation_matrix(_single("X", spec.index, m), spec.phi, spec.weight)
    if spec.kind == KrausKind.PARITY_NOISY:
        return projector_matrix(_zz(spec.index, m), spec.outcome, spec.phi, spec.weight)
    if spec.kind == KrausKind.PARITY_IDEAL:
        return projector_matrix(_zz(spec.index, m), spec.outcome)
    return pauli_matrix(_single("X", spec.index, m))


def apply_operator_dense(state: DenseState, operator: sp.spmatrix) -> DenseState:
    return DenseState(operator @ state.amplitudes)


def apply_kraus_dense(state: DenseState, k: KrausSpec) -> DenseState:
    return apply_operator_dense(state, kraus_matrix(k, state.n_qubits))


def apply_pauli_dense(state: DenseState, pauli: PauliString) -> DenseState:
    return apply_operator_dense(state, pauli_matrix(pauli))


def gamma_dense(state: DenseState) -> float:
    return float(np.vdot(state.amplitudes, state.amplitudes).real)


def expectation_dense(state: DenseState, pauli: PauliString) -> float:
    """<psi|P|psi>/<psi|psi>."""
    value = np.vdot(state.amplitudes, pauli_matrix(pauli) @ state.amplitudes)
    return float(value.real) / gamma_dense(state)


def recovery_pauli(recovery: RecoveryMask, m: int) -> PauliString:
    return PauliString.from_letters({q: "X" for q in recovery.flipped()}, m)


def gamma_L_dense(state: DenseState, r: RecoveryMask) -> float:
    """<psi|R^dagger (I - Z_n Z_{n+1})/2 R|psi> with n = r.n and n+1 the ancilla."""
    m = state.n_qubits
    corrected = apply_pauli_dense(state, recovery_pauli(r, m))
    failure = projector_matrix(_zz(r.n, m), 1)
    return float(np.vdot(corrected.amplitudes, failure @ corrected.amplitudes).real)


def covariance_dense(state: DenseState) -> np.ndarray:
    """M_ab = <-i c_a c_b>/<psi|psi> from explicit Jordan-Wigner Majorana matrices."""
    m = state.n_qubits
    norm = gamma_dense(state)
    images = [pauli_matrix(majorana(k, m)) @ state.amplitudes for k in range(1, 2 * m + 1)]
    M = np.zeros((2 * m, 2 * m))
    for a in range(2 * m):
        for b in range(a + 1, 2 * m):
            value = (-1j * np.vdot(images[a], images[b])).real / norm
            M[a, b], M[b, a] = value, -value
    return M


@dataclass
class ExactDistribution:
    """
    Every leaf of the outcome tree with its probability Gamma(t), syndrome grid and
    Gamma_L(t) under the decoder.
    """

    total_probability: float = 0.0
    p_L: float = 0.0
    leaves: int = 0
    syndrome_probabilities: Dict[bytes, float] = field(default_factory=dict)
    shape: Tuple[int, int] = (0, 0)

    def probability_of(self, syndromes: np.ndarray) -> float:
        return self.syndrome_probabilities.get(np.asarray(syndromes, dtype=np.uint8).tobytes(), 0.0)


def _branch_factor(item, theta: float) -> int:
    if isinstance(item, (NoiseSite, FinalNoise)):
        return item.pmf.resolve(theta)[0].size
    if isinstance(item, ParityMeasurement):
        return 2 * item.pmf.resolve(theta)[0].size
    return 2


def count_branches(schedule: CircuitSchedule) -> int:
    total = 1
    for item in schedule:
        total *= _branch_factor(item, schedule.theta)
        if total > MAX_BRANCHES:
            break
    return total


def _children(item, m: int, theta: float, T: int) -> List[Tuple[KrausSpec, Optional[Tuple[int, int]]]]:
    """Catalog branches of one schedule item, each with the syndrome cell it writes."""
    if isinstance(item, (NoiseSite, FinalNoise)):
        angles, weights = item.pmf.resolve(theta)
        return [(KrausSpec(KrausKind.NOISE, item.qubit, float(a), 0, float(w)), None)
                for a, w in zip(angles, weights)]
    if isinstance(item, ParityMeasurement):
        angles, weights = item.pmf.resolve(theta)
        return [(KrausSpec(KrausKind.PARITY_NOISY, item.site, float(a), s, float(w)), (item.site - 1, item.cycle - 1))
                for a, w in zip(angles, weights) for s in (0, 1)]
    return [(KrausSpec(KrausKind.PARITY_IDEAL, item.site, 0.0, s), (item.site - 1, T)) for s in (0, 1)]


def enumerate_distribution(schedule: CircuitSchedule) -> ExactDistribution:
    """
    Depth-first traversal of every (phi, s) branch of a fixed schedule.

    For the circuit-based model the result is conditional on the schedule's CNOT
    noise allocation.
    """
    branches = count_branches(schedule)
    if branches > MAX_BRANCHES:
        raise InvalidArgument(f"Outcome tree has more than {MAX_BRANCHES} branches.")
    n, T, m, theta = schedule.n, schedule.T, schedule.n_modes, schedule.theta
    items = list(schedule)
    result = ExactDistribution(shape=(n - 1, T + 1))
    syndromes = np.zeros((n - 1, T + 1), dtype=np.uint8)
    operators: Dict[KrausSpec, sp.csr_matrix] = {}
    # Every parity item on a path writes its own cell before the leaf reads the grid.
    log.debug(f"Enumerating {branches} branches for n={n}, T={T}.")

    def visit(depth: int, state: DenseState) -> None:
        if depth == len(items):
            probability = gamma_dense(state)
            recovery = decode(syndromes, schedule.config)
            key = syndromes.tobytes()
            result.total_probability += probability
            result.p_L += gamma_L_dense(state, recovery)
            result.leaves += 1
            result.syndrome_probabilities[key] = result.syndrome_probabilities.get(key, 0.0) + probability
            return
        floor = PRUNE_RELATIVE * gamma_dense(state)
        for spec, cell in _children(items[depth], m, theta, T):
            if spec not in operators:
                operators[spec] = kraus_matrix(spec, m)
            child = apply_operator_dense(state, operators[spec])
            if gamma_dense(child) <= floor:
                continue
            if cell is not None:
                syndromes[cell] = spec.outcome
            visit(depth + 1, child)

    visit(0, ghz_plus_dense(m))
    return result
