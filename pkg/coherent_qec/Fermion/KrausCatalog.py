# coherent_qec/Fermion/KrausCatalog.py

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.stats import binom

from coherent_qec.Errors import InvalidArgument
from coherent_qec.Fermion.GaussianState import GaussianOp
from coherent_qec.Fermion.JordanWigner import PauliString, conjugation_signs

log = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-12


class NoiseModel(BaseModel):
    """
    Coherent X-noise parameters shared by every noise map of a run.

    p is the physical error probability sin^2(theta) and c interpolates between
    stochastic bit flips (c = 0) and a pure X rotation (c = 1).
    `two_qubit_weights` is (p_XI, p_IX, p_XX): control-after, target-after and
    control-before placement of the X map that follows each CNOT.
    """
    model_config = ConfigDict(frozen=True)

    p: float = Field(..., ge=0.0, le=1.0)
    c: float = Field(0.0, ge=0.0, le=1.0)
    two_qubit_weights: Tuple[float, float, float] = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

    @field_validator("two_qubit_weights")
    @classmethod
    def _weights_are_a_distribution(cls, v: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if any(w < 0.0 or w > 1.0 for w in v):
            raise ValueError(f"two_qubit_weights entries must lie in [0, 1], got {v}.")
        if abs(sum(v) - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"two_qubit_weights must sum to 1, got {sum(v)!r}.")
        return v

    @property
    def theta(self) -> float:
        return math.asin(math.sqrt(self.p))


class PmfKind(str, Enum):
    SIMPLE = "simple"
    BINOMIAL = "binomial"


@dataclass(frozen=True)
class OutcomePmf:
    """
    Probability mass function over rotation angles k*theta.

    Angles are kept as integer multiples of theta so one pmf can be reused for
    every p; `resolve` turns them into radians.
    """

    multiples: Tuple[int, ...]
    weights: Tuple[float, ...]
    kind: PmfKind
    N: int

    def __post_init__(self):
        if len(self.multiples) != len(self.weights):
            raise InvalidArgument("OutcomePmf needs one weight per multiple.")
        if any(w < 0.0 for w in self.weights):
            raise InvalidArgument(f"OutcomePmf weights must be nonnegative, got {self.weights}.")
        if abs(sum(self.weights) - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidArgument(f"OutcomePmf weights must sum to 1, got {sum(self.weights)!r}.")

    def support(self, theta: float) -> List[Tuple[float, float]]:
        return [(k * theta, w) for k, w in zip(self.multiples, self.weights)]

    def resolve(self, theta: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        Concrete (angles, weights) with zero weights dropped and coincident
        angles merged, so theta = 0 collapses to the single branch phi = 0.
        The arrays are shared between calls and read-only.
        """
        angles, weights, _ = _resolved(self, theta)
        return angles, weights

    def sample(self, rng: np.random.Generator, theta: float) -> Tuple[float, float]:
        """Draws one angle; returns (phi, p(phi))."""
        angles, weights, cumulative = _resolved(self, theta)
        if angles.size == 1:
            return float(angles[0]), float(weights[0])
        j = min(int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right")), angles.size - 1)
        return float(angles[j]), float(weights[j])


@lru_cache(maxsize=1024)
def _resolved(pmf: OutcomePmf, theta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    merged = {}
    for k, w in zip(pmf.multiples, pmf.weights):
        if w <= 0.0:
            continue
        angle = 0.0 if theta == 0.0 else k * theta
        merged[angle] = merged.get(angle, 0.0) + w
    angles = np.array(sorted(merged))
    weights = np.array([merged[a] for a in angles])
    cumulative = np.cumsum(weights)
    for array in (angles, weights, cumulative):
        array.setflags(write=False)
    return angles, weights, cumulative


def pmf_simple(c: float) -> OutcomePmf:
    """p(+theta) = (1 + c)/2 and p(-theta) = (1 - c)/2."""
    if not 0.0 <= c <= 1.0:
        raise InvalidArgument(f"Coherence c must lie in [0, 1], got {c}.")
    return OutcomePmf((1, -1), ((1.0 + c) / 2.0, (1.0 - c) / 2.0), PmfKind.SIMPLE, 1)


def pmf_binomial(N: int, c: float) -> OutcomePmf:
    """
    Angle distribution of N independent single-qubit maps on one qubit.

    Rotations about X add, so the total angle is k*theta with k = N - 2j where j
    counts the maps that drew -theta; this is the N-fold convolution of pmf_simple(c).
    """
    if N < 1:
        raise InvalidArgument(f"pmf_binomial needs N >= 1, got {N}.")
    if not 0.0 <= c <= 1.0:
        raise InvalidArgument(f"Coherence c must lie in [0, 1], got {c}.")
    j = np.arange(N + 1)
    weights = binom.pmf(j, N, (1.0 - c) / 2.0)
    # Drift from the scipy evaluation is renormalized away.
    weights = weights / weights.sum()
    multiples = tuple(int(N - 2 * jj) for jj in j)
    return OutcomePmf(multiples, tuple(float(w) for w in weights), PmfKind.BINOMIAL, N)


def _pair_blocks(a: int, b: int) -> Tuple[Tuple[int, int], Tuple[int, int], np.ndarray, np.ndarray, np.ndarray]:
    """Sorted support (a, b), the positions of a and b inside it, and zero 2 x 2 blocks."""
    support = (a, b) if a < b else (b, a)
    positions = (0, 1) if a < b else (1, 0)
    return support, positions, np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2))


def _check_pair(a: int, b: int, m: int) -> None:
    if a == b or not (1 <= a <= 2 * m and 1 <= b <= 2 * m):
        raise InvalidArgument(f"Majorana pair ({a}, {b}) is not a valid pair on {m} modes.")


def _check_weight(weight: float) -> None:
    if not weight > 0.0:
        raise InvalidArgument(f"Kraus branch weight must be positive, got {weight}.")


def rotation_fgo(a: int, b: int, phi: float, weight: float, m: int) -> GaussianOp:
    """
    sqrt(weight) * exp(i phi h) with h = -i c_a c_b, a Gaussian unitary.

    Rotates the (c_b, c_a) plane by 2 phi.
    """
    _check_pair(a, b, m)
    _check_weight(weight)
    support, (ia, ib), A, B, D = _pair_blocks(a, b)
    cos2, sin2 = math.cos(2.0 * phi), math.sin(2.0 * phi)
    B[ia, ia] = B[ib, ib] = cos2
    B[ib, ia] = -sin2
    B[ia, ib] = sin2
    return GaussianOp(m, support, A, B, D, math.log(weight))


def projector_fgo(a: int, b: int, s: int, phi: float, weight: float, m: int) -> GaussianOp:
    """
    sqrt(weight) * (I + (-1)^s e^{-2 i phi} h)/2 with h = -i c_a c_b.

    phi = 0 is the ideal projector onto the (-1)^s eigenspace of h.
    """
    _check_pair(a, b, m)
    _check_weight(weight)
    if s not in (0, 1):
        raise InvalidArgument(f"Measurement outcome must be 0 or 1, got {s}.")
    sigma = -1.0 if s else 1.0
    support, (ia, ib), A, B, _ = _pair_blocks(a, b)
    cos2, sin2 = math.cos(2.0 * phi), math.sin(2.0 * phi)
    A[ia, ib] = sigma * cos2
    A[ib, ia] = -sigma * cos2
    B[ib, ia] = sigma * sin2
    B[ia, ib] = -sigma * sin2
    return GaussianOp(m, support, A, B, -A, math.log(weight / 2.0))


def pauli_fgo(pauli: PauliString) -> GaussianOp:
    """Left multiplication by a parity-preserving Pauli string, up to its phase."""
    m = pauli.m
    # Parity is proportional to X^{(x) m}; an even string commutes with it.
    parity = PauliString.from_letters({q: "X" for q in range(1, m + 1)}, m)
    if not pauli.commutes_with(parity):
        raise InvalidArgument(f"Pauli string {pauli} changes fermion parity and is not Gaussian.")
    flipped = np.flatnonzero(conjugation_signs(pauli) < 0)
    k = flipped.size
    support = tuple(int(i) + 1 for i in flipped)
    return GaussianOp(m, support, np.zeros((k, k)), -np.eye(k), np.zeros((k, k)), 0.0)


def _check_qubit(i: int, m: int) -> None:
    if not 1 <= i <= m - 1:
        raise InvalidArgument(f"Data qubit {i} outside 1..{m - 1}; mode {m} is the ancilla.")


def _check_site(i: int, m: int) -> None:
    if not 1 <= i <= m - 2:
        raise InvalidArgument(f"Parity site {i} outside 1..{m - 2}.")


def noise_fgo(i: int, phi: float, weight: float, m: int) -> GaussianOp:
    """sqrt(weight) * exp(i phi X_i); X_i = -i c_{2i} c_{2i-1}."""
    _check_qubit(i, m)
    return rotation_fgo(2 * i, 2 * i - 1, phi, weight, m)


def parity_fgo(i: int, s: int, phi: float, weight: float, m: int) -> GaussianOp:
    """
    sqrt(weight) * (I + (-1)^s e^{-2 i phi} Z_i Z_{i+1})/2, the parity check
    between data qubits i and i+1 with its measurement qubit rotated by phi.
    Z_i Z_{i+1} = -i c_{2i+1} c_{2i}.
    """
    _check_site(i, m)
    return projector_fgo(2 * i + 1, 2 * i, s, phi, weight, m)


def flip_fgo(i: int, m: int) -> GaussianOp:
    """X_i up to the phase i, as the rotation by pi/2."""
    return noise_fgo(i, math.pi / 2.0, 1.0, m)


class KrausKind(str, Enum):
    NOISE = "noise"
    PARITY_NOISY = "parity_noisy"
    PARITY_IDEAL = "parity_ideal"
    FLIP_X = "flip_x"


@dataclass(frozen=True)
class KrausSpec:
    """One branch of one Kraus operator in the repetition-code catalog."""

    kind: KrausKind
    index: int
    phi: float = 0.0
    outcome: int = 0
    weight: float = 1.0

    def __post_init__(self):
        if self.index < 1:
            raise InvalidArgument(f"Kraus index must be >= 1, got {self.index}.")
        if self.outcome not in (0, 1):
            raise InvalidArgument(f"Measurement outcome must be 0 or 1, got {self.outcome}.")
        if self.weight < 0.0:
            raise InvalidArgument(f"Kraus weight must be nonnegative, got {self.weight}.")

    def to_fgo(self, m: int) -> GaussianOp:
        if self.kind == KrausKind.NOISE:
            return noise_fgo(self.index, self.phi, self.weight, m)
        if self.kind == KrausKind.PARITY_NOISY:
            return parity_fgo(self.index, self.outcome, self.phi, self.weight, m)
        if self.kind == KrausKind.PARITY_IDEAL:
            return parity_fgo(self.index, self.outcome, 0.0, 1.0, m)
        return flip_fgo(self.index, m)
