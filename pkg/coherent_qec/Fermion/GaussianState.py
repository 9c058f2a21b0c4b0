# coherent_qec/Fermion/GaussianState.py

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel

from coherent_qec.Errors import InvalidArgument, ZeroProbabilityOutcome

log = logging.getLogger(__name__)

# det(M - D) at or below this value marks a branch of probability zero.
EPS_PROB = 1e-14


class UpdatePath(str, Enum):
    FAST = "fast"
    NAIVE = "naive"


@dataclass(frozen=True, eq=False)
class GaussianState:
    """
    A pure fermionic Gaussian state (M, log Gamma) on n_modes modes.

    M is the real antisymmetric 2m x 2m covariance matrix of the normalized
    state, M_ab = <-i c_a c_b> for a != b. The norm Gamma = <psi|psi> is kept
    as its natural log so long trajectories do not underflow.
    """

    M: np.ndarray
    log_gamma: float = 0.0

    def __post_init__(self):
        if self.M.ndim != 2 or self.M.shape[0] != self.M.shape[1] or self.M.shape[0] % 2:
            raise InvalidArgument(f"Covariance matrix must be 2m x 2m, got shape {self.M.shape}.")
        if not math.isfinite(self.log_gamma):
            raise InvalidArgument("log_gamma must be finite; zero-norm states are never stored.")

    @property
    def n_modes(self) -> int:
        return self.M.shape[0] // 2

    @property
    def gamma(self) -> float:
        return math.exp(self.log_gamma)


@dataclass(frozen=True, eq=False)
class GaussianOp:
    """
    Choi-block description (A, B, D, Gamma_G) of a fermionic Gaussian operator,
    stored on its support only.

    Outside the 1-based Majorana indices in `support`, A = D = 0 and B = I.
    `a`, `b` and `d` are the k x k blocks on the sorted support; the dense
    2m x 2m matrices are assembled on demand by `A`, `B` and `D`.
    """

    n_modes: int
    support: Tuple[int, ...]
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    log_gamma_g: float
    index: Union[slice, np.ndarray] = field(init=False, repr=False)
    square: tuple = field(init=False, repr=False)
    projective: bool = field(init=False, repr=False)

    def __post_init__(self):
        k = len(self.support)
        if any(block.shape != (k, k) for block in (self.a, self.b, self.d)):
            raise InvalidArgument(f"Support blocks must be {k} x {k}.")
        if any(later <= earlier for earlier, later in zip(self.support, self.support[1:])):
            raise InvalidArgument(f"Support {self.support} must be strictly increasing.")
        if k and not (self.support[0] >= 1 and self.support[-1] <= 2 * self.n_modes):
            raise InvalidArgument(f"Support {self.support} outside 1..{2 * self.n_modes}.")
        if k and self.support[-1] - self.support[0] == k - 1:
            # Contiguous supports index by slice, so row and column updates act on views.
            index = slice(self.support[0] - 1, self.support[-1])
            square = (index, index)
        else:
            index = np.asarray(self.support, dtype=np.intp) - 1
            square = np.ix_(index, index)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "square", square)
        object.__setattr__(self, "projective", bool(self.a.any() or self.d.any()))

    @property
    def dimension(self) -> int:
        return 2 * self.n_modes

    def _dense(self, block: np.ndarray, identity: bool) -> np.ndarray:
        full = np.eye(self.dimension) if identity else np.zeros((self.dimension, self.dimension))
        full[self.square] = block
        return full

    @property
    def A(self) -> np.ndarray:
        return self._dense(self.a, False)

    @property
    def B(self) -> np.ndarray:
        return self._dense(self.b, True)

    @property
    def D(self) -> np.ndarray:
        return self._dense(self.d, False)


class StateDiagnostics(BaseModel):
    antisymmetry_violation: float
    purity_violation: float
    gamma: float
    log_gamma: float


def _antisymmetrized(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M - M.T)


def make_ghz_plus(n_qubits: int) -> GaussianState:
    """
    Covariance matrix of (|0...0> + |1...1>)/sqrt(2) on n_qubits qubits.

    The last qubit plays the ancilla role in the logical readout.
    """
    if n_qubits < 2:
        raise InvalidArgument(f"make_ghz_plus needs at least 2 qubits, got {n_qubits}.")
    dim = 2 * n_qubits
    M = np.zeros((dim, dim))
    for i in range(1, n_qubits):
        # 1-based (2i, 2i+1) -> 0-based (2i-1, 2i)
        M[2 * i - 1, 2 * i] = -1.0
        M[2 * i, 2 * i - 1] = 1.0
    M[0, dim - 1] = -1.0
    M[dim - 1, 0] = 1.0
    return GaussianState(M, 0.0)


def _check_dimensions(state: GaussianState, op: GaussianOp) -> None:
    if op.dimension != state.M.shape[0]:
        raise InvalidArgument(
            f"Operator acts on {op.dimension // 2} modes but the state has {state.n_modes}.")


def _correction_matrix(M: np.ndarray, op: GaussianOp) -> np.ndarray:
    """
    K = I + M_SS D_S for a pure state, where M^{-1} = -M.

    det(M - D) = det K and (M - D)^{-1} = -M - M[:, S] D_S K^{-1} M[:, S]^T.
    """
    return np.eye(op.d.shape[0]) + M[op.square] @ op.d


def _small_det(K: np.ndarray) -> float:
    if K.shape == (2, 2):
        return float(K[0, 0] * K[1, 1] - K[0, 1] * K[1, 0])
    return float(np.linalg.det(K))


def _small_inverse(K: np.ndarray, det: float) -> np.ndarray:
    if K.shape == (2, 2):
        return np.array([[K[1, 1], -K[0, 1]], [-K[1, 0], K[0, 0]]]) / det
    return np.linalg.inv(K)


def branch_log_weight(state: GaussianState, op: GaussianOp, path: UpdatePath = UpdatePath.FAST) -> float:
    """
    log(Gamma'/Gamma) of applying `op`, without forming the new covariance.

    Returns -inf when the branch has vanishing probability.
    """
    _check_dimensions(state, op)
    if path == UpdatePath.NAIVE:
        det = _lu_determinant(state.M - op.D)[0]
    elif not op.projective:
        det = 1.0
    else:
        det = _small_det(_correction_matrix(state.M, op))
    if det <= EPS_PROB:
        return -math.inf
    return op.log_gamma_g + 0.5 * math.log(det)


def _lu_determinant(X: np.ndarray):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(X, check_finite=False)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    det = float(np.prod(np.diag(lu))) * (-1.0 if swaps % 2 else 1.0)
    return det, (lu, piv)


def _apply_naive(M: np.ndarray, op: GaussianOp) -> Tuple[np.ndarray, float]:
    det, factors = _lu_determinant(M - op.D)
    if det <= EPS_PROB:
        raise ZeroProbabilityOutcome(f"det(M - D) = {det:.3e} is below the zero-probability threshold.", det)
    B = op.B
    solved = scipy.linalg.lu_solve(factors, B.T, check_finite=False)
    return op.A - B @ solved, det


def _apply_fast(M: np.ndarray, op: GaussianOp) -> Tuple[np.ndarray, float]:
    det = 1.0
    if op.projective:
        K = _correction_matrix(M, op)
        det = _small_det(K)
        if det <= EPS_PROB:
            raise ZeroProbabilityOutcome(f"det(M - D) = {det:.3e} is below the zero-probability threshold.", det)
        cols = M[:, op.index]
        # -(M - D)^{-1} is M plus a rank-k correction.
        M_new = M + (cols @ (op.d @ _small_inverse(K, det))) @ cols.T
    else:
        M_new = M.copy()
    if not op.support:
        return M_new, det
    # B = I outside the support, so B X B^T only rewrites rows and columns in it.
    M_new[op.index, :] = op.b @ M_new[op.index, :]
    M_new[:, op.index] = M_new[:, op.index] @ op.b.T
    if op.projective:
        M_new[op.square] += op.a
    return M_new, det


def apply_fgo(state: GaussianState, op: GaussianOp, path: UpdatePath = UpdatePath.FAST) -> GaussianState:
    """
    Applies a Gaussian operator: M' = A - B (M - D)^{-1} B^T and
    Gamma' = Gamma_G * Gamma * sqrt(det(M - D)).

    Raises ZeroProbabilityOutcome when det(M - D) <= EPS_PROB.
    """
    _check_dimensions(state, op)
    if path == UpdatePath.NAIVE:
        M_new, det = _apply_naive(state.M, op)
    else:
        M_new, det = _apply_fast(state.M, op)
    log_gamma = state.log_gamma + op.log_gamma_g + 0.5 * math.log(det)
    return GaussianState(_antisymmetrized(M_new), log_gamma)


def bilinear_expectation(state: GaussianState, a: int, b: int) -> float:
    """<-i c_a c_b> / <psi|psi> = M_ab for 1-based Majorana indices a != b."""
    size = state.M.shape[0]
    if a == b:
        raise InvalidArgument("bilinear_expectation needs a != b.")
    if not (1 <= a <= size and 1 <= b <= size):
        raise InvalidArgument(f"Majorana indices ({a}, {b}) outside 1..{size}.")
    return float(state.M[a - 1, b - 1])


def overlap_sq(s1: GaussianState, s2: GaussianState) -> float:
    """|<psi_1|psi_2>|^2 = 2^{-m} Gamma_1 Gamma_2 sqrt(det(M_1 + M_2))."""
    if s1.n_modes != s2.n_modes:
        raise InvalidArgument("overlap_sq needs states on the same number of modes.")
    sign, logdet = np.linalg.slogdet(s1.M + s2.M)
    if sign <= 0:
        return 0.0
    log_value = -s1.n_modes * math.log(2.0) + s1.log_gamma + s2.log_gamma + 0.5 * logdet
    return math.exp(log_value)


def validate_state(state: GaussianState) -> StateDiagnostics:
    M = state.M
    return StateDiagnostics(
        antisymmetry_violation=float(np.max(np.abs(M + M.T))),
        purity_violation=float(np.max(np.abs(M @ M.T - np.eye(M.shape[0])))),
        gamma=state.gamma,
        log_gamma=state.log_gamma,
    )


def purify(state: GaussianState) -> GaussianState:
    """Replaces M by its orthogonal polar factor, which stays antisymmetric."""
    unitary, _ = scipy.linalg.polar(state.M)
    return GaussianState(_antisymmetrized(unitary), state.log_gamma)


def normalized(state: GaussianState) -> GaussianState:
    return GaussianState(state.M, 0.0)
