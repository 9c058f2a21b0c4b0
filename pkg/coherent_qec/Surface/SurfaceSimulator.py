# coherent_qec/Surface/SurfaceSimulator.py

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import partial
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from coherent_qec.Errors import InternalInvariantViolation, InvalidArgument, ZeroProbabilityOutcome
from coherent_qec.Fermion.GaussianState import (GaussianState, UpdatePath, apply_fgo, bilinear_expectation,
                                                make_ghz_plus, normalized)
from coherent_qec.Fermion.JordanWigner import PauliString, as_bilinear
from coherent_qec.Fermion.KrausCatalog import noise_fgo, pauli_fgo, pmf_simple, projector_fgo
from coherent_qec.Repetition.TrajectorySampler import SamplerOptions, choose_branch, purify_if_drifted
from coherent_qec.Runtime.WorkerPool import WorkerPool, split_outcomes
from coherent_qec.Surface.SurfaceDecoder import decode_surface
from coherent_qec.Surface.SurfaceLayout import (Bilinear, StabilizerSet, build_stabilizers,
                                                convert_round, logical_operators)

log = logging.getLogger(__name__)

_PAULI_2x2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# Nontrivial coefficients of rho(C); A_II = A_XX = 1 and the rest vanish.
COEFFICIENTS = (("X", "I"), ("I", "X"), ("Y", "Y"), ("Y", "Z"), ("Z", "Y"), ("Z", "Z"))
PSD_TOLERANCE = 1e-8


class SyndromeMode(str, Enum):
    CONVERTED = "converted"
    DIRECT_TILDE = "direct_tilde"


class SurfaceNoise(BaseModel):
    """
    Phenomenological surface-code noise per cycle.

    Data qubits: Pauli Y with p_y, Pauli Z with p_z, then the coherent channel
    E(p_x, c). Measurements: Pauli X/Y/Z with q_x/q_y/q_z, and in direct_tilde
    mode a coherent X rotation drawn from E(p_m, c_m).
    """
    model_config = ConfigDict(frozen=True)

    p_x: float = Field(0.0, ge=0.0, le=1.0)
    c: float = Field(0.0, ge=0.0, le=1.0)
    p_y: float = Field(0.0, ge=0.0, le=1.0)
    p_z: float = Field(0.0, ge=0.0, le=1.0)
    q_x: float = Field(0.0, ge=0.0, le=1.0)
    q_y: float = Field(0.0, ge=0.0, le=1.0)
    q_z: float = Field(0.0, ge=0.0, le=1.0)
    p_m: float = Field(0.0, ge=0.0, le=1.0)
    c_m: float = Field(0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _exclusive_pauli_rates(self) -> "SurfaceNoise":
        if self.p_y + self.p_z > 1.0:
            raise ValueError("p_y + p_z must not exceed 1.")
        if self.q_x + self.q_y + self.q_z > 1.0:
            raise ValueError("q_x + q_y + q_z must not exceed 1.")
        return self

    @classmethod
    def uniform(cls, p: float, c: float = 0.0) -> "SurfaceNoise":
        """Every rate set to p/3 on data and measurement qubits, coherent part E(p/3, c)."""
        third = p / 3.0
        return cls(p_x=third, c=c, p_y=third, p_z=third, q_x=third, q_y=third, q_z=third)


class SurfaceConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    d: int = Field(3, ge=3)
    T: Optional[int] = Field(None, ge=1)
    noise: SurfaceNoise = SurfaceNoise()
    mode: SyndromeMode = SyndromeMode.CONVERTED

    @model_validator(mode="after")
    def _check(self) -> "SurfaceConfig":
        if self.d % 2 == 0:
            raise ValueError(f"d must be odd, got {self.d}.")
        if self.noise.p_m > 0.0 and self.mode != SyndromeMode.DIRECT_TILDE:
            raise ValueError("Coherent measurement error needs mode 'direct_tilde'.")
        if self.T is None:
            object.__setattr__(self, "T", self.d)
        return self


@dataclass(frozen=True)
class LogicalFrame:
    """
    Logical operators on the n+1 qubits and w, the number of Z_{n+1} factors
    inserted so far to keep Pauli errors Gaussian.
    """

    L_Z: PauliString
    L_Y: PauliString
    L_X: PauliString
    w: int = 0

    @classmethod
    def for_distance(cls, d: int) -> "LogicalFrame":
        ops = logical_operators(d)
        return cls(ops["Z"], ops["Y"], ops["X"])

    @property
    def m(self) -> int:
        return self.L_Z.m

    def logical(self, letter: str) -> PauliString:
        if letter == "I":
            return PauliString.from_letters({}, self.m)
        return {"X": self.L_X, "Y": self.L_Y, "Z": self.L_Z}[letter]

    def extended(self, letter: str, ancilla: str) -> PauliString:
        """L_W W'_{n+1}."""
        return self.logical(letter) * PauliString.from_letters({self.m: ancilla} if ancilla != "I" else {}, self.m)


def pauli_expectation(state: GaussianState, pauli: PauliString) -> float:
    """<P> for a Pauli string quadratic in Majorana operators."""
    a, b, sigma = as_bilinear(pauli)
    return sigma * bilinear_expectation(state, a, b)


def pair_expectation(state: GaussianState, first: PauliString, second: PauliString) -> float:
    """
    <P_1 P_2> for two commuting bilinear Pauli strings, by Wick's theorem:
    (-i c_a c_b)(-i c_c c_d) has expectation M_ab M_cd - M_ac M_bd + M_ad M_bc.
    """
    if not first.commutes_with(second):
        raise InvalidArgument(f"{first} and {second} do not commute.")
    a, b, s1 = as_bilinear(first)
    c, d, s2 = as_bilinear(second)
    if {a, b} & {c, d}:
        product = first * second
        if not any(product.x) and not any(product.z):
            return float(product.sign().real)
        return pauli_expectation(state, product)
    M = state.M
    a, b, c, d = a - 1, b - 1, c - 1, d - 1
    return float(s1 * s2 * (M[a, b] * M[c, d] - M[a, c] * M[b, d] + M[a, d] * M[b, c]))


def measured_logical_xx(state: GaussianState, frame: LogicalFrame) -> float:
    """<L_X X_{n+1}> read from the covariance, using L_X X_{n+1} = -(L_Y Y_{n+1})(L_Z Z_{n+1})."""
    return -pair_expectation(state, frame.extended("Y", "Y"), frame.extended("Z", "Z"))


def _projector(bilinear: Bilinear, s: int, phi: float, weight: float, m: int):
    a, b, sigma = bilinear
    return projector_fgo(a, b, s ^ (1 if sigma < 0 else 0), phi, weight, m)


def _code_projectors(layout: StabilizerSet, frame: LogicalFrame) -> List[Bilinear]:
    bell = [as_bilinear(frame.extended("Z", "Z")), as_bilinear(frame.extended("Y", "Y").scaled(2))]
    return [s.bilinear for s in layout.measured] + bell


def init_logical_bell(d: int, path: UpdatePath = UpdatePath.FAST) -> Tuple[GaussianState, LogicalFrame]:
    """
    Projects an X^{(n+1)}-symmetric reference state onto the code space and the
    logical Bell pair stabilized by L_Z Z_{n+1} and -L_Y Y_{n+1}.

    The GHZ reference can be orthogonal to the target; the reference with the
    ancilla flipped is used in that case.
    """
    layout = build_stabilizers(d)
    frame = LogicalFrame.for_distance(d)
    m = layout.m
    projectors = _code_projectors(layout, frame)
    ghz = make_ghz_plus(m)
    references = (ghz, apply_fgo(ghz, pauli_fgo(PauliString.from_letters({m: "X"}, m)), path))
    for attempt, state in enumerate(references):
        try:
            for bilinear in projectors:
                state = apply_fgo(state, _projector(bilinear, 0, 0.0, 1.0, m), path)
        except ZeroProbabilityOutcome:
            log.debug(f"Reference {attempt} is orthogonal to the d={d} logical Bell state.")
            continue
        return normalized(state), frame
    raise InternalInvariantViolation(f"No reference state overlaps the d={d} logical Bell state.")


def apply_tracked_pauli(state: GaussianState, frame: LogicalFrame, pauli: PauliString,
                        path: UpdatePath = UpdatePath.FAST) -> Tuple[GaussianState, LogicalFrame]:
    """Applies P, or P Z_{n+1} with w += 1 when P alone changes fermion parity."""
    m = frame.m
    parity = PauliString.from_letters({q: "X" for q in range(1, m + 1)}, m)
    if not pauli.commutes_with(parity):
        pauli = pauli * PauliString.from_letters({m: "Z"}, m)
        frame = replace(frame, w=frame.w + 1)
    if not any(pauli.x) and not any(pauli.z):
        return state, frame
    return apply_fgo(state, pauli_fgo(pauli), path), frame


def apply_pauli_error(state: GaussianState, frame: LogicalFrame, qubit: int, kind: str, theta: float = 0.0,
                      rng: Optional[np.random.Generator] = None, c: float = 1.0,
                      path: UpdatePath = UpdatePath.FAST) -> Tuple[GaussianState, LogicalFrame]:
    """
    kind "Y" or "Z" applies Y_i Z_{n+1} or Z_i Z_{n+1} and counts the insertion.
    kind "X" applies the coherent map E(sin^2 theta, c): one Kraus branch exp(i phi X_i),
    with phi drawn by `rng` (c = 1 needs no rng).
    """
    m = frame.m
    if not 1 <= qubit <= m - 1:
        raise InvalidArgument(f"Data qubit {qubit} outside 1..{m - 1}.")
    if kind in ("Y", "Z"):
        return apply_tracked_pauli(state, frame, PauliString.from_letters({qubit: kind}, m), path)
    if kind != "X":
        raise InvalidArgument(f"Unknown error kind '{kind}'.")
    if theta == 0.0:
        return state, frame
    if rng is None:
        if c != 1.0:
            raise InvalidArgument("An incoherent X channel needs an rng to draw its branch.")
        phi, weight = theta, 1.0
    else:
        phi, weight = pmf_simple(c).sample(rng, theta)
    return apply_fgo(state, noise_fgo(qubit, phi, weight, m), path), frame


def measure_stabilizer(state: GaussianState, stabilizer: Bilinear, theta: float, rng: np.random.Generator,
                       weight: float = 1.0, path: UpdatePath = UpdatePath.FAST) -> Tuple[GaussianState, int]:
    """
    Samples s from the branch norms of P'(S, s, theta) = (I + (-1)^s e^{-2 i theta} S)/2
    and applies the chosen branch; theta = 0 is the ideal measurement.
    """
    m = state.n_modes
    ops = tuple(_projector(stabilizer, s, theta, weight, m) for s in (0, 1))
    s, _ = choose_branch(state, ops, path, rng, f"stabilizer ({stabilizer[0]}, {stabilizer[1]})")
    return apply_fgo(state, ops[s], path), s


@dataclass
class SurfaceTrajectory:
    """One sampled run; `syndromes` is (faces, T+1) in layout.faces order."""

    final_state: GaussianState
    frame: LogicalFrame
    syndromes: np.ndarray
    recovery: PauliString


def _data_noise(state: GaussianState, frame: LogicalFrame, config: SurfaceConfig, rng: np.random.Generator,
                path: UpdatePath) -> Tuple[GaussianState, LogicalFrame]:
    noise = config.noise
    theta = math.asin(math.sqrt(noise.p_x))
    for q in range(1, frame.m):
        u = rng.random()
        if u < noise.p_y:
            state, frame = apply_pauli_error(state, frame, q, "Y", path=path)
        elif u < noise.p_y + noise.p_z:
            state, frame = apply_pauli_error(state, frame, q, "Z", path=path)
        if theta > 0.0:
            state, frame = apply_pauli_error(state, frame, q, "X", theta, rng, noise.c, path)
    return state, frame


def _measurement_round(state: GaussianState, frame: LogicalFrame, layout: StabilizerSet, config: SurfaceConfig,
                       rng: np.random.Generator, noisy: bool,
                       path: UpdatePath) -> Tuple[GaussianState, LogicalFrame, np.ndarray]:
    noise = config.noise
    theta_m = math.asin(math.sqrt(noise.p_m)) if noisy else 0.0
    measured = layout.measured
    bits = np.zeros(len(measured), dtype=np.uint8)
    back_action: List[Tuple[int, str]] = []
    flips = np.zeros(len(measured), dtype=np.uint8)
    for k, stabilizer in enumerate(measured):
        phi, weight = (0.0, 1.0)
        if theta_m > 0.0:
            phi, weight = pmf_simple(noise.c_m).sample(rng, theta_m)
        state, bits[k] = measure_stabilizer(state, stabilizer.bilinear, phi, rng, weight, path)
        if not noisy:
            continue
        u = rng.random()
        if u < noise.q_x + noise.q_y:
            flips[k] = 1
        if noise.q_x <= u < noise.q_x + noise.q_y + noise.q_z:
            back_action.append((k, "Y" if u < noise.q_x + noise.q_y else "Z"))
    if config.mode == SyndromeMode.DIRECT_TILDE:
        recorded = convert_round(layout, bits ^ flips)
    else:
        recorded = convert_round(layout, bits) ^ flips
    for k, letter in back_action:
        face = layout.faces[k] if config.mode == SyndromeMode.CONVERTED else measured[k]
        state, frame = apply_pauli_error(state, frame, face.qubits[0], letter, path=path)
    return state, frame, recorded


def sample_surface_trajectory(config: SurfaceConfig, rng: np.random.Generator,
                              options: Optional[SamplerOptions] = None) -> SurfaceTrajectory:
    """
    T noisy cycles (data noise, then one measurement round), an error-free final
    round, decoding, and the recovery applied with Z_{n+1} bookkeeping.
    """
    options = options or SamplerOptions()
    layout = build_stabilizers(config.d)
    state, frame = init_logical_bell(config.d, options.path)
    rounds = []
    for y in range(1, config.T + 1):
        state, frame = _data_noise(state, frame, config, rng, options.path)
        state, frame, recorded = _measurement_round(state, frame, layout, config, rng, True, options.path)
        rounds.append(recorded)
        state = purify_if_drifted(state, options.purify_tolerance)
    state, frame, recorded = _measurement_round(state, frame, layout, config, rng, False, options.path)
    rounds.append(recorded)
    syndromes = np.stack(rounds, axis=1)
    recovery = decode_surface(layout, syndromes)
    state, frame = apply_tracked_pauli(state, frame, recovery, options.path)
    return SurfaceTrajectory(state, frame, syndromes, recovery)


def logical_coefficients(state: GaussianState, frame: LogicalFrame) -> Dict[Tuple[str, str], float]:
    """A_{W,W'} = <L_W W'_{n+1}> for the six nontrivial entries, before the Z_{n+1}^w correction."""
    return {(w, a): pauli_expectation(state, frame.extended(w, a)) for w, a in COEFFICIENTS}


def corrected_coefficients(state: GaussianState, frame: LogicalFrame) -> np.ndarray:
    """
    Coefficients of Z_{n+1}^w |phi><phi| Z_{n+1}^w in the order
    (II, XX) + COEFFICIENTS; X and Y on the ancilla pick up (-1)^w.
    """
    sign = -1.0 if frame.w % 2 else 1.0
    raw = logical_coefficients(state, frame)
    values = [1.0, sign]
    for (w, a) in COEFFICIENTS:
        values.append(raw[(w, a)] * (sign if a in ("X", "Y") else 1.0))
    return np.array(values)


def density_matrix(coefficients: np.ndarray) -> np.ndarray:
    """rho = (1/4) sum A_{W,W'} sigma_W (x) sigma_W' over (II, XX) + COEFFICIENTS."""
    pairs = (("I", "I"), ("X", "X")) + COEFFICIENTS
    rho = np.zeros((4, 4), dtype=complex)
    for value, (w, a) in zip(coefficients, pairs):
        rho += value * np.kron(_PAULI_2x2[w], _PAULI_2x2[a])
    return rho / 4.0


def entanglement_fidelity(coefficients: np.ndarray) -> float:
    """<phi_init| rho |phi_init> = (1 + A_XX - A_YY + A_ZZ)/4 on the corrected coefficients."""
    return float((1.0 + coefficients[1] - coefficients[4] + coefficients[7]) / 4.0)


class SurfaceResult(BaseModel):
    rho_real: List[List[float]]
    rho_imag: List[List[float]]
    F: float
    F_stderr: float
    coefficients: Dict[str, float]
    samples: int
    degenerate_count: int
    failed_count: int = 0

    def rho(self) -> np.ndarray:
        return np.array(self.rho_real) + 1j * np.array(self.rho_imag)


def _surface_job(config: SurfaceConfig, options: SamplerOptions, rng: np.random.Generator) -> np.ndarray:
    traj = sample_surface_trajectory(config, rng, options)
    return corrected_coefficients(traj.final_state, traj.frame)


def check_density_matrix(rho: np.ndarray) -> None:
    if not np.allclose(rho, rho.conj().T, atol=1e-12):
        raise InternalInvariantViolation("Reconstructed rho(C) is not Hermitian.")
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise InternalInvariantViolation(f"Reconstructed rho(C) has trace {np.trace(rho).real!r}.")
    lowest = float(np.linalg.eigvalsh(rho).min())
    if lowest < -PSD_TOLERANCE:
        log.warning(f"rho(C) has eigenvalue {lowest:.2e}; Monte-Carlo noise exceeds the PSD tolerance.")


def run_and_reconstruct(config: SurfaceConfig, samples: int, seed: int, workers: int = 1, progress: bool = False,
                        options: Optional[SamplerOptions] = None, pool: Optional[WorkerPool] = None) -> SurfaceResult:
    """rho(C) = ave(Z_{n+1}^w |phi_final><phi_final| Z_{n+1}^w) and its entanglement fidelity."""
    if samples < 1:
        raise InvalidArgument(f"samples must be >= 1, got {samples}.")
    pool = pool or WorkerPool(workers=workers, progress=progress)
    job = partial(_surface_job, config, options or SamplerOptions())
    values, degenerate, failed = split_outcomes(pool.map(job, seed, samples, desc=f"surface d={config.d}"))
    if not values:
        raise InternalInvariantViolation("Every surface-code sample degenerated.")
    table = np.array(values)
    mean = table.mean(axis=0)
    rho = density_matrix(mean)
    check_density_matrix(rho)
    per_sample = (1.0 + table[:, 1] - table[:, 4] + table[:, 7]) / 4.0
    stderr = float(per_sample.std(ddof=1) / math.sqrt(len(per_sample))) if len(per_sample) > 1 else 0.0
    F = entanglement_fidelity(mean)
    names = ["II", "XX"] + [w + a for w, a in COEFFICIENTS]
    log.info(f"surface d={config.d} T={config.T} mode={config.mode.value}: F={F:.6f} +- {stderr:.2g}")
    return SurfaceResult(rho_real=rho.real.tolist(), rho_imag=rho.imag.tolist(), F=F, F_stderr=stderr,
                         coefficients=dict(zip(names, (float(v) for v in mean))), samples=len(values),
                         degenerate_count=degenerate, failed_count=failed)
