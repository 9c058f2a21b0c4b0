# coherent_qec/Repetition/TrajectorySampler.py

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from coherent_qec.Decoder.MatchingDecoder import RecoveryMask, decode
from coherent_qec.Errors import InternalInvariantViolation, InvalidArgument, NumericalDegeneracy
from coherent_qec.Fermion.GaussianState import (GaussianOp, GaussianState, UpdatePath, apply_fgo, bilinear_expectation,
                                                branch_log_weight, make_ghz_plus, purify)
from coherent_qec.Fermion.KrausCatalog import KrausKind, KrausSpec
from coherent_qec.Repetition.CircuitSchedule import (CircuitConfig, CircuitSchedule, FinalIdealParity,
                                                     FinalNoise, NoiseSite, ParityMeasurement, build_schedule)
from coherent_qec.Runtime.WorkerPool import WorkerPool, split_outcomes

log = logging.getLogger(__name__)

READOUT_TOLERANCE = 1e-9
# Degenerate redraws allowed per requested sample before an estimate is flagged.
DEGENERATE_BUDGET = 1e-3


@dataclass
class Trajectory:
    """
    One sampled branch sequence t.

    `syndromes` has shape (n-1, T+1); column T+1 holds the error-free final round.
    `log_probability` is the sum of the sampled log branch probabilities and
    should equal final_state.log_gamma.
    """

    outcomes: List[KrausSpec]
    syndromes: np.ndarray
    final_state: GaussianState
    log_probability: float

    @property
    def n(self) -> int:
        return self.syndromes.shape[0] + 1

    @property
    def T(self) -> int:
        return self.syndromes.shape[1] - 1


@dataclass
class SamplerOptions:
    path: UpdatePath = UpdatePath.FAST
    purify_tolerance: float = 1e-10
    purify_interval: int = 256


def choose_branch(state: GaussianState, ops: Tuple[GaussianOp, GaussianOp], path: UpdatePath, rng: np.random.Generator,
                  label: str = "measurement") -> Tuple[int, float]:
    """Samples s in proportion to the branch norms; returns (s, log of the chosen branch's norm ratio)."""
    logs = [branch_log_weight(state, op, path) for op in ops]
    top = max(logs)
    if top == -math.inf:
        raise NumericalDegeneracy(f"Every outcome of {label} vanishes.")
    weights = [math.exp(value - top) for value in logs]
    s = int(rng.random() * sum(weights) >= weights[0])
    return s, float(logs[s])


def _outcome(state: GaussianState, specs: Tuple[KrausSpec, KrausSpec], m: int, path: UpdatePath,
             rng: np.random.Generator) -> Tuple[int, float, GaussianOp]:
    """Prices both branches and returns (s, log ratio, the chosen descriptor)."""
    ops = tuple(spec.to_fgo(m) for spec in specs)
    s, log_ratio = choose_branch(state, ops, path, rng, f"{specs[0].kind.value} on site {specs[0].index}")
    return s, log_ratio, ops[s]


def purify_if_drifted(state: GaussianState, tolerance: float) -> GaussianState:
    M = state.M
    drift = float(np.max(np.abs(M @ M.T - np.eye(M.shape[0]))))
    if drift > tolerance:
        log.debug(f"Purifying covariance (drift {drift:.2e}).")
        return purify(state)
    return state


def _maybe_purify(state: GaussianState, step: int, options: SamplerOptions) -> GaussianState:
    if options.purify_interval <= 0 or step % options.purify_interval:
        return state
    return purify_if_drifted(state, options.purify_tolerance)


def sample_trajectory(schedule: CircuitSchedule, rng: np.random.Generator,
                      options: Optional[SamplerOptions] = None) -> Trajectory:
    """
    Draws t_k from Pr(t_k | t_{k-1}) = Gamma(t_k)/Gamma(t_{k-1}) along the schedule.

    Noise maps satisfy K^dagger K = p(phi) I, so their angle is drawn straight from
    the pmf. Parity outcomes are drawn from the two branch norms.
    """
    options = options or SamplerOptions()
    n, T, m, theta = schedule.n, schedule.T, schedule.n_modes, schedule.theta
    state = make_ghz_plus(m)
    syndromes = np.zeros((n - 1, T + 1), dtype=np.uint8)
    outcomes: List[KrausSpec] = []
    log_probability = 0.0

    for step, item in enumerate(schedule, start=1):
        if isinstance(item, (NoiseSite, FinalNoise)):
            phi, weight = item.pmf.sample(rng, theta)
            spec = KrausSpec(KrausKind.NOISE, item.qubit, phi, 0, weight)
            op = spec.to_fgo(m)
            log_probability += math.log(weight)
        elif isinstance(item, ParityMeasurement):
            phi, weight = item.pmf.sample(rng, theta)
            specs = tuple(KrausSpec(KrausKind.PARITY_NOISY, item.site, phi, s, weight) for s in (0, 1))
            s, log_ratio, op = _outcome(state, specs, m, options.path, rng)
            spec = specs[s]
            syndromes[item.site - 1, item.cycle - 1] = s
            log_probability += log_ratio
        elif isinstance(item, FinalIdealParity):
            specs = tuple(KrausSpec(KrausKind.PARITY_IDEAL, item.site, 0.0, s) for s in (0, 1))
            s, log_ratio, op = _outcome(state, specs, m, options.path, rng)
            spec = specs[s]
            syndromes[item.site - 1, T] = s
            log_probability += log_ratio
        else:
            raise InternalInvariantViolation(f"Unknown schedule item {item!r}.")
        state = apply_fgo(state, op, options.path)
        state = _maybe_purify(state, step, options)
        outcomes.append(spec)

    return Trajectory(outcomes, syndromes, state, log_probability)


def logical_failure_fraction(traj: Trajectory, recovery: RecoveryMask) -> float:
    """
    Gamma_L(t)/Gamma(t) = (1 - (-1)^{r_n} <Z_n Z_{n+1}>)/2 on the final state.

    Only r_n matters: the other recovery flips commute with Z_n Z_{n+1}.
    """
    n = traj.n
    zz = bilinear_expectation(traj.final_state, 2 * n + 1, 2 * n)
    sign = -1.0 if recovery.r[n - 1] else 1.0
    value = 0.5 * (1.0 - sign * zz)
    if value < -READOUT_TOLERANCE or value > 1.0 + READOUT_TOLERANCE:
        raise InternalInvariantViolation(f"Logical failure fraction {value!r} lies outside [0, 1].")
    return min(max(value, 0.0), 1.0)


@dataclass
class DecodedSample:
    trajectory: Trajectory
    recovery: RecoveryMask
    failure: float


def sample_and_decode(config: CircuitConfig, rng: np.random.Generator,
                      options: Optional[SamplerOptions] = None) -> DecodedSample:
    schedule = build_schedule(config, rng)
    traj = sample_trajectory(schedule, rng, options)
    recovery = decode(traj.syndromes, config)
    return DecodedSample(traj, recovery, logical_failure_fraction(traj, recovery))


def _failure_job(config: CircuitConfig, options: SamplerOptions, rng: np.random.Generator) -> float:
    return sample_and_decode(config, rng, options).failure


class LogicalErrorEstimate(BaseModel):
    p_L: float
    stderr: float
    samples: int
    degenerate_count: int
    degenerate_exceeded: bool = False
    failed_count: int = 0


def degenerate_budget_exceeded(degenerate: int, samples: int) -> bool:
    return degenerate > DEGENERATE_BUDGET * samples


def mean_and_stderr(values: List[float]) -> Tuple[float, float]:
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        return math.nan, math.nan
    stderr = float(data.std(ddof=1) / math.sqrt(data.size)) if data.size > 1 else 0.0
    return float(data.mean()), stderr


def estimate_logical_error(config: CircuitConfig, samples: int, seed: int, workers: int = 1,
                           progress: bool = False, options: Optional[SamplerOptions] = None,
                           pool: Optional[WorkerPool] = None) -> LogicalErrorEstimate:
    """Mean of Gamma_L/Gamma over decoded trajectories, with its standard error."""
    if samples < 1:
        raise InvalidArgument(f"samples must be >= 1, got {samples}.")
    pool = pool or WorkerPool(workers=workers, progress=progress)
    job = partial(_failure_job, config, options or SamplerOptions())
    values, degenerate, failed = split_outcomes(pool.map(job, seed, samples, desc=f"n={config.n} p={config.noise.p}"))
    exceeded = degenerate_budget_exceeded(degenerate, samples)
    if exceeded:
        log.warning(f"{degenerate} degenerate redraws in {samples} samples exceeds the {DEGENERATE_BUDGET:.1%} budget.")
    p_L, stderr = mean_and_stderr(values)
    log.info(f"{config.model.value} n={config.n} T={config.T} p={config.noise.p} c={config.noise.c}: "
             f"p_L={p_L:.5g} +- {stderr:.2g}")
    return LogicalErrorEstimate(p_L=p_L, stderr=stderr, samples=len(values), degenerate_count=degenerate,
                                degenerate_exceeded=exceeded, failed_count=failed)
