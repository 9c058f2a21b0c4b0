# coherent_qec/Analysis/EffectiveError.py

import logging
import math
from functools import partial
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from coherent_qec.Decoder.MatchingDecoder import defect_grid
from coherent_qec.Errors import InvalidArgument
from coherent_qec.Repetition.CircuitSchedule import CircuitConfig, NoiseAllocation, build_schedule
from coherent_qec.Repetition.TrajectorySampler import (SamplerOptions, degenerate_budget_exceeded, mean_and_stderr,
                                                       sample_trajectory)
from coherent_qec.Runtime.WorkerPool import WorkerPool, split_outcomes

log = logging.getLogger(__name__)

# Leading-order p_eff / p at c = 0 in the circuit-based model.
PEFF_SLOPE_INCOHERENT = 8.0 / 3.0


class PeffEstimate(BaseModel):
    """Monte-Carlo marginal Pr(m_{x,y} = m_{x+1,y} = 1)."""
    p_eff: float
    stderr: float
    p: float
    c: float
    x: int
    y: int
    samples: int
    degenerate_count: int = 0
    degenerate_exceeded: bool = False


def _check_site(config: CircuitConfig, x: int, y: int) -> None:
    if config.model != NoiseAllocation.CIRCUIT_BASED:
        raise InvalidArgument("estimate_peff applies to the circuit-based noise model only.")
    if not 1 <= x <= config.n - 2:
        raise InvalidArgument(f"Site x must lie in 1..{config.n - 2} for n={config.n}, got {x}.")
    if not 2 <= y <= config.T:
        raise InvalidArgument(f"Cycle y must lie in 2..{config.T} for T={config.T}, got {y}.")


def _double_flip_job(config: CircuitConfig, x: int, y: int, options: SamplerOptions,
                     rng: np.random.Generator) -> float:
    schedule = build_schedule(config, rng)
    m = defect_grid(sample_trajectory(schedule, rng, options).syndromes)
    return float(m[x - 1, y - 1] & m[x, y - 1])


def estimate_peff(config: CircuitConfig, x: int, y: int, samples: int, seed: int, workers: int = 1,
                  progress: bool = False, options: Optional[SamplerOptions] = None,
                  pool: Optional[WorkerPool] = None) -> PeffEstimate:
    """
    Fraction of trajectories in which both measurement qubits next to data
    qubit x+1 report a defect in cycle y. No decoding is involved.
    """
    _check_site(config, x, y)
    if samples < 1:
        raise InvalidArgument(f"samples must be >= 1, got {samples}.")
    pool = pool or WorkerPool(workers=workers, progress=progress)
    job = partial(_double_flip_job, config, x, y, options or SamplerOptions())
    values, degenerate, _ = split_outcomes(
        pool.map(job, seed, samples, desc=f"p_eff p={config.noise.p} c={config.noise.c}"))
    exceeded = degenerate_budget_exceeded(degenerate, samples)
    if exceeded:
        log.warning(f"{degenerate} degenerate redraws in {samples} p_eff samples exceeds the redraw budget.")
    p_eff, stderr = mean_and_stderr(values)
    log.info(f"p_eff at (x={x}, y={y}) for p={config.noise.p} c={config.noise.c}: {p_eff:.4g} +- {stderr:.2g}")
    return PeffEstimate(p_eff=p_eff, stderr=stderr, p=config.noise.p, c=config.noise.c, x=x, y=y,
                        samples=len(values), degenerate_count=degenerate, degenerate_exceeded=exceeded)


def fit_peff_slope(points: Sequence[Tuple[float, float, float]]) -> Tuple[float, float]:
    """
    Weighted least squares of p_eff = k p through the origin.

    `points` holds (p, p_eff, stderr); zero stderr values are floored at the
    smallest positive one.
    """
    data = np.asarray(points, dtype=float)
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] == 0:
        raise InvalidArgument("fit_peff_slope expects a non-empty list of (p, p_eff, stderr) triples.")
    p, y, sigma = data[:, 0], data[:, 1], data[:, 2]
    positive = sigma[sigma > 0]
    sigma = np.where(sigma > 0, sigma, positive.min() if positive.size else 1.0)
    w = 1.0 / sigma ** 2
    sxx = float(np.sum(w * p * p))
    if sxx <= 0.0:
        raise InvalidArgument("fit_peff_slope needs at least one nonzero p.")
    slope = float(np.sum(w * p * y)) / sxx
    return slope, math.sqrt(1.0 / sxx)


def coherence_alpha(slope_incoherent: float, slope_coherent: float, c: float) -> float:
    """alpha from k(c) = k(0) (1 + alpha c^2)."""
    if c <= 0.0 or slope_incoherent <= 0.0:
        raise InvalidArgument("coherence_alpha needs c > 0 and a positive incoherent slope.")
    return (slope_coherent / slope_incoherent - 1.0) / (c * c)
