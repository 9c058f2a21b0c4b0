# coherent_qec/Repetition/PauliFrame.py

import logging
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np

from coherent_qec.Decoder.MatchingDecoder import RecoveryMask, decode
from coherent_qec.Errors import InvalidArgument
from coherent_qec.Repetition.CircuitSchedule import (CircuitConfig, CircuitSchedule, FinalIdealParity,
                                                     FinalNoise, NoiseSite, ParityMeasurement, build_schedule)
from coherent_qec.Repetition.TrajectorySampler import LogicalErrorEstimate, mean_and_stderr
from coherent_qec.Runtime.WorkerPool import WorkerPool, split_outcomes

log = logging.getLogger(__name__)


@dataclass
class FrameRecord:
    syndromes: np.ndarray
    data_flips: np.ndarray


def simulate_pauli_frame(schedule: CircuitSchedule, rng: np.random.Generator) -> FrameRecord:
    """
    Classical bit-flip simulation of the same schedule.

    Valid for c = 0 only, where every noise map is a stochastic X with
    probability p. An item carrying N maps flips with Binomial(N, p) parity.
    """
    config = schedule.config
    if config.noise.c != 0.0:
        raise InvalidArgument(f"The Pauli-frame simulation needs c = 0, got c = {config.noise.c}.")
    n, T, p = schedule.n, schedule.T, config.noise.p
    data = np.zeros(n, dtype=np.uint8)
    syndromes = np.zeros((n - 1, T + 1), dtype=np.uint8)
    for item in schedule:
        if isinstance(item, (NoiseSite, FinalNoise)):
            data[item.qubit - 1] ^= rng.binomial(item.pmf.N, p) & 1
        elif isinstance(item, ParityMeasurement):
            flip = rng.binomial(item.pmf.N, p) & 1
            syndromes[item.site - 1, item.cycle - 1] = data[item.site - 1] ^ data[item.site] ^ flip
        elif isinstance(item, FinalIdealParity):
            syndromes[item.site - 1, T] = data[item.site - 1] ^ data[item.site]
    return FrameRecord(syndromes, data)


def frame_failure(record: FrameRecord, recovery: RecoveryMask) -> float:
    """1.0 when the corrected frame is the logical flip; read on qubit n like the Gaussian readout."""
    return float((record.data_flips[-1] ^ recovery.r[-1]) & 1)


def _frame_job(config: CircuitConfig, rng: np.random.Generator) -> float:
    record = simulate_pauli_frame(build_schedule(config, rng), rng)
    return frame_failure(record, decode(record.syndromes, config))


def estimate_pauli_frame(config: CircuitConfig, samples: int, seed: int, workers: int = 1,
                         progress: bool = False, pool: Optional[WorkerPool] = None) -> LogicalErrorEstimate:
    pool = pool or WorkerPool(workers=workers, progress=progress)
    values, degenerate, failed = split_outcomes(pool.map(partial(_frame_job, config), seed, samples,
                                                         desc=f"frame n={config.n}"))
    p_L, stderr = mean_and_stderr(values)
    log.info(f"Pauli frame {config.model.value} n={config.n} p={config.noise.p}: p_L={p_L:.5g} +- {stderr:.2g}")
    return LogicalErrorEstimate(p_L=p_L, stderr=stderr, samples=len(values), degenerate_count=degenerate,
                                failed_count=failed)
