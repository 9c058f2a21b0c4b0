# coherent_qec/Runtime/WorkerPool.py

import logging
import sys
from dataclasses import dataclass
from functools import partial
from multiprocessing import Pool
from typing import Any, Callable, List, Tuple, Union

import numpy as np
from tqdm import tqdm

from coherent_qec.Errors import NumericalDegeneracy, ZeroProbabilityOutcome
from coherent_qec.Runtime.Seeding import sample_rng

log = logging.getLogger(__name__)

SampleJob = Callable[[np.random.Generator], Any]


@dataclass
class SampleSuccess:
    index: int
    value: Any
    retries: int


@dataclass
class SampleFailure:
    index: int
    error: str
    retries: int


SampleOutcome = Union[SampleSuccess, SampleFailure]


def _run_sample(job: SampleJob, seed: int, max_attempts: int, index: int) -> SampleOutcome:
    """Runs one sample, redrawing with a fresh stream when a branch degenerates."""
    error = ""
    for attempt in range(max_attempts):
        try:
            return SampleSuccess(index, job(sample_rng(seed, index, attempt)), attempt)
        except (NumericalDegeneracy, ZeroProbabilityOutcome) as e:
            error = str(e)
            log.debug(f"Sample {index} attempt {attempt} degenerated: {e}")
    return SampleFailure(index, error, max_attempts)


class WorkerPool:
    """
    Fans independent samples out over a process pool.

    Outcomes come back in sample order whatever the worker count. Jobs must be
    picklable when workers > 1 (module-level functions or partials of them).
    """

    def __init__(self, workers: int = 1, chunk_size: int = 64, progress: bool = True, max_attempts: int = 8):
        self.workers = max(1, int(workers))
        self.chunk_size = max(1, int(chunk_size))
        self.progress = progress
        self.max_attempts = max_attempts

    def _show_progress(self) -> bool:
        return self.progress and sys.stderr.isatty()

    def map(self, job: SampleJob, seed: int, samples: int, desc: str = "samples") -> List[SampleOutcome]:
        runner = partial(_run_sample, job, seed, self.max_attempts)
        bar = dict(total=samples, desc=desc, disable=not self._show_progress(), leave=False)
        if self.workers == 1:
            return [runner(i) for i in tqdm(range(samples), **bar)]
        with Pool(processes=self.workers) as pool:
            return list(tqdm(pool.imap(runner, range(samples), chunksize=self.chunk_size), **bar))


def split_outcomes(outcomes: List[SampleOutcome]) -> Tuple[List[Any], int, int]:
    """Returns (values of successful samples, degenerate redraw count, failed sample count)."""
    values = [o.value for o in outcomes if isinstance(o, SampleSuccess)]
    degenerate = sum(o.retries for o in outcomes)
    failed = sum(1 for o in outcomes if isinstance(o, SampleFailure))
    if failed:
        log.warning(f"{failed} of {len(outcomes)} samples degenerated on every attempt and were excluded.")
    return values, degenerate, failed
