# coherent_qec/Repetition/CircuitSchedule.py

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from coherent_qec.Fermion.KrausCatalog import NoiseModel, OutcomePmf, pmf_binomial, pmf_simple

log = logging.getLogger(__name__)


class NoiseAllocation(str, Enum):
    PHENOMENOLOGICAL = "phenomenological"
    CIRCUIT_BASED = "circuit_based"


class DecoderWeighting(str, Enum):
    UNIFORM = "uniform"
    CIRCUIT_LEADING_ORDER = "circuit_leading_order"


class CircuitConfig(BaseModel):
    """One repetition-code experiment: code size, cycle count, noise and decoder graph."""
    model_config = ConfigDict(frozen=True)

    model: NoiseAllocation = NoiseAllocation.PHENOMENOLOGICAL
    n: int = Field(..., ge=3)
    T: Optional[int] = Field(None, ge=1)
    noise: NoiseModel
    decoder_weighting: DecoderWeighting = DecoderWeighting.UNIFORM

    @model_validator(mode="after")
    def _default_cycles(self) -> "CircuitConfig":
        if self.T is None:
            object.__setattr__(self, "T", self.n - 1)
        return self

    @property
    def n_modes(self) -> int:
        return self.n + 1


class Placement(IntEnum):
    """Where the X map following a CNOT is placed; values index two_qubit_weights."""
    CONTROL_AFTER = 0
    TARGET_AFTER = 1
    CONTROL_BEFORE = 2


class Group(str, Enum):
    """When a data-qubit noise map acts relative to that qubit's two checks in a cycle."""
    PRE = "pre"
    MID = "mid"
    POST = "post"


# A noise map lands either on a data qubit group or on a measurement qubit.
Landing = Tuple[str, int, Optional[Group]]


@dataclass(frozen=True)
class CnotSlot:
    layer: int
    data: int
    ancilla: int


def cnot_slots(n: int) -> List[CnotSlot]:
    """
    CNOTs of one cycle. Layer 1: data x controls measurement qubit x.
    Layer 2: data x+1 controls measurement qubit x.
    """
    return ([CnotSlot(1, x, x) for x in range(1, n)] +
            [CnotSlot(2, x + 1, x) for x in range(1, n)])


def fixed_landings(n: int) -> List[Landing]:
    """Noise maps placed deterministically in every cycle."""
    landings: List[Landing] = []
    for x in range(1, n):
        landings += [("ancilla", x, None), ("ancilla", x, None)]  # preparation, measurement
    for q in range(1, n + 1):
        landings.append(("data", q, Group.PRE))  # idle during preparation
        landings.append(("data", q, Group.POST))  # idle during measurement
    landings.append(("data", n, Group.MID))  # idle in layer 1
    landings.append(("data", 1, Group.POST))  # idle in layer 2
    return landings


def slot_landing(slot: CnotSlot, placement: Placement) -> Landing:
    if placement == Placement.TARGET_AFTER:
        return ("ancilla", slot.ancilla, None)
    if slot.layer == 1:
        group = Group.MID if placement == Placement.CONTROL_AFTER else Group.PRE
    else:
        group = Group.POST if placement == Placement.CONTROL_AFTER else Group.MID
    return ("data", slot.data, group)


def allocate_cnot_noise(config: CircuitConfig, rng: np.random.Generator) -> np.ndarray:
    """Placement codes of shape (T, number of CNOT slots), drawn with two_qubit_weights."""
    weights = np.asarray(config.noise.two_qubit_weights, dtype=float)
    return rng.choice(len(Placement), size=(config.T, 2 * (config.n - 1)), p=weights / weights.sum())


def cycle_counts(n: int, placements: np.ndarray) -> Tuple[Dict[Tuple[int, Group], int], Dict[int, int]]:
    """Noise-map counts per (data qubit, group) and per measurement qubit for one cycle."""
    landings = fixed_landings(n)
    landings += [slot_landing(slot, Placement(int(code))) for slot, code in zip(cnot_slots(n), placements)]
    data: Dict[Tuple[int, Group], int] = Counter()
    ancilla: Dict[int, int] = Counter()
    for kind, index, group in landings:
        if kind == "ancilla":
            ancilla[index] += 1
        else:
            data[(index, group)] += 1
    return dict(data), dict(ancilla)


@dataclass(frozen=True)
class NoiseSite:
    qubit: int
    pmf: OutcomePmf
    cycle: int


@dataclass(frozen=True)
class ParityMeasurement:
    site: int
    cycle: int
    pmf: OutcomePmf


@dataclass(frozen=True)
class FinalNoise:
    qubit: int
    pmf: OutcomePmf


@dataclass(frozen=True)
class FinalIdealParity:
    site: int


ScheduleItem = Union[NoiseSite, ParityMeasurement, FinalNoise, FinalIdealParity]


@dataclass(frozen=True)
class CircuitSchedule:
    config: CircuitConfig
    elements: Tuple[ScheduleItem, ...]

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def T(self) -> int:
        return self.config.T

    @property
    def theta(self) -> float:
        return self.config.noise.theta

    @property
    def n_modes(self) -> int:
        return self.config.n_modes

    def __iter__(self) -> Iterator[ScheduleItem]:
        return iter(self.elements)

    def census(self) -> Dict[str, int]:
        return dict(Counter(type(item).__name__ for item in self.elements))


@lru_cache(maxsize=256)
def _binomial(count: int, c: float) -> OutcomePmf:
    return pmf_binomial(count, c)


def _phenomenological_cycle(config: CircuitConfig, y: int) -> List[ScheduleItem]:
    pmf = pmf_simple(config.noise.c)
    items: List[ScheduleItem] = [NoiseSite(q, pmf, y) for q in range(1, config.n + 1)]
    items += [ParityMeasurement(x, y, pmf) for x in range(1, config.n)]
    return items


def _circuit_cycle(config: CircuitConfig, y: int, placements: np.ndarray) -> List[ScheduleItem]:
    n, c = config.n, config.noise.c
    data, ancilla = cycle_counts(n, placements)

    def site(q: int, group: Group) -> List[ScheduleItem]:
        count = data.get((q, group), 0)
        return [NoiseSite(q, _binomial(count, c), y)] if count else []

    items: List[ScheduleItem] = []
    for q in range(1, n + 1):
        items += site(q, Group.PRE)
    # mid(q) sits between check q (before it) and check q-1 (after it).
    items += site(n, Group.MID)
    for x in range(n - 1, 0, -1):
        items.append(ParityMeasurement(x, y, _binomial(ancilla[x], c)))
        items += site(x, Group.MID)
    for q in range(1, n + 1):
        items += site(q, Group.POST)
    return items


def build_schedule(config: CircuitConfig, rng: Optional[np.random.Generator] = None) -> CircuitSchedule:
    """
    Full schedule of T noisy syndrome cycles followed by the error-free decoding round.

    The circuit-based model draws a fresh CNOT-noise allocation from `rng` on every
    call; the phenomenological layout is fixed.
    """
    items: List[ScheduleItem] = []
    if config.model == NoiseAllocation.CIRCUIT_BASED:
        if rng is None:
            rng = np.random.default_rng()
        allocation = allocate_cnot_noise(config, rng)
        for y in range(1, config.T + 1):
            items += _circuit_cycle(config, y, allocation[y - 1])
    else:
        for y in range(1, config.T + 1):
            items += _phenomenological_cycle(config, y)
    final_pmf = pmf_simple(config.noise.c)
    items += [FinalNoise(q, final_pmf) for q in range(1, config.n + 1)]
    items += [FinalIdealParity(x) for x in range(1, config.n)]
    return CircuitSchedule(config, tuple(items))
