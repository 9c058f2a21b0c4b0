# coherent_qec/Decoder/LeadingOrderWeights.py

import logging
import math
from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Hashable, List, Tuple

import networkx as nx

from coherent_qec.Repetition.CircuitSchedule import (CircuitConfig, Group, NoiseAllocation, Placement,
                                                     cnot_slots, fixed_landings, slot_landing)

log = logging.getLogger(__name__)

# Edge probabilities are clamped into this range before taking -log.
_MIN_PROBABILITY = 1e-300
_MAX_PROBABILITY = 1.0 - 1e-9

Edge = FrozenSet[Hashable]


def _site(x: int, y: int, n: int) -> Hashable:
    if x <= 0:
        return "L"
    if x >= n:
        return "R"
    return (x, y)


def _data_flip_edge(q: int, row_left: int, row_right: int, n: int) -> Edge:
    """Defects of an X flip on data qubit q seen by check q-1 from row_left and check q from row_right."""
    return frozenset((_site(q - 1, row_left, n), _site(q, row_right, n)))


def _group_edge(q: int, group: Group, y: int, n: int) -> Edge:
    if group == Group.PRE:
        return _data_flip_edge(q, y, y, n)
    if group == Group.MID:
        return _data_flip_edge(q, y, y + 1, n)
    return _data_flip_edge(q, y + 1, y + 1, n)


def fault_coefficients(config: CircuitConfig) -> Dict[Edge, float]:
    """
    O(p) coefficient of every single-fault mechanism, summed per lattice edge.

    Each noise map of the schedule fires an X with probability p times its
    placement weight; its defect pair is an edge of the space-time lattice.
    """
    n, T = config.n, config.T
    coefficients: Dict[Edge, float] = defaultdict(float)
    weights = config.noise.two_qubit_weights
    for y in range(1, T + 1):
        if config.model == NoiseAllocation.PHENOMENOLOGICAL:
            for q in range(1, n + 1):
                coefficients[_group_edge(q, Group.PRE, y, n)] += 1.0
            for x in range(1, n):
                coefficients[frozenset(((x, y), (x, y + 1)))] += 1.0
            continue
        landings = [(landing, 1.0) for landing in fixed_landings(n)]
        for slot in cnot_slots(n):
            landings += [(slot_landing(slot, placement), weights[placement]) for placement in Placement]
        for (kind, index, group), coefficient in landings:
            if coefficient == 0.0:
                continue
            if kind == "ancilla":
                coefficients[frozenset(((index, y), (index, y + 1)))] += coefficient
            else:
                coefficients[_group_edge(index, group, y, n)] += coefficient
    for q in range(1, n + 1):
        coefficients[_data_flip_edge(q, T + 1, T + 1, n)] += 1.0
    return dict(coefficients)


def _edge_weight(coefficient: float, p: float) -> float:
    probability = min(max(coefficient * p, _MIN_PROBABILITY), _MAX_PROBABILITY)
    return -math.log(probability)


@lru_cache(maxsize=32)
def leading_order_lattice(config: CircuitConfig) -> nx.Graph:
    """Space-time lattice with w = -log(coefficient * p); boundary nodes are "L" and "R"."""
    lattice = nx.Graph()
    lattice.add_nodes_from((x, y) for x in range(1, config.n) for y in range(1, config.T + 2))
    lattice.add_nodes_from(["L", "R"])
    for edge, coefficient in fault_coefficients(config).items():
        u, v = tuple(edge)
        lattice.add_edge(u, v, weight=_edge_weight(coefficient, config.noise.p), coefficient=coefficient)
    log.debug(f"Leading-order lattice for n={config.n}, T={config.T}: {lattice.number_of_edges()} edges.")
    return lattice


def _label(node: Hashable) -> str:
    return node if isinstance(node, str) else f"({node[0]},{node[1]})"


def weight_table(config: CircuitConfig) -> str:
    """Human-readable edge table: endpoints, coefficient as a fraction, and weight."""
    lattice = leading_order_lattice(config)
    rows: List[Tuple[str, str, str, float]] = []
    for u, v, data in lattice.edges(data=True):
        a, b = sorted((_label(u), _label(v)))
        fraction = Fraction(data["coefficient"]).limit_denominator(96)
        rows.append((a, b, str(fraction), data["weight"]))
    rows.sort()
    header = f"# leading-order edges: model={config.model.value} n={config.n} T={config.T} p={config.noise.p}"
    lines = [header] + [f"{a:>9} {b:>9} {c:>6} {w:10.4f}" for a, b, c, w in rows]
    return "\n".join(lines) + "\n"
