# coherent_qec/Decoder/MatchingDecoder.py

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, TextIO, Tuple

import networkx as nx
import numpy as np

from coherent_qec.Decoder.LeadingOrderWeights import leading_order_lattice
from coherent_qec.Errors import InternalInvariantViolation, InvalidArgument
from coherent_qec.Repetition.CircuitSchedule import CircuitConfig, DecoderWeighting

log = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 12

Defect = Tuple[int, int]
Node = Tuple[str, int]


@dataclass(frozen=True)
class DefectSet:
    """Space-time defects (x, y): sites 1..n-1, rows 1..T+1."""

    defects: Tuple[Defect, ...]
    n: int
    T: int

    @property
    def boundary_parity(self) -> int:
        return len(self.defects) % 2

    def __len__(self) -> int:
        return len(self.defects)


@dataclass
class MatchingGraph:
    """
    Defect nodes ("d", i) and private boundary nodes ("b", i) for i indexing
    `defects.defects`. `boundary_side` records which boundary each defect's
    boundary edge reaches: "left" (through qubit 1) or "right" (through qubit n).
    """

    defects: DefectSet
    graph: nx.Graph
    weighting: DecoderWeighting
    boundary_side: Dict[int, str] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.defects.n

    @property
    def T(self) -> int:
        return self.defects.T

    def weight(self, u: Node, v: Node) -> float:
        return float(self.graph[u][v]["weight"])


@dataclass(frozen=True)
class RecoveryMask:
    r: np.ndarray

    @property
    def n(self) -> int:
        return int(self.r.size)

    def flipped(self) -> List[int]:
        return [int(i) + 1 for i in np.flatnonzero(self.r)]


def defect_grid(s: np.ndarray) -> np.ndarray:
    """
    m_{x,y} = s_{x,y} XOR s_{x,y-1} with s_{x,0} = 0.

    `s` has shape (n-1, T+1); row index x-1, column index y-1.
    """
    s = np.asarray(s, dtype=np.uint8)
    if s.ndim != 2 or s.shape[1] < 2:
        raise InvalidArgument(f"Syndrome grid must have shape (n-1, T+1) with T >= 1, got {s.shape}.")
    previous = np.zeros_like(s)
    previous[:, 1:] = s[:, :-1]
    return s ^ previous


def difference_syndromes(s: np.ndarray) -> DefectSet:
    m = defect_grid(s)
    defects = tuple((int(x) + 1, int(y) + 1) for x, y in np.argwhere(m))
    return DefectSet(defects, m.shape[0] + 1, m.shape[1] - 1)


def _uniform_pair(a: Defect, b: Defect) -> float:
    return float(abs(a[0] - b[0]) + abs(a[1] - b[1]))


def _uniform_boundary(d: Defect, n: int) -> Tuple[float, str]:
    x = d[0]
    return (float(x), "left") if x <= n - x else (float(n - x), "right")


def _lattice_distances(lattice: nx.Graph, d: Defect) -> Dict:
    return nx.single_source_dijkstra_path_length(lattice, d, weight="weight")


def boundary_augmented_graph(pair_weight: Dict[Tuple[int, int], float], boundary: List[float]) -> nx.Graph:
    """
    Defect nodes ("d", i), one private boundary node ("b", i) each, and free
    boundary-boundary edges. Defect pairs no cheaper than sending both to the
    boundary are left out; the optimum is unchanged.
    """
    k = len(boundary)
    graph = nx.Graph()
    graph.add_nodes_from([("d", i) for i in range(k)] + [("b", i) for i in range(k)])
    for i, w in enumerate(boundary):
        graph.add_edge(("d", i), ("b", i), weight=w)
    for (i, j), w in pair_weight.items():
        if w < boundary[i] + boundary[j]:
            graph.add_edge(("d", i), ("d", j), weight=w)
    for i in range(k):
        for j in range(i + 1, k):
            graph.add_edge(("b", i), ("b", j), weight=0.0)
    return graph


def build_matching_graph(defects: DefectSet, weighting: DecoderWeighting = DecoderWeighting.UNIFORM,
                         lattice: Optional[nx.Graph] = None) -> MatchingGraph:
    """
    Complete matching graph over defects with one private boundary node each.

    Uniform weighting uses Manhattan distance and min(x, n-x) to the boundary.
    Leading-order weighting takes shortest-path lengths on `lattice`, whose
    boundary nodes are "L" and "R".
    """
    if weighting == DecoderWeighting.CIRCUIT_LEADING_ORDER and lattice is None:
        raise InvalidArgument("Leading-order weighting needs the weighted lattice.")
    points = defects.defects
    k = len(points)
    pair_weight: Dict[Tuple[int, int], float] = {}
    boundary: List[Tuple[float, str]] = []
    if weighting == DecoderWeighting.UNIFORM:
        boundary = [_uniform_boundary(d, defects.n) for d in points]
        for i in range(k):
            for j in range(i + 1, k):
                pair_weight[(i, j)] = _uniform_pair(points[i], points[j])
    else:
        distances = [_lattice_distances(lattice, d) for d in points]
        for dist in distances:
            left, right = dist.get("L", np.inf), dist.get("R", np.inf)
            boundary.append((float(left), "left") if left <= right else (float(right), "right"))
        for i in range(k):
            for j in range(i + 1, k):
                pair_weight[(i, j)] = float(distances[i].get(points[j], np.inf))

    graph = boundary_augmented_graph(pair_weight, [w for w, _ in boundary])
    sides = {i: side for i, (_, side) in enumerate(boundary)}
    return MatchingGraph(defects, graph, weighting, sides)


def _normalized(matching) -> List[Tuple[Node, Node]]:
    return sorted(tuple(sorted(pair)) for pair in matching)


def perfect_matching(graph: nx.Graph) -> List[Tuple[Node, Node]]:
    """Exact minimum-weight perfect matching (networkx blossom), pairs sorted by node id."""
    if graph.number_of_nodes() == 0:
        return []
    matching = nx.min_weight_matching(graph, weight="weight")
    if 2 * len(matching) != graph.number_of_nodes():
        raise InternalInvariantViolation(f"Matching covers {2 * len(matching)} of {graph.number_of_nodes()} nodes.")
    return _normalized(matching)


def mwpm(g: MatchingGraph) -> List[Tuple[Node, Node]]:
    return perfect_matching(g.graph)


def matching_weight(g: MatchingGraph, matching: List[Tuple[Node, Node]]) -> float:
    return float(sum(g.weight(u, v) for u, v in matching))


def brute_force_mwpm(g: MatchingGraph) -> List[Tuple[Node, Node]]:
    """Exhaustive minimum over pairings, each defect paired or sent to its boundary."""
    k = len(g.defects)
    if k > BRUTE_FORCE_LIMIT:
        raise InvalidArgument(f"brute_force_mwpm handles at most {BRUTE_FORCE_LIMIT} defects, got {k}.")

    def pair_cost(i: int, j: int) -> float:
        edge = g.graph.get_edge_data(("d", i), ("d", j))
        return np.inf if edge is None else float(edge["weight"])

    @lru_cache(maxsize=None)
    def best(mask: int) -> Tuple[float, Tuple[Tuple[int, int], ...]]:
        if mask == (1 << k) - 1:
            return 0.0, ()
        i = next(b for b in range(k) if not mask >> b & 1)
        cost, rest = best(mask | 1 << i)
        options = [(g.weight(("d", i), ("b", i)) + cost, ((i, -1),) + rest)]
        for j in range(i + 1, k):
            if mask >> j & 1:
                continue
            cost, rest = best(mask | 1 << i | 1 << j)
            options.append((pair_cost(i, j) + cost, ((i, j),) + rest))
        return min(options, key=lambda option: option[0])

    _, choice = best(0)
    matching: List[Tuple[Node, Node]] = []
    free_boundaries = []
    for i, j in choice:
        if j < 0:
            matching.append((("d", i), ("b", i)))
        else:
            matching.append((("d", i), ("d", j)))
            free_boundaries += [("b", i), ("b", j)]
    free_boundaries.sort()
    matching += list(zip(free_boundaries[0::2], free_boundaries[1::2]))
    return _normalized(matching)


def recovery_from_matching(matching: List[Tuple[Node, Node]], g: MatchingGraph) -> RecoveryMask:
    """
    Data-qubit flips implied by the matched paths, projected onto the final row.

    A path between sites x1 < x2 crosses qubits x1+1..x2; a path from site x to the
    left boundary crosses qubits 1..x and to the right boundary x+1..n.
    Time steps cross no qubit.
    """
    n = g.n
    r = np.zeros(n, dtype=np.uint8)
    points = g.defects.defects
    for u, v in matching:
        if u[0] == "b" and v[0] == "b":
            continue
        if u[0] == "d" and v[0] == "d":
            x1, x2 = sorted((points[u[1]][0], points[v[1]][0]))
            r[x1:x2] ^= 1
            continue
        i = u[1] if u[0] == "d" else v[1]
        x = points[i][0]
        if g.boundary_side[i] == "left":
            r[:x] ^= 1
        else:
            r[x:] ^= 1
    return RecoveryMask(r)


def dump_matching(g: MatchingGraph, matching: List[Tuple[Node, Node]], stream: TextIO) -> None:
    """Line-oriented dump: one defect or matched pair per line."""
    points = g.defects.defects
    for x, y in points:
        stream.write(f"defect {x} {y}\n")
    for u, v in matching:
        if u[0] == "b" and v[0] == "b":
            continue
        w = g.weight(u, v)
        if u[0] == "d" and v[0] == "d":
            (x1, y1), (x2, y2) = points[u[1]], points[v[1]]
            stream.write(f"pair {x1} {y1} {x2} {y2} {w:.6g}\n")
        else:
            i = u[1] if u[0] == "d" else v[1]
            x, y = points[i]
            stream.write(f"boundary {x} {y} {g.boundary_side[i]} {w:.6g}\n")


def decode(syndromes: np.ndarray, config: CircuitConfig) -> RecoveryMask:
    """Syndrome grid to recovery mask with the decoder graph named in `config`."""
    defects = difference_syndromes(syndromes)
    if not defects.defects:
        return RecoveryMask(np.zeros(config.n, dtype=np.uint8))
    lattice = None
    if config.decoder_weighting == DecoderWeighting.CIRCUIT_LEADING_ORDER:
        lattice = leading_order_lattice(config)
    g = build_matching_graph(defects, config.decoder_weighting, lattice)
    matching = mwpm(g)
    if log.isEnabledFor(logging.DEBUG):
        log.debug(f"{len(defects)} defects matched with weight {matching_weight(g, matching):.4g}.")
    return recovery_from_matching(matching, g)
