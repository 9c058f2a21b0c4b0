# coherent_qec/Surface/SurfaceDecoder.py

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Set, Tuple

import networkx as nx
import numpy as np

from coherent_qec.Decoder.MatchingDecoder import boundary_augmented_graph, defect_grid, perfect_matching
from coherent_qec.Errors import InvalidArgument
from coherent_qec.Fermion.JordanWigner import PauliString
from coherent_qec.Surface.SurfaceLayout import StabilizerSet, StabilizerType

log = logging.getLogger(__name__)

BOUNDARY = "boundary"


@dataclass(frozen=True)
class FaceLattice:
    """
    Faces of one type as nodes; an edge joins two faces sharing a data qubit, or
    a face and BOUNDARY through a qubit no other face of the type covers. Each
    edge carries that qubit.
    """

    kind: StabilizerType
    face_indices: Tuple[int, ...]
    graph: nx.Graph
    distances: Dict
    paths: Dict


@lru_cache(maxsize=16)
def face_lattice(layout: StabilizerSet, kind: StabilizerType) -> FaceLattice:
    faces = layout.faces
    members = tuple(i for i, f in enumerate(faces) if f.kind == kind)
    covering: Dict[int, List[int]] = {}
    for i in members:
        for q in faces[i].qubits:
            covering.setdefault(q, []).append(i)
    graph = nx.Graph()
    graph.add_nodes_from(members)
    graph.add_node(BOUNDARY)
    for q in sorted(covering):
        owners = covering[q]
        if len(owners) == 1:
            u, v = owners[0], BOUNDARY
        elif len(owners) == 2:
            u, v = owners
        else:
            raise InvalidArgument(f"Qubit {q} lies on {len(owners)} faces of type {kind.value}.")
        if not graph.has_edge(u, v):
            graph.add_edge(u, v, weight=1.0, qubit=q)
    distances = dict(nx.all_pairs_shortest_path_length(graph))
    paths = dict(nx.all_pairs_shortest_path(graph))
    return FaceLattice(kind, members, graph, distances, paths)


def _path_qubits(lattice: FaceLattice, u, v) -> Set[int]:
    nodes = lattice.paths[u][v]
    return {lattice.graph[a][b]["qubit"] for a, b in zip(nodes, nodes[1:])}


def decode_type(lattice: FaceLattice, face_syndromes: np.ndarray) -> FrozenSet[int]:
    """
    Qubits to correct for one face type, from the (faces, rounds) syndrome grid.

    Space-time distance is the face-graph distance plus |dy|; matched paths are
    projected onto space.
    """
    rows = face_syndromes[list(lattice.face_indices), :]
    m = defect_grid(rows)
    defects = [(lattice.face_indices[r], y) for r, y in np.argwhere(m)]
    k = len(defects)
    if k == 0:
        return frozenset()
    boundary = [float(lattice.distances[f][BOUNDARY]) for f, _ in defects]
    pair_weight = {}
    for i in range(k):
        for j in range(i + 1, k):
            (f1, y1), (f2, y2) = defects[i], defects[j]
            pair_weight[(i, j)] = float(lattice.distances[f1][f2] + abs(int(y1) - int(y2)))
    matching = perfect_matching(boundary_augmented_graph(pair_weight, boundary))
    flips: Set[int] = set()
    for u, v in matching:
        if u[0] == "b" and v[0] == "b":
            continue
        if u[0] == "d" and v[0] == "d":
            path = _path_qubits(lattice, defects[u[1]][0], defects[v[1]][0])
        else:
            i = u[1] if u[0] == "d" else v[1]
            path = _path_qubits(lattice, defects[i][0], BOUNDARY)
        flips ^= path
    log.debug(f"{lattice.kind.value}-type faces: {k} defects, {len(flips)} qubits corrected.")
    return frozenset(flips)


def decode_surface(layout: StabilizerSet, face_syndromes: np.ndarray) -> PauliString:
    """
    Recovery Pauli from a (faces, T+1) grid in `layout.faces` order.

    Z-type faces locate the Y component of the error, Y-type faces its Z component;
    a qubit needing both is corrected with X. The phase is dropped.
    """
    grid = np.asarray(face_syndromes, dtype=np.uint8)
    if grid.ndim != 2 or grid.shape[0] != len(layout):
        raise InvalidArgument(f"Expected a ({len(layout)}, T+1) syndrome grid, got shape {grid.shape}.")
    y_part = decode_type(face_lattice(layout, StabilizerType.Z), grid)
    z_part = decode_type(face_lattice(layout, StabilizerType.Y), grid)
    letters = {q: "Y" for q in y_part}
    for q in z_part:
        letters[q] = "X" if q in letters else "Z"
    return PauliString.from_letters(letters, layout.m)
