# coherent_qec/Surface/SurfaceLayout.py

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from coherent_qec.Errors import InvalidArgument
from coherent_qec.Fermion.JordanWigner import PauliString, as_bilinear

log = logging.getLogger(__name__)

Bilinear = Tuple[int, int, int]


class FaceColor(str, Enum):
    BLUE = "blue"
    RED = "red"
    GREEN = "green"
    TILDE = "tilde"


class StabilizerType(str, Enum):
    """The Pauli letter a face applies to each of its qubits."""
    Z = "Z"
    Y = "Y"


@dataclass(frozen=True)
class Stabilizer:
    """
    One face operator. `bilinear` is (a, b, sigma) with the operator equal to
    sigma * (-i c_a c_b) on the ancilla-extended system, or None when the face
    is not quadratic (the four-body red faces).
    """

    color: FaceColor
    column: int
    index: int
    kind: StabilizerType
    qubits: Tuple[int, ...]
    pauli: PauliString
    bilinear: Optional[Bilinear]

    @property
    def label(self) -> str:
        if self.color == FaceColor.BLUE:
            return f"b{self.index}"
        if self.color == FaceColor.GREEN:
            return f"g{self.column}"
        prefix = "r" if self.color == FaceColor.RED else "t"
        return f"{prefix}{self.column}.{self.index}"


@dataclass(frozen=True)
class StabilizerSet:
    """
    Faces of the distance-d code on n = d^2 data qubits plus the ancilla n+1.

    `faces` (blue, red column by column, green) is the order of every decoded
    syndrome vector; `measured` is the same order with each red face replaced
    by the tilde operator of equal column and index.
    """

    d: int
    blue: Tuple[Stabilizer, ...]
    red: Tuple[Tuple[Stabilizer, ...], ...]
    green: Tuple[Stabilizer, ...]
    tilde: Tuple[Tuple[Stabilizer, ...], ...]

    @property
    def n(self) -> int:
        return self.d * self.d

    @property
    def m(self) -> int:
        return self.n + 1

    @property
    def faces(self) -> Tuple[Stabilizer, ...]:
        return self.blue + tuple(s for column in self.red for s in column) + self.green

    @property
    def measured(self) -> Tuple[Stabilizer, ...]:
        return self.blue + tuple(s for column in self.tilde for s in column) + self.green

    def __len__(self) -> int:
        return len(self.blue) + sum(len(c) for c in self.red) + len(self.green)


def _check_distance(d: int) -> None:
    if d < 3 or d % 2 == 0:
        raise InvalidArgument(f"Surface-code distance must be odd and >= 3, got {d}.")


def qubit_position(q: int, d: int) -> Tuple[int, int]:
    """(line, position) of data qubit q; lines are numbered in boustrophedon order."""
    line, offset = divmod(q - 1, d)
    position = offset + 1 if line % 2 == 0 else d - offset
    return line + 1, position


def _red_kind(i: int) -> StabilizerType:
    return StabilizerType.Z if i % 2 else StabilizerType.Y


def _face(color: FaceColor, column: int, index: int, kind: StabilizerType, qubits: Sequence[int],
          m: int) -> Stabilizer:
    qubits = tuple(sorted(qubits))
    pauli = PauliString.from_letters({q: kind.value for q in qubits}, m)
    bilinear = as_bilinear(pauli) if len(qubits) == 2 else None
    return Stabilizer(color, column, index, kind, qubits, pauli, bilinear)


def red_qubits(d: int, column: int, i: int) -> Tuple[int, ...]:
    base = d * (column - 1)
    return base + i, base + i + 1, d * (column + 1) + 1 - i, d * (column + 1) - i


def blue_qubits(d: int, r: int) -> Tuple[int, ...]:
    if r % 2:
        return r, r + 1
    return d * (d - 1) + r, d * (d - 1) + r + 1


@lru_cache(maxsize=8)
def build_stabilizers(d: int) -> StabilizerSet:
    """
    Blue faces on the first and last line, red and green faces per column, and
    the quadratic tilde operators t_i = (prod_{j >= i} red_j) green of each column.
    """
    _check_distance(d)
    m = d * d + 1
    blue = tuple(_face(FaceColor.BLUE, 0, r, StabilizerType.Y, blue_qubits(d, r), m) for r in range(1, d))
    green = tuple(_face(FaceColor.GREEN, c, 0, StabilizerType.Z, (d * c, d * c + 1), m) for c in range(1, d))
    red: List[Tuple[Stabilizer, ...]] = []
    tilde: List[Tuple[Stabilizer, ...]] = []
    for c in range(1, d):
        column = tuple(_face(FaceColor.RED, c, i, _red_kind(i), red_qubits(d, c, i), m) for i in range(1, d))
        red.append(column)
        tilde_column = []
        for i in range(1, d):
            product = green[c - 1].pauli
            for face in reversed(column[i - 1:]):
                product = face.pauli * product
            qubits = tuple(sorted(product.letters()))
            tilde_column.append(Stabilizer(FaceColor.TILDE, c, i, _red_kind(i), qubits, product,
                                           as_bilinear(product)))
        tilde.append(tuple(tilde_column))
    layout = StabilizerSet(d, blue, tuple(red), green, tuple(tilde))
    log.debug(f"Built {len(layout)} stabilizers for d={d}.")
    return layout


def convert_syndromes(tilde_s: Sequence[int], s_g: int) -> np.ndarray:
    """Red syndromes of one column: s_i = t_i ^ t_{i+1}, and s_{d-1} = t_{d-1} ^ s_g."""
    t = np.asarray(tilde_s, dtype=np.uint8)
    if t.ndim != 1 or t.size == 0:
        raise InvalidArgument("convert_syndromes needs a non-empty bit vector.")
    shifted = np.append(t[1:], np.uint8(s_g & 1))
    return t ^ shifted


def tilde_syndromes(red_s: Sequence[int], s_g: int) -> np.ndarray:
    """Inverse of convert_syndromes: t_i = s_g ^ s_i ^ ... ^ s_{d-1}."""
    s = np.asarray(red_s, dtype=np.uint8)
    suffix = np.bitwise_xor.accumulate(s[::-1])[::-1]
    return suffix ^ np.uint8(s_g & 1)


def convert_round(layout: StabilizerSet, measured_bits: Sequence[int]) -> np.ndarray:
    """One round of bits in `measured` order to the same round in `faces` order."""
    bits = np.asarray(measured_bits, dtype=np.uint8)
    k = layout.d - 1
    if bits.shape != (len(layout),):
        raise InvalidArgument(f"Expected {len(layout)} syndrome bits, got shape {bits.shape}.")
    out = bits.copy()
    green = bits[k + k * k:]
    for c in range(k):
        start = k + c * k
        out[start:start + k] = convert_syndromes(bits[start:start + k], int(green[c]))
    return out


def logical_operators(d: int) -> Dict[str, PauliString]:
    """
    L_Z = Z_{n-d+1} X_{n-d+2..n}, L_Y = Y_d X_{d+1..n} and L_X = -i L_Y L_Z,
    on the n+1 qubits of the ancilla-extended system.
    """
    _check_distance(d)
    n = d * d
    m = n + 1
    L_Z = PauliString.from_letters({n - d + 1: "Z", **{q: "X" for q in range(n - d + 2, n + 1)}}, m)
    L_Y = PauliString.from_letters({d: "Y", **{q: "X" for q in range(d + 1, n + 1)}}, m)
    L_X = (L_Y * L_Z).scaled(3)
    return {"Z": L_Z, "Y": L_Y, "X": L_X}


def layout_table(d: int) -> str:
    """The qubit numbering grid and every face with its type, qubits and bilinear."""
    layout = build_stabilizers(d)
    grid = np.zeros((d, d), dtype=int)
    for q in range(1, layout.n + 1):
        line, position = qubit_position(q, d)
        grid[line - 1, position - 1] = q
    width = len(str(layout.n))
    lines = [f"# surface code d={d}: n={layout.n} data qubits, ancilla {layout.m}"]
    lines += [" ".join(f"{q:>{width}}" for q in row) for row in grid]
    for face in layout.faces + tuple(s for column in layout.tilde for s in column):
        bilinear = "-" if face.bilinear is None else f"{face.bilinear[2]:+d}(-i c{face.bilinear[0]} c{face.bilinear[1]})"
        lines.append(f"{face.label:>6} {face.kind.value} {str(face.pauli):<40} {bilinear}")
    return "\n".join(lines) + "\n"
