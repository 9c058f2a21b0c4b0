# coherent_qec/Fermion/JordanWigner.py

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from coherent_qec.Errors import InvalidArgument

log = logging.getLogger(__name__)

# Letter -> (x bit, z bit, power of i) with Y = i X Z.
_LETTERS = {"I": (0, 0, 0), "X": (1, 0, 0), "Z": (0, 1, 0), "Y": (1, 1, 1)}
_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


@dataclass(frozen=True)
class PauliString:
    """
    A Pauli string i^phase * prod_j X_j^{x_j} Z_j^{z_j} on qubits 1..m.

    Stored in binary-symplectic form. Qubit j lives at array position j-1.
    """

    x: Tuple[int, ...]
    z: Tuple[int, ...]
    phase: int = 0

    @classmethod
    def from_letters(cls, letters: Mapping[int, str], m: int, sign: int = 1) -> "PauliString":
        """Builds a string from {qubit: letter} with 1-based qubits and an overall sign of +1 or -1."""
        x = [0] * m
        z = [0] * m
        phase = 0 if sign > 0 else 2
        for qubit, letter in letters.items():
            if not 1 <= qubit <= m:
                raise InvalidArgument(f"Qubit {qubit} outside 1..{m}.")
            if letter not in _LETTERS:
                raise InvalidArgument(f"Unknown Pauli letter '{letter}'.")
            xb, zb, ph = _LETTERS[letter]
            x[qubit - 1], z[qubit - 1] = xb, zb
            phase += ph
        return cls(tuple(x), tuple(z), phase % 4)

    @property
    def m(self) -> int:
        return len(self.x)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.m != other.m:
            raise InvalidArgument("Pauli strings act on different qubit counts.")
        xa, za = np.asarray(self.x), np.asarray(self.z)
        xb, zb = np.asarray(other.x), np.asarray(other.z)
        # Z^{z_a} X^{x_b} = (-1)^{z_a . x_b} X^{x_b} Z^{z_a}
        swaps = int(np.dot(za, xb)) % 2
        phase = (self.phase + other.phase + 2 * swaps) % 4
        return PauliString(tuple(int(v) for v in xa ^ xb), tuple(int(v) for v in za ^ zb), phase)

    def commutes_with(self, other: "PauliString") -> bool:
        xa, za = np.asarray(self.x), np.asarray(self.z)
        xb, zb = np.asarray(other.x), np.asarray(other.z)
        return (int(np.dot(xa, zb)) + int(np.dot(za, xb))) % 2 == 0

    def scaled(self, power_of_i: int) -> "PauliString":
        return PauliString(self.x, self.z, (self.phase + power_of_i) % 4)

    def letters(self) -> Dict[int, str]:
        """Non-identity letters keyed by 1-based qubit. The phase is not included."""
        table = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        return {j + 1: table[(xb, zb)] for j, (xb, zb) in enumerate(zip(self.x, self.z)) if xb or zb}

    def sign(self) -> complex:
        """Coefficient c such that this string equals c times the product of its plain letters."""
        n_y = sum(1 for xb, zb in zip(self.x, self.z) if xb and zb)
        return _PHASES[(self.phase - n_y) % 4]

    def is_hermitian(self) -> bool:
        return self.sign().imag == 0.0

    def weight(self) -> int:
        return sum(1 for xb, zb in zip(self.x, self.z) if xb or zb)

    def to_dense(self) -> np.ndarray:
        """Dense 2^m x 2^m matrix, little-endian: qubit 1 is the lowest bit."""
        x_mat = np.array([[0, 1], [1, 0]], dtype=complex)
        z_mat = np.array([[1, 0], [0, -1]], dtype=complex)
        out = np.array([[_PHASES[self.phase]]], dtype=complex)
        for j in reversed(range(self.m)):
            local = np.eye(2, dtype=complex)
            if self.x[j]:
                local = local @ x_mat
            if self.z[j]:
                local = local @ z_mat
            out = np.kron(out, local)
        return out

    def __str__(self) -> str:
        body = " ".join(f"{letter}{q}" for q, letter in sorted(self.letters().items())) or "I"
        sign = self.sign()
        prefix = {1: "+", -1: "-"}.get(int(sign.real), "+i" if sign.imag > 0 else "-i")
        return f"{prefix}{body}"


@lru_cache(maxsize=64)
def majorana(k: int, m: int) -> PauliString:
    """
    Majorana operator c_k on m qubits.

    c_{2i-1} = (prod_{j<i} X_j) Z_i and c_{2i} = (prod_{j<i} X_j) Y_i.
    """
    if not 1 <= k <= 2 * m:
        raise InvalidArgument(f"Majorana index {k} outside 1..{2 * m}.")
    i = (k + 1) // 2
    letters = {j: "X" for j in range(1, i)}
    letters[i] = "Z" if k % 2 == 1 else "Y"
    return PauliString.from_letters(letters, m)


@lru_cache(maxsize=16)
def _majorana_lookup(m: int) -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], int]:
    return {(majorana(k, m).x, majorana(k, m).z): k for k in range(1, 2 * m + 1)}


def as_bilinear(pauli: PauliString) -> Tuple[int, int, int]:
    """
    Writes a Hermitian Pauli string as sigma * (-i c_a c_b) with a < b.

    Returns (a, b, sigma) with 1-based Majorana indices. Raises InvalidArgument
    when the string is not quadratic in Majorana operators.
    """
    m = pauli.m
    lookup = _majorana_lookup(m)
    target_x = np.asarray(pauli.x)
    target_z = np.asarray(pauli.z)
    for a in range(1, 2 * m + 1):
        ca = majorana(a, m)
        key = (tuple(int(v) for v in target_x ^ np.asarray(ca.x)),
               tuple(int(v) for v in target_z ^ np.asarray(ca.z)))
        b = lookup.get(key)
        if b is None or b <= a:
            continue
        product = ca * majorana(b, m)
        # pauli = i^(p - q) * (c_a c_b), and -i c_a c_b = i^3 (c_a c_b)
        sigma = _PHASES[(pauli.phase - product.phase - 3) % 4]
        if sigma.imag != 0.0:
            raise InvalidArgument(f"Pauli string {pauli} is not Hermitian.")
        return a, b, int(sigma.real)
    raise InvalidArgument(f"Pauli string {pauli} is not quadratic in Majorana operators.")


def bilinear_pauli(a: int, b: int, m: int) -> PauliString:
    """The Pauli string of -i c_a c_b."""
    if a == b:
        raise InvalidArgument("A bilinear needs two distinct Majorana indices.")
    return (majorana(a, m) * majorana(b, m)).scaled(3)


def conjugation_signs(pauli: PauliString) -> np.ndarray:
    """Vector s with P c_k P^dagger = s_k c_k for k = 1..2m."""
    m = pauli.m
    return np.array([1.0 if pauli.commutes_with(majorana(k, m)) else -1.0 for k in range(1, 2 * m + 1)])


def pauli_from_qubits(qubits: Iterable[int], letter: str, m: int) -> PauliString:
    return PauliString.from_letters({q: letter for q in qubits}, m)
