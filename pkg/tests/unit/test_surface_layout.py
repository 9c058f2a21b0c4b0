# coherent_qec/tests/unit/test_surface_layout.py

import itertools
import unittest

import numpy as np

from coherent_qec.Errors import InvalidArgument
from coherent_qec.Fermion.JordanWigner import PauliString
from coherent_qec.Surface.SurfaceLayout import (FaceColor, StabilizerType, build_stabilizers, convert_round,
                                                convert_syndromes, layout_table, logical_operators, qubit_position,
                                                tilde_syndromes)


def _anticommutes(a: PauliString, b: PauliString) -> int:
    return 0 if a.commutes_with(b) else 1


class TestSurfaceLayout(unittest.TestCase):
    """
    Unit tests for the surface-code faces, their quadratic tilde replacements
    and the logical operators.
    """

    def setUp(self):
        self.rng = np.random.default_rng(77)

    def _random_error(self, m: int) -> PauliString:
        letters = {q: "IXYZ"[int(k)] for q, k in enumerate(self.rng.integers(0, 4, size=m - 1), start=1)}
        return PauliString.from_letters({q: l for q, l in letters.items() if l != "I"}, m)

    def test_01_distance_three_faces(self):
        """Test (Layout): Verifies the d = 3 faces, their colors and their Pauli types."""
        layout = build_stabilizers(3)
        self.assertEqual((layout.n, layout.m, len(layout)), (9, 10, 8))
        got = {(f.color, f.kind, f.qubits) for f in layout.faces}
        expected = {
            (FaceColor.BLUE, StabilizerType.Y, (1, 2)), (FaceColor.BLUE, StabilizerType.Y, (8, 9)),
            (FaceColor.RED, StabilizerType.Z, (1, 2, 5, 6)), (FaceColor.RED, StabilizerType.Z, (4, 5, 8, 9)),
            (FaceColor.RED, StabilizerType.Y, (2, 3, 4, 5)), (FaceColor.RED, StabilizerType.Y, (5, 6, 7, 8)),
            (FaceColor.GREEN, StabilizerType.Z, (3, 4)), (FaceColor.GREEN, StabilizerType.Z, (6, 7)),
        }
        self.assertEqual(got, expected)
        self.assertEqual([f.label for f in layout.faces], ["b1", "b2", "r1.1", "r1.2", "r2.1", "r2.2", "g1", "g2"])

    def test_02_stabilizers_and_logicals_commute(self):
        """Test (Algebra): Verifies that faces commute pairwise and with both logicals, which anticommute."""
        for d in (3, 5):
            with self.subTest(d=d):
                layout = build_stabilizers(d)
                ops = logical_operators(d)
                self.assertEqual(len(layout), d * d - 1)
                for a, b in itertools.combinations(layout.faces, 2):
                    self.assertTrue(a.pauli.commutes_with(b.pauli), f"{a.label} vs {b.label}")
                for face in layout.faces + layout.measured:
                    self.assertTrue(face.pauli.commutes_with(ops["Z"]), face.label)
                    self.assertTrue(face.pauli.commutes_with(ops["Y"]), face.label)
                self.assertFalse(ops["Z"].commutes_with(ops["Y"]))
                self.assertTrue(ops["X"].is_hermitian())

    def test_03_measured_operators_are_quadratic(self):
        """Test (Tilde): Verifies that every measured operator is a Majorana bilinear while red faces are not."""
        layout = build_stabilizers(5)
        self.assertTrue(all(f.bilinear is not None for f in layout.measured))
        self.assertTrue(all(f.bilinear is None for column in layout.red for f in column))
        for column in layout.tilde:
            for face in column:
                self.assertEqual(face.color, FaceColor.TILDE)
                self.assertEqual(face.pauli.x[-1] + face.pauli.z[-1], 0)

    def test_04_syndrome_conversion(self):
        """Test (Conversion): Verifies s_i = t_i ^ t_{i+1} with the green outcome closing the column."""
        np.testing.assert_array_equal(convert_syndromes([1, 0], 1), [1, 1])
        np.testing.assert_array_equal(convert_syndromes([0, 1, 1, 0], 0), [1, 0, 1, 0])
        bits = np.array([1, 0, 0, 1])
        np.testing.assert_array_equal(convert_syndromes(tilde_syndromes(bits, 1), 1), bits)
        with self.assertRaises(InvalidArgument):
            convert_syndromes([], 0)

    def test_05_converted_round_equals_direct_face_syndromes(self):
        """Test (Conversion): Verifies that converting tilde outcomes of an error reproduces its face syndromes."""
        for d in (3, 5):
            layout = build_stabilizers(d)
            for trial in range(20):
                with self.subTest(d=d, trial=trial):
                    error = self._random_error(layout.m)
                    measured = [_anticommutes(f.pauli, error) for f in layout.measured]
                    direct = [_anticommutes(f.pauli, error) for f in layout.faces]
                    np.testing.assert_array_equal(convert_round(layout, measured), direct)
        with self.assertRaises(InvalidArgument):
            convert_round(build_stabilizers(3), [0] * 7)

    def test_06_layout_table(self):
        """Test (Table): Verifies the boustrophedon numbering grid and one row per operator."""
        lines = layout_table(3).splitlines()
        self.assertEqual(lines[0], "# surface code d=3: n=9 data qubits, ancilla 10")
        self.assertEqual(lines[1:4], ["1 2 3", "6 5 4", "7 8 9"])
        self.assertEqual(len(lines), 4 + 8 + 4)
        self.assertEqual(qubit_position(4, 3), (2, 3))

    def test_07_invalid_distance(self):
        """Test (Validation): Verifies that even or too small distances are rejected."""
        for d in (1, 2, 4):
            with self.subTest(d=d):
                with self.assertRaises(InvalidArgument):
                    build_stabilizers(d)
                with self.assertRaises(InvalidArgument):
                    logical_operators(d)


if __name__ == '__main__':
    unittest.main(verbosity=2)
