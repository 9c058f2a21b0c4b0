# coherent_qec/tests/unit/test_gaussian_state.py

import math
import unittest

import numpy as np

from coherent_qec.Errors import InvalidArgument, ZeroProbabilityOutcome
from coherent_qec.Fermion.GaussianState import (GaussianOp, GaussianState, UpdatePath, apply_fgo, bilinear_expectation,
                                                branch_log_weight, make_ghz_plus, normalized, overlap_sq, purify,
                                                validate_state)
from coherent_qec.Fermion.JordanWigner import PauliString
from coherent_qec.Fermion.KrausCatalog import noise_fgo, parity_fgo, pauli_fgo
from coherent_qec.Oracle.DenseOracle import (apply_operator_dense, apply_pauli_dense, covariance_dense, gamma_dense,
                                             ghz_plus_dense, projector_matrix, rotation_matrix)


class TestGaussianState(unittest.TestCase):
    """
    Unit tests for the covariance-matrix update. The dense oracle is the
    reference: every Gaussian result is compared with the literal operator
    applied to the explicit state vector.
    """

    def _x(self, i: int, m: int) -> PauliString:
        return PauliString.from_letters({i: "X"}, m)

    def _zz(self, i: int, m: int) -> PauliString:
        return PauliString.from_letters({i: "Z", i + 1: "Z"}, m)

    def test_01_ghz_covariance_matches_dense(self):
        """Test (Initial State): Verifies that make_ghz_plus equals the dense GHZ+ covariance for m = 2..5."""
        for m in range(2, 6):
            with self.subTest(m=m):
                state = make_ghz_plus(m)
                np.testing.assert_allclose(state.M, covariance_dense(ghz_plus_dense(m)), atol=1e-12)
                self.assertEqual(state.log_gamma, 0.0)
                diagnostics = validate_state(state)
                self.assertLess(diagnostics.purity_violation, 1e-12)
                self.assertLess(diagnostics.antisymmetry_violation, 1e-12)

    def test_02_noise_and_parity_sequence_matches_dense(self):
        """Test (Update): Verifies M and Gamma against the dense oracle along a mixed sequence, on both paths."""
        m = 4
        steps = [
            ("noise", 1, 0.31, 0.6, 0),
            ("parity", 1, 0.0, 1.0, 0),
            ("noise", 2, -0.2, 0.4, 0),
            ("parity", 2, 0.17, 0.8, 1),
            ("noise", 3, 0.5, 1.0, 0),
            ("parity", 1, 0.0, 1.0, 1),
        ]
        for path in UpdatePath:
            with self.subTest(path=path.value):
                # --- Arrange ---
                state = make_ghz_plus(m)
                dense = ghz_plus_dense(m)
                for kind, i, phi, weight, s in steps:
                    # --- Act ---
                    if kind == "noise":
                        op = noise_fgo(i, phi, weight, m)
                        dense = apply_operator_dense(dense, rotation_matrix(self._x(i, m), phi, weight))
                    else:
                        op = parity_fgo(i, s, phi, weight, m)
                        dense = apply_operator_dense(dense, projector_matrix(self._zz(i, m), s, phi, weight))
                    state = apply_fgo(state, op, path)
                    # --- Assert ---
                    self.assertAlmostEqual(state.gamma / gamma_dense(dense), 1.0, places=10)
                    np.testing.assert_allclose(state.M, covariance_dense(dense), atol=1e-10)

    def test_03_branch_log_weight_predicts_the_norm(self):
        """Test (Branch Weight): Verifies that branch_log_weight equals the log-norm change of apply_fgo."""
        m = 3
        state = apply_fgo(make_ghz_plus(m), noise_fgo(2, 0.4, 1.0, m))
        for path in UpdatePath:
            for s in (0, 1):
                with self.subTest(path=path.value, s=s):
                    op = parity_fgo(1, s, 0.1, 0.7, m)
                    predicted = branch_log_weight(state, op, path)
                    applied = apply_fgo(state, op, path)
                    self.assertAlmostEqual(predicted, applied.log_gamma - state.log_gamma, places=10)

    def test_04_zero_probability_branch(self):
        """Test (Zero Probability): Verifies that projecting GHZ+ onto ZZ = -1 raises and prices at -inf."""
        m = 3
        state = make_ghz_plus(m)
        op = parity_fgo(1, 1, 0.0, 1.0, m)
        for path in UpdatePath:
            with self.subTest(path=path.value):
                self.assertEqual(branch_log_weight(state, op, path), -math.inf)
                with self.assertRaises(ZeroProbabilityOutcome):
                    apply_fgo(state, op, path)

    def test_05_fast_and_naive_paths_agree(self):
        """Test (Update Paths): Verifies that the low-rank path and the LU path give the same state."""
        rng = np.random.default_rng(7)
        m = 6
        fast = naive = make_ghz_plus(m)
        for _ in range(30):
            if rng.random() < 0.5:
                op = noise_fgo(int(rng.integers(1, m)), float(rng.normal()), 1.0, m)
            else:
                i = int(rng.integers(1, m - 1))
                op = parity_fgo(i, 0, float(rng.normal(scale=0.2)), 1.0, m)
                if branch_log_weight(fast, op) == -math.inf:
                    op = parity_fgo(i, 1, 0.0, 1.0, m)
            fast = apply_fgo(fast, op, UpdatePath.FAST)
            naive = apply_fgo(naive, op, UpdatePath.NAIVE)
        np.testing.assert_allclose(fast.M, naive.M, atol=1e-10)
        self.assertAlmostEqual(fast.log_gamma, naive.log_gamma, places=9)

    def test_06_pauli_conjugation_matches_dense(self):
        """Test (Pauli): Verifies that an even Pauli string acts on M like the dense operator."""
        m = 4
        pauli = PauliString.from_letters({1: "Y", 4: "Z"}, m)
        rotated = apply_fgo(make_ghz_plus(m), noise_fgo(2, 0.3, 1.0, m))
        dense = apply_operator_dense(ghz_plus_dense(m), rotation_matrix(self._x(2, m), 0.3))
        expected = covariance_dense(apply_pauli_dense(dense, pauli))
        np.testing.assert_allclose(apply_fgo(rotated, pauli_fgo(pauli)).M, expected, atol=1e-12)

    def test_07_overlap_matches_dense(self):
        """Test (Overlap): Verifies |<psi_1|psi_2>|^2 for a rotated GHZ state and the self-overlap of 1."""
        m = 3
        ghz = make_ghz_plus(m)
        phi = 0.37
        rotated = apply_fgo(ghz, noise_fgo(1, phi, 1.0, m))
        dense_a = ghz_plus_dense(m)
        dense_b = apply_operator_dense(dense_a, rotation_matrix(self._x(1, m), phi))
        expected = abs(np.vdot(dense_a.amplitudes, dense_b.amplitudes)) ** 2
        self.assertAlmostEqual(overlap_sq(ghz, rotated), expected, places=10)
        self.assertAlmostEqual(overlap_sq(ghz, ghz), 1.0, places=12)

    def test_08_purify_restores_orthogonality(self):
        """Test (Purification): Verifies that a drifted covariance is pulled back to MM^T = I."""
        rng = np.random.default_rng(3)
        state = apply_fgo(make_ghz_plus(4), noise_fgo(2, 0.2, 1.0, 4))
        noise = rng.normal(scale=1e-7, size=state.M.shape)
        drifted = GaussianState(state.M + (noise - noise.T), state.log_gamma)
        self.assertGreater(validate_state(drifted).purity_violation, 1e-9)
        repaired = purify(drifted)
        self.assertLess(validate_state(repaired).purity_violation, 1e-12)
        self.assertLess(validate_state(repaired).antisymmetry_violation, 1e-12)
        np.testing.assert_allclose(repaired.M, state.M, atol=1e-6)
        self.assertEqual(repaired.log_gamma, state.log_gamma)

    def test_09_expectation_and_validation(self):
        """Test (Readout): Verifies bilinear_expectation, normalized and the argument checks."""
        m = 3
        state = make_ghz_plus(m)
        # <Z_1 Z_2> = <-i c_3 c_2> = +1 on GHZ+
        self.assertAlmostEqual(bilinear_expectation(state, 3, 2), 1.0)
        with self.assertRaises(InvalidArgument):
            bilinear_expectation(state, 2, 2)
        with self.assertRaises(InvalidArgument):
            bilinear_expectation(state, 1, 7)
        with self.assertRaises(InvalidArgument):
            GaussianState(np.zeros((3, 3)))
        with self.assertRaises(InvalidArgument):
            apply_fgo(state, noise_fgo(1, 0.1, 1.0, 4))
        projected = apply_fgo(state, parity_fgo(1, 0, 0.3, 1.0, m))
        self.assertEqual(normalized(projected).log_gamma, 0.0)
        np.testing.assert_array_equal(normalized(projected).M, projected.M)

    def test_10_descriptors_store_only_their_support(self):
        """Test (Descriptors): Verifies k x k support blocks, slice indexing and untouched rows outside the support."""
        # --- Arrange ---
        m = 5
        parity = parity_fgo(2, 0, 0.1, 1.0, m)
        pauli = pauli_fgo(PauliString.from_letters({1: "Y", 4: "Z"}, m))
        state = apply_fgo(make_ghz_plus(m), noise_fgo(3, 0.25, 1.0, m))
        # --- Assert ---
        self.assertEqual(parity.support, (4, 5))
        self.assertEqual(parity.index, slice(3, 5))
        for block in (parity.a, parity.b, parity.d):
            self.assertEqual(block.shape, (2, 2))
        np.testing.assert_array_equal(np.delete(np.delete(parity.B, [3, 4], 0), [3, 4], 1), np.eye(2 * m - 2))
        self.assertIsInstance(pauli.index, np.ndarray)
        self.assertFalse(pauli.projective)
        for op in (parity, pauli):
            with self.subTest(support=op.support):
                np.testing.assert_allclose(apply_fgo(state, op, UpdatePath.FAST).M,
                                           apply_fgo(state, op, UpdatePath.NAIVE).M, atol=1e-12)
        rotated = apply_fgo(state, noise_fgo(1, 0.3, 1.0, m), UpdatePath.FAST)
        outside = np.delete(np.delete(rotated.M, [0, 1], 0), [0, 1], 1)
        np.testing.assert_array_equal(outside, np.delete(np.delete(state.M, [0, 1], 0), [0, 1], 1))
        with self.assertRaises(InvalidArgument):
            GaussianOp(m, (3, 2), np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)), 0.0)
        with self.assertRaises(InvalidArgument):
            GaussianOp(m, (1, 2), np.zeros((3, 3)), np.eye(2), np.zeros((2, 2)), 0.0)


if __name__ == '__main__':
    unittest.main(verbosity=2)
