# coherent_qec/tests/unit/test_threshold_fit.py

import unittest

import numpy as np
import pandas as pd

from coherent_qec.Analysis.ThresholdFit import (COHERENCE_ALPHA, ansatz_deviation, ansatz_threshold, decay_prediction,
                                                decay_rate, fit_threshold, scaling_ansatz)
from coherent_qec.Errors import FitDiverged, InvalidArgument


def _synthetic_sweep(a=0.2, b=1.5, p_th=0.1, nu_inv=0.7, sigma=1e-3, seed=5) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    rows = []
    for n in (5, 7, 9, 11):
        for p in np.linspace(0.07, 0.13, 7):
            y = float(scaling_ansatz((p, n), a, b, p_th, nu_inv)) + rng.normal(scale=sigma)
            rows.append({"p": p, "n": n, "p_L": y, "stderr": sigma})
    return pd.DataFrame(rows)


class TestThresholdFit(unittest.TestCase):
    """Unit tests for the finite-size scaling fit and the sub-threshold helpers."""

    def test_01_recovers_synthetic_parameters(self):
        """Test (Fit): Verifies that a noisy synthetic sweep returns the generating threshold and exponent."""
        # --- Arrange ---
        frame = _synthetic_sweep()
        # --- Act ---
        fit = fit_threshold(frame, window=0.3, bootstrap=10)
        # --- Assert ---
        self.assertAlmostEqual(fit.p_th, 0.1, delta=2e-3)
        self.assertAlmostEqual(fit.nu_inv, 0.7, delta=0.1)
        self.assertAlmostEqual(fit.a, 0.2, delta=5e-3)
        self.assertAlmostEqual(fit.d, 1.0 / fit.nu_inv)
        self.assertEqual(fit.rows_used, len(frame))
        self.assertGreater(fit.bootstrap_used, 0)
        self.assertGreaterEqual(fit.p_th_err, fit.p_th_err_curvature)
        self.assertLess(fit.residual, 5.0)

    def test_02_row_order_does_not_matter(self):
        """Test (Fit): Verifies that shuffling the sweep rows leaves the fit unchanged."""
        frame = _synthetic_sweep()
        shuffled = frame.sample(frac=1.0, random_state=3)
        a = fit_threshold(frame, bootstrap=4)
        b = fit_threshold(shuffled, bootstrap=4)
        np.testing.assert_allclose([a.p_th, a.p_th_err_bootstrap], [b.p_th, b.p_th_err_bootstrap],
                                   rtol=1e-9, equal_nan=True)

    def test_03_curves_without_a_crossing_diverge(self):
        """Test (Divergence): Verifies that n-independent data raise FitDiverged with diagnostics."""
        rows = [(p, n, 0.5 - p, 0.01) for n in (5, 7, 9) for p in (0.05, 0.1, 0.15, 0.2)]
        with self.assertRaises(FitDiverged) as ctx:
            fit_threshold(rows, bootstrap=0)
        self.assertIsInstance(ctx.exception.diagnostics, dict)

    def test_04_too_few_points(self):
        """Test (Validation): Verifies that fewer than three distinct p or n values are rejected."""
        rows = [(p, n, 0.1, 0.01) for n in (5, 7) for p in (0.05, 0.1, 0.15)]
        with self.assertRaises(InvalidArgument):
            fit_threshold(rows)
        with self.assertRaises(InvalidArgument):
            fit_threshold(pd.DataFrame({"p": [0.1], "n": [3]}))

    def test_05_decay_helpers(self):
        """Test (Decay): Verifies lambda = p_L(d+2)/p_L(d), its prediction p/p_th and the argument checks."""
        self.assertAlmostEqual(decay_rate(0.02, 0.005), 0.25)
        self.assertAlmostEqual(decay_prediction(0.05, 0.1), 0.5)
        with self.assertRaises(InvalidArgument):
            decay_rate(0.0, 0.01)
        with self.assertRaises(InvalidArgument):
            decay_prediction(0.05, 0.0)

    def test_06_coherence_ansatz(self):
        """Test (Ansatz): Verifies p_th(c) = p_th(0)/(1 + alpha c^2) and the relative deviation table."""
        self.assertAlmostEqual(COHERENCE_ALPHA, 11.0 / 6.0)
        self.assertAlmostEqual(ansatz_threshold(0.1, 0.0), 0.1)
        self.assertAlmostEqual(ansatz_threshold(0.1, 1.0), 0.6 / 17.0)
        table = ansatz_deviation([(0.0, 0.1), (1.0, 0.6 / 17.0 * 1.1)], 0.1)
        np.testing.assert_allclose(table["relative_deviation"], [0.0, 0.1], atol=1e-12)
        with self.assertRaises(InvalidArgument):
            ansatz_threshold(0.1, 1.5)

    def test_07_uniform_stderr_rescale_keeps_the_estimate(self):
        """Test (Fit): Verifies that multiplying every stderr by a constant leaves p_th and the exponent unchanged."""
        # --- Arrange ---
        frame = _synthetic_sweep()
        base = fit_threshold(frame, bootstrap=6)
        for scale in (0.25, 4.0):
            with self.subTest(scale=scale):
                scaled = frame.assign(stderr=frame["stderr"] * scale)
                # --- Act ---
                fit = fit_threshold(scaled, bootstrap=6)
                # --- Assert ---
                self.assertAlmostEqual(fit.p_th, base.p_th, places=9)
                self.assertAlmostEqual(fit.nu_inv, base.nu_inv, places=7)
                self.assertEqual(fit.rows_used, base.rows_used)
                np.testing.assert_allclose(fit.p_th_err_bootstrap, base.p_th_err_bootstrap, rtol=1e-7, equal_nan=True)
                self.assertAlmostEqual(fit.p_th_err_curvature / base.p_th_err_curvature, scale, places=6)


if __name__ == '__main__':
    unittest.main(verbosity=2)
