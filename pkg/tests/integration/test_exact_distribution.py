# coherent_qec/tests/integration/test_exact_distribution.py

import math
import unittest

import numpy as np

from coherent_qec.Errors import InvalidArgument
from coherent_qec.Fermion.KrausCatalog import NoiseModel
from coherent_qec.Oracle.DenseOracle import MAX_BRANCHES, count_branches, enumerate_distribution
from coherent_qec.Repetition.CircuitSchedule import CircuitConfig, NoiseAllocation, build_schedule
from coherent_qec.Repetition.TrajectorySampler import estimate_logical_error, sample_trajectory


class TestExactDistribution(unittest.TestCase):
    """
    Integration test: the full outcome tree of a tiny code against the
    Monte-Carlo estimator built on the Gaussian sampler.
    """

    def _config(self, c: float) -> CircuitConfig:
        return CircuitConfig(model=NoiseAllocation.PHENOMENOLOGICAL, n=3, T=1, noise=NoiseModel(p=0.1, c=c))

    def test_01_probabilities_sum_to_one(self):
        """Test (Exact): Verifies that the leaf probabilities of the outcome tree add up to 1."""
        for c in (0.0, 0.5, 1.0):
            with self.subTest(c=c):
                exact = enumerate_distribution(build_schedule(self._config(c)))
                self.assertAlmostEqual(exact.total_probability, 1.0, places=9)
                self.assertAlmostEqual(sum(exact.syndrome_probabilities.values()), 1.0, places=9)
                self.assertGreater(exact.p_L, 0.0)
                self.assertLess(exact.p_L, 0.5)

    def test_02_monte_carlo_agrees_with_enumeration(self):
        """Test (Exact): Verifies that estimate_logical_error lies within 4 sigma of the exact p_L."""
        for c in (0.0, 1.0):
            with self.subTest(c=c):
                # --- Arrange ---
                config = self._config(c)
                exact = enumerate_distribution(build_schedule(config))
                # --- Act ---
                estimate = estimate_logical_error(config, samples=4000, seed=21)
                # --- Assert ---
                self.assertLess(abs(estimate.p_L - exact.p_L), 4 * estimate.stderr + 1e-3)

    def test_03_syndrome_frequencies(self):
        """Test (Exact): Verifies the sampled frequency of the all-zero syndrome grid."""
        config = self._config(0.5)
        schedule = build_schedule(config)
        exact = enumerate_distribution(schedule)
        zeros = np.zeros((2, 2), dtype=np.uint8)
        target = exact.probability_of(zeros)
        rng = np.random.default_rng(4)
        draws = 3000
        hits = sum(1 for _ in range(draws) if not sample_trajectory(schedule, rng).syndromes.any())
        sigma = math.sqrt(target * (1.0 - target) / draws)
        self.assertLess(abs(hits / draws - target), 5 * sigma + 1e-3)

    def test_04_tree_size_guard(self):
        """Test (Guard): Verifies that oversized outcome trees are refused."""
        config = CircuitConfig(model=NoiseAllocation.PHENOMENOLOGICAL, n=6, noise=NoiseModel(p=0.1, c=0.5))
        schedule = build_schedule(config)
        self.assertGreater(count_branches(schedule), MAX_BRANCHES)
        with self.assertRaises(InvalidArgument):
            enumerate_distribution(schedule)

    def test_05_tiny_error_rates_keep_their_failure_mass(self):
        """Test (Pruning): Verifies that p_L keeps one power law down to p = 1e-9, where failing leaves have norm ~1e-18."""
        # --- Arrange ---
        rates = (1e-9, 1e-8, 1e-7)
        # --- Act ---
        exact = [enumerate_distribution(build_schedule(
            CircuitConfig(model=NoiseAllocation.PHENOMENOLOGICAL, n=3, T=1, noise=NoiseModel(p=p, c=0.0))))
            for p in rates]
        # --- Assert ---
        for result in exact:
            self.assertAlmostEqual(result.total_probability, 1.0, places=9)
            self.assertGreater(result.p_L, 0.0)
        # A power law p_L = C p^k has the same ratio over each decade.
        self.assertAlmostEqual((exact[1].p_L / exact[0].p_L) / (exact[2].p_L / exact[1].p_L), 1.0, delta=1e-2)


if __name__ == '__main__':
    unittest.main(verbosity=2)
