# coherent_qec/tests/e2e/test_cli_smoke.py

import json
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

import run_experiment
from coherent_qec.Analysis.ThresholdFit import scaling_ansatz

REPO_ROOT = Path(__file__).resolve().parents[2]
SMOKE = REPO_ROOT / "experiments" / "smoke.yaml"


class TestCliSmoke(unittest.TestCase):
    """
    End-to-end test: every command driven through run_experiment.main on the
    seconds-scale smoke experiment, checking exit codes, output schemas and
    reproducibility.
    """

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())
        self.settings = self.test_dir / "config.json"
        self.settings.write_text(json.dumps({"run": {"progress": False, "bootstrap": 5}, "logging": {"level": "WARNING"}}))

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def _run(self, command: str, out: str, *extra: str, config: Path = SMOKE) -> int:
        argv = [command, "--config", str(config), "--out", str(self.test_dir / out),
                "--settings", str(self.settings), "--no-progress", *extra]
        return run_experiment.main(argv)

    def test_01_pl_sweep(self):
        """Test (pl-sweep): Verifies the CSV schema, provenance columns and p_L = 0 at p = 0."""
        self.assertEqual(self._run("pl-sweep", "sweep.csv"), 0)
        frame = pd.read_csv(self.test_dir / "sweep.csv")
        self.assertEqual(list(frame.columns), ["model", "c", "p", "n", "T", "samples", "p_L", "stderr", "degenerate",
                                               "degenerate_exceeded", "seed", "config_hash"])
        self.assertFalse(frame["degenerate_exceeded"].any())
        self.assertEqual(len(frame), 4)
        self.assertTrue((frame.loc[frame["p"] == 0.0, "p_L"] == 0.0).all())
        self.assertTrue((frame["seed"] == 7).all())
        self.assertEqual(frame["config_hash"].nunique(), 1)

    def test_02_rerun_is_byte_identical(self):
        """Test (Determinism): Verifies identical bytes on rerun and across worker counts."""
        self.assertEqual(self._run("pl-sweep", "a.csv"), 0)
        self.assertEqual(self._run("pl-sweep", "b.csv"), 0)
        self.assertEqual(self._run("pl-sweep", "c.csv", "--workers", "2"), 0)
        first = (self.test_dir / "a.csv").read_bytes()
        self.assertEqual(first, (self.test_dir / "b.csv").read_bytes())
        self.assertEqual(first, (self.test_dir / "c.csv").read_bytes())

    def test_03_seed_override_changes_provenance(self):
        """Test (Seed): Verifies that --seed is recorded in every row."""
        self.assertEqual(self._run("pl-sweep", "s.csv", "--seed", "99"), 0)
        self.assertTrue((pd.read_csv(self.test_dir / "s.csv")["seed"] == 99).all())

    def test_04_threshold_from_existing_sweep(self):
        """Test (threshold): Verifies that --sweep-csv is fitted and reported as JSON."""
        # --- Arrange ---
        rows = []
        for n in (5, 7, 9, 11):
            for p in np.linspace(0.07, 0.13, 7):
                p_L = float(scaling_ansatz((p, n), 0.2, 1.5, 0.1, 0.7))
                rows.append(dict(model="phenomenological", c=0.0, p=p, n=n, T=n - 1, samples=1000, p_L=p_L,
                                 stderr=1e-3, degenerate=0))
        sweep = self.test_dir / "synthetic.csv"
        pd.DataFrame(rows).to_csv(sweep, index=False)
        # --- Act ---
        code = self._run("threshold", "fit.json", "--sweep-csv", str(sweep))
        # --- Assert ---
        self.assertEqual(code, 0)
        report = json.loads((self.test_dir / "fit.json").read_text())
        self.assertEqual(len(report["fits"]), 1)
        fit = report["fits"][0]
        self.assertAlmostEqual(fit["p_th"], 0.1, delta=1e-3)
        self.assertAlmostEqual(fit["ansatz_relative_deviation"], 0.0, places=9)
        self.assertEqual(report["seed"], 7)

    def test_05_peff(self):
        """Test (peff): Verifies the p_eff CSV and the sibling slope report."""
        self.assertEqual(self._run("peff", "peff.csv"), 0)
        frame = pd.read_csv(self.test_dir / "peff.csv")
        self.assertEqual(len(frame), 2)
        self.assertEqual(frame.loc[frame["p"] == 0.0, "p_eff"].iloc[0], 0.0)
        slopes = json.loads((self.test_dir / "peff.slopes.json").read_text())["slopes"]
        self.assertEqual(len(slopes), 1)
        self.assertAlmostEqual(slopes[0]["leading_order"], 8.0 / 3.0)

    def test_06_decay(self):
        """Test (decay): Verifies one lambda row per d with d + 2 in the grid."""
        self.assertEqual(self._run("decay", "decay.csv"), 0)
        frame = pd.read_csv(self.test_dir / "decay.csv")
        self.assertEqual(frame["d"].tolist(), [3])
        self.assertAlmostEqual(frame["prediction"].iloc[0], 0.05 / 0.1034)
        self.assertIn("lambda", frame.columns)

    def test_07_surface(self):
        """Test (surface): Verifies the density-matrix report of a noiseless d = 3 run."""
        self.assertEqual(self._run("surface", "surface.json"), 0)
        runs = json.loads((self.test_dir / "surface.json").read_text())["runs"]
        self.assertEqual(len(runs), 1)
        self.assertAlmostEqual(runs[0]["F"], 1.0, places=9)
        self.assertEqual(np.array(runs[0]["rho_real"]).shape, (4, 4))
        self.assertEqual(set(runs[0]["coefficients"]), {"II", "XX", "XI", "IX", "YY", "YZ", "ZY", "ZZ"})

    def test_08_bench(self):
        """Test (bench): Verifies the timing report fields."""
        self.assertEqual(self._run("bench", "bench.json"), 0)
        report = json.loads((self.test_dir / "bench.json").read_text())
        for key in ("mean_ms", "p50_ms", "p90_ms", "p99_ms", "naive_mean_ms", "naive_over_fast", "update_fast_us",
                    "update_naive_us", "update_naive_over_fast"):
            self.assertGreater(report[key], 0.0, key)
        self.assertEqual([s["workers"] for s in report["scaling"]], [1])

    def test_09_configuration_errors_exit_with_two(self):
        """Test (Exit Codes): Verifies exit code 2 for unreadable files and missing sections."""
        self.assertEqual(self._run("pl-sweep", "x.csv", config=self.test_dir / "absent.yaml"), 2)
        partial = self.test_dir / "partial.yaml"
        partial.write_text(yaml.safe_dump({"seed": 1, "sweep": {"p_values": [0.1], "n_values": [3], "samples": 2}}))
        self.assertEqual(self._run("peff", "x.csv", config=partial), 2)
        self.assertFalse((self.test_dir / "x.csv").exists())


if __name__ == '__main__':
    unittest.main(verbosity=2)
