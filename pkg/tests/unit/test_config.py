# coherent_qec/tests/unit/test_config.py

import json
import shutil
import tempfile
import unittest
from pathlib import Path

import yaml

from coherent_qec.Config import ExperimentConfig, RunSettings, config_hash, load_experiment, load_settings
from coherent_qec.Errors import ConfigurationError
from coherent_qec.Repetition.CircuitSchedule import NoiseAllocation


class TestConfig(unittest.TestCase):
    """Unit tests for settings and experiment loading, validation and hashing."""

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def _write_yaml(self, name: str, data) -> Path:
        path = self.test_dir / name
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        return path

    def test_01_missing_settings_fall_back_to_defaults(self):
        """Test (Settings): Verifies that a missing config.json logs a warning and returns the defaults."""
        with self.assertLogs("coherent_qec.Config", level="WARNING") as logs:
            settings = load_settings(self.test_dir / "absent.json")
        self.assertEqual(settings, RunSettings())
        self.assertIn("not found", logs.output[0])

    def test_02_settings_file_is_read(self):
        """Test (Settings): Verifies the run block and the nested logging level."""
        path = self.test_dir / "config.json"
        path.write_text(json.dumps({"run": {"chunk_size": 8, "bootstrap": 0}, "logging": {"level": "debug"}}))
        settings = load_settings(path)
        self.assertEqual((settings.chunk_size, settings.bootstrap, settings.log_level), (8, 0, "DEBUG"))

    def test_03_corrupt_settings_fall_back_to_defaults(self):
        """Test (Settings): Verifies that unreadable JSON or bad values degrade to defaults with a warning."""
        for text in ("{not json", json.dumps({"run": {"chunk_size": 0}})):
            with self.subTest(text=text):
                path = self.test_dir / "config.json"
                path.write_text(text)
                with self.assertLogs("coherent_qec.Config", level="WARNING"):
                    self.assertEqual(load_settings(path), RunSettings())

    def test_04_experiment_yaml(self):
        """Test (Experiment): Verifies that a YAML experiment loads with enums and defaults applied."""
        path = self._write_yaml("exp.yaml", {
            "name": "tiny", "seed": 4,
            "sweep": {"models": ["circuit_based"], "p_values": [0.01], "n_values": [3], "samples": 5},
        })
        config = load_experiment(path)
        self.assertEqual(config.sweep.models, [NoiseAllocation.CIRCUIT_BASED])
        self.assertEqual(config.sweep.c_values, [0.0])
        self.assertEqual(config.workers, 1)
        with self.assertRaises(ConfigurationError):
            config.section("peff")

    def test_05_invalid_experiments(self):
        """Test (Experiment): Verifies that unreadable, malformed and out-of-range files raise ConfigurationError."""
        bad_peff = {"peff": {"c_values": [0], "p_values": [0.01], "n": 4, "x": 3, "samples": 5}}
        cases = {
            "missing": self.test_dir / "nope.yaml",
            "not_a_mapping": self._write_yaml("list.yaml", [1, 2]),
            "zero_samples": self._write_yaml("zero.yaml", {"sweep": {"p_values": [0.1], "n_values": [3], "samples": 0}}),
            "even_distance": self._write_yaml("even.yaml", {"decay": {"p_values": [0.1], "d_values": [4], "samples": 1}}),
            "peff_site": self._write_yaml("site.yaml", bad_peff),
        }
        broken = self.test_dir / "broken.yaml"
        broken.write_text("sweep: [unclosed", encoding="utf-8")
        cases["broken_yaml"] = broken
        for name, path in cases.items():
            with self.subTest(case=name):
                with self.assertRaises(ConfigurationError):
                    load_experiment(path)

    def test_06_hash_is_canonical(self):
        """Test (Hash): Verifies that the hash ignores key order and worker count but follows the seed."""
        sweep = {"p_values": [0.1], "n_values": [3], "samples": 5}
        a = ExperimentConfig.model_validate({"seed": 1, "workers": 1, "sweep": sweep})
        b = ExperimentConfig.model_validate({"sweep": dict(reversed(list(sweep.items()))), "workers": 4, "seed": 1})
        c = ExperimentConfig.model_validate({"seed": 2, "sweep": sweep})
        self.assertEqual(config_hash(a), config_hash(b))
        self.assertNotEqual(config_hash(a), config_hash(c))
        self.assertEqual(len(config_hash(a)), 64)

    def test_07_json_experiment(self):
        """Test (Experiment): Verifies that a .json file is parsed as JSON."""
        path = self.test_dir / "exp.json"
        path.write_text(json.dumps({"seed": 3, "bench": {"n": 5}}))
        config = load_experiment(path)
        self.assertEqual(config.bench.n, 5)
        self.assertEqual(config.bench.worker_counts, [1, 2])


if __name__ == '__main__':
    unittest.main(verbosity=2)
