import os
import unittest
from unittest import mock
from unittest.mock import Mock

from stadium_entropy.config import Config, ExperimentConfig
from stadium_entropy.errors import ConfigError
from stadium_entropy.utils import THREADS_ENV_VAR, resolve_threads

from tests.utils import write_config


class ConfigTestCase(unittest.TestCase):
    def test_get_cfg(self):
        """Config._get_cfg walks nested sections and honours defaults"""
        fake_config = Mock()
        fake_config.config_dict = {
            "experiment": {"l": 2.5, "measure": "liouville"},
            "logging": {"level": "DEBUG", "file_logging": {"enabled": False}},
        }

        self.assertEqual(Config._get_cfg(fake_config, ["experiment", "l"]), 2.5)
        self.assertIs(
            Config._get_cfg(fake_config, ["logging", "file_logging", "enabled"]),
            False,
        )
        self.assertEqual(
            Config._get_cfg(fake_config, ["experiment", "seed"], default=0), 0
        )
        # A present key wins over the default
        self.assertEqual(
            Config._get_cfg(fake_config, ["logging", "level"], default="INFO"),
            "DEBUG",
        )

        with self.assertRaises(ConfigError):
            Config._get_cfg(fake_config, ["experiment", "grid"], required=True)
        self.assertIsNone(
            Config._get_cfg(fake_config, ["experiment", "grid"], required=False)
        )
        # Paths running through a scalar are treated as missing
        self.assertIsNone(
            Config._get_cfg(fake_config, ["experiment", "l", "deeper"], required=False)
        )

    def test_yaml_file(self):
        """Experiment defaults are read from the YAML file and overridden by flags"""
        path = write_config(
            "experiment:\n  l: 3\n  seed: 7\n  samples: 500\nlogging:\n  level: WARNING\n"
        )
        try:
            config = Config(path)
        finally:
            os.remove(path)

        experiment = config.experiment({"seed": 11, "grid": None})
        self.assertEqual(experiment.l, 3.0)
        self.assertEqual(experiment.samples, 500)
        # Flags win over the file
        self.assertEqual(experiment.seed, 11)
        # None flags fall through to the built-in default
        self.assertEqual(experiment.grid, ExperimentConfig().grid)

    def test_missing_and_invalid_files(self):
        with self.assertRaises(ConfigError):
            Config("/nonexistent/stadium.yaml")

        path = write_config("- just\n- a list\n")
        try:
            with self.assertRaises(ConfigError):
                Config(path)
        finally:
            os.remove(path)

        path = write_config("experiment:\n  samples: many\n")
        try:
            with self.assertRaises(ConfigError):
                Config(path)
        finally:
            os.remove(path)

    def test_unknown_log_level(self):
        path = write_config("logging:\n  level: LOUD\n")
        try:
            with self.assertRaises(ConfigError):
                Config(path)
        finally:
            os.remove(path)


class ExperimentConfigTestCase(unittest.TestCase):
    def test_defaults(self):
        config = ExperimentConfig()
        self.assertEqual(config.l, 2.0)
        self.assertEqual(config.tol, 1e-10)
        self.assertFalse(config.json)

    def test_validation(self):
        for bad in (
            {"l": 0.0},
            {"l": float("inf")},
            {"samples": 0},
            {"grid": 0},
            {"tol": 1e-3},
            {"tol": 0.0},
            {"j_max": 201},
            {"seed": -1},
            {"seed": 2**64},
            {"n_max": 8, "window": 4},
            {"measure": "gaussian"},
            {"side": "X"},
        ):
            with self.subTest(bad=bad):
                with self.assertRaises(ConfigError):
                    ExperimentConfig(**bad)

    def test_unknown_override(self):
        with self.assertRaises(ConfigError):
            Config().experiment({"colour": "blue"})


class ThreadsTestCase(unittest.TestCase):
    def test_precedence(self):
        with mock.patch.dict(os.environ, {THREADS_ENV_VAR: "3"}):
            self.assertEqual(resolve_threads(2, 5), 2)
            self.assertEqual(resolve_threads(None, 5), 5)
            self.assertEqual(resolve_threads(None, None), 3)

        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(resolve_threads(None, None), 1)

    def test_invalid(self):
        with mock.patch.dict(os.environ, {THREADS_ENV_VAR: "lots"}):
            with self.assertRaises(ConfigError):
                resolve_threads(None, None)
        with self.assertRaises(ConfigError):
            resolve_threads(0)


if __name__ == "__main__":
    unittest.main()
