import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, List, Optional

import yaml

from stadium_entropy.errors import ConfigError
from stadium_entropy.utils import resolve_threads

logger = logging.getLogger()

# Handlers installed by Config, removed again when a new Config is parsed
_installed_handlers: List[logging.Handler] = []

LOG_FORMAT = "%(asctime)s | %(name)s [%(levelname)s] %(message)s"

MAX_TOL = 1e-6
MAX_J = 200
MAX_SEED = 2**64


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated parameters of one run, after merging flags, YAML and defaults."""

    l: float = 2.0
    n_max: int = 10
    samples: int = 100_000
    grid: int = 200_000
    seed: int = 0
    tol: float = 1e-10
    max_len: int = 6
    j_max: int = 40
    window: Optional[int] = None
    measure: str = "uniform"
    out: Optional[str] = None
    json: bool = False
    threads: int = 1
    side: str = "L"
    coord: float = math.pi
    theta: float = 0.0
    steps: int = 10

    def __post_init__(self):
        if not (self.l > 0 and math.isfinite(self.l)):
            raise ConfigError(f"l must be a positive number, got {self.l}")
        for name in ("n_max", "samples", "grid", "max_len", "j_max", "threads", "steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if not 0 < self.tol <= MAX_TOL:
            raise ConfigError(f"tol must lie in (0, {MAX_TOL}], got {self.tol}")
        if self.j_max > MAX_J:
            raise ConfigError(f"j_max must be at most {MAX_J}, got {self.j_max}")
        if not 0 <= self.seed < MAX_SEED:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.window is not None and self.window < self.n_max:
            raise ConfigError(f"window must be at least n_max={self.n_max}")
        if self.measure not in ("uniform", "liouville"):
            raise ConfigError(f"measure must be 'uniform' or 'liouville', got {self.measure}")
        if self.side not in ("L", "T", "R", "B"):
            raise ConfigError(f"side must be one of L, T, R, B, got {self.side}")


# Keys of the `experiment:` section and the type each is read as
EXPERIMENT_KEYS = {
    "l": float,
    "n_max": int,
    "samples": int,
    "grid": int,
    "seed": int,
    "tol": float,
    "max_len": int,
    "j_max": int,
    "window": int,
    "measure": str,
    "out": str,
    "json": bool,
    "threads": int,
}


class Config:
    """Creates a Config object from an optional YAML-encoded config file"""

    def __init__(self, filepath: Optional[str] = None):
        self.filepath = filepath
        self.config_dict = {}
        if filepath is not None:
            if not os.path.isfile(filepath):
                raise ConfigError(f"Config file '{filepath}' does not exist")

            # Load in the config file at the given filepath
            with open(filepath) as file_stream:
                try:
                    self.config_dict = yaml.safe_load(file_stream.read()) or {}
                except yaml.YAMLError as e:
                    raise ConfigError(f"Config file '{filepath}' is not valid YAML: {e}")
            if not isinstance(self.config_dict, dict):
                raise ConfigError(f"Config file '{filepath}' must contain a mapping")

        # Parse and validate config options
        self._parse_config_values()

    def _parse_config_values(self):
        """Read and validate each config option"""
        # Logging setup
        formatter = logging.Formatter(LOG_FORMAT)

        for handler in _installed_handlers:
            logger.removeHandler(handler)
        _installed_handlers.clear()

        log_level = self._get_cfg(["logging", "level"], default="INFO")
        try:
            logger.setLevel(log_level)
        except ValueError:
            raise ConfigError(f"Unknown logging level '{log_level}'")

        file_logging_enabled = self._get_cfg(
            ["logging", "file_logging", "enabled"], default=False
        )
        file_logging_filepath = self._get_cfg(
            ["logging", "file_logging", "filepath"], default="stadium.log"
        )
        if file_logging_enabled:
            handler = logging.FileHandler(file_logging_filepath)
            handler.setFormatter(formatter)
            logger.addHandler(handler)
            _installed_handlers.append(handler)

        console_logging_enabled = self._get_cfg(
            ["logging", "console_logging", "enabled"], default=True
        )
        if console_logging_enabled:
            # stdout carries the CSV / JSON results
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(formatter)
            logger.addHandler(handler)
            _installed_handlers.append(handler)

        # Experiment defaults
        self.experiment_defaults = {}
        for key, kind in EXPERIMENT_KEYS.items():
            value = self._get_cfg(["experiment", key], required=False)
            if value is None:
                continue
            try:
                self.experiment_defaults[key] = kind(value)
            except (TypeError, ValueError):
                raise ConfigError(f"Config option experiment.{key} must be {kind.__name__}")

    def _get_cfg(
        self,
        path: List[str],
        default: Optional[Any] = None,
        required: Optional[bool] = True,
    ) -> Any:
        """Get a config option from a path and option name, specifying whether it is
        required.

        Raises:
            ConfigError: If required is True and the object is not found (and there is
                no default value provided), a ConfigError will be raised.
        """
        # Sift through the the config until we reach our option
        config = self.config_dict
        for name in path:
            config = config.get(name) if isinstance(config, dict) else None

            # If at any point we don't get our expected option...
            if config is None:
                # Raise an error if it was required
                if required and default is None:
                    raise ConfigError(f"Config option {'.'.join(path)} is required")

                # or return the default value
                return default

        # We found the option. Return it.
        return config

    def experiment(self, overrides: Optional[dict] = None) -> ExperimentConfig:
        """Merge command-line overrides over the YAML values and built-in defaults.

        Overrides set to None are treated as absent.
        """
        values = dict(self.experiment_defaults)
        flag_threads = None
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key == "threads":
                flag_threads = value
                continue
            values[key] = value
        values["threads"] = resolve_threads(
            flag_threads, self.experiment_defaults.get("threads")
        )
        unknown = set(values) - set(ExperimentConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"Unknown experiment options: {sorted(unknown)}")
        return ExperimentConfig(**values)
