# coherent_qec/Config.py

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from coherent_qec.Errors import ConfigurationError
from coherent_qec.Repetition.CircuitSchedule import DecoderWeighting, NoiseAllocation
from coherent_qec.Surface.SurfaceSimulator import SurfaceNoise, SyndromeMode

log = logging.getLogger(__name__)

DEFAULT_SETTINGS_PATH = Path("config.json")


class RunSettings(BaseModel):
    """Run-wide defaults read from config.json."""
    chunk_size: int = Field(64, ge=1)
    progress: bool = True
    fit_window: float = Field(0.3, gt=0.0)
    bootstrap: int = Field(200, ge=0)
    purify_tolerance: float = Field(1e-10, gt=0.0)
    purify_interval: int = Field(256, ge=0)
    max_attempts: int = Field(8, ge=1)
    log_level: str = "INFO"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, v: str) -> str:
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level '{v}'.")
        return level


def load_settings(path: Optional[Union[str, Path]] = None) -> RunSettings:
    """
    Loads run settings, falling back to the built-in defaults when the file is
    missing or unreadable. The log level lives under "logging": {"level": ...}.
    """
    path = Path(path) if path is not None else DEFAULT_SETTINGS_PATH
    if not path.exists():
        log.warning(f"Settings file not found at '{path}'. Using built-in defaults.")
        return RunSettings()
    try:
        with path.open("r", encoding="utf-8") as f:
            raw = json.load(f)
        data = dict(raw.get("run", {}))
        if "logging" in raw and "level" in raw["logging"]:
            data["log_level"] = raw["logging"]["level"]
        settings = RunSettings.model_validate(data)
        log.debug(f"Run settings loaded from '{path}'.")
        return settings
    except (OSError, json.JSONDecodeError, ValidationError, AttributeError) as e:
        log.warning(f"Could not read settings from '{path}': {e}. Using built-in defaults.")
        return RunSettings()


class SweepSection(BaseModel):
    """Grid for pl-sweep and threshold: every (model, c, p, n) combination."""
    model_config = ConfigDict(frozen=True)

    models: List[NoiseAllocation] = [NoiseAllocation.PHENOMENOLOGICAL]
    c_values: List[float] = [0.0]
    p_values: List[float]
    n_values: List[int]
    T: Optional[int] = Field(None, ge=1)
    samples: int = Field(..., ge=1)
    decoder_weighting: DecoderWeighting = DecoderWeighting.UNIFORM
    two_qubit_weights: Tuple[float, float, float] = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

    @field_validator("c_values", "p_values", "n_values", "models")
    @classmethod
    def _non_empty(cls, v: List[Any]) -> List[Any]:
        if not v:
            raise ValueError("Sweep lists must not be empty.")
        return v


class ThresholdSection(BaseModel):
    window: Optional[float] = Field(None, gt=0.0)
    bootstrap: Optional[int] = Field(None, ge=0)


class PeffSection(BaseModel):
    c_values: List[float]
    p_values: List[float]
    n: int = Field(5, ge=4)
    T: int = Field(3, ge=2)
    x: int = Field(1, ge=1)
    y: int = Field(2, ge=2)
    samples: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _site_in_range(self) -> "PeffSection":
        if not self.c_values or not self.p_values:
            raise ValueError("peff needs non-empty c_values and p_values.")
        if self.x > self.n - 2 or self.y > self.T:
            raise ValueError(f"Site (x={self.x}, y={self.y}) lies outside n={self.n}, T={self.T}.")
        return self


class DecaySection(BaseModel):
    model: NoiseAllocation = NoiseAllocation.PHENOMENOLOGICAL
    c_values: List[float] = [0.0]
    p_values: List[float]
    d_values: List[int]
    samples: int = Field(..., ge=1)
    p_th: Optional[float] = Field(None, gt=0.0)

    @field_validator("d_values")
    @classmethod
    def _odd_sizes(cls, v: List[int]) -> List[int]:
        if not v or any(d < 3 or d % 2 == 0 for d in v):
            raise ValueError("d_values must be odd sizes >= 3.")
        return v


class SurfaceSection(BaseModel):
    d: int = Field(3, ge=3)
    T: Optional[int] = Field(None, ge=1)
    mode: SyndromeMode = SyndromeMode.CONVERTED
    noise: SurfaceNoise = SurfaceNoise()
    p_values: Optional[List[float]] = None
    c: float = Field(0.0, ge=0.0, le=1.0)
    samples: int = Field(..., ge=1)


class BenchSection(BaseModel):
    model: NoiseAllocation = NoiseAllocation.CIRCUIT_BASED
    n: int = Field(15, ge=3)
    p: float = Field(0.03, ge=0.0, le=1.0)
    c: float = Field(0.0, ge=0.0, le=1.0)
    samples: int = Field(50, ge=1)
    worker_counts: List[int] = [1, 2]


class ExperimentConfig(BaseModel):
    """One experiment file: a seed plus whichever command sections it uses."""
    name: str = "experiment"
    seed: int = Field(0, ge=0, lt=2 ** 64)
    workers: int = Field(1, ge=1)
    sweep: Optional[SweepSection] = None
    threshold: Optional[ThresholdSection] = None
    peff: Optional[PeffSection] = None
    decay: Optional[DecaySection] = None
    surface: Optional[SurfaceSection] = None
    bench: Optional[BenchSection] = None

    def section(self, key: str) -> BaseModel:
        value = getattr(self, key)
        if value is None:
            raise ConfigurationError(f"Experiment '{self.name}' has no '{key}' section.")
        return value


def load_experiment(path: Union[str, Path]) -> ExperimentConfig:
    """Reads a YAML or JSON experiment file, chosen by extension, and validates it."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as f:
            raw = json.load(f) if path.suffix.lower() == ".json" else yaml.safe_load(f)
    except OSError as e:
        raise ConfigurationError(f"Cannot read experiment file '{path}': {e}") from e
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Experiment file '{path}' is not valid: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigurationError(f"Experiment file '{path}' must hold a mapping at the top level.")
    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(f"Experiment file '{path}' failed validation:\n{e}") from e
    log.info(f"Loaded experiment '{config.name}' from '{path}' (hash {config_hash(config)[:12]}).")
    return config


def config_hash(config: BaseModel) -> str:
    """SHA-256 of the canonical JSON dump (sorted keys). The worker count is left out."""
    payload: Dict[str, Any] = config.model_dump(mode="json")
    payload.pop("workers", None)
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
