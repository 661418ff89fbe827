"""Built-in figure presets with optional YAML overrides."""

import logging
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .config import EQUAL_AMPLITUDE, PRESET_STEP_LENGTH, PRESET_THETA, ConfigError, GridConfig, config_error_from

logger = logging.getLogger(__name__)

FIGURE2_NOTE = (
    "The figure 2 caption gives l = theta = 1, while the accompanying text says theta = 5.55 "
    "was chosen so that L2 is much larger than L1. This data uses l = 1 and theta = 5.55 "
    "(5.55 agrees with 2*pi - arctan(0.9) = 5.5504 to two decimals)."
)


class FigurePreset(BaseModel):
    """Parameters behind one figure's data."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["theta-scan", "k-scan", "measured-packet", "coherent-packet"]
    caption: str = ""
    a_R: float = EQUAL_AMPLITUDE
    a_L: float = EQUAL_AMPLITUDE
    theta: float = PRESET_THETA
    k: float = 1.0
    l: float = PRESET_STEP_LENGTH
    start: float = 0.0
    stop: float = 2.0 * math.pi
    samples: int = Field(default=2000, ge=2)
    endpoint: bool = False
    width: float = Field(default=1.0, gt=0.0)
    checkpoints: List[int] = Field(default_factory=list)
    grid: GridConfig = Field(default_factory=GridConfig)
    long_run: bool = False
    note: Optional[str] = None

    @property
    def is_scan(self) -> bool:
        return self.kind.endswith("scan")


DEFAULT_FIGURES: Dict[int, dict] = {
    1: {
        "kind": "theta-scan",
        "caption": "L1 and L2 as functions of theta; k = 1, l = 0.01, a_R = a_L = 1/sqrt(2)",
        "k": 1.0,
        "l": 0.01,
        "start": 0.0,
        "stop": 2.0 * math.pi,
        "samples": 2000,
    },
    2: {
        "kind": "k-scan",
        "caption": "L1 and L2 as functions of k; l = 1, theta = 5.55, a_R = a_L = 1/sqrt(2)",
        "theta": 5.55,
        "l": 1.0,
        "start": 0.005,
        "stop": 10.0,
        "samples": 2000,
        "endpoint": True,
        "note": FIGURE2_NOTE,
    },
    3: {
        "kind": "measured-packet",
        "caption": "Gaussian packet measured |L> at every step; theta = -arctan(0.9), l = 0.01; t = 1, 3, 5, 10, 20",
        "checkpoints": [1, 3, 5, 10, 20],
        "grid": {"x_min": -20.0, "x_max": 10.0, "n_points": 4096, "k_max": 10.0, "n_modes": 4096},
    },
    4: {
        "kind": "measured-packet",
        "caption": "Gaussian packet measured |L> at every step, after 35 steps",
        "checkpoints": [35],
        "grid": {"x_min": -20.0, "x_max": 10.0, "n_points": 4096, "k_max": 10.0, "n_modes": 4096},
    },
    5: {
        "kind": "coherent-packet",
        "caption": "Gaussian packet after one unmeasured step (same state as one measured step before read-out)",
        "checkpoints": [1],
    },
    6: {
        "kind": "coherent-packet",
        "caption": "Gaussian packet after 6000 to 6003 unmeasured steps; initial wave, |R> and |L> components",
        "checkpoints": [6000, 6001, 6002, 6003],
        "grid": {"x_min": -16.0, "x_max": 16.0, "n_points": 4096, "k_max": 8.0, "n_modes": 4096},
        "long_run": True,
    },
}


class FigurePresets:
    """Figure presets: built-in defaults, optionally overridden from YAML."""

    def __init__(self, presets_yaml: Optional[Path] = None):
        """
        Initialize presets.

        Args:
            presets_yaml: Optional YAML mapping figure number -> preset fields

        Raises:
            ConfigError: If the override file is missing or invalid
        """
        self.figures = {n: dict(spec) for n, spec in DEFAULT_FIGURES.items()}
        if presets_yaml is not None:
            self._load_presets_yaml(Path(presets_yaml))

    def _load_presets_yaml(self, path: Path):
        """Merge figure overrides from a YAML file."""
        if not path.exists():
            raise ConfigError(f"presets file not found: {path}")
        try:
            with open(path) as f:
                custom = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"presets file {path} is not valid YAML: {str(e).splitlines()[0]}")
        if not isinstance(custom, dict):
            raise ConfigError(f"presets file {path} must map figure numbers to settings")

        for key, overrides in custom.items():
            try:
                number = int(key)
            except (TypeError, ValueError):
                raise ConfigError(f"presets file {path}: unknown figure {key!r}")
            if number not in self.figures:
                raise ConfigError(f"presets file {path}: unknown figure {number}")
            if not isinstance(overrides, dict):
                raise ConfigError(f"presets file {path}: figure {number} must be a mapping")
            self.figures[number].update(overrides)
        logger.info(f"Loaded figure presets from {path}")

    def get(self, number: int) -> FigurePreset:
        """
        Validated preset for one figure.

        Raises:
            ConfigError: If the figure is unknown or its settings are invalid
        """
        if number not in self.figures:
            raise ConfigError(f"unknown figure {number}; choose from {sorted(self.figures)}")
        try:
            return FigurePreset(**self.figures[number])
        except ValidationError as e:
            raise config_error_from(e)
