"""Configuration models and settings."""

import math
from pathlib import Path
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# theta = -arctan(0.9) makes the L branch travel ~19 step lengths per step
PRESET_THETA = -math.atan(0.9)
PRESET_STEP_LENGTH = 0.01
EQUAL_AMPLITUDE = 1.0 / math.sqrt(2.0)

NORM_TOLERANCE = 1e-12


class ConfigError(ValueError):
    """Invalid command-line or file configuration."""


def config_error_from(exc: ValidationError) -> ConfigError:
    """Collapse a pydantic validation error into a one-line ConfigError."""
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ())) or "config"
    return ConfigError(f"{location}: {first.get('msg', 'invalid value')}")


class GridConfig(BaseModel):
    """Spatial and spectral discretization."""
    x_min: float = Field(default=-8.0, description="Left edge of the spatial grid")
    x_max: float = Field(default=8.0, description="Right edge of the spatial grid")
    n_points: int = Field(default=4096, ge=2, description="Spatial grid points")
    k_max: float = Field(default=8.0, gt=0.0, description="Spectral window half-width")
    n_modes: int = Field(default=4096, ge=2, description="Spectral quadrature nodes")

    @model_validator(mode="after")
    def _check_window(self) -> "GridConfig":
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min ({self.x_min}) must be below x_max ({self.x_max})")
        return self


class WalkConfig(BaseModel):
    """Coin state, coin rotation, and step length of a walk."""
    a_R: float = Field(default=EQUAL_AMPLITUDE, description="Real |R> amplitude")
    a_L: float = Field(default=EQUAL_AMPLITUDE, description="Real |L> amplitude")
    theta: float = Field(default=PRESET_THETA, description="Coin rotation angle R(theta)")
    l: float = Field(default=PRESET_STEP_LENGTH, gt=0.0, description="Step length")

    @model_validator(mode="after")
    def _check_normalized(self) -> "WalkConfig":
        norm = self.a_R ** 2 + self.a_L ** 2
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"coin amplitudes not normalized (a_R^2 + a_L^2 = {norm!r})")
        return self


class MonteCarloConfig(BaseModel):
    """Sampling oracle configuration."""
    seed: int = Field(default=20100101, ge=0, lt=2 ** 64, description="Root seed")
    n_samples: int = Field(default=1_000_000, ge=10_000, description="Trajectories")
    chunk_size: int = Field(default=100_000, ge=1, description="Trajectories per RNG stream")
    generator: Literal["PCG64"] = Field(default="PCG64", description="Bit generator")


class OutputConfig(BaseModel):
    """Output configuration."""
    out_dir: Path = Field(default=Path("qwalk_out"), description="Output directory")
    format: Literal["csv", "svg", "gnuplot"] = Field(default="csv", description="Rendering")
    precision: int = Field(default=17, ge=1, le=17, description="Significant digits")


class Settings(BaseSettings):
    """Global application settings (overridable via QWALK_* environment variables)."""
    model_config = SettingsConfigDict(env_prefix="QWALK_", env_nested_delimiter="__")

    grid: GridConfig = Field(default_factory=GridConfig)
    walk: WalkConfig = Field(default_factory=WalkConfig)
    monte_carlo: MonteCarloConfig = Field(default_factory=MonteCarloConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    log_level: str = Field(default="WARNING", description="Logging level")
    log_file: Optional[Path] = Field(default=None, description="Optional log file")
    presets_file: Optional[Path] = Field(default=None, description="Figure preset overrides")

    @classmethod
    def load_from_yaml(cls, path: Path) -> "Settings":
        """Load settings from YAML file."""
        with open(path) as f:
            data = yaml.safe_load(f) or {}
        return cls(**data)

    def save_to_yaml(self, path: Path):
        """Save settings to YAML file."""
        with open(path, 'w') as f:
            yaml.safe_dump(self.model_dump(mode="json"), f, sort_keys=True)


# Global settings instance
settings = Settings()


def load_config_file(path: Path) -> dict:
    """
    Load a key-value YAML config file for a CLI run.

    Args:
        path: Path to YAML mapping

    Returns:
        Dictionary of run options

    Raises:
        ConfigError: If the file is missing or not a mapping
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {path} is not valid YAML: {e}".splitlines()[0])
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a key-value mapping")
    return {str(key).replace("-", "_"): value for key, value in data.items()}


class RunConfig(BaseModel):
    """Options shared by every CLI subcommand."""
    model_config = ConfigDict(extra="forbid")

    out_dir: Path = Field(default=Path("qwalk_out"))
    format: Literal["csv", "svg", "gnuplot"] = "csv"
    seed: int = Field(default=20100101, ge=0, lt=2 ** 64)
    precision: int = Field(default=17, ge=1, le=17)
    long_run: bool = False


class ParticleRun(RunConfig):
    """`qwalk particle` options."""
    coin: Literal["hadamard", "identity", "general"] = "hadamard"
    eta: float = 0.0
    phi: float = 0.0
    theta_c: float = 0.0
    varphi: float = 0.0
    start: Literal["R", "L", "symmetric"] = "R"
    steps: int = Field(default=10, ge=0)
    order: Literal["coin-then-shift", "shift-then-coin"] = "coin-then-shift"
    step_length: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def _check_angles(self) -> "ParticleRun":
        angles = (self.eta, self.phi, self.theta_c, self.varphi)
        if not all(math.isfinite(a) for a in angles):
            raise ValueError("coin angles must be finite")
        if self.coin != "general" and any(a != 0.0 for a in angles):
            raise ValueError(f"coin angles only apply to --coin general (got --coin {self.coin})")
        return self


class ModeRun(RunConfig):
    """`qwalk mode` options."""
    mode: Literal["measured", "coherent"] = "coherent"
    a_R: float = EQUAL_AMPLITUDE
    a_L: float = EQUAL_AMPLITUDE
    k: float = 1.0
    l: float = Field(default=PRESET_STEP_LENGTH, gt=0.0)
    theta: float = PRESET_THETA
    steps: int = Field(default=10, ge=0)
    l0: float = 0.0

    @model_validator(mode="after")
    def _check_mode(self) -> "ModeRun":
        if self.k == 0.0:
            raise ValueError("k must be nonzero (offsets are undefined at k = 0)")
        norm = self.a_R ** 2 + self.a_L ** 2
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"coin amplitudes not normalized (a_R^2 + a_L^2 = {norm!r})")
        return self


class PacketRun(RunConfig):
    """`qwalk packet` options."""
    preset: Literal["gaussian", "gaussian_pair"] = "gaussian"
    input: Optional[Path] = None
    width: float = Field(default=1.0, gt=0.0)
    center: float = 0.0
    separation: float = Field(default=3.0, gt=0.0)
    evolution: Literal["measured-all-left", "coherent"] = "measured-all-left"
    checkpoints: List[int] = Field(default_factory=lambda: [1])
    a_R: float = EQUAL_AMPLITUDE
    a_L: float = EQUAL_AMPLITUDE
    theta: float = PRESET_THETA
    l: float = Field(default=PRESET_STEP_LENGTH, gt=0.0)
    grid: GridConfig = Field(default_factory=GridConfig)

    @field_validator("checkpoints")
    @classmethod
    def _check_checkpoints(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one checkpoint is required")
        if any(t < 0 for t in value):
            raise ValueError("checkpoints must be non-negative")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("checkpoints must be sorted ascending without repeats")
        return value

    @model_validator(mode="after")
    def _check_packet(self) -> "PacketRun":
        norm = self.a_R ** 2 + self.a_L ** 2
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"coin amplitudes not normalized (a_R^2 + a_L^2 = {norm!r})")
        if self.input is not None and not self.input.exists():
            raise ValueError(f"packet input file not found: {self.input}")
        return self


class FigureRun(RunConfig):
    """`qwalk figure` options."""
    figure: int = Field(ge=1, le=6)
    presets_file: Optional[Path] = None

    @model_validator(mode="after")
    def _check_long_run(self) -> "FigureRun":
        if self.figure == 6 and not self.long_run:
            raise ValueError("figure 6 runs 6000+ steps; pass --long-run to acknowledge")
        return self


def init_directories(out_dir: Path) -> Path:
    """Create the output directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir
