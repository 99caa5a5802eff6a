"""
Config Module - Configuration Management

Provides configuration loading and validation from YAML files
and environment variables.

Configuration Precedence (highest to lowest):
1. Command-line flags (applied by apps/pushrec.py)
2. Environment variables
3. YAML config file
4. Default values

Environment Variables:
    PUSHREC_CONFIG: Default config file path
    PUSHREC_ANGLE_SCALE: Degrees per potentiometer count
    PUSHREC_REST_WINDOW: Samples averaged for the rest posture
    PUSHREC_ACCEL_FULL_SCALE: Accelerometer range in g (2, 4, 8 or 16)
    PUSHREC_MASS: Body mass used by the pendulum model (kg)
    PUSHREC_Z0: Constant CoM height (m)
    PUSHREC_COP_MIN / PUSHREC_COP_MAX: Foot CoP limits around the ankle (m)
    PUSHREC_THRESHOLD: Handedness indeterminate threshold
    PUSHREC_SEED: Random seed for synthetic trials
    PUSHREC_LOG_LEVEL: Logging level

Example:
    from src.config import Config

    # Load from environment variables
    config = Config.from_env()

    # Load from YAML with env override
    config = Config.load_with_env("config.yaml")
"""

import os
from pathlib import Path
from typing import Dict, Any, List, Optional, Tuple
from dataclasses import dataclass, field, asdict, fields, replace

import yaml


# Environment variable prefix
ENV_PREFIX = "PUSHREC_"

# Accelerometer ranges the IMU board supports
ACCEL_RANGES = (2.0, 4.0, 8.0, 16.0)

CONTROLLERS = ("fixed_cop", "capture_cop", "bang_bang")
BASELINES = ("pre_push", "ideal")


def get_env(name: str, default: str = "") -> str:
    """Get environment variable with prefix."""
    return os.environ.get(f"{ENV_PREFIX}{name}", default)


def get_env_int(name: str, default: int = 0) -> int:
    """Get integer environment variable."""
    val = get_env(name, "")
    if val:
        try:
            return int(val)
        except ValueError:
            pass
    return default


def get_env_float(name: str, default: float = 0.0) -> float:
    """Get float environment variable."""
    val = get_env(name, "")
    if val:
        try:
            return float(val)
        except ValueError:
            pass
    return default


def default_config_path() -> str:
    """Config path named by PUSHREC_CONFIG, or config.yaml."""
    return get_env("CONFIG", "config.yaml")


class ConfigError(Exception):
    """Base exception for configuration errors."""
    pass


class ConfigNotFoundError(ConfigError):
    """Raised when config file is not found."""
    pass


@dataclass
class IngestConfig:
    """Count-to-unit conversion settings."""
    angle_scale: float = 300.0 / 999.0  # degrees per count
    rest_window: int = 10  # samples averaged for Θ0
    accel_full_scale: float = 16.0  # g
    gyro_full_scale: float = 2000.0  # deg/s
    force_range: Tuple[float, float] = (0.0, 100.0)  # N


@dataclass
class SmoothingConfig:
    """Smoother selection."""
    method: str = "spline"  # "spline" or "poly:<degree>"
    poly_degree: int = 7
    resample_hz: Optional[float] = None


@dataclass
class LipmConfig:
    """Linear inverted pendulum and foot geometry."""
    g: float = 9.8
    z0: Optional[float] = None  # derived from height when unset
    z0_fraction: float = 0.57
    height: float = 1.70  # m, used when z0 is unset
    mass: float = 60.0
    cop_min: float = -0.05
    cop_max: float = 0.15
    dt: float = 1e-3
    t_end: float = 3.0
    escape_radius: float = 1.0
    controller: str = "capture_cop"

    def resolved_z0(self) -> float:
        """CoM height, falling back to the anthropometric fraction of height."""
        if self.z0 is not None:
            return self.z0
        return self.z0_fraction * self.height


@dataclass
class ControlConfig:
    """Joint-space recovery controller for the rigid-body chain."""
    kp: float = 100.0
    kd: float = 20.0
    dt: float = 1e-3
    t_end: float = 2.0
    perturbation: float = 0.05  # rad applied to every joint


@dataclass
class AnalysisConfig:
    """Gait analytics settings."""
    baseline: str = "pre_push"
    threshold: float = 0.1
    weights: Dict[str, float] = field(
        default_factory=lambda: {"knee": 0.5, "hip": 0.3, "ankle": 0.2}
    )
    push_threshold_n: float = 1.0
    cycle_duration: float = 1.2


@dataclass
class Config:
    """
    Main configuration class for the push-recovery toolkit.

    Attributes:
        ingest: Sensor conversion settings
        smoothing: Smoother settings
        lipm: Pendulum model and foot geometry
        control: Chain recovery controller gains
        analysis: Handedness and deviation analytics
        seed: Seed for synthetic trials
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
    """

    ingest: IngestConfig = field(default_factory=IngestConfig)
    smoothing: SmoothingConfig = field(default_factory=SmoothingConfig)
    lipm: LipmConfig = field(default_factory=LipmConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    seed: int = 42

    # Logging
    log_level: str = "INFO"

    @classmethod
    def load(cls, filepath: str = "config.yaml") -> "Config":
        """
        Load configuration from YAML file.

        Args:
            filepath: Path to YAML config file

        Returns:
            Config instance
        """
        path = Path(filepath)

        if not path.exists():
            raise ConfigNotFoundError(f"Config file not found: {filepath}")

        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}

        if not isinstance(data, dict):
            raise ConfigError(f"Config file must hold a mapping: {filepath}")

        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        """Create Config from dictionary."""
        config = cls()

        config.ingest = _merge_section(config.ingest, data.get("ingest"))
        config.smoothing = _merge_section(config.smoothing, data.get("smoothing"))
        config.lipm = _merge_section(config.lipm, data.get("lipm"))
        config.control = _merge_section(config.control, data.get("control"))
        config.analysis = _merge_section(config.analysis, data.get("analysis"))

        if isinstance(config.ingest.force_range, list):
            config.ingest.force_range = tuple(config.ingest.force_range)

        if "seed" in data:
            config.seed = int(data["seed"])
        if "log_level" in data:
            config.log_level = str(data["log_level"]).upper()

        return config

    @classmethod
    def from_env(cls) -> "Config":
        """
        Load configuration from environment variables.

        Returns:
            Config instance
        """
        config = cls()
        config.apply_env()
        return config

    @classmethod
    def load_with_env(cls, filepath: Optional[str] = None) -> "Config":
        """
        Load configuration from YAML file with environment variable overrides.

        Args:
            filepath: Path to YAML config file (PUSHREC_CONFIG when omitted)

        Returns:
            Config instance with env vars taking precedence
        """
        filepath = filepath or default_config_path()
        path = Path(filepath)
        if path.exists():
            config = cls.load(filepath)
        else:
            config = cls()

        config.apply_env()
        return config

    def apply_env(self) -> None:
        """Override fields from PUSHREC_* environment variables."""
        scale = get_env_float("ANGLE_SCALE")
        if scale:
            self.ingest.angle_scale = scale

        rest_window = get_env_int("REST_WINDOW")
        if rest_window:
            self.ingest.rest_window = rest_window

        accel = get_env_float("ACCEL_FULL_SCALE")
        if accel:
            self.ingest.accel_full_scale = accel

        mass = get_env_float("MASS")
        if mass:
            self.lipm.mass = mass

        z0 = get_env_float("Z0")
        if z0:
            self.lipm.z0 = z0

        if get_env("COP_MIN"):
            self.lipm.cop_min = get_env_float("COP_MIN", self.lipm.cop_min)
        if get_env("COP_MAX"):
            self.lipm.cop_max = get_env_float("COP_MAX", self.lipm.cop_max)

        threshold = get_env("THRESHOLD")
        if threshold:
            self.analysis.threshold = get_env_float("THRESHOLD", self.analysis.threshold)

        if get_env("SEED"):
            self.seed = get_env_int("SEED", self.seed)

        log_level = get_env("LOG_LEVEL")
        if log_level:
            self.log_level = log_level.upper()

    def save(self, filepath: str = "config.yaml") -> None:
        """Save configuration to YAML file."""
        data = self.to_dict()
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, 'w') as f:
            yaml.safe_dump(data, f, default_flow_style=False, indent=2, sort_keys=False)

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        ingest = asdict(self.ingest)
        ingest["force_range"] = list(self.ingest.force_range)
        return {
            "ingest": ingest,
            "smoothing": asdict(self.smoothing),
            "lipm": asdict(self.lipm),
            "control": asdict(self.control),
            "analysis": asdict(self.analysis),
            "seed": self.seed,
            "log_level": self.log_level,
        }

    def validate(self) -> List[str]:
        """
        Validate configuration.

        Returns:
            List of validation errors (empty if valid)
        """
        errors = []

        if self.ingest.angle_scale <= 0:
            errors.append("ingest.angle_scale must be positive")
        if self.ingest.rest_window < 1:
            errors.append("ingest.rest_window must be at least 1")
        if self.ingest.accel_full_scale not in ACCEL_RANGES:
            errors.append(f"ingest.accel_full_scale must be one of {ACCEL_RANGES}")
        if self.ingest.gyro_full_scale <= 0:
            errors.append("ingest.gyro_full_scale must be positive")
        force_range = tuple(self.ingest.force_range)
        if len(force_range) != 2 or force_range[0] < 0 or force_range[0] >= force_range[1]:
            errors.append("ingest.force_range must be [low, high] with 0 <= low < high")

        if self.smoothing.method != "spline" and not self.smoothing.method.startswith("poly"):
            errors.append("smoothing.method must be 'spline' or 'poly:<degree>'")
        if self.smoothing.resample_hz is not None and self.smoothing.resample_hz <= 0:
            errors.append("smoothing.resample_hz must be positive")

        lipm = self.lipm
        if lipm.g <= 0:
            errors.append("lipm.g must be positive")
        if lipm.resolved_z0() <= 0:
            errors.append("lipm.z0 must be positive")
        if lipm.height <= 0:
            errors.append("lipm.height must be positive")
        if lipm.mass <= 0:
            errors.append("lipm.mass must be positive")
        if lipm.cop_min >= lipm.cop_max:
            errors.append("lipm.cop_min must be below lipm.cop_max")
        if lipm.dt <= 0 or lipm.t_end < 0:
            errors.append("lipm.dt must be positive and lipm.t_end non-negative")
        if lipm.escape_radius <= 0:
            errors.append("lipm.escape_radius must be positive")
        if lipm.controller not in CONTROLLERS:
            errors.append(f"lipm.controller must be one of {CONTROLLERS}")

        if self.control.kp < 0 or self.control.kd < 0:
            errors.append("control gains must be non-negative")
        if self.control.dt <= 0:
            errors.append("control.dt must be positive")

        analysis = self.analysis
        if analysis.baseline not in BASELINES:
            errors.append(f"analysis.baseline must be one of {BASELINES}")
        if analysis.threshold < 0 or analysis.threshold >= 1:
            errors.append("analysis.threshold must be in [0, 1)")
        if any(w < 0 for w in analysis.weights.values()) or not any(analysis.weights.values()):
            errors.append("analysis.weights must be non-negative and not all zero")

        if self.log_level not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            errors.append("log_level must be DEBUG, INFO, WARNING or ERROR")

        return errors

    def __repr__(self) -> str:
        """String representation."""
        return (
            f"Config(scale={self.ingest.angle_scale:.6f}, "
            f"smooth={self.smoothing.method}, "
            f"foot=[{self.lipm.cop_min}, {self.lipm.cop_max}], "
            f"seed={self.seed})"
        )


def _merge_section(section: Any, data: Optional[Dict[str, Any]]) -> Any:
    """Return a copy of a section dataclass with known keys overridden."""
    if not data:
        return section
    if not isinstance(data, dict):
        raise ConfigError(f"Section {type(section).__name__} must be a mapping")

    known = {f.name for f in fields(section)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"Unknown keys for {type(section).__name__}: {sorted(unknown)}")
    return replace(section, **data)
