"""
Unit Tests for Config Module

Tests YAML loading, environment overrides, validation and saving.

Run with:
    pytest tests/test_config.py -v
"""

import sys
import pytest
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import (
    Config,
    ConfigError,
    ConfigNotFoundError,
    LipmConfig,
    default_config_path,
    get_env_float,
    get_env_int,
)

ENV_NAMES = (
    "CONFIG", "ANGLE_SCALE", "REST_WINDOW", "ACCEL_FULL_SCALE", "MASS", "Z0",
    "COP_MIN", "COP_MAX", "THRESHOLD", "SEED", "LOG_LEVEL",
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Remove PUSHREC_* variables so the host environment cannot leak in."""
    for name in ENV_NAMES:
        monkeypatch.delenv(f"PUSHREC_{name}", raising=False)


class TestDefaults:
    """Tests for default configuration."""

    def test_defaults_are_valid(self):
        """Test the default config passes validation."""
        assert Config().validate() == []

    def test_default_values(self):
        """Test documented defaults."""
        config = Config()
        assert config.ingest.angle_scale == pytest.approx(300.0 / 999.0)
        assert config.ingest.rest_window == 10
        assert config.lipm.cop_min == -0.05
        assert config.lipm.cop_max == 0.15
        assert config.analysis.weights == {"knee": 0.5, "hip": 0.3, "ankle": 0.2}
        assert config.seed == 42

    def test_resolved_z0(self):
        """Test z0 falls back to a fraction of stature."""
        assert LipmConfig(height=2.0).resolved_z0() == pytest.approx(1.14)
        assert LipmConfig(z0=0.98).resolved_z0() == 0.98


class TestLoad:
    """Tests for reading YAML."""

    def test_load_yaml(self, tmp_path):
        """Test sections merge over defaults."""
        path = tmp_path / "config.yaml"
        path.write_text(
            "lipm:\n  z0: 0.98\n  controller: bang_bang\n"
            "analysis:\n  weights: {knee: 1.0, hip: 0.0, ankle: 0.0}\n"
            "seed: 7\nlog_level: debug\n"
        )
        config = Config.load(str(path))
        assert config.lipm.z0 == 0.98
        assert config.lipm.controller == "bang_bang"
        assert config.lipm.cop_max == 0.15
        assert config.analysis.weights["knee"] == 1.0
        assert config.seed == 7
        assert config.log_level == "DEBUG"

    def test_missing_file(self, tmp_path):
        """Test a missing file raises ConfigNotFoundError."""
        with pytest.raises(ConfigNotFoundError):
            Config.load(str(tmp_path / "absent.yaml"))

    def test_unknown_key(self, tmp_path):
        """Test a misspelt key is rejected."""
        path = tmp_path / "config.yaml"
        path.write_text("lipm:\n  cop_maximum: 0.2\n")
        with pytest.raises(ConfigError):
            Config.load(str(path))

    def test_non_mapping(self, tmp_path):
        """Test a YAML list is not a config."""
        path = tmp_path / "config.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            Config.load(str(path))

    def test_empty_file(self, tmp_path):
        """Test an empty file gives the defaults."""
        path = tmp_path / "config.yaml"
        path.write_text("")
        assert Config.load(str(path)).to_dict() == Config().to_dict()

    def test_save_and_reload(self, tmp_path):
        """Test a saved config loads back unchanged."""
        config = Config()
        config.lipm.z0 = 0.9
        config.smoothing.method = "poly:5"
        config.ingest.force_range = (0.0, 50.0)
        path = tmp_path / "nested" / "config.yaml"
        config.save(str(path))
        loaded = Config.load(str(path))
        assert loaded.to_dict() == config.to_dict()
        assert loaded.ingest.force_range == (0.0, 50.0)


class TestEnvironment:
    """Tests for PUSHREC_* overrides."""

    def test_env_overrides(self, monkeypatch):
        """Test environment variables set their fields."""
        monkeypatch.setenv("PUSHREC_MASS", "72.5")
        monkeypatch.setenv("PUSHREC_Z0", "1.01")
        monkeypatch.setenv("PUSHREC_COP_MIN", "-0.08")
        monkeypatch.setenv("PUSHREC_REST_WINDOW", "25")
        monkeypatch.setenv("PUSHREC_SEED", "0")
        monkeypatch.setenv("PUSHREC_LOG_LEVEL", "warning")
        config = Config.from_env()
        assert config.lipm.mass == 72.5
        assert config.lipm.z0 == 1.01
        assert config.lipm.cop_min == -0.08
        assert config.ingest.rest_window == 25
        assert config.seed == 0
        assert config.log_level == "WARNING"

    def test_env_beats_file(self, tmp_path, monkeypatch):
        """Test environment values take precedence over the file."""
        path = tmp_path / "config.yaml"
        path.write_text("analysis:\n  threshold: 0.2\n")
        monkeypatch.setenv("PUSHREC_THRESHOLD", "0.3")
        assert Config.load_with_env(str(path)).analysis.threshold == 0.3

    def test_config_path_from_env(self, tmp_path, monkeypatch):
        """Test PUSHREC_CONFIG names the file to load."""
        path = tmp_path / "alt.yaml"
        path.write_text("seed: 99\n")
        monkeypatch.setenv("PUSHREC_CONFIG", str(path))
        assert default_config_path() == str(path)
        assert Config.load_with_env().seed == 99

    def test_missing_file_with_env(self, tmp_path, monkeypatch):
        """Test load_with_env falls back to defaults without a file."""
        monkeypatch.chdir(tmp_path)
        assert Config.load_with_env().seed == 42

    def test_bad_numbers_ignored(self, monkeypatch):
        """Test unparsable numbers fall back to the default."""
        monkeypatch.setenv("PUSHREC_MASS", "heavy")
        monkeypatch.setenv("PUSHREC_REST_WINDOW", "ten")
        assert get_env_float("MASS", 60.0) == 60.0
        assert get_env_int("REST_WINDOW", 10) == 10
        assert Config.from_env().lipm.mass == 60.0


class TestValidate:
    """Tests for validation messages."""

    def test_bad_foot(self):
        """Test an inverted foot is reported."""
        config = Config()
        config.lipm.cop_min = 0.2
        assert any("cop_min" in e for e in config.validate())

    def test_bad_accel_range(self):
        """Test the accelerometer range must be a device setting."""
        config = Config()
        config.ingest.accel_full_scale = 3.0
        assert any("accel_full_scale" in e for e in config.validate())

    @pytest.mark.parametrize("force_range", [(50.0, 10.0), (-1.0, 100.0), (5.0, 5.0)])
    def test_bad_force_range(self, force_range):
        """Test the sensor force range must be a non-empty non-negative interval."""
        config = Config()
        config.ingest.force_range = force_range
        assert any("force_range" in e for e in config.validate())

    def test_bad_height(self):
        """Test the subject height must be positive."""
        config = Config()
        config.lipm.height = 0.0
        assert any("lipm.height" in e for e in config.validate())

    def test_collects_every_error(self):
        """Test several problems are all listed."""
        config = Config()
        config.lipm.controller = "pid"
        config.analysis.baseline = "median"
        config.analysis.weights = {"knee": 0.0, "hip": 0.0, "ankle": 0.0}
        config.smoothing.method = "lowess"
        config.log_level = "LOUD"
        assert len(config.validate()) == 5

    def test_threshold_range(self):
        """Test the indeterminate band must be below 1."""
        config = Config()
        config.analysis.threshold = 1.0
        assert config.validate() != []

    def test_repr(self):
        """Test the summary repr names the foot."""
        assert "foot=[-0.05, 0.15]" in repr(Config())
