"""
Unit Tests for Sensor Ingest Module

Tests trial parsing, count conversion and the converted file format.

Run with:
    pytest tests/test_sensor_ingest.py -v
"""

import sys
import pytest
import numpy as np
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.sensor_ingest import (
    DEFAULT_ANGLE_SCALE,
    ForceSeries,
    Handedness,
    IngestError,
    Joint,
    Side,
    TrialParseError,
    all_conditions,
    channel_key,
    channel_name,
    convert_trial,
    counts_to_angle,
    counts_to_force,
    counts_to_imu,
    detect_push_onset,
    is_converted,
    mirror_trial,
    parse_converted,
    parse_trial,
    push_impulse,
    serialize_converted,
    serialize_trial,
    zero_correct,
)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def trial_text():
    return (FIXTURES / "trial_3rows.csv").read_text()


@pytest.fixture
def trial(trial_text):
    return parse_trial(trial_text)


def replace_line(text: str, lineno: int, new_line: str) -> str:
    lines = text.splitlines()
    lines[lineno - 1] = new_line
    return "\n".join(lines) + "\n"


class TestCountConversion:
    """Tests for count-to-unit conversion."""

    def test_angle_table(self):
        """Test 100 count pairs against hand arithmetic."""
        rng = np.random.default_rng(3)
        thetas = rng.integers(0, 1000, size=100)
        rests = rng.integers(0, 1000, size=100)
        for theta, rest in zip(thetas, rests):
            expected = (int(theta) - int(rest)) * 300.0 / 999.0
            assert counts_to_angle(float(theta), float(rest)) == pytest.approx(expected, abs=1e-12)

    def test_angle_antisymmetry(self):
        """Test swapping count and rest negates the angle."""
        for theta, rest in [(0, 999), (500, 501), (123, 456), (999, 0)]:
            assert counts_to_angle(theta, rest) == -counts_to_angle(rest, theta)

    def test_angle_at_rest_is_zero(self):
        """Test a count equal to the rest count gives zero degrees."""
        assert counts_to_angle(512, 512) == 0.0

    def test_full_span_is_300_degrees(self):
        """Test the full count span maps to the potentiometer span."""
        assert counts_to_angle(999, 0) == pytest.approx(300.0, abs=1e-12)

    def test_custom_scale(self):
        """Test a different degrees-per-count scale."""
        assert counts_to_angle(110, 100, scale=0.5) == pytest.approx(5.0)

    def test_force(self):
        """Test FSR counts to newtons."""
        assert counts_to_force(0) == 0.0
        assert counts_to_force(500) == pytest.approx(4.9, abs=1e-12)
        assert counts_to_force(102) == pytest.approx(0.9996, abs=1e-12)

    @pytest.mark.parametrize("full_scale", [2.0, 4.0, 8.0, 16.0])
    def test_imu_endpoints(self, full_scale):
        """Test IMU counts map symmetrically onto the full scale."""
        assert counts_to_imu(0, full_scale) == pytest.approx(-full_scale)
        assert counts_to_imu(999, full_scale) == pytest.approx(full_scale)
        assert counts_to_imu(499.5, full_scale) == pytest.approx(0.0, abs=1e-12)


class TestChannels:
    """Tests for channel naming."""

    def test_channel_round_trip(self):
        """Test channel_name and channel_key are inverse."""
        for joint in Joint:
            for side in Side:
                assert channel_key(channel_name(joint, side)) == (joint, side)

    def test_channel_name(self):
        """Test column naming."""
        assert channel_name(Joint.KNEE, Side.LEFT) == "lknee"
        assert channel_name(Joint.ANKLE, Side.RIGHT) == "rankle"

    def test_side_other(self):
        """Test the opposite side."""
        assert Side.LEFT.other is Side.RIGHT
        assert Side.RIGHT.other is Side.LEFT


class TestParseTrial:
    """Tests for raw trial parsing."""

    def test_fixture(self, trial):
        """Test the three-row fixture parses."""
        assert len(trial) == 3
        assert trial.label == "T01"
        assert trial.subject_meta.subject_id == "S01"
        assert trial.subject_meta.height == 1.72
        assert trial.subject_meta.handedness is Handedness.RIGHT
        assert trial.condition.code == "open-without-static"
        assert trial.sample_rate == pytest.approx(100.0)

    def test_channel_counts(self, trial):
        """Test a column is read in order."""
        assert list(trial.channel("rhip")) == [500, 501, 502]
        assert list(trial.channel("force")) == [0, 102, 500]

    def test_empty_file(self):
        """Test an empty file is rejected on line 1."""
        with pytest.raises(TrialParseError) as exc:
            parse_trial("")
        assert exc.value.line == 1

    def test_count_out_of_range(self, trial_text):
        """Test an out-of-range count names its row and field."""
        text = replace_line(trial_text, 7, "0.01,501,500,1200,452,550,549,102,999,0,500,500,999,0")
        with pytest.raises(TrialParseError) as exc:
            parse_trial(text)
        assert exc.value.line == 7
        assert exc.value.field == "rknee"
        assert "line 7" in str(exc.value)

    def test_negative_count(self, trial_text):
        """Test negative counts are rejected."""
        text = replace_line(trial_text, 6, "0.0,500,500,450,450,550,550,-1,500,500,530,500,500,500")
        with pytest.raises(TrialParseError) as exc:
            parse_trial(text)
        assert exc.value.field == "force"

    def test_non_monotone_timestamps(self, trial_text):
        """Test timestamps must strictly increase."""
        text = replace_line(trial_text, 8, "0.01,502,499,451,450,551,550,500,0,999,530,500,500,999")
        with pytest.raises(TrialParseError) as exc:
            parse_trial(text)
        assert exc.value.line == 8
        assert exc.value.field == "t"

    def test_bad_handedness(self, trial_text):
        """Test an unknown enumeration value names the field."""
        text = replace_line(trial_text, 2, "S01,1.72,68.0,male,ambi,27.0")
        with pytest.raises(TrialParseError) as exc:
            parse_trial(text)
        assert exc.value.line == 2
        assert exc.value.field == "handedness"

    def test_missing_column(self, trial_text):
        """Test a short row is rejected."""
        text = replace_line(trial_text, 6, "0.0,500,500,450")
        with pytest.raises(TrialParseError) as exc:
            parse_trial(text)
        assert exc.value.line == 6

    def test_wrong_data_header(self, trial_text):
        """Test the column header is checked."""
        text = replace_line(trial_text, 5, "t,a,b")
        with pytest.raises(TrialParseError) as exc:
            parse_trial(text)
        assert exc.value.line == 5

    def test_header_only(self, trial_text):
        """Test a file with no samples parses to an empty trial."""
        text = "\n".join(trial_text.splitlines()[:5]) + "\n"
        trial = parse_trial(text)
        assert len(trial) == 0
        assert trial.sample_rate == 100.0

    def test_serialize_reproduces_file(self, trial_text, trial):
        """Test the raw writer reproduces the fixture text."""
        assert serialize_trial(trial) == trial_text
        assert parse_trial(serialize_trial(trial)) == trial


class TestZeroCorrect:
    """Tests for rest posture estimation."""

    def test_window_mean(self, trial):
        """Test theta0 is the mean over the window."""
        theta0 = zero_correct(trial, 3)
        assert theta0["rhip"] == pytest.approx(501.0)
        assert theta0["lknee"] == pytest.approx(1352.0 / 3)

    def test_single_sample_window(self, trial):
        """Test a one-sample window uses the first row."""
        theta0 = zero_correct(trial, 1)
        assert theta0["rankle"] == 550.0

    def test_window_too_long(self, trial):
        """Test a window longer than the trial is rejected."""
        with pytest.raises(IngestError):
            zero_correct(trial, 4)

    def test_window_zero(self, trial):
        """Test a zero window is rejected."""
        with pytest.raises(IngestError):
            zero_correct(trial, 0)

    def test_empty_trial(self, trial_text):
        """Test zero correction of an empty trial fails."""
        empty = parse_trial("\n".join(trial_text.splitlines()[:5]))
        with pytest.raises(IngestError):
            zero_correct(empty, 1)


class TestConvertTrial:
    """Tests for whole-trial conversion."""

    def test_golden_output(self, trial):
        """Test conversion matches the hand-checked golden file byte for byte."""
        converted = convert_trial(trial, zero_correct(trial, 3))
        golden = (FIXTURES / "trial_3rows_converted.csv").read_text()
        assert serialize_converted(converted) == golden

    def test_rest_window_is_zero_mean(self, trial):
        """Test every joint averages zero over the rest window."""
        converted = convert_trial(trial, zero_correct(trial, 3))
        for series in converted.joints.values():
            assert np.mean(series.angle) == pytest.approx(0.0, abs=1e-12)

    def test_accel_range(self, trial):
        """Test the accelerometer full scale is applied."""
        converted = convert_trial(trial, zero_correct(trial, 3), accel_full_scale=2.0)
        assert converted.imu.accel[1, 0] == pytest.approx(2.0)
        assert converted.imu.accel[1, 1] == pytest.approx(-2.0)

    def test_parse_converted(self):
        """Test the converted format reads back."""
        text = (FIXTURES / "trial_3rows_converted.csv").read_text()
        assert is_converted(text)
        converted = parse_converted(text)
        assert list(converted.t) == [0.0, 0.01, 0.02]
        np.testing.assert_allclose(converted.joint(Joint.HIP, Side.RIGHT).angle, [-0.3003, 0.0, 0.3003])
        np.testing.assert_allclose(converted.force.force, [0.0, 0.9996, 4.9])
        assert converted.imu.gyro.shape == (3, 3)

    def test_force_above_sensor_range(self, trial):
        """Test converted force beyond a narrowed sensor range is rejected."""
        with pytest.raises(IngestError, match="outside"):
            convert_trial(trial, zero_correct(trial, 3), force_range=(0.0, 1.0))

    def test_parse_converted_force_range(self):
        """Test reading a converted file checks force against the given range."""
        text = (FIXTURES / "trial_3rows_converted.csv").read_text()
        with pytest.raises(IngestError):
            parse_converted(text, (0.0, 1.0))
        assert parse_converted(text, (0.0, 5.0)).force.force[2] == pytest.approx(4.9)

    def test_raw_is_not_converted(self, trial_text):
        """Test raw files are told apart from converted ones."""
        assert not is_converted(trial_text)


class TestForceSeries:
    """Tests for the push force series."""

    def test_within_range(self):
        """Test the sensor end points are accepted."""
        series = ForceSeries(t=np.array([0.0, 0.01]), force=np.array([0.0, 100.0]))
        assert series.force_range == (0.0, 100.0)

    @pytest.mark.parametrize("value", [150.0, -1.0, 100.5])
    def test_outside_default_range(self, value):
        """Test force outside 0-100 N is rejected."""
        with pytest.raises(IngestError, match="outside"):
            ForceSeries(t=np.array([0.0, 0.01]), force=np.array([0.0, value]))

    def test_custom_range(self):
        """Test a wider sensor range admits larger forces."""
        series = ForceSeries(t=np.array([0.0]), force=np.array([150.0]), force_range=(0.0, 200.0))
        assert series.force[0] == 150.0

    def test_inverted_range(self):
        """Test an empty sensor range is rejected."""
        with pytest.raises(IngestError):
            ForceSeries(t=np.array([0.0]), force=np.array([1.0]), force_range=(10.0, 5.0))

    def test_length_mismatch(self):
        """Test times and forces must pair up."""
        with pytest.raises(IngestError):
            ForceSeries(t=np.array([0.0, 0.01]), force=np.array([1.0]))


class TestConditions:
    """Tests for the push condition taxonomy."""

    def test_eight_conditions(self):
        """Test there are eight distinct conditions."""
        conditions = all_conditions()
        assert len(conditions) == 8
        assert len({c.code for c in conditions}) == 8

    def test_index_matches_order(self):
        """Test index is the position in the list."""
        for i, condition in enumerate(all_conditions()):
            assert condition.index == i


class TestPushDetection:
    """Tests for push onset and impulse."""

    def test_onset(self):
        """Test the first sample at the force floor is the onset."""
        force = ForceSeries(t=np.arange(5) * 0.01, force=np.array([0.0, 0.5, 1.0, 3.0, 0.0]))
        assert detect_push_onset(force) == 2

    def test_no_push(self):
        """Test a record below the floor has no onset."""
        force = ForceSeries(t=np.arange(3) * 0.01, force=np.array([0.0, 0.9, 0.2]))
        assert detect_push_onset(force) is None
        assert push_impulse(force) == 0.0

    def test_half_sine_impulse(self):
        """Test the impulse of a sampled half-sine."""
        t = np.arange(0, 0.2 + 1e-9, 0.001)
        force = np.where(t <= 0.1, 10.0 * np.sin(np.pi * t / 0.1), 0.0)
        impulse = push_impulse(ForceSeries(t=t, force=force), threshold_n=0.0)
        assert impulse == pytest.approx(2.0 / np.pi, rel=1e-3)


class TestMirror:
    """Tests for left/right mirroring."""

    def test_channels_swapped(self, trial):
        """Test left and right joint columns trade places."""
        mirrored = mirror_trial(trial)
        assert list(mirrored.channel("lhip")) == list(trial.channel("rhip"))
        assert list(mirrored.channel("rknee")) == list(trial.channel("lknee"))
        assert list(mirrored.channel("force")) == list(trial.channel("force"))

    def test_handedness_flipped(self, trial):
        """Test the subject's handedness is mirrored."""
        assert mirror_trial(trial).subject_meta.handedness is Handedness.LEFT

    def test_involution(self, trial):
        """Test mirroring twice restores the trial."""
        assert mirror_trial(mirror_trial(trial)) == trial

    def test_default_scale(self):
        """Test the default scale constant."""
        assert DEFAULT_ANGLE_SCALE == pytest.approx(300.0 / 999.0)
