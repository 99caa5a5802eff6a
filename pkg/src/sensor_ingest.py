"""
Sensor Ingest Module - Trial Files and Unit Conversion

Parses raw trial files of digital counts from the motion-capture rig
and converts them to physical units:

- Joint potentiometers: counts to degrees with zero correction
- Force sensing resistor: counts to newtons
- IMU board: counts to g and deg/s (symmetric linear map)

Trial file layout (UTF-8 CSV):
    # subject,height_m,weight_kg,sex,handedness,age
    S01,1.72,68,male,right,27
    # condition,eyes,lunging,stance
    T01,closed,without,static
    t,rhip,lhip,rknee,lknee,rankle,lankle,force,ax,ay,az,gx,gy,gz
    0.0,500,500,...

Example:
    from src.sensor_ingest import parse_trial, zero_correct, convert_trial

    trial = parse_trial(Path("trial.csv").read_text())
    theta0 = zero_correct(trial, rest_window=10)
    converted = convert_trial(trial, theta0)
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid


logger = logging.getLogger(__name__)

COUNT_MIN = 0
COUNT_MAX = 999

# Potentiometer span is 0-300 degrees over the full count range
DEFAULT_ANGLE_SCALE = 300.0 / 999.0
FORCE_SCALE = 9.8 / 1000.0
DEFAULT_FORCE_RANGE = (0.0, 100.0)  # N, FSR sensor range
DEFAULT_ACCEL_FULL_SCALE = 16.0
DEFAULT_GYRO_FULL_SCALE = 2000.0
DEFAULT_REST_WINDOW = 10
NOMINAL_SAMPLE_RATE = 100.0

JOINT_CHANNELS = ("rhip", "lhip", "rknee", "lknee", "rankle", "lankle")
ACCEL_CHANNELS = ("ax", "ay", "az")
GYRO_CHANNELS = ("gx", "gy", "gz")
DATA_HEADER = ("t",) + JOINT_CHANNELS + ("force",) + ACCEL_CHANNELS + GYRO_CHANNELS

SUBJECT_HEADER = "# subject,height_m,weight_kg,sex,handedness,age"
CONDITION_HEADER = "# condition,eyes,lunging,stance"

CONVERTED_HEADER = (
    ("t",)
    + tuple(f"{name}_deg" for name in JOINT_CHANNELS)
    + ("force_N",)
    + tuple(f"{name}_g" for name in ACCEL_CHANNELS)
    + tuple(f"{name}_dps" for name in GYRO_CHANNELS)
)


class IngestError(Exception):
    """Base exception for trial ingestion errors."""
    pass


class TrialParseError(IngestError):
    """Raised when a trial file is malformed; names the line and field."""

    def __init__(self, message: str, line: int, field: str = ""):
        self.line = line
        self.field = field
        location = f"line {line}" + (f", field '{field}'" if field else "")
        super().__init__(f"{location}: {message}")


class Sex(str, Enum):
    MALE = "male"
    FEMALE = "female"


class Handedness(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    UNKNOWN = "unknown"


class Eyes(str, Enum):
    OPEN = "open"
    CLOSED = "closed"


class Lunging(str, Enum):
    WITH = "with"
    WITHOUT = "without"


class Stance(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class Joint(str, Enum):
    HIP = "hip"
    KNEE = "knee"
    ANKLE = "ankle"


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


def channel_name(joint: Joint, side: Side) -> str:
    """Column name of a joint potentiometer, e.g. 'lknee'."""
    return f"{side.value[0]}{joint.value}"


def channel_key(name: str) -> Tuple[Joint, Side]:
    """Inverse of channel_name."""
    side = Side.LEFT if name[0] == "l" else Side.RIGHT
    return Joint(name[1:]), side


@dataclass(frozen=True)
class SubjectMeta:
    """Subject anthropometrics and lateral dominance."""

    height: float  # m
    weight: float  # kg
    sex: Sex
    handedness: Handedness
    age: float  # years
    subject_id: str = "S00"

    def __post_init__(self):
        for name in ("height", "weight", "age"):
            if not getattr(self, name) > 0:
                raise IngestError(f"{name} must be positive")


@dataclass(frozen=True)
class PushCondition:
    """One of the eight push conditions."""

    eyes: Eyes
    lunging: Lunging
    stance: Stance

    @property
    def code(self) -> str:
        """Stable label such as 'closed-without-static'."""
        return f"{self.eyes.value}-{self.lunging.value}-{self.stance.value}"

    @property
    def index(self) -> int:
        """Position in all_conditions()."""
        return all_conditions().index(self)


def all_conditions() -> List[PushCondition]:
    """The eight eyes × lunging × stance combinations in a fixed order."""
    return [
        PushCondition(eyes, lunging, stance)
        for eyes, lunging, stance in product(Eyes, Lunging, Stance)
    ]


@dataclass(frozen=True)
class RawSample:
    """One row of counts."""

    t: float
    joint_counts: Tuple[int, int, int, int, int, int]  # JOINT_CHANNELS order
    force_count: int
    accel_counts: Tuple[int, int, int]
    gyro_counts: Tuple[int, int, int]

    def counts(self) -> Tuple[int, ...]:
        """All count channels in file column order."""
        return self.joint_counts + (self.force_count,) + self.accel_counts + self.gyro_counts


@dataclass(frozen=True)
class RawTrial:
    """A parsed trial file."""

    subject_meta: SubjectMeta
    condition: PushCondition
    samples: Tuple[RawSample, ...]
    label: str = "T00"

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def sample_rate(self) -> float:
        """Hz, from the median timestamp spacing."""
        if len(self.samples) < 2:
            return NOMINAL_SAMPLE_RATE
        return float(1.0 / np.median(np.diff(self.times())))

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    def channel(self, name: str) -> np.ndarray:
        """Counts of one column as an integer array."""
        column = DATA_HEADER.index(name) - 1
        return np.array([s.counts()[column] for s in self.samples], dtype=int)


@dataclass(frozen=True)
class JointSeries:
    """Zero-corrected joint angle (degrees, change from rest)."""

    joint: Joint
    side: Side
    t: np.ndarray
    angle: np.ndarray

    def __post_init__(self):
        if len(self.t) != len(self.angle):
            raise IngestError("t and angle lengths differ")
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise IngestError("t must be strictly increasing")


@dataclass(frozen=True)
class ForceSeries:
    """Push force in newtons, within the sensor range."""

    t: np.ndarray
    force: np.ndarray
    force_range: Tuple[float, float] = field(default=DEFAULT_FORCE_RANGE, compare=False, repr=False)

    def __post_init__(self):
        if len(self.t) != len(self.force):
            raise IngestError("t and force lengths differ")
        low, high = self.force_range
        if low >= high:
            raise IngestError(f"invalid force range [{low}, {high}]")
        outside = np.nonzero((np.asarray(self.force) < low) | (np.asarray(self.force) > high))[0]
        if len(outside):
            i = int(outside[0])
            raise IngestError(
                f"force {self.force[i]:.6g} N at t={self.t[i]:.6g} s outside [{low:g}, {high:g}] N"
            )


@dataclass(frozen=True)
class ImuSeries:
    """Accelerometer (g) and gyro (deg/s) rows, shape (n, 3) each."""

    t: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray


@dataclass(frozen=True)
class ConvertedTrial:
    """A trial in physical units."""

    subject_meta: SubjectMeta
    condition: PushCondition
    joints: Dict[Tuple[Joint, Side], JointSeries]
    force: ForceSeries
    imu: ImuSeries
    label: str = "T00"

    @property
    def t(self) -> np.ndarray:
        return self.force.t

    def joint(self, joint: Joint, side: Side) -> JointSeries:
        return self.joints[(joint, side)]


# =============================================================================
# Conversions
# =============================================================================

def counts_to_angle(theta: float, theta0: float, scale: float = DEFAULT_ANGLE_SCALE) -> float:
    """
    Convert a potentiometer count to degrees of change from rest.

    Args:
        theta: Count while the push is applied
        theta0: Rest count (may be a window mean)
        scale: Degrees per count

    Returns:
        (theta - theta0) * scale; negative when flexed past rest
    """
    return (theta - theta0) * scale


def counts_to_force(f: float) -> float:
    """FSR count to newtons."""
    return f * FORCE_SCALE


def counts_to_imu(count: float, full_scale: float) -> float:
    """Map count 0 → -full_scale and 999 → +full_scale."""
    return (2.0 * count / COUNT_MAX - 1.0) * full_scale


def zero_correct(trial: RawTrial, rest_window: int = DEFAULT_REST_WINDOW) -> Dict[str, float]:
    """
    Estimate the rest count Θ0 of every joint channel.

    Args:
        trial: Parsed trial
        rest_window: Number of leading samples averaged

    Returns:
        {channel name: mean count over the rest window}

    Raises:
        IngestError: If the trial is empty or the window does not fit
    """
    if len(trial) == 0:
        raise IngestError("cannot zero-correct an empty trial")
    if rest_window < 1 or rest_window > len(trial):
        raise IngestError(
            f"rest window {rest_window} outside [1, {len(trial)}]"
        )

    theta0 = {
        name: float(np.mean(trial.channel(name)[:rest_window]))
        for name in JOINT_CHANNELS
    }
    logger.debug(f"Theta0 over {rest_window} samples: {theta0}")
    return theta0


def convert_trial(
    trial: RawTrial,
    theta0: Dict[str, float],
    angle_scale: float = DEFAULT_ANGLE_SCALE,
    accel_full_scale: float = DEFAULT_ACCEL_FULL_SCALE,
    gyro_full_scale: float = DEFAULT_GYRO_FULL_SCALE,
    force_range: Tuple[float, float] = DEFAULT_FORCE_RANGE,
) -> ConvertedTrial:
    """
    Convert every channel of a trial to physical units.

    Args:
        trial: Parsed trial
        theta0: Rest counts per joint channel (see zero_correct)
        angle_scale: Degrees per count
        accel_full_scale: Accelerometer range in g
        gyro_full_scale: Gyro range in deg/s
        force_range: Sensor range in N; converted force outside it is an error

    Returns:
        ConvertedTrial with six joint series, force and IMU series
    """
    t = trial.times()
    joints = {}
    for name in JOINT_CHANNELS:
        counts = trial.channel(name).astype(float)
        angle = np.array([counts_to_angle(c, theta0[name], angle_scale) for c in counts])
        joint, side = channel_key(name)
        joints[(joint, side)] = JointSeries(joint=joint, side=side, t=t, angle=angle)

    force = ForceSeries(
        t=t,
        force=np.array([counts_to_force(c) for c in trial.channel("force")], dtype=float),
        force_range=force_range,
    )

    accel = np.column_stack(
        [[counts_to_imu(c, accel_full_scale) for c in trial.channel(n)] for n in ACCEL_CHANNELS]
    ) if len(trial) else np.zeros((0, 3))
    gyro = np.column_stack(
        [[counts_to_imu(c, gyro_full_scale) for c in trial.channel(n)] for n in GYRO_CHANNELS]
    ) if len(trial) else np.zeros((0, 3))

    logger.debug(f"Converted {len(trial)} samples of trial {trial.label}")
    return ConvertedTrial(
        subject_meta=trial.subject_meta,
        condition=trial.condition,
        joints=joints,
        force=force,
        imu=ImuSeries(t=t, accel=accel, gyro=gyro),
        label=trial.label,
    )


def detect_push_onset(force: ForceSeries, threshold_n: float = 1.0) -> Optional[int]:
    """Index of the first sample at or above the FSR sensitivity floor."""
    above = np.nonzero(force.force >= threshold_n)[0]
    if len(above) == 0:
        return None
    return int(above[0])


def push_impulse(force: ForceSeries, threshold_n: float = 1.0) -> float:
    """Trapezoidal impulse (N·s) of the force above the sensitivity floor."""
    if len(force.t) < 2:
        return 0.0
    active = np.where(force.force >= threshold_n, force.force, 0.0)
    return float(trapezoid(active, force.t))


def mirror_trial(trial: RawTrial) -> RawTrial:
    """Swap every left/right joint channel and mirror the handedness."""
    swap = [JOINT_CHANNELS.index(n[0].translate(str.maketrans("lr", "rl")) + n[1:])
            for n in JOINT_CHANNELS]
    samples = tuple(
        replace(s, joint_counts=tuple(s.joint_counts[i] for i in swap))
        for s in trial.samples
    )
    handedness = {
        Handedness.LEFT: Handedness.RIGHT,
        Handedness.RIGHT: Handedness.LEFT,
    }.get(trial.subject_meta.handedness, Handedness.UNKNOWN)
    meta = replace(trial.subject_meta, handedness=handedness)
    return replace(trial, subject_meta=meta, samples=samples)


# =============================================================================
# File format
# =============================================================================

def _split(line: str) -> List[str]:
    return [cell.strip() for cell in line.split(",")]


def _parse_enum(enum_cls, value: str, line: int, field: str):
    try:
        return enum_cls(value.lower())
    except ValueError:
        choices = ", ".join(e.value for e in enum_cls)
        raise TrialParseError(f"'{value}' is not one of {choices}", line, field)


def _parse_float(value: str, line: int, field: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise TrialParseError(f"'{value}' is not a number", line, field)
    if not np.isfinite(number):
        raise TrialParseError(f"'{value}' is not finite", line, field)
    return number


def _parse_header(lines: Sequence[str]) -> Tuple[SubjectMeta, PushCondition, str]:
    if len(lines) < 4:
        raise TrialParseError("missing metadata lines", len(lines) + 1)

    if _split(lines[0]) != _split(SUBJECT_HEADER):
        raise TrialParseError(f"expected '{SUBJECT_HEADER}'", 1)
    values = _split(lines[1])
    if len(values) != 6:
        raise TrialParseError(f"expected 6 subject fields, got {len(values)}", 2)
    subject_id, height, weight, sex, handedness, age = values
    try:
        meta = SubjectMeta(
            height=_parse_float(height, 2, "height_m"),
            weight=_parse_float(weight, 2, "weight_kg"),
            sex=_parse_enum(Sex, sex, 2, "sex"),
            handedness=_parse_enum(Handedness, handedness, 2, "handedness"),
            age=_parse_float(age, 2, "age"),
            subject_id=subject_id,
        )
    except TrialParseError:
        raise
    except IngestError as e:
        raise TrialParseError(str(e), 2)

    if _split(lines[2]) != _split(CONDITION_HEADER):
        raise TrialParseError(f"expected '{CONDITION_HEADER}'", 3)
    values = _split(lines[3])
    if len(values) != 4:
        raise TrialParseError(f"expected 4 condition fields, got {len(values)}", 4)
    label, eyes, lunging, stance = values
    condition = PushCondition(
        eyes=_parse_enum(Eyes, eyes, 4, "eyes"),
        lunging=_parse_enum(Lunging, lunging, 4, "lunging"),
        stance=_parse_enum(Stance, stance, 4, "stance"),
    )
    return meta, condition, label


def _content_lines(text: str) -> List[str]:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def parse_trial(text: str) -> RawTrial:
    """
    Parse the content of a raw trial file.

    Args:
        text: File content

    Returns:
        RawTrial with validated counts and timestamps

    Raises:
        TrialParseError: On malformed header, non-monotone timestamps
            or out-of-range counts
    """
    lines = _content_lines(text)
    if not lines:
        raise TrialParseError("empty trial file", 1)

    meta, condition, label = _parse_header(lines)

    if len(lines) < 5 or tuple(_split(lines[4])) != DATA_HEADER:
        raise TrialParseError(f"expected header '{','.join(DATA_HEADER)}'", 5)

    samples = []
    previous_t = None
    for lineno, line in enumerate(lines[5:], start=6):
        cells = _split(line)
        if len(cells) != len(DATA_HEADER):
            raise TrialParseError(
                f"expected {len(DATA_HEADER)} columns, got {len(cells)}", lineno
            )

        t = _parse_float(cells[0], lineno, "t")
        if previous_t is not None and t <= previous_t:
            raise TrialParseError("timestamps must be strictly increasing", lineno, "t")
        previous_t = t

        counts = []
        for name, cell in zip(DATA_HEADER[1:], cells[1:]):
            try:
                count = int(cell)
            except ValueError:
                raise TrialParseError(f"'{cell}' is not an integer count", lineno, name)
            if count < COUNT_MIN or count > COUNT_MAX:
                raise TrialParseError(
                    f"count {count} outside [{COUNT_MIN}, {COUNT_MAX}]", lineno, name
                )
            counts.append(count)

        samples.append(RawSample(
            t=t,
            joint_counts=tuple(counts[0:6]),
            force_count=counts[6],
            accel_counts=tuple(counts[7:10]),
            gyro_counts=tuple(counts[10:13]),
        ))

    logger.info(f"Parsed trial {label}: {len(samples)} samples, condition {condition.code}")
    return RawTrial(subject_meta=meta, condition=condition, samples=tuple(samples), label=label)


def _format_header(meta: SubjectMeta, condition: PushCondition, label: str) -> List[str]:
    return [
        SUBJECT_HEADER,
        ",".join([
            meta.subject_id, repr(meta.height), repr(meta.weight),
            meta.sex.value, meta.handedness.value, repr(meta.age),
        ]),
        CONDITION_HEADER,
        ",".join([label, condition.eyes.value, condition.lunging.value, condition.stance.value]),
    ]


def serialize_trial(trial: RawTrial) -> str:
    """Inverse of parse_trial."""
    lines = _format_header(trial.subject_meta, trial.condition, trial.label)
    lines.append(",".join(DATA_HEADER))
    for s in trial.samples:
        lines.append(",".join([repr(s.t)] + [str(c) for c in s.counts()]))
    return "\n".join(lines) + "\n"


def serialize_converted(converted: ConvertedTrial) -> str:
    """Converted trial in the raw layout with unit-suffixed columns."""
    lines = _format_header(converted.subject_meta, converted.condition, converted.label)
    lines.append(",".join(CONVERTED_HEADER))

    columns = [converted.joints[channel_key(n)].angle for n in JOINT_CHANNELS]
    columns.append(converted.force.force)
    columns.extend(converted.imu.accel[:, i] for i in range(3))
    columns.extend(converted.imu.gyro[:, i] for i in range(3))

    for row, t in enumerate(converted.t):
        lines.append(",".join([repr(float(t))] + [f"{c[row]:.6f}" for c in columns]))
    return "\n".join(lines) + "\n"


def parse_converted(text: str, force_range: Tuple[float, float] = DEFAULT_FORCE_RANGE) -> ConvertedTrial:
    """Parse a file written by serialize_converted."""
    lines = _content_lines(text)
    if not lines:
        raise TrialParseError("empty converted file", 1)

    meta, condition, label = _parse_header(lines)
    if len(lines) < 5 or tuple(_split(lines[4])) != CONVERTED_HEADER:
        raise TrialParseError(f"expected header '{','.join(CONVERTED_HEADER)}'", 5)

    rows = []
    for lineno, line in enumerate(lines[5:], start=6):
        cells = _split(line)
        if len(cells) != len(CONVERTED_HEADER):
            raise TrialParseError(
                f"expected {len(CONVERTED_HEADER)} columns, got {len(cells)}", lineno
            )
        row = [_parse_float(c, lineno, name) for name, c in zip(CONVERTED_HEADER, cells)]
        if rows and row[0] <= rows[-1][0]:
            raise TrialParseError("timestamps must be strictly increasing", lineno, "t")
        rows.append(row)

    data = np.array(rows, dtype=float).reshape(-1, len(CONVERTED_HEADER))
    t = data[:, 0]
    joints = {}
    for i, name in enumerate(JOINT_CHANNELS, start=1):
        joint, side = channel_key(name)
        joints[(joint, side)] = JointSeries(joint=joint, side=side, t=t, angle=data[:, i])

    return ConvertedTrial(
        subject_meta=meta,
        condition=condition,
        joints=joints,
        force=ForceSeries(t=t, force=data[:, 7], force_range=force_range),
        imu=ImuSeries(t=t, accel=data[:, 8:11], gyro=data[:, 11:14]),
        label=label,
    )


def is_converted(text: str) -> bool:
    """True when the data header carries unit suffixes."""
    lines = _content_lines(text)
    return len(lines) >= 5 and lines[4].strip().startswith("t,rhip_deg")
