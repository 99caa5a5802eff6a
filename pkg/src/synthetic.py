"""
Synthetic Trials - Fixture Generator

Produces raw trial files with known structure for tests and demos:
constant posture (static stance) or the ideal gait (dynamic stance), a
damped push response whose stronger side is opposite the subject's
handedness, a half-sine push force, quantized counts and seeded noise.

Example:
    from src.synthetic import PushSpec, synthesize_trial

    trial = synthesize_trial(meta, condition, PushSpec(onset=1.5, impulse=0.5), noise_rms=1.0, seed=7)
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gait import DEFAULT_CYCLE_DURATION, IdealGait, ideal_gait
from .sensor_ingest import (
    ACCEL_CHANNELS,
    COUNT_MAX,
    COUNT_MIN,
    DEFAULT_ACCEL_FULL_SCALE,
    DEFAULT_ANGLE_SCALE,
    DEFAULT_GYRO_FULL_SCALE,
    FORCE_SCALE,
    GYRO_CHANNELS,
    JOINT_CHANNELS,
    Handedness,
    Joint,
    PushCondition,
    RawSample,
    RawTrial,
    Side,
    Stance,
    SubjectMeta,
    channel_key,
)


logger = logging.getLogger(__name__)

REST_COUNTS = {Joint.HIP: 500, Joint.KNEE: 450, Joint.ANKLE: 550}
HIP_SHARE = 0.3
RESPONSE_GAIN = 30.0  # degrees of peak deflection per N·s
RESPONSE_DECAY = 0.6  # s
RESPONSE_FREQUENCY = 1.2  # Hz
ACTIVE_SIDE_FACTOR = 2.0
GRAVITY = 9.8


@dataclass(frozen=True)
class PushSpec:
    """
    A horizontal push.

    knee_share splits the non-hip part of the response between knee and
    ankle; the hip always takes HIP_SHARE.
    """

    onset: float = 1.5  # s
    impulse: float = 0.5  # N·s
    duration: float = 0.1  # s
    knee_share: float = 0.7

    def __post_init__(self):
        if self.onset < 0 or self.impulse < 0 or self.duration <= 0:
            raise ValueError("push onset and impulse must be non-negative, duration positive")
        if not 0.0 <= self.knee_share <= 1.0:
            raise ValueError("knee_share must be within [0, 1]")

    def share(self, joint: Joint) -> float:
        if joint is Joint.HIP:
            return HIP_SHARE
        rest = 1.0 - HIP_SHARE
        return rest * self.knee_share if joint is Joint.KNEE else rest * (1.0 - self.knee_share)

    def force(self, t: np.ndarray) -> np.ndarray:
        """Half-sine force (N) whose integral equals the impulse."""
        u = (t - self.onset) / self.duration
        peak = self.impulse * np.pi / (2.0 * self.duration)
        return np.where((u >= 0) & (u <= 1), peak * np.sin(np.pi * np.clip(u, 0, 1)), 0.0)

    def response(self, t: np.ndarray) -> np.ndarray:
        """Unit-gain damped oscillation starting at the onset."""
        tau = t - self.onset
        wave = np.exp(-tau / RESPONSE_DECAY) * np.sin(2 * np.pi * RESPONSE_FREQUENCY * tau)
        return np.where(tau >= 0, wave, 0.0)


def side_factor(handedness: Handedness, side: Side) -> float:
    """Response gain of a side; the side opposite the handedness works harder."""
    if handedness is Handedness.RIGHT and side is Side.LEFT:
        return ACTIVE_SIDE_FACTOR
    if handedness is Handedness.LEFT and side is Side.RIGHT:
        return ACTIVE_SIDE_FACTOR
    return 1.0


def _quantize(values: np.ndarray, name: str) -> np.ndarray:
    counts = np.rint(values)
    clipped = np.clip(counts, COUNT_MIN, COUNT_MAX)
    if np.any(clipped != counts):
        logger.warning(f"Synthetic channel {name} clipped to [{COUNT_MIN}, {COUNT_MAX}]")
    return clipped.astype(int)


def _imu_counts(value: np.ndarray, full_scale: float) -> np.ndarray:
    return (value / full_scale + 1.0) / 2.0 * COUNT_MAX


def synthesize_trial(
    meta: SubjectMeta,
    condition: PushCondition,
    push: Optional[PushSpec] = None,
    noise_rms: float = 0.0,
    seed: int = 0,
    duration: float = 4.0,
    sample_rate: float = 100.0,
    label: str = "T00",
    gait: Optional[IdealGait] = None,
    angle_scale: float = DEFAULT_ANGLE_SCALE,
    accel_full_scale: float = DEFAULT_ACCEL_FULL_SCALE,
    gyro_full_scale: float = DEFAULT_GYRO_FULL_SCALE,
) -> RawTrial:
    """
    Generate a raw trial.

    Args:
        meta: Subject; handedness sets the more active side
        condition: Push condition; dynamic stance adds the ideal gait
        push: Push to apply, or None
        noise_rms: Additive Gaussian noise in counts
        seed: Seed for the noise generator
        duration: Record length (s)
        sample_rate: Hz
        label: Trial label
        gait: Reference gait for dynamic stance (default ideal_gait())

    Returns:
        RawTrial; identical for identical arguments
    """
    if duration <= 0 or sample_rate <= 0:
        raise ValueError("duration and sample rate must be positive")
    if noise_rms < 0:
        raise ValueError("noise_rms must be non-negative")

    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    gait = gait or ideal_gait(DEFAULT_CYCLE_DURATION)
    walking = condition.stance is Stance.DYNAMIC

    response = push.response(t) if push else np.zeros(n)
    columns = {}
    for name in JOINT_CHANNELS:
        joint, side = channel_key(name)
        angle = np.zeros(n)
        if walking:
            angle += gait.at(joint, t, side)
        if push:
            gain = RESPONSE_GAIN * push.impulse * push.share(joint) * side_factor(meta.handedness, side)
            angle += gain * response
        columns[name] = REST_COUNTS[joint] + angle / angle_scale

    force = push.force(t) if push else np.zeros(n)
    columns["force"] = force / FORCE_SCALE

    accel = {
        "ax": force / (meta.weight * GRAVITY),
        "ay": np.zeros(n),
        "az": np.ones(n),
    }
    pitch = np.mean([columns[c] for c in ("rhip", "lhip")], axis=0) * angle_scale
    gyro = {
        "gx": np.zeros(n),
        "gy": np.gradient(pitch, t) if n > 1 else np.zeros(n),
        "gz": np.zeros(n),
    }
    for name in ACCEL_CHANNELS:
        columns[name] = _imu_counts(accel[name], accel_full_scale)
    for name in GYRO_CHANNELS:
        columns[name] = _imu_counts(gyro[name], gyro_full_scale)

    order = JOINT_CHANNELS + ("force",) + ACCEL_CHANNELS + GYRO_CHANNELS
    noise = rng.normal(0.0, noise_rms, size=(len(order), n)) if noise_rms > 0 else np.zeros((len(order), n))
    counts = {
        name: _quantize(columns[name] + noise[i], name)
        for i, name in enumerate(order)
    }

    samples = tuple(
        RawSample(
            t=float(t[k]),
            joint_counts=tuple(int(counts[c][k]) for c in JOINT_CHANNELS),
            force_count=int(counts["force"][k]),
            accel_counts=tuple(int(counts[c][k]) for c in ACCEL_CHANNELS),
            gyro_counts=tuple(int(counts[c][k]) for c in GYRO_CHANNELS),
        )
        for k in range(n)
    )
    logger.debug(f"Synthesized {n} samples for {condition.code}, seed {seed}")
    return RawTrial(subject_meta=meta, condition=condition, samples=samples, label=label)
