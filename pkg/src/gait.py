"""
Gait Analysis Module - Joint Deviation, Asymmetry and Handedness

Turns converted trials into the recovery analytics:

- IdealGait: reference hip/knee/ankle waveforms over one gait cycle
- deviation_metrics: rms / peak deviation of a joint from a baseline
- asymmetry_index / infer_handedness: left-right activity comparison
- knee_ankle_tradeoff: knee versus ankle activity across sides and trials
- cop_asymmetry: left versus right foot force
- joint_torque_profile: chain torques implied by the measured angles

Example:
    from src.gait import analyze_trial

    analysis = analyze_trial(converted)
    print(analysis.verdict.inferred, analysis.verdict.confidence)
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import find_peaks
from scipy.stats import rankdata

from .dynamics import JointState, LinkChain, inverse_dynamics
from .sensor_ingest import (
    DEFAULT_REST_WINDOW,
    ConvertedTrial,
    ForceSeries,
    Joint,
    JointSeries,
    PushCondition,
    Side,
    SubjectMeta,
    detect_push_onset,
    push_impulse,
)
from .smoothing import SmoothingMethod, eval_spline, fit_natural_cubic_spline, smoother, uniform_grid


logger = logging.getLogger(__name__)

DEFAULT_CYCLE_DURATION = 1.2  # s
DEFAULT_AMPLITUDES = {Joint.HIP: 15.0, Joint.KNEE: 30.0, Joint.ANKLE: 10.0}  # degrees
DEFAULT_WEIGHTS = {Joint.KNEE: 0.5, Joint.HIP: 0.3, Joint.ANKLE: 0.2}
DEFAULT_THRESHOLD = 0.1
PEAK_PROMINENCE = 0.1  # fraction of the waveform range
CYCLE_SAMPLES = 400

# Lobe shapes as (centre phase, width, relative height)
KNEE_LOBES = ((0.15, 0.08, 0.35), (0.70, 0.12, 1.0))
ANKLE_LOBES = ((0.40, 0.035, 0.6), (0.65, 0.035, 1.0))

# Chain order used for torque profiles: shank, thigh, trunk
CHAIN_JOINTS = (Joint.ANKLE, Joint.KNEE, Joint.HIP)

# Left leg runs half a cycle behind the right
SIDE_PHASE = {Side.RIGHT: 0.0, Side.LEFT: 0.5}


class AnalysisError(Exception):
    """Raised when an analysis input cannot be resolved."""
    pass


class Baseline(str, Enum):
    PRE_PUSH = "pre_push"
    IDEAL = "ideal"


class InferredHand(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    INDETERMINATE = "indeterminate"


# =============================================================================
# Ideal gait
# =============================================================================

def _lobe(phase: np.ndarray, centre: float, width: float) -> np.ndarray:
    """Gaussian lobe wrapped onto the unit cycle."""
    total = np.zeros_like(phase)
    for shift in (-1.0, 0.0, 1.0):
        total += np.exp(-((phase - centre + shift) ** 2) / (2 * width ** 2))
    return total


@dataclass(frozen=True)
class IdealGait:
    """Reference joint waveforms over one normalized cycle."""

    cycle_duration: float
    amplitudes: Dict[Joint, float]

    def waveform(self, joint: Joint, phase) -> np.ndarray:
        """Waveform value (degrees) at cycle phase(s) in [0, 1)."""
        phase = np.mod(np.asarray(phase, dtype=float), 1.0)
        amplitude = self.amplitudes.get(joint, 0.0)
        if joint is Joint.HIP:
            shape = np.sin(2 * np.pi * phase)
        else:
            lobes = KNEE_LOBES if joint is Joint.KNEE else ANKLE_LOBES
            shape = sum(h * _lobe(phase, c, w) for c, w, h in lobes)
        return amplitude * shape

    def at(self, joint: Joint, t, side: Side = Side.RIGHT) -> np.ndarray:
        """Waveform at absolute times t for one side."""
        phase = np.asarray(t, dtype=float) / self.cycle_duration + SIDE_PHASE[side]
        return self.waveform(joint, phase)

    def sample(self, joint: Joint, n: int = CYCLE_SAMPLES) -> Tuple[np.ndarray, np.ndarray]:
        """(phase, values) over one cycle, endpoint excluded."""
        phase = np.arange(n) / n
        return phase, self.waveform(joint, phase)


def ideal_gait(
    cycle_duration: float = DEFAULT_CYCLE_DURATION,
    amplitudes: Optional[Mapping[Union[Joint, str], float]] = None,
) -> IdealGait:
    """
    Build the reference gait.

    hip is one sinusoid per cycle, knee two lobes of unequal height and
    ankle two narrow lobes.

    Args:
        cycle_duration: Seconds per gait cycle
        amplitudes: Degrees per joint (defaults: hip 15, knee 30, ankle 10)

    Raises:
        AnalysisError: For a non-positive duration or negative amplitude
    """
    if cycle_duration <= 0:
        raise AnalysisError("cycle duration must be positive")
    resolved = dict(DEFAULT_AMPLITUDES)
    if amplitudes is not None:
        resolved = {Joint(k): float(v) for k, v in amplitudes.items()}
        for joint in Joint:
            resolved.setdefault(joint, 0.0)
    if any(a < 0 for a in resolved.values()):
        raise AnalysisError("amplitudes must be non-negative")
    return IdealGait(cycle_duration=cycle_duration, amplitudes=resolved)


def count_cycle_peaks(values: Sequence[float], prominence: float = PEAK_PROMINENCE) -> int:
    """
    Count maxima in one periodic cycle.

    The cycle is tiled three times so peaks at the wrap are seen once; only
    peaks in the middle copy are counted.

    Args:
        values: One cycle, uniformly sampled, endpoint excluded
        prominence: Minimum prominence as a fraction of the value range
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n == 0:
        return 0
    span = float(values.max() - values.min())
    if span == 0:
        return 0
    peaks, _ = find_peaks(np.tile(values, 3), prominence=prominence * span)
    return int(np.sum((peaks >= n) & (peaks < 2 * n)))


# =============================================================================
# Deviation metrics
# =============================================================================

@dataclass(frozen=True)
class DeviationMetrics:
    """Deviation of one joint-side from its baseline (degrees)."""

    joint: Joint
    side: Side
    rms_deviation: float
    peak_deviation: float
    activity_score: float

    def __post_init__(self):
        for name in ("rms_deviation", "peak_deviation", "activity_score"):
            if getattr(self, name) < 0:
                raise AnalysisError(f"{name} must be non-negative")


BaselineSpec = Union[str, Baseline, IdealGait, JointSeries]


def _series_rate(t: np.ndarray) -> float:
    if len(t) < 2:
        return 1.0
    return float(1.0 / np.median(np.diff(t)))


def _rms(values: np.ndarray) -> float:
    return float(np.sqrt(np.mean(values ** 2)))


def deviation_metrics(
    series: JointSeries,
    baseline: BaselineSpec = Baseline.PRE_PUSH,
    rest_window: int = DEFAULT_REST_WINDOW,
    rate: Optional[float] = None,
) -> DeviationMetrics:
    """
    Compare a joint series with a baseline on a shared uniform grid.

    Args:
        series: Joint angle series
        baseline: 'pre_push' (mean of the leading rest window), 'ideal'
            (default IdealGait), an IdealGait, or another JointSeries
        rest_window: Leading samples forming the pre-push baseline
        rate: Grid rate in Hz (default: the series' own rate)

    Returns:
        DeviationMetrics; activity_score is always measured from the
        pre-push baseline

    Raises:
        AnalysisError: Empty series, bad rest window or unknown baseline
    """
    n = len(series.t)
    if n == 0:
        raise AnalysisError("cannot analyse an empty series")
    if rest_window < 1 or rest_window > n:
        raise AnalysisError(f"baseline window {rest_window} longer than series of {n} samples")

    t = np.asarray(series.t, dtype=float)
    rate = rate or _series_rate(t)
    grid = uniform_grid(float(t[0]), float(t[-1]), rate)
    values = np.asarray(smoother(t, series.angle, SmoothingMethod("spline"))(grid), dtype=float)
    rest_level = float(np.mean(series.angle[:rest_window]))

    if isinstance(baseline, str) and not isinstance(baseline, Baseline):
        try:
            baseline = Baseline(baseline)
        except ValueError:
            raise AnalysisError(f"unknown baseline '{baseline}'")
    if baseline is Baseline.IDEAL:
        baseline = ideal_gait()

    if baseline is Baseline.PRE_PUSH:
        reference = np.full_like(values, rest_level)
    elif isinstance(baseline, IdealGait):
        reference = baseline.at(series.joint, grid, series.side)
    elif isinstance(baseline, JointSeries):
        if len(baseline.t) == 0:
            raise AnalysisError("baseline series is empty")
        fitted = smoother(baseline.t, baseline.angle, SmoothingMethod("spline"))
        reference = np.asarray(fitted(grid), dtype=float)
    else:
        raise AnalysisError(f"unresolvable baseline {baseline!r}")

    diff = values - reference
    return DeviationMetrics(
        joint=series.joint,
        side=series.side,
        rms_deviation=_rms(diff),
        peak_deviation=float(np.max(np.abs(diff))),
        activity_score=_rms(values - rest_level),
    )


# =============================================================================
# Asymmetry and handedness
# =============================================================================

def _normalized_difference(left: float, right: float) -> float:
    total = left + right
    if total == 0:
        return 0.0
    return (left - right) / total


@dataclass(frozen=True)
class AsymmetryIndex:
    """Per-joint (left - right) / (left + right) activity."""

    values: Dict[Joint, float]

    def __getitem__(self, joint: Joint) -> float:
        return self.values[joint]

    def negated(self) -> "AsymmetryIndex":
        return AsymmetryIndex({j: -v for j, v in self.values.items()})


def asymmetry_index(
    left: Mapping[Joint, DeviationMetrics],
    right: Mapping[Joint, DeviationMetrics],
) -> AsymmetryIndex:
    """Normalized left/right activity difference for every joint in both maps."""
    return AsymmetryIndex({
        joint: _normalized_difference(left[joint].activity_score, right[joint].activity_score)
        for joint in Joint
        if joint in left and joint in right
    })


@dataclass(frozen=True)
class HandednessVerdict:
    inferred: InferredHand
    confidence: float
    aggregate: float


def _resolve_weights(weights: Optional[Mapping[Union[Joint, str], float]]) -> Dict[Joint, float]:
    if weights is None:
        return dict(DEFAULT_WEIGHTS)
    try:
        resolved = {Joint(k): float(v) for k, v in weights.items()}
    except ValueError as e:
        raise AnalysisError(f"bad joint weight: {e}")
    if any(w < 0 for w in resolved.values()):
        raise AnalysisError("joint weights must be non-negative")
    return resolved


def infer_handedness(
    indices: AsymmetryIndex,
    weights: Optional[Mapping[Union[Joint, str], float]] = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> HandednessVerdict:
    """
    Infer handedness from weighted joint asymmetry.

    A more active left side points to a right-handed subject. The
    confidence is |aggregate| / (|aggregate| + threshold).

    Raises:
        AnalysisError: For negative weights or all-zero weights
    """
    resolved = _resolve_weights(weights)
    joints = [j for j in indices.values if resolved.get(j, 0.0) > 0]
    total = sum(resolved[j] for j in joints)
    if total == 0:
        raise AnalysisError("joint weights must not all be zero")
    if threshold < 0:
        raise AnalysisError("threshold must be non-negative")

    aggregate = sum(resolved[j] * indices[j] for j in joints) / total
    magnitude = abs(aggregate)
    confidence = magnitude / (magnitude + threshold) if magnitude > 0 else 0.0

    if aggregate > threshold:
        inferred = InferredHand.RIGHT
    elif aggregate < -threshold:
        inferred = InferredHand.LEFT
    else:
        inferred = InferredHand.INDETERMINATE
    return HandednessVerdict(inferred=inferred, confidence=confidence, aggregate=aggregate)


# =============================================================================
# Knee / ankle tradeoff
# =============================================================================

MetricsPair = Tuple[DeviationMetrics, DeviationMetrics]  # (left, right)


def rank_correlation(a: Sequence[float], b: Sequence[float]) -> float:
    """Spearman rank correlation; 0 for fewer than two points or constant input."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2:
        return 0.0
    ra, rb = rankdata(a), rankdata(b)
    if np.std(ra) == 0 or np.std(rb) == 0:
        return 0.0
    return float(np.corrcoef(ra, rb)[0, 1])


@dataclass(frozen=True)
class TradeoffEntry:
    """One trial: knee/ankle activity ratio per side and the cross-side sign."""

    ratios: Dict[Side, Optional[float]]
    relation: int  # sign(knee_L - knee_R) * sign(ankle_L - ankle_R); -1 is inverse


@dataclass(frozen=True)
class TradeoffReport:
    entries: List[TradeoffEntry]
    cross_side_correlation: float
    side_correlation: Dict[Side, Optional[float]] = field(default_factory=dict)


def _as_pairs(pairs) -> List[MetricsPair]:
    if len(pairs) == 2 and all(isinstance(m, DeviationMetrics) for m in pairs):
        return [tuple(pairs)]
    return [tuple(p) for p in pairs]


def knee_ankle_tradeoff(knee, ankle) -> TradeoffReport:
    """
    Relate knee and ankle activity.

    Args:
        knee: One (left, right) DeviationMetrics pair or a sequence of them
        ankle: Matching ankle pairs

    Returns:
        TradeoffReport with per-trial ratios, the pooled rank correlation of
        knee against ankle activity over both sides, and per-side
        correlations when at least three trials are given
    """
    knee_pairs = _as_pairs(knee)
    ankle_pairs = _as_pairs(ankle)
    if len(knee_pairs) != len(ankle_pairs):
        raise AnalysisError("knee and ankle batches differ in length")

    entries = []
    for (kl, kr), (al, ar) in zip(knee_pairs, ankle_pairs):
        ratios = {
            Side.LEFT: kl.activity_score / al.activity_score if al.activity_score > 0 else None,
            Side.RIGHT: kr.activity_score / ar.activity_score if ar.activity_score > 0 else None,
        }
        relation = int(np.sign(kl.activity_score - kr.activity_score)
                       * np.sign(al.activity_score - ar.activity_score))
        entries.append(TradeoffEntry(ratios=ratios, relation=relation))

    knee_all = [m.activity_score for pair in knee_pairs for m in pair]
    ankle_all = [m.activity_score for pair in ankle_pairs for m in pair]
    pooled = rank_correlation(knee_all, ankle_all)

    side_correlation: Dict[Side, Optional[float]] = {Side.LEFT: None, Side.RIGHT: None}
    if len(knee_pairs) >= 3:
        for i, side in enumerate((Side.LEFT, Side.RIGHT)):
            side_correlation[side] = rank_correlation(
                [p[i].activity_score for p in knee_pairs],
                [p[i].activity_score for p in ankle_pairs],
            )
    else:
        logger.debug(f"Per-side correlation omitted for {len(knee_pairs)} trial(s)")

    return TradeoffReport(entries=entries, cross_side_correlation=pooled,
                          side_correlation=side_correlation)


# =============================================================================
# Foot force
# =============================================================================

def cop_asymmetry(left: ForceSeries, right: ForceSeries, rate: Optional[float] = None) -> float:
    """
    (mean left - mean right) / (mean left + mean right) of foot force.

    Series with different timestamps are resampled by spline onto a
    uniform grid over their common span.

    Raises:
        AnalysisError: For empty or non-overlapping series
    """
    if len(left.t) == 0 or len(right.t) == 0:
        raise AnalysisError("foot force series must be nonempty")

    lt, rt = np.asarray(left.t, dtype=float), np.asarray(right.t, dtype=float)
    if len(lt) == len(rt) and np.array_equal(lt, rt):
        left_values = np.asarray(left.force, dtype=float)
        right_values = np.asarray(right.force, dtype=float)
    else:
        start, end = max(lt[0], rt[0]), min(lt[-1], rt[-1])
        if end < start:
            raise AnalysisError("foot force series do not overlap in time")
        grid_rate = rate or max(_series_rate(lt), _series_rate(rt))
        grid = uniform_grid(float(start), float(end), grid_rate)
        method = SmoothingMethod("spline")
        left_values = np.asarray(smoother(lt, left.force, method)(grid), dtype=float)
        right_values = np.asarray(smoother(rt, right.force, method)(grid), dtype=float)

    return _normalized_difference(float(np.mean(left_values)), float(np.mean(right_values)))


# =============================================================================
# Torque profile
# =============================================================================

@dataclass(frozen=True)
class TorqueProfile:
    """Chain torques (N·m) in ankle, knee, hip order over time."""

    side: Side
    t: np.ndarray
    tau: np.ndarray  # (samples, 3)

    @property
    def peak(self) -> Dict[Joint, float]:
        return {
            joint: float(np.max(np.abs(self.tau[:, i])))
            for i, joint in enumerate(CHAIN_JOINTS)
        }


def joint_torque_profile(converted: ConvertedTrial, chain: LinkChain) -> Dict[Side, TorqueProfile]:
    """
    Inverse dynamics of each leg's measured motion.

    Angles are read as relative joint deflections from an upright rest
    posture; rates and accelerations come from natural-spline derivatives.

    Raises:
        AnalysisError: For fewer than two samples or a chain without 3 links
    """
    if chain.n != len(CHAIN_JOINTS):
        raise AnalysisError(f"torque profile needs a 3-link chain, got {chain.n}")
    t = np.asarray(converted.t, dtype=float)
    if len(t) < 2:
        raise AnalysisError("torque profile needs at least two samples")

    profiles = {}
    for side in Side:
        derivatives = []
        for joint in CHAIN_JOINTS:
            spline = fit_natural_cubic_spline(t, np.radians(converted.joint(joint, side).angle))
            derivatives.append([eval_spline(spline, t, nu) for nu in (0, 1, 2)])
        theta, theta_dot, theta_ddot = (np.column_stack([d[nu] for d in derivatives]) for nu in range(3))
        tau = np.array([
            inverse_dynamics(chain, JointState(theta[k], theta_dot[k], theta_ddot[k])).tau
            for k in range(len(t))
        ])
        profiles[side] = TorqueProfile(side=side, t=t, tau=tau)
    return profiles


# =============================================================================
# Whole-trial analysis
# =============================================================================

@dataclass
class TrialAnalysis:
    """Everything the report needs about one trial."""

    label: str
    subject_meta: SubjectMeta
    condition: PushCondition
    rest_window: int
    push_onset: Optional[float]
    push_impulse: float
    metrics: Dict[Tuple[Joint, Side], DeviationMetrics]
    asymmetry: AsymmetryIndex
    verdict: HandednessVerdict
    active: Tuple[Joint, Side]
    torque_peaks: Optional[Dict[Side, Dict[Joint, float]]] = None

    def side_metrics(self, side: Side) -> Dict[Joint, DeviationMetrics]:
        return {j: m for (j, s), m in self.metrics.items() if s is side}


def active_joint(metrics: Mapping[Tuple[Joint, Side], DeviationMetrics]) -> Tuple[Joint, Side]:
    """The joint-side with the highest activity score."""
    if not metrics:
        raise AnalysisError("no joint metrics to compare")
    return max(metrics, key=lambda key: metrics[key].activity_score)


def analyze_trial(
    converted: ConvertedTrial,
    baseline: BaselineSpec = Baseline.PRE_PUSH,
    rest_window: int = DEFAULT_REST_WINDOW,
    weights: Optional[Mapping[Union[Joint, str], float]] = None,
    threshold: float = DEFAULT_THRESHOLD,
    push_threshold_n: float = 1.0,
    chain: Optional[LinkChain] = None,
) -> TrialAnalysis:
    """
    Run the per-trial analytics.

    When a push is detected the samples before its onset form the pre-push
    window; otherwise rest_window leading samples are used (clamped to the
    trial length).

    Args:
        converted: Trial in physical units
        baseline: Deviation baseline (see deviation_metrics)
        rest_window: Fallback pre-push window in samples
        weights: Per-joint handedness weights
        threshold: Indeterminate band for the aggregate asymmetry
        push_threshold_n: Force floor for push detection
        chain: Optional link chain for torque peaks

    Returns:
        TrialAnalysis
    """
    n = len(converted.t)
    if n == 0:
        raise AnalysisError(f"trial {converted.label} has no samples")

    onset = detect_push_onset(converted.force, push_threshold_n)
    if onset is not None and onset >= 1:
        window = onset
    else:
        window = rest_window
        if window > n:
            logger.warning(f"Rest window {window} clamped to trial length {n}")
            window = n

    metrics = {
        key: deviation_metrics(series, baseline, window)
        for key, series in converted.joints.items()
    }
    left = {j: m for (j, s), m in metrics.items() if s is Side.LEFT}
    right = {j: m for (j, s), m in metrics.items() if s is Side.RIGHT}
    asymmetry = asymmetry_index(left, right)
    verdict = infer_handedness(asymmetry, weights, threshold)

    torque_peaks = None
    if chain is not None:
        torque_peaks = {side: p.peak for side, p in joint_torque_profile(converted, chain).items()}

    logger.info(
        f"Trial {converted.label}: {verdict.inferred.value} "
        f"(aggregate {verdict.aggregate:+.3f}, confidence {verdict.confidence:.2f})"
    )
    return TrialAnalysis(
        label=converted.label,
        subject_meta=converted.subject_meta,
        condition=converted.condition,
        rest_window=window,
        push_onset=float(converted.t[onset]) if onset is not None else None,
        push_impulse=push_impulse(converted.force, push_threshold_n),
        metrics=metrics,
        asymmetry=asymmetry,
        verdict=verdict,
        active=active_joint(metrics),
        torque_peaks=torque_peaks,
    )
