"""
LIPM Module - Linear Inverted Pendulum Push Recovery

Sagittal pendulum with constant CoM height z0:

    x_ddot = omega**2 * (x - p),   omega = sqrt(g / z0)

where p is the centre of pressure, bounded by the foot. A state is
recoverable in place when its capture point x + x_dot/omega lies inside the
foot; in the (x, x_dot) phase plane this is the band between two lines of
slope -omega through (cop_min, 0) and (cop_max, 0).

Provides:
- simulate_lipm / closed_form: numeric and analytic trajectories
- apply_push: impulse to velocity change
- capture_point / decision_boundary / classify_recovery
- orbital_energy
- phase_trajectory: push, CoP controller, simulated outcome
- bang_bang_oracle / sweep_phase_grid: brute-force boundary validation

Example:
    from src.lipm import LipmParams, FootGeometry, PhasePoint, classify_recovery

    params = LipmParams(z0=0.98, mass=60.0)
    report = classify_recovery(params, FootGeometry(), PhasePoint(0.0, 1.0))
    print(report.verdict)  # Verdict.FALL
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from .integrators import IntegrationError, rk4_step, step_count
from .sensor_ingest import SubjectMeta


logger = logging.getLogger(__name__)

DEFAULT_GRAVITY = 9.8
COM_HEIGHT_FRACTION = 0.57
DEFAULT_ESCAPE_RADIUS = 1.0
DEFAULT_HORIZON = 3.0


class LipmError(Exception):
    """Raised for invalid pendulum parameters."""
    pass


class Verdict(str, Enum):
    RECOVERABLE = "recoverable"
    FALL = "fall"


class Controller(str, Enum):
    FIXED_COP = "fixed_cop"
    CAPTURE_COP = "capture_cop"
    BANG_BANG = "bang_bang"


@dataclass(frozen=True)
class LipmParams:
    """Pendulum constants."""

    z0: float  # m
    mass: float  # kg
    g: float = DEFAULT_GRAVITY

    def __post_init__(self):
        if not (self.g > 0 and self.z0 > 0 and self.mass > 0):
            raise LipmError("g, z0 and mass must be positive")

    @property
    def omega(self) -> float:
        return math.sqrt(self.g / self.z0)

    @classmethod
    def from_subject(
        cls,
        meta: SubjectMeta,
        fraction: float = COM_HEIGHT_FRACTION,
        g: float = DEFAULT_GRAVITY,
    ) -> "LipmParams":
        """CoM height as a fraction of stature, mass from body weight."""
        return cls(z0=fraction * meta.height, mass=meta.weight, g=g)


@dataclass(frozen=True)
class PhasePoint:
    """CoM position relative to the ankle and its velocity."""

    x: float
    xdot: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.xdot)):
            raise LipmError("phase point must be finite")


@dataclass(frozen=True)
class FootGeometry:
    """Admissible CoP range under the stance foot, relative to the ankle."""

    cop_min: float = -0.05
    cop_max: float = 0.15

    def __post_init__(self):
        if not self.cop_min < self.cop_max:
            raise LipmError("cop_min must be below cop_max")

    @property
    def midpoint(self) -> float:
        return (self.cop_min + self.cop_max) / 2

    def clamp(self, p: float) -> float:
        return min(max(p, self.cop_min), self.cop_max)

    def contains(self, p: float) -> bool:
        return self.cop_min <= p <= self.cop_max


@dataclass(frozen=True)
class DecisionBoundary:
    """
    The line x_dot = omega * (cop_max - x) separating forward falls;
    the parallel line through cop_min bounds backward falls.
    """

    omega: float
    cop_max: float
    cop_min: float

    @property
    def slope(self) -> float:
        return -self.omega

    def xdot_at(self, x):
        """Boundary velocity at x (forward fall line)."""
        return self.omega * (self.cop_max - np.asarray(x, dtype=float))

    def lower_xdot_at(self, x):
        """Velocity on the backward fall line through cop_min."""
        return self.omega * (self.cop_min - np.asarray(x, dtype=float))

    def margin(self, state: PhasePoint) -> float:
        """Signed distance (m/s) inside the recoverable band; negative outside."""
        above_lower = state.xdot - float(self.lower_xdot_at(state.x))
        below_upper = float(self.xdot_at(state.x)) - state.xdot
        return min(below_upper, above_lower)

    def sample(self, xs) -> np.ndarray:
        """(k, 2) rows of (x, boundary x_dot)."""
        xs = np.asarray(xs, dtype=float)
        return np.column_stack([xs, self.xdot_at(xs)])


@dataclass
class PhaseTrajectory:
    """Sampled pendulum motion with the CoP used at each sample."""

    t: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    p: np.ndarray

    def points(self) -> List[PhasePoint]:
        return [PhasePoint(float(a), float(b)) for a, b in zip(self.x, self.xdot)]

    def __len__(self) -> int:
        return len(self.t)


@dataclass
class RecoveryReport:
    """
    Classification of a phase-plane state.

    verdict is recoverable exactly when boundary_margin >= 0. For
    phase_trajectory, outcome and escape_time describe what the chosen CoP
    controller actually did in simulation.
    """

    verdict: Verdict
    capture_point: float
    boundary_margin: float
    trajectory: PhaseTrajectory
    state: PhasePoint
    controller: Optional[Controller] = None
    outcome: Optional[Verdict] = None
    escape_time: Optional[float] = None

    @property
    def recoverable(self) -> bool:
        return self.verdict is Verdict.RECOVERABLE


CopLaw = Callable[[float, PhasePoint], float]


# =============================================================================
# Dynamics
# =============================================================================

def closed_form(params: LipmParams, initial: PhasePoint, p: float, t) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic (x, x_dot) for a constant CoP p."""
    w = params.omega
    t = np.asarray(t, dtype=float)
    offset = initial.x - p
    x = p + offset * np.cosh(w * t) + initial.xdot / w * np.sinh(w * t)
    xdot = offset * w * np.sinh(w * t) + initial.xdot * np.cosh(w * t)
    return x, xdot


def simulate_lipm(
    params: LipmParams,
    initial: PhasePoint,
    cop: CopLaw,
    dt: float,
    t_end: float,
    foot: Optional[FootGeometry] = None,
    stop: Optional[Callable[[float, np.ndarray], bool]] = None,
) -> PhaseTrajectory:
    """
    RK4 trajectory of x_ddot = omega**2 (x - p).

    The CoP law is sampled at the start of every step and held for the step;
    with a foot it is clamped to [cop_min, cop_max].

    Args:
        params: Pendulum constants
        initial: Start state
        cop: Function of (t, state) giving the CoP
        dt: Step (s)
        t_end: Duration (s)
        foot: Optional CoP bounds
        stop: Optional callback(t, y) ending the run early

    Returns:
        PhaseTrajectory

    Raises:
        IntegrationError: If the state becomes non-finite
    """
    w2 = params.omega ** 2
    n = step_count(dt, t_end)
    y = np.array([initial.x, initial.xdot], dtype=float)

    def cop_at(t: float, y: np.ndarray) -> float:
        p = float(cop(t, PhasePoint(float(y[0]), float(y[1]))))
        return foot.clamp(p) if foot is not None else p

    times, xs, xds, ps = [0.0], [y[0]], [y[1]], []
    for k in range(n):
        t = k * dt
        p = cop_at(t, y)
        ps.append(p)
        y = rk4_step(lambda _t, s: np.array([s[1], w2 * (s[0] - p)]), t, y, dt)
        if not np.all(np.isfinite(y)):
            raise IntegrationError((k + 1) * dt)
        times.append((k + 1) * dt)
        xs.append(y[0])
        xds.append(y[1])
        if stop is not None and stop((k + 1) * dt, y):
            break
    ps.append(cop_at(times[-1], y))

    return PhaseTrajectory(t=np.array(times), x=np.array(xs), xdot=np.array(xds), p=np.array(ps))


def apply_push(params: LipmParams, state: PhasePoint, impulse: float) -> PhasePoint:
    """Instantaneous push from behind: x_dot increases by impulse / mass."""
    if not math.isfinite(impulse):
        raise LipmError("impulse must be finite")
    return PhasePoint(state.x, state.xdot + impulse / params.mass)


def capture_point(params: LipmParams, state: PhasePoint) -> float:
    """x + x_dot / omega."""
    return state.x + state.xdot / params.omega


def orbital_energy(params: LipmParams, state: PhasePoint, p: float) -> float:
    """Conserved quantity (J/kg) for a constant CoP p."""
    return 0.5 * state.xdot ** 2 - 0.5 * params.omega ** 2 * (state.x - p) ** 2


def decision_boundary(params: LipmParams, foot: FootGeometry) -> DecisionBoundary:
    """Recover/fall boundary lines for a foot."""
    return DecisionBoundary(omega=params.omega, cop_max=foot.cop_max, cop_min=foot.cop_min)


# =============================================================================
# Classification
# =============================================================================

def classify_recovery(
    params: LipmParams,
    foot: FootGeometry,
    state: PhasePoint,
    dt: float = 1e-3,
    horizon: float = DEFAULT_HORIZON,
) -> RecoveryReport:
    """
    Recover/fall verdict from the decision boundary.

    Recoverable when cop_min <= capture point <= cop_max (inclusive). A
    recoverable report carries the stabilising trajectory with the CoP held
    at the capture point; a fall report carries only the initial state.
    """
    cp = capture_point(params, state)
    margin = decision_boundary(params, foot).margin(state)
    verdict = Verdict.RECOVERABLE if margin >= 0 else Verdict.FALL

    if verdict is Verdict.RECOVERABLE:
        trajectory = simulate_lipm(params, state, lambda t, s: cp, dt, horizon)
    else:
        trajectory = PhaseTrajectory(
            t=np.array([0.0]), x=np.array([state.x]),
            xdot=np.array([state.xdot]), p=np.array([foot.clamp(cp)]),
        )

    logger.debug(f"State ({state.x:.4f}, {state.xdot:.4f}) capture={cp:.4f} -> {verdict.value}")
    return RecoveryReport(
        verdict=verdict, capture_point=cp, boundary_margin=margin,
        trajectory=trajectory, state=state,
    )


def cop_law(params: LipmParams, foot: FootGeometry, controller: Controller, initial: PhasePoint) -> CopLaw:
    """CoP policy for a controller."""
    if controller is Controller.FIXED_COP:
        held = foot.clamp(initial.x)
        return lambda t, s: held
    if controller is Controller.CAPTURE_COP:
        return lambda t, s: foot.clamp(capture_point(params, s))
    mid = foot.midpoint
    return lambda t, s: foot.cop_max if capture_point(params, s) > mid else foot.cop_min


def phase_trajectory(
    params: LipmParams,
    foot: FootGeometry,
    initial: PhasePoint,
    push: float,
    controller: Controller = Controller.CAPTURE_COP,
    dt: float = 1e-3,
    t_end: float = DEFAULT_HORIZON,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
) -> RecoveryReport:
    """
    Push the pendulum and simulate it under a CoP controller.

    The run ends early once |x - foot midpoint| exceeds the escape radius,
    which declares the simulated outcome a fall.

    Args:
        params: Pendulum constants
        foot: CoP bounds
        initial: State before the push
        push: Impulse (N·s), positive from behind
        controller: CoP policy
        dt: Step (s)
        t_end: Horizon (s)
        escape_radius: Fall distance from the foot midpoint (m)

    Returns:
        RecoveryReport with the boundary verdict of the post-push state,
        the simulated outcome and the trajectory
    """
    controller = Controller(controller)
    pushed = apply_push(params, initial, push)
    law = cop_law(params, foot, controller, initial)
    mid = foot.midpoint

    trajectory = simulate_lipm(
        params, pushed, law, dt, t_end, foot=foot,
        stop=lambda t, y: abs(y[0] - mid) > escape_radius,
    )
    escaped = abs(trajectory.x[-1] - mid) > escape_radius
    outcome = Verdict.FALL if escaped else Verdict.RECOVERABLE
    escape_time = float(trajectory.t[-1]) if escaped else None

    margin = decision_boundary(params, foot).margin(pushed)
    verdict = Verdict.RECOVERABLE if margin >= 0 else Verdict.FALL
    logger.info(
        f"Push {push:.3f} N·s under {controller.value}: boundary {verdict.value}, "
        f"simulated {outcome.value}"
    )
    return RecoveryReport(
        verdict=verdict,
        capture_point=capture_point(params, pushed),
        boundary_margin=margin,
        trajectory=trajectory,
        state=pushed,
        controller=controller,
        outcome=outcome,
        escape_time=escape_time,
    )


# =============================================================================
# Brute-force validation
# =============================================================================

def bang_bang_oracle(
    params: LipmParams,
    foot: FootGeometry,
    x,
    xdot,
    dt: float = 1e-3,
    t_max: float = 5.0,
) -> np.ndarray:
    """
    Simulate bang-bang CoP control from many states at once.

    The CoP sits at cop_max while the capture point is beyond the foot
    midpoint and at cop_min otherwise. A state counts as recovered once
    x_dot reaches or crosses zero with x inside the foot within t_max.

    Returns:
        Boolean array with the broadcast shape of x and xdot
    """
    x, xdot = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xdot, dtype=float))
    w = params.omega
    w2 = w ** 2
    mid = foot.midpoint
    y = np.stack([x.ravel(), xdot.ravel()]).astype(float)

    inside = (y[0] >= foot.cop_min) & (y[0] <= foot.cop_max)
    recovered = (y[1] == 0) & inside

    for k in range(step_count(dt, t_max)):
        p = np.where(y[0] + y[1] / w > mid, foot.cop_max, foot.cop_min)
        previous = y[1].copy()
        y = rk4_step(lambda _t, s: np.stack([s[1], w2 * (s[0] - p)]), k * dt, y, dt)
        inside = (y[0] >= foot.cop_min) & (y[0] <= foot.cop_max)
        recovered |= (previous * y[1] <= 0) & inside
        if recovered.all():
            break

    return recovered.reshape(x.shape)


def sweep_phase_grid(
    params: LipmParams,
    foot: FootGeometry,
    x_range: Tuple[float, float] = (-0.3, 0.3),
    xdot_range: Tuple[float, float] = (-1.5, 1.5),
    n: int = 41,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Boundary classification over a phase grid.

    Returns:
        (X, XDOT, recoverable) meshes of shape (n, n)
    """
    xs = np.linspace(*x_range, n)
    xds = np.linspace(*xdot_range, n)
    X, XD = np.meshgrid(xs, xds, indexing="ij")
    cp = X + XD / params.omega
    recoverable = (cp >= foot.cop_min) & (cp <= foot.cop_max)
    return X, XD, recoverable
