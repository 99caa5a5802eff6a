"""
Dynamics Module - Planar Rigid-Body Chain

Joint-torque dynamics of a planar n-link chain pinned at the ankle:

    tau = M(theta) theta_ddot + C(theta, theta_dot) + G(theta)

Angles are relative between consecutive links; the first is measured from
upright vertical, positive leaning forward. Friction is neglected.

Provides:
- mass_matrix, coriolis_matrix / coriolis_vector (Christoffel form), gravity_vector
- inverse_dynamics / forward_dynamics (Cholesky solve)
- integrate: RK4 trajectory under a torque law
- recovery_torque: feedforward plus PD around a reference
- default_chain: anthropometric shank/thigh/trunk chain for a subject
- parse_chain / format_chain / format_trajectory: text formats

Example:
    from src.dynamics import default_chain, JointState, inverse_dynamics

    chain = default_chain(meta)
    state = JointState(theta=[0.0, 0.1, 0.0], theta_dot=[0, 0, 0], theta_ddot=[0, 0, 0])
    tau = inverse_dynamics(chain, state)
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .integrators import IntegrationError, integrate_fixed_step
from .sensor_ingest import SubjectMeta


logger = logging.getLogger(__name__)

DEFAULT_GRAVITY = 9.8

# Segment fractions of body height / mass after Winter, Biomechanics and Motor
# Control of Human Movement, anthropometric table (both legs lumped in the
# sagittal plane). Trunk is the head-arms-trunk segment from the greater
# trochanter (0.530 H) to the glenohumeral joint (0.818 H).
# length: fraction of height; mass: fraction of body mass;
# com: CoM distance from the lower joint as a fraction of length;
# gyration: radius of gyration about the CoM as a fraction of length.
SEGMENT_TABLE = (
    # name,    length, mass,  com,   gyration
    ("shank",  0.246,  0.093, 0.567, 0.302),
    ("thigh",  0.245,  0.200, 0.567, 0.323),
    ("trunk",  0.288,  0.678, 0.626, 0.496),
)


class DynamicsError(Exception):
    """Base exception for chain dynamics errors."""
    pass


class FactorizationError(DynamicsError):
    """Raised when the mass matrix is not positive definite."""
    pass


@dataclass(frozen=True)
class LinkParams:
    """Inertial parameters of one link."""

    mass: float  # kg
    length: float  # m
    com_offset: float  # m from the proximal joint
    inertia: float = 0.0  # kg·m² about the link CoM

    def __post_init__(self):
        if not self.mass > 0:
            raise DynamicsError("link mass must be positive")
        if not 0 <= self.com_offset <= self.length:
            raise DynamicsError("com_offset must lie within the link")
        if self.inertia < 0:
            raise DynamicsError("inertia must be non-negative")


@dataclass(frozen=True)
class LinkChain:
    """Links ordered from the pinned ankle upwards."""

    links: Tuple[LinkParams, ...]
    gravity: float = DEFAULT_GRAVITY

    def __post_init__(self):
        if len(self.links) < 1:
            raise DynamicsError("a chain needs at least one link")
        object.__setattr__(self, "links", tuple(self.links))

    @property
    def n(self) -> int:
        return len(self.links)

    @property
    def masses(self) -> np.ndarray:
        return np.array([link.mass for link in self.links])

    @property
    def lengths(self) -> np.ndarray:
        return np.array([link.length for link in self.links])

    @property
    def com_offsets(self) -> np.ndarray:
        return np.array([link.com_offset for link in self.links])

    @property
    def inertias(self) -> np.ndarray:
        return np.array([link.inertia for link in self.links])

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())


@dataclass(frozen=True)
class JointState:
    """Joint angles (rad), rates and optional accelerations."""

    theta: np.ndarray
    theta_dot: np.ndarray
    theta_ddot: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "theta_dot", np.asarray(self.theta_dot, dtype=float))
        if self.theta_ddot is not None:
            object.__setattr__(self, "theta_ddot", np.asarray(self.theta_ddot, dtype=float))
        if self.theta.shape != self.theta_dot.shape:
            raise DynamicsError("theta and theta_dot lengths differ")
        if self.theta_ddot is not None and self.theta_ddot.shape != self.theta.shape:
            raise DynamicsError("theta_ddot length differs from theta")


@dataclass(frozen=True)
class TorqueVector:
    """Joint torques (N·m)."""

    tau: np.ndarray


@dataclass
class Trajectory:
    """Sampled chain motion."""

    t: np.ndarray
    theta: np.ndarray  # (samples, n)
    theta_dot: np.ndarray
    tau: np.ndarray


# =============================================================================
# Kinematics
# =============================================================================

@dataclass(frozen=True)
class _Masks:
    """Index masks that depend only on the chain length."""

    proximal: np.ndarray  # A[i, j, k] = 1 if j <= k < i
    below: np.ndarray  # B[i, j] = 1 if j <= i
    upper: np.ndarray  # U[m, k] = 1 if m <= k


_MASK_CACHE = {}


def _masks(n: int) -> _Masks:
    if n not in _MASK_CACHE:
        i, j, k = np.indices((n, n, n))
        proximal = ((j <= k) & (k < i)).astype(float)
        below = np.tril(np.ones((n, n)))
        upper = np.triu(np.ones((n, n)))
        _MASK_CACHE[n] = _Masks(proximal=proximal, below=below, upper=upper)
    return _MASK_CACHE[n]


def _check_length(chain: LinkChain, vector: np.ndarray, name: str) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (chain.n,):
        raise DynamicsError(f"{name} must have {chain.n} entries")
    return vector


def _unit_vectors(theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Link directions e = (sin phi, cos phi) and de/dphi = (cos phi, -sin phi)."""
    phi = np.cumsum(theta)
    e = np.column_stack([np.sin(phi), np.cos(phi)])
    d = np.column_stack([np.cos(phi), -np.sin(phi)])
    return e, d


def link_com_positions(chain: LinkChain, theta) -> np.ndarray:
    """(n, 2) horizontal/vertical CoM positions of every link."""
    theta = _check_length(chain, theta, "theta")
    e, _ = _unit_vectors(theta)
    joints = np.vstack([np.zeros(2), np.cumsum(chain.lengths[:, None] * e, axis=0)[:-1]])
    return joints + chain.com_offsets[:, None] * e


def com_position(chain: LinkChain, theta) -> np.ndarray:
    """Whole-chain CoM relative to the ankle."""
    positions = link_com_positions(chain, theta)
    return chain.masses @ positions / chain.total_mass


def com_jacobians(chain: LinkChain, theta: np.ndarray) -> np.ndarray:
    """J[i, c, j] = d(CoM_i coordinate c)/d theta_j."""
    m = _masks(chain.n)
    _, d = _unit_vectors(theta)
    return (
        np.einsum("ijk,k,kc->icj", m.proximal, chain.lengths, d)
        + np.einsum("ij,i,ic->icj", m.below, chain.com_offsets, d)
    )


def _jacobian_derivatives(chain: LinkChain, theta: np.ndarray) -> np.ndarray:
    """dJ[i, c, j, m] = d J[i, c, j] / d theta_m."""
    m = _masks(chain.n)
    e, _ = _unit_vectors(theta)
    return -(
        np.einsum("ijk,mk,k,kc->icjm", m.proximal, m.upper, chain.lengths, e)
        + np.einsum("ij,mi,i,ic->icjm", m.below, m.upper, chain.com_offsets, e)
    )


# =============================================================================
# Equation terms
# =============================================================================

def mass_matrix(chain: LinkChain, theta) -> np.ndarray:
    """Generalized inertia M(theta), symmetric positive definite."""
    theta = _check_length(chain, theta, "theta")
    jac = com_jacobians(chain, theta)
    rot = _masks(chain.n).below
    M = (
        np.einsum("i,icj,ick->jk", chain.masses, jac, jac)
        + np.einsum("i,ij,ik->jk", chain.inertias, rot, rot)
    )
    return (M + M.T) / 2


def mass_matrix_derivatives(chain: LinkChain, theta) -> np.ndarray:
    """dM[j, k, m] = d M[j, k] / d theta_m."""
    theta = _check_length(chain, theta, "theta")
    jac = com_jacobians(chain, theta)
    djac = _jacobian_derivatives(chain, theta)
    half = np.einsum("i,icjm,ick->jkm", chain.masses, djac, jac)
    return half + half.transpose(1, 0, 2)


def coriolis_matrix(chain: LinkChain, theta, theta_dot) -> np.ndarray:
    """
    Coriolis matrix from the Christoffel symbols of M.

    C_mat @ theta_dot equals coriolis_vector, and M_dot - 2 C_mat is
    skew-symmetric.
    """
    theta_dot = _check_length(chain, theta_dot, "theta_dot")
    dM = mass_matrix_derivatives(chain, theta)
    # christoffel[i, j, k] = (dM[i, j, k] + dM[i, k, j] - dM[j, k, i]) / 2
    christoffel = 0.5 * (dM + dM.transpose(0, 2, 1) - dM.transpose(2, 0, 1))
    return christoffel @ theta_dot


def coriolis_vector(chain: LinkChain, theta, theta_dot) -> np.ndarray:
    """Centrifugal and Coriolis torques, quadratic in theta_dot."""
    theta_dot = _check_length(chain, theta_dot, "theta_dot")
    return coriolis_matrix(chain, theta, theta_dot) @ theta_dot


def gravity_vector(chain: LinkChain, theta) -> np.ndarray:
    """Gradient of the potential energy with respect to theta."""
    theta = _check_length(chain, theta, "theta")
    jac = com_jacobians(chain, theta)
    return chain.gravity * chain.masses @ jac[:, 1, :]


def kinetic_energy(chain: LinkChain, theta, theta_dot) -> float:
    theta_dot = _check_length(chain, theta_dot, "theta_dot")
    return float(0.5 * theta_dot @ mass_matrix(chain, theta) @ theta_dot)


def potential_energy(chain: LinkChain, theta) -> float:
    heights = link_com_positions(chain, theta)[:, 1]
    return float(chain.gravity * chain.masses @ heights)


def total_energy(chain: LinkChain, theta, theta_dot) -> float:
    return kinetic_energy(chain, theta, theta_dot) + potential_energy(chain, theta)


# =============================================================================
# Inverse / forward dynamics
# =============================================================================

def inverse_dynamics(chain: LinkChain, state: JointState) -> TorqueVector:
    """
    Joint torques that produce the state's accelerations.

    Args:
        chain: Link chain
        state: Joint state with theta_ddot

    Returns:
        TorqueVector tau = M theta_ddot + C + G
    """
    if state.theta_ddot is None:
        raise DynamicsError("inverse dynamics needs theta_ddot")
    theta = _check_length(chain, state.theta, "theta")
    theta_ddot = _check_length(chain, state.theta_ddot, "theta_ddot")
    tau = (
        mass_matrix(chain, theta) @ theta_ddot
        + coriolis_vector(chain, theta, state.theta_dot)
        + gravity_vector(chain, theta)
    )
    return TorqueVector(tau=tau)


def forward_dynamics(chain: LinkChain, theta, theta_dot, tau) -> np.ndarray:
    """
    Joint accelerations under the applied torques.

    Raises:
        FactorizationError: If M(theta) is not positive definite
    """
    tau = _check_length(chain, tau, "tau")
    rhs = tau - coriolis_vector(chain, theta, theta_dot) - gravity_vector(chain, theta)
    try:
        factor = cho_factor(mass_matrix(chain, theta))
    except LinAlgError as e:
        raise FactorizationError(f"mass matrix factorization failed: {e}")
    return cho_solve(factor, rhs)


TorqueLaw = Callable[[float, JointState], np.ndarray]


def integrate(
    chain: LinkChain,
    initial: JointState,
    torque: TorqueLaw,
    dt: float,
    t_end: float,
) -> Trajectory:
    """
    RK4 trajectory of the chain under a torque law.

    Args:
        chain: Link chain
        initial: Initial angles and rates
        torque: Function of (t, state) returning joint torques
        dt: Step (s)
        t_end: Duration (s)

    Returns:
        Trajectory sampled every dt

    Raises:
        IntegrationError: If the state becomes non-finite
    """
    n = chain.n

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        state = JointState(theta=y[:n], theta_dot=y[n:])
        tau = np.asarray(torque(t, state), dtype=float)
        return np.concatenate([y[n:], forward_dynamics(chain, y[:n], y[n:], tau)])

    y0 = np.concatenate([_check_length(chain, initial.theta, "theta"),
                         _check_length(chain, initial.theta_dot, "theta_dot")])
    try:
        times, states = integrate_fixed_step(rhs, y0, dt, t_end)
    except IntegrationError:
        logger.error("Chain integration diverged")
        raise

    taus = np.array([
        np.asarray(torque(t, JointState(theta=y[:n], theta_dot=y[n:])), dtype=float)
        for t, y in zip(times, states)
    ])
    logger.info(f"Integrated {n}-link chain for {times[-1]:.3f} s")
    return Trajectory(t=times, theta=states[:, :n], theta_dot=states[:, n:], tau=taus)


def recovery_torque(
    chain: LinkChain,
    state: JointState,
    reference: JointState,
    kp: Sequence[float],
    kd: Sequence[float],
) -> TorqueVector:
    """
    Control torque returning the chain to a reference posture.

    Feedforward inverse dynamics of the reference plus joint PD feedback.
    """
    kp = np.broadcast_to(np.asarray(kp, dtype=float), (chain.n,))
    kd = np.broadcast_to(np.asarray(kd, dtype=float), (chain.n,))
    if np.any(kp < 0) or np.any(kd < 0):
        raise DynamicsError("gains must be non-negative")

    if reference.theta_ddot is None:
        reference = JointState(reference.theta, reference.theta_dot, np.zeros(chain.n))
    feedforward = inverse_dynamics(chain, reference).tau
    feedback = kp * (reference.theta - state.theta) + kd * (reference.theta_dot - state.theta_dot)
    return TorqueVector(tau=feedforward + feedback)


def simulate_recovery(
    chain: LinkChain,
    reference: JointState,
    perturbation: Sequence[float],
    kp: Sequence[float],
    kd: Sequence[float],
    dt: float = 1e-3,
    t_end: float = 2.0,
) -> Trajectory:
    """Closed-loop response after displacing the chain from the reference."""
    initial = JointState(
        theta=reference.theta + np.broadcast_to(np.asarray(perturbation, dtype=float), (chain.n,)),
        theta_dot=reference.theta_dot,
    )
    law = lambda t, s: recovery_torque(chain, s, reference, kp, kd).tau
    return integrate(chain, initial, law, dt, t_end)


# =============================================================================
# Chains and files
# =============================================================================

def default_chain(meta: SubjectMeta, gravity: float = DEFAULT_GRAVITY) -> LinkChain:
    """Shank/thigh/trunk chain scaled to a subject's height and weight."""
    links = []
    for _, length_frac, mass_frac, com_frac, gyration in SEGMENT_TABLE:
        length = length_frac * meta.height
        mass = mass_frac * meta.weight
        links.append(LinkParams(
            mass=mass,
            length=length,
            com_offset=com_frac * length,
            inertia=mass * (gyration * length) ** 2,
        ))
    return LinkChain(links=tuple(links), gravity=gravity)


def parse_chain(text: str) -> LinkChain:
    """
    Parse a chain parameter file.

    Lines are 'key = value'; keys are 'gravity' and 'link.<i>.<field>' with
    1-based i and field one of mass, length, com_offset, inertia.
    """
    values = {}
    gravity = DEFAULT_GRAVITY
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DynamicsError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            number = float(value)
        except ValueError:
            raise DynamicsError(f"line {lineno}: '{value}' is not a number")

        if key == "gravity":
            gravity = number
            continue
        parts = key.split(".")
        if len(parts) != 3 or parts[0] != "link" or not parts[1].isdigit() \
                or parts[2] not in ("mass", "length", "com_offset", "inertia"):
            raise DynamicsError(f"line {lineno}: unknown key '{key}'")
        values.setdefault(int(parts[1]), {})[parts[2]] = number

    if not values:
        raise DynamicsError("chain file defines no links")
    indices = sorted(values)
    if indices != list(range(1, len(indices) + 1)):
        raise DynamicsError("links must be numbered 1..n without gaps")

    links = []
    for i in indices:
        entry = values[i]
        missing = {"mass", "length", "com_offset"} - set(entry)
        if missing:
            raise DynamicsError(f"link {i} is missing {sorted(missing)}")
        links.append(LinkParams(**entry))
    return LinkChain(links=tuple(links), gravity=gravity)


def format_chain(chain: LinkChain) -> str:
    """Inverse of parse_chain."""
    lines = [f"gravity = {chain.gravity!r}"]
    for i, link in enumerate(chain.links, start=1):
        lines.append(f"link.{i}.mass = {link.mass!r}")
        lines.append(f"link.{i}.length = {link.length!r}")
        lines.append(f"link.{i}.com_offset = {link.com_offset!r}")
        lines.append(f"link.{i}.inertia = {link.inertia!r}")
    return "\n".join(lines) + "\n"


def format_trajectory(trajectory: Trajectory) -> str:
    """CSV with columns t, theta_1..n, thetadot_1..n, tau_1..n."""
    n = trajectory.theta.shape[1]
    header = (
        ["t"]
        + [f"theta_{i}" for i in range(1, n + 1)]
        + [f"thetadot_{i}" for i in range(1, n + 1)]
        + [f"tau_{i}" for i in range(1, n + 1)]
    )
    lines = [",".join(header)]
    for k, t in enumerate(trajectory.t):
        row = np.concatenate([trajectory.theta[k], trajectory.theta_dot[k], trajectory.tau[k]])
        lines.append(",".join([f"{t:.6f}"] + [f"{v:.9f}" for v in row]))
    return "\n".join(lines) + "\n"
