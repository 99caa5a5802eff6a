"""
Integrators - Fixed-step Runge-Kutta

Classical 4th-order Runge-Kutta shared by the rigid-body chain and the
pendulum model. States are numpy arrays of any shape; the derivative
function may be evaluated on a batch of states at once.

Example:
    from src.integrators import integrate_fixed_step

    t, states = integrate_fixed_step(lambda t, y: -y, np.array([1.0]), 1e-3, 1.0)
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np


logger = logging.getLogger(__name__)

Derivative = Callable[[float, np.ndarray], np.ndarray]


class IntegrationError(Exception):
    """Raised when the state stops being finite."""

    def __init__(self, time: float, message: str = "non-finite state"):
        self.time = time
        super().__init__(f"{message} at t={time:.6g} s")


def rk4_step(fn: Derivative, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of size h."""
    k1 = fn(t, y)
    k2 = fn(t + h / 2, y + h / 2 * k1)
    k3 = fn(t + h / 2, y + h / 2 * k2)
    k4 = fn(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_count(dt: float, t_end: float) -> int:
    """Number of dt steps covering [0, t_end]."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    return int(round(t_end / dt))


def integrate_fixed_step(
    fn: Derivative,
    y0: np.ndarray,
    dt: float,
    t_end: float,
    on_step: Optional[Callable[[float, np.ndarray], bool]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate y' = fn(t, y) from 0 to t_end with fixed RK4 steps.

    Args:
        fn: Derivative function
        y0: Initial state
        dt: Step size (s)
        t_end: Final time (s)
        on_step: Optional callback(t, y); returning True stops early

    Returns:
        (times, states) with states stacked along the first axis

    Raises:
        IntegrationError: If the state becomes non-finite
    """
    n = step_count(dt, t_end)
    y = np.asarray(y0, dtype=float)
    times = [0.0]
    states = [y.copy()]

    for k in range(n):
        t = k * dt
        y = rk4_step(fn, t, y, dt)
        t_next = (k + 1) * dt
        if not np.all(np.isfinite(y)):
            raise IntegrationError(t_next)
        times.append(t_next)
        states.append(y.copy())
        if on_step is not None and on_step(t_next, y):
            break

    logger.debug(f"RK4 integrated {len(times) - 1} steps of {dt:g} s")
    return np.array(times), np.array(states)
