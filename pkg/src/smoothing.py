"""
Smoothing Module - Natural Cubic Splines and Polynomial Fits

Smooths and resamples captured series:

- fit_natural_cubic_spline / eval_spline: interpolating spline with zero
  curvature at both ends, linear extrapolation outside the knots
- fit_polynomial / eval_polynomial: least-squares polynomial solved by QR
  on a scaled abscissa
- resample_uniform: either smoother onto a uniform time grid

Example:
    from src.smoothing import fit_natural_cubic_spline, eval_spline

    spline = fit_natural_cubic_spline([0, 1, 2], [0, 1, 0])
    eval_spline(spline, 0.5)  # 0.6875
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline


logger = logging.getLogger(__name__)

MAX_POLY_DEGREE = 15
DEFAULT_POLY_DEGREE = 7

# Relative size of a QR pivot below which the design is treated as singular
RANK_TOLERANCE = 1e-10

ArrayLike = Union[Sequence[float], np.ndarray]


class SmoothingError(Exception):
    """Base exception for smoothing errors."""
    pass


class RankDeficiencyError(SmoothingError):
    """Raised when the data cannot determine the requested degree."""

    def __init__(self, degree: int, max_degree: int):
        self.degree = degree
        self.max_degree = max_degree
        super().__init__(
            f"degree {degree} is rank deficient for this data; "
            f"reduce the degree to {max_degree} or lower"
        )


@dataclass(frozen=True)
class Spline:
    """
    Natural cubic spline.

    coefficients[i] = (a, b, c, d) gives
    S(x) = a + b*u + c*u**2 + d*u**3 with u = x - knots[i] on interval i.
    """

    knots: np.ndarray
    values: np.ndarray
    coefficients: np.ndarray  # shape (len(knots) - 1, 4)

    def __call__(self, x):
        return eval_spline(self, x)


@dataclass(frozen=True)
class PolyFit:
    """Least-squares polynomial; coefficients in ascending powers of x."""

    degree: int
    coefficients: np.ndarray
    residual_rms: float
    domain: Tuple[float, float]
    scaled_coefficients: np.ndarray  # ascending powers of the [-1, 1] mapped abscissa

    def __call__(self, x):
        return eval_polynomial(self, x)


@dataclass(frozen=True)
class SmoothingMethod:
    """Parsed '--smooth' choice."""

    kind: str  # "spline" or "poly"
    degree: int = DEFAULT_POLY_DEGREE

    @classmethod
    def parse(cls, text: str) -> "SmoothingMethod":
        """Parse 'spline', 'poly' or 'poly:<degree>'."""
        text = text.strip().lower()
        if text == "spline":
            return cls("spline")
        if text == "poly":
            return cls("poly")
        if text.startswith("poly:"):
            try:
                degree = int(text[5:])
            except ValueError:
                raise SmoothingError(f"bad polynomial degree in '{text}'")
            if degree < 0:
                raise SmoothingError("polynomial degree must be non-negative")
            return cls("poly", degree)
        raise SmoothingError(f"unknown smoothing method '{text}'")

    def __str__(self) -> str:
        return "spline" if self.kind == "spline" else f"poly:{self.degree}"


def _as_arrays(x: ArrayLike, y: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise SmoothingError("x and y must be 1-D sequences of equal length")
    return x, y


def fit_natural_cubic_spline(x: ArrayLike, y: ArrayLike) -> Spline:
    """
    Fit the interpolating cubic spline with S'' = 0 at both ends.

    Args:
        x: Strictly increasing knots (at least two)
        y: Ordinates

    Returns:
        Spline

    Raises:
        SmoothingError: For fewer than two knots or non-increasing x
    """
    x, y = _as_arrays(x, y)
    if len(x) < 2:
        raise SmoothingError("a spline needs at least two knots")
    if np.any(np.diff(x) <= 0):
        raise SmoothingError("spline knots must be strictly increasing")

    cs = CubicSpline(x, y, bc_type="natural")
    # scipy stores descending local powers per interval
    coefficients = cs.c[::-1].T.copy()
    coefficients[:, 0] = y[:-1]
    return Spline(knots=x, values=y, coefficients=coefficients)


def eval_spline(spline: Spline, x, nu: int = 0):
    """
    Evaluate a spline or one of its first two derivatives.

    Outside the knot span the spline continues as the tangent line at the
    nearest end.

    Args:
        spline: Fitted spline
        x: Scalar or array of abscissae
        nu: Derivative order (0, 1 or 2)

    Returns:
        Value(s) with the shape of x
    """
    if nu not in (0, 1, 2):
        raise SmoothingError("derivative order must be 0, 1 or 2")

    scalar = np.isscalar(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    knots = spline.knots
    coef = spline.coefficients

    idx = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, len(knots) - 2)
    u = x - knots[idx]
    a, b, c, d = coef[idx, 0], coef[idx, 1], coef[idx, 2], coef[idx, 3]
    if nu == 0:
        out = a + u * (b + u * (c + u * d))
    elif nu == 1:
        out = b + u * (2 * c + 3 * u * d)
    else:
        out = 2 * c + 6 * u * d

    left = x < knots[0]
    right = x > knots[-1]
    if np.any(left) or np.any(right):
        start_slope = coef[0, 1]
        h = knots[-1] - knots[-2]
        c_last = coef[-1]
        end_value = spline.values[-1]
        end_slope = c_last[1] + h * (2 * c_last[2] + 3 * h * c_last[3])
        if nu == 0:
            out[left] = spline.values[0] + start_slope * (x[left] - knots[0])
            out[right] = end_value + end_slope * (x[right] - knots[-1])
        elif nu == 1:
            out[left] = start_slope
            out[right] = end_slope
        else:
            out[left] = 0.0
            out[right] = 0.0

    return float(out[0]) if scalar else out


def cap_degree(requested: int, n_points: int) -> int:
    """Limit a requested degree to min(15, n - 1)."""
    capped = max(0, min(requested, MAX_POLY_DEGREE, n_points - 1))
    if capped != requested:
        logger.warning(f"Polynomial degree {requested} capped to {capped} for {n_points} points")
    return capped


def fit_polynomial(x: ArrayLike, y: ArrayLike, degree: int) -> PolyFit:
    """
    Least-squares polynomial fit.

    The abscissa is mapped to [-1, 1] and the Vandermonde system is solved
    by QR, never through the normal equations.

    Args:
        x: Abscissae
        y: Ordinates
        degree: Polynomial degree

    Returns:
        PolyFit with ascending-power coefficients in x and the residual RMS

    Raises:
        RankDeficiencyError: If the data cannot support the degree
    """
    x, y = _as_arrays(x, y)
    if degree < 0:
        raise SmoothingError("degree must be non-negative")
    if len(x) == 0:
        raise SmoothingError("cannot fit an empty series")

    distinct = len(np.unique(x))
    if distinct < degree + 1:
        raise RankDeficiencyError(degree, distinct - 1)

    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        hi = lo + 1.0
    mid = (hi + lo) / 2
    half = (hi - lo) / 2
    u = (x - mid) / half

    vander = np.vander(u, degree + 1, increasing=True)
    q, r = np.linalg.qr(vander)
    pivots = np.abs(np.diag(r))
    usable = int(np.sum(pivots > RANK_TOLERANCE * pivots.max()))
    if usable < degree + 1:
        raise RankDeficiencyError(degree, usable - 1)

    scaled = np.linalg.solve(r, q.T @ y)
    residual = y - vander @ scaled
    rms = float(np.sqrt(np.mean(residual ** 2)))

    poly = Polynomial(scaled, domain=[lo, hi], window=[-1, 1])
    coefficients = np.zeros(degree + 1)
    converted = poly.convert().coef
    coefficients[:len(converted)] = converted

    logger.debug(f"Polynomial degree {degree} fit on {len(x)} points, rms={rms:.3g}")
    return PolyFit(
        degree=degree,
        coefficients=coefficients,
        residual_rms=rms,
        domain=(lo, hi),
        scaled_coefficients=scaled,
    )


def eval_polynomial(fit: PolyFit, x):
    """Evaluate a fitted polynomial through its scaled representation."""
    poly = Polynomial(fit.scaled_coefficients, domain=list(fit.domain), window=[-1, 1])
    value = poly(np.asarray(x, dtype=float))
    return float(value) if np.isscalar(x) else value


def uniform_grid(t_start: float, t_end: float, rate: float) -> np.ndarray:
    """Grid t_start + k/rate covering [t_start, t_end]."""
    if rate <= 0:
        raise SmoothingError("resample rate must be positive")
    n = int(np.floor((t_end - t_start) * rate + 1e-9)) + 1
    return t_start + np.arange(n) / rate


def smoother(x: ArrayLike, y: ArrayLike, method: SmoothingMethod):
    """Fitted callable for the chosen method."""
    x, y = _as_arrays(x, y)
    if len(x) == 1:
        value = float(y[0])
        return lambda q: np.full(np.shape(q), value) if np.ndim(q) else value
    if method.kind == "spline":
        return fit_natural_cubic_spline(x, y)
    return fit_polynomial(x, y, cap_degree(method.degree, len(x)))


def resample_uniform(
    t: ArrayLike,
    values: ArrayLike,
    rate: float,
    method: Union[str, SmoothingMethod] = "spline",
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Resample a series onto a uniform grid spanning its time range.

    Args:
        t: Sample times
        values: Samples
        rate: Output rate (Hz)
        method: 'spline', 'poly:<degree>' or a SmoothingMethod

    Returns:
        (grid, smoothed values on the grid)
    """
    if isinstance(method, str):
        method = SmoothingMethod.parse(method)
    t, values = _as_arrays(t, values)
    if len(t) == 0:
        raise SmoothingError("cannot resample an empty series")

    grid = uniform_grid(float(t[0]), float(t[-1]), rate)
    fitted = smoother(t, values, method)
    return grid, np.asarray(fitted(grid), dtype=float)
