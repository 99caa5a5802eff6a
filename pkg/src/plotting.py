"""
Plotting Module - SVG Figures

Renders single-file SVG figures with matplotlib's Agg backend:

- plot_phase: CoM phase trajectory with the decision boundary line
- plot_joint_angles: hip/knee/ankle angles of both legs over time
- plot_ideal_gait: the reference waveforms over one cycle

The trajectory and boundary lines carry the SVG ids 'trajectory' and
'decision-boundary'. Output is reproducible: the SVG hash salt is fixed
and no date is embedded.

Example:
    from src.plotting import plot_phase

    plot_phase(x, xdot, boundary_xy, "phase.svg")
"""

import logging
import math
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .gait import IdealGait  # noqa: E402
from .sensor_ingest import ConvertedTrial, Joint, Side  # noqa: E402


logger = logging.getLogger(__name__)

SVG_RC = {
    "svg.hashsalt": "pushrec",
    "svg.fonttype": "none",
    "font.size": 10,
}
SIDE_STYLE = {Side.RIGHT: "-", Side.LEFT: "--"}

PathLike = Union[str, Path]


def _figure(width: float = 6.0, height: Optional[float] = None, rows: int = 1):
    golden_ratio = (math.sqrt(5) - 1.0) / 2.0
    height = height or width * golden_ratio * rows
    return plt.subplots(rows, 1, figsize=(width, height), squeeze=False)


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote {path}")
    return path


def plot_phase(
    x,
    xdot,
    boundary_xy: Optional[np.ndarray],
    path: PathLike,
    title: str = "CoM phase plane",
) -> Path:
    """
    Phase plot of a pendulum trajectory.

    Args:
        x: CoM positions (m)
        xdot: CoM velocities (m/s)
        boundary_xy: (k, 2) rows of (x, boundary x_dot), or None
        path: Output SVG path
        title: Axes title
    """
    with matplotlib.rc_context(SVG_RC):
        fig, axes = _figure()
        ax = axes[0, 0]
        line, = ax.plot(x, xdot, color="tab:blue", lw=1.5, label="trajectory")
        line.set_gid("trajectory")
        if boundary_xy is not None and len(boundary_xy):
            boundary = np.asarray(boundary_xy, dtype=float)
            edge, = ax.plot(boundary[:, 0], boundary[:, 1], color="tab:red", lw=1.0,
                            ls="--", label="decision boundary")
            edge.set_gid("decision-boundary")
        ax.set_xlabel("x (m)")
        ax.set_ylabel("x_dot (m/s)")
        ax.set_title(title)
        ax.axhline(0.0, color="0.7", lw=0.5)
        ax.legend(loc="best")
        return _save(fig, path)


def plot_joint_angles(converted: ConvertedTrial, path: PathLike) -> Path:
    """Joint angle graphs, one panel per joint, both legs overlaid."""
    with matplotlib.rc_context(SVG_RC):
        fig, axes = _figure(rows=len(Joint))
        for ax, joint in zip(axes[:, 0], Joint):
            for side in Side:
                series = converted.joint(joint, side)
                line, = ax.plot(series.t, series.angle, SIDE_STYLE[side], lw=1.0,
                                label=f"{side.value} {joint.value}")
                line.set_gid(f"{side.value}-{joint.value}")
            ax.set_ylabel(f"{joint.value} (deg)")
            ax.legend(loc="upper right")
        axes[-1, 0].set_xlabel("t (s)")
        axes[0, 0].set_title(f"{converted.label} {converted.condition.code}")
        return _save(fig, path)


def plot_ideal_gait(gait: IdealGait, path: PathLike) -> Path:
    """Reference waveforms over one normalized cycle."""
    with matplotlib.rc_context(SVG_RC):
        fig, axes = _figure(rows=len(Joint))
        for ax, joint in zip(axes[:, 0], Joint):
            phase, values = gait.sample(joint)
            line, = ax.plot(phase, values, lw=1.2)
            line.set_gid(f"ideal-{joint.value}")
            ax.set_ylabel(f"{joint.value} (deg)")
        axes[-1, 0].set_xlabel("gait cycle phase")
        return _save(fig, path)
