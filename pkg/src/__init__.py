"""
pushrec - Sagittal Push-Recovery Toolkit

A library for studying how people recover balance after a push:
- Sensor ingestion of potentiometer, force and IMU counts
- Natural cubic spline and polynomial smoothing
- Rigid-body joint-torque dynamics of a planar leg/trunk chain
- Linear inverted pendulum recovery and decision boundary
- Gait deviation, left/right asymmetry and handedness analysis

Quick Start:
    from src import parse_trial, zero_correct, convert_trial, analyze_trial

    trial = parse_trial(text)
    converted = convert_trial(trial, zero_correct(trial))
    analysis = analyze_trial(converted)

Modules:
    sensor_ingest.py - Trial files and count conversion
    smoothing.py     - Splines, polynomial fits, resampling
    integrators.py   - Fixed-step RK4
    dynamics.py      - Link chain dynamics and recovery control
    lipm.py          - Inverted pendulum push recovery
    gait.py          - Gait analytics
    synthetic.py     - Synthetic trial generator
    report.py        - YAML report documents
    plotting.py      - SVG figures
    config.py        - Configuration management
"""

# Core classes
from .config import Config
from .sensor_ingest import (
    ConvertedTrial,
    IngestError,
    PushCondition,
    RawTrial,
    SubjectMeta,
    convert_trial,
    parse_trial,
    zero_correct,
)
from .smoothing import fit_natural_cubic_spline, fit_polynomial, resample_uniform
from .dynamics import LinkChain, LinkParams, forward_dynamics, inverse_dynamics
from .lipm import FootGeometry, LipmParams, PhasePoint, classify_recovery, phase_trajectory
from .gait import analyze_trial, deviation_metrics, ideal_gait, infer_handedness
from .synthetic import PushSpec, synthesize_trial

__version__ = "1.0.0"
__author__ = "pushrec Contributors"

__all__ = [
    # Core classes
    "Config",
    "ConvertedTrial",
    "IngestError",
    "PushCondition",
    "RawTrial",
    "SubjectMeta",
    "LinkChain",
    "LinkParams",
    "FootGeometry",
    "LipmParams",
    "PhasePoint",
    "PushSpec",
    # Functions
    "convert_trial",
    "parse_trial",
    "zero_correct",
    "fit_natural_cubic_spline",
    "fit_polynomial",
    "resample_uniform",
    "forward_dynamics",
    "inverse_dynamics",
    "classify_recovery",
    "phase_trajectory",
    "analyze_trial",
    "deviation_metrics",
    "ideal_gait",
    "infer_handedness",
    "synthesize_trial",
]
