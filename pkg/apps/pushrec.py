#!/usr/bin/env python3
"""
pushrec - Push-Recovery Toolkit Command Line

Entry point for the whole pipeline.

Usage:
    python apps/pushrec.py ingest trial.csv -o trial_converted.csv
    python apps/pushrec.py smooth trial_converted.csv -o smooth.csv --method poly:7 --rate 200
    python apps/pushrec.py simulate -o out/ --push 20 --controller capture_cop
    python apps/pushrec.py simulate -o out/ --model chain --chain chain.txt
    python apps/pushrec.py analyze data/ -o report.yaml
    python apps/pushrec.py synth -o trial.csv --handedness right --seed 42
    python apps/pushrec.py plot out/phase.csv -o phase.svg

Exit codes:
    0 success, 1 usage, 2 data error, 3 numeric failure
"""

import sys
import argparse
import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

# Auto-load .env file
from dotenv import load_dotenv
load_dotenv()

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np  # noqa: E402

from lib.batch import expand_inputs, run_batch  # noqa: E402
from lib.console import StatusDisplay, format_verdict, log, print_error  # noqa: E402
from src.config import ACCEL_RANGES, BASELINES, CONTROLLERS, Config, ConfigError  # noqa: E402
from src.dynamics import (  # noqa: E402
    DynamicsError,
    JointState,
    default_chain,
    format_trajectory,
    parse_chain,
    simulate_recovery,
)
from src.gait import (  # noqa: E402
    AnalysisError,
    Baseline,
    analyze_trial,
    cop_asymmetry,
    ideal_gait,
    knee_ankle_tradeoff,
)
from src.integrators import IntegrationError  # noqa: E402
from src.lipm import (  # noqa: E402
    Controller,
    FootGeometry,
    LipmError,
    LipmParams,
    PhasePoint,
    decision_boundary,
    phase_trajectory,
)
from src.plotting import plot_ideal_gait, plot_joint_angles, plot_phase  # noqa: E402
from src.report import build_analysis_report, build_recovery_report, dump_report  # noqa: E402
from src.sensor_ingest import (  # noqa: E402
    DEFAULT_FORCE_RANGE,
    ConvertedTrial,
    Eyes,
    ForceSeries,
    ImuSeries,
    IngestError,
    Joint,
    JointSeries,
    Handedness,
    Lunging,
    PushCondition,
    Sex,
    Side,
    Stance,
    SubjectMeta,
    convert_trial,
    is_converted,
    parse_converted,
    parse_trial,
    serialize_converted,
    serialize_trial,
    zero_correct,
)
from src.smoothing import SmoothingError, SmoothingMethod, resample_uniform, uniform_grid  # noqa: E402
from src.synthetic import PushSpec, synthesize_trial  # noqa: E402
from src.utils import TableError, format_table, output_path, read_table, write_text  # noqa: E402


logger = logging.getLogger("pushrec")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

DATA_ERRORS = (IngestError, AnalysisError, TableError, FileNotFoundError, IsADirectoryError)
NUMERIC_ERRORS = (DynamicsError, IntegrationError, SmoothingError, LipmError)


class MixedSchemaError(IngestError):
    """Raised when raw and converted trial files are mixed in one run."""
    pass


class UsageError(Exception):
    """Raised for flag combinations argparse cannot check."""
    pass


class PushrecParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print_error(message)
        raise SystemExit(EXIT_USAGE)


# =============================================================================
# Shared helpers
# =============================================================================

def load_config(args: argparse.Namespace) -> Config:
    """YAML (explicit --config or PUSHREC_CONFIG), env overrides, then flags."""
    if args.config:
        config = Config.load(args.config)
        config.apply_env()
    else:
        config = Config.load_with_env()

    if args.log_level:
        config.log_level = args.log_level.upper()
    if args.seed is not None:
        config.seed = args.seed
    return config


def override(section, **values) -> None:
    """Set every attribute whose flag was given."""
    for name, value in values.items():
        if value is not None:
            setattr(section, name, value)


def check_config(config: Config) -> None:
    problems = config.validate()
    if problems:
        raise ConfigError("; ".join(problems))


def smoothing_method(config: Config) -> SmoothingMethod:
    method = SmoothingMethod.parse(config.smoothing.method)
    if config.smoothing.method.strip().lower() == "poly":
        method = SmoothingMethod("poly", config.smoothing.poly_degree)
    return method


def clamped_window(window: int, n: int, label: str) -> int:
    if n and window > n:
        logger.warning(f"Rest window {window} clamped to {n} samples for {label}")
        return n
    return window


def convert_raw(text: str, config: Config) -> ConvertedTrial:
    """Parse and convert a raw trial file with the configured scales."""
    trial = parse_trial(text)
    window = clamped_window(config.ingest.rest_window, len(trial), trial.label)
    theta0 = zero_correct(trial, window)
    return convert_trial(
        trial,
        theta0,
        angle_scale=config.ingest.angle_scale,
        accel_full_scale=config.ingest.accel_full_scale,
        gyro_full_scale=config.ingest.gyro_full_scale,
        force_range=config.ingest.force_range,
    )


def load_trial(path: Path, config: Config) -> ConvertedTrial:
    text = path.read_text(encoding="utf-8")
    if is_converted(text):
        return parse_converted(text, config.ingest.force_range)
    return convert_raw(text, config)


def raise_first_error(results) -> None:
    for result in results:
        if not result.ok:
            logger.error(f"{result.path}: {result.error}")
            raise result.error


def parse_weights(text: str) -> Dict[str, float]:
    """Parse 'knee=0.5,hip=0.3,ankle=0.2'."""
    weights = {}
    for item in text.split(","):
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"expected joint=weight, got '{item}'")
        joint, value = (part.strip() for part in item.split("=", 1))
        if joint not in {j.value for j in Joint}:
            raise argparse.ArgumentTypeError(f"unknown joint '{joint}'")
        try:
            weights[joint] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"'{value}' is not a number")
    return weights


def read_force_csv(path: str, force_range: Tuple[float, float]) -> ForceSeries:
    """Two-column (t, force) CSV for one foot."""
    _, data = read_table(Path(path).read_text(encoding="utf-8"))
    if data.shape[1] < 2:
        raise TableError(f"{path}: expected columns t,force")
    return ForceSeries(t=data[:, 0], force=data[:, 1], force_range=force_range)


# =============================================================================
# Subcommands
# =============================================================================

def cmd_ingest(args: argparse.Namespace, config: Config) -> int:
    override(
        config.ingest,
        angle_scale=args.angle_scale,
        rest_window=args.rest_window,
        accel_full_scale=args.accel_range,
        gyro_full_scale=args.gyro_range,
    )
    check_config(config)

    files = expand_inputs(args.inputs)
    many = len(files) > 1 or any(Path(i).is_dir() for i in args.inputs)

    def work(path: Path) -> Path:
        converted = convert_raw(path.read_text(encoding="utf-8"), config)
        return write_text(output_path(args.output, path, "_converted.csv", many),
                          serialize_converted(converted))

    results = run_batch(work, files, args.workers)
    raise_first_error(results)
    for result in results:
        log(f"Wrote {result.value}", level="success")
    return EXIT_OK


def smooth_converted(
    converted: ConvertedTrial,
    rate: Optional[float],
    method: SmoothingMethod,
    force_range: Tuple[float, float] = DEFAULT_FORCE_RANGE,
) -> ConvertedTrial:
    """Resample every channel of a converted trial onto a uniform grid."""
    t = converted.t
    if rate is None:
        rate = float(1.0 / np.median(np.diff(t))) if len(t) > 1 else 100.0

    def resample(values: np.ndarray) -> np.ndarray:
        _, smoothed = resample_uniform(t, values, rate, method)
        return smoothed

    grid = uniform_grid(float(t[0]), float(t[-1]), rate)
    joints = {
        key: JointSeries(joint=s.joint, side=s.side, t=grid, angle=resample(s.angle))
        for key, s in converted.joints.items()
    }
    return ConvertedTrial(
        subject_meta=converted.subject_meta,
        condition=converted.condition,
        joints=joints,
        # splines overshoot between samples; keep force inside the sensor range
        force=ForceSeries(
            t=grid,
            force=np.clip(resample(converted.force.force), *force_range),
            force_range=force_range,
        ),
        imu=ImuSeries(
            t=grid,
            accel=np.column_stack([resample(converted.imu.accel[:, i]) for i in range(3)]),
            gyro=np.column_stack([resample(converted.imu.gyro[:, i]) for i in range(3)]),
        ),
        label=converted.label,
    )


def smooth_table(text: str, rate: Optional[float], method: SmoothingMethod) -> str:
    """Resample every column of an x,y... table against its first column."""
    header, data = read_table(text)
    if data.shape[0] == 0:
        raise TableError("table has no rows")
    x = data[:, 0]
    if rate is None:
        rate = float(1.0 / np.median(np.diff(x))) if len(x) > 1 else 1.0
    columns = []
    grid = None
    for j in range(1, data.shape[1]):
        grid, values = resample_uniform(x, data[:, j], rate, method)
        columns.append(values)
    if grid is None:
        raise TableError("table needs at least two columns")
    return format_table(header, [grid] + columns)


def cmd_smooth(args: argparse.Namespace, config: Config) -> int:
    override(config.smoothing, method=args.method, resample_hz=args.rate)
    check_config(config)
    method = smoothing_method(config)
    rate = config.smoothing.resample_hz

    files = expand_inputs(args.inputs)
    many = len(files) > 1 or any(Path(i).is_dir() for i in args.inputs)

    def work(path: Path) -> Path:
        text = path.read_text(encoding="utf-8")
        if is_converted(text):
            force_range = config.ingest.force_range
            smoothed = smooth_converted(parse_converted(text, force_range), rate, method, force_range)
            out = serialize_converted(smoothed)
        else:
            out = smooth_table(text, rate, method)
        return write_text(output_path(args.output, path, "_smooth.csv", many), out)

    results = run_batch(work, files, args.workers)
    raise_first_error(results)
    for result in results:
        log(f"Wrote {result.value} ({method})", level="success")
    return EXIT_OK


def simulate_lipm_model(args: argparse.Namespace, config: Config, out_dir: Path) -> int:
    lipm = config.lipm
    params = LipmParams(z0=lipm.resolved_z0(), mass=lipm.mass, g=lipm.g)
    foot = FootGeometry(cop_min=lipm.cop_min, cop_max=lipm.cop_max)
    initial = PhasePoint(args.x0, args.xdot0)

    report = phase_trajectory(
        params, foot, initial, args.push,
        controller=Controller(lipm.controller),
        dt=lipm.dt, t_end=lipm.t_end, escape_radius=lipm.escape_radius,
    )
    trajectory = report.trajectory
    write_text(out_dir / "phase.csv", format_table(
        ("t", "x", "xdot", "p"),
        [trajectory.t, trajectory.x, trajectory.xdot, trajectory.p],
        decimals=9,
    ))

    lo = min(float(np.min(trajectory.x)), foot.cop_min) - 0.1
    hi = max(float(np.max(trajectory.x)), foot.cop_max) + 0.1
    boundary = decision_boundary(params, foot).sample(np.linspace(lo, hi, 101))
    write_text(out_dir / "boundary.csv", format_table(("x", "xdot"), [boundary[:, 0], boundary[:, 1]], decimals=9))
    write_text(out_dir / "report.yaml", dump_report(build_recovery_report(report, params, foot, args.push)))

    color = sys.stdout.isatty()
    log(
        f"capture point {report.capture_point:.4f} m, margin {report.boundary_margin:+.4f} m/s: "
        f"{format_verdict(report.verdict.value, color)} "
        f"(simulated {format_verdict(report.outcome.value, color)})",
        level="verdict",
    )
    return EXIT_OK


def simulate_chain_model(args: argparse.Namespace, config: Config, out_dir: Path) -> int:
    if args.chain:
        chain = parse_chain(Path(args.chain).read_text(encoding="utf-8"))
    else:
        meta = SubjectMeta(height=config.lipm.height, weight=args.weight, sex=Sex.MALE,
                           handedness=Handedness.UNKNOWN, age=30.0)
        chain = default_chain(meta, gravity=config.lipm.g)

    control = config.control
    reference = JointState(theta=np.zeros(chain.n), theta_dot=np.zeros(chain.n))
    trajectory = simulate_recovery(
        chain, reference, control.perturbation, control.kp, control.kd,
        dt=control.dt, t_end=control.t_end,
    )
    write_text(out_dir / "trajectory.csv", format_trajectory(trajectory))

    final_error = float(np.max(np.abs(trajectory.theta[-1] - reference.theta)))
    doc = {
        "report_version": 1,
        "kind": "chain_recovery",
        "links": chain.n,
        "kp": control.kp,
        "kd": control.kd,
        "perturbation_rad": control.perturbation,
        "t_end_s": round(float(trajectory.t[-1]), 6),
        "final_max_error_rad": round(final_error, 9),
    }
    write_text(out_dir / "report.yaml", dump_report(doc))
    log(f"{chain.n}-link chain, final max joint error {final_error:.2e} rad", level="verdict")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, config: Config) -> int:
    override(
        config.lipm,
        z0=args.z0, mass=args.mass, g=args.g, cop_min=args.cop_min, cop_max=args.cop_max,
        controller=args.controller, dt=args.dt, t_end=args.t_end,
        escape_radius=args.escape_radius, height=args.height,
    )
    override(config.control, kp=args.kp, kd=args.kd, perturbation=args.perturbation)
    check_config(config)

    out_dir = Path(args.output)
    if args.model == "chain":
        return simulate_chain_model(args, config, out_dir)
    return simulate_lipm_model(args, config, out_dir)


def cmd_analyze(args: argparse.Namespace, config: Config) -> int:
    override(
        config.analysis,
        baseline=args.baseline, threshold=args.threshold, weights=args.weights,
        push_threshold_n=args.push_threshold,
    )
    override(config.ingest, rest_window=args.rest_window)
    check_config(config)
    if (args.cop_left is None) != (args.cop_right is None):
        raise UsageError("--cop-left and --cop-right must be given together")

    files = expand_inputs(args.inputs)
    if not files:
        raise IngestError("no trial files found")
    kinds = {is_converted(f.read_text(encoding="utf-8")) for f in files}
    if len(kinds) > 1:
        raise MixedSchemaError("raw and converted trial files cannot be analysed together")

    analysis = config.analysis
    baseline = Baseline(analysis.baseline)
    if baseline is Baseline.IDEAL:
        baseline = ideal_gait(analysis.cycle_duration)
    fixed_chain = parse_chain(Path(args.chain).read_text(encoding="utf-8")) if args.chain else None

    def work(path: Path):
        converted = load_trial(path, config)
        chain = fixed_chain
        if chain is None and args.torques:
            chain = default_chain(converted.subject_meta, gravity=config.lipm.g)
        return analyze_trial(
            converted,
            baseline=baseline,
            rest_window=config.ingest.rest_window,
            weights=analysis.weights,
            threshold=analysis.threshold,
            push_threshold_n=analysis.push_threshold_n,
            chain=chain,
        )

    results = run_batch(work, files, args.workers)
    raise_first_error(results)
    analyses = [r.value for r in results]

    tradeoff = knee_ankle_tradeoff(
        [(a.metrics[(Joint.KNEE, Side.LEFT)], a.metrics[(Joint.KNEE, Side.RIGHT)]) for a in analyses],
        [(a.metrics[(Joint.ANKLE, Side.LEFT)], a.metrics[(Joint.ANKLE, Side.RIGHT)]) for a in analyses],
    )
    cop_index = None
    if args.cop_left:
        cop_index = cop_asymmetry(
            read_force_csv(args.cop_left, config.ingest.force_range),
            read_force_csv(args.cop_right, config.ingest.force_range),
        )

    settings = {
        "baseline": analysis.baseline,
        "threshold": analysis.threshold,
        "weights": dict(analysis.weights),
        "push_threshold_n": analysis.push_threshold_n,
    }
    doc = build_analysis_report(analyses, tradeoff, cop_index, settings)
    write_text(args.output, dump_report(doc))

    color = sys.stdout.isatty()
    display = StatusDisplay(color=color)
    display.add_header(f"Analysed {len(analyses)} trial(s) -> {args.output}")
    display.add_separator()
    for a in analyses:
        display.add_line(
            f"{a.label:<8} {a.condition.code:<24} "
            f"{format_verdict(a.verdict.inferred.value, color)} "
            f"confidence {a.verdict.confidence:.2f}"
        )
    display.render()
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, config: Config) -> int:
    meta = SubjectMeta(
        height=args.height, weight=args.weight, sex=Sex(args.sex),
        handedness=Handedness(args.handedness), age=args.age, subject_id=args.subject,
    )
    condition = PushCondition(Eyes(args.eyes), Lunging(args.lunging), Stance(args.stance))
    push = None if args.no_push else PushSpec(
        onset=args.push_onset, impulse=args.impulse, knee_share=args.knee_share,
    )

    count = args.count
    for i in range(count):
        trial = synthesize_trial(
            meta, condition, push,
            noise_rms=args.noise, seed=config.seed + i,
            duration=args.duration, sample_rate=args.rate,
            label=f"T{i + 1:02d}",
            gait=ideal_gait(config.analysis.cycle_duration),
            angle_scale=config.ingest.angle_scale,
            accel_full_scale=config.ingest.accel_full_scale,
            gyro_full_scale=config.ingest.gyro_full_scale,
        )
        path = Path(args.output) / f"trial_{i + 1:02d}.csv" if count > 1 else Path(args.output)
        write_text(path, serialize_trial(trial))
        log(f"Wrote {path} (seed {config.seed + i})", level="success")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace, config: Config) -> int:
    kind = args.kind
    if kind == "ideal":
        plot_ideal_gait(ideal_gait(config.analysis.cycle_duration), args.output)
        log(f"Wrote {args.output}", level="success")
        return EXIT_OK
    if not args.input:
        raise UsageError(f"plot --kind {kind} needs an input file")

    text = Path(args.input).read_text(encoding="utf-8")
    if kind == "auto":
        first = next((line for line in text.splitlines() if line.strip()), "")
        kind = "joints" if first.startswith("#") else "phase"

    if kind == "joints":
        converted = load_trial(Path(args.input), config)
        plot_joint_angles(converted, args.output)
    else:
        header, data = read_table(text)
        if "x" not in header or "xdot" not in header:
            raise TableError("phase CSV needs x and xdot columns")
        x = data[:, header.index("x")]
        xdot = data[:, header.index("xdot")]
        if args.boundary:
            _, boundary = read_table(Path(args.boundary).read_text(encoding="utf-8"))
        else:
            lipm = config.lipm
            params = LipmParams(z0=lipm.resolved_z0(), mass=lipm.mass, g=lipm.g)
            foot = FootGeometry(cop_min=lipm.cop_min, cop_max=lipm.cop_max)
            lo = min(float(np.min(x)) if len(x) else 0.0, foot.cop_min) - 0.1
            hi = max(float(np.max(x)) if len(x) else 0.0, foot.cop_max) + 0.1
            boundary = decision_boundary(params, foot).sample(np.linspace(lo, hi, 101))
        plot_phase(x, xdot, boundary, args.output)
    log(f"Wrote {args.output}", level="success")
    return EXIT_OK


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> PushrecParser:
    parser = PushrecParser(
        prog="pushrec",
        description="Sagittal push-recovery toolkit: ingest, smooth, simulate, analyze, synth, plot",
    )
    parser.add_argument("--config", type=str, default=None,
                        help="YAML config file (default: $PUSHREC_CONFIG or config.yaml if present)")
    parser.add_argument("--log-level", type=str, default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level (default: from config, INFO)")
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default: 42)")
    parser.add_argument("--workers", type=int, default=None,
                        help="Threads for directory inputs (default: CPU count, at most 8)")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    # ingest
    p = sub.add_parser("ingest", help="Convert raw trial counts to physical units")
    p.add_argument("inputs", nargs="+", help="Raw trial files or directories")
    p.add_argument("-o", "--output", required=True,
                   help="Output file (one input) or directory (several inputs)")
    p.add_argument("--angle-scale", type=float, default=None,
                   help="Degrees per potentiometer count (default: 300/999)")
    p.add_argument("--rest-window", type=int, default=None,
                   help="Leading samples averaged for the rest posture (default: 10)")
    p.add_argument("--accel-range", type=float, default=None, choices=ACCEL_RANGES,
                   help="Accelerometer full scale in g (default: 16)")
    p.add_argument("--gyro-range", type=float, default=None,
                   help="Gyro full scale in deg/s (default: 2000)")
    p.set_defaults(func=cmd_ingest)

    # smooth
    p = sub.add_parser("smooth", help="Smooth and resample converted trials or x,y tables")
    p.add_argument("inputs", nargs="+", help="Converted trial files, CSV tables or directories")
    p.add_argument("-o", "--output", required=True, help="Output file or directory")
    p.add_argument("--method", type=str, default=None,
                   help="'spline', 'poly' or 'poly:<degree>' (default: spline)")
    p.add_argument("--rate", type=float, default=None,
                   help="Output rate in Hz (default: input rate)")
    p.set_defaults(func=cmd_smooth)

    # simulate
    p = sub.add_parser("simulate", help="Simulate push recovery")
    p.add_argument("-o", "--output", required=True, help="Output directory")
    p.add_argument("--model", choices=["lipm", "chain"], default="lipm",
                   help="Pendulum model or rigid-body chain (default: lipm)")
    p.add_argument("--push", type=float, default=0.0, help="Push impulse in N·s (default: 0)")
    p.add_argument("--x0", type=float, default=0.0, help="Initial CoM position in m (default: 0)")
    p.add_argument("--xdot0", type=float, default=0.0, help="Initial CoM velocity in m/s (default: 0)")
    p.add_argument("--z0", type=float, default=None, help="CoM height in m (default: 0.57 x height)")
    p.add_argument("--height", type=float, default=None, help="Subject height in m (default: 1.70)")
    p.add_argument("--weight", type=float, default=60.0,
                   help="Subject weight for the default chain in kg (default: 60)")
    p.add_argument("--mass", type=float, default=None, help="Pendulum mass in kg (default: 60)")
    p.add_argument("--g", type=float, default=None, help="Gravity in m/s^2 (default: 9.8)")
    p.add_argument("--cop-min", type=float, default=None, help="Rear CoP limit in m (default: -0.05)")
    p.add_argument("--cop-max", type=float, default=None, help="Front CoP limit in m (default: 0.15)")
    p.add_argument("--controller", choices=CONTROLLERS, default=None,
                   help="CoP controller (default: capture_cop)")
    p.add_argument("--dt", type=float, default=None, help="Step in s (default: 0.001)")
    p.add_argument("--t-end", type=float, default=None, help="Horizon in s (default: 3)")
    p.add_argument("--escape-radius", type=float, default=None,
                   help="Fall distance from the foot midpoint in m (default: 1)")
    p.add_argument("--chain", type=str, default=None,
                   help="Chain parameter file (default: anthropometric chain)")
    p.add_argument("--kp", type=float, default=None, help="Joint stiffness gain (default: 100)")
    p.add_argument("--kd", type=float, default=None, help="Joint damping gain (default: 20)")
    p.add_argument("--perturbation", type=float, default=None,
                   help="Initial joint displacement in rad (default: 0.05)")
    p.set_defaults(func=cmd_simulate)

    # analyze
    p = sub.add_parser("analyze", help="Gait and handedness analysis report")
    p.add_argument("inputs", nargs="+", help="Trial files (all raw or all converted) or directories")
    p.add_argument("-o", "--output", required=True, help="Report file (YAML)")
    p.add_argument("--baseline", choices=BASELINES, default=None,
                   help="Deviation baseline (default: pre_push)")
    p.add_argument("--threshold", type=float, default=None,
                   help="Indeterminate handedness threshold (default: 0.1)")
    p.add_argument("--weights", type=parse_weights, default=None,
                   help="Handedness weights, e.g. knee=0.5,hip=0.3,ankle=0.2")
    p.add_argument("--rest-window", type=int, default=None,
                   help="Pre-push window when no push is detected (default: 10)")
    p.add_argument("--push-threshold", type=float, default=None,
                   help="Push detection force floor in N (default: 1.0)")
    p.add_argument("--cop-left", type=str, default=None, help="Left foot t,force CSV")
    p.add_argument("--cop-right", type=str, default=None, help="Right foot t,force CSV")
    p.add_argument("--chain", type=str, default=None, help="Chain file for torque peaks")
    p.add_argument("--torques", action="store_true",
                   help="Report torque peaks using each subject's anthropometric chain")
    p.set_defaults(func=cmd_analyze)

    # synth
    p = sub.add_parser("synth", help="Generate synthetic raw trials")
    p.add_argument("-o", "--output", required=True, help="Output file (directory with --count > 1)")
    p.add_argument("--count", type=int, default=1, help="Number of trials, seeds seed..seed+count-1")
    p.add_argument("--subject", type=str, default="S01", help="Subject id (default: S01)")
    p.add_argument("--height", type=float, default=1.70, help="Height in m (default: 1.70)")
    p.add_argument("--weight", type=float, default=65.0, help="Weight in kg (default: 65)")
    p.add_argument("--sex", choices=[s.value for s in Sex], default="male")
    p.add_argument("--age", type=float, default=25.0, help="Age in years (default: 25)")
    p.add_argument("--handedness", choices=[h.value for h in Handedness], default="right")
    p.add_argument("--eyes", choices=[e.value for e in Eyes], default="open")
    p.add_argument("--lunging", choices=[v.value for v in Lunging], default="without")
    p.add_argument("--stance", choices=[s.value for s in Stance], default="static")
    p.add_argument("--push-onset", type=float, default=1.5, help="Push onset in s (default: 1.5)")
    p.add_argument("--impulse", type=float, default=0.5, help="Push impulse in N·s (default: 0.5)")
    p.add_argument("--knee-share", type=float, default=0.7,
                   help="Knee part of the leg response (default: 0.7)")
    p.add_argument("--no-push", action="store_true", help="Record without a push")
    p.add_argument("--noise", type=float, default=1.0, help="Noise RMS in counts (default: 1)")
    p.add_argument("--duration", type=float, default=4.0, help="Record length in s (default: 4)")
    p.add_argument("--rate", type=float, default=100.0, help="Sample rate in Hz (default: 100)")
    p.set_defaults(func=cmd_synth)

    # plot
    p = sub.add_parser("plot", help="SVG phase plots and joint-angle graphs")
    p.add_argument("input", nargs="?", default=None, help="phase.csv, trial file or none for --kind ideal")
    p.add_argument("-o", "--output", required=True, help="Output SVG file")
    p.add_argument("--kind", choices=["auto", "phase", "joints", "ideal"], default="auto",
                   help="Figure type (default: auto from the input)")
    p.add_argument("--boundary", type=str, default=None,
                   help="boundary.csv to draw (default: computed from the config)")
    p.set_defaults(func=cmd_plot)

    return parser


# =============================================================================
# Entry point
# =============================================================================

def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = load_config(args)
        problems = config.validate()
        if problems:
            raise ConfigError("; ".join(problems))
    except ConfigError as e:
        print_error(str(e))
        return EXIT_USAGE

    logging.basicConfig(level=config.log_level, format=LOG_FORMAT)
    logging.getLogger().setLevel(config.log_level)

    try:
        return args.func(args, config)
    except (ConfigError, UsageError, argparse.ArgumentTypeError) as e:
        print_error(str(e))
        return EXIT_USAGE
    except DATA_ERRORS as e:
        print_error(str(e))
        return EXIT_DATA
    except NUMERIC_ERRORS as e:
        print_error(str(e))
        return EXIT_NUMERIC
    except OSError as e:
        print_error(str(e))
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
