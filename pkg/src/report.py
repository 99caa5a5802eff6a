"""
Report Module - Analysis and Recovery Documents

Builds the YAML documents written by the command line:

- analysis reports: per-trial joint metrics, asymmetry indices, handedness
  verdicts, the condition taxonomy, the knee/ankle tradeoff and optional
  CoP asymmetry
- recovery reports: pendulum parameters, the post-push state, capture
  point, boundary margin and verdict

Every document starts with report_version so readers can reject layouts
they do not understand. Floats are rounded to 6 decimals.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import yaml

from .gait import TradeoffReport, TrialAnalysis
from .lipm import FootGeometry, LipmParams, RecoveryReport
from .sensor_ingest import Joint, Side, all_conditions


logger = logging.getLogger(__name__)

REPORT_VERSION = 1
DECIMALS = 6


class ReportError(Exception):
    """Raised for unreadable or unsupported report documents."""
    pass


def _r(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    return round(float(value), DECIMALS)


def condition_taxonomy() -> List[Dict[str, Any]]:
    """The eight push conditions in their fixed order."""
    return [
        {
            "index": i,
            "code": c.code,
            "eyes": c.eyes.value,
            "lunging": c.lunging.value,
            "stance": c.stance.value,
        }
        for i, c in enumerate(all_conditions())
    ]


def trial_entry(analysis: TrialAnalysis) -> Dict[str, Any]:
    """Report section for one analysed trial."""
    joints = {}
    for side in Side:
        for joint, m in sorted(analysis.side_metrics(side).items(), key=lambda kv: list(Joint).index(kv[0])):
            joints[f"{side.value}_{joint.value}"] = {
                "rms_deviation": _r(m.rms_deviation),
                "peak_deviation": _r(m.peak_deviation),
                "activity_score": _r(m.activity_score),
            }

    entry = {
        "label": analysis.label,
        "subject": {
            "id": analysis.subject_meta.subject_id,
            "height_m": _r(analysis.subject_meta.height),
            "weight_kg": _r(analysis.subject_meta.weight),
            "sex": analysis.subject_meta.sex.value,
            "handedness": analysis.subject_meta.handedness.value,
            "age": _r(analysis.subject_meta.age),
        },
        "condition": {"code": analysis.condition.code, "index": analysis.condition.index},
        "push": {
            "onset_s": _r(analysis.push_onset),
            "impulse_Ns": _r(analysis.push_impulse),
            "rest_window": analysis.rest_window,
        },
        "joints": joints,
        "asymmetry": {j.value: _r(v) for j, v in analysis.asymmetry.values.items()},
        "handedness": {
            "inferred": analysis.verdict.inferred.value,
            "confidence": _r(analysis.verdict.confidence),
            "aggregate": _r(analysis.verdict.aggregate),
        },
        "active_joint": f"{analysis.active[1].value}_{analysis.active[0].value}",
    }
    if analysis.torque_peaks is not None:
        entry["torque_peaks_Nm"] = {
            side.value: {j.value: _r(v) for j, v in peaks.items()}
            for side, peaks in analysis.torque_peaks.items()
        }
    return entry


def tradeoff_entry(tradeoff: TradeoffReport) -> Dict[str, Any]:
    return {
        "cross_side_rank_correlation": _r(tradeoff.cross_side_correlation),
        "side_rank_correlation": {s.value: _r(v) for s, v in tradeoff.side_correlation.items()},
        "trials": [
            {
                "knee_ankle_ratio": {s.value: _r(v) for s, v in e.ratios.items()},
                "relation": e.relation,
            }
            for e in tradeoff.entries
        ],
    }


def build_analysis_report(
    analyses: Sequence[TrialAnalysis],
    tradeoff: Optional[TradeoffReport] = None,
    cop_index: Optional[float] = None,
    settings: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Assemble the analysis document.

    Args:
        analyses: Analysed trials in input order
        tradeoff: Knee/ankle tradeoff over the batch
        cop_index: Left/right foot force asymmetry when foot data was given
        settings: Analysis settings echoed into the document
    """
    doc: Dict[str, Any] = {
        "report_version": REPORT_VERSION,
        "kind": "analysis",
        "settings": settings or {},
        "conditions": condition_taxonomy(),
        "trials": [trial_entry(a) for a in analyses],
    }
    if tradeoff is not None:
        doc["knee_ankle_tradeoff"] = tradeoff_entry(tradeoff)
    if cop_index is not None:
        doc["cop_asymmetry"] = _r(cop_index)
    return doc


def build_recovery_report(
    report: RecoveryReport,
    params: LipmParams,
    foot: FootGeometry,
    push: float,
) -> Dict[str, Any]:
    """Assemble the document for one pendulum simulation."""
    return {
        "report_version": REPORT_VERSION,
        "kind": "recovery",
        "model": {
            "z0_m": _r(params.z0),
            "mass_kg": _r(params.mass),
            "g": _r(params.g),
            "omega": _r(params.omega),
            "cop_min_m": _r(foot.cop_min),
            "cop_max_m": _r(foot.cop_max),
        },
        "push_Ns": _r(push),
        "state": {"x": _r(report.state.x), "xdot": _r(report.state.xdot)},
        "capture_point": _r(report.capture_point),
        "boundary_margin": _r(report.boundary_margin),
        "verdict": report.verdict.value,
        "controller": report.controller.value if report.controller else None,
        "outcome": report.outcome.value if report.outcome else None,
        "escape_time_s": _r(report.escape_time),
        "samples": len(report.trajectory),
    }


def dump_report(doc: Dict[str, Any]) -> str:
    """YAML text of a report document, keys in insertion order."""
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


def load_report(text: str) -> Dict[str, Any]:
    """
    Parse a report document.

    Raises:
        ReportError: If the text is not a mapping or the version is unknown
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ReportError(f"invalid report: {e}")
    if not isinstance(doc, dict):
        raise ReportError("report must be a mapping")
    version = doc.get("report_version")
    if version != REPORT_VERSION:
        raise ReportError(f"unsupported report_version {version!r}")
    return doc
