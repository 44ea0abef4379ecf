"""Classification reports and witness searches for given systems.

This is the composition layer behind the CLI: it aggregates the circle
analyses (involution, periodic points, stability) or, on higher spheres,
the restriction to an invariant circle through the offset, and attaches
distality/expansivity verdicts with replayable witnesses.
"""

from __future__ import annotations

import numpy as np

from . import certificates, circle, highdim, linalg
from .errors import WitnessNotFound
from .system import AffineSphereSystem, system_to_dict

NONDISTAL = "nondistal"
DISTAL = "distal"
NONEXPANSIVE = "nonexpansive"
UNKNOWN = "unknown"


def record_to_dict(rec: circle.FixedPointRecord) -> dict:
    return {
        "point": [float(v) for v in rec.point],
        "period": rec.period,
        "residual": rec.residual,
        "stability": rec.stability.value,
        "multiplier": rec.multiplier,
    }


def _lift_record(rec: circle.FixedPointRecord, frame) -> circle.FixedPointRecord:
    return circle.FixedPointRecord(
        point=frame @ rec.point,
        period=rec.period,
        residual=rec.residual,
        stability=rec.stability,
        multiplier=rec.multiplier,
    )


def _lift_pair_witness(sys, w2: certificates.Witness, frame) -> certificates.Witness:
    """Re-express a restricted-circle pair witness in full-space coordinates.

    The invariant plane rides along so verification can replay the
    restriction (projecting each step, bounding the off-plane residual).
    """
    data = dict(w2.data)
    for key in ("x", "y"):
        data[key] = [float(v) for v in frame @ np.asarray(w2.data[key])]
    data["plane"] = [
        [float(v) for v in frame[:, 0]],
        [float(v) for v in frame[:, 1]],
    ]
    return certificates.Witness(
        kind=w2.kind,
        system=system_to_dict(sys),
        data=data,
        tolerance=w2.tolerance,
        seed=w2.seed,
    )


def certify_nondistal(sys: AffineSphereSystem, horizon: int = 200) -> certificates.Witness | None:
    """A non-distality pair witness for the given system, or None.

    On the circle this is the direct basin search; on higher spheres the
    dynamics is restricted to an invariant 2-plane through the offset and
    the circle witness is lifted back (a pair approaching on the invariant
    circle approaches on the sphere).
    """
    if not (sys.homeo_certified or sys.projective_mode):
        return None
    if sys.dim == 2:
        return circle.nondistal_witness_circle(sys, horizon=horizon)
    try:
        frame = highdim.offset_invariant_plane(sys)
    except WitnessNotFound:
        return None
    sys2 = highdim.restricted_circle_system(sys, frame)
    if not (sys2.homeo_certified or sys2.projective_mode):
        return None
    w2 = circle.nondistal_witness_circle(sys2, horizon=horizon)
    if w2 is None:
        return None
    return _lift_pair_witness(sys, w2, frame)


def certify_nonexpansive(
    sys: AffineSphereSystem, delta: float = 0.01, horizon: int = 500, seed: int = 42
) -> certificates.Witness | None:
    if not (sys.homeo_certified or sys.projective_mode):
        return None
    try:
        return highdim.nonexpansive_witness(sys, delta=delta, horizon=horizon, seed=seed)
    except WitnessNotFound:
        return None


def _spectrum_summary_dict(T) -> dict:
    summary = linalg.spectrum(T)
    return {
        "eigenvalues": [[float(z.real), float(z.imag)] for z in summary.eigenvalues],
        "dominant_modulus": summary.dominant_modulus,
        "is_proximal": summary.is_proximal,
        "contraction_dim": int(summary.contraction_basis.shape[1]),
        "expansion_dim": int(summary.expansion_basis.shape[1]),
    }


def _involution_dict(rep: circle.InvolutionReport) -> dict:
    return {
        "is_involution": rep.is_involution,
        "condition_i": rep.condition_i,
        "condition_ii": rep.condition_ii,
        "condition_iii": rep.condition_iii,
        "max_residual": rep.max_residual,
    }


def classify_system(
    sys: AffineSphereSystem,
    horizon: int = 200,
    delta: float = 0.01,
    exp_horizon: int = 500,
    seed: int = 42,
) -> dict:
    """Full classification report for one system, JSON-ready."""
    report = {
        "dim": sys.dim,
        "sphere_dim": sys.sphere_dim,
        "homeo_certified": sys.homeo_certified,
        "projective_mode": sys.projective_mode,
        "offset_norm": float(np.linalg.norm(sys.a)),
        "contraction_norm": sys.contraction_norm(),
        "spectrum": _spectrum_summary_dict(sys.T),
        "involution": None,
        "fixed_points": [],
        "period2_points": [],
        "distality": {"verdict": UNKNOWN, "witness": None, "reason": None},
        "expansivity": {"verdict": UNKNOWN, "witness": None},
    }
    if not (sys.homeo_certified or sys.projective_mode):
        report["distality"]["reason"] = "system not certified; no analysis attempted"
        return report

    involution = None
    if sys.dim == 2:
        if not sys.projective_mode:
            involution = circle.involution_check(sys)
            report["involution"] = _involution_dict(involution)
        report["fixed_points"] = [
            record_to_dict(r) for r in circle.fixed_points_numeric(sys, 1)
        ]
        if involution is not None and involution.is_involution:
            report["all_points_period_le_2"] = True
        else:
            report["period2_points"] = [
                record_to_dict(r)
                for r in circle.fixed_points_numeric(sys, 2)
                if r.period == 2
            ]
    else:
        try:
            frame = highdim.offset_invariant_plane(sys)
        except WitnessNotFound:
            frame = None
        if frame is not None:
            sys2 = highdim.restricted_circle_system(sys, frame)
            if not (sys2.homeo_certified or sys2.projective_mode):
                frame = None
        if frame is not None:
            report["invariant_circle_plane"] = [
                [float(v) for v in frame[:, 0]],
                [float(v) for v in frame[:, 1]],
            ]
            report["fixed_points"] = [
                record_to_dict(_lift_record(r, frame))
                for r in circle.fixed_points_numeric(sys2, 1)
            ]
            report["period2_points"] = [
                record_to_dict(_lift_record(r, frame))
                for r in circle.fixed_points_numeric(sys2, 2)
                if r.period == 2
            ]

    if involution is not None and involution.is_involution:
        report["distality"] = {
            "verdict": DISTAL,
            "witness": None,
            "reason": "squared map is the identity",
        }
    else:
        witness = certify_nondistal(sys, horizon=horizon)
        if witness is not None:
            report["distality"] = {
                "verdict": NONDISTAL,
                "witness": certificates.witness_to_dict(witness),
                "reason": None,
            }
        else:
            report["distality"] = {
                "verdict": UNKNOWN,
                "witness": None,
                "reason": "no periodic point of period <= 4 found",
            }

    exp_witness = certify_nonexpansive(
        sys, delta=delta, horizon=exp_horizon, seed=seed
    )
    if exp_witness is not None:
        report["expansivity"] = {
            "verdict": NONEXPANSIVE,
            "witness": certificates.witness_to_dict(exp_witness),
        }
    return report
