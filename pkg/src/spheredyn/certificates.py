"""Replayable numerical evidence for every verdict the toolkit emits.

A witness is self-contained: it carries the system description, the
kind-specific payload, the tolerance the claim was made at, and the RNG
seed used for any sampling, so verification is reproducible across
machines.  verify() re-runs the claimed orbits from scratch using only the
sphere-map primitives and passes iff every bound holds at twice the stated
tolerance (slack for re-computation order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import system as system_mod
from .errors import MalformedWitness, SphereDynError

FIXED_POINT = "FixedPoint"
PERIODIC_ORBIT = "PeriodicOrbit"
INVOLUTION = "Involution"
NONDISTAL_PAIR = "NonDistalPair"
NONEXPANSIVE_PAIR = "NonExpansivePair"
CONVERGENCE = "ConvergenceToPoint"

KINDS = frozenset(
    {FIXED_POINT, PERIODIC_ORBIT, INVOLUTION, NONDISTAL_PAIR, NONEXPANSIVE_PAIR,
     CONVERGENCE}
)

REPLAY_TOL = 1e-9  # claimed distances must reproduce this tightly


@dataclass(frozen=True)
class Witness:
    kind: str
    system: dict  # single-system or {"factors": [...]} description
    data: dict
    tolerance: float
    seed: int = 0


@dataclass
class VerificationReport:
    passed: bool
    kind: str
    recomputed_bounds: list = field(default_factory=list)

    def bound(self, name, value, limit, claimed=None):
        ok = bool(value <= limit)
        if claimed is not None:
            ok = ok and abs(value - claimed) <= REPLAY_TOL
        self.recomputed_bounds.append(
            {
                "name": name,
                "value": float(value),
                "limit": float(limit),
                "claimed": None if claimed is None else float(claimed),
                "ok": ok,
            }
        )
        if not ok:
            self.passed = False
        return ok


def witness_to_dict(w: Witness) -> dict:
    return {
        "kind": w.kind,
        "system": w.system,
        "data": w.data,
        "tolerance": float(w.tolerance),
        "seed": str(int(w.seed)),
    }


def witness_from_dict(payload: dict) -> Witness:
    try:
        kind = payload["kind"]
        system = payload["system"]
        data = payload["data"]
        tolerance = float(payload["tolerance"])
        seed = int(str(payload["seed"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedWitness(f"bad witness payload: {exc}") from exc
    if kind not in KINDS:
        raise MalformedWitness(f"unknown witness kind {kind!r}")
    if not isinstance(system, dict) or not isinstance(data, dict):
        raise MalformedWitness("system and data must be objects")
    return Witness(kind=kind, system=system, data=data, tolerance=tolerance, seed=seed)


def save_witness(w: Witness, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(witness_to_dict(w), fh, indent=2)
        fh.write("\n")


def load_witness(path) -> Witness:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedWitness(f"cannot read witness: {exc}") from exc
    return witness_from_dict(payload)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def _vector(data, key, dim) -> np.ndarray:
    try:
        v = np.asarray(data[key], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedWitness(f"witness data missing vector {key!r}: {exc}") from exc
    if v.shape != (dim,):
        raise MalformedWitness(f"vector {key!r} has shape {v.shape}, expected ({dim},)")
    return v


def _rebuild(system_desc: dict):
    try:
        return system_mod.system_from_dict(system_desc)
    except (ValueError, SphereDynError) as exc:
        raise MalformedWitness(f"cannot rebuild system: {exc}") from exc


def _step(sys, x, direction):
    if direction == "forward":
        return system_mod.apply(sys, x)
    return system_mod.apply_inverse(sys, x)


def _frame_from_data(data, dim):
    """Optional invariant-plane frame stored with the witness."""
    if "plane" not in data:
        return None
    frame = np.asarray(data["plane"], dtype=float).T
    if frame.shape != (dim, 2):
        raise MalformedWitness("plane frame must hold two basis vectors of dim size")
    if np.linalg.norm(frame.T @ frame - np.eye(2)) > 1e-8:
        raise MalformedWitness("plane frame is not orthonormal")
    return frame


class _PlaneTracker:
    """Steps points through the restriction to an invariant circle.

    Each raw image is projected back onto the plane; the projection is the
    restriction homeomorphism when the plane is invariant, and the largest
    off-plane residual seen certifies that invariance step by step.
    Points may be single vectors or (dim, m) column batches.
    """

    def __init__(self, sys, frame):
        self.sys = sys
        self.frame = frame
        self.worst = 0.0

    def check_on_plane(self, x):
        proj = self.frame @ (self.frame.T @ x)
        self.worst = max(self.worst, float(np.max(np.linalg.norm(x - proj, axis=0))))

    def step(self, x, direction):
        y = _step(self.sys, x, direction)
        proj = self.frame @ (self.frame.T @ y)
        self.worst = max(self.worst, float(np.max(np.linalg.norm(y - proj, axis=0))))
        return proj / np.linalg.norm(proj, axis=0)


def _verify_fixed_point(sys, w, report):
    x = _vector(w.data, "point", sys.dim)
    period = int(w.data.get("period", 1))
    y = x
    for _ in range(period):
        y = system_mod.apply(sys, y)
    report.bound(
        "residual",
        float(np.linalg.norm(y - x)),
        2.0 * w.tolerance,
        claimed=w.data.get("residual"),
    )


def _verify_periodic_orbit(sys, w, report):
    try:
        pts = [np.asarray(p, dtype=float) for p in w.data["points"]]
        period = int(w.data["period"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedWitness(f"bad periodic orbit payload: {exc}") from exc
    if len(pts) != period:
        raise MalformedWitness("orbit length disagrees with period")
    for i, p in enumerate(pts):
        image = system_mod.apply(sys, p)
        report.bound(
            f"step_{i}_residual",
            float(np.linalg.norm(image - pts[(i + 1) % period])),
            2.0 * w.tolerance,
        )


def _verify_involution(sys, w, report):
    n = int(w.data.get("n_samples", 1000))
    rng = np.random.default_rng(w.seed)
    X = rng.standard_normal((sys.dim, n))
    X /= np.linalg.norm(X, axis=0)
    Y = system_mod.apply(sys, system_mod.apply(sys, X))
    report.bound(
        "max_residual",
        float(np.max(np.linalg.norm(Y - X, axis=0))),
        2.0 * w.tolerance,
    )


def _verify_nondistal_pair(sys, w, report):
    x = _vector(w.data, "x", sys.dim)
    y = _vector(w.data, "y", sys.dim)
    period = int(w.data.get("period", 1))
    horizon = int(w.data["horizon"])
    direction = w.data.get("direction", "forward")
    if direction not in ("forward", "backward"):
        raise MalformedWitness(f"unknown direction {direction!r}")
    sep = float(np.linalg.norm(x - y))
    report.bound(
        "initial_separation_defect",
        max(0.0, float(w.data.get("initial_separation", sep)) - sep),
        REPLAY_TOL,
    )
    tracker = None
    frame = _frame_from_data(w.data, sys.dim)
    cols = np.column_stack([x, y])
    if frame is not None:
        tracker = _PlaneTracker(sys, frame)
        tracker.check_on_plane(cols)
    for _ in range(horizon * period):
        if tracker is not None:
            cols = tracker.step(cols, direction)
        else:
            cols = _step(sys, cols, direction)
    report.bound(
        "final_distance",
        float(np.linalg.norm(cols[:, 0] - cols[:, 1])),
        2.0 * w.tolerance,
        claimed=w.data.get("final_distance"),
    )
    if tracker is not None:
        report.bound("off_plane_residual", tracker.worst, 1e-8)


def _bi_orbit_sup(sys, x, y, horizon, tracker=None):
    sup = float(np.linalg.norm(x - y))
    for direction in ("forward", "backward"):
        cols = np.column_stack([x, y])
        for _ in range(horizon):
            if tracker is not None:
                cols = tracker.step(cols, direction)
            else:
                cols = _step(sys, cols, direction)
            sup = max(sup, float(np.linalg.norm(cols[:, 0] - cols[:, 1])))
    return sup


def _verify_nonexpansive_pair(sys, w, report):
    x = _vector(w.data, "x", sys.dim)
    y = _vector(w.data, "y", sys.dim)
    try:
        delta = float(w.data["delta"])
        horizon = int(w.data["horizon"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedWitness(f"bad non-expansive payload: {exc}") from exc
    tracker = None
    frame = _frame_from_data(w.data, sys.dim)
    if frame is not None:
        tracker = _PlaneTracker(sys, frame)
        tracker.check_on_plane(np.column_stack([x, y]))
    report.bound(
        "separation_defect",
        max(0.0, float(w.data.get("separation", 0.0)) - float(np.linalg.norm(x - y))),
        REPLAY_TOL,
    )
    report.bound(
        "sup_distance",
        _bi_orbit_sup(sys, x, y, horizon, tracker),
        delta,
        claimed=w.data.get("sup_distance"),
    )
    if tracker is not None:
        report.bound("off_plane_residual", tracker.worst, 1e-8)


def _verify_convergence(sys, w, report):
    x = _vector(w.data, "start", sys.dim)
    target = _vector(w.data, "target", sys.dim)
    steps = int(w.data["steps"])
    for _ in range(steps):
        x = system_mod.apply(sys, x)
    report.bound(
        "final_distance",
        float(np.linalg.norm(x - target)),
        2.0 * w.tolerance,
        claimed=w.data.get("final_distance"),
    )


def _verify_product(w: Witness, report: VerificationReport):
    from . import products  # local import to avoid a module cycle

    try:
        prod = products.product_from_dict(w.system)
        j = int(w.data["factor_index"])
        factor_data = dict(w.data["factor"])
        base = [np.asarray(b, dtype=float) for b in w.data["base_points"]]
    except (KeyError, TypeError, ValueError, SphereDynError) as exc:
        raise MalformedWitness(f"bad lifted witness payload: {exc}") from exc
    factors = prod.factors
    if not 0 <= j < len(factors) or len(base) != len(factors) - 1:
        raise MalformedWitness("factor index or base points inconsistent")

    fsys = factors[j]
    fx = _vector(factor_data, "x", fsys.dim)
    fy = _vector(factor_data, "y", fsys.dim)
    horizon = int(factor_data["horizon"])
    period = int(factor_data.get("period", 1))
    direction = factor_data.get("direction", "forward")
    frame = _frame_from_data(factor_data, fsys.dim)
    tracker = _PlaneTracker(fsys, frame) if frame is not None else None

    xs, ys = [], []
    bi = iter(base)
    for k, fac in enumerate(factors):
        if k == j:
            xs.append(fx.copy())
            ys.append(fy.copy())
        else:
            b = next(bi)
            if b.shape != (fac.dim,):
                raise MalformedWitness("base point dimension mismatch")
            xs.append(b.copy())
            ys.append(b.copy())

    def pair_distance():
        return max(
            float(np.linalg.norm(u - v)) for u, v in zip(xs, ys)
        )

    def factor_distance():
        return float(np.linalg.norm(xs[j] - ys[j]))

    directions = (
        [direction] if w.kind == NONDISTAL_PAIR else ["forward", "backward"]
    )

    def step_coord(k, v, dirn):
        if k == j and tracker is not None:
            return tracker.step(v, dirn)
        return _step(factors[k], v, dirn)

    lift_defect = abs(pair_distance() - factor_distance())
    sup = pair_distance()
    final = pair_distance()
    for dirn in directions:
        cx = [u.copy() for u in xs]
        cy = [v.copy() for v in ys]
        for _ in range(horizon * period):
            for k in range(len(factors)):
                cx[k] = step_coord(k, cx[k], dirn)
                cy[k] = step_coord(k, cy[k], dirn)
            dmax = max(float(np.linalg.norm(u - v)) for u, v in zip(cx, cy))
            dfac = float(np.linalg.norm(cx[j] - cy[j]))
            lift_defect = max(lift_defect, abs(dmax - dfac))
            sup = max(sup, dmax)
            final = dmax
    report.bound("lift_defect", lift_defect, 1e-12)
    if w.kind == NONDISTAL_PAIR:
        report.bound(
            "final_distance",
            final,
            2.0 * w.tolerance,
            claimed=factor_data.get("final_distance"),
        )
    else:
        report.bound(
            "sup_distance",
            sup,
            float(factor_data["delta"]),
            claimed=factor_data.get("sup_distance"),
        )
    if tracker is not None:
        report.bound("off_plane_residual", tracker.worst, 1e-8)


_SINGLE_VERIFIERS = {
    FIXED_POINT: _verify_fixed_point,
    PERIODIC_ORBIT: _verify_periodic_orbit,
    INVOLUTION: _verify_involution,
    NONDISTAL_PAIR: _verify_nondistal_pair,
    NONEXPANSIVE_PAIR: _verify_nonexpansive_pair,
    CONVERGENCE: _verify_convergence,
}


def verify(w: Witness) -> VerificationReport:
    """Replay a witness from scratch and check every claimed bound."""
    if w.kind not in KINDS:
        raise MalformedWitness(f"unknown witness kind {w.kind!r}")
    report = VerificationReport(passed=True, kind=w.kind)
    if "factors" in w.system:
        if w.kind not in (NONDISTAL_PAIR, NONEXPANSIVE_PAIR):
            raise MalformedWitness(f"kind {w.kind} cannot be a product witness")
        _verify_product(w, report)
        return report
    sys = _rebuild(w.system)
    try:
        _SINGLE_VERIFIERS[w.kind](sys, w, report)
    except SphereDynError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedWitness(f"witness replay failed: {exc}") from exc
    return report
