"""Dynamics of the sphere map on the unit circle.

Covers the involution criterion, closed-form fixed points of rotation
offsets, the brute-force periodic-point oracle (grid scan + bisection),
attracting/repelling classification through the angle-map multiplier, and
the special cases where the offset is an eigenvector or T = -Id.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import certificates
from .errors import InternalInconsistency, InvalidAlpha, NoFixedPoints
from .system import (
    AffineSphereSystem,
    _apply_cols,
    apply,
    apply_inverse,
    build,
    cinv,
    cmul,
    system_to_dict,
)

TOL_FP = 1e-9
TOL_MULT = 1e-6
TOL_BOUNDARY = 1e-9
TOL_ALIGN = 1e-9
DEDUP_TOL = 1e-8
N_SCAN = 4096
N_SCAN_MAX = 1 << 16
MULT_STEP = 1e-6
_TWO_PI = 2.0 * math.pi


class Stability(enum.Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    NEUTRAL = "neutral"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class FixedPointRecord:
    """A fixed or periodic point with its minimal period.

    multiplier is |d/dphi| of the angle map of the period-th iterate at the
    point; stability is judged against 1 with margin TOL_MULT.
    """

    point: np.ndarray
    period: int
    residual: float
    stability: Stability
    multiplier: float


@dataclass(frozen=True)
class InvolutionReport:
    is_involution: bool
    condition_i: bool  # a is an eigenvector with a real negative eigenvalue
    condition_ii: bool  # other eigenvalue distinct, its eigenvector orthogonal to a
    condition_iii: bool  # lambda_1^2 = ||a||^2 + lambda_2^2
    max_residual: float  # max ||map^2(x) - x|| over the sample grid


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def circle_point(phi):
    """Unit vector(s) at angle(s) phi; batch input gives a (2, m) array."""
    phi = np.asarray(phi, dtype=float)
    return np.array([np.cos(phi), np.sin(phi)])


def wrap_angle(x):
    """Wrap to (-pi, pi]."""
    return np.pi - np.remainder(np.pi - np.asarray(x), _TWO_PI)


def _require_circle(sys: AffineSphereSystem) -> None:
    if sys.dim != 2:
        raise ValueError("circle dynamics requires dim = 2")
    if not (sys.homeo_certified or sys.projective_mode):
        raise ValueError("circle dynamics requires a certified system")


def _iterate(sys: AffineSphereSystem, x: np.ndarray, period: int) -> np.ndarray:
    single = x.ndim == 1
    cols = x.reshape(2, -1)
    for _ in range(period):
        cols = _apply_cols(sys, cols)
    return cols[:, 0] if single else cols


def angle_displacement(sys: AffineSphereSystem, phi, period: int):
    """g(phi) = wrapped angle of (period-th iterate of x(phi)) minus phi."""
    y = _iterate(sys, circle_point(phi), period)
    return wrap_angle(np.arctan2(y[1], y[0]) - phi)


def multiplier(sys: AffineSphereSystem, phi: float, period: int,
               step: float = MULT_STEP) -> float:
    """|d/dphi| of the angle map of the period-th iterate, by central difference."""
    def angle_of(p):
        y = _iterate(sys, circle_point(p), period)
        return math.atan2(y[1], y[0])

    diff = wrap_angle(angle_of(phi + step) - angle_of(phi - step))
    return abs(float(diff)) / (2.0 * step)


def _classify(mult: float) -> Stability:
    if not math.isfinite(mult):
        return Stability.UNDETERMINED
    if mult < 1.0 - TOL_MULT:
        return Stability.ATTRACTING
    if mult > 1.0 + TOL_MULT:
        return Stability.REPELLING
    return Stability.NEUTRAL


def _record_at(sys: AffineSphereSystem, phi: float, period: int,
               stability: Stability | None = None) -> FixedPointRecord:
    x = circle_point(phi)
    residual = float(np.linalg.norm(_iterate(sys, x, period) - x))
    mult = multiplier(sys, phi, period)
    return FixedPointRecord(
        point=x,
        period=period,
        residual=residual,
        stability=_classify(mult) if stability is None else stability,
        multiplier=mult,
    )


# ---------------------------------------------------------------------------
# involution criterion
# ---------------------------------------------------------------------------

def involution_check(sys: AffineSphereSystem, n_samples: int = 1000) -> InvolutionReport:
    """Decide whether the squared map is the identity on the circle.

    The spectral route evaluates the three eigenstructure conditions; the
    sampled route measures max ||map^2(x) - x|| on an equispaced grid.  The
    two verdicts must agree, otherwise InternalInconsistency is raised.
    """
    _require_circle(sys)
    alpha = float(np.linalg.norm(sys.a))
    if alpha == 0.0:
        raise ValueError("involution criterion needs a nonzero offset")
    a_hat = sys.a / alpha

    lam1 = float(a_hat @ (sys.T @ a_hat))
    aligned = np.linalg.norm(sys.T @ a_hat - lam1 * a_hat) <= TOL_ALIGN * (1 + abs(lam1))
    cond_i = bool(aligned and lam1 < 0.0)

    cond_ii = False
    cond_iii = False
    if cond_i:
        lam2 = float(np.trace(sys.T)) - lam1
        if abs(lam2 - lam1) > TOL_ALIGN * (1 + abs(lam1)):
            E = scipy.linalg.null_space(sys.T - lam2 * np.eye(2), rcond=1e-7)
            if E.shape[1] >= 1:
                v2 = E[:, 0]
                cond_ii = bool(abs(v2 @ a_hat) <= TOL_ALIGN)
        cond_iii = bool(
            abs(lam1 * lam1 - alpha * alpha - lam2 * lam2) <= TOL_ALIGN * (1 + lam1 * lam1)
        )

    phis = np.arange(n_samples) * (_TWO_PI / n_samples)
    X = circle_point(phis)
    Y = apply(sys, apply(sys, X))
    max_residual = float(np.max(np.linalg.norm(Y - X, axis=0)))

    spectral = cond_i and cond_ii and cond_iii
    sampled = max_residual < TOL_FP
    if spectral != sampled:
        raise InternalInconsistency(
            f"involution verdicts disagree: spectral={spectral}, "
            f"sampled max residual={max_residual:.3e}"
        )
    return InvolutionReport(
        is_involution=spectral,
        condition_i=cond_i,
        condition_ii=cond_ii,
        condition_iii=cond_iii,
        max_residual=max_residual,
    )


# ---------------------------------------------------------------------------
# closed forms for rotation offsets
# ---------------------------------------------------------------------------

def _radial_multipliers(theta: float, alpha: float):
    """Roots t of t^2 - 2 t cos(theta) + 1 - alpha^2 = 0, largest first."""
    disc = alpha * alpha - math.sin(theta) ** 2
    root = math.sqrt(max(disc, 0.0))
    return math.cos(theta) + root, math.cos(theta) - root


def rotation_fixed_points(theta: float, a) -> list[FixedPointRecord]:
    """Fixed points of the rotation-offset map, in closed form.

    They exist iff cos(theta) >= sqrt(1 - alpha^2) and equal a (t - r)^-1 in
    complex notation, with t a root of the radial quadratic.  Inside the
    tangency band the single degenerate point is tagged Neutral.
    """
    a = np.asarray(a, dtype=float)
    alpha = float(np.linalg.norm(a))
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"||a|| = {alpha:.6g} outside (0, 1)")
    r1, r2 = math.cos(theta), math.sin(theta)
    edge = r1 - math.sqrt(1.0 - alpha * alpha)
    if edge < -TOL_BOUNDARY:
        return []
    sys = build(rotation_matrix(theta), a, require_homeo=True)

    def point_for(t: float) -> np.ndarray:
        return cmul(a, cinv(np.array([t - r1, -r2])))

    if edge <= TOL_BOUNDARY:
        p = point_for(r1)
        p = p / np.linalg.norm(p)
        phi = math.atan2(p[1], p[0])
        rec = _record_at(sys, phi, 1, stability=Stability.NEUTRAL)
        return [rec]

    t_plus, t_minus = _radial_multipliers(theta, alpha)
    records = []
    for t in (t_plus, t_minus):
        p = point_for(t)
        phi = math.atan2(p[1], p[0])
        records.append(_record_at(sys, phi, 1))
    return records


def classify_rotation(theta: float, a) -> tuple[FixedPointRecord, FixedPointRecord]:
    """The (attracting Q, repelling P) pair for cos(theta) > sqrt(1 - alpha^2).

    Computed in the canonical frame a = (0, alpha) where
    Q = (-r2/alpha, +sqrt(alpha^2 - r2^2)/alpha) and P is its conjugate,
    then transported back by scalar equivariance.  The analytic stability
    assignment is cross-checked against the numerical multiplier.
    """
    a = np.asarray(a, dtype=float)
    alpha = float(np.linalg.norm(a))
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"||a|| = {alpha:.6g} outside (0, 1)")
    r1, r2 = math.cos(theta), math.sin(theta)
    if r1 - math.sqrt(1.0 - alpha * alpha) <= TOL_BOUNDARY:
        raise NoFixedPoints(
            f"cos(theta) = {r1:.6g} not above sqrt(1 - alpha^2) + band"
        )
    s = cmul(a, cinv(np.array([0.0, alpha])))  # a = s * (0, alpha)
    root = math.sqrt(alpha * alpha - r2 * r2)
    q_canon = np.array([-r2 / alpha, root / alpha])
    p_canon = np.array([-r2 / alpha, -root / alpha])
    sys = build(rotation_matrix(theta), a, require_homeo=True)

    out = []
    for canon, expected in ((q_canon, Stability.ATTRACTING),
                            (p_canon, Stability.REPELLING)):
        pt = cmul(s, canon)
        phi = math.atan2(pt[1], pt[0])
        rec = _record_at(sys, phi, 1, stability=expected)
        numeric = _classify(rec.multiplier)
        if numeric is not expected:
            raise InternalInconsistency(
                f"stability cross-check failed at {pt}: closed form says "
                f"{expected.value}, multiplier {rec.multiplier:.6g} says {numeric.value}"
            )
        out.append(rec)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# numeric oracle
# ---------------------------------------------------------------------------

def _bisect_root(sys, lo, hi, g_lo, period, width=1e-13):
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        g_mid = float(angle_displacement(sys, mid, period))
        if g_mid == 0.0:
            return mid
        if (g_lo < 0) != (g_mid < 0):
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    return 0.5 * (lo + hi)


def _scan_roots(sys, period, n):
    phis = np.arange(n) * (_TWO_PI / n)
    g = np.asarray(angle_displacement(sys, phis, period))
    if np.max(np.abs(g)) < 1e-12:
        return None  # iterate is numerically the identity
    roots = []
    node = np.abs(g) <= 1e-14
    roots.extend(phis[node])
    g_next = np.roll(g, -1)
    phi_next = np.concatenate([phis[1:], [_TWO_PI]])
    crossing = (
        (np.sign(g) * np.sign(g_next) < 0)
        & (np.abs(g) + np.abs(g_next) < np.pi)
        & ~node
        & ~np.roll(node, -1)
    )
    for i in np.flatnonzero(crossing):
        roots.append(_bisect_root(sys, phis[i], phi_next[i], float(g[i]), period))
    return sorted(wrap_angle(np.asarray(roots)) % _TWO_PI)


def _dedup_angles(angles, tol=DEDUP_TOL):
    out = []
    for phi in angles:
        if any(abs(wrap_angle(phi - q)) < tol for q in out):
            continue
        out.append(phi)
    # wrap-around duplicates
    if len(out) > 1 and abs(wrap_angle(out[-1] - out[0])) < tol:
        out.pop()
    return out


def fixed_points_numeric(sys: AffineSphereSystem, period: int) -> list[FixedPointRecord]:
    """Brute-force periodic-point search for the given period (1..4).

    Scans the angle displacement of the period-th iterate on a uniform grid,
    brackets sign changes, bisects each bracket to width 1e-13, deduplicates,
    and tags every point with its true minimal period and its stability.
    The grid doubles (up to 2^16) whenever two detected roots fall within 4
    cells of each other.  If the iterate is numerically the identity map
    (an involution case), there are no isolated periodic points and the
    result is empty; callers should run involution_check first.
    """
    _require_circle(sys)
    if period not in (1, 2, 3, 4):
        raise ValueError("period must be in {1, 2, 3, 4}")
    n = N_SCAN
    while True:
        roots = _scan_roots(sys, period, n)
        if roots is None:
            return []
        roots = _dedup_angles(roots)
        if len(roots) < 2 or n >= N_SCAN_MAX:
            break
        gaps = [
            abs(wrap_angle(roots[(i + 1) % len(roots)] - roots[i]))
            for i in range(len(roots))
        ]
        if min(gaps) >= 4 * (_TWO_PI / n):
            break
        n *= 2

    records = []
    for phi in roots:
        x = circle_point(phi)
        minimal = period
        for d in range(1, period):
            if period % d == 0:
                if np.linalg.norm(_iterate(sys, x, d) - x) < DEDUP_TOL:
                    minimal = d
                    break
        records.append(_record_at(sys, phi, minimal))
    return records


# ---------------------------------------------------------------------------
# special offsets
# ---------------------------------------------------------------------------

def neg_identity_analysis(a) -> list[FixedPointRecord]:
    """Period-two structure for T = -Id: the four points in closed form.

    In the canonical frame these are +-a/||a|| (repelling for the squared
    map) and x0 = (-sqrt(1 - alpha^2/4), alpha/2), a - x0 (attracting); the
    second coordinate alpha/2 is forced by ||a - x0|| = 1.  The list is
    cross-checked against the numeric period-2 oracle.
    """
    a = np.asarray(a, dtype=float)
    alpha = float(np.linalg.norm(a))
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"||a|| = {alpha:.6g} outside (0, 1)")
    sys = build(-np.eye(2), a, require_homeo=True)
    s = cmul(a, cinv(np.array([0.0, alpha])))
    half = 0.5 * alpha
    wing = math.sqrt(1.0 - half * half)
    canon = [
        (np.array([0.0, 1.0]), Stability.REPELLING),
        (np.array([0.0, -1.0]), Stability.REPELLING),
        (np.array([-wing, half]), Stability.ATTRACTING),
        (np.array([wing, half]), Stability.ATTRACTING),
    ]
    records = []
    for pt_c, expected in canon:
        pt = cmul(s, pt_c)
        phi = math.atan2(pt[1], pt[0])
        rec = _record_at(sys, phi, 2, stability=expected)
        numeric = _classify(rec.multiplier)
        if numeric is not expected:
            raise InternalInconsistency(
                f"T = -Id stability cross-check failed at {pt}: expected "
                f"{expected.value}, multiplier gives {numeric.value}"
            )
        records.append(rec)

    oracle = fixed_points_numeric(sys, 2)
    if len(oracle) != 4:
        raise InternalInconsistency(
            f"numeric oracle found {len(oracle)} period-2 points, expected 4"
        )
    for rec in records:
        if not any(np.linalg.norm(rec.point - o.point) < DEDUP_TOL for o in oracle):
            raise InternalInconsistency(
                f"closed-form point {rec.point} missing from the numeric oracle"
            )
    return records


def eigenvector_period2(sys: AffineSphereSystem) -> FixedPointRecord | None:
    """The period-2 point a/||a|| when a is an eigenvector for a negative
    eigenvalue.

    With T a = lambda_1 a, lambda_1 < 0 and alpha < |lambda_1| (implied by
    certification), a + lambda_1 a/||a|| points opposite to a, so the map
    swaps +-a/||a||.  Returns None when the offset is not such an eigenvector.
    """
    _require_circle(sys)
    alpha = float(np.linalg.norm(sys.a))
    if alpha == 0.0:
        return None
    a_hat = sys.a / alpha
    lam = float(a_hat @ (sys.T @ a_hat))
    aligned = np.linalg.norm(sys.T @ a_hat - lam * a_hat) <= TOL_ALIGN * (1 + abs(lam))
    if not aligned or lam >= 0.0:
        return None
    phi = math.atan2(a_hat[1], a_hat[0])
    return _record_at(sys, phi, 2)


# ---------------------------------------------------------------------------
# non-distality witness
# ---------------------------------------------------------------------------

_STABILITY_RANK = {
    Stability.ATTRACTING: 0,
    Stability.REPELLING: 1,
    Stability.NEUTRAL: 2,
    Stability.UNDETERMINED: 3,
}


def _pair_distance_after(sys, x, y, period, steps, direction):
    stepper = apply if direction == "forward" else apply_inverse
    for _ in range(steps * period):
        x = stepper(sys, x)
        y = stepper(sys, y)
    return float(np.linalg.norm(x - y))


def nondistal_witness_circle(
    sys: AffineSphereSystem,
    horizon: int = 200,
    close_tol: float = 1e-6,
    min_separation: float = 1e-3,
) -> certificates.Witness | None:
    """A replayable pair witnessing non-distality on the circle.

    Locates a periodic point of period <= 4, then looks for a pair in its
    basin whose distance after `horizon` applications of the period map
    drops below close_tol while starting at least min_separation apart
    (backward iteration is tried when the point only attracts for the
    inverse).  Returns None for involutions (the map is distal there) and
    when no periodic point of period <= 4 exists.
    """
    _require_circle(sys)
    if float(np.linalg.norm(sys.a)) > 0.0 and involution_check(sys).is_involution:
        return None

    seen: list[float] = []
    candidates: list[FixedPointRecord] = []
    for p in (1, 2, 3, 4):
        for rec in fixed_points_numeric(sys, p):
            phi = math.atan2(rec.point[1], rec.point[0])
            if any(abs(wrap_angle(phi - q)) < DEDUP_TOL for q in seen):
                continue
            seen.append(phi)
            candidates.append(rec)
    if not candidates:
        return None

    candidates.sort(
        key=lambda r: (
            _STABILITY_RANK[r.stability],
            math.atan2(r.point[1], r.point[0]),
        )
    )
    offsets = [
        (1e-4, 1.35e-3),
        (-1e-4, -1.35e-3),
        (1e-3, 2.5e-3),
        (-1e-3, -2.5e-3),
    ]
    for rec in candidates:
        phi_star = math.atan2(rec.point[1], rec.point[0])
        for direction in ("forward", "backward"):
            for (u, v) in offsets:
                x0 = circle_point(phi_star + u)
                y0 = circle_point(phi_star + v)
                sep = float(np.linalg.norm(x0 - y0))
                if sep < min_separation:
                    continue
                final = _pair_distance_after(sys, x0, y0, rec.period, horizon, direction)
                if final < close_tol:
                    return certificates.Witness(
                        kind=certificates.NONDISTAL_PAIR,
                        system=system_to_dict(sys),
                        data={
                            "x": [float(t) for t in x0],
                            "y": [float(t) for t in y0],
                            "period": rec.period,
                            "horizon": horizon,
                            "direction": direction,
                            "initial_separation": sep,
                            "final_distance": final,
                        },
                        tolerance=close_tol,
                        seed=0,
                    )
    return None
