"""Block-diagonal systems acting factor-wise on products of spheres.

The product map applies each factor's sphere map to its own coordinate;
it is a homeomorphism iff every factor is certified.  Distality and
expansivity verdicts compose: one bad factor spoils the product, and a
factor witness lifts to a product witness by holding every other
coordinate on the orbit of a fixed base point (the max-metric distance of
the lifted pair then equals the factor pair's distance exactly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import certificates
from .errors import DimensionMismatch, EmptyProduct
from .system import AffineSphereSystem, apply, system_from_dict, system_to_dict

NONDISTAL = "nondistal"
DISTAL = "distal"
NONEXPANSIVE = "nonexpansive"
UNKNOWN = "unknown"

_DISTAL_KINDS = frozenset({NONDISTAL, DISTAL, UNKNOWN})
_EXPANSIVE_KINDS = frozenset({NONEXPANSIVE, UNKNOWN})
_LIFTABLE = frozenset({certificates.NONDISTAL_PAIR, certificates.NONEXPANSIVE_PAIR})


@dataclass(frozen=True)
class Verdict:
    kind: str
    witness: certificates.Witness | None = None
    reason: str | None = None


@dataclass(frozen=True)
class ProductSphereSystem:
    factors: tuple[AffineSphereSystem, ...]
    total_dim: int
    block_matrix: np.ndarray
    offset: np.ndarray
    homeo_certified: bool


def assemble(factors) -> ProductSphereSystem:
    """Build the block-diagonal matrix and concatenated offset."""
    factors = tuple(factors)
    if not factors:
        raise EmptyProduct("a product needs at least one factor")
    total = sum(f.dim for f in factors)
    block = np.zeros((total, total))
    offset = np.zeros(total)
    pos = 0
    for f in factors:
        block[pos:pos + f.dim, pos:pos + f.dim] = f.T
        offset[pos:pos + f.dim] = f.a
        pos += f.dim
    return ProductSphereSystem(
        factors=factors,
        total_dim=total,
        block_matrix=block,
        offset=offset,
        homeo_certified=all(f.homeo_certified for f in factors),
    )


def split_blocks(P: ProductSphereSystem):
    """Recover (matrix, offset) slices from the assembled block data."""
    out = []
    pos = 0
    for f in P.factors:
        out.append(
            (
                P.block_matrix[pos:pos + f.dim, pos:pos + f.dim],
                P.offset[pos:pos + f.dim],
            )
        )
        pos += f.dim
    return out


def product_apply(P: ProductSphereSystem, vectors):
    """Apply every factor map to its own coordinate."""
    if len(vectors) != len(P.factors):
        raise DimensionMismatch(
            f"expected {len(P.factors)} component vectors, got {len(vectors)}"
        )
    out = []
    for f, v in zip(P.factors, vectors):
        v = np.asarray(v, dtype=float)
        if v.shape != (f.dim,):
            raise DimensionMismatch(
                f"component of shape {v.shape} does not match factor dim {f.dim}"
            )
        out.append(apply(f, v))
    return out


def product_max_distance(us, vs) -> float:
    """Max-metric distance between two product points."""
    return max(float(np.linalg.norm(u - v)) for u, v in zip(us, vs))


def _base_point(factor: AffineSphereSystem) -> np.ndarray:
    norm = float(np.linalg.norm(factor.a))
    if norm > 0.0:
        return factor.a / norm
    e = np.zeros(factor.dim)
    e[0] = 1.0
    return e


def lift_witness(P: ProductSphereSystem, index: int,
                 w: certificates.Witness) -> certificates.Witness:
    """Lift a factor pair witness into the product.

    Coordinates other than `index` hold a fixed base point along its own
    orbit in both members of the pair, so the max-metric distance at every
    step equals the factor pair's distance.
    """
    if w.kind not in _LIFTABLE:
        raise ValueError(f"witness kind {w.kind} does not lift to products")
    if not 0 <= index < len(P.factors):
        raise ValueError(f"factor index {index} out of range")
    base = [
        [float(v) for v in _base_point(f)]
        for k, f in enumerate(P.factors)
        if k != index
    ]
    return certificates.Witness(
        kind=w.kind,
        system=product_to_dict(P),
        data={"factor_index": index, "factor": dict(w.data), "base_points": base},
        tolerance=w.tolerance,
        seed=w.seed,
    )


def _check_kinds(verdicts, allowed, label):
    for v in verdicts:
        if v.kind not in allowed:
            raise ValueError(f"{label} verdict kind {v.kind!r} not in {sorted(allowed)}")


def product_distality_verdict(P: ProductSphereSystem, factor_verdicts) -> Verdict:
    """Compose factor distality verdicts: any NonDistal wins, all Distal
    stay distal, anything else is Unknown."""
    factor_verdicts = list(factor_verdicts)
    if len(factor_verdicts) != len(P.factors):
        raise DimensionMismatch("one verdict per factor required")
    _check_kinds(factor_verdicts, _DISTAL_KINDS, "distality")
    for idx, v in enumerate(factor_verdicts):
        if v.kind != NONDISTAL:
            continue
        if v.witness is not None and v.witness.kind in _LIFTABLE:
            return Verdict(
                kind=NONDISTAL,
                witness=lift_witness(P, idx, v.witness),
                reason=f"factor {idx} is nondistal",
            )
        return Verdict(kind=NONDISTAL, reason=f"factor {idx} is nondistal")
    if all(v.kind == DISTAL for v in factor_verdicts):
        return Verdict(kind=DISTAL, reason="every factor is distal")
    return Verdict(kind=UNKNOWN)


def product_expansivity_verdict(P: ProductSphereSystem, factor_verdicts) -> Verdict:
    """Compose factor expansivity verdicts: any NonExpansive wins; there is
    no affirmative expansivity verdict, so the rest is Unknown."""
    factor_verdicts = list(factor_verdicts)
    if len(factor_verdicts) != len(P.factors):
        raise DimensionMismatch("one verdict per factor required")
    _check_kinds(factor_verdicts, _EXPANSIVE_KINDS, "expansivity")
    for idx, v in enumerate(factor_verdicts):
        if v.kind != NONEXPANSIVE:
            continue
        if v.witness is not None and v.witness.kind in _LIFTABLE:
            return Verdict(
                kind=NONEXPANSIVE,
                witness=lift_witness(P, idx, v.witness),
                reason=f"factor {idx} is nonexpansive",
            )
        return Verdict(kind=NONEXPANSIVE, reason=f"factor {idx} is nonexpansive")
    return Verdict(kind=UNKNOWN)


def product_to_dict(P: ProductSphereSystem) -> dict:
    """JSON-ready description: {"factors": [system JSON, ...]}."""
    return {"factors": [system_to_dict(f) for f in P.factors]}


def product_from_dict(desc: dict) -> ProductSphereSystem:
    try:
        factor_descs = desc["factors"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed product description: {exc}") from exc
    if not isinstance(factor_descs, list) or not factor_descs:
        raise ValueError("product description needs a nonempty factors list")
    return assemble(system_from_dict(d) for d in factor_descs)
