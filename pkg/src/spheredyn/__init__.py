"""spheredyn: dynamics of sphere maps induced by invertible affine maps.

The central object is the homeomorphism x -> (a + T x) / ||a + T x|| of the
unit sphere, certified whenever ||T^-1 a|| < 1.  The toolkit computes its
fixed and periodic points with stability, detects the involution case,
constructs non-distality and non-expansivity witnesses, composes product
systems, and sweeps the (theta, alpha) parameter plane.
"""

from . import errors
from .certificates import (
    CONVERGENCE,
    FIXED_POINT,
    INVOLUTION,
    NONDISTAL_PAIR,
    NONEXPANSIVE_PAIR,
    PERIODIC_ORBIT,
    VerificationReport,
    Witness,
    load_witness,
    save_witness,
    verify,
    witness_from_dict,
    witness_to_dict,
)
from .circle import (
    FixedPointRecord,
    InvolutionReport,
    Stability,
    classify_rotation,
    eigenvector_period2,
    fixed_points_numeric,
    involution_check,
    neg_identity_analysis,
    nondistal_witness_circle,
    rotation_fixed_points,
    rotation_matrix,
)
from .highdim import (
    SearchResult,
    SmLedger,
    conjugate_or_power_search,
    construct_nondistal_instance,
    nonexpansive_witness,
    offset_invariant_plane,
    proximal_convergence_instance,
    restricted_circle_system,
    sm_ledger,
)
from .linalg import (
    SpectralSummary,
    invariant_2plane,
    invert,
    operator_norm,
    spectrum,
)
from .products import (
    ProductSphereSystem,
    Verdict,
    assemble,
    lift_witness,
    product_apply,
    product_distality_verdict,
    product_expansivity_verdict,
    product_from_dict,
    product_to_dict,
    split_blocks,
)
from .reports import certify_nondistal, certify_nonexpansive, classify_system
from .sweep import SweepCell, SweepGrid, grid_values, run_sweep, write_csv
from .system import (
    AffineSphereSystem,
    OrbitSegment,
    apply,
    apply_inverse,
    build,
    orbit,
    scalar_equivariance_check,
    system_from_dict,
    system_to_dict,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
