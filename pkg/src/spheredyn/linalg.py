"""Small dense real linear algebra used by the dynamics modules.

Everything here is desk scale (dim <= 8 in practice): inversion with a
singularity gate, the operator norm, eigenstructure with contraction and
expansion spaces, and invariant 2-plane extraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, NearUnitModulusAmbiguity, SingularMatrix

TOL_SINGULAR = 1e-12
TOL_UNIT = 1e-9
RANK_TOL = 1e-9
PLANE_RESIDUAL_TOL = 1e-8


def as_matrix(M) -> np.ndarray:
    """Validate and return M as a float ndarray (square, dim >= 2)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] < 2:
        raise ValueError("matrices must have dim >= 2")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def invert(M, tol_singular: float = TOL_SINGULAR) -> np.ndarray:
    """Inverse of M, guarded by |det M| > tol_singular."""
    M = as_matrix(M)
    det = np.linalg.det(M)
    if abs(det) <= tol_singular:
        raise SingularMatrix(f"|det| = {abs(det):.3e} <= {tol_singular:.1e}")
    return np.linalg.inv(M)


def operator_norm(M, rel_tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value of M by power iteration on M^T M.

    Converges when the eigen-residual ||Bv - rho v|| drops below
    rel_tol * rho; raises ConvergenceFailure past max_iter.
    """
    M = as_matrix(M)
    B = M.T @ M
    scale = np.linalg.norm(B, ord="fro")
    if scale == 0.0:
        return 0.0
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(M.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v landed in ker(B); restart off the kernel
            v = rng.standard_normal(M.shape[0])
            v /= np.linalg.norm(v)
            continue
        v = w / nw
        rho = float(v @ (B @ v))
        resid = np.linalg.norm(B @ v - rho * v)
        if resid <= rel_tol * max(rho, np.finfo(float).tiny):
            return float(np.sqrt(max(rho, 0.0)))
    raise ConvergenceFailure(
        f"operator_norm: residual not below {rel_tol:g} within {max_iter} iterations"
    )


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenstructure of a real matrix, as the dynamics modules consume it.

    contraction_basis spans the sum of generalized eigenspaces with
    |lambda| < 1 - TOL_UNIT (orbits there decay to 0); expansion_basis the
    same for |lambda| > 1 + TOL_UNIT.  Eigenvalues within TOL_UNIT of the
    unit circle are listed in near_unit and binned into neither space.
    """

    eigenvalues: np.ndarray  # complex, length dim, sorted by (-|l|, -Re, -Im)
    dominant_modulus: float
    is_proximal: bool
    contraction_basis: np.ndarray  # (dim, k) orthonormal columns
    expansion_basis: np.ndarray  # (dim, k') orthonormal columns
    invariant_2planes: tuple  # of (dim, 2) orthonormal frames
    near_unit: np.ndarray  # eigenvalues flagged as unit-modulus-ambiguous


def _real_mask(eigs: np.ndarray) -> np.ndarray:
    return np.abs(eigs.imag) <= TOL_UNIT * (1.0 + np.abs(eigs))


def _orthonormal_frame(cols) -> np.ndarray:
    """QR-orthonormalize the given column vectors with a fixed sign gauge."""
    A = np.column_stack(cols)
    Q, R = np.linalg.qr(A)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def plane_residual(M: np.ndarray, frame: np.ndarray) -> float:
    """Invariance defect ||(I - P) M P|| for P the projector onto the frame."""
    P = frame @ frame.T
    dim = M.shape[0]
    return float(np.linalg.norm((np.eye(dim) - P) @ M @ P, 2))


def _eig_planes(M: np.ndarray, eigs: np.ndarray, vecs: np.ndarray):
    """Candidate invariant 2-planes: one per complex pair, one per pair of
    independent real eigendirections.  Returns (kind, sort_key, frame) rows."""
    dim = M.shape[0]
    real = _real_mask(eigs)
    planes = []

    # complex pairs: span{Re v, Im v} is exactly invariant
    seen = []
    for i in np.flatnonzero(~real):
        lam = eigs[i]
        if lam.imag < 0:
            continue  # keep one representative per conjugate pair
        if any(abs(lam - mu) <= 1e-9 * (1 + abs(lam)) for mu in seen):
            continue
        seen.append(lam)
        v = vecs[:, i]
        frame = _orthonormal_frame([v.real, v.imag])
        if plane_residual(M, frame) <= PLANE_RESIDUAL_TOL * (1 + np.linalg.norm(M, 2)):
            planes.append(("complex", (abs(lam), lam.real), frame))

    # pairs of real eigendirections
    ridx = sorted(np.flatnonzero(real), key=lambda i: (abs(eigs[i]), eigs[i].real))
    for pos_a in range(len(ridx)):
        for pos_b in range(pos_a + 1, len(ridx)):
            i, j = ridx[pos_a], ridx[pos_b]
            vi, vj = vecs[:, i].real, vecs[:, j].real
            cross = np.linalg.norm(vi) * np.linalg.norm(vj)
            if cross == 0 or abs(1 - abs(vi @ vj) / cross) < 1e-12:
                continue  # parallel directions (repeated eigenvalue)
            frame = _orthonormal_frame([vi, vj])
            if plane_residual(M, frame) <= PLANE_RESIDUAL_TOL * (
                1 + np.linalg.norm(M, 2)
            ):
                planes.append(
                    ("real", (abs(eigs[i]), abs(eigs[j]), eigs[i].real), frame)
                )
    planes.sort(key=lambda rec: (rec[0] != "complex", rec[1]))
    if dim == 2 and not planes:
        planes.append(("whole", (0.0,), np.eye(2)))
    return planes


def spectrum(M, on_near_unit: str = "flag") -> SpectralSummary:
    """Full eigenstructure summary of an invertible matrix.

    on_near_unit: "flag" records unit-ambiguous eigenvalues in the summary,
    "raise" turns them into NearUnitModulusAmbiguity.
    """
    M = as_matrix(M)
    if on_near_unit not in ("flag", "raise"):
        raise ValueError("on_near_unit must be 'flag' or 'raise'")
    det = np.linalg.det(M)
    if abs(det) <= TOL_SINGULAR:
        raise SingularMatrix("spectrum requires an invertible matrix")

    try:
        eigs, vecs = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK hiccup
        raise ConvergenceFailure(f"eigendecomposition failed: {exc}") from exc

    order = np.lexsort((-eigs.imag, -eigs.real, -np.abs(eigs)))
    eigs, vecs = eigs[order], vecs[:, order]

    moduli = np.abs(eigs)
    dominant = float(moduli.max())
    near_unit = eigs[np.abs(moduli - 1.0) <= TOL_UNIT]
    if on_near_unit == "raise" and near_unit.size:
        raise NearUnitModulusAmbiguity(
            f"eigenvalue moduli within {TOL_UNIT:g} of 1: {near_unit}"
        )

    attains = moduli >= dominant * (1.0 - 1e-9)
    is_proximal = bool(attains.sum() == 1 and _real_mask(eigs)[attains][0])

    def _sorted_basis(select):
        try:
            _, Z, sdim = scipy.linalg.schur(M, output="real", sort=select)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise ConvergenceFailure(f"schur reduction failed: {exc}") from exc
        return Z[:, :sdim]

    contraction = _sorted_basis(
        lambda re, im: re * re + im * im < (1.0 - TOL_UNIT) ** 2
    )
    expansion = _sorted_basis(
        lambda re, im: re * re + im * im > (1.0 + TOL_UNIT) ** 2
    )
    planes = tuple(frame for _, _, frame in _eig_planes(M, eigs, vecs))

    return SpectralSummary(
        eigenvalues=eigs,
        dominant_modulus=dominant,
        is_proximal=is_proximal,
        contraction_basis=contraction,
        expansion_basis=expansion,
        invariant_2planes=planes,
        near_unit=near_unit,
    )


def invariant_2plane(M) -> np.ndarray:
    """An orthonormal 2-frame spanning an M-invariant plane.

    Tie-break: prefer a complex-pair plane (smallest modulus first); among
    real eigendirections take the two smallest moduli.  Falls back to
    generalized kernels for repeated real eigenvalues; such a plane always
    exists over the reals for dim >= 2.
    """
    M = as_matrix(M)
    dim = M.shape[0]
    if dim == 2:
        return np.eye(2)

    eigs, vecs = np.linalg.eig(M)
    planes = _eig_planes(M, eigs, vecs)
    if planes:
        return planes[0][2]

    # all real eigendirections parallel: repeated eigenvalue, thin eigenspace
    real = _real_mask(eigs)
    lam = float(sorted(eigs[real].real, key=abs)[0])
    E1 = scipy.linalg.null_space(M - lam * np.eye(dim), rcond=RANK_TOL)
    if E1.shape[1] >= 2:
        frame = E1[:, :2]
    else:
        v1 = E1[:, 0]
        E2 = scipy.linalg.null_space(
            (M - lam * np.eye(dim)) @ (M - lam * np.eye(dim)), rcond=RANK_TOL
        )
        resid = E2 - np.outer(v1, v1 @ E2)
        w = E2[:, int(np.argmax(np.linalg.norm(resid, axis=0)))]
        frame = _orthonormal_frame([v1, w])
    if plane_residual(M, frame) > PLANE_RESIDUAL_TOL * (1 + np.linalg.norm(M, 2)):
        raise ConvergenceFailure("no invariant 2-plane met the residual tolerance")
    return frame
