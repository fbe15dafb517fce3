"""Two-view geometry: eight-point estimation, Sampson scoring, a short
robust model search, pose recovery, and triangulation parallax angles.

Conventions. Pixel points are (x, y); homogeneous scale is 1. Models
satisfy x_b^T M x_a = 0 for a correspondence (x_a, x_b). The calibrated
branch works in normalized camera coordinates K^-1 [x y 1]^T; the world
frame is camera a's frame, camera b is X_b = R X + t, so camera b's
center is -R^T t. Translation scale is not observable; t is unit norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    CheiralityAmbiguity,
    DegenerateConfiguration,
    InsufficientCorrespondences,
    NoModelFound,
)


class CoordinateFrame(Enum):
    PIXEL = "pixel"
    NORMALIZED = "normalized"


class ModelKind(Enum):
    FUNDAMENTAL = "fundamental"
    ESSENTIAL = "essential"


@dataclass(frozen=True)
class Correspondence:
    """One putative match between keypoint idx_a of image a and idx_b of b."""

    idx_a: int
    idx_b: int
    x_a: np.ndarray  # (2,) pixels
    x_b: np.ndarray  # (2,) pixels
    similarity: float


@dataclass(frozen=True)
class TwoViewModel:
    """Robust two-view estimate.

    ``matrix`` is a fundamental matrix in the pixel frame or an essential
    matrix in the normalized frame, depending on ``kind``. ``inliers``
    holds ascending indices into the correspondence list the model was
    estimated from. Pose and triangulation angles are present only for
    essential models.
    """

    kind: ModelKind
    matrix: np.ndarray
    inliers: np.ndarray
    rotation: np.ndarray | None = None
    translation: np.ndarray | None = None
    triangulation_angles: np.ndarray | None = None

    def swapped(self) -> "TwoViewModel":
        """The same model with the roles of image a and b exchanged."""
        rot = None if self.rotation is None else self.rotation.T
        tr = None if self.translation is None else -(self.rotation.T @ self.translation)
        return TwoViewModel(
            kind=self.kind, matrix=self.matrix.T.copy(), inliers=self.inliers,
            rotation=rot, translation=tr,
            triangulation_angles=self.triangulation_angles)


def _arrays(corrs) -> tuple[np.ndarray, np.ndarray]:
    pa = np.asarray([c.x_a for c in corrs], dtype=np.float64).reshape(len(corrs), 2)
    pb = np.asarray([c.x_b for c in corrs], dtype=np.float64).reshape(len(corrs), 2)
    return pa, pb


def _normalized_coords(points: np.ndarray, K: np.ndarray) -> np.ndarray:
    h = np.column_stack([points, np.ones(len(points))])
    return (h @ np.linalg.inv(K).T)[:, :2]


def _hartley(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Translate centroid to the origin, scale mean radius to sqrt(2)."""
    c = points.mean(axis=0)
    mean_dist = float(np.linalg.norm(points - c, axis=1).mean())
    if mean_dist < 1e-9:
        raise DegenerateConfiguration("coincident points")
    s = math.sqrt(2.0) / mean_dist
    T = np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])
    return T, (points - c) * s


def _fix_sign(M: np.ndarray) -> np.ndarray:
    # deterministic sign: largest-magnitude entry positive
    return -M if M.flat[int(np.argmax(np.abs(M)))] < 0 else M


def _fundamental_core(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Normalized eight-point estimate on point arrays; rank-2, unit Frobenius."""
    Ta, na = _hartley(pa)
    Tb, nb = _hartley(pb)
    x1, y1 = na[:, 0], na[:, 1]
    x2, y2 = nb[:, 0], nb[:, 1]
    A = np.column_stack([
        x2 * x1, x2 * y1, x2,
        y2 * x1, y2 * y1, y2,
        x1, y1, np.ones(len(pa)),
    ])
    _, s, Vt = np.linalg.svd(A)
    if s[0] <= 0.0 or s[7] <= s[0] * 1e-10:
        raise DegenerateConfiguration("design matrix rank below 8")
    F = Vt[-1].reshape(3, 3)
    U, sf, Vft = np.linalg.svd(F)
    F = (U * np.array([sf[0], sf[1], 0.0])) @ Vft
    F = Tb.T @ F @ Ta
    F /= np.linalg.norm(F)
    return _fix_sign(F)


def _project_essential(F: np.ndarray) -> np.ndarray:
    U, _, Vt = np.linalg.svd(F)
    # singular values forced to (1, 1, 0): Frobenius norm sqrt(2) by construction
    E = (U * np.array([1.0, 1.0, 0.0])) @ Vt
    return _fix_sign(E)


def _essential_core(na: np.ndarray, nb: np.ndarray) -> np.ndarray:
    """Eight-point on normalized coordinates, projected onto the essential manifold."""
    return _project_essential(_fundamental_core(na, nb))


def estimate_fundamental_8pt(corrs) -> np.ndarray:
    """Fundamental matrix from >= 8 pixel correspondences.

    Hartley-normalized direct linear solution with rank-2 enforcement;
    the result has unit Frobenius norm.
    """
    if len(corrs) < 8:
        raise InsufficientCorrespondences(f"{len(corrs)} < 8")
    pa, pb = _arrays(corrs)
    return _fundamental_core(pa, pb)


def estimate_essential(corrs, K_a: np.ndarray, K_b: np.ndarray) -> np.ndarray:
    """Essential matrix from >= 8 correspondences and both intrinsics.

    Runs the eight-point solver in normalized coordinates and projects the
    result onto the essential manifold (equal leading singular values,
    Frobenius norm sqrt(2)).
    """
    if len(corrs) < 8:
        raise InsufficientCorrespondences(f"{len(corrs)} < 8")
    pa, pb = _arrays(corrs)
    return _essential_core(_normalized_coords(pa, K_a), _normalized_coords(pb, K_b))


def _sampson_batch(M: np.ndarray, pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    ha = np.column_stack([pa, np.ones(len(pa))])
    hb = np.column_stack([pb, np.ones(len(pb))])
    Ma = ha @ M.T    # rows are (M x_a)^T
    Mtb = hb @ M     # rows are (M^T x_b)^T
    num = np.einsum("ij,ij->i", hb, Ma) ** 2
    den = Ma[:, 0] ** 2 + Ma[:, 1] ** 2 + Mtb[:, 0] ** 2 + Mtb[:, 1] ** 2
    out = np.full(len(pa), np.inf)
    nz = den > 0.0
    out[nz] = num[nz] / den[nz]
    return out


def sampson_error(model, corr: Correspondence,
                  frame: CoordinateFrame = CoordinateFrame.PIXEL) -> float:
    """First-order squared epipolar error for one correspondence.

    (x_b^T M x_a)^2 / ((M x_a)_1^2 + (M x_a)_2^2 + (M^T x_b)_1^2 + (M^T x_b)_2^2)

    The formula is frame-agnostic; ``frame`` documents the units of the
    correspondence and therefore of the result (squared pixels or squared
    normalized coordinates). Returns +inf when the denominator vanishes
    (the point sits at both epipoles).
    """
    del frame  # units only; no numerical effect
    M = getattr(model, "matrix", model)
    pa = np.asarray(corr.x_a, dtype=np.float64).reshape(1, 2)
    pb = np.asarray(corr.x_b, dtype=np.float64).reshape(1, 2)
    return float(_sampson_batch(M, pa, pb)[0])


def _sample_indices(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    # partial Fisher-Yates: k draws without replacement
    idx = np.arange(n)
    for i in range(k):
        j = i + int(rng.integers(n - i))
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:k].copy()


def _unit_rows(v: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / np.where(norms > 0.0, norms, 1.0)


def _midpoint(R: np.ndarray, t: np.ndarray, da: np.ndarray,
              db_cam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint triangulation for unit ray bundles.

    ``da`` are rays in the world (= camera a) frame from the origin,
    ``db_cam`` rays in camera b's frame from its center. Returns midpoints
    and a mask of well-conditioned (non-parallel) ray pairs.
    """
    Cb = -(R.T @ t)
    db = db_cam @ R  # rotate each ray into the world frame (R^T per row)
    b = np.einsum("ij,ij->i", da, db)
    w0 = -Cb  # C_a - C_b with C_a at the origin
    d = da @ w0
    e = db @ w0
    denom = 1.0 - b * b
    ok = np.abs(denom) > 1e-12
    safe = np.where(ok, denom, 1.0)
    s = np.where(ok, (b * e - d) / safe, 0.0)
    u = np.where(ok, (e - b * d) / safe, 0.0)
    X = 0.5 * (s[:, None] * da + Cb[None, :] + u[:, None] * db)
    return X, ok


def recover_pose(E: np.ndarray, corrs, K_a: np.ndarray,
                 K_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pick the (R, t) decomposition of E that places points in front.

    All four candidate decompositions are triangulated; the one with the
    most points at positive depth in both cameras wins. Raises
    CheiralityAmbiguity unless the winner covers a strict majority.
    """
    pa, pb = _arrays(corrs)
    da = _unit_rows(np.column_stack([_normalized_coords(pa, K_a), np.ones(len(pa))]))
    db_cam = _unit_rows(np.column_stack([_normalized_coords(pb, K_b), np.ones(len(pb))]))
    U, _, Vt = np.linalg.svd(E)
    if np.linalg.det(U) < 0:
        U = -U
    if np.linalg.det(Vt) < 0:
        Vt = -Vt
    W = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    R1, R2 = U @ W @ Vt, U @ W.T @ Vt
    t = U[:, 2]
    best = None
    for R, tc in ((R1, t), (R1, -t), (R2, t), (R2, -t)):
        X, ok = _midpoint(R, tc, da, db_cam)
        za = X[:, 2]
        zb = (X @ R.T + tc)[:, 2]
        count = int((ok & (za > 0.0) & (zb > 0.0)).sum())
        if best is None or count > best[0]:
            best = (count, R, tc)
    count, R, tc = best
    if count * 2 <= len(corrs):
        raise CheiralityAmbiguity(
            f"best decomposition sees {count}/{len(corrs)} points in front")
    return R, tc


def triangulate_angles(R: np.ndarray, t: np.ndarray, corrs, K_a: np.ndarray,
                       K_b: np.ndarray) -> np.ndarray:
    """Triangulation angle per correspondence, radians in [0, pi].

    Midpoint triangulation; the angle is taken at the point between the
    two camera centers. Failed (near-parallel) triangulations yield 0.
    """
    pa, pb = _arrays(corrs)
    da = _unit_rows(np.column_stack([_normalized_coords(pa, K_a), np.ones(len(pa))]))
    db_cam = _unit_rows(np.column_stack([_normalized_coords(pb, K_b), np.ones(len(pb))]))
    X, ok = _midpoint(R, t, da, db_cam)
    Cb = -(R.T @ t)
    va = X
    vb = X - Cb[None, :]
    cross = np.linalg.norm(np.cross(va, vb), axis=1)
    dot = np.einsum("ij,ij->i", va, vb)
    theta = np.arctan2(cross, dot)
    theta[~ok] = 0.0
    degenerate = (np.linalg.norm(va, axis=1) < 1e-12) | (np.linalg.norm(vb, axis=1) < 1e-12)
    theta[degenerate] = 0.0
    return theta


def short_ransac(corrs, calib: tuple[np.ndarray, np.ndarray] | None = None,
                 iterations: int = 32, inlier_threshold: float = 2.0,
                 rng: np.random.Generator | None = None) -> TwoViewModel:
    """Fixed-iteration robust two-view estimation.

    Hypotheses are eight-point fits on uniform 8-subsets, scored by inlier
    count under the squared Sampson threshold (count ties broken by lower
    total inlier error). The best hypothesis is refit once on its inliers
    and the inlier set is recomputed against the refit model, so stored
    inliers satisfy the threshold by construction.

    ``inlier_threshold`` is a pixel distance; with ``calib`` given the
    search runs in normalized coordinates (essential model) and the
    squared threshold is scaled by the inverse squared mean focal length.
    """
    n = len(corrs)
    if n < 8:
        raise InsufficientCorrespondences(f"{n} < 8")
    if rng is None:
        rng = np.random.default_rng(0)
    pa, pb = _arrays(corrs)
    if calib is not None:
        K_a, K_b = calib
        sa = _normalized_coords(pa, K_a)
        sb = _normalized_coords(pb, K_b)
        fbar = float(np.mean([K_a[0, 0], K_a[1, 1], K_b[0, 0], K_b[1, 1]]))
        threshold_sq = (inlier_threshold / fbar) ** 2
    else:
        sa, sb = pa, pb
        threshold_sq = inlier_threshold ** 2

    # hypotheses stay rank-2 fundamental fits even in the calibrated branch:
    # the essential-manifold projection is brutal on noisy minimal samples,
    # so it is applied only to the final overdetermined refit
    best: tuple[int, float, np.ndarray, np.ndarray] | None = None
    for _ in range(iterations):
        idx = _sample_indices(rng, n, 8)
        try:
            M = _fundamental_core(sa[idx], sb[idx])
        except DegenerateConfiguration:
            continue
        errs = _sampson_batch(M, sa, sb)
        mask = errs < threshold_sq
        count = int(mask.sum())
        if count < 8:
            continue
        total = float(errs[mask].sum())
        if best is None or count > best[0] or (count == best[0] and total < best[1]):
            best = (count, total, M, mask)
    if best is None:
        raise NoModelFound("no hypothesis reached 8 inliers")

    M, mask = best[2], best[3]
    try:
        M = _fundamental_core(sa[mask], sb[mask])
    except DegenerateConfiguration:
        pass  # keep the winning hypothesis as the final model
    if calib is not None:
        M = _project_essential(M)
    errs = _sampson_batch(M, sa, sb)
    inliers = np.flatnonzero(errs < threshold_sq)
    if inliers.size < 8:
        raise NoModelFound("refit model keeps fewer than 8 inliers")

    if calib is None:
        return TwoViewModel(kind=ModelKind.FUNDAMENTAL, matrix=M, inliers=inliers)
    inlier_corrs = [corrs[int(i)] for i in inliers]
    R, t = recover_pose(M, inlier_corrs, K_a, K_b)
    angles = triangulate_angles(R, t, inlier_corrs, K_a, K_b)
    return TwoViewModel(kind=ModelKind.ESSENTIAL, matrix=M, inliers=inliers,
                        rotation=R, translation=t, triangulation_angles=angles)
