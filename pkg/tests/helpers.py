"""Shared fixtures-adjacent helpers: scene builders and small math oracles.

Everything here is deliberately independent of the library internals where it
serves as an oracle (spearman, rotation distance, chord angles); the scene
builders reuse sara.synth because they only need *a* scene, not a reference
answer.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from sara.config import DEG
from sara.synth import CameraPose, compute_visibility, generate_orbit_scene, look_at

WIDTH, HEIGHT = 1024, 768
K_DEFAULT = np.array([[900.0, 0.0, 512.0], [0.0, 900.0, 384.0], [0.0, 0.0, 1.0]])


def skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def essential_from_pose(rotation: np.ndarray, translation: np.ndarray) -> np.ndarray:
    """E = [t]x R, scaled to Frobenius norm sqrt(2) to match estimator output."""
    e = skew(translation) @ rotation
    return e * (math.sqrt(2.0) / np.linalg.norm(e))


def essential_distance(estimated: np.ndarray, reference: np.ndarray) -> float:
    """Frobenius distance up to the unavoidable sign flip."""
    return min(np.linalg.norm(estimated - reference),
               np.linalg.norm(estimated + reference))


def rot_geodesic(ra: np.ndarray, rb: np.ndarray) -> float:
    """Angle of the relative rotation, radians."""
    c = (np.trace(ra @ rb.T) - 1.0) / 2.0
    return math.acos(min(1.0, max(-1.0, c)))


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return math.atan2(np.linalg.norm(np.cross(u, v)), float(np.dot(u, v)))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation via quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def look_at_rot(center: np.ndarray, target: np.ndarray) -> np.ndarray:
    """World-to-camera rotation, +z toward target.  Independent of synth.look_at."""
    z = target - center
    z = z / np.linalg.norm(z)
    up = np.array([0.0, 0.0, 1.0])
    x = np.cross(up, z)
    if np.linalg.norm(x) < 1e-9:
        x = np.cross(np.array([1.0, 0.0, 0.0]), z)
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    return np.stack([x, y, z])


def project_pixels(points: np.ndarray, rotation: np.ndarray, center: np.ndarray,
                   intrinsics: np.ndarray) -> np.ndarray:
    cam = (points - center) @ rotation.T
    uvw = cam @ intrinsics.T
    return uvw[:, :2] / uvw[:, 2:3]


def to_corrs(kp_a: np.ndarray, kp_b: np.ndarray, similarity: float = 1.0):
    from sara.epipolar import Correspondence
    return [Correspondence(idx_a=i, idx_b=i, x_a=np.asarray(a, dtype=np.float64),
                           x_b=np.asarray(b, dtype=np.float64), similarity=similarity)
            for i, (a, b) in enumerate(zip(kp_a, kp_b))]


@dataclasses.dataclass
class TwoViewCase:
    """A synthetic calibrated pair with ground truth."""

    kp_a: np.ndarray
    kp_b: np.ndarray
    rotation: np.ndarray          # world->cam for each view
    rotation_b: np.ndarray
    center_a: np.ndarray
    center_b: np.ndarray
    points: np.ndarray
    rel_rotation: np.ndarray      # cam a -> cam b
    rel_translation: np.ndarray   # unit direction
    intrinsics: np.ndarray

    @property
    def correspondences(self) -> np.ndarray:
        return np.hstack([self.kp_a, self.kp_b])

    def oracle_angles(self) -> np.ndarray:
        to_a = self.center_a - self.points
        to_b = self.center_b - self.points
        cross = np.linalg.norm(np.cross(to_a, to_b), axis=1)
        dot = np.einsum("ij,ij->i", to_a, to_b)
        return np.arctan2(cross, dot)


def gen_frustum_pair(rng: np.random.Generator, n: int = 120,
                     separation_deg: float | None = None,
                     dist: float = 5.0, noise_px: float = 0.0) -> TwoViewCase:
    """Two cameras on a circle looking at the origin, scene points filling the
    first camera's image plane.

    Filling the frame matters: the eight-point solve degrades sharply when the
    observed points subtend only a few degrees, regardless of baseline.
    """
    sep = (separation_deg if separation_deg is not None
           else rng.uniform(20.0, 60.0)) * DEG
    ca = np.array([dist, 0.0, 0.0])
    cb = dist * np.array([math.cos(sep), math.sin(sep), 0.0])
    ra = look_at_rot(ca, np.zeros(3))
    rb = look_at_rot(cb, np.zeros(3))
    kinv = np.linalg.inv(K_DEFAULT)

    # oversample in view a, keep the ones that also land inside view b
    m = n * 3
    uv = np.column_stack([
        rng.uniform(30.0, WIDTH - 30.0, m),
        rng.uniform(30.0, HEIGHT - 30.0, m),
        np.ones(m),
    ])
    depth = rng.uniform(dist - 1.0, dist + 1.0, m)
    pts = ((uv @ kinv.T) * depth[:, None]) @ ra + ca

    cam_b = (pts - cb) @ rb.T
    uv_b = cam_b @ K_DEFAULT.T
    good = cam_b[:, 2] > 0.1
    with np.errstate(invalid="ignore", divide="ignore"):
        pb = uv_b[:, :2] / uv_b[:, 2:3]
    good &= (pb[:, 0] > 1) & (pb[:, 0] < WIDTH - 1)
    good &= (pb[:, 1] > 1) & (pb[:, 1] < HEIGHT - 1)
    idx = np.flatnonzero(good)[:n]
    if len(idx) < n:
        raise AssertionError(f"frustum generator kept {len(idx)}/{n} points")

    pts = pts[idx]
    kp_a = uv[idx, :2].copy()
    kp_b = pb[idx]
    if noise_px > 0:
        kp_a = kp_a + rng.normal(0.0, noise_px, kp_a.shape)
        kp_b = kp_b + rng.normal(0.0, noise_px, kp_b.shape)

    t_rel = rb @ (ca - cb)
    return TwoViewCase(
        kp_a=kp_a, kp_b=kp_b,
        rotation=ra, rotation_b=rb, center_a=ca, center_b=cb, points=pts,
        rel_rotation=rb @ ra.T, rel_translation=t_rel / np.linalg.norm(t_rel),
        intrinsics=K_DEFAULT.copy(),
    )


def features_from_case(case, seed: int = 0, n_junk: int = 0, d: int = 64,
                       with_intrinsics: bool = True, ids=("a", "b")):
    """Wrap a TwoViewCase as a pair of ImageFeatures.

    Matching points share one descriptor per point (noise-free), so mutual
    nearest neighbors recover the planted correspondence; optional junk
    keypoints get independent descriptors.
    """
    from sara.features import ImageFeatures

    rng = np.random.default_rng(seed)
    n = len(case.kp_a)

    def unit(shape):
        v = rng.normal(size=shape)
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    shared = unit((n, d))
    out = []
    for which, kp in zip(ids, (case.kp_a, case.kp_b)):
        desc = np.vstack([shared, unit((n_junk, d))]) if n_junk else shared.copy()
        junk_kp = np.column_stack([rng.uniform(0, WIDTH, n_junk),
                                   rng.uniform(0, HEIGHT, n_junk)])
        keypoints = np.vstack([kp, junk_kp]) if n_junk else kp.copy()
        out.append(ImageFeatures(
            image_id=which,
            keypoints=np.clip(keypoints, 0, [WIDTH - 1e-3, HEIGHT - 1e-3]).astype(np.float32),
            descriptors=desc.astype(np.float32),
            global_desc=unit(d).astype(np.float32),
            image_size=(WIDTH, HEIGHT),
            intrinsics=case.intrinsics.copy() if with_intrinsics else None))
    return out


def make_weak_scene(seed: int = 11):
    """Orbit scene plus one high-altitude camera that overlaps everything only
    obliquely.  Returns (scene, planted_index)."""
    base = generate_orbit_scene(12, 500, seed=seed)
    center = np.array([0.4, 0.0, 6.0])
    extra = CameraPose(rotation=look_at(center, np.zeros(3)), center=center,
                       intrinsics=base.cameras[0].intrinsics.copy())
    cameras = base.cameras + (extra,)
    vis = compute_visibility(cameras, base.points, base.image_size)
    scene = dataclasses.replace(base, cameras=cameras, visibility=vis)
    return scene, len(base.cameras)


def spearman(x, y) -> float:
    """Spearman rank correlation with average ties.  Plain numpy, no scipy."""
    def ranks(v):
        v = np.asarray(v, dtype=float)
        order = np.argsort(v, kind="stable")
        r = np.empty(len(v))
        r[order] = np.arange(1, len(v) + 1, dtype=float)
        for val in np.unique(v):
            mask = v == val
            if mask.sum() > 1:
                r[mask] = r[mask].mean()
        return r

    rx, ry = ranks(x), ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float((rx ** 2).sum() * (ry ** 2).sum()))
    if denom == 0:
        return 0.0
    return float((rx * ry).sum() / denom)
