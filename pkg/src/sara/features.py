"""Feature-file ingestion and the pipeline's text outputs.

Feature files use a small binary container (conventional extension
``.sarf``), little endian throughout::

    magic    4 bytes   b"SARF"
    version  u32       1
    n        u32       keypoint count
    d        u32       local descriptor dimension
    d_g      u32       global descriptor dimension
    width    u32       image width, pixels
    height   u32       image height, pixels
    flags    u8, u8    has_intrinsics, has_scores
    K        9   f64   row-major, only if has_intrinsics
    xy       n x 2 f32 keypoint positions, (x, y) pixels
    score    n     f32 only if has_scores
    desc     n x d f32 local descriptors, unit rows
    gdesc    d_g   f32 global descriptor, unit norm

The dataset manifest is JSON with keys ``descriptor_dim``, ``global_dim``
and an ordered ``entries`` array of ``{image_id, path, intrinsics?}``.
Entry order defines the canonical node indices used everywhere else.
Relative paths are resolved against the manifest's directory.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    CorruptFile,
    DimensionMismatch,
    DuplicateImageId,
    MissingFile,
    NormalizationFailure,
    OutOfBoundsKeypoint,
)

MAGIC = b"SARF"
VERSION = 1

# renormalize quietly up to float32 round-off; repair up to this; reject beyond
_NORM_REJECT = 1e-3
_NORM_REPAIR = 1e-6


@dataclass(frozen=True)
class ImageFeatures:
    """Per-image detection output plus a global retrieval descriptor."""

    image_id: str
    keypoints: np.ndarray            # (n, 2) float32, pixel coordinates
    descriptors: np.ndarray          # (n, d) float32, unit rows
    global_desc: np.ndarray          # (d_g,) float32, unit norm
    image_size: tuple[int, int]      # (width, height)
    scores: np.ndarray | None = None       # (n,) float32 in [0, 1]
    intrinsics: np.ndarray | None = None   # (3, 3) float64

    @property
    def n_keypoints(self) -> int:
        return int(self.keypoints.shape[0])

    def validate(self) -> None:
        """Check the structural invariants; raise on violation."""
        n = self.keypoints.shape[0]
        if self.keypoints.ndim != 2 or self.keypoints.shape[1] != 2:
            raise ValueError("keypoints must be (n, 2)")
        if self.descriptors.ndim != 2 or self.descriptors.shape[0] != n:
            raise ValueError("descriptor count must match keypoint count")
        if self.scores is not None and self.scores.shape != (n,):
            raise ValueError("score count must match keypoint count")
        w, h = self.image_size
        if w <= 0 or h <= 0:
            raise ValueError("image size must be positive")
        if n:
            x, y = self.keypoints[:, 0], self.keypoints[:, 1]
            if (x < 0).any() or (x >= w).any() or (y < 0).any() or (y >= h).any():
                raise OutOfBoundsKeypoint(
                    f"{self.image_id}: keypoint outside [0,{w}) x [0,{h})")
            norms = np.linalg.norm(self.descriptors.astype(np.float64), axis=1)
            if np.abs(norms - 1.0).max() > 1e-4:
                raise NormalizationFailure(
                    f"{self.image_id}: local descriptors not unit norm")
        gnorm = float(np.linalg.norm(self.global_desc.astype(np.float64)))
        if abs(gnorm - 1.0) > 1e-4:
            raise NormalizationFailure(
                f"{self.image_id}: global descriptor not unit norm")
        if self.scores is not None and self.scores.size:
            if (self.scores < 0).any() or (self.scores > 1).any():
                raise ValueError("scores must lie in [0, 1]")
        if self.intrinsics is not None:
            K = self.intrinsics
            if K.shape != (3, 3) or not np.isfinite(K).all():
                raise ValueError("intrinsics must be a finite 3x3 matrix")
            if K[0, 0] <= 0 or K[1, 1] <= 0:
                raise ValueError("focal lengths must be positive")


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    path: Path
    intrinsics: np.ndarray | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    descriptor_dim: int
    global_dim: int

    @property
    def image_ids(self) -> list[str]:
        return [e.image_id for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def _renormalize(vectors: np.ndarray, what: str, image_id: str) -> np.ndarray:
    """Repair near-unit rows; reject rows beyond the tolerance."""
    arr = np.atleast_2d(vectors)
    norms = np.linalg.norm(arr.astype(np.float64), axis=1)
    if arr.shape[0] and (np.abs(norms - 1.0) > _NORM_REJECT).any():
        worst = float(np.abs(norms - 1.0).max())
        raise NormalizationFailure(
            f"{image_id}: {what} norm off by {worst:.2e} (tolerance {_NORM_REJECT})")
    if arr.shape[0] and (np.abs(norms - 1.0) > _NORM_REPAIR).any():
        arr = (arr.astype(np.float64) / norms[:, None]).astype(np.float32)
    return arr.reshape(vectors.shape)


def write_features(features: ImageFeatures, path: str | Path) -> None:
    """Serialize one image's features to the binary container."""
    features.validate()
    n, d = features.descriptors.shape
    d_g = features.global_desc.shape[0]
    w, h = features.image_size
    has_k = features.intrinsics is not None
    has_s = features.scores is not None
    parts = [
        MAGIC,
        struct.pack("<IIIIII", VERSION, n, d, d_g, w, h),
        struct.pack("<BB", int(has_k), int(has_s)),
    ]
    if has_k:
        parts.append(np.ascontiguousarray(features.intrinsics, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(features.keypoints, dtype="<f4").tobytes())
    if has_s:
        parts.append(np.ascontiguousarray(features.scores, dtype="<f4").tobytes())
    parts.append(np.ascontiguousarray(features.descriptors, dtype="<f4").tobytes())
    parts.append(np.ascontiguousarray(features.global_desc, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_features(path: str | Path, image_id: str | None = None) -> ImageFeatures:
    """Parse a feature file; validates bounds and descriptor norms."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    raw = path.read_bytes()
    if len(raw) < 30 or raw[:4] != MAGIC:
        raise CorruptFile(f"{path}: bad magic or truncated header")
    version, n, d, d_g, w, h = struct.unpack_from("<IIIIII", raw, 4)
    if version != VERSION:
        raise CorruptFile(f"{path}: unsupported version {version}")
    has_k, has_s = struct.unpack_from("<BB", raw, 28)
    off = 30
    expected = off + 72 * int(bool(has_k)) + 4 * (n * 2 + n * int(bool(has_s)) + n * d + d_g)
    if len(raw) != expected:
        raise CorruptFile(f"{path}: size {len(raw)}, expected {expected}")

    def take(count: int, dtype: str) -> np.ndarray:
        nonlocal off
        itemsize = np.dtype(dtype).itemsize
        out = np.frombuffer(raw, dtype=dtype, count=count, offset=off).copy()
        off += count * itemsize
        return out

    K = take(9, "<f8").reshape(3, 3) if has_k else None
    kps = take(n * 2, "<f4").reshape(n, 2)
    scores = take(n, "<f4") if has_s else None
    desc = take(n * d, "<f4").reshape(n, d)
    gdesc = take(d_g, "<f4")

    ident = image_id if image_id is not None else path.stem
    desc = _renormalize(desc, "local descriptor", ident) if n else desc
    gdesc = _renormalize(gdesc[None, :], "global descriptor", ident)[0]
    feats = ImageFeatures(
        image_id=ident, keypoints=kps, descriptors=desc, global_desc=gdesc,
        image_size=(int(w), int(h)), scores=scores, intrinsics=K)
    try:
        feats.validate()
    except ValueError as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    return feats


def _read_header(path: Path) -> tuple[int, int, int]:
    raw = path.open("rb").read(30)
    if len(raw) < 30 or raw[:4] != MAGIC:
        raise CorruptFile(f"{path}: bad magic or truncated header")
    version, n, d, d_g, _, _ = struct.unpack_from("<IIIIII", raw, 4)
    if version != VERSION:
        raise CorruptFile(f"{path}: unsupported version {version}")
    return n, d, d_g


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse and cross-check a dataset manifest.

    Checks that every referenced file exists, header dimensions agree with
    the manifest, and image ids are unique.
    """
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    for key in ("descriptor_dim", "global_dim", "entries"):
        if key not in data:
            raise CorruptFile(f"{path}: missing key {key!r}")
    d, d_g = int(data["descriptor_dim"]), int(data["global_dim"])
    entries = []
    seen: set[str] = set()
    for item in data["entries"]:
        image_id = str(item["image_id"])
        if image_id in seen:
            raise DuplicateImageId(image_id)
        seen.add(image_id)
        fpath = Path(item["path"])
        if not fpath.is_absolute():
            fpath = path.parent / fpath
        if not fpath.exists():
            raise MissingFile(str(fpath))
        fn, fd, fdg = _read_header(fpath)
        if fd != d and fn > 0:
            raise DimensionMismatch(
                f"{image_id}: descriptor dim {fd} != manifest {d}")
        if fdg != d_g:
            raise DimensionMismatch(
                f"{image_id}: global dim {fdg} != manifest {d_g}")
        K = item.get("intrinsics")
        K = np.asarray(K, dtype=np.float64) if K is not None else None
        entries.append(ManifestEntry(image_id=image_id, path=fpath, intrinsics=K))
    return DatasetManifest(entries=tuple(entries), descriptor_dim=d, global_dim=d_g)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write a manifest; paths are stored relative to the manifest when possible."""
    path = Path(path)
    items = []
    for e in manifest.entries:
        try:
            rel = e.path.relative_to(path.parent)
        except ValueError:
            rel = e.path
        item: dict = {"image_id": e.image_id, "path": str(rel)}
        if e.intrinsics is not None:
            item["intrinsics"] = e.intrinsics.tolist()
        items.append(item)
    doc = {
        "descriptor_dim": manifest.descriptor_dim,
        "global_dim": manifest.global_dim,
        "entries": items,
    }
    path.write_text(json.dumps(doc, indent=2) + "\n")


def load_features(manifest: DatasetManifest, image_id: str) -> ImageFeatures:
    """Load one image's features; manifest intrinsics override the file's."""
    for entry in manifest.entries:
        if entry.image_id == image_id:
            break
    else:
        raise MissingFile(f"image id {image_id!r} not in manifest")
    feats = read_features(entry.path, image_id=image_id)
    if feats.descriptors.shape[0] and feats.descriptors.shape[1] != manifest.descriptor_dim:
        raise DimensionMismatch(image_id)
    if feats.global_desc.shape[0] != manifest.global_dim:
        raise DimensionMismatch(image_id)
    if entry.intrinsics is not None:
        feats = replace(feats, intrinsics=entry.intrinsics)
        feats.validate()
    return feats


def write_pair_list(edges, path: str | Path) -> None:
    """Write match pairs, one ``idA idB`` line each, idA < idB, lines sorted.

    Output is deterministic for a given edge set regardless of input order.
    """
    lines = []
    for a, b in edges:
        a, b = str(a), str(b)
        if a == b:
            raise ValueError(f"self-pair {a!r}")
        if any(c.isspace() for c in a + b):
            raise ValueError("image ids must not contain whitespace")
        lines.append(f"{min(a, b)} {max(a, b)}")
    lines.sort()
    Path(path).write_text("".join(line + "\n" for line in lines))


def write_graph_report(graph, scores, image_ids, path: str | Path) -> None:
    """Write the selected-edge report as deterministic JSON.

    ``graph`` is a ViewGraph, ``scores`` the pair-score map it was built
    from, ``image_ids`` the canonical node-index-to-id list. Parallax is
    reported in degrees.
    """
    edges = []
    for (i, j), role in graph.selected_edges:
        score = scores.get((i, j))
        if score is None:
            raise ValueError(f"selected edge ({i}, {j}) has no score")
        edges.append({
            "a": image_ids[i],
            "b": image_ids[j],
            "role": role.value,
            "overlap": score.overlap,
            "parallax_deg": math.degrees(score.parallax),
            "parallax_floored": score.parallax_floored,
            "weight": score.weight,
            "inliers": score.inlier_count,
        })
    n = graph.n_nodes
    total = n * (n - 1) // 2
    n_sel = len(edges)
    by_role: dict[str, int] = {}
    for _, role in graph.selected_edges:
        by_role[role.value] = by_role.get(role.value, 0) + 1
    doc = {
        "summary": {
            "n_nodes": n,
            "n_candidate_edges": len(graph.candidate_edges),
            "n_selected_edges": n_sel,
            "edges_by_role": by_role,
            "n_components": len(graph.components),
            "reduction_ratio": (1.0 - n_sel / total) if total else 0.0,
        },
        "edges": edges,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
