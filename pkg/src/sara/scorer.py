"""Pair informativeness scoring: overlap x parallax.

A pair's overlap is its verified inlier count normalized by the geometric
mean of the two keypoint counts; its parallax is the lower-median
triangulation angle of the inliers. The selection weight is
overlap^alpha * min(parallax, cap)^beta, and pairs falling below either
threshold are kept with a rejection reason instead of being dropped, so
the decision stays re-checkable from the stored numbers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import SaraConfig
from .epipolar import Correspondence, TwoViewModel, short_ransac
from .errors import EstimationError
from .features import ImageFeatures


class RejectReason(Enum):
    TOO_FEW_MUTUAL_NN = "too_few_mutual_nn"
    NO_MODEL = "no_model"
    BELOW_OVERLAP = "below_overlap"
    BELOW_PARALLAX = "below_parallax"


@dataclass(frozen=True)
class PairScore:
    """Stored scoring outcome for one candidate pair.

    ``parallax`` is the raw lower-median triangulation angle in radians;
    the saturation cap is applied only inside ``weight``. Rejected pairs
    carry weight 0 and the reason; overlap and parallax stay populated
    whenever they were computed so the rejection predicate can be
    re-checked. ``parallax_floored`` marks uncalibrated pairs whose
    parallax was pinned to the rejection threshold.
    """

    i: int
    j: int
    overlap: float
    parallax: float
    weight: float
    inlier_count: int
    model: TwoViewModel | None = None
    rejected: RejectReason | None = None
    parallax_floored: bool = False


def lower_median(values) -> float:
    """Order statistic at floor((n-1)/2): the lower median for even counts."""
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("lower_median of empty sequence")
    return float(arr[(arr.size - 1) // 2])


def mutual_nn_matches(fa: ImageFeatures, fb: ImageFeatures, b: int) -> list[Correspondence]:
    """Mutual nearest-neighbor correspondences, best-first, at most b.

    A pair (p, q) matches when q is p's best neighbor and p is q's best
    neighbor under cosine similarity. Ties in the argmax and in the final
    ordering break toward lower indices.
    """
    if fa.n_keypoints == 0 or fb.n_keypoints == 0:
        return []
    sims = fa.descriptors.astype(np.float64) @ fb.descriptors.astype(np.float64).T
    best_ab = np.argmax(sims, axis=1)   # first occurrence wins ties
    best_ba = np.argmax(sims, axis=0)
    p = np.arange(fa.n_keypoints)
    mutual = best_ba[best_ab] == p
    matches = [
        Correspondence(
            idx_a=int(pi), idx_b=int(best_ab[pi]),
            x_a=fa.keypoints[pi].astype(np.float64),
            x_b=fb.keypoints[best_ab[pi]].astype(np.float64),
            similarity=float(sims[pi, best_ab[pi]]))
        for pi in p[mutual]
    ]
    matches.sort(key=lambda c: (-c.similarity, c.idx_a, c.idx_b))
    return matches[:b]


def _pair_rng(seed: int, stream: int) -> np.random.Generator:
    # counter-based generator keyed by (run seed, pair stream id)
    mask = (1 << 64) - 1
    key = np.array([seed & mask, stream & mask], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def score_pair(fa: ImageFeatures, fb: ImageFeatures, config: SaraConfig,
               rng: np.random.Generator | None = None,
               pair: tuple[int, int] = (0, 1)) -> PairScore:
    """Score one candidate pair.

    The computation is canonicalized on image id order, so swapping the
    arguments returns identical overlap, parallax and weight with the
    geometry mirrored to match the argument order. Pairs without both
    intrinsics get parallax pinned to the rejection threshold and are
    flagged, leaving overlap to differentiate them.
    """
    i, j = pair
    swap = fa.image_id > fb.image_id
    if swap:
        fa, fb = fb, fa
    if rng is None:
        rng = _pair_rng(config.seed, 0)

    def rejected(reason: RejectReason, overlap=0.0, parallax=0.0,
                 inliers=0, model=None, floored=False) -> PairScore:
        if swap and model is not None:
            model = model.swapped()
        return PairScore(i=i, j=j, overlap=overlap, parallax=parallax, weight=0.0,
                         inlier_count=inliers, model=model, rejected=reason,
                         parallax_floored=floored)

    matches = mutual_nn_matches(fa, fb, config.b)
    if len(matches) < 8:
        return rejected(RejectReason.TOO_FEW_MUTUAL_NN)

    calibrated = fa.intrinsics is not None and fb.intrinsics is not None
    calib = (fa.intrinsics, fb.intrinsics) if calibrated else None
    try:
        model = short_ransac(matches, calib=calib,
                             iterations=config.ransac_iterations,
                             inlier_threshold=config.inlier_threshold_px, rng=rng)
    except EstimationError:
        return rejected(RejectReason.NO_MODEL)

    overlap = float(model.inliers.size) / math.sqrt(fa.n_keypoints * fb.n_keypoints)
    if calibrated:
        parallax = lower_median(model.triangulation_angles)
        floored = False
    else:
        parallax = config.tau_p
        floored = True
    weight = overlap ** config.alpha * min(parallax, config.parallax_cap) ** config.beta

    if overlap < config.tau_o:
        return rejected(RejectReason.BELOW_OVERLAP, overlap, parallax,
                        int(model.inliers.size), model, floored)
    if parallax < config.tau_p:
        return rejected(RejectReason.BELOW_PARALLAX, overlap, parallax,
                        int(model.inliers.size), model, floored)
    if swap:
        model = model.swapped()
    return PairScore(i=i, j=j, overlap=overlap, parallax=parallax, weight=weight,
                     inlier_count=int(model.inliers.size), model=model,
                     parallax_floored=floored)


def score_all(features, candidates, config: SaraConfig,
              threads: int = 1) -> dict[tuple[int, int], PairScore]:
    """Score every candidate pair; deterministic for a given config seed.

    ``features`` is the loaded feature list in manifest order; candidate
    pairs index into it. Each pair draws from its own counter-based RNG
    stream keyed by the pair's index, so results do not depend on thread
    count or scheduling.
    """
    n = len(features)
    pairs = sorted(candidates.pairs if hasattr(candidates, "pairs") else candidates)

    def work(pair: tuple[int, int]) -> PairScore:
        i, j = pair
        rng = _pair_rng(config.seed, i * n + j)
        return score_pair(features[i], features[j], config, rng=rng, pair=pair)

    if threads <= 1:
        return {pair: work(pair) for pair in pairs}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pair: pool.submit(work, pair) for pair in pairs}
        return {pair: futures[pair].result() for pair in pairs}
