"""Candidate pair retrieval by exact cosine k-nearest-neighbors.

Global descriptors are unit vectors, so cosine similarity is a plain dot
product. The candidate set is the symmetric union: a pair survives when
either endpoint ranks the other among its top k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidK, TooFewImages


@dataclass(frozen=True)
class CandidateSet:
    pairs: frozenset[tuple[int, int]]                      # (i, j), i < j
    per_image_neighbors: dict[int, list[tuple[int, float]]]

    def __len__(self) -> int:
        return len(self.pairs)


def cosine_knn(global_descs, k: int) -> CandidateSet:
    """Exact top-k neighbors per image over unit global descriptors.

    Ties in similarity break toward the lower node index. Pairs are
    deduplicated into canonical (i, j) with i < j.
    """
    g = np.asarray(global_descs, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError("global descriptors must be a 2-d array")
    n = g.shape[0]
    if n < 2:
        raise TooFewImages(f"need at least 2 images, got {n}")
    if not 1 <= k <= n - 1:
        raise InvalidK(f"k={k} outside [1, {n - 1}]")
    norms = np.linalg.norm(g, axis=1)
    if np.abs(norms - 1.0).max() > 1e-3:
        raise ValueError("global descriptors must be unit norm")

    sims = g @ g.T
    np.fill_diagonal(sims, -np.inf)
    # stable argsort on negated sims keeps ascending index among ties
    order = np.argsort(-sims, axis=1, kind="stable")[:, :k]

    neighbors: dict[int, list[tuple[int, float]]] = {}
    pairs: set[tuple[int, int]] = set()
    for i in range(n):
        row = [(int(j), float(sims[i, j])) for j in order[i]]
        neighbors[i] = row
        for j, _ in row:
            pairs.add((i, j) if i < j else (j, i))
    return CandidateSet(pairs=frozenset(pairs), per_image_neighbors=neighbors)
