"""End-to-end orchestration: manifest to pair list and graph report.

The two on-disk artifacts (pair list, graph report) are byte-deterministic
for a given dataset and config; wall-clock timings live only in the
RunReport returned to the caller.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

from .config import SaraConfig
from .features import load_features, load_manifest, write_graph_report, write_pair_list
from .retrieval import cosine_knn
from .scorer import score_all
from .viewgraph import build_view_graph

logger = logging.getLogger(__name__)

# ablation variants: (use_loops, use_anchors, use_weak)
ABLATION_VARIANTS = {
    "full": (True, True, True),
    "wo_msl": (False, True, True),
    "wo_lba": (True, False, True),
    "wo_wvr": (True, True, False),
    "only_msl": (True, False, False),
    "only_lba": (False, True, False),
    "only_wvr": (False, False, True),
    "base_only": (False, False, False),
}


@dataclass
class RunReport:
    n_images: int
    n_candidates: int
    n_scored: int
    n_rejected: dict
    n_selected: int
    selected_by_role: dict
    n_components: int
    reduction_ratio: float
    stage_seconds: dict
    seed: int
    config: dict
    out_pairs: str
    out_report: str

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)


def _prepare(manifest_path, config: SaraConfig, threads: int, timings: dict):
    t0 = time.perf_counter()
    manifest = load_manifest(manifest_path)
    features = [load_features(manifest, image_id) for image_id in manifest.image_ids]
    timings["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    n = len(features)
    k = min(config.k, n - 1)
    if k != config.k:
        logger.info("clamping k from %d to %d for %d images", config.k, k, n)
    globals_ = [f.global_desc for f in features]
    candidates = cosine_knn(globals_, k)
    timings["retrieve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    scores = score_all(features, candidates, config, threads=threads)
    timings["score"] = time.perf_counter() - t0
    return manifest, features, candidates, scores


def _finish(manifest, candidates, scores, config: SaraConfig, out_pairs, out_report,
            timings: dict) -> RunReport:
    t0 = time.perf_counter()
    graph = build_view_graph(scores, len(manifest), config)
    timings["graph"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ids = manifest.image_ids
    write_pair_list([(ids[i], ids[j]) for (i, j), _ in graph.selected_edges], out_pairs)
    write_graph_report(graph, scores, ids, out_report)
    timings["write"] = time.perf_counter() - t0

    rejected: dict[str, int] = {}
    for score in scores.values():
        if score.rejected is not None:
            key = score.rejected.value
            rejected[key] = rejected.get(key, 0) + 1
    by_role: dict[str, int] = {}
    for _, role in graph.selected_edges:
        by_role[role.value] = by_role.get(role.value, 0) + 1
    n = len(manifest)
    total = n * (n - 1) // 2
    n_selected = len(graph.selected_edges)
    return RunReport(
        n_images=n,
        n_candidates=len(candidates),
        n_scored=len(scores),
        n_rejected=rejected,
        n_selected=n_selected,
        selected_by_role=by_role,
        n_components=len(graph.components),
        reduction_ratio=(1.0 - n_selected / total) if total else 0.0,
        stage_seconds=dict(timings),
        seed=config.seed,
        config=config.to_dict(),
        out_pairs=str(out_pairs),
        out_report=str(out_report))


def run_select(manifest_path, config: SaraConfig, out_pairs, out_report,
               threads: int = 1) -> RunReport:
    """Full selection pass: load, retrieve, score, build graph, write outputs."""
    timings: dict[str, float] = {}
    manifest, _, candidates, scores = _prepare(manifest_path, config, threads, timings)
    return _finish(manifest, candidates, scores, config, out_pairs, out_report, timings)


def run_ablation(manifest_path, config: SaraConfig, out_dir,
                 threads: int = 1) -> dict[str, RunReport]:
    """All eight augmentation on/off variants over one shared scoring pass.

    Writes ``<name>.pairs.txt`` and ``<name>.report.json`` per variant
    into ``out_dir`` and returns the reports keyed by variant name.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}
    manifest, _, candidates, scores = _prepare(manifest_path, config, threads, timings)
    reports = {}
    for name, (loops, anchors, weak) in ABLATION_VARIANTS.items():
        variant = dataclasses.replace(
            config, use_loops=loops, use_anchors=anchors, use_weak=weak)
        reports[name] = _finish(
            manifest, candidates, scores, variant,
            out_dir / f"{name}.pairs.txt", out_dir / f"{name}.report.json",
            dict(timings))
    return reports
