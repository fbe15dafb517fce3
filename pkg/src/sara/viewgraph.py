"""View-graph construction: maximum-weight spanning tree plus budgeted
augmentation stages, applied in a fixed order.

Stage order is tree, loops, anchors, weak-view support. Loop candidates
are non-tree edges binned by tree-path length between their endpoints and
drained round-robin across bins; anchors favor high parallax-times-weight
with an endpoint-diversity rule; weak-view support tops up views that the
tree leaves poorly connected or poorly supported. Every ranking breaks
ties by ascending (i, j), so construction is deterministic.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import SaraConfig
from .errors import EmptyScoreSet

logger = logging.getLogger(__name__)

WEAK_EPS = 1e-6  # regularizer inside the weak-view priority


class EdgeRole(Enum):
    TREE = "tree"
    LOOP = "loop"
    ANCHOR = "anchor"
    WEAK = "weak"


@dataclass(frozen=True)
class NodeConfidence:
    node: int
    degree_in_tree: int
    kappa: float  # median incident tree-edge weight, 0 for isolated nodes


@dataclass(frozen=True)
class ViewGraph:
    n_nodes: int
    candidate_edges: dict  # (i, j) -> weight, i < j, non-rejected pairs only
    selected_edges: list   # ((i, j), EdgeRole) in selection order
    components: list       # node lists, each ascending, ordered by smallest node

    def selected_pairs(self) -> set:
        return {e for e, _ in self.selected_edges}

    def degree(self, node: int) -> int:
        return sum(1 for (i, j), _ in self.selected_edges if node in (i, j))


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def max_spanning_tree(candidates: dict, n_nodes: int) -> list:
    """Kruskal on descending weight; ties break by ascending (i, j).

    Returns the accepted edges in acceptance order. Disconnected input
    yields a spanning forest.
    """
    edges = sorted(candidates.items(), key=lambda kv: (-kv[1], kv[0]))
    uf = UnionFind(n_nodes)
    tree = []
    for (i, j), _ in edges:
        if uf.union(i, j):
            tree.append((i, j))
            if len(tree) == n_nodes - 1:
                break
    return tree


class TreePaths:
    """Per-component rooted traversal with parent/depth tables.

    ``length(i, j)`` walks the two nodes up to their lowest common
    ancestor and returns the tree-path edge count, or None across
    components. Paths at this scale are short, so the walk-up is cheap.
    """

    def __init__(self, tree_edges, n_nodes: int):
        adj: list[list[int]] = [[] for _ in range(n_nodes)]
        for i, j in tree_edges:
            adj[i].append(j)
            adj[j].append(i)
        self.parent = [-1] * n_nodes
        self.depth = [0] * n_nodes
        self.component = [-1] * n_nodes
        comp = 0
        for root in range(n_nodes):
            if self.component[root] >= 0:
                continue
            queue = deque([root])
            self.component[root] = comp
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if self.component[v] < 0:
                        self.component[v] = comp
                        self.parent[v] = u
                        self.depth[v] = self.depth[u] + 1
                        queue.append(v)
            comp += 1
        self.n_components = comp

    def length(self, i: int, j: int) -> int | None:
        if self.component[i] != self.component[j]:
            return None
        steps = 0
        while self.depth[i] > self.depth[j]:
            i = self.parent[i]
            steps += 1
        while self.depth[j] > self.depth[i]:
            j = self.parent[j]
            steps += 1
        while i != j:
            i, j = self.parent[i], self.parent[j]
            steps += 2
        return steps


def node_confidences(tree_edges, candidates: dict, n_nodes: int) -> list[NodeConfidence]:
    """Tree degree and median incident tree-edge weight per node."""
    incident: list[list[float]] = [[] for _ in range(n_nodes)]
    for i, j in tree_edges:
        w = candidates[(i, j)]
        incident[i].append(w)
        incident[j].append(w)
    out = []
    for node in range(n_nodes):
        ws = incident[node]
        if ws:
            arr = np.sort(np.asarray(ws))
            kappa = float(arr[(arr.size - 1) // 2])
        else:
            kappa = 0.0
        out.append(NodeConfidence(node=node, degree_in_tree=len(ws), kappa=kappa))
    return out


def weak_priority(degree_in_tree: int, kappa: float) -> float:
    """Support priority: grows as tree degree and confidence shrink."""
    return 1.0 / ((1.0 + degree_in_tree) * (WEAK_EPS + kappa))


def add_loops(selected, candidates: dict, paths: TreePaths, config: SaraConfig,
              budget: int) -> list:
    """Budgeted loop closures, round-robin across path-length bins.

    Non-tree candidates whose endpoints share a component are binned by
    tree-path length (short, medium, long per the config bounds); each
    pass drains one edge per non-empty bin in long, medium, short order.
    Within a bin, rank is by weight (the per-bin gain factor is constant).
    """
    if budget <= 0:
        return []
    taken = {e for e, _ in selected}
    bins: dict[str, list] = {"short": [], "medium": [], "long": []}
    for edge, w in candidates.items():
        if edge in taken:
            continue
        length = paths.length(*edge)
        if length is None:
            continue
        if length <= config.loop_short_max:
            bins["short"].append((edge, w))
        elif length <= config.loop_medium_max:
            bins["medium"].append((edge, w))
        else:
            bins["long"].append((edge, w))
    for key in bins:
        bins[key].sort(key=lambda ew: (-ew[1], ew[0]))
    queues = {key: deque(edges) for key, edges in bins.items()}
    added = []
    while len(added) < budget and any(queues.values()):
        for key in ("long", "medium", "short"):
            if len(added) >= budget:
                break
            if queues[key]:
                edge, _ = queues[key].popleft()
                added.append((edge, EdgeRole.LOOP))
    return added


def add_anchors(selected, candidates: dict, scores, budget: int) -> list:
    """Budgeted high-parallax anchors with an endpoint-diversity rule.

    Remaining candidates are ranked by parallax * weight (descending,
    ties by ascending (i, j)); a candidate is skipped when both endpoints
    already touch a previously added anchor.
    """
    if budget <= 0:
        return []
    taken = {e for e, _ in selected}
    ranked = []
    for edge, w in candidates.items():
        if edge in taken:
            continue
        score = scores[edge].parallax * w
        ranked.append((edge, score))
    ranked.sort(key=lambda es: (-es[1], es[0]))
    touched: set[int] = set()
    added = []
    for edge, _ in ranked:
        if len(added) >= budget:
            break
        i, j = edge
        if i in touched and j in touched:
            continue
        added.append((edge, EdgeRole.ANCHOR))
        touched.update(edge)
    return added


def add_weak_view_support(selected, candidates: dict, confidences,
                          config: SaraConfig, budget_total: int) -> list:
    """Support edges for weak views, weakest views first.

    A view is weak if its tree degree is at most the config threshold or
    its confidence sits below the 25th percentile of all views'. Views are
    served in descending support priority; each receives up to the
    per-view budget from its incident remaining candidates (best weight
    first), subject to the global cap.
    """
    if budget_total <= 0 or config.budget_weak <= 0:
        return []
    kappas = np.asarray([c.kappa for c in confidences])
    cutoff = float(np.percentile(kappas, 25.0)) if kappas.size else 0.0
    weak = [c for c in confidences
            if c.degree_in_tree <= config.weak_degree_threshold or c.kappa < cutoff]
    weak.sort(key=lambda c: (-weak_priority(c.degree_in_tree, c.kappa), c.node))

    taken = {e for e, _ in selected}
    incident: dict[int, list] = {}
    for edge, w in candidates.items():
        if edge in taken:
            continue
        for node in edge:
            incident.setdefault(node, []).append((edge, w))
    for node in incident:
        incident[node].sort(key=lambda ew: (-ew[1], ew[0]))

    added = []
    added_set: set = set()
    for conf in weak:
        if len(added) >= budget_total:
            break
        grabbed = 0
        for edge, _ in incident.get(conf.node, []):
            if grabbed >= config.budget_weak or len(added) >= budget_total:
                break
            if edge in added_set:
                continue
            added.append((edge, EdgeRole.WEAK))
            added_set.add(edge)
            grabbed += 1
    return added


def _components(candidates: dict, n_nodes: int) -> list:
    uf = UnionFind(n_nodes)
    for i, j in candidates:
        uf.union(i, j)
    groups: dict[int, list] = {}
    for node in range(n_nodes):
        groups.setdefault(uf.find(node), []).append(node)
    return sorted(groups.values(), key=lambda g: g[0])


def build_view_graph(scores, n_nodes: int, config: SaraConfig) -> ViewGraph:
    """Assemble the selected edge set: tree, then loops, anchors, weak support.

    ``scores`` maps canonical (i, j) pairs to PairScores; rejected pairs
    are excluded from candidacy. Disconnected candidate graphs produce a
    spanning forest and a prominent warning instead of an error.
    """
    if not scores:
        raise EmptyScoreSet("no scored pairs")
    candidates = {edge: s.weight for edge, s in sorted(scores.items()) if s.rejected is None}
    components = _components(candidates, n_nodes)
    if len(components) > 1:
        logger.warning(
            "candidate graph is disconnected: %d components %s",
            len(components),
            [c[:8] + ["..."] if len(c) > 8 else c for c in components])

    tree = max_spanning_tree(candidates, n_nodes)
    selected = [(edge, EdgeRole.TREE) for edge in tree]
    paths = TreePaths(tree, n_nodes)

    if config.use_loops:
        selected += add_loops(selected, candidates, paths, config,
                              config.resolved_budget_loop(n_nodes))
    if config.use_anchors:
        selected += add_anchors(selected, candidates, scores,
                                config.resolved_budget_anchor(n_nodes))
    if config.use_weak:
        confidences = node_confidences(tree, candidates, n_nodes)
        selected += add_weak_view_support(selected, candidates, confidences, config,
                                          config.resolved_budget_weak_total(n_nodes))
    return ViewGraph(n_nodes=n_nodes, candidate_edges=candidates,
                     selected_edges=selected, components=components)
