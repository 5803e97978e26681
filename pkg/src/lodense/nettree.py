"""Hierarchy of graph-metric clusterings on a dyadic radius ladder.

Level i has radius ``r_i = delta_net / 2**(i-1)``; centers satisfy covering
(every vertex within r_i of a center), packing (centers pairwise >= r_i
apart) and inheritance (coarser centers stay centers).  ``delta_net`` is the
quadtree root side, doubled as often as needed for a single root center to
cover the whole graph (graph diameters can exceed the Euclidean bounding
box), which shifts ladder indices by ``shift`` without changing any radius
attached to a quadtree cell.

Construction is a deterministic greedy: per level, vertices are swept in
ascending index order and promoted to centers whenever their distance to the
current center set strictly exceeds r_i, using truncated multi-source
Dijkstra balls.  Levels where nothing changes are elided; generation stops
when every vertex is a center.  Trees are immutable after build.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .graph import EmbeddedGraph

MAX_LEVELS = 200


@dataclass(frozen=True)
class ClusterLevel:
    index: int
    radius: float
    centers: np.ndarray


class LevelSequence:
    """Produced cluster levels plus per-vertex entry data."""

    def __init__(self, levels, delta_net, shift, enter, parent_vertex, max_level):
        self.levels = levels
        self.delta_net = delta_net
        self.shift = shift
        self.enter = enter
        self.parent_vertex = parent_vertex
        self.max_level = max_level

    def radius(self, i: int) -> float:
        return self.delta_net / math.ldexp(1.0, i - 1)


def build_cluster_levels(g: EmbeddedGraph, delta: float) -> LevelSequence:
    """Greedy r_i-clustering ladder over the graph metric of ``g``."""
    if not g.is_connected():
        raise ValueError("graph must be connected")
    n = g.n
    x0, y0, x1, y1 = g.bbox()
    if delta < max(x1 - x0, y1 - y0):
        raise ValueError("delta smaller than the bounding box side")
    if n == 1:
        enter = np.array([1], dtype=np.int64)
        parent = np.array([-1], dtype=np.int64)
        lvl = ClusterLevel(1, delta, np.array([0], dtype=np.int64))
        return LevelSequence([lvl], delta, 0, enter, parent, 1)

    indptr, indices, weights = g.csr()
    dist0 = np.full(n, np.inf)
    K.dijkstra(indptr, indices, weights, 0, dist0)
    ecc0 = float(dist0.max())
    shift = 0
    delta_net = delta
    while delta_net <= ecc0:
        delta_net *= 2.0
        shift += 1

    enter = np.full(n, -1, dtype=np.int64)
    parent_vertex = np.full(n, -1, dtype=np.int64)
    enter[0] = 1
    centers = [0]
    levels = [ClusterLevel(1, delta_net, np.array([0], dtype=np.int64))]
    n_centers = 1
    i = 1
    while n_centers < n:
        i += 1
        if i > MAX_LEVELS:
            raise RuntimeError("level guard exceeded; graph scale too degenerate")
        r_prev = delta_net / math.ldexp(1.0, i - 2)
        r_i = 0.5 * r_prev
        dist = np.full(n, np.inf)
        owner = np.full(n, -1, dtype=np.int64)
        src = np.array(sorted(centers), dtype=np.int64)
        K.multi_source_update(indptr, indices, weights, src, 2.0 * r_prev, dist, owner)
        owner_prev = owner.copy()
        out_new = np.empty(n, dtype=np.int64)
        added = int(K.greedy_net_level(indptr, indices, weights, r_i, dist, owner, out_new))
        if added == 0:
            continue
        new = out_new[:added]
        for v in new:
            enter[v] = i
            parent_vertex[v] = owner_prev[v]
        centers.extend(int(v) for v in new)
        n_centers += added
        levels.append(ClusterLevel(i, r_i, np.array(sorted(centers), dtype=np.int64)))
    return LevelSequence(levels, delta_net, shift, enter, parent_vertex, i if n > 1 else 1)


class NetTree:
    """Compressed (one node per vertex) or semi-compressed (duplicated
    centers) view of a level sequence."""

    def __init__(self, seq: LevelSequence, mode, node_vertex, node_level, node_parent):
        self.seq = seq
        self.mode = mode
        self.node_vertex = node_vertex
        self.node_level = node_level
        self.node_parent = node_parent
        self.n = seq.enter.shape[0]
        self.enter = seq.enter
        # deepest copy per vertex: queries start there
        self.deepest_node = np.full(self.n, -1, dtype=np.int64)
        best = np.full(self.n, -1, dtype=np.int64)
        for nid in range(node_vertex.shape[0]):
            v = node_vertex[nid]
            if node_level[nid] > best[v]:
                best[v] = node_level[nid]
                self.deepest_node[v] = nid
        self._subtree = None

    @property
    def node_count(self) -> int:
        return self.node_vertex.shape[0]

    def children_lists(self):
        kids = [[] for _ in range(self.node_count)]
        for nid in range(self.node_count):
            p = self.node_parent[nid]
            if p >= 0:
                kids[p].append(nid)
        return kids

    def subtree_index(self, points: np.ndarray):
        """Euler intervals and subtree coordinate bounding boxes (lazy)."""
        if self._subtree is None:
            nn = self.node_count
            kids = self.children_lists()
            tin = np.zeros(nn, dtype=np.int64)
            tout = np.zeros(nn, dtype=np.int64)
            bxmin = np.full(nn, np.inf)
            bymin = np.full(nn, np.inf)
            bxmax = np.full(nn, -np.inf)
            bymax = np.full(nn, -np.inf)
            roots = [nid for nid in range(nn) if self.node_parent[nid] < 0]
            timer = 0
            for root in roots:
                stack = [(root, False)]
                while stack:
                    nid, done = stack.pop()
                    if done:
                        tout[nid] = timer
                        p = self.node_parent[nid]
                        if p >= 0:
                            bxmin[p] = min(bxmin[p], bxmin[nid])
                            bymin[p] = min(bymin[p], bymin[nid])
                            bxmax[p] = max(bxmax[p], bxmax[nid])
                            bymax[p] = max(bymax[p], bymax[nid])
                        continue
                    tin[nid] = timer
                    timer += 1
                    v = self.node_vertex[nid]
                    bxmin[nid] = bxmax[nid] = points[v, 0]
                    bymin[nid] = bymax[nid] = points[v, 1]
                    stack.append((nid, True))
                    for c in reversed(kids[nid]):
                        stack.append((c, False))
            self._subtree = (tin, tout, bxmin, bymin, bxmax, bymax, kids)
        return self._subtree


def build_compressed_net_tree(seq: LevelSequence) -> NetTree:
    """One node per vertex, placed at its entry level; the parent is the
    center of its covering cluster one level up."""
    n = seq.enter.shape[0]
    node_vertex = np.arange(n, dtype=np.int64)
    node_level = seq.enter.copy()
    node_parent = seq.parent_vertex.copy()
    return NetTree(seq, "compressed", node_vertex, node_level, node_parent)


@dataclass(frozen=True)
class InducedClustering:
    level: int
    clusters: tuple  # of (center_vertex, sorted member array incl. center)


def induced_clustering(tree: NetTree, i: int) -> InducedClustering:
    """Partition of V at resolution i: every vertex joins the first ancestor
    vertex whose entry level is <= i."""
    enter = tree.enter
    n = tree.n
    if tree.mode == "compressed":
        parent = tree.node_parent
        memo = np.full(n, -1, dtype=np.int64)

        def center_of(v):
            chain = []
            while enter[v] > i and memo[v] < 0:
                chain.append(v)
                v = int(parent[v])
            c = v if enter[v] <= i else int(memo[v])
            for u in chain:
                memo[u] = c
            return c

    else:
        parent = tree.node_parent
        deepest = tree.deepest_node
        vert = tree.node_vertex
        memo = np.full(n, -1, dtype=np.int64)

        def center_of(v):
            if enter[v] <= i:
                return v
            if memo[v] >= 0:
                return int(memo[v])
            nid = int(deepest[v])
            while True:
                nid = int(parent[nid])
                u = int(vert[nid])
                if enter[u] <= i:
                    memo[v] = u
                    return u

    groups = {}
    for v in range(n):
        groups.setdefault(center_of(v), []).append(v)
    clusters = tuple(
        (c, np.array(sorted(members), dtype=np.int64)) for c, members in sorted(groups.items())
    )
    return InducedClustering(i, clusters)


def semi_compress(tree: NetTree, inserts) -> NetTree:
    """Duplicate center vertices so every (vertex, level) in ``inserts`` has a
    node exactly at that level; parents link to the copy nearest below the
    level above.  The induced clustering at every resolution is unchanged."""
    if tree.mode != "compressed":
        raise ValueError("semi_compress expects the compressed tree")
    seq = tree.seq
    enter = seq.enter
    n = tree.n
    extra = {}
    for v, lvl in inserts:
        v = int(v)
        lvl = int(lvl)
        if enter[v] > lvl:
            raise ValueError(f"vertex {v} is not a center at level {lvl}")
        if lvl > enter[v]:
            extra.setdefault(v, set()).add(lvl)
    levels_of = {}
    for v in range(n):
        ls = [int(enter[v])]
        ls.extend(sorted(extra.get(v, ())))
        levels_of[v] = ls
    node_vertex = []
    node_level = []
    node_of = {}
    for v in range(n):
        for lvl in levels_of[v]:
            node_of[(v, lvl)] = len(node_vertex)
            node_vertex.append(v)
            node_level.append(lvl)
    node_parent = np.full(len(node_vertex), -1, dtype=np.int64)

    def copy_at_or_below(v, lvl):
        ls = levels_of[v]
        best = ls[0]
        for x in ls:
            if x <= lvl:
                best = x
            else:
                break
        return node_of[(v, best)]

    for v in range(n):
        ls = levels_of[v]
        top = node_of[(v, ls[0])]
        pv = seq.parent_vertex[v]
        if pv >= 0:
            node_parent[top] = copy_at_or_below(int(pv), ls[0] - 1)
        for j in range(1, len(ls)):
            node_parent[node_of[(v, ls[j])]] = node_of[(v, ls[j - 1])]
    return NetTree(
        seq,
        "semi",
        np.array(node_vertex, dtype=np.int64),
        np.array(node_level, dtype=np.int64),
        node_parent,
    )


def dump_net_tree_text(tree: NetTree) -> str:
    """`netnode <vertex> <level> <parent-node-id>` lines, one per node."""
    out = []
    for nid in range(tree.node_count):
        out.append(
            f"netnode {int(tree.node_vertex[nid])} {int(tree.node_level[nid])} "
            f"{int(tree.node_parent[nid])}"
        )
    return "\n".join(out) + "\n"
