"""Graph-metric well-separated pair decomposition.

Every Euclidean pair (A, B) of the semi-compressed quadtree is refined by the
net-tree clustering at the resolution matching the cell size: the radius
ladder is aligned so that `r at level(cell) = side(cell)/4`, which caps the
graph diameter of each cluster by the cell side.  Clusters are carried
implicitly as (center vertex, cell) handles; members are the cluster's
vertices clipped to the cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graph import EmbeddedGraph, all_pairs_shortest_paths
from .nettree import NetTree, build_cluster_levels, build_compressed_net_tree
from .quadtree import Cell, CompressedQuadtree, EuclideanWspd, build_semi_compressed, semi_size_upper
from .rangetree import RangeIndex

LEVEL_OFFSET = 3  # level(cell) = depth + shift + 3 makes r = side/4 exact


def cell_level(side: float, delta_net: float) -> int:
    """Ladder level of a cell of the given side: the level whose radius is
    side/4.  The side must divide delta_net as a power of two."""
    if side <= 0 or delta_net <= 0:
        raise ValueError("positive sizes required")
    ratio = delta_net / side
    lg = math.log2(ratio)
    i = round(lg)
    if abs(lg - i) > 1e-9 or math.ldexp(side, i) != delta_net:
        raise ValueError("cell side is not a power-of-two divisor of delta")
    return i + LEVEL_OFFSET


class ClusterHandle(NamedTuple):
    center: int
    cell: Cell


class GraphWspd:
    """Implicit (center, cell) cluster pairs plus the structures that define
    them.  Immutable after build; queries are read-only."""

    def __init__(self, graph, qtree, ewspd, seq, ntree, index, eps):
        self.graph = graph
        self.qtree = qtree
        self.ewspd = ewspd
        self.seq = seq
        self.ntree = ntree
        self.index = index
        self.eps = eps
        self.pair_cell_a = None  # quadtree node ids
        self.pair_center_a = None
        self.pair_cell_b = None
        self.pair_center_b = None
        self.pair_count = 0
        self.cell_cluster_counts = {}

    def level_of_node(self, nid: int) -> int:
        return int(self.qtree.depth[nid]) + self.seq.shift + LEVEL_OFFSET

    def level_of_cell(self, cell: Cell) -> int:
        return cell.depth + self.seq.shift + LEVEL_OFFSET

    def handles(self, i: int):
        t = self.qtree
        ca = Cell(int(t.depth[self.pair_cell_a[i]]), int(t.ix[self.pair_cell_a[i]]), int(t.iy[self.pair_cell_a[i]]))
        cb = Cell(int(t.depth[self.pair_cell_b[i]]), int(t.ix[self.pair_cell_b[i]]), int(t.iy[self.pair_cell_b[i]]))
        return (
            ClusterHandle(int(self.pair_center_a[i]), ca),
            ClusterHandle(int(self.pair_center_b[i]), cb),
        )

    @property
    def npairs(self) -> int:
        return self.pair_count


def expanded_box(qtree: CompressedQuadtree, cell: Cell, factor: float = 2.0):
    """Cell scaled by ``factor`` about its centre: (x1, y1, x2, y2)."""
    x0, y0, s = qtree.cell_box(cell)
    pad = 0.5 * (factor - 1.0) * s
    return x0 - pad, y0 - pad, x0 + s + pad, y0 + s + pad


def cluster_centers_in(index: RangeIndex, box, level: int) -> np.ndarray:
    """Vertices inside the closed box that are cluster centers at the given
    resolution (entry level <= level); ascending vertex order."""
    x1, y1, x2, y2 = box
    return index.query(x1, x2, y1, y2, level)


def _cluster_members(ntree: NetTree, qtree: CompressedQuadtree, points, center, level, cell, collect):
    """Walk the cluster of ``center`` at ``level``, clipped to ``cell``.

    Prunes subtrees that start a different cluster (entry level <= level) and
    subtrees whose bounding box misses the cell.  With ``collect`` False the
    walk stops at the first member found (exact nonemptiness probe).
    """
    tin, tout, bxmin, bymin, bxmax, bymax, kids = ntree.subtree_index(points)
    x0, y0, s = qtree.cell_box(cell)
    x1, y1 = x0 + s, y0 + s
    enter = ntree.enter
    vert = ntree.node_vertex
    out = []
    start = int(ntree.deepest_node[center]) if ntree.mode == "semi" else int(center)
    stack = [start]
    first = True
    while stack:
        nid = stack.pop()
        v = int(vert[nid])
        if not first and enter[v] <= level:
            continue
        first = False
        px, py = points[v, 0], points[v, 1]
        if x0 <= px < x1 and y0 <= py < y1:
            if not collect:
                return True
            out.append(v)
        for c in kids[nid]:
            cv = int(vert[c])
            if enter[cv] <= level:
                continue
            if bxmax[c] < x0 or bxmin[c] >= x1 or bymax[c] < y0 or bymin[c] >= y1:
                continue
            stack.append(c)
    if not collect:
        return False
    return sorted(set(out))


def materialize(gw: GraphWspd, handle: ClusterHandle) -> np.ndarray:
    """Explicit sorted member list of an implicit cluster (verification path;
    the query structures never need it)."""
    level = gw.level_of_cell(handle.cell)
    members = _cluster_members(
        gw.ntree, gw.qtree, gw.graph.vertices, handle.center, level, handle.cell, True
    )
    return np.array(members, dtype=np.int64)


def build_graph_wspd(
    g: EmbeddedGraph,
    eps: float,
    lambda_hint: int | None = None,
    materialize_pairs: bool = True,
) -> GraphWspd:
    """Assemble the graph WSPD: Euclidean WSPD, net-tree, 3-D range index,
    then one cluster cross product per Euclidean pair.  Deterministic."""
    if not g.is_connected():
        raise ValueError("graph must be connected")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    # Cluster diameters are capped by cell sides, while the Euclidean stage
    # certifies separation against cell diagonals; feeding it sqrt(2)*eps
    # yields d2(A,B) >= side/eps, exactly the graph-metric requirement.
    eps_euclid = min(math.sqrt(2.0) * eps, 0.99)
    qtree, ewspd = build_semi_compressed(g.vertices, eps_euclid)
    seq = build_cluster_levels(g, qtree.delta)
    ntree = build_compressed_net_tree(seq)
    index = RangeIndex(g.vertices[:, 0], g.vertices[:, 1], seq.enter)
    gw = GraphWspd(g, qtree, ewspd, seq, ntree, index, eps)

    # per distinct quadtree node: centers whose clipped cluster is nonempty
    nonempty_centers = {}

    def centers_of(nid: int) -> np.ndarray:
        got = nonempty_centers.get(nid)
        if got is not None:
            return got
        cell = qtree.cell(nid)
        level = gw.level_of_node(nid)
        cand = cluster_centers_in(index, expanded_box(qtree, cell, 2.0), level)
        x0, y0, s = qtree.cell_box(cell)
        keep = []
        for c in cand:
            c = int(c)
            px, py = g.vertices[c, 0], g.vertices[c, 1]
            if x0 <= px < x0 + s and y0 <= py < y0 + s:
                keep.append(c)  # center inside the cell is its own member
            elif _cluster_members(ntree, qtree, g.vertices, c, level, cell, False):
                keep.append(c)
        got = np.array(keep, dtype=np.int64)
        nonempty_centers[nid] = got
        gw.cell_cluster_counts[nid] = len(keep)
        return got

    total = 0
    if materialize_pairs:
        ca_parts, sa_parts, cb_parts, tb_parts = [], [], [], []
    for i in range(ewspd.npairs):
        na, nb = int(ewspd.pair_a[i]), int(ewspd.pair_b[i])
        sa = centers_of(na)
        tb = centers_of(nb)
        if len(sa) == 0 or len(tb) == 0:
            raise AssertionError("well-separated pair with an empty side")
        total += len(sa) * len(tb)
        if materialize_pairs:
            ca_parts.append(np.full(len(sa) * len(tb), na, dtype=np.int64))
            cb_parts.append(np.full(len(sa) * len(tb), nb, dtype=np.int64))
            sa_parts.append(np.repeat(sa, len(tb)))
            tb_parts.append(np.tile(tb, len(sa)))
    gw.pair_count = total
    if materialize_pairs:
        gw.pair_cell_a = np.concatenate(ca_parts) if ca_parts else np.zeros(0, np.int64)
        gw.pair_center_a = np.concatenate(sa_parts) if sa_parts else np.zeros(0, np.int64)
        gw.pair_cell_b = np.concatenate(cb_parts) if cb_parts else np.zeros(0, np.int64)
        gw.pair_center_b = np.concatenate(tb_parts) if tb_parts else np.zeros(0, np.int64)
    return gw


@dataclass
class WspdReport:
    n: int
    npairs: int
    coverage_violations: list = field(default_factory=list)
    separation_violations: list = field(default_factory=list)
    diameter_violations: list = field(default_factory=list)
    packing_violations: list = field(default_factory=list)
    cluster_count_ratio: float = 0.0
    max_multiplicity: int = 0

    @property
    def ok(self) -> bool:
        return not (
            self.coverage_violations
            or self.separation_violations
            or self.diameter_violations
            or self.packing_violations
        )


def verify_graph_wspd(
    g: EmbeddedGraph,
    gw: GraphWspd,
    lambda_hint: int | None = None,
    max_report: int = 20,
) -> WspdReport:
    """Check a graph WSPD against its definition with brute force: exact
    coverage counts, graph-metric separation via the distance matrix, cluster
    diameter and packing, and the per-cell cluster-count constant."""
    if g.n > 500:
        raise ValueError("verifier capped at n <= 500")
    M = all_pairs_shortest_paths(g)
    report = WspdReport(g.n, gw.pair_count)
    inv_eps = 1.0 / gw.eps
    cover = np.zeros((g.n, g.n), dtype=np.int32)
    members_cache = {}

    def members(handle):
        if handle not in members_cache:
            members_cache[handle] = materialize(gw, handle)
        return members_cache[handle]

    for i in range(gw.pair_count):
        ha, hb = gw.handles(i)
        A = members(ha)
        B = members(hb)
        if len(A) == 0 or len(B) == 0:
            report.coverage_violations.append((i, "empty side"))
            continue
        sub = M[np.ix_(A, B)]
        dab = sub.min()
        da = M[np.ix_(A, A)].max()
        db = M[np.ix_(B, B)].max()
        if inv_eps * max(da, db) > dab * (1 + 1e-9):
            if len(report.separation_violations) < max_report:
                report.separation_violations.append((i, float(max(da, db)), float(dab)))
        la = gw.qtree.cell_side(ha.cell)
        lb = gw.qtree.cell_side(hb.cell)
        if da > la * (1 + 1e-9) or db > lb * (1 + 1e-9):
            if len(report.diameter_violations) < max_report:
                report.diameter_violations.append((i, float(da), float(la), float(db), float(lb)))
        cover[np.ix_(A, B)] += 1
        cover[np.ix_(B, A)] += 1
    iu = np.triu_indices(g.n, 1)
    bad = np.argwhere(cover[iu] != 1)
    if len(bad):
        for b in bad[:max_report]:
            report.coverage_violations.append(
                (int(iu[0][b[0]]), int(iu[1][b[0]]), int(cover[iu][b[0]]))
            )

    # per-cell checks: center packing and the cluster-count constant
    lam = lambda_hint
    if lam is None:
        from .graph import density_lower_bound

        lam = max(1, density_lower_bound(g).lambda_lower_bound)
    worst_ratio = 0.0
    for nid, cnt in gw.cell_cluster_counts.items():
        cell = gw.qtree.cell(nid)
        side = gw.qtree.cell_side(cell)
        centers = [int(c) for c in _centers_of_existing(gw, nid)]
        if len(centers) > 1:
            D = M[np.ix_(centers, centers)].copy()
            np.fill_diagonal(D, np.inf)
            if D.min() < side / 4.0 * (1 - 1e-9):
                if len(report.packing_violations) < max_report:
                    report.packing_violations.append((nid, float(D.min()), side / 4.0))
        box6 = expanded_box(gw.qtree, cell, 6.0)
        inside = np.flatnonzero(
            (g.vertices[:, 0] >= box6[0])
            & (g.vertices[:, 0] <= box6[2])
            & (g.vertices[:, 1] >= box6[1])
            & (g.vertices[:, 1] <= box6[3])
        )
        m = _semi_size_of_points(g.vertices[inside], g.n)
        ratio = cnt / (lam * math.sqrt(max(m, 1)))
        worst_ratio = max(worst_ratio, ratio)
    report.cluster_count_ratio = worst_ratio
    ids, counts = np.unique(
        np.concatenate([gw.ewspd.pair_a, gw.ewspd.pair_b]), return_counts=True
    )
    report.max_multiplicity = int(counts.max()) if len(ids) else 0
    return report


def _centers_of_existing(gw: GraphWspd, nid: int):
    mask_a = gw.pair_cell_a == nid
    mask_b = gw.pair_cell_b == nid
    return np.unique(
        np.concatenate([gw.pair_center_a[mask_a], gw.pair_center_b[mask_b]])
    )


def _semi_size_of_points(pts: np.ndarray, n_total: int) -> int:
    """Grid-cover upper bound on the number of discs of diameter diam/n
    needed to cover the given points."""
    if len(pts) <= 1:
        return len(pts)
    from . import _kernels as K

    diam = K.hull_diameter(np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]))
    if diam == 0.0:
        return 1
    cellsz = diam / n_total / math.sqrt(2.0)
    gx = np.floor((pts[:, 0] - pts[:, 0].min()) / cellsz).astype(np.int64)
    gy = np.floor((pts[:, 1] - pts[:, 1].min()) / cellsz).astype(np.int64)
    return len(np.unique(gx * (gy.max() + 1) + gy))


def semi_size_of_points(pts: np.ndarray, n_total: int) -> int:
    return _semi_size_of_points(np.asarray(pts, dtype=np.float64), n_total)
