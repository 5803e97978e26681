"""Compressed and semi-compressed quadtrees over a planar point set, plus the
Euclidean well-separated pair decompositions built on them.

Cells are dyadic: the root square has side ``delta = 2**t_exp`` anchored at the
floor of the minimum coordinates, and a cell at depth d has side
``delta / 2**d`` with integer coordinates (ix, iy) inside the root grid.
Boundary convention is lower/left closed, upper/right open.  Leaves represent
single points and behave as degenerate zero-side cells in all separation
arithmetic; inserted ancestor nodes (the "semi" part) are internal nodes that
may carry a single child.

Trees are immutable after build; reads are concurrency-safe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as K

MAX_DEPTH = 52
KIND_REGULAR = 0
KIND_INSERTED = 1

C_LOW = 1.0 / (6.0 * math.sqrt(2.0))
C_HIGH = 1.0 / math.sqrt(2.0)


class Cell(NamedTuple):
    depth: int
    ix: int
    iy: int


def _unique_rows(a: np.ndarray):
    """Lexicographic row dedup; returns (unique_rows, inverse)."""
    order = np.lexsort(a.T[::-1])
    s = a[order]
    keep = np.ones(len(s), dtype=bool)
    if len(s) > 1:
        keep[1:] = np.any(s[1:] != s[:-1], axis=1)
    group = np.cumsum(keep) - 1
    inverse = np.empty(len(a), dtype=np.int64)
    inverse[order] = group
    return s[keep], inverse


class CompressedQuadtree:
    """Array-backed quadtree.  Node 0 is the root (the full delta-cell)."""

    def __init__(self, points):
        pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
            raise ValueError("need a non-empty (n, 2) point array")
        if pts.shape[0] > 1 and np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValueError("duplicate points")
        self.points = pts
        n = pts.shape[0]
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        self.x0 = math.floor(lo[0])
        self.y0 = math.floor(lo[1])
        span = max(hi[0] - self.x0, hi[1] - self.y0, 1.1 * max(hi[0] - lo[0], hi[1] - lo[1]), 1.0)
        t = 0
        while math.ldexp(1.0, t) <= span:
            t += 1
        self.t_exp = t
        self.delta = math.ldexp(1.0, t)

        self.perm = np.arange(n, dtype=np.int64)
        self._depth = [0]
        self._ix = [0]
        self._iy = [0]
        self._lo = [0]
        self._hi = [n]
        self._parent = [-1]
        self._leaf_pt = [-1]
        self._kind = [KIND_REGULAR]
        if n == 1:
            self._leaf_pt[0] = 0
        else:
            self._subdivide(0)
        self._freeze()

    # -- construction -----------------------------------------------------

    def _new_node(self, depth, ix, iy, lo, hi, parent, kind=KIND_REGULAR):
        self._depth.append(depth)
        self._ix.append(ix)
        self._iy.append(iy)
        self._lo.append(lo)
        self._hi.append(hi)
        self._parent.append(parent)
        self._leaf_pt.append(-1)
        self._kind.append(kind)
        return len(self._depth) - 1

    def _corner(self, depth, ix, iy):
        s = math.ldexp(1.0, self.t_exp - depth)
        return self.x0 + ix * s, self.y0 + iy * s, s

    def _shrink(self, depth, ix, iy, lo, hi):
        """Smallest aligned cell inside (depth, ix, iy) containing the range."""
        idx = self.perm[lo:hi]
        xs = self.points[idx, 0]
        ys = self.points[idx, 1]
        xmin, xmax = xs.min(), xs.max()
        ymin, ymax = ys.min(), ys.max()
        while depth < MAX_DEPTH:
            cx, cy, s = self._corner(depth, ix, iy)
            mx = cx + 0.5 * s
            my = cy + 0.5 * s
            if xmax < mx:
                qx = 0
            elif xmin >= mx:
                qx = 1
            else:
                break
            if ymax < my:
                qy = 0
            elif ymin >= my:
                qy = 1
            else:
                break
            depth += 1
            ix = 2 * ix + qx
            iy = 2 * iy + qy
        if depth >= MAX_DEPTH:
            raise ValueError("point set too degenerate for the depth guard")
        return depth, ix, iy

    def _subdivide(self, nid):
        depth, ix, iy = self._depth[nid], self._ix[nid], self._iy[nid]
        lo, hi = self._lo[nid], self._hi[nid]
        cx, cy, s = self._corner(depth, ix, iy)
        mx = cx + 0.5 * s
        my = cy + 0.5 * s
        idx = self.perm[lo:hi]
        qx = (self.points[idx, 0] >= mx).astype(np.int64)
        qy = (self.points[idx, 1] >= my).astype(np.int64)
        quad = (qy << 1) | qx
        order = np.argsort(quad, kind="stable")
        self.perm[lo:hi] = idx[order]
        counts = np.bincount(quad, minlength=4)
        start = lo
        for q in range(4):
            cnt = int(counts[q])
            if cnt == 0:
                continue
            qix = 2 * ix + (q & 1)
            qiy = 2 * iy + (q >> 1)
            if cnt == 1:
                cid = self._new_node(depth + 1, qix, qiy, start, start + cnt, nid)
                self._leaf_pt[cid] = int(self.perm[start])
            else:
                d2, ix2, iy2 = self._shrink(depth + 1, qix, qiy, start, start + cnt)
                cid = self._new_node(d2, ix2, iy2, start, start + cnt, nid)
                self._subdivide(cid)
            start += cnt

    def _freeze(self):
        self.depth = np.array(self._depth, dtype=np.int64)
        self.ix = np.array(self._ix, dtype=np.int64)
        self.iy = np.array(self._iy, dtype=np.int64)
        self.lo = np.array(self._lo, dtype=np.int64)
        self.hi = np.array(self._hi, dtype=np.int64)
        self.parent = np.array(self._parent, dtype=np.int64)
        self.leaf_pt = np.array(self._leaf_pt, dtype=np.int64)
        self.kind = np.array(self._kind, dtype=np.int64)
        nn = len(self._depth)
        # children ordered by node id (creation order, deterministic)
        self.first_child = np.full(nn, -1, dtype=np.int64)
        self.next_sib = np.full(nn, -1, dtype=np.int64)
        last = np.full(nn, -1, dtype=np.int64)
        for nid in range(nn):
            p = self._parent[nid]
            if p < 0:
                continue
            if self.first_child[p] < 0:
                self.first_child[p] = nid
            else:
                self.next_sib[last[p]] = nid
            last[p] = nid
        # geometry arrays used by the pair kernels
        is_leaf = self.leaf_pt >= 0
        s = np.ldexp(1.0, self.t_exp - self.depth)
        self.side = np.where(is_leaf, 0.0, s)
        gx = self.x0 + self.ix * s
        gy = self.y0 + self.iy * s
        px = np.where(is_leaf, self.points[np.maximum(self.leaf_pt, 0), 0], gx)
        py = np.where(is_leaf, self.points[np.maximum(self.leaf_pt, 0), 1], gy)
        self.gx0 = np.ascontiguousarray(px)
        self.gy0 = np.ascontiguousarray(py)
        self.gside = np.ascontiguousarray(self.side)
        rep = self.perm[self.lo]
        self.rep_x = np.ascontiguousarray(self.points[rep, 0])
        self.rep_y = np.ascontiguousarray(self.points[rep, 1])

    def _new_inserted(self, depth, ix, iy, lo, hi):
        return self._new_node(depth, ix, iy, lo, hi, -1, kind=KIND_INSERTED)

    # -- queries -----------------------------------------------------------

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def node_count(self) -> int:
        return self.depth.shape[0]

    def is_leaf(self, nid: int) -> bool:
        return self.leaf_pt[nid] >= 0

    def cell(self, nid: int) -> Cell:
        if self.is_leaf(nid):
            raise ValueError("leaves are points, not cells")
        return Cell(int(self.depth[nid]), int(self.ix[nid]), int(self.iy[nid]))

    def cell_box(self, cell: Cell):
        """(x0, y0, side) of a cell."""
        return self._corner(cell.depth, cell.ix, cell.iy)

    def cell_side(self, cell: Cell) -> float:
        return math.ldexp(1.0, self.t_exp - cell.depth)

    def children(self, nid: int):
        out = []
        c = self.first_child[nid]
        while c >= 0:
            out.append(int(c))
            c = self.next_sib[c]
        return out

    def node_points(self, nid: int) -> np.ndarray:
        return self.perm[self.lo[nid] : self.hi[nid]]

    def containing_cell(self, p, depth: int) -> Cell:
        s = math.ldexp(1.0, self.t_exp - depth)
        return Cell(depth, int(math.floor((p[0] - self.x0) / s)), int(math.floor((p[1] - self.y0) / s)))

    def cell_contains(self, cell: Cell, p) -> bool:
        x0, y0, s = self.cell_box(cell)
        return x0 <= p[0] < x0 + s and y0 <= p[1] < y0 + s


def build_compressed_quadtree(points) -> CompressedQuadtree:
    """Standard compressed quadtree: degree-one chains contracted, one point
    per leaf, deterministic given the input order."""
    return CompressedQuadtree(points)


def double_cell(cell: Cell) -> Cell:
    """Aligned cell one level up containing the given cell."""
    if cell.depth <= 0:
        raise ValueError("cannot double the root cell")
    return Cell(cell.depth - 1, cell.ix >> 1, cell.iy >> 1)


def _node_geometry(tree: CompressedQuadtree, which):
    """(box, representative point) for a node id or a raw point."""
    if isinstance(which, (int, np.integer)):
        nid = int(which)
        box = (float(tree.gx0[nid]), float(tree.gy0[nid]), float(tree.gside[nid]))
        rep = (float(tree.rep_x[nid]), float(tree.rep_y[nid]))
        return box, rep
    x, y = float(which[0]), float(which[1])
    return (x, y, 0.0), (x, y)


def congruent_maximal_ancestors(tree: CompressedQuadtree, a, b, eps: float):
    """Largest congruent pair of aligned ancestor cells of ``a`` and ``b``
    that is (1/eps)-well-separated; its doubled pair is not.

    ``a`` and ``b`` may be node ids of the tree or raw points.  Cell
    diagonals stand in for diameters, so the window of candidate side lengths
    has constant size and the scan is O(1).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    (boxa, repa) = _node_geometry(tree, a)
    (boxb, repb) = _node_geometry(tree, b)
    dg = K.box_dist(*boxa, *boxb)
    if dg <= 0.0:
        raise ValueError("inputs are not separated")
    s_hi = C_HIGH * eps * dg
    _, e = math.frexp(s_hi)
    d = max(1, tree.t_exp - (e - 1))
    sq2 = math.sqrt(2.0)
    for _ in range(64):
        size = math.ldexp(1.0, tree.t_exp - d)
        ca = tree.containing_cell(repa, d)
        cb = tree.containing_cell(repb, d)
        if ca != cb:
            dd = K.box_dist(*tree.cell_box(ca), *tree.cell_box(cb))
            if dd * eps >= sq2 * size:
                return ca, cb
        d += 1
    raise ValueError("inputs not separated enough for the candidate window")


@dataclass(frozen=True)
class SemiSizeCover:
    node: int
    cover: tuple
    bound: int


def semi_size_upper(tree: CompressedQuadtree, nid: int) -> SemiSizeCover:
    """Upper bound on the number of discs of diameter diam(points)/n needed to
    cover a node's points, by descending to descendants whose circumscribed
    disc is small enough.  Leaves contribute degenerate point discs."""
    lo, hi = int(tree.lo[nid]), int(tree.hi[nid])
    if hi - lo <= 1:
        return SemiSizeCover(nid, (nid,), 1)
    idx = tree.perm[lo:hi]
    xs = np.ascontiguousarray(tree.points[idx, 0])
    ys = np.ascontiguousarray(tree.points[idx, 1])
    diam = K.hull_diameter(xs, ys)
    thr = diam / tree.n_points
    sq2 = math.sqrt(2.0)
    cover = []
    stack = [int(tree.first_child[nid])]
    # the node itself never qualifies (its diagonal exceeds diam/n for n >= 2)
    sib = tree.next_sib[int(tree.first_child[nid])]
    while sib >= 0:
        stack.append(int(sib))
        sib = tree.next_sib[sib]
    while stack:
        q = stack.pop()
        if tree.leaf_pt[q] >= 0 or sq2 * tree.side[q] <= thr:
            cover.append(q)
            continue
        c = tree.first_child[q]
        while c >= 0:
            stack.append(int(c))
            c = tree.next_sib[c]
    cover.sort()
    return SemiSizeCover(nid, tuple(cover), len(cover))


class EuclideanWspd:
    """Pairs of quadtree nodes, every pair congruent and (1/eps)-maximal.

    Point semantics are clipping semantics: the pair covers exactly
    (V ∩ cell(A)) × (V ∩ cell(B)), which the node point ranges realize.
    """

    def __init__(self, tree, pair_a, pair_b, eps):
        self.tree = tree
        self.pair_a = pair_a
        self.pair_b = pair_b
        self.eps = eps
        self.separation = 1.0 / eps

    @property
    def npairs(self) -> int:
        return self.pair_a.shape[0]

    def pair_point_sets(self, i: int):
        t = self.tree
        a, b = self.pair_a[i], self.pair_b[i]
        return t.node_points(a), t.node_points(b)

    def weight(self) -> int:
        t = self.tree
        return int(np.sum(t.hi[self.pair_a] - t.lo[self.pair_a]) + np.sum(t.hi[self.pair_b] - t.lo[self.pair_b]))

    def semi_weight_upper(self) -> int:
        cache = {}
        total = 0
        for nid in np.concatenate([self.pair_a, self.pair_b]):
            nid = int(nid)
            if nid not in cache:
                cache[nid] = semi_size_upper(self.tree, nid).bound
            total += cache[nid]
        return total

    def node_multiplicity(self) -> int:
        ids, counts = np.unique(np.concatenate([self.pair_a, self.pair_b]), return_counts=True)
        return int(counts.max()) if len(ids) else 0


def _base_pairs(tree: CompressedQuadtree, separation: float):
    cap = max(4096, 64 * tree.n_points)
    while True:
        out_a = np.empty(cap, dtype=np.int64)
        out_b = np.empty(cap, dtype=np.int64)
        cnt = K.wspd_pairs(
            tree.first_child,
            tree.next_sib,
            tree.side,
            tree.gx0,
            tree.gy0,
            tree.gside,
            separation * math.sqrt(2.0),
            out_a,
            out_b,
        )
        if cnt >= 0:
            return out_a[:cnt].copy(), out_b[:cnt].copy()
        cap *= 4


def build_semi_compressed(points, eps: float):
    """Semi-compressed quadtree and its (1/eps) Euclidean WSPD.

    Builds the compressed quadtree, enumerates a (2/eps)-WSPD on it, lifts
    every base pair to its congruent maximal ancestor cells, inserts those
    cells as nodes, and returns the deduplicated lifted pairs.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    tree = build_compressed_quadtree(points)
    if tree.n_points == 1:
        return tree, EuclideanWspd(tree, np.zeros(0, np.int64), np.zeros(0, np.int64), eps)
    pa, pb = _base_pairs(tree, 2.0 / eps)

    lifted = np.empty((len(pa), 5), dtype=np.int64)
    bad = K.lift_pairs(
        pa, pb, tree.rep_x, tree.rep_y, tree.gx0, tree.gy0, tree.gside,
        float(tree.x0), float(tree.y0), tree.t_exp, eps, lifted,
    )
    if bad:
        raise AssertionError(f"{bad} base pairs missed the ancestor window")

    # canonical cell order inside each pair, then dedup whole pairs
    swap = (lifted[:, 1] > lifted[:, 3]) | (
        (lifted[:, 1] == lifted[:, 3]) & (lifted[:, 2] > lifted[:, 4])
    )
    lifted[swap] = lifted[swap][:, [0, 3, 4, 1, 2]]
    lifted, _ = _unique_rows(lifted)

    cells, cell_inv = _unique_rows(
        np.concatenate([lifted[:, [0, 1, 2]], lifted[:, [0, 3, 4]]])
    )

    existing = {}
    for nid in range(tree.node_count):
        if tree.leaf_pt[nid] < 0:
            existing[(int(tree.depth[nid]), int(tree.ix[nid]), int(tree.iy[nid]))] = nid

    # map each new cell to the highest existing node whose cell it contains
    def range_node(d, ix, iy):
        nid = 0
        while True:
            if tree.leaf_pt[nid] >= 0:
                return nid
            nd = int(tree.depth[nid])
            if nd >= d and (tree.ix[nid] >> (nd - d)) == ix and (tree.iy[nid] >> (nd - d)) == iy:
                return nid
            nxt = -1
            c = tree.first_child[nid]
            while c >= 0:
                c = int(c)
                if tree.leaf_pt[c] >= 0:
                    p = tree.points[tree.leaf_pt[c]]
                    s = math.ldexp(1.0, tree.t_exp - d)
                    if (
                        int(math.floor((p[0] - tree.x0) / s)) == ix
                        and int(math.floor((p[1] - tree.y0) / s)) == iy
                    ):
                        nxt = c
                        break
                else:
                    cd = int(tree.depth[c])
                    if cd >= d:
                        if (tree.ix[c] >> (cd - d)) == ix and (tree.iy[c] >> (cd - d)) == iy:
                            nxt = c
                            break
                    else:
                        if ix >> (d - cd) == tree.ix[c] and iy >> (d - cd) == tree.iy[c]:
                            nxt = c
                            break
                c = tree.next_sib[c]
            if nxt < 0:
                raise AssertionError("lifted cell contains no points")
            nid = nxt

    node_for_cell = np.empty(len(cells), dtype=np.int64)
    by_anchor = {}
    for ci in range(len(cells)):
        key = (int(cells[ci, 0]), int(cells[ci, 1]), int(cells[ci, 2]))
        nid = existing.get(key, -1)
        if nid < 0:
            y = range_node(*key)
            lo, hi = int(tree._lo[y]), int(tree._hi[y])
            nid = tree._new_inserted(key[0], key[1], key[2], lo, hi)
            by_anchor.setdefault(y, []).append(nid)
        node_for_cell[ci] = nid
    for y, chain in by_anchor.items():
        chain.sort(key=lambda nid: -tree._depth[nid])
        old_parent = tree._parent[y]
        below = y
        for nid in chain:
            tree._parent[below] = nid
            below = nid
        tree._parent[below] = old_parent
    tree._freeze()

    npair = len(lifted)
    wa = node_for_cell[cell_inv[:npair]]
    wb = node_for_cell[cell_inv[npair:]]
    return tree, EuclideanWspd(tree, wa, wb, eps)


def dump_tree_text(tree: CompressedQuadtree) -> str:
    """Indented `node <level> <x> <y> <side> <npoints> <kind>` lines; leaves
    print their point with side 0 and level -1."""
    lines = []

    def rec(nid, indent):
        if tree.leaf_pt[nid] >= 0:
            p = tree.points[tree.leaf_pt[nid]]
            lines.append("  " * indent + f"node -1 {p[0]!r} {p[1]!r} 0.0 1 regular")
        else:
            x0, y0, s = tree._corner(int(tree.depth[nid]), int(tree.ix[nid]), int(tree.iy[nid]))
            kind = "inserted" if tree.kind[nid] == KIND_INSERTED else "regular"
            np_ = int(tree.hi[nid] - tree.lo[nid])
            lines.append(
                "  " * indent + f"node {int(tree.depth[nid])} {x0!r} {y0!r} {s!r} {np_} {kind}"
            )
        for c in tree.children(nid):
            rec(c, indent + 1)

    rec(0, 0)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# bounded-spread reference path
# ---------------------------------------------------------------------------


class UncompressedQuadtree:
    """Plain quadtree subdivided until every leaf holds one point; only used
    as the bounded-spread cross-validation oracle."""

    def __init__(self, points):
        base = CompressedQuadtree(points)  # reuse root fitting
        self.points = base.points
        self.x0, self.y0 = base.x0, base.y0
        self.t_exp, self.delta = base.t_exp, base.delta
        n = self.points.shape[0]
        self.perm = np.arange(n, dtype=np.int64)
        depth = [0]
        ixs = [0]
        iys = [0]
        los = [0]
        his = [n]
        parent = [-1]
        kids = [[]]
        stack = [0]
        while stack:
            nid = stack.pop()
            lo, hi = los[nid], his[nid]
            if hi - lo <= 1:
                continue
            d = depth[nid]
            if d >= MAX_DEPTH:
                raise ValueError("depth guard exceeded")
            s = math.ldexp(1.0, self.t_exp - d)
            cx = self.x0 + ixs[nid] * s
            cy = self.y0 + iys[nid] * s
            idx = self.perm[lo:hi]
            qx = (self.points[idx, 0] >= cx + 0.5 * s).astype(np.int64)
            qy = (self.points[idx, 1] >= cy + 0.5 * s).astype(np.int64)
            quad = (qy << 1) | qx
            order = np.argsort(quad, kind="stable")
            self.perm[lo:hi] = idx[order]
            counts = np.bincount(quad, minlength=4)
            start = lo
            for q in range(4):
                cnt = int(counts[q])
                if cnt == 0:
                    continue
                depth.append(d + 1)
                ixs.append(2 * ixs[nid] + (q & 1))
                iys.append(2 * iys[nid] + (q >> 1))
                los.append(start)
                his.append(start + cnt)
                parent.append(nid)
                kids.append([])
                cid = len(depth) - 1
                kids[nid].append(cid)
                stack.append(cid)
                start += cnt
        self.depth = np.array(depth, dtype=np.int64)
        self.ix = np.array(ixs, dtype=np.int64)
        self.iy = np.array(iys, dtype=np.int64)
        self.lo = np.array(los, dtype=np.int64)
        self.hi = np.array(his, dtype=np.int64)
        self.parent = np.array(parent, dtype=np.int64)
        nn = len(depth)
        self.first_child = np.full(nn, -1, dtype=np.int64)
        self.next_sib = np.full(nn, -1, dtype=np.int64)
        for nid, ks in enumerate(kids):
            prev = -1
            for c in ks:
                if prev < 0:
                    self.first_child[nid] = c
                else:
                    self.next_sib[prev] = c
                prev = c
        is_leaf = self.hi - self.lo == 1
        s = np.ldexp(1.0, self.t_exp - self.depth)
        self.side = np.where(is_leaf, 0.0, s)
        gx = self.x0 + self.ix * s
        gy = self.y0 + self.iy * s
        rep = self.perm[self.lo]
        self.gx0 = np.ascontiguousarray(np.where(is_leaf, self.points[rep, 0], gx))
        self.gy0 = np.ascontiguousarray(np.where(is_leaf, self.points[rep, 1], gy))
        self.gside = np.ascontiguousarray(self.side)

    @property
    def node_count(self):
        return self.depth.shape[0]

    def levels(self):
        return int(self.depth.max()) + 1

    def node_points(self, nid):
        return self.perm[self.lo[nid] : self.hi[nid]]


class BoundedSpreadWspd:
    def __init__(self, tree, pair_a, pair_b, eps):
        self.tree = tree
        self.pair_a = pair_a
        self.pair_b = pair_b
        self.eps = eps

    @property
    def npairs(self):
        return self.pair_a.shape[0]

    def pair_point_sets(self, i):
        t = self.tree
        return t.node_points(self.pair_a[i]), t.node_points(self.pair_b[i])

    def weight(self):
        t = self.tree
        return int(
            np.sum(t.hi[self.pair_a] - t.lo[self.pair_a])
            + np.sum(t.hi[self.pair_b] - t.lo[self.pair_b])
        )


def build_bounded_spread_wspd(points, eps, spread_guard=2.0**40):
    """Reference WSPD on an uncompressed quadtree; guarded by the spread."""
    from .graph import EmbeddedGraph, spread as spread_of  # cycle-free import

    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[0] >= 2:
        sr = spread_of(EmbeddedGraph(pts, np.zeros((0, 2), dtype=np.int64)))
        if sr.phi > spread_guard:
            raise ValueError("spread guard exceeded")
    tree = UncompressedQuadtree(pts)
    if pts.shape[0] == 1:
        return BoundedSpreadWspd(tree, np.zeros(0, np.int64), np.zeros(0, np.int64), eps)
    cap = max(4096, 64 * pts.shape[0])
    while True:
        out_a = np.empty(cap, dtype=np.int64)
        out_b = np.empty(cap, dtype=np.int64)
        cnt = K.wspd_pairs(
            tree.first_child, tree.next_sib, tree.side,
            tree.gx0, tree.gy0, tree.gside,
            (1.0 / eps) * math.sqrt(2.0), out_a, out_b,
        )
        if cnt >= 0:
            return BoundedSpreadWspd(tree, out_a[:cnt].copy(), out_b[:cnt].copy(), eps)
        cap *= 4
