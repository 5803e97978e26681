"""Constant-time ancestry machinery: generic level ancestors on rooted trees
and exact-weight ancestor lookups on net-trees, feeding the pair-membership
oracle.

Weights are net-tree levels and strictly increase from the root toward the
leaves, so each root path holds at most one node per weight.  The lookup
structure is a heavy-path decomposition whose paths carry direct-address rows
over the level range: a query is a couple of comparisons and one table read.
All structures are immutable after build and safe for concurrent readers.
"""
from __future__ import annotations

import numpy as np

from .nettree import NetTree, semi_compress
from .quadtree import Cell, congruent_maximal_ancestors


class OpCounter:
    """Primitive-operation tally used to certify constant query cost."""

    __slots__ = ("ops",)

    def __init__(self):
        self.ops = 0

    def add(self, k=1):
        self.ops += k


# ---------------------------------------------------------------------------
# generic O(1) level ancestor (jump pointers + ladders)
# ---------------------------------------------------------------------------


class LevelAncestor:
    """Ancestor-at-depth queries on any rooted forest in O(1) after linear
    preprocessing, via longest-path ladders plus binary jump pointers."""

    def __init__(self, parent):
        parent = np.asarray(parent, dtype=np.int64)
        n = parent.shape[0]
        self.parent = parent
        order = self._topo(parent)
        depth = np.zeros(n, dtype=np.int64)
        for v in order:
            p = parent[v]
            depth[v] = depth[p] + 1 if p >= 0 else 0
        self.depth = depth
        # longest downward path per node
        height = np.zeros(n, dtype=np.int64)
        long_child = np.full(n, -1, dtype=np.int64)
        for v in reversed(order):
            p = parent[v]
            if p >= 0 and height[v] + 1 > height[p]:
                height[p] = height[v] + 1
                long_child[p] = v
        # ladders: each long path, extended upward by its own length
        self.ladder_of = np.full(n, -1, dtype=np.int64)
        self.pos_in_ladder = np.full(n, -1, dtype=np.int64)
        self.ladders = []
        on_path_top = [v for v in order if parent[v] < 0 or long_child[parent[v]] != v]
        for top in on_path_top:
            path = []
            v = top
            while v >= 0:
                path.append(v)
                v = long_child[v]
            ext = []
            u = parent[top]
            for _ in range(len(path)):
                if u < 0:
                    break
                ext.append(u)
                u = parent[u]
            ladder = list(reversed(ext)) + path
            lid = len(self.ladders)
            self.ladders.append(np.array(ladder, dtype=np.int64))
            for i, v in enumerate(path, start=len(ext)):
                self.ladder_of[v] = lid
                self.pos_in_ladder[v] = i
        # binary jump pointers
        kmax = max(1, int(np.max(depth)).bit_length())
        up = np.full((kmax, n), -1, dtype=np.int64)
        up[0] = parent
        for k in range(1, kmax):
            prev = up[k - 1]
            up[k] = np.where(prev >= 0, prev[prev], -1)
        self.up = up

    @staticmethod
    def _topo(parent):
        n = parent.shape[0]
        state = np.zeros(n, dtype=np.int8)
        order = []
        for s in range(n):
            if state[s]:
                continue
            chain = []
            v = s
            while v >= 0 and not state[v]:
                state[v] = 1
                chain.append(v)
                v = parent[v]
            order.extend(reversed(chain))
        return order

    def query(self, u: int, d: int) -> int:
        """Ancestor of ``u`` at depth ``d`` (root has depth 0)."""
        du = int(self.depth[u])
        if not 0 <= d <= du:
            raise ValueError("depth out of range")
        delta = du - d
        if delta == 0:
            return u
        k = delta.bit_length() - 1
        v = int(self.up[k][u])
        rest = delta - (1 << k)
        lad = self.ladders[self.ladder_of[v]]
        pos = int(self.pos_in_ladder[v]) - rest
        return int(lad[pos])


def level_ancestor(index: LevelAncestor, u: int, d: int) -> int:
    return index.query(u, d)


def ancestor_by_walk(parent, u: int, steps: int) -> int:
    """Slow parent-walk oracle for tests."""
    for _ in range(steps):
        u = int(parent[u])
    return u


# ---------------------------------------------------------------------------
# exact-weight ancestors on a net-tree
# ---------------------------------------------------------------------------


class HeavyPathIndex:
    """Heavy-path decomposition of a rooted forest: an edge (parent, child) is
    heavy when the child's subtree holds more than half of the parent's."""

    def __init__(self, parent):
        parent = np.asarray(parent, dtype=np.int64)
        n = parent.shape[0]
        self.parent = parent
        order = LevelAncestor._topo(parent)
        size = np.ones(n, dtype=np.int64)
        for v in reversed(order):
            p = parent[v]
            if p >= 0:
                size[p] += size[v]
        heavy = np.zeros(n, dtype=bool)  # edge to parent is heavy
        for v in range(n):
            p = parent[v]
            if p >= 0 and 2 * size[v] > size[p]:
                heavy[v] = True
        self.path_of = np.full(n, -1, dtype=np.int64)
        self.path_top = []
        npaths = 0
        for v in order:  # parents first
            p = parent[v]
            if p >= 0 and heavy[v]:
                self.path_of[v] = self.path_of[p]
            else:
                self.path_of[v] = npaths
                self.path_top.append(v)
                npaths += 1
        self.npaths = npaths


class ExactWeightTable:
    """Per heavy path, a direct-address row over the whole weight range: entry
    (path, w) is the node of weight ``w`` on the path's root chain, or -1.
    One table read answers an exact-weight ancestor query."""

    def __init__(self, hp: HeavyPathIndex, weight):
        weight = np.asarray(weight, dtype=np.int64)
        self.weight = weight
        self.hp = hp
        wmax = int(weight.max()) if weight.shape[0] else 0
        self.wmax = wmax
        rows = np.full((hp.npaths, wmax + 1), -1, dtype=np.int64)
        parent = hp.parent
        nodes_by_path = [[] for _ in range(hp.npaths)]
        for v in range(weight.shape[0]):
            nodes_by_path[hp.path_of[v]].append(v)
        # paths were numbered parents-first; inherit the entry chain's row
        # clipped at the entry weight (deeper nodes of the parent path are
        # not ancestors), then overlay the path's own nodes
        for pid in range(hp.npaths):
            top = hp.path_top[pid]
            up = parent[top]
            if up >= 0:
                wcut = int(weight[up])
                rows[pid, : wcut + 1] = rows[hp.path_of[up], : wcut + 1]
            for v in nodes_by_path[pid]:
                rows[pid, weight[v]] = v
        self.rows = rows
        self.entries = rows.shape[0] * rows.shape[1]

    def query(self, u: int, w: int, counter: OpCounter | None = None) -> int:
        """Ancestor-or-self of node ``u`` with weight exactly ``w``, or -1."""
        if counter is not None:
            counter.add(3)
        wu = self.weight[u]
        if w == wu:
            return int(u)
        if w > wu or w < 0 or w > self.wmax:
            return -1
        nid = int(self.rows[self.hp.path_of[u], w])
        return nid


def exact_weight_ancestor(table: ExactWeightTable, u: int, w: int, counter=None) -> int:
    return table.query(u, w, counter)


def weighted_ancestor_by_walk(parent, weight, u: int, w: int) -> int:
    """Parent-walk test oracle: first ancestor-or-self with weight <= w,
    reported only if its weight is exactly w (else -1)."""
    v = u
    while v >= 0 and weight[v] > w:
        v = int(parent[v])
    if v >= 0 and weight[v] == w:
        return v
    return -1


# ---------------------------------------------------------------------------
# membership oracle
# ---------------------------------------------------------------------------


class MembershipOracle:
    """Maps a vertex pair to the unique decomposition pair containing it.

    Query path: compute the congruent maximal ancestor cells of the two
    points, derive the resolution level from the cell side, then read each
    vertex's exact-level ancestor in the semi-compressed net-tree.
    """

    def __init__(self, gw, validate_pairs: bool = True):
        from .graphwspd import GraphWspd, LEVEL_OFFSET  # local to avoid cycle

        assert isinstance(gw, GraphWspd)
        if gw.pair_cell_a is None:
            raise ValueError("graph decomposition was built without materialized pairs")
        self.gw = gw
        self.qtree = gw.qtree
        self.graph = gw.graph
        self.eps_euclid = gw.ewspd.eps
        self.shift = gw.seq.shift
        qt = self.qtree
        lvl_a = qt.depth[gw.pair_cell_a] + self.shift + LEVEL_OFFSET
        lvl_b = qt.depth[gw.pair_cell_b] + self.shift + LEVEL_OFFSET
        inserts = np.unique(
            np.concatenate(
                [
                    np.column_stack([gw.pair_center_a, lvl_a]),
                    np.column_stack([gw.pair_center_b, lvl_b]),
                ]
            ),
            axis=0,
        )
        self.insert_count = inserts.shape[0]
        self.semi_tree = semi_compress(gw.ntree, inserts)
        self.heavy = HeavyPathIndex(self.semi_tree.node_parent)
        self.table = ExactWeightTable(self.heavy, self.semi_tree.node_level)
        self.pair_ids = None
        if validate_pairs:
            keys = {}
            for i in range(gw.pair_count):
                keys[self._pair_key_from_row(i)] = i
            self.pair_ids = keys

    def _pair_key_from_row(self, i):
        gw = self.gw
        qt = self.qtree
        na, nb = int(gw.pair_cell_a[i]), int(gw.pair_cell_b[i])
        return (
            int(qt.ix[na]),
            int(qt.iy[na]),
            int(gw.pair_center_a[i]),
            int(qt.ix[nb]),
            int(qt.iy[nb]),
            int(gw.pair_center_b[i]),
            int(qt.depth[na]),
        )

    def size(self) -> int:
        """Nodes plus direct-address entries (the certified-size quantity)."""
        return int(self.semi_tree.node_count + self.table.entries)

    def query(self, a: int, b: int, counter: OpCounter | None = None):
        """The unique pair (as two (center, cell) handles, canonically
        ordered) whose clusters contain ``a`` and ``b`` respectively."""
        from .graphwspd import ClusterHandle, LEVEL_OFFSET

        if a == b:
            raise ValueError("pair queries need two distinct vertices")
        pts = self.graph.vertices
        ca, cb = congruent_maximal_ancestors(
            self.qtree, tuple(pts[a]), tuple(pts[b]), self.eps_euclid
        )
        if counter is not None:
            counter.add(12)  # cell window scan, a handful of box tests
        level = ca.depth + self.shift + LEVEL_OFFSET
        st = self.semi_tree
        sa = self.table.query(int(st.deepest_node[a]), level, counter)
        sb = self.table.query(int(st.deepest_node[b]), level, counter)
        if sa < 0 or sb < 0:
            raise AssertionError("missing exact-level ancestor; oracle out of sync")
        va = int(st.node_vertex[sa])
        vb = int(st.node_vertex[sb])
        if counter is not None:
            counter.add(4)
        ha = ClusterHandle(va, ca)
        hb = ClusterHandle(vb, cb)
        if (ca.ix, ca.iy) > (cb.ix, cb.iy):
            ha, hb = hb, ha
        return ha, hb

    def pair_id(self, ha, hb) -> int:
        """Index of a queried pair in the decomposition's pair list."""
        if self.pair_ids is None:
            raise ValueError("oracle built without the pair index")
        key = (
            ha.cell.ix,
            ha.cell.iy,
            ha.center,
            hb.cell.ix,
            hb.cell.iy,
            hb.center,
            ha.cell.depth,
        )
        got = self.pair_ids.get(key)
        if got is None:
            raise KeyError("queried pair is not in the decomposition")
        return got


def build_membership_oracle(gw, validate_pairs: bool = True) -> MembershipOracle:
    return MembershipOracle(gw, validate_pairs=validate_pairs)
