"""Static layered range tree over (x, y, level) vertex triples.

Primary dimension is x (merge-sort tree over x-sorted positions); every
canonical node keeps its points sorted by y with aligned level/id arrays, so
a box query decomposes into O(log n) canonical nodes, a binary search per
node, and a vectorized filter on the one-sided level constraint.
"""
from __future__ import annotations

import numpy as np


class RangeIndex:
    """Orthogonal box reporting for `x in [x1,x2], y in [y1,y2], level <= L`.

    Exactly one entry per vertex; results return vertex ids in ascending
    order (deterministic).
    """

    def __init__(self, xs, ys, levels):
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        lv = np.asarray(levels, dtype=np.int64)
        n = xs.shape[0]
        order = np.lexsort((np.arange(n), ys, xs))
        self.xs = xs[order]
        self.n = n
        # level 0: singletons in x order; higher levels merge pairs, y-sorted
        self.layers = []
        ids = order.astype(np.int64)
        ys_l = ys[order]
        lv_l = lv[order]
        cur = (ys_l.copy(), lv_l.copy(), ids.copy())
        width = 1
        self.layers.append(cur)
        while width < n:
            py, pl, pid = cur
            ny, nl, nid = [], [], []
            for start in range(0, n, 2 * width):
                a0, a1 = start, min(start + width, n)
                b0, b1 = a1, min(start + 2 * width, n)
                seg_y = np.concatenate([py[a0:a1], py[b0:b1]])
                seg_l = np.concatenate([pl[a0:a1], pl[b0:b1]])
                seg_i = np.concatenate([pid[a0:a1], pid[b0:b1]])
                o = np.lexsort((seg_i, seg_y))
                ny.append(seg_y[o])
                nl.append(seg_l[o])
                nid.append(seg_i[o])
            cur = (np.concatenate(ny), np.concatenate(nl), np.concatenate(nid))
            self.layers.append(cur)
            width *= 2

    def _canonical(self, plo, phi):
        """Decompose the position range [plo, phi) into aligned segments,
        returned as (layer, start, stop) triples."""
        out = []
        lo, hi = plo, phi
        level = 0
        while lo < hi:
            if lo & 1:
                out.append((level, lo, lo + 1))
                lo += 1
            if hi & 1:
                hi -= 1
                out.append((level, hi, hi + 1))
            lo >>= 1
            hi >>= 1
            level += 1
            if lo >= hi:
                break
        segs = []
        for level, a, b in out:
            width = 1 << level
            segs.append((level, a * width, min(b * width, self.n)))
        return segs

    def query(self, x1, x2, y1, y2, max_level):
        """Vertex ids with position in the closed box and entry level <= max_level."""
        plo = int(np.searchsorted(self.xs, x1, side="left"))
        phi = int(np.searchsorted(self.xs, x2, side="right"))
        if plo >= phi:
            return np.zeros(0, dtype=np.int64)
        found = []
        for level, a, b in self._canonical(plo, phi):
            ly, ll, lid = self.layers[level]
            j1 = int(np.searchsorted(ly[a:b], y1, side="left"))
            j2 = int(np.searchsorted(ly[a:b], y2, side="right"))
            if j1 >= j2:
                continue
            seg_l = ll[a + j1 : a + j2]
            seg_i = lid[a + j1 : a + j2]
            hit = seg_l <= max_level
            if hit.any():
                found.append(seg_i[hit])
        if not found:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(found))
