"""Plane-embedded weighted graphs: representation, metrics, generators and
density measurement.

Edge weights always equal the Euclidean length of the embedded segment; every
structure in this package leans on the resulting inequality
``d2(u, v) <= d_G(u, v)``.  Graphs are immutable after construction and safe
for concurrent reads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels as K

APSP_CAP_DEFAULT = 5000
EXACT_SPREAD_CAP = 5000
UNREACHABLE = math.inf


class Point2(NamedTuple):
    x: float
    y: float


def euclidean_distance(p, q) -> float:
    """L2 distance between two points given as (x, y) pairs."""
    px, py = float(p[0]), float(p[1])
    qx, qy = float(q[0]), float(q[1])
    if not (math.isfinite(px) and math.isfinite(py) and math.isfinite(qx) and math.isfinite(qy)):
        raise ValueError("coordinates must be finite")
    return math.hypot(px - qx, py - qy)


class EmbeddedGraph:
    """Straight-line plane embedding of an undirected graph.

    ``vertices`` is an (n, 2) float array, ``edges`` an (m, 2) int array of
    vertex indices with u < v, and ``weights`` the per-edge segment lengths.
    """

    __slots__ = ("vertices", "edges", "weights", "_csr", "_components")

    def __init__(self, vertices, edges):
        v = np.ascontiguousarray(np.asarray(vertices, dtype=np.float64))
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array")
        if not np.all(np.isfinite(v)):
            raise ValueError("coordinates must be finite")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        n = v.shape[0]
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loop")
            e = np.sort(e, axis=1)
            order = np.lexsort((e[:, 1], e[:, 0]))
            e = e[order]
            if e.shape[0] > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
                raise ValueError("duplicate edge")
        if n > 1:
            uniq = np.unique(v, axis=0)
            if uniq.shape[0] != n:
                raise ValueError("vertex coordinates must be pairwise distinct")
        self.vertices = v
        self.edges = e
        d = v[e[:, 0]] - v[e[:, 1]] if e.size else np.zeros((0, 2))
        self.weights = np.hypot(d[:, 0], d[:, 1])
        self._csr = None
        self._components = None
        self.vertices.setflags(write=False)
        self.edges.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    def csr(self):
        if self._csr is None:
            self._csr = K.build_csr(self.n, self.edges, self.weights)
        return self._csr

    def components(self):
        """Connected component id per vertex (ids are 0-based, BFS order)."""
        if self._components is None:
            indptr, indices, _ = self.csr()
            comp = np.full(self.n, -1, dtype=np.int64)
            cid = 0
            for s in range(self.n):
                if comp[s] >= 0:
                    continue
                stack = [s]
                comp[s] = cid
                while stack:
                    u = stack.pop()
                    for k in range(indptr[u], indptr[u + 1]):
                        w = indices[k]
                        if comp[w] < 0:
                            comp[w] = cid
                            stack.append(w)
                cid += 1
            self._components = comp
        return self._components

    def is_connected(self) -> bool:
        return self.n <= 1 or self.components().max() == 0

    def bbox(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return lo[0], lo[1], hi[0], hi[1]

    def scale(self) -> float:
        """Bounding-box diagonal, used as the tolerance scale."""
        if self.n == 0:
            return 1.0
        x0, y0, x1, y1 = self.bbox()
        return max(math.hypot(x1 - x0, y1 - y0), 1.0)


def graph_distance(g: EmbeddedGraph, u: int, v: int) -> float:
    """Shortest-path distance; ``math.inf`` marks unreachable pairs."""
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise IndexError("vertex index out of range")
    if u == v:
        return 0.0
    indptr, indices, weights = g.csr()
    return float(K.dijkstra_pair(indptr, indices, weights, u, v, g.n))


def single_source_distances(g: EmbeddedGraph, source: int) -> np.ndarray:
    indptr, indices, weights = g.csr()
    dist = np.full(g.n, np.inf)
    K.dijkstra(indptr, indices, weights, source, dist)
    return dist


def all_pairs_shortest_paths(g: EmbeddedGraph, cap: int = APSP_CAP_DEFAULT) -> np.ndarray:
    """Dense distance matrix by repeated Dijkstra (deterministic)."""
    if g.n > cap:
        raise ValueError(f"all_pairs_shortest_paths capped at n <= {cap}")
    indptr, indices, weights = g.csr()
    return K.apsp_matrix(indptr, indices, weights, g.n)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def generate_grid(k: int) -> EmbeddedGraph:
    """k x k unit lattice with 4-neighbour edges."""
    if k < 1:
        raise ValueError("k >= 1")
    xs, ys = np.meshgrid(np.arange(k, dtype=np.float64), np.arange(k, dtype=np.float64))
    verts = np.column_stack([xs.ravel(), ys.ravel()])
    edges = []
    for j in range(k):
        for i in range(k):
            a = j * k + i
            if i + 1 < k:
                edges.append((a, a + 1))
            if j + 1 < k:
                edges.append((a, a + k))
    return EmbeddedGraph(verts, edges)


def generate_comb(k: int) -> EmbeddedGraph:
    """Spine of k vertices, each carrying a vertical tooth of k-1 vertices."""
    if k < 1:
        raise ValueError("k >= 1")
    verts = [(float(i), 0.0) for i in range(k)]
    edges = [(i, i + 1) for i in range(k - 1)]
    for i in range(k):
        prev = i
        for j in range(1, k):
            verts.append((float(i), float(j)))
            cur = len(verts) - 1
            edges.append((prev, cur))
            prev = cur
    return EmbeddedGraph(np.array(verts), edges)


def generate_selg(k: int, ell: float, seed: int, extra_prob: float = 0.25) -> EmbeddedGraph:
    """Random lattice graph on the k x k integer lattice with edges of
    Euclidean length <= ell, connected via a spanning-tree pass."""
    if k < 1:
        raise ValueError("k >= 1")
    if ell < 1:
        raise ValueError("ell >= 1")
    rng = np.random.default_rng(seed)
    xs, ys = np.meshgrid(np.arange(k, dtype=np.float64), np.arange(k, dtype=np.float64))
    verts = np.column_stack([xs.ravel(), ys.ravel()])
    n = k * k
    offsets = []
    r = int(math.floor(ell))
    for dx in range(0, r + 1):
        for dy in range(-r, r + 1):
            if dx == 0 and dy <= 0:
                continue
            if dx * dx + dy * dy <= ell * ell:
                offsets.append((dx, dy))
    cand = []
    for j in range(k):
        for i in range(k):
            a = j * k + i
            for dx, dy in offsets:
                i2, j2 = i + dx, j + dy
                if 0 <= i2 < k and 0 <= j2 < k:
                    cand.append((a, j2 * k + i2))
    cand = np.array(cand, dtype=np.int64)
    order = rng.permutation(len(cand))
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    chosen = np.zeros(len(cand), dtype=bool)
    for idx in order:
        a, b = cand[idx]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            chosen[idx] = True
    extra = rng.random(len(cand)) < extra_prob
    chosen |= extra
    return EmbeddedGraph(verts, cand[chosen])


def generate_perturbed_grid(k: int, noise: float, seed: int) -> EmbeddedGraph:
    """Unit grid with coordinates jittered by +-noise (noise < 0.5 keeps
    vertices distinct)."""
    if not 0 <= noise < 0.5:
        raise ValueError("noise must lie in [0, 0.5)")
    g = generate_grid(k)
    rng = np.random.default_rng(seed)
    verts = g.vertices + rng.uniform(-noise, noise, size=g.vertices.shape)
    return EmbeddedGraph(verts, g.edges)


def generate(kind: str, **params) -> EmbeddedGraph:
    """Dispatch on the generator name used by the CLI."""
    if kind == "grid":
        return generate_grid(int(params["k"]))
    if kind == "comb":
        return generate_comb(int(params["k"]))
    if kind == "selg":
        return generate_selg(int(params["k"]), float(params.get("ell", 2.0)), int(params["seed"]))
    if kind == "perturbed_grid":
        return generate_perturbed_grid(
            int(params["k"]), float(params.get("noise", 0.25)), int(params["seed"])
        )
    raise ValueError(f"unknown graph kind: {kind}")


# ---------------------------------------------------------------------------
# density and spread
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityReport:
    lambda_lower_bound: int
    tau_lower_bound: int
    witness_discs: list = field(default_factory=list)


def _edge_geometry(g: EmbeddedGraph):
    p = g.vertices[g.edges[:, 0]] if g.m else np.zeros((0, 2))
    q = g.vertices[g.edges[:, 1]] if g.m else np.zeros((0, 2))
    return (
        np.ascontiguousarray(p[:, 0]),
        np.ascontiguousarray(p[:, 1]),
        np.ascontiguousarray(q[:, 0]),
        np.ascontiguousarray(q[:, 1]),
        g.weights,
    )


def _subsample(arr: np.ndarray, budget: int) -> np.ndarray:
    if len(arr) <= budget:
        return arr
    idx = np.linspace(0, len(arr) - 1, budget).round().astype(np.int64)
    return arr[np.unique(idx)]


def density_lower_bound(
    g: EmbeddedGraph,
    max_centers: int = 256,
    max_radii: int = 32,
) -> DensityReport:
    """Certified lower bounds on the low-density parameter and on the weaker
    vertex-ball crossing parameter.

    Candidate discs are centred at vertices, edge midpoints and vertex-pair
    midpoints; radii are sampled from the sorted pairwise-distance and
    edge-length pools, capped by the given budgets.  Discs are closed and
    tangency counts.  Every witness count is reproducible by rescanning all
    edges against the reported disc.
    """
    if g.m == 0:
        return DensityReport(0, 0, [])
    ex1, ey1, ex2, ey2, elen = _edge_geometry(g)
    slack = 1e-12 * g.scale()

    vcenters = g.vertices
    mids = 0.5 * (g.vertices[g.edges[:, 0]] + g.vertices[g.edges[:, 1]])
    rng_idx = np.arange(g.n)
    pair_mids = []
    # strided pair midpoints, deterministic
    step = max(1, g.n // 24)
    for i in rng_idx[::step]:
        for j in rng_idx[i + 1 :: step]:
            pair_mids.append(0.5 * (g.vertices[i] + g.vertices[j]))
    pair_mids = np.array(pair_mids) if pair_mids else np.zeros((0, 2))

    sample_v = g.vertices[:: max(1, g.n // 96)]
    dists = np.unique(
        np.hypot(
            sample_v[:, None, 0] - sample_v[None, :, 0],
            sample_v[:, None, 1] - sample_v[None, :, 1],
        ).ravel()
    )
    radii = np.unique(np.concatenate([dists[dists > 0], np.unique(elen)]))
    radii = _subsample(radii, max_radii)

    best_l = 0
    best_t = 0
    witnesses = []

    def scan(centers, radii, vertex_centered):
        nonlocal best_l, best_t
        for c in centers:
            cx, cy = float(c[0]), float(c[1])
            for r in radii:
                ni, nc = K.disc_density_counts(
                    ex1, ey1, ex2, ey2, elen, cx, cy, float(r), slack
                )
                if ni > best_l:
                    best_l = ni
                    witnesses.append((Point2(cx, cy), float(r), int(ni), "lambda"))
                if vertex_centered and nc > best_t:
                    best_t = nc
                    witnesses.append((Point2(cx, cy), float(r), int(nc), "tau"))

    scan(_subsample(vcenters, max_centers), radii, True)
    scan(_subsample(mids, max_centers // 2), radii, False)
    if len(pair_mids):
        scan(_subsample(pair_mids, max_centers // 2), radii, False)

    keep = [w for w in witnesses if (w[3] == "lambda" and w[2] == best_l) or (w[3] == "tau" and w[2] == best_t)]
    return DensityReport(best_l, best_t, keep)


def recount_disc(g: EmbeddedGraph, center, radius: float):
    """Recompute a witness disc's counts from scratch (brute force)."""
    ex1, ey1, ex2, ey2, elen = _edge_geometry(g)
    slack = 1e-12 * g.scale()
    return K.disc_density_counts(
        ex1, ey1, ex2, ey2, elen, float(center[0]), float(center[1]), float(radius), slack
    )


@dataclass(frozen=True)
class SpreadReport:
    phi: float
    min_pair_dist: float
    max_pair_dist: float


def spread(g: EmbeddedGraph) -> SpreadReport:
    """Ratio of the largest to the smallest pairwise Euclidean distance."""
    if g.n < 2:
        raise ValueError("spread requires n >= 2")
    xs = np.ascontiguousarray(g.vertices[:, 0])
    ys = np.ascontiguousarray(g.vertices[:, 1])
    if g.n <= EXACT_SPREAD_CAP:
        dmin, dmax = K.pairwise_min_max(xs, ys)
    else:
        order = np.lexsort((ys, xs))
        dmin = K.closest_pair_sorted(xs[order], ys[order])
        dmax = K.hull_diameter(xs, ys)
    return SpreadReport(float(dmax / dmin), float(dmin), float(dmax))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def dump_graph_text(g: EmbeddedGraph) -> str:
    """`graph n m` header, `v id x y` lines, `e u v` lines.  Weights are never
    stored; they are recomputed from coordinates on ingestion."""
    out = [f"graph {g.n} {g.m}"]
    for i in range(g.n):
        out.append(f"v {i} {g.vertices[i, 0]!r} {g.vertices[i, 1]!r}")
    for u, v in g.edges:
        out.append(f"e {u} {v}")
    return "\n".join(out) + "\n"


def parse_graph_text(text: str) -> EmbeddedGraph:
    n = m = None
    verts = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "graph":
            n, m = int(parts[1]), int(parts[2])
        elif parts[0] == "v":
            verts[int(parts[1])] = (float(parts[2]), float(parts[3]))
        elif parts[0] == "e":
            edges.append((int(parts[1]), int(parts[2])))
        else:
            raise ValueError(f"line {lineno}: unknown record {parts[0]!r}")
    if n is None:
        raise ValueError("missing graph header")
    if len(verts) != n or sorted(verts) != list(range(n)):
        raise ValueError("vertex ids must be 0-based and consecutive")
    if len(edges) != m:
        raise ValueError(f"expected {m} edges, found {len(edges)}")
    coords = np.array([verts[i] for i in range(n)], dtype=np.float64).reshape(n, 2)
    return EmbeddedGraph(coords, edges)


def load_graph(path) -> EmbeddedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph_text(fh.read())
