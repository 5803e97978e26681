"""Well-separated pair decompositions and (1+eps)-approximate distance
oracles for low-density graphs embedded in the plane."""

from ._kernels import BACKEND, HAS_NUMBA
from .graph import (
    EmbeddedGraph,
    Point2,
    all_pairs_shortest_paths,
    density_lower_bound,
    dump_graph_text,
    euclidean_distance,
    generate,
    graph_distance,
    load_graph,
    parse_graph_text,
    spread,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAS_NUMBA",
    "EmbeddedGraph",
    "Point2",
    "all_pairs_shortest_paths",
    "density_lower_bound",
    "dump_graph_text",
    "euclidean_distance",
    "generate",
    "graph_distance",
    "load_graph",
    "parse_graph_text",
    "spread",
]
