"""Loop-aware message passing on networks.

Message passing at approximation order r treats each node's order-r
neighborhood exactly; r=0 reproduces standard (tree) belief propagation,
r=1 additionally accounts for triangles, and so on. Two applications are
provided, bond percolation observables and spectral densities of sparse
symmetric matrices, each paired with an independent brute-force or
simulation oracle.
"""

from .graph import Graph, GraphParseError, degree, laplacian, load_edge_list, load_matrix_triplets, to_dense
from .neighborhoods import (
    MessageTopology,
    NeighborhoodSet,
    TopologyBudgetError,
    build_neighborhood,
    build_reduced,
    build_topology,
    dump_neighborhood,
)
from .genfunc import ExhaustiveBudgetError, GResult, GTrace, build_G_trace, eval_G_exhaustive, eval_G_mc
from .percolation import (
    PercMessageState,
    PercParams,
    PercSolver,
    mean_cluster_size,
    node_generating_function,
    percolating_fraction,
    percolation_scan,
    solve_message_derivatives,
    solve_messages,
)
from .percolation_sim import SimEstimate, exhaustive_distribution, exhaustive_node_stats, simulate
from .unionfind import UnionFind
from .spectra import (
    DensityCurve,
    SpectralMessageState,
    SpectralParams,
    node_H,
    solve_spectral_messages,
    spectral_density,
    update_message,
)
from .dense_eig import dense_eigenvalues, smoothed_density

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "GraphParseError",
    "load_edge_list",
    "load_matrix_triplets",
    "laplacian",
    "degree",
    "to_dense",
    "NeighborhoodSet",
    "MessageTopology",
    "TopologyBudgetError",
    "build_neighborhood",
    "build_reduced",
    "build_topology",
    "dump_neighborhood",
    "GResult",
    "GTrace",
    "ExhaustiveBudgetError",
    "eval_G_exhaustive",
    "build_G_trace",
    "eval_G_mc",
    "PercParams",
    "PercMessageState",
    "PercSolver",
    "solve_messages",
    "solve_message_derivatives",
    "percolating_fraction",
    "mean_cluster_size",
    "node_generating_function",
    "percolation_scan",
    "UnionFind",
    "SimEstimate",
    "exhaustive_distribution",
    "exhaustive_node_stats",
    "simulate",
    "SpectralParams",
    "SpectralMessageState",
    "DensityCurve",
    "update_message",
    "solve_spectral_messages",
    "node_H",
    "spectral_density",
    "dense_eigenvalues",
    "smoothed_density",
    "__version__",
]
