"""Interpretable multi-view clustering by anchor-graph tensor factorization."""

from .anchor import anchor_graph_tensor, assemble_graph_tensor, build_anchor_graph, select_anchors
from .metrics import acc, nmi, purity
from .shrinkage import ProxParams, gst_scalar, prox_schatten_p, schatten_p_norm
from .solver import ClusterResult, SolverConfig, SolverState, run
from .tensor3 import mode3_dft, rotate_mode, t_product, t_svd, t_transpose

__all__ = [
    "ClusterResult",
    "ProxParams",
    "SolverConfig",
    "SolverState",
    "acc",
    "anchor_graph_tensor",
    "assemble_graph_tensor",
    "build_anchor_graph",
    "gst_scalar",
    "mode3_dft",
    "nmi",
    "prox_schatten_p",
    "purity",
    "rotate_mode",
    "run",
    "schatten_p_norm",
    "select_anchors",
    "t_product",
    "t_svd",
    "t_transpose",
]
