"""Exact random-walk computations on weighted graphs (bindings to the C++ core)."""

from ._core import (
    HeatlabError,
    Walk,
    WeightedGraph,
    __version__,
    chain_bound,
    distance,
    exit_distribution,
    gen_bottleneck,
    gen_lattice,
    gen_product,
    gen_sierpinski,
    graph_from_json,
    green,
    harnack,
    heat_kernel,
    heat_kernel_row,
    iter_counts,
    mean_exit,
    mean_exit_sup,
    resistance,
    run,
    sierpinski_vertex,
    walk_dimension,
)

__all__ = [name for name in dir() if not name.startswith("_")]
