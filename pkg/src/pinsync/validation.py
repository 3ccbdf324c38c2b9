"""Input validation helpers shared by the estimators and the harness."""

from __future__ import annotations

import math
import numbers
import os

import numpy as np
import scipy.sparse as sp

from .graph import Graph, PinSet, as_pinset, load_edge_list


def check_graph(X) -> Graph:
    """Coerce graph-like input to a :class:`Graph`.

    Accepted: a ``Graph``; a path to an edge-list file; a networkx-style
    graph (anything with ``nodes`` and ``edges``); a square adjacency matrix
    (dense or scipy sparse, nonzeros are edges); an ``(m, 2)`` integer edge
    array.
    """
    if isinstance(X, Graph):
        return X
    if isinstance(X, (str, os.PathLike)):
        return load_edge_list(X)
    if hasattr(X, "nodes") and hasattr(X, "edges") and not sp.issparse(X):
        if X.is_directed() if hasattr(X, "is_directed") else False:
            raise ValueError("directed graphs are not supported")
        nodes = list(X.nodes)
        index = {v: i for i, v in enumerate(nodes)}
        edges = np.array([(index[u], index[v]) for u, v in X.edges], dtype=np.int64)
        return Graph.from_edges(len(nodes), edges.reshape(-1, 2), [str(v) for v in nodes])
    if sp.issparse(X):
        a = sp.coo_matrix(X)
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency matrix must be square, got {a.shape}")
        if (abs(a - a.T) > 0).nnz:
            raise ValueError("adjacency matrix must be symmetric")
        keep = a.data != 0
        return Graph.from_edges(a.shape[0], np.column_stack([a.row[keep], a.col[keep]]))
    arr = np.asarray(X)
    square = arr.ndim == 2 and arr.shape[0] == arr.shape[1] and arr.shape[0] > 0
    # a 2x2 array is read as adjacency only when symmetric, else as two edges
    if square and not (arr.shape[0] == 2 and not np.array_equal(arr, arr.T)):
        if not np.array_equal(arr, arr.T):
            raise ValueError("adjacency matrix must be symmetric")
        i, j = np.nonzero(arr)
        return Graph.from_edges(arr.shape[0], np.column_stack([i, j]))
    if arr.ndim == 2 and arr.shape[1] == 2:
        if not np.issubdtype(arr.dtype, np.integer):
            raise TypeError("edge arrays must hold integer node indices")
        n = int(arr.max()) + 1 if arr.size else 0
        return Graph.from_edges(n, arr)
    raise TypeError(f"cannot interpret {type(X).__name__} as a graph")


def check_budget(k, n: int) -> int:
    """Resolve a pin budget to an absolute count.

    Integers are taken as counts; floats in ``(0, 1)`` as a fraction of
    ``n`` (rounded half up, at least one pin).
    """
    if isinstance(k, bool):
        raise TypeError("pin budget must be a number")
    if isinstance(k, numbers.Integral):
        k = int(k)
    elif isinstance(k, numbers.Real):
        if not 0.0 < k < 1.0:
            raise ValueError(f"fractional budget must lie in (0, 1), got {k}")
        k = max(1, int(math.floor(k * n + 0.5)))
    else:
        raise TypeError("pin budget must be a number")
    if not 1 <= k < n:
        raise ValueError(f"pin budget {k} must satisfy 1 <= k < N={n}")
    return k


def check_pins(pins, g: Graph) -> PinSet:
    pins = as_pinset(pins)
    pins.validate(g.n)
    return pins
