"""Graph container, edge-list I/O and grounded Laplacian views.

Nodes are dense integers ``0..n-1``.  Original labels from edge-list files are
kept in first-seen order so that selections can be reported in the caller's
vocabulary.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

COMMENT_PREFIXES = ("#", "%")
# Written by :func:`write_edge_list` so a reload reproduces node order exactly.
NODES_DIRECTIVE = "# pinsync-nodes:"


class EdgeListError(ValueError):
    """Raised for malformed edge-list input."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Graph:
    """Undirected, unweighted simple graph stored in CSR form.

    Use :meth:`from_edges` or :func:`load_edge_list` rather than the raw
    constructor.  Instances are immutable and safe to share between workers.
    """

    __slots__ = (
        "n", "m", "indptr", "indices", "degrees", "edges", "labels",
        "dropped_duplicates", "dropped_self_loops", "__dict__",
    )

    def __init__(self, n, indptr, indices, edges, labels=None,
                 dropped_duplicates=0, dropped_self_loops=0):
        self.n = int(n)
        self.indptr = _freeze(np.asarray(indptr, dtype=np.int64))
        self.indices = _freeze(np.asarray(indices, dtype=np.int64))
        self.edges = _freeze(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
        self.m = int(self.edges.shape[0])
        self.degrees = _freeze(np.diff(self.indptr))
        if labels is None:
            labels = tuple(str(i) for i in range(self.n))
        self.labels = tuple(labels)
        if len(self.labels) != self.n:
            raise ValueError("labels must have one entry per node")
        self.dropped_duplicates = int(dropped_duplicates)
        self.dropped_self_loops = int(dropped_self_loops)

    @classmethod
    def from_edges(cls, n: int, edges, labels: Sequence[str] | None = None) -> "Graph":
        """Build a simple graph on ``n`` nodes from an iterable of index pairs.

        Self-loops and repeated edges (in either orientation) are dropped and
        counted in ``dropped_self_loops`` / ``dropped_duplicates``.
        """
        n = int(n)
        if n < 0:
            raise ValueError("n must be non-negative")
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range 0..n-1")
        loops = e[:, 0] == e[:, 1]
        e = e[~loops]
        e = np.sort(e, axis=1)
        uniq = np.unique(e, axis=0) if e.size else e
        dups = len(e) - len(uniq)
        both = np.concatenate([uniq, uniq[:, ::-1]]) if len(uniq) else uniq
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.empty(0, int)
        both = both[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        if len(both):
            np.add.at(indptr, both[:, 0] + 1, 1)
        indptr = np.cumsum(indptr)
        indices = both[:, 1] if len(both) else np.empty(0, dtype=np.int64)
        return cls(n, indptr, indices, uniq, labels,
                   dropped_duplicates=dups, dropped_self_loops=int(loops.sum()))

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        a = sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))
        a.has_sorted_indices = True
        return a

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        lap = sp.diags(self.degrees.astype(np.float64)) - self.adjacency
        return lap.tocsr()

    def isolated_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.degrees == 0)

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        ncomp, _ = connected_components(self.adjacency, directed=False)
        return ncomp == 1

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self.labels == other.labels
                and np.array_equal(self.edges, other.edges))

    def __hash__(self):
        return hash((self.n, self.m, self.labels, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _iter_lines(source) -> Iterable[str]:
    if isinstance(source, (bytes, bytearray)):
        source = io.StringIO(bytes(source).decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)
    for line in source:
        if isinstance(line, (bytes, bytearray)):
            line = line.decode("utf-8")
        yield line


def parse_edge_list(source) -> Graph:
    """Parse edge-list text (``str``, ``bytes`` or an open text/binary stream).

    Each non-comment line holds exactly two whitespace-separated labels.
    Lines starting with ``#`` or ``%`` are comments.  Labels are mapped to
    dense indices in first-seen order.
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    pairs: list[tuple[int, int]] = []

    def idx(tok: str) -> int:
        j = index.get(tok)
        if j is None:
            j = index[tok] = len(labels)
            labels.append(tok)
        return j

    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(NODES_DIRECTIVE):
            if pairs:
                raise EdgeListError("node directive after first edge", lineno)
            for tok in line[len(NODES_DIRECTIVE):].split():
                idx(tok)
            continue
        if line.startswith(COMMENT_PREFIXES):
            continue
        toks = line.split()
        if len(toks) != 2:
            raise EdgeListError(f"expected 2 tokens, got {len(toks)}: {line!r}", lineno)
        pairs.append((idx(toks[0]), idx(toks[1])))

    if not pairs:
        raise EdgeListError("edge list contains no edges")
    return Graph.from_edges(len(labels), np.array(pairs, dtype=np.int64), labels)


def load_edge_list(path_or_stream) -> Graph:
    """Load a graph from a file path or an open stream."""
    if isinstance(path_or_stream, (str, os.PathLike)):
        with open(path_or_stream, "rb") as fh:
            return parse_edge_list(fh)
    return parse_edge_list(path_or_stream)


def write_edge_list(g: Graph, path_or_stream: str | os.PathLike | IO[str]) -> None:
    """Write ``g`` as an edge list readable by :func:`load_edge_list`.

    A ``# pinsync-nodes:`` comment line pins the node order so that a reload
    yields an identical graph; other tools see it as an ordinary comment.
    """
    if isinstance(path_or_stream, (str, os.PathLike)):
        with open(path_or_stream, "w", encoding="utf-8") as fh:
            write_edge_list(g, fh)
        return
    out = path_or_stream
    out.write(f"# n={g.n} m={g.m}\n")
    out.write(NODES_DIRECTIVE + " " + " ".join(g.labels) + "\n")
    lab = g.labels
    out.writelines(f"{lab[i]} {lab[j]}\n" for i, j in g.edges)


@dataclass(frozen=True)
class PinSet:
    """Ordered set of pinned nodes; ``members`` keeps selection order."""

    members: tuple[int, ...]
    origin: str = "manual"

    def __post_init__(self):
        members = tuple(int(v) for v in self.members)
        if len(set(members)) != len(members):
            raise ValueError("pinned nodes must be distinct")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        return v in self.members

    def prefix(self, k: int) -> "PinSet":
        return PinSet(self.members[:k], self.origin)

    def validate(self, n: int) -> None:
        if len(self.members) > n:
            raise ValueError("more pins than nodes")
        for v in self.members:
            if not 0 <= v < n:
                raise ValueError(f"pinned node {v} out of range 0..{n - 1}")


def as_pinset(pins) -> PinSet:
    if isinstance(pins, PinSet):
        return pins
    if pins is None:
        return PinSet(())
    return PinSet(tuple(np.asarray(list(pins), dtype=np.int64).ravel().tolist()))


@dataclass(frozen=True, eq=False)
class GroundedView:
    """Principal submatrix of the Laplacian over the unpinned nodes.

    Diagonal entries are full-graph degrees.  ``index_map[i]`` is the local
    row of parent node ``i``, or -1 when ``i`` is pinned.
    """

    parent: Graph
    unpinned: np.ndarray
    index_map: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return int(self.unpinned.size)

    @property
    def pinned_mask(self) -> np.ndarray:
        return self.index_map < 0

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        lap = self.parent.laplacian
        sub = lap[self.unpinned][:, self.unpinned]
        return sub.tocsr()

    @property
    def diagonal(self) -> np.ndarray:
        return self.parent.degrees[self.unpinned].astype(np.float64)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def lift(self, x: np.ndarray, fill: float = 0.0) -> np.ndarray:
        """Scatter a local vector back onto all parent nodes."""
        out = np.full(self.parent.n, fill, dtype=np.result_type(x, float))
        out[self.unpinned] = x
        return out


def grounded_view(g: Graph, pins) -> GroundedView:
    pins = as_pinset(pins)
    pins.validate(g.n)
    if len(pins) >= g.n:
        raise ValueError("cannot ground every node: the view would be empty")
    mask = np.zeros(g.n, dtype=bool)
    mask[list(pins.members)] = True
    unpinned = _freeze(np.flatnonzero(~mask))
    index_map = np.full(g.n, -1, dtype=np.int64)
    index_map[unpinned] = np.arange(unpinned.size)
    return GroundedView(g, unpinned, _freeze(index_map))


class Component(NamedTuple):
    nodes: np.ndarray
    touches_pinned: bool


def unpinned_components(g: Graph, pins) -> list[Component]:
    """Connected components of the subgraph induced on unpinned nodes.

    Components are ordered by their smallest node index; ``touches_pinned``
    flags components with at least one edge into the pinned set.
    """
    pins = as_pinset(pins)
    pins.validate(g.n)
    pinned = np.zeros(g.n, dtype=bool)
    pinned[list(pins.members)] = True
    return components_from_mask(g, pinned)


def components_from_mask(g: Graph, pinned: np.ndarray) -> list[Component]:
    """Same as :func:`unpinned_components` with pins given as a boolean mask."""
    free = np.flatnonzero(~pinned)
    if free.size == 0:
        return []
    sub = g.adjacency[free][:, free]
    ncomp, lab = connected_components(sub, directed=False)
    pinned_nbrs = g.adjacency @ pinned.astype(np.float64)
    touching = np.bincount(lab, weights=pinned_nbrs[free], minlength=ncomp) > 0
    order = np.argsort(lab, kind="stable")
    bounds = np.searchsorted(lab[order], np.arange(ncomp + 1))
    out = [Component(free[order[bounds[c]:bounds[c + 1]]], bool(touching[c]))
           for c in range(ncomp)]
    out.sort(key=lambda comp: int(comp.nodes[0]))
    return out
