"""Seeded BA / ER / WS network generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

MODELS = ("BA", "ER", "WS")
MAX_CONNECT_RETRIES = 100


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gen_er(n: int, p: float, seed=None) -> Graph:
    """G(n, p): every unordered pair is an edge independently with prob. ``p``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = _rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph.from_edges(n, np.column_stack([iu[keep], ju[keep]]))


def gen_ba(n: int, m: int, seed=None) -> Graph:
    """Barabasi-Albert preferential attachment.

    The core is ``m`` isolated nodes.  Node ``m`` links to all of them; every
    later node links to ``m`` distinct earlier nodes drawn with probability
    proportional to degree.  The result has exactly ``m * (n - m)`` edges.
    """
    if not 1 <= m < n:
        raise ValueError("require 1 <= m < n")
    rng = _rng(seed)
    edges = np.empty((m * (n - m), 2), dtype=np.int64)
    # each node appears once per incident edge, so a uniform draw is degree-biased
    stubs = np.empty(2 * m * (n - m), dtype=np.int64)
    nstubs = 0
    e = 0
    for v in range(m, n):
        if v == m:
            targets = list(range(m))
        else:
            chosen: set[int] = set()
            targets = []
            while len(targets) < m:
                t = int(stubs[rng.integers(nstubs)])
                if t not in chosen:
                    chosen.add(t)
                    targets.append(t)
        for t in targets:
            edges[e] = (t, v)
            e += 1
            stubs[nstubs] = t
            stubs[nstubs + 1] = v
            nstubs += 2
    return Graph.from_edges(n, edges)


def gen_ws(n: int, k: int, p: float, seed=None) -> Graph:
    """Watts-Strogatz small world.

    Start from a ring where node ``i`` links to ``i+1..i+k/2``; each such edge
    has its far endpoint moved, with probability ``p``, to a uniformly chosen
    node that is neither ``i`` nor already adjacent to ``i``.
    """
    if k % 2 or k < 0:
        raise ValueError("k must be a non-negative even integer")
    if k >= n:
        raise ValueError("require k < n")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = _rng(seed)
    adj = [set() for _ in range(n)]
    half = k // 2
    for i in range(n):
        for j in range(1, half + 1):
            w = (i + j) % n
            adj[i].add(w)
            adj[w].add(i)
    for j in range(1, half + 1):
        for i in range(n):
            w = (i + j) % n
            if w not in adj[i] or rng.random() >= p:
                continue
            if len(adj[i]) >= n - 1:
                continue
            new = int(rng.integers(n))
            while new == i or new in adj[i]:
                new = int(rng.integers(n))
            adj[i].discard(w)
            adj[w].discard(i)
            adj[i].add(new)
            adj[new].add(i)
    edges = [(i, w) for i in range(n) for w in adj[i] if i < w]
    return Graph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2))


@dataclass(frozen=True)
class GenSpec:
    """Parameters for one synthetic network."""

    model: str
    n: int
    ba_m: int = 3
    er_p: float = 0.1
    ws_k: int = 10
    ws_p: float = 0.1
    seed: int = 0

    def __post_init__(self):
        model = self.model.upper()
        object.__setattr__(self, "model", model)
        if model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if model == "BA" and not 1 <= self.ba_m < self.n:
            raise ValueError("BA requires 1 <= ba_m < n")
        if model == "WS" and (self.ws_k % 2 or self.ws_k >= self.n):
            raise ValueError("WS requires even ws_k < n")
        if model == "ER" and not 0.0 <= self.er_p <= 1.0:
            raise ValueError("ER requires 0 <= er_p <= 1")

    @property
    def name(self) -> str:
        if self.model == "BA":
            return f"BA(n={self.n},m={self.ba_m})"
        if self.model == "ER":
            return f"ER(n={self.n},p={self.er_p:g})"
        return f"WS(n={self.n},k={self.ws_k},p={self.ws_p:g})"


def generate(spec: GenSpec, require_connected: bool = False) -> Graph:
    """Generate the network described by ``spec``.

    With ``require_connected`` an ER/WS draw that comes out disconnected is
    regenerated from the seed stream ``(seed, attempt)``, up to 100 times.
    BA graphs are connected by construction.
    """
    def draw(seed):
        if spec.model == "BA":
            return gen_ba(spec.n, spec.ba_m, seed)
        if spec.model == "ER":
            return gen_er(spec.n, spec.er_p, seed)
        return gen_ws(spec.n, spec.ws_k, spec.ws_p, seed)

    g = draw(spec.seed)
    if not require_connected or spec.model == "BA" or g.is_connected():
        return g
    for attempt in range(1, MAX_CONNECT_RETRIES + 1):
        g = draw(np.random.SeedSequence([spec.seed, attempt]))
        if g.is_connected():
            return g
    raise RuntimeError(f"{spec.name}: no connected draw in {MAX_CONNECT_RETRIES} retries")
