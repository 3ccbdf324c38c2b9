"""Pinning-node selection strategies.

All four strategies share the same contract: ``select_*(g, k)`` returns the
ordered :class:`~pinsync.graph.PinSet` and a :class:`SelectionTrace` with the
grounded ``lambda1`` after every added pin.  Ties are broken toward the
smallest node index everywhere.
"""

from __future__ import annotations

import functools
import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import Graph, PinSet, grounded_view
from .spectral import (
    DEFAULT_TOL,
    SpectralPair,
    deletion_lambda1s,
    dense_grounded_matrix,
    smallest_eigenpair,
)

STRATEGIES = ("degree", "betweenness", "bfg", "pbo")
# absolute tie window, scaled by max(1, |best score|)
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Step:
    node: int
    lambda1: float
    score: float
    elapsed: float


@dataclass(frozen=True)
class SelectionTrace:
    """Per-step record of a selection run."""

    strategy: str
    k: int
    steps: tuple[Step, ...]

    @property
    def nodes(self) -> list[int]:
        return [s.node for s in self.steps]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([s.lambda1 for s in self.steps])

    @property
    def total_time(self) -> float:
        return float(sum(s.elapsed for s in self.steps))

    def prefix(self, k: int) -> "SelectionTrace":
        return SelectionTrace(self.strategy, k, self.steps[:k])

    def rows(self, labels=None):
        """CSV rows ``strategy,step,node_label,lambda1,score,elapsed_ms``."""
        for j, s in enumerate(self.steps, start=1):
            label = labels[s.node] if labels is not None else s.node
            yield (self.strategy, j, label, s.lambda1, s.score, s.elapsed * 1e3)


def check_trace(g: Graph, trace: SelectionTrace, rtol: float = 1e-9, prepinned=None) -> list[str]:
    """Interlacing audit of a trace.

    Returns human-readable violations: a decrease of ``lambda1`` between
    consecutive steps, or ``lambda1`` above the smallest full-graph degree
    among nodes still unpinned.  Steps without a recorded ``lambda1`` (NaN)
    are skipped.
    """
    problems = []
    pinned = np.zeros(g.n, dtype=bool)
    if prepinned is not None:
        pinned[list(prepinned.members)] = True
    prev = 0.0
    for j, s in enumerate(trace.steps, start=1):
        pinned[s.node] = True
        slack = rtol * max(1.0, abs(s.lambda1))
        if s.lambda1 < prev - slack:
            problems.append(f"step {j}: lambda1 decreased {prev!r} -> {s.lambda1!r}")
        if (~pinned).any():
            dmin = g.degrees[~pinned].min()
            if s.lambda1 > dmin + slack:
                problems.append(f"step {j}: lambda1 {s.lambda1!r} above min unpinned degree {dmin}")
        prev = s.lambda1
    return problems


_observers: list[Callable] = []


def add_trace_observer(fn: Callable) -> Callable:
    """Call ``fn(g, pins, trace, prepinned)`` after every selection run.

    ``prepinned`` is the PinSet a selection was seeded with, or ``None``.
    Returns ``fn`` so it can be passed to :func:`remove_trace_observer`.
    """
    _observers.append(fn)
    return fn


def remove_trace_observer(fn: Callable) -> None:
    _observers.remove(fn)


def _observed(select_fn):
    @functools.wraps(select_fn)
    def run(g, k, **kwargs):
        pins, trace = select_fn(g, k, **kwargs)
        for fn in tuple(_observers):
            fn(g, pins, trace, kwargs.get("pins"))
        return pins, trace
    return run


def _check_budget(g: Graph, k: int) -> int:
    if isinstance(k, bool) or int(k) != k:
        raise TypeError("k must be an integer pin count")
    k = int(k)
    if not 1 <= k < g.n:
        raise ValueError(f"pin budget k={k} must satisfy 1 <= k < N={g.n}")
    return k


def argmax_first(scores: np.ndarray) -> int:
    """Index of the maximum, preferring the smallest index within the tie window."""
    best = scores.max()
    window = TIE_RTOL * max(1.0, abs(float(best)))
    return int(np.flatnonzero(scores >= best - window)[0])


def _static_trace(g: Graph, name: str, order: np.ndarray, scores: np.ndarray,
                  k: int, elapsed: float, tol: float, with_lambda: bool):
    members = [int(v) for v in order[:k]]
    steps = []
    x0 = None
    for j, v in enumerate(members, start=1):
        lam = np.nan
        if with_lambda:
            pair = smallest_eigenpair(grounded_view(g, members[:j]), tol=tol, x0=x0)
            lam, x0 = pair.lambda1, pair.full(g.n)
        steps.append(Step(v, float(lam), float(scores[v]), elapsed / k))
    return PinSet(tuple(members), name), SelectionTrace(name, k, tuple(steps))


def top_k(scores: np.ndarray, k: int, decimals: int | None = None) -> np.ndarray:
    """Indices of the k largest scores, ties by smallest index."""
    key = np.round(scores, decimals) if decimals is not None else scores
    order = np.lexsort((np.arange(scores.size), -key))
    return order[:k]


@_observed
def select_degree(g: Graph, k: int, *, tol: float = DEFAULT_TOL, trace: bool = True):
    """Pin the ``k`` highest-degree nodes."""
    k = _check_budget(g, k)
    t0 = time.perf_counter()
    order = top_k(g.degrees, k)
    elapsed = time.perf_counter() - t0
    return _static_trace(g, "degree", order, g.degrees.astype(float), k, elapsed, tol, trace)


def betweenness(g: Graph, chunk: int | None = None) -> np.ndarray:
    """Unnormalised shortest-path betweenness of every node.

    Brandes' accumulation, run for a block of sources at once: forward BFS
    levels count shortest paths, then dependencies are pushed back level by
    level.  Each pair is counted once (undirected).
    """
    n = g.n
    a = g.adjacency
    if chunk is None:
        chunk = max(1, min(n, 4_000_000 // max(n, 1)))
    bc = np.zeros(n)
    for start in range(0, n, chunk):
        src = np.arange(start, min(n, start + chunk))
        b = src.size
        rows = np.arange(b)
        dist = np.full((b, n), -1, dtype=np.int32)
        sigma = np.zeros((b, n))
        dist[rows, src] = 0
        sigma[rows, src] = 1.0
        frontier = np.zeros((b, n))
        frontier[rows, src] = 1.0
        depth = 0
        while True:
            reach = (a @ frontier.T).T
            new = (reach > 0) & (dist < 0)
            if not new.any():
                break
            depth += 1
            dist[new] = depth
            sigma[new] = reach[new]
            frontier = np.where(new, sigma, 0.0)
        delta = np.zeros((b, n))
        for d in range(depth, 1, -1):
            at_d = dist == d
            coeff = np.where(at_d, (1.0 + delta) / np.where(at_d, sigma, 1.0), 0.0)
            push = (a @ coeff.T).T
            at_prev = dist == d - 1
            delta += np.where(at_prev, sigma * push, 0.0)
        bc += delta.sum(axis=0)
    return bc / 2.0


@_observed
def select_betweenness(g: Graph, k: int, *, tol: float = DEFAULT_TOL, trace: bool = True):
    """Pin the ``k`` nodes of highest (static) betweenness centrality."""
    k = _check_budget(g, k)
    t0 = time.perf_counter()
    bc = betweenness(g)
    order = top_k(bc, k, decimals=8)
    elapsed = time.perf_counter() - t0
    return _static_trace(g, "betweenness", order, bc, k, elapsed, tol, trace)


def _bfg_scores_iterative(g, members, pair, tol):
    view = grounded_view(g, members)
    x0 = pair.full(g.n) if pair is not None else None
    out = np.empty(view.dim)
    for t, v in enumerate(view.unpinned):
        if view.dim == 1:
            out[t] = np.inf
            continue
        out[t] = smallest_eigenpair(grounded_view(g, members + [int(v)]),
                                    tol=tol, x0=x0).lambda1
    return view, out


@_observed
def select_bfg(g: Graph, k: int, *, tol: float = DEFAULT_TOL, method: str = "secular",
               trace: bool = True):
    """Brute-force greedy: each step pins the node whose removal maximises lambda1.

    ``method="secular"`` evaluates every candidate exactly from one dense
    eigendecomposition per step; ``method="iterative"`` runs a warm-started
    sparse eigensolve per candidate.
    """
    k = _check_budget(g, k)
    if method not in ("secular", "iterative"):
        raise ValueError(f"unknown BFG method {method!r}")
    members: list[int] = []
    steps = []
    pair = None
    for _ in range(k):
        t0 = time.perf_counter()
        if method == "secular":
            view = grounded_view(g, members)
            scores = deletion_lambda1s(view)
        else:
            view, scores = _bfg_scores_iterative(g, members, pair, tol)
        best = argmax_first(scores)
        v = int(view.unpinned[best])
        elapsed = time.perf_counter() - t0
        members.append(v)
        if method == "iterative":
            pair = smallest_eigenpair(grounded_view(g, members), tol=tol,
                                      x0=pair.full(g.n) if pair is not None else None)
        steps.append(Step(v, float(scores[best]), float(scores[best]), elapsed))
    return PinSet(tuple(members), "bfg"), SelectionTrace("bfg", k, tuple(steps))


def perturbation_scores(view, pair: SpectralPair) -> np.ndarray:
    """First-order lambda1 gain from pinning each unpinned node.

    ``u_i**2 * (d_i - 2 * lambda1)`` with ``d_i`` the full-graph degree,
    aligned with ``view.unpinned``.
    """
    return pair.u ** 2 * (view.diagonal - 2.0 * pair.lambda1)


@_observed
def select_pbo(g: Graph, k: int, *, tol: float = DEFAULT_TOL, trace: bool = True,
               pins: PinSet | None = None):
    """Perturbation-based greedy selection.

    One eigensolve per step on the current grounded view, then every
    candidate is scored by :func:`perturbation_scores` and the argmax is
    pinned.  ``pins`` seeds the selection with already-pinned nodes.
    """
    k = _check_budget(g, k)
    members = list(pins.members) if pins is not None else []
    if len(members) + k >= g.n:
        raise ValueError("pin budget exhausts the graph")
    steps = []
    x0 = None
    pair = None
    for _ in range(k):
        t0 = time.perf_counter()
        view = grounded_view(g, members)
        pair = smallest_eigenpair(view, tol=tol, x0=x0)
        scores = perturbation_scores(view, pair)
        best = argmax_first(scores)
        v = int(view.unpinned[best])
        elapsed = time.perf_counter() - t0
        if steps:
            steps[-1] = Step(steps[-1].node, pair.lambda1, steps[-1].score, steps[-1].elapsed)
        members.append(v)
        x0 = pair.full(g.n)
        steps.append(Step(v, np.nan, float(scores[best]), elapsed))
    if trace:
        last = smallest_eigenpair(grounded_view(g, members), tol=tol, x0=x0)
        steps[-1] = Step(steps[-1].node, last.lambda1, steps[-1].score, steps[-1].elapsed)
    return PinSet(tuple(members), "pbo"), SelectionTrace("pbo", k, tuple(steps))


SELECTORS: dict[str, Callable] = {
    "degree": select_degree,
    "betweenness": select_betweenness,
    "bfg": select_bfg,
    "pbo": select_pbo,
}


def select(g: Graph, strategy: str, k: int, **kwargs):
    try:
        fn = SELECTORS[strategy.lower()]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}") from None
    return fn(g, k, **kwargs)


def exhaustive_oracle(g: Graph, k: int, cap: int = 10**6):
    """Best ``k``-subset by lambda1, by full enumeration.

    Lexicographically smallest subset wins ties.  Returns ``(PinSet, lambda1)``.
    """
    k = _check_budget(g, k)
    if math.comb(g.n, k) > cap:
        raise ValueError(f"C({g.n}, {k}) exceeds enumeration cap {cap}")
    full = dense_grounded_matrix(g, np.arange(g.n))
    everyone = np.arange(g.n)
    best_val, best_set = -np.inf, None
    for combo in itertools.combinations(range(g.n), k):
        keep = np.setdiff1d(everyone, combo, assume_unique=True)
        val = float(np.linalg.eigvalsh(full[np.ix_(keep, keep)])[0])
        if best_set is None or val > best_val + TIE_RTOL * max(1.0, abs(best_val)):
            best_val, best_set = val, combo
    return PinSet(best_set, "exhaustive"), best_val
