"""scikit-learn style wrappers around the selection strategies.

A pinning selector is fitted on a graph and then behaves like a feature
selector over nodes: ``get_support()`` is the pinned-node mask and
``transform`` keeps the pinned columns of an ``(n_samples, n_nodes)`` array,
e.g. node state snapshots.

>>> from pinsync import PerturbationPinning, gen_ba
>>> sel = PerturbationPinning(n_pins=0.1).fit(gen_ba(200, 3, seed=0))
>>> sel.pinned_nodes_.shape
(20,)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted

from .graph import grounded_view
from .spectral import DEFAULT_TOL, smallest_eigenpair
from .strategies import (
    select_betweenness,
    select_bfg,
    select_degree,
    select_pbo,
)
from .validation import check_budget, check_graph


class PinningSelector(SelectorMixin, BaseEstimator):
    """Base class; subclasses set ``_strategy`` and implement ``_select``.

    Parameters
    ----------
    n_pins : int or float, default=0.1
        Number of nodes to pin, or a fraction of the node count.
    tol : float, default=5e-11
        Residual tolerance of every eigensolve.

    Attributes
    ----------
    pins_ : PinSet
    trace_ : SelectionTrace
    pinned_nodes_ : ndarray of int, in selection order
    pinned_labels_ : list of str
    lambda1_ : float
        Grounded ``lambda1`` after all pins are placed.
    lambda_curve_ : ndarray of shape (n_pins_,)
    n_features_in_ : int
        Node count of the fitted graph.
    """

    _strategy = None

    def __init__(self, n_pins=0.1, tol=DEFAULT_TOL):
        self.n_pins = n_pins
        self.tol = tol

    def _select(self, g, k):
        raise NotImplementedError

    def fit(self, X, y=None):
        g = check_graph(X)
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        k = check_budget(self.n_pins, g.n)
        pins, trace = self._select(g, k)
        self.graph_ = g
        self.pins_ = pins
        self.trace_ = trace
        self.n_pins_ = k
        self.n_features_in_ = g.n
        self.pinned_nodes_ = np.asarray(pins.members, dtype=np.int64)
        self.pinned_labels_ = [g.labels[v] for v in pins.members]
        self.lambda_curve_ = trace.lambdas
        self.lambda1_ = float(trace.lambdas[-1])
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "pins_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.pinned_nodes_] = True
        return mask

    def score(self, X=None, y=None):
        """Grounded ``lambda1`` of the fitted pins, on ``X`` or the fitted graph."""
        check_is_fitted(self, "pins_")
        g = self.graph_ if X is None else check_graph(X)
        if g.n != self.n_features_in_:
            raise ValueError(f"graph has {g.n} nodes, selector was fitted on {self.n_features_in_}")
        return smallest_eigenpair(grounded_view(g, self.pins_), tol=self.tol).lambda1

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.two_d_array = False
        tags.requires_fit = True
        return tags


class DegreePinning(PinningSelector):
    """Pin the highest-degree nodes."""

    _strategy = "degree"

    def _select(self, g, k):
        return select_degree(g, k, tol=self.tol)


class BetweennessPinning(PinningSelector):
    """Pin the nodes of highest shortest-path betweenness."""

    _strategy = "betweenness"

    def _select(self, g, k):
        return select_betweenness(g, k, tol=self.tol)


class GreedyPinning(PinningSelector):
    """Brute-force greedy maximisation of the grounded ``lambda1``.

    Parameters
    ----------
    method : {"secular", "iterative"}, default="secular"
        How each candidate's ``lambda1`` is evaluated.
    """

    _strategy = "bfg"

    def __init__(self, n_pins=0.1, tol=DEFAULT_TOL, method="secular"):
        super().__init__(n_pins=n_pins, tol=tol)
        self.method = method

    def _select(self, g, k):
        return select_bfg(g, k, tol=self.tol, method=self.method)


class PerturbationPinning(PinningSelector):
    """Greedy selection by the first-order perturbation index (PBO)."""

    _strategy = "pbo"

    def _select(self, g, k):
        return select_pbo(g, k, tol=self.tol)


SELECTOR_CLASSES = {
    "degree": DegreePinning,
    "betweenness": BetweennessPinning,
    "bfg": GreedyPinning,
    "pbo": PerturbationPinning,
}


def make_selector(strategy: str, **params) -> PinningSelector:
    try:
        cls = SELECTOR_CLASSES[strategy.lower()]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}") from None
    return cls(**params)
