"""Pin-failure experiments.

A failed pin stops receiving feedback, so it rejoins the unpinned block of
the grounded Laplacian; the effective ``lambda1`` is computed on the
survivors only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import FailureMask
from .graph import Graph, as_pinset, grounded_view
from .spectral import DEFAULT_TOL, smallest_eigenpair
from .strategies import select


def failure_count(ratio: float, n_pins: int) -> int:
    """``round(ratio * n_pins)`` with halves rounded up."""
    return int(math.floor(ratio * n_pins + 0.5))


def apply_failures(pins, ratio: float, seed=None) -> FailureMask:
    """Mark ``round(ratio * |pins|)`` uniformly chosen pins as failed."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("failure ratio must lie in [0, 1]")
    pins = as_pinset(pins)
    n = len(pins)
    count = failure_count(ratio, n)
    rng = np.random.default_rng(seed)
    beta = np.zeros(n, dtype=int)
    if count:
        beta[rng.choice(n, size=count, replace=False)] = 1
    return FailureMask(tuple(beta.tolist()))


def effective_lambda1(g: Graph, pins, mask: FailureMask, tol: float = DEFAULT_TOL,
                      x0: np.ndarray | None = None) -> float:
    """Grounded ``lambda1`` with only the surviving pins removed."""
    alive = mask.survivors(pins)
    return smallest_eigenpair(grounded_view(g, alive), tol=tol, x0=x0).lambda1


@dataclass(frozen=True)
class CurveRow:
    k: int
    failure_ratio: float
    lambda1_mean: float
    lambda1_std: float
    trials: int

    @property
    def stderr(self) -> float:
        return self.lambda1_std / math.sqrt(self.trials)


@dataclass(frozen=True)
class RobustnessCurve:
    strategy: str
    rows: tuple[CurveRow, ...]

    def at(self, k: int, ratio: float) -> CurveRow:
        for row in self.rows:
            if row.k == k and math.isclose(row.failure_ratio, ratio):
                return row
        raise KeyError((k, ratio))

    def csv_rows(self):
        for r in self.rows:
            yield (self.strategy, r.k, r.failure_ratio, r.lambda1_mean, r.lambda1_std, r.trials)


def trial_seed(seed: int, k: int, ratio: float, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(k), int(round(ratio * 1_000_000)), int(trial)])


def robustness_curve(g: Graph, strategy: str, k_list: Sequence[int],
                     ratios: float | Sequence[float], trials: int = 30, seed: int = 0,
                     tol: float = DEFAULT_TOL, pins=None) -> RobustnessCurve:
    """Mean and std of the effective ``lambda1`` over random failure draws.

    The strategy runs once with budget ``max(k_list)``; smaller budgets use
    the prefix of that selection.  Pass ``pins`` to reuse a selection.
    Standard deviations are population values (``ddof=0``).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ratios = [float(ratios)] if np.isscalar(ratios) else [float(r) for r in ratios]
    ks = sorted({int(k) for k in k_list})
    if pins is None:
        pins, _ = select(g, strategy, ks[-1], tol=tol)
    pins = as_pinset(pins)
    if len(pins) < ks[-1]:
        raise ValueError("supplied pin set is shorter than the largest k")
    rows = []
    for k in ks:
        prefix = pins.prefix(k)
        base = smallest_eigenpair(grounded_view(g, prefix), tol=tol)
        x0 = base.full(g.n)
        for ratio in ratios:
            if failure_count(ratio, k) == 0:
                vals = np.full(trials, base.lambda1)
            else:
                vals = np.array([
                    effective_lambda1(g, prefix, apply_failures(prefix, ratio, trial_seed(seed, k, ratio, t)),
                                      tol=tol, x0=x0)
                    for t in range(trials)
                ])
            rows.append(CurveRow(k, ratio, float(vals.mean()), float(vals.std()), trials))
    return RobustnessCurve(strategy, tuple(rows))
