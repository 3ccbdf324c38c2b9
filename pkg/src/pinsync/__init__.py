"""Pinning-node selection for network synchronization.

Grounded-Laplacian spectra, four selection strategies (degree, betweenness,
brute-force greedy and perturbation-based greedy), pinned Chen-oscillator
simulation and pin-failure experiments.
"""

__version__ = "0.1.0"

from .dynamics import (
    DynamicsConfig,
    FailureMask,
    TrajectorySummary,
    calibrate_coupling,
    chen_rhs,
    measure_decay_rate,
    simulate,
)
from .estimators import (
    BetweennessPinning,
    DegreePinning,
    GreedyPinning,
    PerturbationPinning,
    make_selector,
)
from .generators import GenSpec, gen_ba, gen_er, gen_ws, generate
from .graph import (
    EdgeListError,
    Graph,
    GroundedView,
    PinSet,
    grounded_view,
    load_edge_list,
    parse_edge_list,
    write_edge_list,
)
from .robustness import RobustnessCurve, apply_failures, effective_lambda1, robustness_curve
from .spectral import ConvergenceError, SpectralPair, dense_spectrum_oracle, smallest_eigenpair
from .strategies import SelectionTrace, exhaustive_oracle, select

__all__ = [
    "BetweennessPinning", "ConvergenceError", "DegreePinning", "DynamicsConfig", "EdgeListError",
    "FailureMask", "GenSpec", "Graph", "GreedyPinning", "GroundedView", "PerturbationPinning",
    "PinSet", "RobustnessCurve", "SelectionTrace", "SpectralPair", "TrajectorySummary",
    "apply_failures", "calibrate_coupling", "chen_rhs", "dense_spectrum_oracle",
    "effective_lambda1", "exhaustive_oracle", "gen_ba", "gen_er", "gen_ws", "generate",
    "grounded_view", "load_edge_list", "make_selector", "measure_decay_rate", "parse_edge_list",
    "robustness_curve", "select", "simulate", "smallest_eigenpair", "write_edge_list",
]
