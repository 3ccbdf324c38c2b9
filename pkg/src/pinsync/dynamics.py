"""Pinned coupled-oscillator simulation and convergence-rate measurement.

Node dynamics are Chen oscillators with identity inner coupling.  The target
state is the origin, an equilibrium of both Chen variants, so the error of a
node is simply the norm of its state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .graph import Graph, PinSet, as_pinset, grounded_view
from .spectral import matrix_smallest_eigenpair, smallest_eigenpair

TIMEOUT = math.inf
BLOWUP = 1e9
CHEN_VARIANTS = ("standard", "paper_literal")


class DivergenceError(RuntimeError):
    """State magnitude exceeded the blow-up threshold."""

    def __init__(self, time: float):
        super().__init__(f"trajectory diverged at t={time:.6g}")
        self.time = time


@dataclass(frozen=True)
class DynamicsConfig:
    c: float = 5.0
    gain: float = 30.0
    chen: tuple[float, float, float] = (35.0, 3.0, 28.0)
    chen_variant: str = "standard"
    dt: float = 1e-3
    t_max: float = 5.0
    eps: float = 1e-3
    init_box: float = 1.0
    seed: int = 0
    sample_every: int = 0

    def __post_init__(self):
        if self.c <= 0 or self.gain <= 0 or self.dt <= 0 or self.eps <= 0:
            raise ValueError("c, gain, dt and eps must be positive")
        if self.t_max <= self.dt:
            raise ValueError("t_max must exceed dt")
        if self.chen_variant not in CHEN_VARIANTS:
            raise ValueError(f"chen_variant must be one of {CHEN_VARIANTS}")
        object.__setattr__(self, "chen", tuple(float(p) for p in self.chen))


@dataclass(frozen=True)
class FailureMask:
    """``beta[j] == 1`` marks the j-th pinned node (selection order) as failed."""

    beta: tuple[int, ...]

    def __post_init__(self):
        beta = tuple(int(b) for b in self.beta)
        if any(b not in (0, 1) for b in beta):
            raise ValueError("beta entries must be 0 or 1")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def none(cls, pins) -> "FailureMask":
        return cls((0,) * len(as_pinset(pins)))

    @property
    def n_failed(self) -> int:
        return sum(self.beta)

    def survivors(self, pins) -> PinSet:
        pins = as_pinset(pins)
        if len(pins) != len(self.beta):
            raise ValueError("failure mask length does not match pin set")
        alive = tuple(v for v, b in zip(pins.members, self.beta) if not b)
        return PinSet(alive, pins.origin)


@dataclass(frozen=True)
class TrajectorySummary:
    sync_time: float
    final_error: float
    errors: np.ndarray = field(repr=False)
    samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def timed_out(self) -> bool:
        return math.isinf(self.sync_time)


def chen_rhs(state, params=(35.0, 3.0, 28.0), variant: str = "standard") -> np.ndarray:
    """Chen vector field; ``state`` has shape ``(3,)`` or ``(n, 3)``.

    ``paper_literal`` keeps the second component exactly as printed,
    ``(p3 - p2) x2 - x1 x3 + p3 x2``; ``standard`` uses ``(p3 - p1) x1``.
    """
    p1, p2, p3 = params
    s = np.asarray(state, dtype=np.float64)
    x1, x2, x3 = s[..., 0], s[..., 1], s[..., 2]
    out = np.empty_like(s)
    out[..., 0] = p1 * (x2 - x1)
    if variant == "standard":
        out[..., 1] = (p3 - p1) * x1 - x1 * x3 + p3 * x2
    elif variant == "paper_literal":
        out[..., 1] = (p3 - p2) * x2 - x1 * x3 + p3 * x2
    else:
        raise ValueError(f"unknown Chen variant {variant!r}")
    out[..., 2] = x1 * x2 - p2 * x3
    return out


def chen_jacobian(state=(0.0, 0.0, 0.0), params=(35.0, 3.0, 28.0), variant: str = "standard") -> np.ndarray:
    p1, p2, p3 = params
    x1, x2, x3 = (float(v) for v in state)
    if variant == "standard":
        row2 = [p3 - p1 - x3, p3, -x1]
    elif variant == "paper_literal":
        row2 = [-x3, 2.0 * p3 - p2, -x1]
    else:
        raise ValueError(f"unknown Chen variant {variant!r}")
    return np.array([[-p1, p1, 0.0], row2, [x2, x1, -p2]])


def instability_rate(params=(35.0, 3.0, 28.0), variant: str = "standard") -> float:
    """Largest real part of the Jacobian spectrum at the origin.

    Near the origin a mode of the pinned operator with eigenvalue ``mu``
    decays iff ``c * mu`` exceeds this rate.
    """
    return float(np.linalg.eigvals(chen_jacobian((0, 0, 0), params, variant)).real.max())


def pinned_lambda1(g: Graph, pins, gain: float, mask: FailureMask | None = None) -> float:
    """Smallest eigenvalue of ``L + gain * D`` over the surviving pins."""
    pins = as_pinset(pins)
    pins.validate(g.n)
    return matrix_smallest_eigenpair(_coupling_operator(g, pins, mask, 1.0, gain))[0]


def calibrate_coupling(g: Graph, pin_sets, cfg: DynamicsConfig, margin: float = 1.5,
                       courant: float = 2.0) -> DynamicsConfig:
    """Return ``cfg`` with ``c = margin * rate / min lambda1(L + gain D)``.

    With ``margin > 1`` every pin set in ``pin_sets`` stabilises the origin,
    the weakest one at decay rate ``(margin - 1) * rate``.  ``dt`` is capped
    at ``courant / (c * (2 max_degree + gain))``, a Gershgorin bound on the
    stiffest coupling mode (RK4 is stable up to about 2.78).
    """
    if margin <= 1:
        raise ValueError("margin must exceed 1")
    lams = [pinned_lambda1(g, p, cfg.gain) for p in pin_sets]
    if not lams or min(lams) <= 0:
        raise ValueError("every pin set must ground the network")
    c = margin * instability_rate(cfg.chen, cfg.chen_variant) / min(lams)
    dt = min(cfg.dt, courant / (c * (2.0 * float(g.degrees.max()) + cfg.gain)))
    return replace(cfg, c=c, dt=dt)


def _coupling_operator(g: Graph, pins: PinSet, mask: FailureMask | None, c: float, gain: float):
    d = np.zeros(g.n)
    alive = mask.survivors(pins) if mask is not None else pins
    d[list(alive.members)] = gain
    return (c * (g.laplacian + sp.diags(d))).tocsr()


def initial_state(n: int, cfg: DynamicsConfig) -> np.ndarray:
    rng = np.random.default_rng(cfg.seed)
    return rng.uniform(-cfg.init_box, cfg.init_box, size=(n, 3))


def sustained_sync_time(errors: np.ndarray, dt: float, eps: float) -> float:
    """First time after which ``errors`` stays below ``eps`` to the end."""
    above = np.flatnonzero(errors >= eps)
    if above.size == 0:
        return 0.0
    last = int(above[-1])
    if last == errors.size - 1:
        return TIMEOUT
    return (last + 1) * dt


def simulate(g: Graph, pins, cfg: DynamicsConfig = DynamicsConfig(),
             mask: FailureMask | None = None, x0: np.ndarray | None = None) -> TrajectorySummary:
    """Integrate the pinned network with fixed-step RK4.

    Node ``i`` obeys ``x_i' = F(x_i) - c sum_j L_ij x_j - c d_i (1 - beta_i) x_i``
    with ``d_i = cfg.gain`` on pinned nodes and zero elsewhere.
    """
    pins = as_pinset(pins)
    pins.validate(g.n)
    if len(pins) == 0:
        raise ValueError("simulate needs at least one pinned node")
    if mask is not None and len(mask.beta) != len(pins):
        raise ValueError("failure mask length does not match pin set")
    op = _coupling_operator(g, pins, mask, cfg.c, cfg.gain)
    params, variant = cfg.chen, cfg.chen_variant

    def rhs(x):
        return chen_rhs(x, params, variant) - op @ x

    x = initial_state(g.n, cfg) if x0 is None else np.array(x0, dtype=np.float64)
    steps = int(round(cfg.t_max / cfg.dt))
    h = cfg.dt
    errors = np.empty(steps + 1)
    errors[0] = np.sqrt((x * x).sum(axis=1)).max()
    every = cfg.sample_every
    samples = [np.sqrt((x * x).sum(axis=1))] if every else None
    for step in range(1, steps + 1):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norms = np.sqrt((x * x).sum(axis=1))
        top = norms.max()
        if not np.isfinite(top) or top > BLOWUP:
            raise DivergenceError(step * h)
        errors[step] = top
        if every and step % every == 0:
            samples.append(norms)
    return TrajectorySummary(
        sustained_sync_time(errors, h, cfg.eps),
        float(errors[-1]),
        errors,
        np.array(samples) if every else None,
    )


def measure_decay_rate(g: Graph, pins, c: float, u_init: np.ndarray,
                       n_points: int = 200, return_series: bool = False):
    """Fit the exponential decay rate of ``||xi||^2`` under ``xi' = -c L_hat xi``.

    ``u_init`` is indexed like the grounded view of ``pins`` (unpinned nodes,
    ascending).  Pinned states stay at zero.  The fit window is
    ``[0, 3 / (2 c rho)]`` with ``rho`` the Rayleigh quotient of ``u_init``;
    for the slowest mode this is ``3 / (2 c lambda1)``.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    view = grounded_view(g, pins)
    lam1 = smallest_eigenpair(view).lambda1
    if lam1 <= 0:
        raise ValueError("grounded lambda1 is zero: some unpinned component is not pinned")
    a = view.matrix
    xi = np.asarray(u_init, dtype=np.float64).copy()
    if xi.shape != (view.dim,):
        raise ValueError(f"u_init must have length {view.dim}")
    rho = float(xi @ (a @ xi)) / float(xi @ xi)
    t_end = 3.0 / (2.0 * c * rho)
    lam_bound = 2.0 * float(view.diagonal.max())
    h = min(0.05 / (c * lam_bound), t_end / n_points)
    per_point = max(1, int(math.ceil(t_end / n_points / h)))
    h = t_end / (n_points * per_point)

    def rhs(v):
        return -c * (a @ v)

    times = [0.0]
    w = [float(xi @ xi)]
    for j in range(1, n_points + 1):
        for _ in range(per_point):
            k1 = rhs(xi)
            k2 = rhs(xi + 0.5 * h * k1)
            k3 = rhs(xi + 0.5 * h * k2)
            k4 = rhs(xi + h * k3)
            xi = xi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        times.append(j * per_point * h)
        w.append(float(xi @ xi))
    t = np.array(times)
    logw = np.log(np.array(w))
    slope = np.polyfit(t, logw, 1)[0]
    if return_series:
        return -slope, t, np.array(w)
    return -slope
