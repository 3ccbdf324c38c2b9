"""Smallest eigenpair of grounded Laplacians.

The iterative solver works component by component on the unpinned subgraph.
Components with no edge into the pinned set carry the Laplacian null vector,
so they are detected structurally and reported with ``lambda1 == 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, GroundedView, components_from_mask

# half the 1e-10 residual target, so a recomputed residual stays under it
DEFAULT_TOL = 5e-11
DENSE_CAP = 2000
# relative gap below which two eigenvalues are treated as one cluster
CLUSTER_RTOL = 1e-11


class ConvergenceError(RuntimeError):
    """Iterative eigensolve did not reach the requested residual."""

    def __init__(self, message, lambda1, u, residual, iterations):
        super().__init__(message)
        self.lambda1 = lambda1
        self.u = u
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SpectralPair:
    """Smallest eigenpair of a grounded view.

    ``u`` is indexed like ``nodes`` (the view's unpinned parent indices).
    """

    lambda1: float
    u: np.ndarray
    residual: float
    iterations: int
    nodes: np.ndarray

    def full(self, n: int | None = None) -> np.ndarray:
        """Eigenvector scattered onto all parent nodes, zero on pinned ones."""
        n = int(self.nodes.max()) + 1 if n is None else n
        out = np.zeros(n)
        out[self.nodes] = self.u
        return out


def orient(u: np.ndarray) -> np.ndarray:
    """Apply the sign convention: positive sum, else first nonzero positive."""
    s = u.sum()
    scale = 1e-12 * np.sqrt(u.size)
    if s < -scale:
        return -u
    if s > scale:
        return u
    nz = np.flatnonzero(np.abs(u) > 1e-12)
    if nz.size and u[nz[0]] < 0:
        return -u
    return u


def _fresh_residual(a, x) -> float:
    ax = a @ x
    return float(np.linalg.norm(ax - float(x @ ax) * x))


def _lobpcg(a, diag, x, tol, max_iter):
    """Single-vector LOBPCG with Jacobi preconditioning.

    Rayleigh-Ritz runs on an orthonormal basis of span{x, P r, p} with fresh
    products, so no implicit update drifts away from ``a @ x``.
    """
    x = x / np.linalg.norm(x)
    ax = a @ x
    theta = float(x @ ax)
    pinv = 1.0 / diag
    p = None
    res = np.inf
    for it in range(1, max_iter + 1):
        r = ax - theta * x
        res = float(np.linalg.norm(r))
        if res <= tol:
            # confirm on a fresh product before trusting the implicit one
            ax = a @ x
            theta = float(x @ ax)
            r = ax - theta * x
            res = float(np.linalg.norm(r))
            if res <= tol:
                return theta, x, res, it - 1
        cols = [x, pinv * r] if p is None else [x, pinv * r, p]
        q, _ = np.linalg.qr(np.column_stack(cols))
        aq = a @ q
        h = q.T @ aq
        h = 0.5 * (h + h.T)
        evals, evecs = np.linalg.eigh(h)
        y = evecs[:, 0]
        x_new = q @ y
        ax = aq @ y
        # q[:, 0] spans the old iterate; the rest is the search direction
        p = q[:, 1:] @ y[1:]
        pn = np.linalg.norm(p)
        p = p / pn if pn > 1e-300 else None
        nrm = np.linalg.norm(x_new)
        x = x_new / nrm
        ax = ax / nrm
        theta = float(x @ ax)
        if it % 25 == 0:
            ax = a @ x
            theta = float(x @ ax)
    ax = a @ x
    theta = float(x @ ax)
    res = float(np.linalg.norm(ax - theta * x))
    if res <= tol:
        return theta, x, res, max_iter
    raise ConvergenceError(
        f"LOBPCG stalled at residual {res:.3e} after {max_iter} iterations",
        theta, x, res, max_iter)


def _pcg(a, b, diag, shift, rtol, maxiter):
    """Jacobi-preconditioned CG for ``(a - shift I) y = b``."""
    pinv = 1.0 / (diag - shift)
    y = np.zeros_like(b)
    r = b.copy()
    z = pinv * r
    d = z.copy()
    rz = r @ z
    bnorm = np.linalg.norm(b)
    for _ in range(maxiter):
        ad = a @ d - shift * d
        alpha = rz / (d @ ad)
        y += alpha * d
        r -= alpha * ad
        if np.linalg.norm(r) <= rtol * bnorm:
            break
        z = pinv * r
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
    return y


def _inverse_iteration(a, diag, x, tol, max_iter, shift=1e-9, basis=6):
    """Shifted inverse iteration with Rayleigh-Ritz over recent iterates.

    Each step solves ``(a - shift I) y = x`` by PCG.  Projecting onto the
    span of the last few iterates (shift-invert Lanczos, restarted) keeps
    convergence fast when ``lambda1`` and ``lambda2`` nearly coincide, where
    the plain power step would crawl at rate ``lambda1 / lambda2``.
    """
    n = x.size
    q = (x / np.linalg.norm(x))[:, None]
    aq = a @ q
    theta, res = float(q[:, 0] @ aq[:, 0]), np.inf
    for it in range(1, max_iter + 1):
        h = q.T @ aq
        evals, evecs = np.linalg.eigh(0.5 * (h + h.T))
        y = evecs[:, 0]
        x = q @ y
        ax = aq @ y
        nrm = np.linalg.norm(x)
        x, ax = x / nrm, ax / nrm
        theta = float(x @ ax)
        res = float(np.linalg.norm(ax - theta * x))
        if res <= tol:
            res = _fresh_residual(a, x)
            if res <= tol:
                return theta, x, res, it - 1
        z = _pcg(a, x, diag, shift, 1e-14, 10 * n + 50)
        if q.shape[1] >= min(basis, n):
            # restart on the current Ritz vector and its runner-up
            keep = evecs[:, :2] if evecs.shape[1] > 1 and n > 2 else evecs[:, :1]
            q, aq = q @ keep, aq @ keep
        for _ in range(2):
            z = z - q @ (q.T @ z)
        zn = np.linalg.norm(z)
        if zn <= 1e-14 * np.linalg.norm(x) or not np.isfinite(zn):
            # the new direction is already in the basis; refresh products
            aq = a @ q
            continue
        z = z / zn
        q = np.column_stack([q, z])
        aq = np.column_stack([aq, a @ z])
        if it % 25 == 0:
            aq = a @ q
    raise ConvergenceError(
        f"inverse iteration stalled at residual {res:.3e} after {max_iter} iterations",
        theta, x, res, max_iter)


_METHODS = {"lobpcg": _lobpcg, "inverse": _inverse_iteration}


def smallest_eigenpair(view: GroundedView, tol: float = DEFAULT_TOL,
                       max_iter: int | None = None, x0: np.ndarray | None = None,
                       method: str = "lobpcg") -> SpectralPair:
    """Smallest eigenvalue and unit eigenvector of a grounded view.

    Parameters
    ----------
    view : GroundedView
    tol : float
        Target for ``||L u - lambda1 u||_2``.
    max_iter : int, optional
        Iteration cap per component, default ``10 * n``.
    x0 : ndarray, optional
        Warm start indexed by *parent* node (length ``n``); entries of pinned
        nodes are ignored.
    method : {"lobpcg", "inverse"}
        ``inverse`` is shifted inverse iteration with CG inner solves.
    """
    if view.dim == 0:
        raise ValueError("empty grounded view")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(_METHODS)}")
    solver = _METHODS[method]
    g = view.parent
    if max_iter is None:
        max_iter = 10 * g.n
    comps = components_from_mask(g, view.pinned_mask)
    local = view.index_map

    for comp in comps:
        if not comp.touches_pinned:
            u = np.zeros(view.dim)
            u[local[comp.nodes]] = 1.0 / np.sqrt(comp.nodes.size)
            res = float(np.linalg.norm(view.matvec(u)))
            return SpectralPair(0.0, u, res, 0, view.unpinned)

    mat = view.matrix
    best = None
    for comp in comps:
        idx = local[comp.nodes]
        if idx.size == 1:
            lam, vec, res, its = float(g.degrees[comp.nodes[0]]), np.ones(1), 0.0, 0
        else:
            sub = mat[idx][:, idx] if len(comps) > 1 else mat
            diag = g.degrees[comp.nodes].astype(np.float64)
            start = None
            if x0 is not None:
                start = np.abs(np.asarray(x0, dtype=np.float64)[comp.nodes])
                if not np.isfinite(start).all() or start.sum() == 0:
                    start = None
            if start is None:
                start = np.ones(idx.size)
            else:
                # positive floor keeps the start inside the Perron cone
                start = start + 1e-3 * start.max()
            lam, vec, res, its = solver(sub, diag, start, tol, max_iter)
        if best is None or lam < best[0] - 1e-12 * max(1.0, abs(lam)):
            best = (lam, vec, res, its, idx)
    lam, vec, res, its, idx = best
    u = np.zeros(view.dim)
    u[idx] = orient(vec)
    return SpectralPair(float(lam), u, float(res), int(its), view.unpinned)


def matrix_smallest_eigenpair(a, tol: float = DEFAULT_TOL, max_iter: int | None = None):
    """``(lambda, u)`` for the smallest eigenvalue of a sparse SPD matrix ``a``.

    Same LOBPCG iteration as the grounded solver, started from the all-ones
    vector; meant for irreducible M-matrices such as ``L + diag(gains)``.
    """
    a = sp.csr_matrix(a, dtype=np.float64)
    n = a.shape[0]
    if n == 0 or a.shape != (n, n):
        raise ValueError("need a non-empty square matrix")
    diag = a.diagonal().copy()
    if (diag <= 0).any():
        raise ValueError("diagonal must be positive")
    lam, vec, _, _ = _lobpcg(a, diag, np.ones(n), tol, max_iter or 10 * n)
    return float(lam), orient(vec)


def lambda1(view: GroundedView, **kwargs) -> float:
    return smallest_eigenpair(view, **kwargs).lambda1


def dense_grounded_matrix(g: Graph, unpinned) -> np.ndarray:
    """Grounded Laplacian assembled densely from the edge list."""
    unpinned = np.asarray(unpinned, dtype=np.int64)
    loc = np.full(g.n, -1, dtype=np.int64)
    loc[unpinned] = np.arange(unpinned.size)
    mat = np.diag(g.degrees[unpinned].astype(np.float64))
    if g.m:
        i, j = loc[g.edges[:, 0]], loc[g.edges[:, 1]]
        keep = (i >= 0) & (j >= 0)
        mat[i[keep], j[keep]] = -1.0
        mat[j[keep], i[keep]] = -1.0
    return mat


def dense_spectrum_oracle(view: GroundedView, cap: int = DENSE_CAP):
    """Full spectrum of the view by dense symmetric eigensolve.

    Returns ``(eigenvalues ascending, eigenvector matrix)``.
    """
    if view.dim > cap:
        raise ValueError(f"view dimension {view.dim} exceeds dense cap {cap}")
    return np.linalg.eigh(dense_grounded_matrix(view.parent, view.unpinned))


def deletion_lambda1s(view: GroundedView, cap: int = 6000) -> np.ndarray:
    """Smallest eigenvalue of the view after deleting each unpinned node.

    Entry ``t`` belongs to node ``view.unpinned[t]``.  One dense eigensolve
    ``A = Q diag(lam) Q^T`` is followed by a root solve per node: the
    smallest eigenvalue ``mu`` of ``A`` without row/column ``v`` is the root
    in ``[lam_1, lam_2]`` of ``sum_j Q[v, j]^2 / (lam_j - mu) = 0``
    (Cauchy interlacing).  Exact up to floating point.
    """
    n = view.dim
    if n > cap:
        raise ValueError(f"view dimension {n} exceeds dense cap {cap}")
    if n == 1:
        return np.array([np.inf])
    lam, q = np.linalg.eigh(view.to_dense())
    return _secular_smallest(lam, q * q)


def _secular_smallest(lam: np.ndarray, w: np.ndarray) -> np.ndarray:
    n = lam.size
    scale = max(1.0, float(np.abs(lam).max()))
    delta = lam - lam[0]
    tight = delta <= CLUSTER_RTOL * scale
    mult = int(tight.sum())
    if mult >= n:
        return np.full(w.shape[0], lam[0])
    if mult > 1:
        # repeated smallest eigenvalue survives any single deletion
        return np.full(w.shape[0], lam[0])
    w1 = w[:, 0]
    rest = w[:, 1:]
    drest = delta[1:]
    hi0 = drest[0]
    nc = w.shape[0]
    out = np.empty(nc)

    # h(t) = t * psi(t) - w1 is increasing and convex on (0, hi0)
    lo = np.zeros(nc)
    hi = np.full(nc, hi0)
    zero = w1 <= 1e-300
    t = np.full(nc, 0.5 * hi0)
    active = ~zero
    for _ in range(100):
        if not active.any():
            break
        ta = t[active]
        den = drest[None, :] - ta[:, None]
        r = rest[active] / den
        psi = r.sum(axis=1)
        dpsi = (r / den).sum(axis=1)
        h = ta * psi - w1[active]
        dh = psi + ta * dpsi
        neg = h < 0
        lo_a, hi_a = lo[active], hi[active]
        lo_a = np.where(neg, ta, lo_a)
        hi_a = np.where(neg, hi_a, ta)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = ta - h / dh
        bad = ~((newton > lo_a) & (newton < hi_a)) | ~np.isfinite(newton)
        nxt = np.where(bad, 0.5 * (lo_a + hi_a), newton)
        lo[active], hi[active] = lo_a, hi_a
        done = (np.abs(nxt - ta) <= 4e-16 * np.maximum(ta, 1e-300)) | (hi_a - lo_a <= 4e-16 * hi_a)
        t[active] = nxt
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    t[zero] = 0.0
    out[:] = lam[0] + t
    return out
