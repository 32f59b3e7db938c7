"""Target-dependent corrected quadrature for log-singular and kink kernels.

Near the diagonal the smooth panel rule is replaced (never augmented) by
weights exact for the specific non-smooth factor:

* ``log_corrected_weights``  -- integrates g(t) * log|t_target - t| over a
  panel exactly for g of degree <= 15, from analytic Legendre log-moments.
* ``kink_corrected_weights`` -- integrates g * exp(i*E*|tau_target - tau|)
  exactly (to roundoff) for g of degree <= 15, from two-sided exponential
  moments; the kink sits at the target.

Moments are computed in the Legendre basis; the monomial route would be
badly conditioned at order 16.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .specfun import gauss_legendre, legendre_basis

_FAR_TARGET_BOUND = 10.0  # |c| beyond this the smooth rule is accurate


class QuadratureError(ValueError):
    pass


class SubdivisionLimit(RuntimeError):
    pass


# ----------------------------------------------------------------------
# Adaptive reference integration (test oracle and near-field fallback)


def adaptive_reference(f, a: float, b: float, tol: float, max_intervals: int = 4096):
    """Integrate f over [a, b] to absolute accuracy tol, globally adaptive
    bisection with an embedded GL16/GL32 error estimate."""
    import heapq

    if tol <= 0:
        raise QuadratureError("tol must be > 0")
    x16, w16 = gauss_legendre(16)
    x32, w32 = gauss_legendre(32)
    eps_width = 64 * np.finfo(float).eps

    def rule(lo, hi):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        c16 = np.dot(np.asarray(f(mid + half * x16)), w16) * half
        c32 = np.dot(np.asarray(f(mid + half * x32)), w32) * half
        err = abs(c32 - c16)
        if not np.isfinite(err):
            err = np.inf
        return c32, err

    val, err = rule(float(a), float(b))
    heap = [(-err, float(a), float(b), val)]
    count = 1
    total_err = err
    while total_err > tol:
        if count >= max_intervals:
            raise SubdivisionLimit(
                f"adaptive_reference: {max_intervals} intervals, err={total_err:.2e}"
            )
        neg_err, lo, hi, v = heapq.heappop(heap)
        if hi - lo < eps_width * max(1.0, abs(lo), abs(hi)):
            raise SubdivisionLimit(
                f"adaptive_reference: interval [{lo}, {hi}] below resolvable width"
            )
        total_err += neg_err  # remove this interval's error
        mid = 0.5 * (lo + hi)
        for piece in ((lo, mid), (mid, hi)):
            pv, pe = rule(*piece)
            heapq.heappush(heap, (-pe, piece[0], piece[1], pv))
            total_err += pe
        count += 1
    return sum(item[3] for item in heap)


# ----------------------------------------------------------------------
# Legendre log-moments  M_k(c) = int_{-1}^{1} P_k(x) log|c - x| dx


def _log_moments_inside(c: float, n: int) -> np.ndarray:
    """PV route for |c| < 1 via Legendre Q on the cut (forward recurrence is
    stable there since |P_k| <= 1)."""
    q = np.empty(n + 2)
    q[0] = np.arctanh(c)
    q[1] = c * q[0] - 1.0
    for k in range(1, n + 1):
        q[k + 1] = ((2 * k + 1) * c * q[k] - k * q[k - 1]) / (k + 1)
    m = np.empty(n)
    m[0] = -(c - 1.0) * np.log(abs(c - 1.0)) + (c + 1.0) * np.log(abs(c + 1.0)) - 2.0
    for k in range(1, n):
        m[k] = 2.0 * (q[k + 1] - q[k - 1]) / (2 * k + 1)
    return m


def _log_moments_gl(c: float, n: int, rule_order: int = 256) -> np.ndarray:
    x, w = gauss_legendre(rule_order)
    vander = npleg.legvander(x, n - 1)
    return vander.T @ (w * np.log(np.abs(c - x)))


def _log_moments_dyadic(c: float, n: int) -> np.ndarray:
    """Composite rule graded toward the endpoint nearest the just-outside
    singularity; used for 1 < |c| < 1.1 where one global rule is too slow."""
    sign = 1.0 if c > 0 else -1.0
    cc = abs(c)
    gap = max(cc - 1.0, 1e-14)
    edges = [-1.0, 0.0]
    while 1.0 - edges[-1] > gap:
        edges.append(0.5 * (edges[-1] + 1.0))
    edges.append(1.0)
    x32, w32 = gauss_legendre(32)
    m = np.zeros(n)
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        xx = 0.5 * (lo + hi) + half * x32
        vander = npleg.legvander(xx, n - 1)
        m += vander.T @ (half * w32 * np.log(np.abs(cc - xx)))
    if sign < 0:
        m[1::2] *= -1.0
    return m


def legendre_log_moments(c: float, n: int = 16) -> np.ndarray:
    """int_{-1}^{1} P_k(x) log|c - x| dx for k = 0..n-1, any real c."""
    c = float(c)
    if abs(c) < 1.0:
        return _log_moments_inside(c, n)
    if abs(c) < 1.1:
        return _log_moments_dyadic(c, n)
    return _log_moments_gl(c, n)


def log_corrected_weights(a: float, b: float, target_t: float, n: int = 16) -> np.ndarray:
    """Weights at the panel's Gauss-Legendre nodes integrating
    g(t)*log|target_t - t| over [a, b] exactly for polynomial g, deg < n."""
    h = b - a
    if h <= 0:
        raise QuadratureError("empty panel")
    c = (2.0 * target_t - a - b) / h
    if abs(c) > _FAR_TARGET_BOUND:
        raise QuadratureError("target too far from panel; use the smooth rule")
    basis = legendre_basis(n)
    m = legendre_log_moments(c, n)
    # int g log|T-t| dt = (h/2) int g(x) [log|c-x| + log(h/2)] dx
    return 0.5 * h * (basis.forward.T @ m + np.log(0.5 * h) * basis.weights)


# ----------------------------------------------------------------------
# Exponential kink moments for the surface-wave kernel


def _exp_moments_piece(lo: float, hi: float, n: int, phase_sign: float,
                       c: float, a_half: float) -> np.ndarray:
    """int_{lo}^{hi} P_k(x) exp(i*phase_sign*a_half*(x - c)) dx on a kink-free piece."""
    if hi <= lo:
        return np.zeros(n, dtype=complex)
    x, w = gauss_legendre(256)
    half = 0.5 * (hi - lo)
    xx = 0.5 * (lo + hi) + half * x
    vander = npleg.legvander(xx, n - 1)
    ker = np.exp(1j * phase_sign * a_half * (xx - c))
    return vander.T @ (half * w * ker)


def legendre_kink_moments(c: float, a_half: float, n: int = 16) -> np.ndarray:
    """int_{-1}^{1} P_k(x) exp(i*a_half*|c - x|) dx, kink at x = c."""
    if -1.0 < c < 1.0:
        left = _exp_moments_piece(-1.0, c, n, -1.0, c, a_half)  # x < c: exp(+i a (c-x))
        right = _exp_moments_piece(c, 1.0, n, +1.0, c, a_half)
        return left + right
    sign = 1.0 if c >= 1.0 else -1.0
    return _exp_moments_piece(-1.0, 1.0, n, -sign, c, a_half)


def kink_corrected_weights(a: float, b: float, target_t: float, energy: float,
                           node_t: np.ndarray | None = None, n: int = 16) -> np.ndarray:
    """Weights integrating g(t)*exp(i*energy*|target_t - t|) over [a, b]
    exactly for polynomial g of degree < n.

    node_t: quadrature node locations in [a, b]; defaults to the mapped
    Gauss-Legendre nodes.  Arbitrary distinct nodes are supported (needed
    when the kink variable is arclength rather than the panel parameter).
    """
    if energy == 0:
        raise QuadratureError("energy must be nonzero for the kink kernel")
    h = b - a
    if h <= 0:
        raise QuadratureError("empty panel")
    c = (2.0 * target_t - a - b) / h
    if abs(c) > _FAR_TARGET_BOUND:
        raise QuadratureError("target too far from panel; use the smooth rule")
    a_half = energy * 0.5 * h
    m = 0.5 * h * legendre_kink_moments(c, a_half, n)
    basis = legendre_basis(n)
    if node_t is None:
        return basis.forward.T @ m
    x_nodes = (2.0 * np.asarray(node_t, dtype=float) - a - b) / h
    vander = npleg.legvander(x_nodes, n - 1)
    return np.linalg.solve(vander.T, m)


# ----------------------------------------------------------------------
# Stencil bookkeeping


@dataclass(frozen=True)
class CorrectionStencil:
    """Corrected weights replacing the naive rule for one (target, panel) pair."""

    target_index: int
    source_panel: int
    weights: np.ndarray  # one weight per panel node, multiplies the density
