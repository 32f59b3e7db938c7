"""Off-curve evaluation of layer potentials with adaptive near-target refinement.

Targets closer to a panel than about one panel length trigger recursive
bisection of that panel's integral; the density is carried to the children
by Legendre interpolation of its 16 panel samples, so refinement converges
at the resolution of the underlying discretization.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre as npleg

from . import kernels as K
from .geom import NODES_PER_PANEL, Boundary
from .specfun import legendre_basis

NEAR_FACTOR = 1.2
MAX_DEPTH = 42


def _panel_contrib(omega, kind, grad, targets, pos, normal, dens_w):
    if kind == "S":
        if grad:
            mat = K.potential_grad_S(omega, targets, pos)
            return np.tensordot(mat, dens_w, axes=([1], [0]))
        return K.potential_matrix_S(omega, targets, pos) @ dens_w
    if grad:
        mat = K.potential_grad_D(omega, targets, pos, normal)
        return np.tensordot(mat, dens_w, axes=([1], [0]))
    return K.potential_matrix_D(omega, targets, pos, normal) @ dens_w


def _near_recurse(curve, basis, omega, kind, grad, target, a, b, coeffs, depth):
    half = 0.5 * (b - a)
    t = a + half * (basis.nodes + 1.0)
    pos = curve.point(t)
    spd = curve.speed(t)
    dist = np.min(np.hypot(pos[:, 0] - target[0], pos[:, 1] - target[1]))
    size = float(half * np.dot(basis.weights, spd))
    if dist >= NEAR_FACTOR * size or depth >= MAX_DEPTH:
        dens = basis.vander @ coeffs
        dens_w = dens * spd * basis.weights * half
        return _panel_contrib(omega, kind, grad, target[None, :], pos,
                              curve.normal(t), dens_w)[0]
    mid = 0.5 * (a + b)
    out = 0.0
    for lo, hi in ((a, mid), (mid, b)):
        # child samples of the density via the parent's Legendre coefficients
        tc = lo + 0.5 * (hi - lo) * (basis.nodes + 1.0)
        x_in_parent = (2.0 * tc - a - b) / (b - a)
        dens_child = npleg.legvander(x_in_parent, basis.order - 1) @ coeffs
        child_coeffs = basis.forward @ dens_child
        out = out + _near_recurse(curve, basis, omega, kind, grad, target,
                                  lo, hi, child_coeffs, depth + 1)
    return out


def eval_layer(boundary: Boundary, dens_full: np.ndarray, omega: float,
               targets: np.ndarray, kind: str = "S", grad: bool = False):
    """S_w or D_w applied to a nodal density, evaluated at off-curve targets.

    Returns (nt,) complex values, or (nt, 2) gradients when grad=True.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    basis = legendre_basis(NODES_PER_PANEL)
    curve = boundary.curve
    nt = targets.shape[0]
    out = np.zeros((nt, 2) if grad else nt, dtype=complex)
    for pi, pan in enumerate(boundary.panels):
        sl = slice(pi * NODES_PER_PANEL, (pi + 1) * NODES_PER_PANEL)
        dens = dens_full[sl]
        if not np.any(dens):
            continue
        d = np.min(
            np.hypot(targets[:, 0][:, None] - pan.pos[:, 0][None, :],
                     targets[:, 1][:, None] - pan.pos[:, 1][None, :]),
            axis=1,
        )
        far = d >= NEAR_FACTOR * pan.arc_len
        if np.any(far):
            dens_w = dens * boundary.weight[sl]
            out[far] += _panel_contrib(omega, kind, grad, targets[far],
                                       pan.pos, pan.normal, dens_w)
        near_idx = np.nonzero(~far)[0]
        if near_idx.size:
            coeffs = basis.forward @ dens
            for i in near_idx:
                out[i] += _near_recurse(curve, basis, omega, kind, grad,
                                        targets[i], pan.a, pan.b, coeffs, 0)
    return out
