"""Green's function and layer-potential kernels with near-diagonal splittings.

Conventions (fixed by requiring the flat-interface Fourier symbols to come
out exactly):

* G_w(x, y) = K0(w|x-y|) / (2 pi), so the single layer S has flat symbol
  1 / (2 sqrt(xi^2 + w^2)).
* D uses the source-normal derivative of G (jump +/- rho/2), S' the
  target-normal derivative (jump -/+ rho/2).
* The D'-difference contracts the Hessian difference with both normals;
  its omega-independent 1/r^2 part is cancelled analytically through
  Phi(z) = K1(z) - 1/z, leaving a log-type singularity only.

Every on-curve kernel k(t, t') is split near the diagonal as

    k = log_coeff(t, t') * log|t - t'| + smooth(t, t'),

with both factors analytic across t = t'; the corrected quadrature in
``quad`` integrates the log factor exactly and the smooth rule handles
the rest.
"""

from __future__ import annotations

import numpy as np
from scipy import special as sf

from .specfun import (
    EULER_GAMMA,
    K1_REMAINDER_SLOPE,
    k0_log_remainder,
    k1_log_remainder,
    k1_minus_inverse,
)

TWO_PI = 2.0 * np.pi


def green(omega: float, x, y):
    """G_w(x, y) = K0(w|x-y|)/(2 pi) for x != y; x, y arrays of shape (.., 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x[..., 0] - y[..., 0], x[..., 1] - y[..., 1])
    if np.any(r == 0):
        raise ValueError("green: coincident points")
    return sf.k0(omega * r) / TWO_PI


def grad_green(omega: float, x, y):
    """Gradient of G_w with respect to x; shape (.., 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x[..., 0] - y[..., 0]
    dy = x[..., 1] - y[..., 1]
    r = np.hypot(dx, dy)
    if np.any(r == 0):
        raise ValueError("grad_green: coincident points")
    fac = -omega * sf.k1(omega * r) / (TWO_PI * r)
    return np.stack([fac * dx, fac * dy], axis=-1)


class PairGeometry:
    """Pairwise target/source node geometry, broadcast as (n_tgt, n_src)."""

    def __init__(self, tgt_pos, tgt_normal, tgt_t, src_pos, src_normal, src_t,
                 src_speed=None, diag_mask=None):
        self.dx = tgt_pos[:, 0][:, None] - src_pos[:, 0][None, :]
        self.dy = tgt_pos[:, 1][:, None] - src_pos[:, 1][None, :]
        self.r2 = self.dx * self.dx + self.dy * self.dy
        self.diag = diag_mask if diag_mask is not None else (self.r2 == 0.0)
        r2_safe = np.where(self.diag, 1.0, self.r2)
        self.r = np.sqrt(r2_safe)      # diagonal-safe placeholder (=1 there)
        self.r0 = np.where(self.diag, 0.0, self.r)  # true distance
        self.inv_r = 1.0 / self.r
        self.dt = tgt_t[:, None] - src_t[None, :]
        # r/|dt|, smooth across the diagonal; on it, the limit is the speed
        dt_safe = np.where(self.diag, 1.0, self.dt)
        ratio2 = self.r2 / (dt_safe * dt_safe)
        if src_speed is not None:
            ratio2 = np.where(self.diag, src_speed[None, :] ** 2, ratio2)
        self.log_ratio = 0.5 * np.log(ratio2)
        self.d_dot_ns = self.dx * src_normal[:, 0][None, :] + self.dy * src_normal[:, 1][None, :]
        self.d_dot_nt = self.dx * tgt_normal[:, 0][:, None] + self.dy * tgt_normal[:, 1][:, None]
        self.nt_dot_ns = (
            tgt_normal[:, 0][:, None] * src_normal[:, 0][None, :]
            + tgt_normal[:, 1][:, None] * src_normal[:, 1][None, :]
        )


def _curvature_term(curve, t):
    """(gamma'' . n) / s^2 at parameters t (equals the signed curvature)."""
    sec = curve.second(t)
    nrm = curve.normal(t)
    spd = curve.speed(t)
    return (sec[..., 0] * nrm[..., 0] + sec[..., 1] * nrm[..., 1]) / spd**2


class KernelS:
    """Single layer: K0(w r)/(2 pi); log-singular."""

    def __init__(self, omega):
        self.omega = omega

    def far(self, g: PairGeometry):
        return np.where(g.diag, 0.0, sf.k0(np.where(g.diag, 1.0, self.omega * g.r))) / TWO_PI

    def log_coeff(self, g: PairGeometry):
        return -sf.i0(self.omega * g.r0) / TWO_PI

    def smooth(self, g: PairGeometry, curve=None, tgt_t=None):
        z = self.omega * g.r0
        val = -sf.i0(z) * (np.log(self.omega) + g.log_ratio) + k0_log_remainder(z)
        return val / TWO_PI


class KernelSDiff:
    """S_{w2} - S_{w1}; bounded (r^2 log r) singularity, still corrected."""

    def __init__(self, omega2, omega1, scale=1.0):
        self.w2, self.w1, self.scale = omega2, omega1, scale

    def far(self, g):
        r = np.where(g.diag, 1.0, g.r)
        val = (sf.k0(self.w2 * r) - sf.k0(self.w1 * r)) / TWO_PI
        val = np.where(g.diag, -np.log(self.w2 / self.w1) / TWO_PI, val)
        return self.scale * val

    def log_coeff(self, g):
        return self.scale * (sf.i0(self.w1 * g.r0) - sf.i0(self.w2 * g.r0)) / TWO_PI

    def smooth(self, g, curve=None, tgt_t=None):
        z2, z1 = self.w2 * g.r0, self.w1 * g.r0
        val = (
            -sf.i0(z2) * (np.log(self.w2) + g.log_ratio)
            + sf.i0(z1) * (np.log(self.w1) + g.log_ratio)
            + k0_log_remainder(z2)
            - k0_log_remainder(z1)
        )
        return self.scale * val / TWO_PI


class KernelD:
    """Double layer (source-normal): (w/2pi) K1(w r) (d.n_src)/r; smooth-ish,
    log-singular at higher order on curved panels."""

    def __init__(self, omega, scale=1.0):
        self.omega = omega
        self.scale = scale

    def far(self, g):
        r = np.where(g.diag, 1.0, g.r)
        val = self.omega * sf.k1(self.omega * r) * g.d_dot_ns / (TWO_PI * r)
        return self.scale * np.where(g.diag, 0.0, val)

    def log_coeff(self, g):
        z = self.omega * g.r0
        return self.scale * self.omega * g.d_dot_ns * g.inv_r * sf.i1(z) / TWO_PI

    def smooth(self, g, curve=None, tgt_t=None):
        z = self.omega * g.r0
        u = g.d_dot_ns / np.where(g.diag, 1.0, g.r2)
        w = self.omega * g.d_dot_ns * g.inv_r
        val = u / TWO_PI + w * (
            sf.i1(z) * (np.log(self.omega) + g.log_ratio) + k1_log_remainder(z)
        ) / TWO_PI
        if np.any(g.diag):
            kappa = _curvature_term(curve, tgt_t)
            val = np.where(g.diag, (kappa / (2.0 * TWO_PI))[:, None], val)
        return self.scale * val


class KernelSp:
    """Adjoint double layer (target-normal): -(w/2pi) K1(w r) (d.n_tgt)/r."""

    def __init__(self, omega, scale=1.0):
        self.omega = omega
        self.scale = scale

    def far(self, g):
        r = np.where(g.diag, 1.0, g.r)
        val = -self.omega * sf.k1(self.omega * r) * g.d_dot_nt / (TWO_PI * r)
        return self.scale * np.where(g.diag, 0.0, val)

    def log_coeff(self, g):
        z = self.omega * g.r0
        return -self.scale * self.omega * g.d_dot_nt * g.inv_r * sf.i1(z) / TWO_PI

    def smooth(self, g, curve=None, tgt_t=None):
        z = self.omega * g.r0
        u = g.d_dot_nt / np.where(g.diag, 1.0, g.r2)
        w = self.omega * g.d_dot_nt * g.inv_r
        val = -u / TWO_PI - w * (
            sf.i1(z) * (np.log(self.omega) + g.log_ratio) + k1_log_remainder(z)
        ) / TWO_PI
        if np.any(g.diag):
            kappa = _curvature_term(curve, tgt_t)
            val = np.where(g.diag, (-kappa / (2.0 * TWO_PI))[:, None], val)
        return self.scale * val


class KernelDDiff:
    """D_{w2} - D_{w1}; the 1/r parts cancel via Phi(z) = K1(z) - 1/z."""

    def __init__(self, omega2, omega1, scale=1.0):
        self.w2, self.w1, self.scale = omega2, omega1, scale

    def _phi_diff(self, r):
        return self.w2 * k1_minus_inverse(self.w2 * r) - self.w1 * k1_minus_inverse(self.w1 * r)

    def far(self, g):
        r = np.where(g.diag, 1.0, g.r)
        val = g.d_dot_ns * self._phi_diff(r) / (TWO_PI * r)
        return self.scale * np.where(g.diag, 0.0, val)

    def log_coeff(self, g):
        z2, z1 = self.w2 * g.r0, self.w1 * g.r0
        return self.scale * g.d_dot_ns * g.inv_r * (
            self.w2 * sf.i1(z2) - self.w1 * sf.i1(z1)
        ) / TWO_PI

    def smooth(self, g, curve=None, tgt_t=None):
        val = self.w2 * (
            sf.i1(self.w2 * g.r0) * (np.log(self.w2) + g.log_ratio)
            + k1_log_remainder(self.w2 * g.r0)
        )
        val -= self.w1 * (
            sf.i1(self.w1 * g.r0) * (np.log(self.w1) + g.log_ratio)
            + k1_log_remainder(self.w1 * g.r0)
        )
        return self.scale * g.d_dot_ns * g.inv_r * val / TWO_PI


class KernelSpDiff(KernelDDiff):
    """S'_{w2} - S'_{w1}: as KernelDDiff but with the target normal and a sign."""

    def far(self, g):
        r = np.where(g.diag, 1.0, g.r)
        val = -g.d_dot_nt * self._phi_diff(r) / (TWO_PI * r)
        return self.scale * np.where(g.diag, 0.0, val)

    def log_coeff(self, g):
        z2, z1 = self.w2 * g.r0, self.w1 * g.r0
        return -self.scale * g.d_dot_nt * g.inv_r * (
            self.w2 * sf.i1(z2) - self.w1 * sf.i1(z1)
        ) / TWO_PI

    def smooth(self, g, curve=None, tgt_t=None):
        val = self.w2 * (
            sf.i1(self.w2 * g.r0) * (np.log(self.w2) + g.log_ratio)
            + k1_log_remainder(self.w2 * g.r0)
        )
        val -= self.w1 * (
            sf.i1(self.w1 * g.r0) * (np.log(self.w1) + g.log_ratio)
            + k1_log_remainder(self.w1 * g.r0)
        )
        return -self.scale * g.d_dot_nt * g.inv_r * val / TWO_PI


class KernelDpDiff:
    """n_t . [Hess G_{w2} - Hess G_{w1}] . n_s with an overall minus sign;
    log-singular after the analytic 1/r^2 cancellation."""

    def __init__(self, omega2, omega1, scale=1.0):
        self.w2, self.w1, self.scale = omega2, omega1, scale

    def _parts(self, g):
        r = np.where(g.diag, 1.0, g.r)
        dn = (g.d_dot_nt * g.inv_r) * (g.d_dot_ns * g.inv_r)  # (dhat.n_t)(dhat.n_s)
        twist = 2.0 * dn - g.nt_dot_ns
        return r, dn, twist

    def far(self, g):
        r, dn, twist = self._parts(g)
        k0d = self.w2**2 * sf.k0(self.w2 * r) - self.w1**2 * sf.k0(self.w1 * r)
        phid = (
            self.w2 * k1_minus_inverse(self.w2 * r)
            - self.w1 * k1_minus_inverse(self.w1 * r)
        ) / r
        val = -(k0d * dn + phid * twist) / TWO_PI
        return self.scale * np.where(g.diag, 0.0, val)

    def log_coeff(self, g):
        _, dn, twist = self._parts(g)
        i0d = self.w2**2 * sf.i0(self.w2 * g.r0) - self.w1**2 * sf.i0(self.w1 * g.r0)
        i1d = (self.w2 * sf.i1(self.w2 * g.r0) - self.w1 * sf.i1(self.w1 * g.r0)) * g.inv_r
        i1d = np.where(g.diag, 0.5 * (self.w2**2 - self.w1**2), i1d)
        return self.scale * (i0d * dn - i1d * twist) / TWO_PI

    def smooth(self, g, curve=None, tgt_t=None):
        r = np.where(g.diag, 1.0, g.r)
        _, dn, twist = self._parts(g)

        def k0_smooth(w):
            z = w * g.r0
            return w**2 * (-sf.i0(z) * (np.log(w) + g.log_ratio) + k0_log_remainder(z))

        def phi_smooth(w):
            z = w * g.r0
            raw = w * (sf.i1(z) * (np.log(w) + g.log_ratio) + k1_log_remainder(z)) / r
            lim = 0.5 * w**2 * (np.log(w) + g.log_ratio + 2.0 * K1_REMAINDER_SLOPE)
            return np.where(g.diag, lim, raw)

        # on the diagonal dn -> 0 and twist -> -1 exactly, so the generic
        # expression already carries the correct limit
        val = -(
            (k0_smooth(self.w2) - k0_smooth(self.w1)) * dn
            + (phi_smooth(self.w2) - phi_smooth(self.w1)) * twist
        )
        return self.scale * val / TWO_PI


class KernelSum:
    """Pointwise sum of component kernels (for the L2 block entries)."""

    def __init__(self, *kernels):
        self.kernels = kernels

    def far(self, g):
        return sum(k.far(g) for k in self.kernels)

    def log_coeff(self, g):
        return sum(k.log_coeff(g) for k in self.kernels)

    def smooth(self, g, curve=None, tgt_t=None):
        return sum(k.smooth(g, curve=curve, tgt_t=tgt_t) for k in self.kernels)


# ----------------------------------------------------------------------
# Off-curve evaluation kernels (field evaluation); targets are free points.


def potential_matrix_S(omega, targets, src_pos):
    """G_w(x_i, y_j) matrix for arbitrary off-curve targets."""
    dx = targets[:, 0][:, None] - src_pos[:, 0][None, :]
    dy = targets[:, 1][:, None] - src_pos[:, 1][None, :]
    r = np.hypot(dx, dy)
    return sf.k0(omega * r) / TWO_PI


def potential_matrix_D(omega, targets, src_pos, src_normal):
    dx = targets[:, 0][:, None] - src_pos[:, 0][None, :]
    dy = targets[:, 1][:, None] - src_pos[:, 1][None, :]
    r = np.hypot(dx, dy)
    dn = dx * src_normal[:, 0][None, :] + dy * src_normal[:, 1][None, :]
    return omega * sf.k1(omega * r) * dn / (TWO_PI * r)


def potential_grad_S(omega, targets, src_pos):
    """Gradient (w.r.t. target) kernels of the single layer; shape (nt, ns, 2)."""
    dx = targets[:, 0][:, None] - src_pos[:, 0][None, :]
    dy = targets[:, 1][:, None] - src_pos[:, 1][None, :]
    r = np.hypot(dx, dy)
    fac = -omega * sf.k1(omega * r) / (TWO_PI * r)
    return np.stack([fac * dx, fac * dy], axis=-1)


def potential_grad_D(omega, targets, src_pos, src_normal):
    """Gradient (w.r.t. target) of the double-layer kernel; shape (nt, ns, 2)."""
    dx = targets[:, 0][:, None] - src_pos[:, 0][None, :]
    dy = targets[:, 1][:, None] - src_pos[:, 1][None, :]
    r = np.hypot(dx, dy)
    z = omega * r
    k0v, k1v = sf.k0(z), sf.k1(z)
    dn = dx * src_normal[:, 0][None, :] + dy * src_normal[:, 1][None, :]
    # grad of (w/2pi) K1(wr) dn / r
    coef = -(omega * k0v + 2.0 * k1v / r) * dn / (r * r)
    gx = coef * dx + k1v * src_normal[:, 0][None, :] / r
    gy = coef * dy + k1v * src_normal[:, 1][None, :] / r
    return np.stack([gx, gy], axis=-1) * (omega / TWO_PI)
