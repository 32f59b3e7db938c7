"""Flat-interface analytics: Fourier symbols, FFT solvers, Sommerfeld fields.

This module is the oracle layer: everything here is built from 1-D Fourier
analysis of the flat problem and never touches the Nystrom machinery, so it
can cross-validate the curved solver independently.

The composed symbol of the surface-wave system factorizes exactly:

    a(xi) = (xi^2 - E^2 - 2 i m^2) / (xi0 (xi0 + m)),   xi0 = sqrt(xi^2 + w^2),

which removes the 0/0 at xi = +-E analytically (a(+-E) = -i).  The same
cancellation is carried out in closed form for the two-mass composed
2x2 multiplier.
"""

from __future__ import annotations

import numpy as np

from . import quad
from .kernels import green

TWO_PI = 2.0 * np.pi


# ----------------------------------------------------------------------
# Single-mass symbols


def symbol_a(xi, m: float, energy: float):
    """Composed surface-operator symbol; exact (regularized) form."""
    xi = np.asarray(xi, dtype=float)
    omega2 = m * m - energy * energy
    xi0 = np.sqrt(xi * xi + omega2)
    return (xi * xi - energy * energy - 2j * m * m) / (xi0 * (xi0 + m))


def symbol_a_product(xi, m: float, energy: float):
    """The textbook product form (singular at xi = +-E); testing only."""
    xi = np.asarray(xi, dtype=float)
    omega2 = m * m - energy * energy
    xi0 = np.sqrt(xi * xi + omega2)
    return (1.0 - m / xi0) * (1.0 - 2j * m * m / (xi * xi - energy * energy))


def symbol_a_inv(xi, m: float, energy: float):
    """Bounded analytic inverse symbol (printed product form)."""
    xi = np.asarray(xi, dtype=float)
    omega2 = m * m - energy * energy
    xi0 = np.sqrt(xi * xi + omega2)
    return (1.0 + m / xi0) * (
        1.0 + (2j + 1.0) * m * m / (xi * xi - energy * energy - 2j * m * m)
    )


def symbol_p(xi, m: float, energy: float):
    """Symbol of P = 1 + Q (poles at +-E)."""
    xi = np.asarray(xi, dtype=float)
    return 1.0 - 2j * m * m / (xi * xi - energy * energy)


# ----------------------------------------------------------------------
# Two-mass symbols


def _xi_j(xi, m, energy):
    return np.sqrt(np.asarray(xi, dtype=float) ** 2 + m * m - energy * energy)


def symbol_R(xi, m1: float, m2: float, energy: float):
    """Schur-complement multiplier of the (mu, rho) system; roots at +-E."""
    x1 = _xi_j(xi, m1, energy)
    x2 = _xi_j(xi, m2, energy)
    return (
        -1.0
        + 0.25 * (x2 - x1) * (1.0 / x2 - 1.0 / x1)
        + 0.25 * (m1 + m2) * (1.0 / x2 + 1.0 / x1)
    )


def flat_matrix(xi, m1: float, m2: float, energy: float):
    """2x2 flat multiplier of the (mu, rho) system; shape (2, 2) + xi-shape."""
    x1 = _xi_j(xi, m1, energy)
    x2 = _xi_j(xi, m2, energy)
    mbar = 0.5 * (m1 + m2)
    one = np.ones_like(x1)
    return np.array([
        [1.0 - 0.5 * mbar * (1.0 / x1 + 1.0 / x2), 0.5 * (x2 - x1)],
        [0.5 * (1.0 / x2 - 1.0 / x1), one],
    ])


def nullvector(m1: float, m2: float):
    """Common nullvector of the flat matrix at xi = +-E, (mu, rho) ordering."""
    return np.array([-1.0, 0.5 / m2 - 0.5 / m1])


def _mv_over_d(xi, m1, m2, energy):
    """(flat_matrix @ v) / (xi^2 - E^2): analytic, computed in cancellation-free form."""
    x1 = _xi_j(xi, m1, energy)
    x2 = _xi_j(xi, m2, energy)
    mbar = 0.5 * (m1 + m2)
    kappa = (m1 - m2) ** 2 * (m1 + m2) / (4.0 * m1 * m2)
    g_mu = -0.5 * mbar * (
        1.0 / ((x1 + m1) * x1 * m1) + 1.0 / ((x2 + m2) * x2 * m2)
    ) + kappa * (1.0 / (x1 + m1) + 1.0 / (x2 + m2)) / ((x1 + x2) * (m1 + m2))
    g_rho = 0.5 * (m1**2 - m2**2) * (
        x1 + x2 + m1**2 / (x2 + m2) + m2**2 / (x1 + m1)
    ) / ((m1 + m2) * m1 * m2 * (x1 + x2) * x1 * x2)
    return np.array([g_mu, g_rho])


def composed_matrix(xi, m1: float, m2: float, energy: float):
    """Symbol of the composed two-mass system acting on (sigma1, sigma2).

    M N = M + (2 i mbar^2 / (1 + delta^2)) * [(M v)/(xi^2-E^2)] vtilde^T with
    vtilde = (1, -delta); bounded and invertible for all real xi.
    """
    m_mat = flat_matrix(xi, m1, m2, energy).astype(complex)
    g = _mv_over_d(xi, m1, m2, energy)
    mbar = 0.5 * (m1 + m2)
    delta = 0.5 / m2 - 0.5 / m1
    coef = 2j * mbar**2 / (1.0 + delta * delta)
    return m_mat + coef * g[:, None, ...] * np.array([1.0, -delta])[None, :, None]


# ----------------------------------------------------------------------
# FFT solvers on a uniform grid


def _check_decay(samples, name):
    samples = np.asarray(samples)
    peak = np.max(np.abs(samples))
    edge = max(np.abs(samples[0]), np.abs(samples[-1]))
    if peak > 0 and edge > 1e-12 * peak:
        raise ValueError(f"{name} has not decayed at the grid ends "
                         f"(edge/peak = {edge / peak:.2e}); widen the grid")


def flat_solve_fft(trace, grid, m: float, energy: float):
    """Solve a(xi) rho_hat = 2 m trace_hat on a uniform grid; returns rho."""
    trace = np.asarray(trace, dtype=complex)
    grid = np.asarray(grid, dtype=float)
    _check_decay(trace, "incident trace")
    dx = grid[1] - grid[0]
    xi = TWO_PI * np.fft.fftfreq(grid.size, dx)
    rho_hat = np.fft.fft(2.0 * m * trace) / symbol_a(xi, m, energy)
    return np.fft.ifft(rho_hat)


def flat_solve_fft_two_mass(r_mu, r_rho, grid, m1: float, m2: float, energy: float):
    """Solve the composed two-mass system for (sigma1, sigma2) on a uniform grid.

    r_mu, r_rho: samples of the right-hand side pair ([[n.grad u_i]] + 2 mbar u_i,
    -[[u_i]]) on the grid.
    """
    r_mu = np.asarray(r_mu, dtype=complex)
    r_rho = np.asarray(r_rho, dtype=complex)
    _check_decay(r_mu, "rhs (mu row)")
    grid = np.asarray(grid, dtype=float)
    dx = grid[1] - grid[0]
    xi = TWO_PI * np.fft.fftfreq(grid.size, dx)
    mn = composed_matrix(xi, m1, m2, energy)  # (2, 2, nxi)
    r1 = np.fft.fft(r_mu)
    r2 = np.fft.fft(r_rho)
    det = mn[0, 0] * mn[1, 1] - mn[0, 1] * mn[1, 0]
    s1 = (mn[1, 1] * r1 - mn[0, 1] * r2) / det
    s2 = (-mn[1, 0] * r1 + mn[0, 0] * r2) / det
    return np.fft.ifft(s1), np.fft.ifft(s2)


# ----------------------------------------------------------------------
# Sommerfeld reference field (flat interface, single mass, point source)


def _segment_quad(f, a, b, tol):
    return quad.adaptive_reference(f, a, b, tol)


def sommerfeld_field(x, src, m: float, energy: float, strength=1.0,
                     tol: float = 1e-12, include_incident: bool = True):
    """Reference u(x) for the flat interface with a point source at src.

    Evaluates the closed-form Fourier representation of the scattered field;
    the guided-wave poles at xi = +-E are handled by the outgoing
    half-residue prescription (limiting absorption E -> E + i0).
    """
    x = np.asarray(x, dtype=float)
    src = np.asarray(src, dtype=float)
    if x.ndim == 1:
        return sommerfeld_field(x[None, :], src, m, energy, strength, tol,
                                include_incident)[0]
    omega2 = m * m - energy * energy
    e_abs = abs(energy)
    out = np.empty(x.shape[0], dtype=complex)
    for i, pt in enumerate(x):
        d = abs(src[1]) + abs(pt[1])
        if d <= 0:
            raise ValueError("sommerfeld_field requires source and target off the interface")
        dx1 = pt[0] - src[0]

        def big_g(xi):
            xi = np.asarray(xi, dtype=float)
            xi0 = np.sqrt(xi * xi + omega2)
            return (
                strength
                * np.exp(1j * xi * dx1)
                * np.exp(-d * xi0)
                * (xi0 + m)
                / (2.0 * xi0)
            )

        lam = 0.5 * e_abs
        ge = big_g(np.array([energy]))[0]
        gme = big_g(np.array([-energy]))[0]

        def integrand(xi):
            xi = np.asarray(xi, dtype=float)
            g = big_g(xi)
            chi_p = np.exp(-((xi - energy) ** 2) / (2 * lam * lam))
            chi_m = np.exp(-((xi + energy) ** 2) / (2 * lam * lam))
            term_p = np.where(xi != energy,
                              (g - ge * chi_p) / np.where(xi != energy, xi - energy, 1.0),
                              0.0)
            term_m = np.where(xi != -energy,
                              (g - gme * chi_m) / np.where(xi != -energy, xi + energy, 1.0),
                              0.0)
            return (term_p - term_m) / (2.0 * energy)

        cut = 40.0 / d + 6.0 * e_abs + abs(dx1) * 0.0
        pieces = sorted({-cut, -2 * e_abs, -e_abs, 0.0, e_abs, 2 * e_abs, cut})
        pv = 0.0
        for lo, hi in zip(pieces[:-1], pieces[1:]):
            pv += _segment_quad(integrand, lo, hi, tol)
        u_s = (m / TWO_PI) * (pv + 1j * np.pi * (ge + gme) / (2.0 * energy))
        out[i] = u_s
        if include_incident:
            out[i] += strength * green(np.sqrt(omega2), pt, src)
    return out
