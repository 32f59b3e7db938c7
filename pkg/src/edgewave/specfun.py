"""Modified Bessel functions and Legendre machinery for kernels and quadrature.

The Bessel evaluations are backed by scipy.special; the log-splitting
helpers needed by the near-field quadrature (the entire remainders of
K0 and K1 once the log and 1/z singularities are removed) are computed
here by series, since no library exposes them directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy import special as sf

EULER_GAMMA = 0.57721566490153286060651209008240243

_BESSEL_XMAX = 700.0  # exp overflow guard for the unscaled variants


def _check_positive(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError(f"{name} requires x > 0")
    if np.any(x > _BESSEL_XMAX):
        raise ValueError(f"{name} supports x <= {_BESSEL_XMAX}; use the scaled variant")
    return x


def bessel_k0(x):
    """K0(x) for x > 0."""
    return sf.k0(_check_positive(x, "bessel_k0"))


def bessel_k1(x):
    """K1(x) for x > 0."""
    return sf.k1(_check_positive(x, "bessel_k1"))


def bessel_k0_scaled(x):
    """exp(x)*K0(x); stable for large x (up to 1e4 and beyond)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("bessel_k0_scaled requires x > 0")
    return sf.k0e(x)


def bessel_k1_scaled(x):
    """exp(x)*K1(x); stable for large x."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("bessel_k1_scaled requires x > 0")
    return sf.k1e(x)


def bessel_i0(x):
    """I0(x) on [0, 700]."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > _BESSEL_XMAX):
        raise ValueError("bessel_i0 supports 0 <= x <= 700")
    return sf.i0(x)


def bessel_i1(x):
    """I1(x) on [0, 700]."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > _BESSEL_XMAX):
        raise ValueError("bessel_i1 supports 0 <= x <= 700")
    return sf.i1(x)


# ----------------------------------------------------------------------
# Log-splitting remainders.
#
#   K0(z) = -I0(z)*log(z) + B(z)
#   K1(z) =  1/z + I1(z)*log(z) + C(z)
#
# B and C are entire.  Series are used for small z (no cancellation);
# for moderate z the direct combination is already stable.

_KSPLIT_SERIES_CUT = 2.0
_KSPLIT_NTERMS = 24


def k0_log_remainder(z):
    """B(z) with K0(z) = -I0(z)*log(z) + B(z), elementwise for z >= 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < _KSPLIT_SERIES_CUT
    zs = z[small]
    q = zs * zs / 4.0
    acc = np.zeros_like(zs)
    term = np.ones_like(zs)
    hk = 0.0
    for k in range(1, _KSPLIT_NTERMS + 1):
        term = term * q / (k * k)
        hk += 1.0 / k
        acc += hk * term
    out[small] = sf.i0(zs) * (np.log(2.0) - EULER_GAMMA) + acc
    zl = z[~small]
    out[~small] = sf.k0(zl) + sf.i0(zl) * np.log(zl)
    return out


def k1_log_remainder(z):
    """C(z) with K1(z) = 1/z + I1(z)*log(z) + C(z), elementwise for z >= 0.

    C(0) = 0; C(z)/z -> -(log 2)/2 - (1 - 2*gamma)/4 as z -> 0.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < _KSPLIT_SERIES_CUT
    zs = z[small]
    q = zs * zs / 4.0
    acc = np.zeros_like(zs)
    term = np.ones_like(zs)
    hk = 0.0  # H_0
    hk1 = 1.0  # H_1
    for k in range(0, _KSPLIT_NTERMS + 1):
        if k > 0:
            term = term * q / (k * (k + 1))
            hk += 1.0 / k
            hk1 += 1.0 / (k + 1)
        acc += (hk + hk1 - 2.0 * EULER_GAMMA) * term
    out[small] = -sf.i1(zs) * np.log(2.0) - (zs / 4.0) * acc
    zl = z[~small]
    with np.errstate(divide="ignore"):
        out[~small] = sf.k1(zl) - 1.0 / zl - sf.i1(zl) * np.log(zl)
    return out


# C(z)/z limit at z = 0, used for diagonal kernel values.
K1_REMAINDER_SLOPE = -0.5 * np.log(2.0) - 0.25 * (1.0 - 2.0 * EULER_GAMMA)


def k1_minus_inverse(z):
    """K1(z) - 1/z, stable for all z >= 0 (the 1/z poles cancel analytically)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 0.5
    zs = z[small]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[small] = np.where(
            zs > 0, sf.i1(zs) * np.log(np.where(zs > 0, zs, 1.0)), 0.0
        ) + k1_log_remainder(zs)
        zl = z[~small]
        out[~small] = sf.k1(zl) - 1.0 / zl
    return out


# ----------------------------------------------------------------------
# Gauss-Legendre and Legendre transforms.


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    if n < 1:
        raise ValueError("gauss_legendre requires n >= 1")
    x, w = npleg.leggauss(n)
    return x, w


@dataclass(frozen=True)
class LegendreBasis:
    """n-point Legendre nodes/weights plus the sample<->coefficient maps."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    vander: np.ndarray  # vander[l, k] = P_k(x_l)
    forward: np.ndarray  # coeffs = forward @ samples

    def coeffs(self, samples: np.ndarray) -> np.ndarray:
        samples = np.asarray(samples)
        if samples.shape[0] != self.order:
            raise ValueError(f"expected {self.order} samples, got {samples.shape[0]}")
        return self.forward @ samples

    def eval_coeffs(self, coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
        return npleg.legvander(np.asarray(x, dtype=float), self.order - 1) @ coeffs


@lru_cache(maxsize=16)
def legendre_basis(n: int) -> LegendreBasis:
    x, w = gauss_legendre(n)
    vander = npleg.legvander(x, n - 1)
    scale = (2.0 * np.arange(n) + 1.0) / 2.0
    forward = scale[:, None] * (vander.T * w[None, :])
    return LegendreBasis(order=n, nodes=x, weights=w, vander=vander, forward=forward)


def legendre_coeffs(samples: np.ndarray) -> np.ndarray:
    """Legendre coefficients c_0..c_{n-1} of samples taken at gauss_legendre(n) nodes."""
    samples = np.asarray(samples)
    return legendre_basis(samples.shape[0]).coeffs(samples)


def legendre_tail_norm(coeffs: np.ndarray) -> float:
    """sqrt(sum_{n/2..n-1} |c|^2 / (n/2)); the resolution indicator for 2n->n panels."""
    n = coeffs.shape[0]
    half = n // 2
    tail = coeffs[half:]
    return float(np.sqrt(np.sum(np.abs(tail) ** 2) / half))


def legendre_antiderivative_vander(x: np.ndarray, n: int) -> np.ndarray:
    """Matrix M[l, k] = int_{-1}^{x_l} P_k(s) ds for k < n."""
    x = np.asarray(x, dtype=float)
    vander = npleg.legvander(x, n)
    out = np.empty((x.shape[0], n))
    out[:, 0] = x + 1.0
    for k in range(1, n):
        out[:, k] = (vander[:, k + 1] - vander[:, k - 1]) / (2.0 * k + 1.0)
    return out
