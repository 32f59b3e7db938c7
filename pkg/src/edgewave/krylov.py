"""Matrix-free full GMRES with modified Gram-Schmidt and reorthogonalization."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np


@dataclass
class GmresReport:
    iterations: int
    residuals: list = field(default_factory=list)
    converged: bool = False
    wall_time: float = 0.0


def gmres(apply_op, rhs: np.ndarray, tol: float = 1e-12, max_iter: int = 400):
    """Solve apply_op(x) = rhs to relative residual tol; full (non-restarted).

    Returns (x, GmresReport); on non-convergence the best iterate is
    returned with converged=False.
    """
    if tol <= 0:
        raise ValueError("gmres tol must be > 0")
    t_start = time.perf_counter()
    rhs = np.asarray(rhs, dtype=complex)
    n = rhs.shape[0]
    b_norm = np.linalg.norm(rhs)
    report = GmresReport(iterations=0)
    if b_norm == 0.0:
        report.converged = True
        report.wall_time = time.perf_counter() - t_start
        return np.zeros(n, dtype=complex), report

    max_iter = min(max_iter, n)
    basis = np.zeros((max_iter + 1, n), dtype=complex)
    hess = np.zeros((max_iter + 1, max_iter), dtype=complex)
    cs = np.zeros(max_iter, dtype=complex)
    sn = np.zeros(max_iter, dtype=complex)
    g = np.zeros(max_iter + 1, dtype=complex)

    basis[0] = rhs / b_norm
    g[0] = b_norm
    k_done = 0
    for k in range(max_iter):
        w = apply_op(basis[k])
        # modified Gram-Schmidt with one reorthogonalization pass
        for j in range(k + 1):
            h = np.vdot(basis[j], w)
            hess[j, k] = h
            w = w - h * basis[j]
        for j in range(k + 1):
            corr = np.vdot(basis[j], w)
            hess[j, k] += corr
            w = w - corr * basis[j]
        hnorm = np.linalg.norm(w)
        hess[k + 1, k] = hnorm

        # apply accumulated Givens rotations to the new column
        for j in range(k):
            temp = cs[j] * hess[j, k] + sn[j] * hess[j + 1, k]
            hess[j + 1, k] = -np.conj(sn[j]) * hess[j, k] + np.conj(cs[j]) * hess[j + 1, k]
            hess[j, k] = temp
        # new rotation eliminating the (real, nonnegative) subdiagonal hnorm
        h0 = hess[k, k]
        r = np.sqrt(abs(h0) ** 2 + hnorm**2)
        if r == 0.0:
            c_k, s_k = 1.0 + 0.0j, 0.0 + 0.0j
        elif h0 == 0.0:
            c_k, s_k = 0.0 + 0.0j, 1.0 + 0.0j
        else:
            c_k = abs(h0) / r
            s_k = (h0 / abs(h0)) * hnorm / r
        cs[k], sn[k] = c_k, s_k
        hess[k, k] = c_k * h0 + s_k * hnorm
        hess[k + 1, k] = 0.0
        g[k + 1] = -np.conj(s_k) * g[k]
        g[k] = c_k * g[k]

        rel = abs(g[k + 1]) / b_norm
        report.residuals.append(float(rel))
        k_done = k + 1
        if hnorm <= 1e-14 * b_norm:  # happy breakdown: exact solution found
            report.converged = True
            break
        basis[k + 1] = w / hnorm
        if rel <= tol:
            report.converged = True
            break

    report.iterations = k_done
    y = np.linalg.solve(hess[:k_done, :k_done], g[:k_done]) if k_done else np.zeros(0)
    x = basis[:k_done].T @ y if k_done else np.zeros(n, dtype=complex)
    report.wall_time = time.perf_counter() - t_start
    return x, report
