"""End-to-end assembly: incident fields, solve, field evaluation, diagnostics."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import geom, potentials
from .kernels import green, grad_green
from .krylov import GmresReport, gmres
from .ops import MediumParams, SurfaceOperators

KERNEL_PANEL_EFOLDS = 3.5  # max omega * panel-arc; keeps the near splitting conditioned


class ConfigError(ValueError):
    pass


@dataclass
class Source:
    location: tuple
    strength: complex = 1.0 + 0.0j
    side: int | None = None  # +1 for Omega_2 (above), -1 for Omega_1, None = auto

    def resolved_side(self, curve):
        if self.side in (1, -1):
            return self.side
        return int(curve.side(np.asarray(self.location, dtype=float)[None, :])[0])


@dataclass
class ProblemConfig:
    m1: float
    m2: float
    energy: float
    curve_family: str = "flat"
    curve_params: dict = field(default_factory=dict)
    window: tuple | None = None
    resolution_tol: float = 1e-12
    n_chunks: int | None = None
    buffer_tau: float = 1.0
    buffer_tol: float = 1e-16
    trunc_tol: float = 1e-16
    sources: list = field(default_factory=list)
    gmres_tol: float = 1e-12
    gmres_max_iter: int = 400
    serial: bool = True

    def __post_init__(self):
        if self.m1 <= 0 or self.m2 <= 0:
            raise ConfigError("m1, m2: masses must be positive")
        if self.energy == 0 or abs(self.energy) >= min(self.m1, self.m2):
            raise ConfigError("energy: require 0 < |E| < min(m1, m2)")
        if self.resolution_tol <= 0:
            raise ConfigError("resolution_tol: must be positive")
        if self.buffer_tau <= 0:
            raise ConfigError("buffer_tau: must be positive")
        if not (0 < self.buffer_tol < 1) or not (0 < self.trunc_tol < 1):
            raise ConfigError("buffer_tol/trunc_tol: must lie in (0, 1)")
        if self.gmres_tol <= 0:
            raise ConfigError("gmres_tol: must be positive")
        self.sources = [s if isinstance(s, Source) else _source_from_dict(s)
                        for s in self.sources]
        if not self.sources and self.window is None:
            raise ConfigError("sources: need at least one source or an explicit window")
        if self.window is not None:
            a, b = self.window
            if not (a < b):
                raise ConfigError("window: require a < b")

    @property
    def medium(self) -> MediumParams:
        return MediumParams(self.m1, self.m2, self.energy)

    def build_curve(self):
        return geom.build_curve(self.curve_family, self.curve_params)

    def to_dict(self) -> dict:
        return {
            "m1": self.m1, "m2": self.m2, "energy": self.energy,
            "curve": {"family": self.curve_family, "params": dict(self.curve_params)},
            "window": list(self.window) if self.window is not None else None,
            "resolution_tol": self.resolution_tol,
            "n_chunks": self.n_chunks,
            "buffer_tau": self.buffer_tau,
            "buffer_tol": self.buffer_tol,
            "trunc_tol": self.trunc_tol,
            "sources": [
                {"location": list(map(float, s.location)),
                 "strength": [float(np.real(s.strength)), float(np.imag(s.strength))],
                 "side": s.side if s.side is not None else "auto"}
                for s in self.sources
            ],
            "gmres_tol": self.gmres_tol,
            "gmres_max_iter": self.gmres_max_iter,
            "serial": self.serial,
        }

    @staticmethod
    def from_dict(data: dict) -> "ProblemConfig":
        try:
            curve = data.get("curve", {"family": "flat", "params": {}})
            window = data.get("window")
            return ProblemConfig(
                m1=float(data["m1"]), m2=float(data["m2"]),
                energy=float(data["energy"]),
                curve_family=curve.get("family", "flat"),
                curve_params=dict(curve.get("params", {})),
                window=tuple(window) if window is not None else None,
                resolution_tol=float(data.get("resolution_tol", 1e-12)),
                n_chunks=data.get("n_chunks"),
                buffer_tau=float(data.get("buffer_tau", 1.0)),
                buffer_tol=float(data.get("buffer_tol", 1e-16)),
                trunc_tol=float(data.get("trunc_tol", 1e-16)),
                sources=data.get("sources", []),
                gmres_tol=float(data.get("gmres_tol", 1e-12)),
                gmres_max_iter=int(data.get("gmres_max_iter", 400)),
                serial=bool(data.get("serial", True)),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config field: {exc.args[0]}") from exc

    @staticmethod
    def from_json(path) -> "ProblemConfig":
        with open(path) as fh:
            return ProblemConfig.from_dict(json.load(fh))


def _source_from_dict(d: dict) -> Source:
    try:
        loc = tuple(float(v) for v in d["location"])
    except (KeyError, TypeError) as exc:
        raise ConfigError("sources[].location: expected [x, y]") from exc
    stg = d.get("strength", [1.0, 0.0])
    if isinstance(stg, (int, float)):
        strength = complex(stg)
    else:
        strength = complex(float(stg[0]), float(stg[1]))
    side = d.get("side", "auto")
    side = None if side in ("auto", None) else int(side)
    if side not in (None, 1, -1):
        raise ConfigError("sources[].side: must be 'auto', 1, or -1")
    return Source(location=loc, strength=strength, side=side)


# ----------------------------------------------------------------------


@dataclass
class Solution:
    config: ProblemConfig
    medium: MediumParams
    boundary: geom.Boundary
    operators: SurfaceOperators
    rho_core: np.ndarray | None  # single-mass unknown
    sigma: np.ndarray | None  # two-mass unknown, stacked (2 n_core,)
    mu_full: np.ndarray
    rho_full: np.ndarray | None  # double-layer density (two-mass only)
    gmres_report: GmresReport
    timings: dict

    @property
    def equal_mass(self):
        return self.medium.equal_mass


def _source_terms(config: ProblemConfig, curve):
    out = []
    for s in config.sources:
        loc = np.asarray(s.location, dtype=float)
        side = s.resolved_side(curve)
        out.append((loc, complex(s.strength), side))
    return out


def incident_trace(config: ProblemConfig, boundary: geom.Boundary):
    """Right-hand side of the boundary system on the core nodes.

    Single mass: 2 m u_i.  Two masses: the pair
    ([[n.grad u_i]] + 2 mbar <u_i>, -[[u_i]]) with the average convention
    for u_i on the interface.
    """
    med = config.medium
    curve = boundary.curve
    pos = boundary.pos[boundary.core]
    nrm = boundary.normal[boundary.core]
    terms = _source_terms(config, curve)
    if terms:
        locs = np.array([t[0] for t in terms])
        d = geom.distance_to_curve(curve, locs, boundary.t)
        if np.min(d) < 1e-8:
            raise ConfigError("sources: a source lies on the interface")
    if med.equal_mass:
        ui = np.zeros(pos.shape[0], dtype=complex)
        for loc, stg, _ in terms:
            ui += stg * green(med.omega1, pos, loc[None, :])
        return 2.0 * med.m1 * ui
    up = np.zeros(pos.shape[0], dtype=complex)  # limit from Omega_2
    dn = np.zeros(pos.shape[0], dtype=complex)  # limit from Omega_1
    dup = np.zeros(pos.shape[0], dtype=complex)
    ddn = np.zeros(pos.shape[0], dtype=complex)
    for loc, stg, side in terms:
        if side > 0:
            up += stg * green(med.omega2, pos, loc[None, :])
            g = grad_green(med.omega2, pos, loc[None, :])
            dup += stg * (g[:, 0] * nrm[:, 0] + g[:, 1] * nrm[:, 1])
        else:
            dn += stg * green(med.omega1, pos, loc[None, :])
            g = grad_green(med.omega1, pos, loc[None, :])
            ddn += stg * (g[:, 0] * nrm[:, 0] + g[:, 1] * nrm[:, 1])
    jump_du = dup - ddn
    jump_u = up - dn
    avg_u = 0.5 * (up + dn)
    r_mu = jump_du + 2.0 * med.mbar * avg_u
    r_rho = -jump_u
    return np.concatenate([r_mu, r_rho])


def build_boundary(config: ProblemConfig):
    med = config.medium
    curve = config.build_curve()
    omega_max = max(med.omega1, med.omega2)
    max_arc = KERNEL_PANEL_EFOLDS / omega_max
    if config.window is not None:
        a, b = config.window
    else:
        locs = np.array([s.location for s in config.sources], dtype=float)
        a, b = geom.suggest_window(curve, locs, med.omega0, config.resolution_tol)
    return geom.build_boundary(
        curve, a, b, config.resolution_tol, config.buffer_tol, config.buffer_tau,
        med.omega0, config.energy, med.m0,
        n_chunks=config.n_chunks,
        max_arc=None if config.n_chunks is not None else max_arc,
    )


def solve(config: ProblemConfig) -> Solution:
    med = config.medium
    times = {}
    t0 = time.perf_counter()
    boundary = build_boundary(config)
    times["chunking"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    so = SurfaceOperators(boundary, med, eps_trunc=config.trunc_tol)
    _ = so.skel  # force stencil/treecode assembly into the setup phase
    _ = so._kink_delta
    if med.equal_mass:
        _ = so.op_S
    else:
        for name in ("A11", "A12", "A21", "A22"):
            so._layer_op(name)
    times["operator_setup"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rhs = incident_trace(config, boundary)
    times["rhs"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if med.equal_mass:
        x, report = gmres(so.apply_LP, rhs, tol=config.gmres_tol,
                          max_iter=config.gmres_max_iter)
        rho_core, sigma = x, None
        mu_full = so.apply_P(rho_core)
        rho_full = None
    else:
        x, report = gmres(so.apply_L2P2, rhs, tol=config.gmres_tol,
                          max_iter=config.gmres_max_iter)
        sigma, rho_core = x, None
        mu_full, rho_full = so.apply_P2(sigma)
    times["gmres"] = time.perf_counter() - t0
    times["gmres_per_iter"] = times["gmres"] / max(report.iterations, 1)

    return Solution(
        config=config, medium=med, boundary=boundary, operators=so,
        rho_core=rho_core, sigma=sigma, mu_full=mu_full, rho_full=rho_full,
        gmres_report=report, timings=times,
    )


# ----------------------------------------------------------------------
# Field evaluation


def incident_field(config: ProblemConfig, curve, targets, grad=False):
    med = config.medium
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    terms = _source_terms(config, curve)
    out = np.zeros((targets.shape[0], 2) if grad else targets.shape[0], dtype=complex)
    if med.equal_mass:
        for loc, stg, _ in terms:
            if grad:
                out += stg * grad_green(med.omega1, targets, loc[None, :])
            else:
                out += stg * green(med.omega1, targets, loc[None, :])
        return out
    sides = curve.side(targets)
    for loc, stg, side in terms:
        sel = sides == side
        if not np.any(sel):
            continue
        omega = med.omega2 if side > 0 else med.omega1
        if grad:
            out[sel] += stg * grad_green(omega, targets[sel], loc[None, :])
        else:
            out[sel] += stg * green(omega, targets[sel], loc[None, :])
    return out


def eval_field(sol: Solution, targets, grad=False):
    """u = u_i + u_s (or its gradient) at off-interface targets."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    bnd = sol.boundary
    d = geom.distance_to_curve(bnd.curve, targets, bnd.t)
    if np.any(d < 1e-10):
        raise ValueError("eval_field: target lies on the interface")
    med = sol.medium
    out = incident_field(sol.config, bnd.curve, targets, grad=grad)
    if med.equal_mass:
        out = out + potentials.eval_layer(bnd, sol.mu_full, med.omega1, targets,
                                          "S", grad=grad)
        return out
    sides = bnd.curve.side(targets)
    for side, omega in ((1, med.omega2), (-1, med.omega1)):
        sel = sides == side
        if not np.any(sel):
            continue
        out[sel] += potentials.eval_layer(bnd, sol.rho_full, omega, targets[sel],
                                          "D", grad=grad)
        out[sel] += potentials.eval_layer(bnd, sol.mu_full, omega, targets[sel],
                                          "S", grad=grad)
    return out


# ----------------------------------------------------------------------
# Diagnostics


def density_fourier_transform(sol: Solution, xi: float):
    """rho_hat(xi) = int exp(-i xi arc) rho d(arc) over the core window."""
    bnd = sol.boundary
    core = bnd.core
    if sol.equal_mass:
        dens = sol.rho_core
    else:
        # the combination whose surface-wave response drives the tails
        n = bnd.n_core
        dens = (sol.sigma[:n] - sol.medium.delta * sol.sigma[n:]) / (
            1.0 + sol.medium.delta**2
        )
    return np.sum(np.exp(-1j * xi * bnd.arc[core]) * dens * bnd.weight[core])


def _richardson3(values):
    a, b, c = values
    return (4.0 * (2.0 * c - b) - (2.0 * b - a)) / 3.0


def diagnostics(sol: Solution, n_points: int = 10, stencil_h: float = 0.05):
    """Jump-condition, PDE, outgoing-asymptotics, and tail diagnostics."""
    bnd = sol.boundary
    med = sol.medium
    curve = bnd.curve
    cfg = sol.config

    # (i) jump residuals via +-delta offsets with Richardson extrapolation
    span = bnd.b - bnd.a
    tps = np.linspace(bnd.a + 0.25 * span, bnd.b - 0.25 * span, n_points)
    worst_u = worst_du = 0.0
    scale_u = 0.0
    for tp in tps:
        x0 = curve.point(np.array([tp]))[0]
        nrm = curve.normal(np.array([tp]))[0]
        pan = next(p for p in bnd.panels if p.a <= tp <= p.b)
        deltas = np.array([1e-2, 5e-3, 2.5e-3]) * pan.arc_len
        vals_u, vals_du, vals_avg = [], [], []
        for dlt in deltas:
            pu = x0 + dlt * nrm
            pd = x0 - dlt * nrm
            uu = eval_field(sol, pu)[0]
            ud = eval_field(sol, pd)[0]
            gu = eval_field(sol, pu, grad=True)[0]
            gd = eval_field(sol, pd, grad=True)[0]
            vals_u.append(uu - ud)
            vals_du.append(np.dot(nrm, gu - gd))
            vals_avg.append(0.5 * (uu + ud))
        jump_u = _richardson3(vals_u)
        jump_du = _richardson3(vals_du)
        u_gamma = _richardson3(vals_avg)
        worst_u = max(worst_u, abs(jump_u))
        worst_du = max(worst_du, abs(jump_du + (med.m1 + med.m2) * u_gamma))
        scale_u = max(scale_u, abs(u_gamma))

    # (ii) PDE stencil residual, O(h^2) in h
    if cfg.sources:
        locs = np.array([s.location for s in cfg.sources], dtype=float)
        xc = np.array([np.mean(locs[:, 0]), np.max(np.abs(locs[:, 1])) + 2.0])
    else:
        xc = np.array([0.5 * (bnd.a + bnd.b), 2.0])
    side = int(curve.side(xc[None, :])[0])
    omega = med.omega2 if side > 0 else med.omega1

    def stencil_residual(h):
        offsets = np.array([[0.0, 0.0], [h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
        vals = eval_field(sol, xc[None, :] + offsets)
        lap = (vals[1] + vals[2] + vals[3] + vals[4] - 4.0 * vals[0]) / (h * h)
        return abs(-lap + omega**2 * vals[0]) / max(abs(vals[0]), 1e-300)

    res_h = stencil_residual(stencil_h)
    res_h2 = stencil_residual(0.5 * stencil_h)

    # (iii) outgoing asymptotics over the outer 10% of core nodes
    core = bnd.core
    arcs = bnd.arc[core]
    mu_core = sol.mu_full[core]
    n_tail = max(bnd.n_core // 10, 8)
    if sol.equal_mass:
        coef = med.m1**2 / med.energy
    else:
        coef = med.mbar**2 / med.energy
    rhat_p = density_fourier_transform(sol, med.energy)
    rhat_m = density_fourier_transform(sol, -med.energy)
    resid = []
    for idx, rhat, sign in ((np.arange(bnd.n_core - n_tail, bnd.n_core), rhat_p, 1),
                            (np.arange(0, n_tail), rhat_m, -1)):
        pred = coef * np.exp(1j * med.energy * sign * arcs[idx]) * rhat
        resid.append(np.abs(mu_core[idx] - pred))
    outgoing = float(np.max(np.concatenate(resid)) / np.max(np.abs(mu_core)))

    # (iv) density tail fraction (weighted L2 over outer 10% vs total)
    w = bnd.weight[core]
    dens = sol.rho_core if sol.equal_mass else sol.sigma[: bnd.n_core]
    tail_idx = np.concatenate([np.arange(0, n_tail),
                               np.arange(bnd.n_core - n_tail, bnd.n_core)])
    tail_fraction = float(np.sqrt(
        np.sum(w[tail_idx] * np.abs(dens[tail_idx]) ** 2)
        / np.sum(w * np.abs(dens) ** 2)
    ))

    return {
        "jump_value_residual": float(worst_u),
        "jump_derivative_residual": float(worst_du),
        "interface_value_scale": float(scale_u),
        "pde_residual_h": float(res_h),
        "pde_residual_h2": float(res_h2),
        "pde_order_ratio": float(res_h / max(res_h2, 1e-300)),
        "outgoing_residual": outgoing,
        "density_tail_fraction": tail_fraction,
        "gmres_iterations": sol.gmres_report.iterations,
        "gmres_final_residual": sol.gmres_report.residuals[-1]
        if sol.gmres_report.residuals else 0.0,
    }
