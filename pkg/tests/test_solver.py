"""Problem assembly, solve, field evaluation, and diagnostics."""

import dataclasses

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from edgewave import flatlab, solver
from edgewave.kernels import grad_green, green
from edgewave.solver import ConfigError, ProblemConfig

SRC = {"location": [0.0, 2.5], "strength": [1.0, 0.0]}
GS_PARAMS = {"amplitude": 2.0, "envelope": 0.05, "frequency": 2.0, "phase": 0.4}


def flat_config(**kw):
    base = dict(m1=2.0, m2=2.0, energy=1.0, curve_family="flat",
                sources=[dict(SRC)], window=(-19.3, 19.3), n_chunks=48)
    base.update(kw)
    return ProblemConfig(**base)


@pytest.fixture(scope="module")
def flat_solution():
    return solver.solve(flat_config())


class TestConfig:
    def test_validation_messages(self):
        with pytest.raises(ConfigError, match="energy"):
            flat_config(energy=2.5)
        with pytest.raises(ConfigError, match="m1, m2"):
            flat_config(m1=-1.0)
        with pytest.raises(ConfigError, match="buffer_tau"):
            flat_config(buffer_tau=0.0)
        with pytest.raises(ConfigError, match="window"):
            flat_config(window=(3.0, -3.0))
        with pytest.raises(ConfigError, match="sources"):
            ProblemConfig(m1=2.0, m2=2.0, energy=1.0, sources=[], window=None)

    def test_roundtrip_identity(self):
        cfg = flat_config(m2=3.0, curve_family="gauss_sine", curve_params=GS_PARAMS)
        echo = ProblemConfig.from_dict(cfg.to_dict())
        assert echo.to_dict() == cfg.to_dict()

    def test_source_side_auto(self):
        cfg = flat_config()
        curve = cfg.build_curve()
        assert cfg.sources[0].resolved_side(curve) == 1
        cfg2 = flat_config(sources=[{"location": [0.0, -2.5]}])
        assert cfg2.sources[0].resolved_side(curve) == -1


class TestIncidentTrace:
    def test_equal_mass_trace(self):
        cfg = flat_config()
        bnd = solver.build_boundary(cfg)
        rhs = solver.incident_trace(cfg, bnd)
        pos = bnd.pos[bnd.core]
        want = 2 * 2.0 * green(np.sqrt(3.0), pos, np.array([[0.0, 2.5]]))
        assert np.allclose(rhs, want, atol=1e-15)

    def test_two_mass_source_above(self):
        cfg = flat_config(m2=3.0)
        bnd = solver.build_boundary(cfg)
        rhs = solver.incident_trace(cfg, bnd)
        n = bnd.n_core
        pos = bnd.pos[bnd.core]
        w2 = np.sqrt(9.0 - 1.0)
        ui = green(w2, pos, np.array([[0.0, 2.5]]))
        # u_i vanishes in Omega_1, so [[u_i]] = trace of the Omega_2 field
        assert np.allclose(rhs[n:], -ui, atol=1e-15)
        gy = grad_green(w2, pos, np.array([[0.0, 2.5]]))[:, 1]
        assert np.allclose(rhs[:n], gy + 2 * 2.5 * 0.5 * ui, atol=1e-14)

    def test_trace_exponential_decay(self):
        cfg = flat_config(window=(-25.0, 25.0))
        bnd = solver.build_boundary(cfg)
        rhs = np.abs(solver.incident_trace(cfg, bnd))
        t = bnd.t[bnd.core]
        sel = t > 5.0
        # log |trace| ~ -omega * sqrt(t^2 + 2.5^2): fit the slope in t
        dist = np.hypot(t[sel], 2.5)
        slope = np.polyfit(dist, np.log(rhs[sel]), 1)[0]
        assert slope == pytest.approx(-np.sqrt(3.0), rel=0.05)

    def test_source_on_interface_rejected(self):
        cfg = flat_config(sources=[{"location": [1.0, 0.0]}])
        bnd = solver.build_boundary(cfg)
        with pytest.raises(ConfigError, match="interface"):
            solver.incident_trace(cfg, bnd)


class TestSolve:
    def test_zero_sources_zero_density(self):
        cfg = flat_config(sources=[], n_chunks=8)
        sol = solver.solve(cfg)
        assert np.all(sol.rho_core == 0)
        assert np.all(sol.mu_full == 0)
        assert sol.gmres_report.iterations == 0

    def test_flat_rho_matches_fft_oracle(self, flat_solution):
        sol = flat_solution
        grid = np.linspace(-60, 60, 2**14, endpoint=False)
        trace = green(np.sqrt(3.0), np.stack([grid, np.zeros_like(grid)], -1),
                      np.array([[0.0, 2.5]]))
        rho_fft = flatlab.flat_solve_fft(trace, grid, 2.0, 1.0)
        cs_r = CubicSpline(grid, rho_fft.real)
        cs_i = CubicSpline(grid, rho_fft.imag)
        tt = sol.boundary.t[sol.boundary.core]
        ref = cs_r(tt) + 1j * cs_i(tt)
        w = sol.boundary.weight[sol.boundary.core]
        l2 = np.sqrt(np.sum(w * np.abs(sol.rho_core - ref) ** 2)
                     / np.sum(w * np.abs(ref) ** 2))
        assert l2 < 1e-6

    def test_residual_contract(self, flat_solution):
        sol = flat_solution
        rhs = solver.incident_trace(sol.config, sol.boundary)
        res = np.linalg.norm(sol.operators.apply_LP(sol.rho_core) - rhs)
        assert res / np.linalg.norm(rhs) <= sol.config.gmres_tol * 1.001

    def test_mu_recomputable(self, flat_solution):
        sol = flat_solution
        mu = sol.operators.apply_P(sol.rho_core)
        assert np.max(np.abs(mu - sol.mu_full)) < 1e-13 * np.max(np.abs(mu))

    def test_density_tail_small_mu_oscillatory(self, flat_solution):
        sol = flat_solution
        bnd = sol.boundary
        rho_full = bnd.extend_core(sol.rho_core)
        buf_adjacent = np.abs(sol.rho_core[:16]).max()
        assert buf_adjacent / np.abs(sol.rho_core).max() < 1e-6
        mu_buf = sol.mu_full[bnd.is_buffer_node]
        assert np.abs(mu_buf).max() > 0.01 * np.abs(sol.mu_full).max()


class TestEvalField:
    def test_sommerfeld_probes(self, flat_solution):
        probes = np.array([[1.5, 2.0], [-2.3, 1.7], [0.7, -1.1], [3.1, -0.6]])
        u = solver.eval_field(flat_solution, probes)
        ref = flatlab.sommerfeld_field(probes, np.array([0.0, 2.5]), 2.0, 1.0)
        assert np.max(np.abs(u - ref) / np.abs(ref)) < 1e-6

    def test_linearity(self, flat_solution):
        cfg2 = flat_config(sources=[{"location": [0.0, 2.5], "strength": [2.0, 0.0]}])
        sol2 = solver.solve(cfg2)
        probes = np.array([[1.1, 0.9], [-0.5, -1.4]])
        u1 = solver.eval_field(flat_solution, probes)
        u2 = solver.eval_field(sol2, probes)
        assert np.max(np.abs(u2 - 2 * u1) / np.abs(u2)) < 1e-13

    def test_far_field_decay(self, flat_solution):
        ys = np.array([3.0, 5.0, 7.0, 9.0])
        u = solver.eval_field(flat_solution, np.stack([np.full_like(ys, 0.3), ys], -1))
        rates = np.diff(np.log(np.abs(u))) / np.diff(ys)
        # decay at least as fast as the bulk rate omega (guided part decays at m)
        assert np.all(rates < -0.95 * np.sqrt(3.0))

    def test_reciprocity(self):
        a = np.array([0.0, 2.5])
        b = np.array([1.0, -1.3])
        cfg_a = flat_config(sources=[{"location": list(a)}], n_chunks=96)
        cfg_b = flat_config(sources=[{"location": list(b)}], n_chunks=96)
        u_ab = solver.eval_field(solver.solve(cfg_a), b[None, :])[0]
        u_ba = solver.eval_field(solver.solve(cfg_b), a[None, :])[0]
        assert abs(abs(u_ab) - abs(u_ba)) / abs(u_ab) < 1e-10

    def test_target_on_interface_rejected(self, flat_solution):
        with pytest.raises(ValueError, match="interface"):
            solver.eval_field(flat_solution, np.array([[0.5, 0.0]]))


class TestDiagnostics:
    def test_flat_diagnostics(self, flat_solution):
        d = solver.diagnostics(flat_solution)
        assert d["jump_value_residual"] < 1e-5 * max(d["interface_value_scale"], 1.0)
        assert d["jump_derivative_residual"] < 1e-5
        assert 3.5 < d["pde_order_ratio"] < 4.5
        assert d["outgoing_residual"] < 1e-3
        assert d["density_tail_fraction"] < 1e-6

    def test_tau_invariance(self):
        probes = np.array([[1.5, 2.0], [0.7, -1.1]])
        vals = {}
        for tau in (0.75, 1.0, 1.5):
            sol = solver.solve(flat_config(buffer_tau=tau))
            vals[tau] = solver.eval_field(sol, probes)
        for tau in (0.75, 1.5):
            rel = np.max(np.abs(vals[tau] - vals[1.0]) / np.abs(vals[1.0]))
            assert rel < 1e-8


class TestTwoMassSolve:
    def test_curved_two_mass_jumps(self):
        cfg = ProblemConfig(
            m1=2.0, m2=3.0, energy=1.0,
            curve_family="gauss_sine", curve_params=GS_PARAMS,
            sources=[{"location": [0.0, 3.0]}],
            resolution_tol=1e-10, gmres_tol=1e-10,
        )
        sol = solver.solve(cfg)
        assert sol.gmres_report.converged
        d = solver.diagnostics(sol, n_points=6)
        assert d["jump_value_residual"] < 1e-4
        assert d["jump_derivative_residual"] < 1e-4
        assert 3.5 < d["pde_order_ratio"] < 4.5
