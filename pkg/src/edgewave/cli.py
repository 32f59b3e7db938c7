"""Command-line driver: solve, grid, converge, scatter, selftest.

Exit codes: 0 ok, 2 config error, 3 convergence failure, 4 I/O error.
Set EDGEWAVE_THREADS to pin the BLAS thread count (read at startup).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__, flatlab, geom, scatter as sc, solver as slv
from .solver import ConfigError, ProblemConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

SCHEMA_VERSION = 1


def _apply_thread_env():
    n = os.environ.get("EDGEWAVE_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _load_config(path, overrides) -> ProblemConfig:
    with open(path) as fh:
        data = json.load(fh)
    if overrides.get("tol") is not None:
        data["gmres_tol"] = overrides["tol"]
    if overrides.get("tau") is not None:
        data["buffer_tau"] = overrides["tau"]
    if overrides.get("ncmax") is not None:
        data["n_chunks"] = overrides["ncmax"]
    if overrides.get("serial") is not None:
        data["serial"] = overrides["serial"]
    return ProblemConfig.from_dict(data)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])


def _write_densities(sol, path):
    bnd = sol.boundary
    if sol.equal_mass:
        rho = bnd.extend_core(sol.rho_core)
    else:
        rho = sol.rho_full
    rows = []
    for j in range(bnd.n_over):
        rows.append([
            bnd.t[j], bnd.arc[j],
            rho[j].real, rho[j].imag,
            sol.mu_full[j].real, sol.mu_full[j].imag,
            int(bnd.is_buffer_node[j]),
        ])
    _write_csv(path, ["t", "arc", "rho_re", "rho_im", "mu_re", "mu_im", "is_buffer"], rows)


def _write_manifest(out_dir, command, config, files, timings):
    manifest = {
        "command": command,
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "outputs": sorted(str(f) for f in files),
        "timings": {k: float(v) for k, v in timings.items()},
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path


def cmd_solve(args) -> int:
    config = _load_config(args.config, vars(args))
    os.makedirs(args.out, exist_ok=True)
    t0 = time.perf_counter()
    sol = slv.solve(config)
    if not sol.gmres_report.converged:
        print("error: GMRES did not converge", file=sys.stderr)
        return EXIT_CONVERGENCE
    diag = slv.diagnostics(sol)
    files = []
    dens_path = os.path.join(args.out, "densities.csv")
    _write_densities(sol, dens_path)
    files.append(dens_path)
    report = {
        "config": config.to_dict(),
        "diagnostics": diag,
        "gmres": {
            "iterations": sol.gmres_report.iterations,
            "converged": sol.gmres_report.converged,
            "residual_history": sol.gmres_report.residuals,
        },
        "n_core_chunks": sol.boundary.n_core_chunks,
        "n_over": sol.boundary.n_over,
        "window": [sol.boundary.a, sol.boundary.b],
        "timings": {k: float(v) for k, v in sol.timings.items()},
    }
    rep_path = os.path.join(args.out, "report.json")
    with open(rep_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    files.append(rep_path)
    sol.timings["total"] = time.perf_counter() - t0
    files.append(_write_manifest(args.out, "solve", config, files, sol.timings))
    print(f"solve: n_c={sol.boundary.n_core_chunks} iters={sol.gmres_report.iterations} "
          f"outputs in {args.out}")
    return EXIT_OK


def _parse_grid(spec):
    parts = [float(v) for v in spec.split(",")]
    if len(parts) != 6:
        raise ConfigError("grid: expected x0,x1,nx,y0,y1,ny")
    x0, x1, nx, y0, y1, ny = parts
    return x0, x1, int(nx), y0, y1, int(ny)


def cmd_grid(args) -> int:
    config = _load_config(args.config, vars(args))
    x0, x1, nx, y0, y1, ny = _parse_grid(args.grid)
    os.makedirs(args.out, exist_ok=True)
    sol = slv.solve(config)
    if not sol.gmres_report.converged:
        return EXIT_CONVERGENCE
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    bnd = sol.boundary
    dist = geom.distance_to_curve(bnd.curve, pts, bnd.t)
    masked = dist < 1e-8
    for s in config.sources:
        loc = np.asarray(s.location, dtype=float)
        masked |= np.hypot(pts[:, 0] - loc[0], pts[:, 1] - loc[1]) < 1e-8
    vals = np.full(pts.shape[0], np.nan + 0j)
    ok = ~masked
    t_eval = time.perf_counter()
    if np.any(ok):
        vals[ok] = slv.eval_field(sol, pts[ok])
    sol.timings["evaluation"] = time.perf_counter() - t_eval
    rows = []
    for p, v, msk in zip(pts, vals, masked):
        rows.append([p[0], p[1],
                     0.0 if msk else v.real, 0.0 if msk else v.imag,
                     0.0 if msk else abs(v), int(msk)])
    field_path = os.path.join(args.out, "field.csv")
    _write_csv(field_path, ["x", "y", "re_u", "im_u", "abs_u", "masked"], rows)
    tline = np.linspace(bnd.a_buf, bnd.b_buf, 2000)
    curve_pts = bnd.curve.point(tline)
    iface_path = os.path.join(args.out, "interface.csv")
    _write_csv(iface_path, ["t", "x", "y"],
               [[t, p[0], p[1]] for t, p in zip(tline, curve_pts)])
    _write_manifest(args.out, "grid", config, [field_path, iface_path], sol.timings)
    print(f"grid: {nx}x{ny} field written to {field_path} ({int(np.sum(masked))} masked)")
    return EXIT_OK


def _parse_list(spec, cast=float):
    return [cast(v) for v in spec.split(",") if v.strip()]


def cmd_converge(args) -> int:
    config = _load_config(args.config, vars(args))
    os.makedirs(args.out, exist_ok=True)
    probes = []
    for chunk in args.probes.split(";"):
        x, y = (float(v) for v in chunk.split(","))
        probes.append([x, y])
    probes = np.asarray(probes)
    import dataclasses

    rows = []
    if args.nc_list:
        ladder = _parse_list(args.nc_list, int)
        if len(ladder) < 2:
            print("error: ladder needs at least 2 entries", file=sys.stderr)
            return EXIT_CONFIG
        sols = {}
        for n_c in ladder:
            cfg = dataclasses.replace(config, n_chunks=n_c)
            sols[n_c] = slv.solve(cfg)
            if not sols[n_c].gmres_report.converged:
                return EXIT_CONVERGENCE
        n_ref = max(ladder)
        use_analytic = (config.curve_family == "flat" and config.m1 == config.m2)
        if use_analytic:
            src = config.sources[0]
            u_ref = flatlab.sommerfeld_field(
                probes, np.asarray(src.location), config.m1, config.energy,
                strength=src.strength)
        else:
            u_ref = slv.eval_field(sols[n_ref], probes)
        for n_c in ladder:
            u = slv.eval_field(sols[n_c], probes)
            err = np.abs(u - u_ref) / np.abs(u_ref)
            rows.append([n_c, float(np.max(err))] + [float(e) for e in err])
        header = ["n_c", "max_rel_err"] + [f"err_probe{i}" for i in range(len(probes))]
    else:
        taus = _parse_list(args.tau_list)
        if len(taus) < 2:
            print("error: ladder needs at least 2 entries", file=sys.stderr)
            return EXIT_CONFIG
        use_analytic = (config.curve_family == "flat" and config.m1 == config.m2)
        if use_analytic:
            src = config.sources[0]
            u_ref = flatlab.sommerfeld_field(
                probes, np.asarray(src.location), config.m1, config.energy,
                strength=src.strength)
        else:
            ref_cfg = dataclasses.replace(config, buffer_tau=max(max(taus), 1.0))
            u_ref = slv.eval_field(slv.solve(ref_cfg), probes)
        for tau in taus:
            cfg = dataclasses.replace(config, buffer_tau=tau)
            sol = slv.solve(cfg)
            if not sol.gmres_report.converged:
                return EXIT_CONVERGENCE
            u = slv.eval_field(sol, probes)
            err = np.abs(u - u_ref) / np.abs(u_ref)
            rows.append([tau, float(np.max(err))] + [float(e) for e in err])
        header = ["tau", "max_rel_err"] + [f"err_probe{i}" for i in range(len(probes))]
    path = os.path.join(args.out, "convergence.csv")
    _write_csv(path, header, rows)
    _write_manifest(args.out, "converge", config, [path], {})
    print(f"converge: table written to {path}")
    return EXIT_OK


def cmd_scatter(args) -> int:
    config = _load_config(args.config, vars(args))
    os.makedirs(args.out, exist_ok=True)
    if ":" in args.b_grid:
        lo, hi, num = args.b_grid.split(":")
        b_values = np.linspace(float(lo), float(hi), int(num))
    else:
        b_values = _parse_list(args.b_grid)
    if any(b < 0 for b in b_values):
        print("error: b grid must be nonnegative", file=sys.stderr)
        return EXIT_CONFIG
    results, failures, _ = sc.sweep_b(config, b_values)
    path = os.path.join(args.out, "sweep.csv")
    _write_csv(path, sc.SWEEP_COLUMNS, [r.as_row() for r in results])
    if failures:
        fail_path = os.path.join(args.out, "sweep_failures.json")
        with open(fail_path, "w") as fh:
            json.dump([{"b": b, "error": e} for b, e in failures], fh, indent=2)
        print(f"scatter: {len(failures)} solves failed; see {fail_path}", file=sys.stderr)
    _write_manifest(args.out, "scatter", config, [path], {})
    print(f"scatter: {len(results)} points written to {path}")
    return EXIT_OK if not failures else EXIT_CONVERGENCE


def cmd_selftest(args) -> int:
    """Quick flat-interface solve against the Sommerfeld oracle."""
    config = ProblemConfig(
        m1=2.0, m2=2.0, energy=1.0, curve_family="flat",
        sources=[{"location": [0.0, 2.5]}], n_chunks=48,
    )
    sol = slv.solve(config)
    probes = np.array([[1.5, 2.0], [-2.3, 1.7], [0.7, -1.1], [3.1, -0.6]])
    u = slv.eval_field(sol, probes)
    ref = flatlab.sommerfeld_field(probes, np.array([0.0, 2.5]), 2.0, 1.0)
    err = float(np.max(np.abs(u - ref) / np.abs(ref)))
    ok = err < 1e-8 and sol.gmres_report.converged
    print(f"selftest: flat-interface field error {err:.3e} -> {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CONVERGENCE


def build_parser():
    p = argparse.ArgumentParser(prog="edgewave",
                                description="Interface-guided wave solver")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="JSON problem config")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--serial", action="store_true", default=None,
                        help="force deterministic serial mode")
        sp.add_argument("--tol", type=float, default=None, help="override GMRES tol")
        sp.add_argument("--tau", type=float, default=None, help="override buffer factor")
        sp.add_argument("--ncmax", type=int, default=None, help="override chunk count")

    sp = sub.add_parser("solve", help="solve and write densities/report")
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("grid", help="evaluate the field on a rectangular grid")
    common(sp)
    sp.add_argument("--grid", required=True, help="x0,x1,nx,y0,y1,ny")
    sp.set_defaults(func=cmd_grid)

    sp = sub.add_parser("converge", help="self-convergence / tau ladder")
    common(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--nc-list", help="comma-separated chunk counts")
    g.add_argument("--tau-list", help="comma-separated buffer factors")
    sp.add_argument("--probes", default="1.0,2.0", help="x,y;x,y;... probe points")
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("scatter", help="reflection/transmission sweep over b")
    common(sp)
    sp.add_argument("--b-grid", default="0:3:61", help="lo:hi:num or comma list")
    sp.set_defaults(func=cmd_scatter)

    sp = sub.add_parser("selftest", help="quick oracle check")
    common(sp, needs_config=False)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    _apply_thread_env()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"config error: invalid JSON ({exc})", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
