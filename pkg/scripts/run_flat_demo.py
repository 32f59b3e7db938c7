#!/usr/bin/env python3
"""Flat-interface reference run: solve, verify against the Sommerfeld oracle,
and emit the CSV artifacts (plus PNGs when edgewave-viz is installed)."""

from __future__ import annotations

import json
import pathlib
import sys

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from edgewave import cli, flatlab, solver  # noqa: E402

OUT = ROOT / "out" / "flat_demo"


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    config = {
        "m1": 2.0, "m2": 2.0, "energy": 1.0,
        "curve": {"family": "flat", "params": {}},
        "window": [-19.3, 19.3],
        "n_chunks": 96,
        "sources": [{"location": [0.0, 2.5], "strength": [1.0, 0.0], "side": "auto"}],
    }
    cfg_path = OUT / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2))

    rc = cli.main(["solve", "--config", str(cfg_path), "--out", str(OUT)])
    if rc:
        return rc
    rc = cli.main(["grid", "--config", str(cfg_path), "--out", str(OUT),
                   "--grid=-12,12,161,-6,6,81"])
    if rc:
        return rc
    rc = cli.main(["converge", "--config", str(cfg_path), "--out", str(OUT),
                   "--nc-list", "16,32,64,128", "--probes",
                   "1.5,2.0;-2.3,1.7;0.7,-1.1;3.1,-0.6"])
    if rc:
        return rc

    sol = solver.solve(solver.ProblemConfig.from_json(cfg_path))
    probes = np.array([[1.5, 2.0], [-2.3, 1.7], [0.7, -1.1], [3.1, -0.6]])
    u = solver.eval_field(sol, probes)
    ref = flatlab.sommerfeld_field(probes, np.array([0.0, 2.5]), 2.0, 1.0)
    err = np.max(np.abs(u - ref) / np.abs(ref))
    print(f"max probe error vs Sommerfeld oracle: {err:.3e}")

    try:
        from edgewave_viz import cli as viz_cli
    except ImportError:
        print("edgewave-viz not installed; skipping figures")
        return 0
    viz_cli.main(["--input", str(OUT / "field.csv"), "--kind", "field",
                  "--interface", str(OUT / "interface.csv"),
                  "--out", str(OUT / "field.png")])
    viz_cli.main(["--input", str(OUT / "densities.csv"), "--kind", "densities",
                  "--out", str(OUT / "densities.png")])
    viz_cli.main(["--input", str(OUT / "convergence.csv"), "--kind", "convergence",
                  "--out", str(OUT / "convergence.png")])
    return 0


if __name__ == "__main__":
    sys.exit(main())
