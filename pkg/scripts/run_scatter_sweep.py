#!/usr/bin/env python3
"""Reflection sweep over the interface frequency b (source (-40, 1), m=4, E=1).

Reproduces the R_L(b) transition: full transmission at small b, a sharp dip
near b = 1.87, and near-total reflection beyond b = 2.
"""

from __future__ import annotations

import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from edgewave import cli  # noqa: E402

OUT = ROOT / "out" / "scatter_sweep"


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    config = {
        "m1": 4.0, "m2": 4.0, "energy": 1.0,
        "curve": {"family": "gauss_sine",
                  "params": {"amplitude": 2.0, "envelope": 0.05,
                             "frequency": 2.0, "phase": 0.4}},
        "sources": [{"location": [-40.0, 1.0], "strength": [1.0, 0.0]}],
        "resolution_tol": 1e-10,
        "gmres_tol": 1e-10,
    }
    cfg_path = OUT / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2))
    rc = cli.main(["scatter", "--config", str(cfg_path), "--out", str(OUT),
                   "--b-grid", "0:3:61"])
    if rc:
        return rc
    try:
        from edgewave_viz import cli as viz_cli
    except ImportError:
        print("edgewave-viz not installed; skipping figure")
        return 0
    return viz_cli.main(["--input", str(OUT / "sweep.csv"), "--kind", "sweep",
                         "--out", str(OUT / "sweep.png")])


if __name__ == "__main__":
    sys.exit(main())
