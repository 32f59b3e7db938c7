#!/usr/bin/env python3
"""Self-convergence and buffer-factor studies on the oscillatory interface
(amplitude 2, envelope 0.05, b = 2), m = 3, E = 2, source (0, 3)."""

from __future__ import annotations

import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from edgewave import cli  # noqa: E402

OUT = ROOT / "out" / "convergence"


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    config = {
        "m1": 3.0, "m2": 3.0, "energy": 2.0,
        "curve": {"family": "gauss_sine",
                  "params": {"amplitude": 2.0, "envelope": 0.05,
                             "frequency": 2.0, "phase": 0.4}},
        "window": [-24.95, 25.25],
        "sources": [{"location": [0.0, 3.0], "strength": [1.0, 0.0]}],
    }
    cfg_path = OUT / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2))
    rc = cli.main(["converge", "--config", str(cfg_path), "--out", str(OUT / "nc"),
                   "--nc-list", "32,64,128,256,512", "--probes", "1.0,-3.0"])
    if rc:
        return rc
    rc = cli.main(["converge", "--config", str(cfg_path), "--out", str(OUT / "tau"),
                   "--tau-list", "0.125,0.25,0.5,0.75,1.0,1.5,2.0",
                   "--ncmax", "64", "--probes", "1.0,-3.0"])
    if rc:
        return rc
    try:
        from edgewave_viz import cli as viz_cli
    except ImportError:
        return 0
    viz_cli.main(["--input", str(OUT / "nc" / "convergence.csv"),
                  "--kind", "convergence", "--out", str(OUT / "nc.png")])
    viz_cli.main(["--input", str(OUT / "tau" / "convergence.csv"),
                  "--kind", "convergence", "--out", str(OUT / "tau.png")])
    return 0


if __name__ == "__main__":
    sys.exit(main())
