#!/usr/bin/env python3
"""Freeze Sommerfeld-oracle probe values for the flat-interface reference case.

Values are computed at quadrature tolerance 1e-13 and cross-checked against a
1e-10 run (self-agreement must be below 1e-9 in absolute value).
"""

from __future__ import annotations

import json
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))
from edgewave import flatlab  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "sommerfeld_probes.json"


def main() -> None:
    m, energy = 2.0, 1.0
    src = [0.0, 2.5]
    probes_xy = [[1.5, 2.0], [-2.3, 1.7], [0.7, -1.1], [3.1, -0.6]]
    vals_hi = flatlab.sommerfeld_field(np.array(probes_xy), np.array(src), m, energy,
                                       tol=1e-13)
    vals_lo = flatlab.sommerfeld_field(np.array(probes_xy), np.array(src), m, energy,
                                       tol=1e-10)
    agree = float(np.max(np.abs(vals_hi - vals_lo)))
    assert agree < 1e-9, agree
    payload = {
        "m": m,
        "E": energy,
        "src": src,
        "self_agreement": agree,
        "probes": [
            [x, y, v.real, v.imag]
            for (x, y), v in zip(probes_xy, vals_hi)
        ],
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(payload, indent=2))
    print(f"wrote {OUT} (self-agreement {agree:.2e})")


if __name__ == "__main__":
    main()
