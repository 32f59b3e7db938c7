"""Secondary acceptance: all four figure kinds render from real solver
outputs, and rendering is byte-stable across runs."""

import json

import pytest

edgewave_cli = pytest.importorskip("edgewave.cli")

from edgewave_viz import plots  # noqa: E402
from edgewave_viz.plots import FigureSpec  # noqa: E402

FLAT_CONFIG = {
    "m1": 2.0, "m2": 2.0, "energy": 1.0,
    "curve": {"family": "flat", "params": {}},
    "window": [-19.3, 19.3],
    "n_chunks": 16,
    "sources": [{"location": [0.0, 2.5], "strength": [1.0, 0.0]}],
}

SCATTER_CONFIG = {
    "m1": 4.0, "m2": 4.0, "energy": 1.0,
    "curve": {"family": "gauss_sine",
              "params": {"amplitude": 2.0, "envelope": 0.05,
                         "frequency": 2.0, "phase": 0.4}},
    "sources": [{"location": [-15.0, 1.0], "strength": [1.0, 0.0]}],
    "resolution_tol": 1e-8,
    "gmres_tol": 1e-8,
}


@pytest.fixture(scope="module")
def demo_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo")
    cfg = out / "config.json"
    cfg.write_text(json.dumps(FLAT_CONFIG))
    assert edgewave_cli.main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    assert edgewave_cli.main(["grid", "--config", str(cfg), "--out", str(out),
                              "--grid=-8,8,33,-4,4,17"]) == 0
    assert edgewave_cli.main(["converge", "--config", str(cfg), "--out", str(out),
                              "--nc-list", "16,32,48",
                              "--probes", "1.5,2.0;0.7,-1.1"]) == 0
    scfg = out / "scatter_config.json"
    scfg.write_text(json.dumps(SCATTER_CONFIG))
    assert edgewave_cli.main(["scatter", "--config", str(scfg), "--out", str(out),
                              "--b-grid", "0.5,2.0"]) == 0
    return out


def test_criterion_11_all_kinds_render_byte_stable(demo_outputs):
    out = demo_outputs
    specs = [
        FigureSpec("field", str(out / "field.csv"), "",
                   interface_path=str(out / "interface.csv")),
        FigureSpec("densities", str(out / "densities.csv"), ""),
        FigureSpec("convergence", str(out / "convergence.csv"), ""),
        FigureSpec("sweep", str(out / "sweep.csv"), ""),
    ]
    for spec in specs:
        img1 = out / f"{spec.kind}_1.png"
        img2 = out / f"{spec.kind}_2.png"
        spec.output_path = str(img1)
        plots.render(spec)
        spec.output_path = str(img2)
        plots.render(spec)
        assert img1.stat().st_size > 1000
        assert img1.read_bytes() == img2.read_bytes(), spec.kind
    print("\n[PASS] criterion 11: four figure kinds rendered, byte-stable")
