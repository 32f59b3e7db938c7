"""Renderers against synthetic schema-valid inputs."""

import numpy as np
import pytest

from edgewave_viz import cli, plots
from edgewave_viz.plots import FigureSpec, SchemaError


def write_field_csv(path, nx=9, ny=7, mask_center=False, symmetric=True):
    xs = np.linspace(-2, 2, nx)
    ys = np.linspace(-1.5, 1.5, ny)
    rows = ["x,y,re_u,im_u,abs_u,masked"]
    for x in xs:
        for y in ys:
            u = np.exp(-(x**2 + (y - 0.4) ** 2)) * (1 if symmetric else 1 + 0.3 * x)
            masked = int(mask_center and abs(x) < 0.3 and abs(y) < 0.3)
            rows.append(f"{float(x)!r},{float(y)!r},{float(u)!r},0.0,{float(abs(u))!r},{masked}")
    path.write_text("\n".join(rows) + "\n")


def write_interface_csv(path):
    t = np.linspace(-2, 2, 50)
    rows = ["t,x,y"] + [f"{float(v)!r},{float(v)!r},0.0" for v in t]
    path.write_text("\n".join(rows) + "\n")


def write_densities_csv(path):
    t = np.linspace(-10, 10, 200)
    rho = np.exp(-(t**2) / 4)
    mu = np.cos(t)
    rows = ["t,arc,rho_re,rho_im,mu_re,mu_im,is_buffer"]
    for ti, r, m in zip(t, rho, mu):
        rows.append(f"{float(ti)!r},{float(ti)!r},{float(r)!r},0.0,{float(m)!r},0.0,{int(abs(ti) > 8)}")
    path.write_text("\n".join(rows) + "\n")


def write_convergence_csv(path, monotone=True):
    rows = ["n_c,max_rel_err,err_probe0"]
    errs = [1e-3, 1e-5, 1e-7, 1e-9] if monotone else [1e-3]
    for n, e in zip((16, 32, 64, 128), errs):
        rows.append(f"{n},{e!r},{e!r}")
    path.write_text("\n".join(rows) + "\n")


def write_sweep_csv(path):
    rows = [",".join(plots.SWEEP_COLUMNS)]
    for b in np.linspace(0, 3, 13):
        r = min(max(0.0, (b - 1) / 1.5), 1.0)
        vals = [float(b), float(r), float(1 - r), float(1 - r), 1.0, 0.0,
                float(np.sqrt(r)), 0.0, float(np.sqrt(1 - r)), 0.0]
        rows.append(",".join(map(repr, vals)) + ",12,0.5")
    path.write_text("\n".join(rows) + "\n")


class TestFieldPlot:
    def test_renders(self, tmp_path):
        src = tmp_path / "field.csv"
        iface = tmp_path / "interface.csv"
        write_field_csv(src)
        write_interface_csv(iface)
        out = tmp_path / "field.png"
        plots.render(FigureSpec("field", str(src), str(out), interface_path=str(iface)))
        assert out.stat().st_size > 2000

    def test_masked_points_are_gaps(self, tmp_path):
        src = tmp_path / "field.csv"
        write_field_csv(src, mask_center=True)
        out = tmp_path / "masked.png"
        plots.render(FigureSpec("field", str(src), str(out)))
        assert out.exists()

    def test_symmetric_data_quantizes_symmetric(self, tmp_path):
        # the colormap-quantized grid of a centered source is mirror symmetric
        src = tmp_path / "field.csv"
        write_field_csv(src, nx=11, symmetric=True)
        _, data = plots._read_csv(src, plots.FIELD_COLUMNS)
        xs = np.unique(data[:, 0])
        ys = np.unique(data[:, 1])
        order = np.lexsort((data[:, 1], data[:, 0]))
        grid = data[order][:, 2].reshape(xs.size, ys.size)
        lo, hi = grid.min(), grid.max()
        quant = np.round(255 * (grid - lo) / (hi - lo)).astype(int)
        assert np.array_equal(quant, quant[::-1, :])

    def test_schema_mismatch_message(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(SchemaError, match="expected"):
            plots.render(FigureSpec("field", str(bad), str(tmp_path / "x.png")))

    def test_incomplete_grid_rejected(self, tmp_path):
        src = tmp_path / "field.csv"
        write_field_csv(src)
        lines = src.read_text().strip().splitlines()
        src.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(SchemaError, match="grid"):
            plots.render(FigureSpec("field", str(src), str(tmp_path / "x.png")))


class TestLinePlots:
    def test_densities(self, tmp_path):
        src = tmp_path / "densities.csv"
        write_densities_csv(src)
        out = tmp_path / "dens.png"
        plots.render(FigureSpec("densities", str(src), str(out)))
        assert out.exists()

    def test_convergence_monotone(self, tmp_path):
        src = tmp_path / "conv.csv"
        write_convergence_csv(src)
        out = tmp_path / "conv.png"
        plots.render(FigureSpec("convergence", str(src), str(out)))
        assert out.exists()

    def test_sweep_bounded(self, tmp_path):
        src = tmp_path / "sweep.csv"
        write_sweep_csv(src)
        _, data = plots._read_csv(src, plots.SWEEP_COLUMNS)
        assert np.all(data[:, 1] >= 0) and np.all(data[:, 1] <= 1.01)
        out = tmp_path / "sweep.png"
        plots.render(FigureSpec("sweep", str(src), str(out)))
        assert out.exists()

    def test_empty_table_rejected(self, tmp_path):
        src = tmp_path / "empty.csv"
        src.write_text(",".join(plots.SWEEP_COLUMNS) + "\n")
        with pytest.raises(SchemaError, match="no data rows"):
            plots.render(FigureSpec("sweep", str(src), str(tmp_path / "x.png")))


class TestDeterminism:
    def test_byte_stable_rerender(self, tmp_path):
        src = tmp_path / "densities.csv"
        write_densities_csv(src)
        out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
        plots.render(FigureSpec("densities", str(src), str(out1)))
        plots.render(FigureSpec("densities", str(src), str(out2)))
        assert out1.read_bytes() == out2.read_bytes()


class TestCli:
    def test_roundtrip(self, tmp_path):
        src = tmp_path / "conv.csv"
        write_convergence_csv(src)
        out = tmp_path / "c.png"
        rc = cli.main(["--input", str(src), "--kind", "convergence",
                       "--out", str(out)])
        assert rc == 0 and out.exists()

    def test_schema_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        rc = cli.main(["--input", str(bad), "--kind", "sweep",
                       "--out", str(tmp_path / "x.png")])
        assert rc == 2

    def test_missing_file_exit_code(self, tmp_path):
        rc = cli.main(["--input", str(tmp_path / "nope.csv"), "--kind", "sweep",
                       "--out", str(tmp_path / "x.png")])
        assert rc == 4
