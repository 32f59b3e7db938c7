"""Interface curves and their panel discretization.

A curve is discretized on a parameter window [a, b] into ordered 16-node
Gauss-Legendre panels ("chunks"), refined until the Legendre tails of
x(t), y(t), s(t) at 32 nodes fall below tolerance, balanced to a 2:1
adjacent-length restriction, then extended by buffer panels on both
sides.  The buffer carries the oscillatory density that the surface-wave
operator spreads beyond the window; its arclength width is
tau * log(1/eps_buffer) / omega0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .specfun import gauss_legendre, legendre_basis, legendre_antiderivative_vander

NODES_PER_PANEL = 16
RESOLUTION_ORDER = 32
MAX_SPLIT_DEPTH = 30
BUFFER_POINTS_PER_WAVELENGTH = 10.0  # oscillation floor for buffer panel width


class GeometryError(ValueError):
    pass


# ----------------------------------------------------------------------
# Curve families


@dataclass(frozen=True)
class Curve:
    """Parameterized interface with analytic derivatives.

    The normal is gamma'/s rotated by +90 degrees, pointing into the upper
    region Omega_2; (gamma', n) is positively oriented.
    """

    family: str
    params: dict
    is_graph: bool = True

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([self._x(t), self._y(t)], axis=-1)

    def tangent(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([self._dx(t), self._dy(t)], axis=-1)

    def second(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([self._ddx(t), self._ddy(t)], axis=-1)

    def speed(self, t):
        d = self.tangent(t)
        return np.hypot(d[..., 0], d[..., 1])

    def normal(self, t):
        d = self.tangent(t)
        s = np.hypot(d[..., 0], d[..., 1])
        return np.stack([-d[..., 1] / s, d[..., 0] / s], axis=-1)

    def height(self, x):
        """y-value of the interface as a graph (graph families only)."""
        if not self.is_graph:
            raise GeometryError("curve is not a graph; no height function")
        return self._y(np.asarray(x, dtype=float))

    def side(self, xy):
        """+1 for Omega_2 (above the interface), -1 for Omega_1."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        if self.is_graph:
            return np.where(xy[:, 1] >= self.height(xy[:, 0]), 1, -1)
        # nearest-parameter normal test on a scan grid
        tgrid = np.linspace(-200.0, 200.0, 4001)
        pts = self.point(tgrid)
        out = np.empty(xy.shape[0], dtype=int)
        for i, p in enumerate(xy):
            j = np.argmin(np.sum((pts - p) ** 2, axis=1))
            out[i] = 1 if np.dot(p - pts[j], self.normal(tgrid[j])) >= 0 else -1
        return out

    def derivative_check(self, t_values, h=1e-4):
        """Max abs deviation of analytic gamma', gamma'' from central differences."""
        t = np.asarray(t_values, dtype=float)
        fd1 = (self.point(t + h) - self.point(t - h)) / (2 * h)
        fd2 = (self.point(t + h) - 2 * self.point(t) + self.point(t - h)) / h**2
        e1 = np.max(np.abs(fd1 - self.tangent(t)))
        e2 = np.max(np.abs(fd2 - self.second(t)))
        return max(e1, e2)

    # per-family scalar evaluators, bound at construction
    def _x(self, t):
        return self.__dict__["_fx"](t)

    def _y(self, t):
        return self.__dict__["_fy"](t)

    def _dx(self, t):
        return self.__dict__["_fdx"](t)

    def _dy(self, t):
        return self.__dict__["_fdy"](t)

    def _ddx(self, t):
        return self.__dict__["_fddx"](t)

    def _ddy(self, t):
        return self.__dict__["_fddy"](t)


def _bind(curve, fx, fy, fdx, fdy, fddx, fddy):
    object.__setattr__(curve, "_fx", fx)
    object.__setattr__(curve, "_fy", fy)
    object.__setattr__(curve, "_fdx", fdx)
    object.__setattr__(curve, "_fdy", fdy)
    object.__setattr__(curve, "_fddx", fddx)
    object.__setattr__(curve, "_fddy", fddy)
    return curve


def _flat_curve(params):
    c = Curve("flat", dict(params))
    zero = lambda t: np.zeros_like(t)
    return _bind(c, lambda t: t, zero, lambda t: np.ones_like(t), zero, zero, zero)


def _gauss_sine_curve(params):
    amp = float(params["amplitude"])
    env = float(params["envelope"])
    freq = float(params["frequency"])
    phase = float(params["phase"])
    if env < 0:
        raise GeometryError("gauss_sine envelope rate must be >= 0")

    def y(t):
        return amp * np.exp(-env * t * t) * np.sin(freq * t + phase)

    def dy(t):
        e = np.exp(-env * t * t)
        th = freq * t + phase
        return amp * e * (-2 * env * t * np.sin(th) + freq * np.cos(th))

    def ddy(t):
        e = np.exp(-env * t * t)
        th = freq * t + phase
        return amp * e * (
            (4 * env**2 * t * t - 2 * env - freq**2) * np.sin(th)
            - 4 * env * freq * t * np.cos(th)
        )

    c = Curve("gauss_sine", dict(params))
    zero = lambda t: np.zeros_like(t)
    return _bind(c, lambda t: t, y, lambda t: np.ones_like(t), dy, zero, ddy)


def _vshape_curve(params):
    slope = float(params["slope"])
    smooth = float(params["smoothing"])
    if smooth <= 0:
        raise GeometryError("vshape smoothing must be > 0")

    def y(t):
        # slope * smooth * log(2 cosh(t/smooth)), written to avoid overflow
        u = np.abs(t) / smooth
        return slope * (np.abs(t) + smooth * np.log1p(np.exp(-2 * u)))

    def dy(t):
        return slope * np.tanh(t / smooth)

    def ddy(t):
        return (slope / smooth) / np.cosh(t / smooth) ** 2

    c = Curve("vshape", dict(params))
    zero = lambda t: np.zeros_like(t)
    return _bind(c, lambda t: t, y, lambda t: np.ones_like(t), dy, zero, ddy)


def _custom_curve(params):
    dom = params.get("domain")
    cy = np.asarray(params["cheb_y"], dtype=float)
    cx = params.get("cheb_x")
    if dom is None or len(dom) != 2:
        raise GeometryError("custom curve requires domain=[t0, t1]")
    t0, t1 = float(dom[0]), float(dom[1])

    def make_eval(coefs):
        d1 = npcheb.chebder(coefs, 1)
        d2 = npcheb.chebder(coefs, 2)
        scale = 2.0 / (t1 - t0)

        def val_in(t):
            u = (2 * t - t0 - t1) / (t1 - t0)
            return npcheb.chebval(u, coefs)

        def d1_in(t):
            u = (2 * t - t0 - t1) / (t1 - t0)
            return npcheb.chebval(u, d1) * scale

        def d2_in(t):
            u = (2 * t - t0 - t1) / (t1 - t0)
            return npcheb.chebval(u, d2) * scale**2

        # linear extension outside the tabulated domain
        v0, v1 = val_in(t0), val_in(t1)
        s0, s1 = d1_in(t0), d1_in(t1)

        def val(t):
            t = np.asarray(t, dtype=float)
            out = val_in(np.clip(t, t0, t1))
            out = np.where(t < t0, v0 + s0 * (t - t0), out)
            out = np.where(t > t1, v1 + s1 * (t - t1), out)
            return out

        def der(t):
            t = np.asarray(t, dtype=float)
            out = d1_in(np.clip(t, t0, t1))
            out = np.where(t < t0, s0, out)
            out = np.where(t > t1, s1, out)
            return out

        def dder(t):
            t = np.asarray(t, dtype=float)
            out = d2_in(np.clip(t, t0, t1))
            return np.where((t < t0) | (t > t1), 0.0, out)

        return val, der, dder

    ys = make_eval(cy)
    if cx is None:
        c = Curve("custom", dict(params), is_graph=True)
        zero = lambda t: np.zeros_like(t)
        return _bind(c, lambda t: np.asarray(t, dtype=float) + 0.0, ys[0],
                     lambda t: np.ones_like(np.asarray(t, dtype=float)), ys[1], zero, ys[2])
    xs = make_eval(np.asarray(cx, dtype=float))
    c = Curve("custom", dict(params), is_graph=False)
    return _bind(c, xs[0], ys[0], xs[1], ys[1], xs[2], ys[2])


_FAMILIES = {
    "flat": _flat_curve,
    "gauss_sine": _gauss_sine_curve,
    "vshape": _vshape_curve,
    "custom": _custom_curve,
}


def build_curve(family: str, params: dict | None = None) -> Curve:
    """Construct a built-in curve family; raises GeometryError on bad input."""
    params = dict(params or {})
    key = family.lower()
    if key not in _FAMILIES:
        raise GeometryError(f"unknown curve family '{family}'")
    for name, val in params.items():
        if isinstance(val, (int, float)) and not np.isfinite(val):
            raise GeometryError(f"non-finite parameter {name}")
    return _FAMILIES[key](params)


# ----------------------------------------------------------------------
# Panels and boundary


@dataclass(frozen=True)
class Panel:
    a: float
    b: float
    t: np.ndarray  # 16 node parameters
    pos: np.ndarray  # (16, 2)
    normal: np.ndarray  # (16, 2)
    speed: np.ndarray
    w_param: np.ndarray  # parameter-space smooth weights
    w_arc: np.ndarray  # arclength smooth weights (w_param * speed)
    arc_len: float  # spectral arclength of the panel
    node_arc: np.ndarray  # arclength offsets of nodes from panel start
    is_buffer: bool = False

    @property
    def length(self):
        return self.b - self.a


def _make_panel(curve: Curve, a: float, b: float, is_buffer=False) -> Panel:
    basis = legendre_basis(NODES_PER_PANEL)
    half = 0.5 * (b - a)
    t = a + half * (basis.nodes + 1.0)
    pos = curve.point(t)
    nrm = curve.normal(t)
    spd = curve.speed(t)
    w_param = basis.weights * half
    coeffs = basis.coeffs(spd)
    anti = legendre_antiderivative_vander(basis.nodes, NODES_PER_PANEL)
    node_arc = half * (anti @ coeffs)
    arc_len = float(2.0 * half * coeffs[0])
    return Panel(
        a=a, b=b, t=t, pos=pos, normal=nrm, speed=spd,
        w_param=w_param, w_arc=w_param * spd,
        arc_len=arc_len, node_arc=node_arc, is_buffer=is_buffer,
    )


def _resolved(curve: Curve, a: float, b: float, eps: float) -> bool:
    basis = legendre_basis(RESOLUTION_ORDER)
    half = 0.5 * (b - a)
    t = a + half * (basis.nodes + 1.0)
    pos = curve.point(t)
    spd = curve.speed(t)
    worst = 0.0
    for samples in (pos[:, 0], pos[:, 1], spd):
        c = basis.coeffs(samples)
        tail = np.sqrt(np.sum(c[16:] ** 2) / 16.0)
        worst = max(worst, tail)
    return worst <= eps


def _panel_arc(curve: Curve, a: float, b: float) -> float:
    x, w = gauss_legendre(32)
    half = 0.5 * (b - a)
    return float(half * np.dot(w, curve.speed(a + half * (x + 1.0))))


def adaptive_chunk(curve: Curve, a: float, b: float, eps: float,
                   min_chunks: int = 1, max_arc: float | None = None
                   ) -> list[tuple[float, float]]:
    """Split [a, b] until every chunk passes the Legendre-tail resolution test
    (and, when max_arc is set, is no longer than max_arc in arclength; the
    kernel scale 1/omega must be resolved as well as the geometry)."""
    if not (a < b):
        raise GeometryError("adaptive_chunk requires a < b")
    if eps <= 0:
        raise GeometryError("adaptive_chunk requires eps > 0")
    n0 = max(int(min_chunks), 1)
    stack = [(a + (b - a) * k / n0, a + (b - a) * (k + 1) / n0, 0) for k in range(n0)]
    out = []
    while stack:
        lo, hi, depth = stack.pop()
        if _resolved(curve, lo, hi, eps) and (
            max_arc is None or _panel_arc(curve, lo, hi) <= max_arc
        ):
            out.append((lo, hi))
            continue
        if depth >= MAX_SPLIT_DEPTH:
            raise GeometryError(
                f"chunk [{lo}, {hi}] not resolved after {MAX_SPLIT_DEPTH} splits"
            )
        mid = 0.5 * (lo + hi)
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))
    out.sort()
    return out


def balance_chunks(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Split chunks (never merge) until adjacent length ratios lie in [0.5, 2]."""
    work = [list(iv) for iv in sorted(intervals)]
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(work) - 1:
            l0 = work[i][1] - work[i][0]
            l1 = work[i + 1][1] - work[i + 1][0]
            if l0 > 2.0 * l1:
                mid = 0.5 * (work[i][0] + work[i][1])
                work[i : i + 1] = [[work[i][0], mid], [mid, work[i][1]]]
                changed = True
            elif l1 > 2.0 * l0:
                mid = 0.5 * (work[i + 1][0] + work[i + 1][1])
                work[i + 1 : i + 2] = [[work[i + 1][0], mid], [mid, work[i + 1][1]]]
                changed = True
            else:
                i += 1
    return [tuple(iv) for iv in work]


def uniform_chunk(a: float, b: float, n: int) -> list[tuple[float, float]]:
    if n < 1:
        raise GeometryError("need at least one chunk")
    edges = np.linspace(a, b, n + 1)
    return list(zip(edges[:-1], edges[1:]))


@dataclass(frozen=True)
class Boundary:
    """Ordered panel discretization of a curve window plus buffers.

    Global node arrays are ordered by parameter; the core range [a, b]
    occupies indices [core_lo, core_hi).  Arclength coordinates are
    anchored at t = a (arc = 0 at the left core edge).
    """

    curve: Curve
    panels: list
    a: float
    b: float
    a_buf: float
    b_buf: float
    t: np.ndarray
    pos: np.ndarray
    normal: np.ndarray
    speed: np.ndarray
    weight: np.ndarray  # arclength smooth weights
    w_param: np.ndarray
    arc: np.ndarray  # arclength coordinate per node
    panel_of_node: np.ndarray
    is_buffer_node: np.ndarray
    core_lo: int
    core_hi: int
    panel_arc_start: np.ndarray
    n_core_chunks: int
    buffer_arc_width: float = 0.0

    @property
    def n_over(self):
        return self.t.shape[0]

    @property
    def n_core(self):
        return self.core_hi - self.core_lo

    @property
    def core(self):
        return slice(self.core_lo, self.core_hi)

    def core_panels(self):
        return [p for p in self.panels if not p.is_buffer]

    def arclength_core(self):
        return float(sum(p.arc_len for p in self.panels if not p.is_buffer))

    def restrict_core(self, values):
        return np.asarray(values)[..., self.core_lo : self.core_hi]

    def extend_core(self, core_values):
        core_values = np.asarray(core_values)
        out = np.zeros(core_values.shape[:-1] + (self.n_over,), dtype=core_values.dtype)
        out[..., self.core_lo : self.core_hi] = core_values
        return out


def _assemble(curve, intervals_with_flags, a, b, n_core_chunks, buffer_arc_width):
    panels = [_make_panel(curve, lo, hi, is_buffer=fl) for lo, hi, fl in intervals_with_flags]
    t = np.concatenate([p.t for p in panels])
    pos = np.concatenate([p.pos for p in panels])
    nrm = np.concatenate([p.normal for p in panels])
    spd = np.concatenate([p.speed for p in panels])
    w_arc = np.concatenate([p.w_arc for p in panels])
    w_param = np.concatenate([p.w_param for p in panels])
    pid = np.concatenate([np.full(NODES_PER_PANEL, i) for i in range(len(panels))])
    isbuf = np.concatenate(
        [np.full(NODES_PER_PANEL, p.is_buffer, dtype=bool) for p in panels]
    )
    # anchor arclength at the left core edge
    lengths = np.array([p.arc_len for p in panels])
    starts = np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
    first_core = next(i for i, p in enumerate(panels) if not p.is_buffer)
    starts -= starts[first_core]
    arc = np.concatenate([starts[i] + p.node_arc for i, p in enumerate(panels)])
    core_idx = np.nonzero(~isbuf)[0]
    return Boundary(
        curve=curve, panels=panels, a=a, b=b,
        a_buf=panels[0].a, b_buf=panels[-1].b,
        t=t, pos=pos, normal=nrm, speed=spd, weight=w_arc, w_param=w_param,
        arc=arc, panel_of_node=pid, is_buffer_node=isbuf,
        core_lo=int(core_idx[0]), core_hi=int(core_idx[-1]) + 1,
        panel_arc_start=starts, n_core_chunks=n_core_chunks,
        buffer_arc_width=buffer_arc_width,
    )


def discretize_core(curve: Curve, a: float, b: float, eps: float,
                    n_chunks: int | None = None,
                    max_arc: float | None = None) -> Boundary:
    """Core-only Boundary: adaptive+balanced if n_chunks is None, else uniform."""
    if n_chunks is None:
        ivs = balance_chunks(adaptive_chunk(curve, a, b, eps, max_arc=max_arc))
    else:
        ivs = uniform_chunk(a, b, n_chunks)
    return _assemble(curve, [(lo, hi, False) for lo, hi in ivs], a, b, len(ivs), 0.0)


def _param_width_for_arc(curve, t_edge, arc_target, direction):
    """Parameter width w so the arclength of [t_edge, t_edge +/- w] equals arc_target."""
    x, wq = gauss_legendre(32)

    def arc_of(w):
        if direction > 0:
            lo, hi = t_edge, t_edge + w
        else:
            lo, hi = t_edge - w, t_edge
        tt = lo + 0.5 * (hi - lo) * (x + 1.0)
        return 0.5 * (hi - lo) * np.dot(wq, curve.speed(tt))

    w = arc_target / max(curve.speed(np.array([t_edge]))[0], 1e-12)
    for _ in range(60):
        err = arc_of(w) - arc_target
        if abs(err) < 1e-13 * arc_target:
            break
        slope = curve.speed(np.array([t_edge + direction * w]))[0]
        w = w - err / slope
    return w


def extend_with_buffers(boundary: Boundary, eps_buffer: float, tau: float,
                        omega0: float, energy: float, m0: float,
                        max_arc: float | None = None) -> Boundary:
    """Add equal-width buffer panels on both sides of the core window.

    Per-side arclength width tau*log(1/eps_buffer)/omega0; node count per
    side 2*ceil(tau * n_c * log(1e16) / (m0 * Delta_t)) rounded up to whole
    panels, with a floor so buffer panels resolve the e^{i E arc} density
    oscillation.
    """
    if tau <= 0:
        raise GeometryError("buffer factor tau must be > 0")
    if eps_buffer <= 0 or eps_buffer >= 1:
        raise GeometryError("eps_buffer must be in (0, 1)")
    curve = boundary.curve
    a, b = boundary.a, boundary.b
    arc_w = tau * np.log(1.0 / eps_buffer) / omega0
    delta_t = boundary.arclength_core()
    n_c = boundary.n_core_chunks
    m_b = tau * n_c * np.log(1e16) / (m0 * delta_t)
    n_buffer_nodes = 2 * int(np.ceil(m_b))
    n_pan = max(
        int(np.ceil(n_buffer_nodes / NODES_PER_PANEL)),
        int(np.ceil(arc_w * abs(energy) / BUFFER_POINTS_PER_WAVELENGTH)),
        int(np.ceil(arc_w / max_arc)) if max_arc else 1,
        1,
    )
    w_left = _param_width_for_arc(curve, a, arc_w, -1)
    w_right = _param_width_for_arc(curve, b, arc_w, +1)

    def buffer_intervals(lo, hi, n):
        # double panel count until the geometry is resolved on each piece
        for _ in range(12):
            edges = np.linspace(lo, hi, n + 1)
            if all(_resolved(curve, u, v, 1e-10) for u, v in zip(edges[:-1], edges[1:])):
                break
            n *= 2
        edges = np.linspace(lo, hi, n + 1)
        return list(zip(edges[:-1], edges[1:]))

    left = buffer_intervals(a - w_left, a, n_pan)
    right = buffer_intervals(b, b + w_right, n_pan)
    ivs = [(lo, hi, True) for lo, hi in left]
    ivs += [(p.a, p.b, False) for p in boundary.panels if not p.is_buffer]
    ivs += [(lo, hi, True) for lo, hi in right]
    return _assemble(curve, ivs, a, b, boundary.n_core_chunks, arc_w)


def build_boundary(curve: Curve, a: float, b: float, eps: float,
                   eps_buffer: float, tau: float, omega0: float,
                   energy: float, m0: float,
                   n_chunks: int | None = None,
                   max_arc: float | None = None) -> Boundary:
    core = discretize_core(curve, a, b, eps, n_chunks=n_chunks, max_arc=max_arc)
    return extend_with_buffers(core, eps_buffer, tau, omega0, energy, m0,
                               max_arc=max_arc)


# ----------------------------------------------------------------------
# Window selection and I/O


def suggest_window(curve: Curve, source_xy: np.ndarray, omega: float,
                   eps: float, pad: float = 1.0) -> tuple[float, float]:
    """Smallest window outside of which the tangent is settled and the
    incident trace is below eps (relative to its peak)."""
    source_xy = np.atleast_2d(np.asarray(source_xy, dtype=float))
    tan_inf = curve.tangent(np.array([-1e8, 1e8]))
    tan_inf /= np.hypot(tan_inf[:, 0], tan_inf[:, 1])[:, None]

    tgrid = np.linspace(-500.0, 500.0, 20001)
    pts = curve.point(tgrid)
    tanv = curve.tangent(tgrid)
    tanv /= np.hypot(tanv[:, 0], tanv[:, 1])[:, None]
    dist = np.min(
        np.hypot(pts[:, 0, None] - source_xy[None, :, 0],
                 pts[:, 1, None] - source_xy[None, :, 1]),
        axis=1,
    )
    trace = np.exp(-omega * dist)
    trace /= trace.max()
    flat_left = np.hypot(*(tanv - tan_inf[0]).T) <= eps
    flat_right = np.hypot(*(tanv - tan_inf[1]).T) <= eps
    ok_left = flat_left & (trace <= eps)
    ok_right = flat_right & (trace <= eps)
    bad_left = ~ok_left
    bad_right = ~ok_right
    if bad_left[0] or bad_right[-1]:
        raise GeometryError("could not find a settled window within |t| <= 500")
    # smallest [a, b] whose complement satisfies both criteria everywhere
    ia = int(np.nonzero(bad_left)[0].min()) - 1 if np.any(bad_left) else len(tgrid) // 2
    ib = int(np.nonzero(bad_right)[0].max()) + 1 if np.any(bad_right) else len(tgrid) // 2
    return float(tgrid[ia] - pad), float(tgrid[ib] + pad)


def distance_to_curve(curve: Curve, pts: np.ndarray, t_samples: np.ndarray) -> np.ndarray:
    """Distance from each point to the curve: nearest sample refined by a
    parabolic fit of the squared distance in the parameter."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    pos = curve.point(t_samples)
    out = np.empty(pts.shape[0])
    for i in range(0, pts.shape[0], 256):
        chunk = pts[i : i + 256]
        d2 = (chunk[:, 0][:, None] - pos[:, 0][None, :]) ** 2 \
            + (chunk[:, 1][:, None] - pos[:, 1][None, :]) ** 2
        k = np.argmin(d2, axis=1)
        k = np.clip(k, 1, len(t_samples) - 2)
        t0, t1, t2 = t_samples[k - 1], t_samples[k], t_samples[k + 1]
        rows = np.arange(chunk.shape[0])
        f0, f1, f2 = d2[rows, k - 1], d2[rows, k], d2[rows, k + 1]
        # vertex of the parabola through three (t, d^2) samples
        denom = (t0 - t1) * (t0 - t2) * (t1 - t2)
        a_c = (t2 * (f1 - f0) + t1 * (f0 - f2) + t0 * (f2 - f1)) / denom
        b_c = (t2**2 * (f0 - f1) + t1**2 * (f2 - f0) + t0**2 * (f1 - f2)) / denom
        with np.errstate(divide="ignore", invalid="ignore"):
            t_star = np.where(a_c > 0, -b_c / (2 * a_c), t1)
        t_star = np.clip(t_star, t0, t2)
        near = curve.point(t_star)
        out[i : i + 256] = np.minimum(
            np.hypot(*(chunk - near).T), np.sqrt(f1)
        )
    return out


def write_boundary_csv(boundary: Boundary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["panel_id", "node_id", "t", "x", "y", "nx", "ny", "speed",
                    "weight", "is_buffer"])
        for j in range(boundary.n_over):
            w.writerow([
                int(boundary.panel_of_node[j]), j,
                repr(float(boundary.t[j])),
                repr(float(boundary.pos[j, 0])), repr(float(boundary.pos[j, 1])),
                repr(float(boundary.normal[j, 0])), repr(float(boundary.normal[j, 1])),
                repr(float(boundary.speed[j])), repr(float(boundary.weight[j])),
                int(boundary.is_buffer_node[j]),
            ])
