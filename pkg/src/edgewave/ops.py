"""Discrete surface operators: matrix-free L, P, Q (one mass) and L2, P2 (two).

Fast application:

* Q / Q2 use the two-pass sweeping recurrence in arclength (O(n)), plus a
  sparse kink correction on each source panel.
* The layer-potential operators use corrected 3-panel near stencils plus a
  panel-tree block low-rank far field (Chebyshev interpolation in the curve
  parameter) with interactions beyond the decay cutoff
  r_c = log(1/eps_trunc)/omega dropped entirely.

Dense realizations of every operator are available (size-guarded) and the
equivalence suite checks fast-vs-dense to 1e-12.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels as K
from . import quad
from .geom import NODES_PER_PANEL, Boundary
from .specfun import gauss_legendre, legendre_basis

UPSAMPLE_ORDER = 32


def _upsample_matrix():
    """Exact interpolation of the panel's degree-15 density to 32 nodes."""
    from numpy.polynomial import legendre as npleg

    basis16 = legendre_basis(NODES_PER_PANEL)
    x32, _ = gauss_legendre(UPSAMPLE_ORDER)
    return npleg.legvander(x32, NODES_PER_PANEL - 1) @ basis16.forward


_UPSAMPLE = _upsample_matrix()


def _fine_geometry(bnd: "Boundary", pi: int) -> dict:
    """32-node geometry of panel pi (for the upsampled near corrections)."""
    pan = bnd.panels[pi]
    x32, w32 = gauss_legendre(UPSAMPLE_ORDER)
    half = 0.5 * (pan.b - pan.a)
    t = pan.a + half * (x32 + 1.0)
    curve = bnd.curve
    spd = curve.speed(t)
    basis32 = legendre_basis(UPSAMPLE_ORDER)
    coeffs = basis32.coeffs(spd)
    from .specfun import legendre_antiderivative_vander

    anti = legendre_antiderivative_vander(x32, UPSAMPLE_ORDER)
    return {
        "t": t,
        "pos": curve.point(t),
        "normal": curve.normal(t),
        "speed": spd,
        "w_param": w32 * half,
        "node_arc": half * (anti @ coeffs),  # arclength offsets from panel start
    }

DENSE_GUARD = 6000
TREE_CHEB_ORDER = 28
TREE_ETA = 2.0
# max omega * cluster-diameter of low-rank clusters; the K1-difference kernels
# of the two-mass system need smaller clusters than the single-mass K0 kernel
TREE_DIAM_CAP_EFOLDS = 2.0
TREE_DIAM_CAP_EFOLDS_SINGLE = 4.0
TREE_CHEB_ORDER_SINGLE = 24


class OperatorError(ValueError):
    pass


@dataclass(frozen=True)
class MediumParams:
    """Masses and energy with the derived decay rates."""

    m1: float
    m2: float
    energy: float

    def __post_init__(self):
        if self.m1 <= 0 or self.m2 <= 0:
            raise OperatorError("masses must be positive")
        if self.energy == 0:
            raise OperatorError("energy must be nonzero")
        if abs(self.energy) >= min(self.m1, self.m2):
            raise OperatorError("|E| must be < min(m1, m2) (insulating regime)")

    @property
    def omega1(self):
        return np.sqrt(self.m1**2 - self.energy**2)

    @property
    def omega2(self):
        return np.sqrt(self.m2**2 - self.energy**2)

    @property
    def mbar(self):
        return 0.5 * (self.m1 + self.m2)

    @property
    def m0(self):
        return min(self.m1, self.m2)

    @property
    def omega0(self):
        return np.sqrt(self.m0**2 - self.energy**2)

    @property
    def equal_mass(self):
        return self.m1 == self.m2

    @property
    def delta(self):
        """The off-diagonal entry of the change-of-variables matrix V."""
        return 0.5 / self.m2 - 0.5 / self.m1

    @property
    def v_matrix(self):
        d = self.delta
        return np.array([[-1.0, d], [d, 1.0]])


@dataclass
class Density:
    """Complex nodal coefficients over a tagged index range of the boundary."""

    values: np.ndarray
    domain: str  # 'core' or 'buffered'

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.domain not in ("core", "buffered"):
            raise OperatorError(f"unknown density domain '{self.domain}'")
        if not np.all(np.isfinite(self.values)):
            raise OperatorError("density has non-finite entries")


# ----------------------------------------------------------------------
# Interpolation helpers


def _cheb_points(lo: float, hi: float, p: int) -> np.ndarray:
    q = np.arange(p)
    x = np.cos((2 * q + 1) * np.pi / (2 * p))
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x


def _lagrange_matrix(cheb_x: np.ndarray, eval_x: np.ndarray) -> np.ndarray:
    """Barycentric Lagrange evaluation matrix M[i, q] = L_q(eval_x[i])."""
    p = cheb_x.shape[0]
    q = np.arange(p)
    bw = (-1.0) ** q * np.sin((2 * q + 1) * np.pi / (2 * p))
    diff = eval_x[:, None] - cheb_x[None, :]
    exact = diff == 0.0
    diff = np.where(exact, 1.0, diff)
    m = bw[None, :] / diff
    m /= m.sum(axis=1)[:, None]
    hit_rows = exact.any(axis=1)
    if np.any(hit_rows):
        m[hit_rows] = exact[hit_rows].astype(float)
    return m


# ----------------------------------------------------------------------
# Interaction skeleton: tree, pair lists, and kernel-independent stencil data


class _Cluster:
    __slots__ = ("plo", "phi", "nlo", "nhi", "center", "radius", "left", "right",
                 "t_lo", "t_hi")

    def __init__(self, plo, phi, nlo, nhi, center, radius, t_lo, t_hi):
        self.plo, self.phi = plo, phi
        self.nlo, self.nhi = nlo, nhi
        self.center, self.radius = center, radius
        self.left = self.right = None
        self.t_lo, self.t_hi = t_lo, t_hi

    @property
    def leaf(self):
        return self.left is None

    @property
    def diam(self):
        return 2.0 * self.radius


class InteractionSkeleton:
    """Geometry-only decomposition of panel-pair interactions for a boundary.

    Shared by every layer-potential kernel on the same boundary: the cluster
    tree, admissible / dense / stencil pair lists, the per-cluster Chebyshev
    transfer matrices, and the kernel-independent log-quadrature weights of
    the 3-panel stencils.
    """

    def __init__(self, boundary: Boundary, r_cutoff: float,
                 eta: float = TREE_ETA, p: int = TREE_CHEB_ORDER,
                 diam_cap: float = np.inf):
        self.bnd = boundary
        self.r_cutoff = r_cutoff
        self.eta = eta
        self.p = p
        self.diam_cap = diam_cap
        self.clusters: list[_Cluster] = []
        self._build_tree()
        self.admissible: list[tuple[int, int]] = []
        self.dense_pairs: list[tuple[int, int]] = []
        self._traverse()
        self._build_transfer()
        self._build_stencil_log_weights()

    # -- tree ----------------------------------------------------------
    def _make_cluster(self, plo, phi):
        bnd = self.bnd
        nlo, nhi = plo * NODES_PER_PANEL, phi * NODES_PER_PANEL
        pts = bnd.pos[nlo:nhi]
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        center = 0.5 * (lo + hi)
        radius = 0.5 * float(np.hypot(*(hi - lo))) + 1e-30
        c = _Cluster(plo, phi, nlo, nhi, center, radius,
                     bnd.panels[plo].a, bnd.panels[phi - 1].b)
        self.clusters.append(c)
        return len(self.clusters) - 1

    def _build_tree(self):
        n_pan = len(self.bnd.panels)
        root = self._make_cluster(0, n_pan)
        stack = [root]
        while stack:
            ci = stack.pop()
            c = self.clusters[ci]
            if c.phi - c.plo <= 1:
                continue
            mid = (c.plo + c.phi) // 2
            c.left = self._make_cluster(c.plo, mid)
            c.right = self._make_cluster(mid, c.phi)
            stack.extend([c.left, c.right])

    # -- pair classification --------------------------------------------
    def _traverse(self):
        stack = [(0, 0)]
        while stack:
            ai, bi = stack.pop()
            a, b = self.clusters[ai], self.clusters[bi]
            gap = float(np.hypot(*(a.center - b.center))) - a.radius - b.radius
            if gap > self.r_cutoff:
                continue
            if (
                gap >= self.eta * max(a.diam, b.diam)
                and a.diam <= self.diam_cap
                and b.diam <= self.diam_cap
                and gap > 0
            ):
                self.admissible.append((ai, bi))
                continue
            if a.leaf and b.leaf:
                if abs(a.plo - b.plo) > 1:
                    self.dense_pairs.append((ai, bi))
                # |index difference| <= 1 is the corrected stencil zone
                continue
            split_a = (not a.leaf) and (a.leaf is False) and (b.leaf or a.diam >= b.diam)
            if split_a:
                stack.append((a.left, bi))
                stack.append((a.right, bi))
            else:
                stack.append((ai, b.left))
                stack.append((ai, b.right))

    # -- chebyshev transfer ----------------------------------------------
    def _build_transfer(self):
        used = sorted({c for pair in self.admissible for c in pair})
        self.dof_of_cluster = {}
        bnd = self.bnd
        rows_u, cols_u, vals_u = [], [], []
        rows_v, cols_v, vals_v = [], [], []
        self.cheb_geo = {}
        off = 0
        for ci in used:
            c = self.clusters[ci]
            self.dof_of_cluster[ci] = off
            tq = _cheb_points(c.t_lo, c.t_hi, self.p)
            pos = bnd.curve.point(tq)
            nrm = bnd.curve.normal(tq)
            self.cheb_geo[ci] = (tq, pos, nrm)
            lag = _lagrange_matrix(tq, bnd.t[c.nlo : c.nhi])  # (n_nodes, p)
            node_idx = np.arange(c.nlo, c.nhi)
            # anterpolation of weighted density, U[q, l] = L_q(t_l) w_l
            uu = (lag * bnd.weight[c.nlo : c.nhi, None]).T
            qq, ll = np.meshgrid(np.arange(self.p), node_idx, indexing="ij")
            rows_u.append((off + qq).ravel())
            cols_u.append(ll.ravel())
            vals_u.append(uu.ravel())
            rows_v.append(np.repeat(node_idx, self.p))
            cols_v.append((off + np.tile(np.arange(self.p), node_idx.size)))
            vals_v.append(lag.ravel())
            off += self.p
        self.n_dof = off
        n = bnd.n_over
        if off:
            self.U = sp.csr_matrix(
                (np.concatenate(vals_u), (np.concatenate(rows_u), np.concatenate(cols_u))),
                shape=(off, n),
            )
            self.V = sp.csr_matrix(
                (np.concatenate(vals_v), (np.concatenate(rows_v), np.concatenate(cols_v))),
                shape=(n, off),
            )
        else:
            self.U = sp.csr_matrix((0, n))
            self.V = sp.csr_matrix((n, 0))

    # -- stencils ---------------------------------------------------------
    def stencil_pairs(self):
        n_pan = len(self.bnd.panels)
        for pt in range(n_pan):
            for ps in (pt - 1, pt, pt + 1):
                if 0 <= ps < n_pan:
                    yield pt, ps

    def _build_stencil_log_weights(self):
        """Kernel-independent upsampled log weights Lambda[(pt, ps)][j, l32]."""
        bnd = self.bnd
        self.fine = [_fine_geometry(bnd, pi) for pi in range(len(bnd.panels))]
        self.log_blocks = {}
        for pt, ps in self.stencil_pairs():
            tgt_t = bnd.panels[pt].t
            pan = bnd.panels[ps]
            fine = self.fine[ps]
            block = np.empty((NODES_PER_PANEL, UPSAMPLE_ORDER))
            for j, tj in enumerate(tgt_t):
                try:
                    block[j] = quad.log_corrected_weights(pan.a, pan.b, float(tj),
                                                          n=UPSAMPLE_ORDER)
                except quad.QuadratureError:
                    # target many panel-widths away: the log factor is smooth
                    block[j] = fine["w_param"] * np.log(np.abs(tj - fine["t"]))
            self.log_blocks[(pt, ps)] = block

    def stencil_geometry(self, pt, ps):
        """PairGeometry of panel pt's 16 targets against panel ps's 32 fine nodes."""
        bnd = self.bnd
        pan_t = bnd.panels[pt]
        fine = self.fine[ps]
        return K.PairGeometry(
            pan_t.pos, pan_t.normal, pan_t.t,
            fine["pos"], fine["normal"], fine["t"],
            src_speed=fine["speed"],
        )

    def pair_geometry(self, nlo_t, nhi_t, nlo_s, nhi_s):
        bnd = self.bnd
        ti = np.arange(nlo_t, nhi_t)
        si = np.arange(nlo_s, nhi_s)
        diag = ti[:, None] == si[None, :]
        return K.PairGeometry(
            bnd.pos[ti], bnd.normal[ti], bnd.t[ti],
            bnd.pos[si], bnd.normal[si], bnd.t[si],
            src_speed=bnd.speed[si], diag_mask=diag,
        )


class FastKernelOperator:
    """Matrix-free n_over -> n_over action of one layer-potential kernel."""

    def __init__(self, skel: InteractionSkeleton, kernel):
        self.skel = skel
        self.kernel = kernel
        self._build_near()
        self._build_far()

    def _stencil_block(self, pt, ps):
        skel, bnd = self.skel, self.skel.bnd
        pan_t = bnd.panels[pt]
        fine = skel.fine[ps]
        g = skel.stencil_geometry(pt, ps)
        lam = skel.log_blocks[(pt, ps)]
        glog = self.kernel.log_coeff(g)
        gsm = self.kernel.smooth(g, curve=bnd.curve, tgt_t=pan_t.t)
        w32 = glog * fine["speed"][None, :] * lam \
            + gsm * (fine["speed"] * fine["w_param"])[None, :]
        return w32 @ _UPSAMPLE

    def _build_near(self):
        skel, bnd = self.skel, self.skel.bnd
        rows, cols, vals = [], [], []
        for pt, ps in skel.stencil_pairs():
            w = self._stencil_block(pt, ps)
            jj, ll = np.meshgrid(
                np.arange(pt * NODES_PER_PANEL, (pt + 1) * NODES_PER_PANEL),
                np.arange(ps * NODES_PER_PANEL, (ps + 1) * NODES_PER_PANEL),
                indexing="ij",
            )
            rows.append(jj.ravel())
            cols.append(ll.ravel())
            vals.append(w.ravel())
        for ai, bi in skel.dense_pairs:
            a, b = skel.clusters[ai], skel.clusters[bi]
            g = skel.pair_geometry(a.nlo, a.nhi, b.nlo, b.nhi)
            w = self.kernel.far(g) * bnd.weight[b.nlo : b.nhi][None, :]
            jj, ll = np.meshgrid(np.arange(a.nlo, a.nhi), np.arange(b.nlo, b.nhi),
                                 indexing="ij")
            rows.append(jj.ravel())
            cols.append(ll.ravel())
            vals.append(w.ravel())
        n = bnd.n_over
        self.near = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )

    def _build_far(self):
        skel = self.skel
        p = skel.p
        rows, cols, vals = [], [], []
        for ai, bi in skel.admissible:
            ta, pa, na = skel.cheb_geo[ai]
            tb, pb, nb = skel.cheb_geo[bi]
            g = K.PairGeometry(pa, na, ta, pb, nb, tb)
            kmat = self.kernel.far(g)
            oa, ob = skel.dof_of_cluster[ai], skel.dof_of_cluster[bi]
            qq, rr = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
            rows.append((oa + qq).ravel())
            cols.append((ob + rr).ravel())
            vals.append(kmat.ravel())
        if rows:
            self.kfar = sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(skel.n_dof, skel.n_dof),
            )
        else:
            self.kfar = sp.csr_matrix((skel.n_dof, skel.n_dof))

    def apply(self, x: np.ndarray) -> np.ndarray:
        if np.iscomplexobj(x):
            # two real spmv passes beat scipy's implicit upcast of the matrix
            return self._apply_real(x.real) + 1j * self._apply_real(x.imag)
        return self._apply_real(x)

    def _apply_real(self, x: np.ndarray) -> np.ndarray:
        y = self.near @ x
        if self.skel.n_dof:
            y = y + self.skel.V @ (self.kfar @ (self.skel.U @ x))
        return y

    def dense(self) -> np.ndarray:
        bnd = self.skel.bnd
        n = bnd.n_over
        if n > DENSE_GUARD:
            raise OperatorError(f"dense realization refused for n_over={n} > {DENSE_GUARD}")
        g = self.skel.pair_geometry(0, n, 0, n)
        mat = self.kernel.far(g) * bnd.weight[None, :]
        for pt, ps in self.skel.stencil_pairs():
            w = self._stencil_block(pt, ps)
            mat[
                pt * NODES_PER_PANEL : (pt + 1) * NODES_PER_PANEL,
                ps * NODES_PER_PANEL : (ps + 1) * NODES_PER_PANEL,
            ] = w
        # interactions beyond the decay cutoff are dropped in the fast path
        far_mask = g.r0 > self.skel.r_cutoff
        mat[far_mask] = 0.0
        return mat


# ----------------------------------------------------------------------
# Sweeping Q and the full operator set


def _sweep_exp_sum(arc, src):
    """S_j = sum_l exp(i E |arc_j - arc_l|) src_l via two cumulative passes;
    the phase factor is folded in by the caller (E enters through `arc`)."""
    f = np.exp(-1j * arc)
    up = np.cumsum(src * f) / f
    g = np.exp(1j * arc)
    csum = np.cumsum(src * g)
    down = (csum[-1] - csum) / g
    return up + down


class SurfaceOperators:
    """All discrete operators for one (boundary, medium) pair."""

    def __init__(self, boundary: Boundary, medium: MediumParams,
                 eps_trunc: float = 1e-16, p: int | None = None,
                 eta: float = TREE_ETA):
        self.bnd = boundary
        self.med = medium
        omega_min = min(medium.omega1, medium.omega2)
        omega_max = max(medium.omega1, medium.omega2)
        self.r_cutoff = np.log(1.0 / eps_trunc) / omega_min
        self._eta = eta
        if medium.equal_mass:
            self._p = p if p is not None else TREE_CHEB_ORDER_SINGLE
            self._diam_cap = TREE_DIAM_CAP_EFOLDS_SINGLE / omega_max
        else:
            self._p = p if p is not None else TREE_CHEB_ORDER
            self._diam_cap = TREE_DIAM_CAP_EFOLDS / omega_max
        self._skel = None
        self._kink = None
        self._layer_ops = {}

    @property
    def skel(self) -> InteractionSkeleton:
        if self._skel is None:
            self._skel = InteractionSkeleton(
                self.bnd, self.r_cutoff, eta=self._eta, p=self._p,
                diam_cap=self._diam_cap,
            )
        return self._skel

    @property
    def _kink_delta(self):
        if self._kink is None:
            self._kink = self._build_kink_delta()
        return self._kink

    def _layer_op(self, name) -> FastKernelOperator:
        if name not in self._layer_ops:
            med = self.med
            w2, w1, mb = med.omega2, med.omega1, med.mbar
            makers = {
                "S": lambda: K.KernelS(med.omega1),
                "A11": lambda: K.KernelSum(
                    K.KernelSpDiff(w2, w1),
                    _Scaled(K.KernelS(w2), mb), _Scaled(K.KernelS(w1), mb)),
                "A12": lambda: K.KernelSum(
                    K.KernelD(w2, scale=mb), K.KernelD(w1, scale=mb),
                    K.KernelDpDiff(w2, w1)),
                "A21": lambda: K.KernelSDiff(w2, w1, scale=-1.0),
                "A22": lambda: K.KernelDDiff(w2, w1, scale=-1.0),
            }
            self._layer_ops[name] = FastKernelOperator(self.skel, makers[name]())
        return self._layer_ops[name]

    @property
    def op_S(self):
        return self._layer_op("S")

    @property
    def op_A11(self):
        return self._layer_op("A11")

    @property
    def op_A12(self):
        return self._layer_op("A12")

    @property
    def op_A21(self):
        return self._layer_op("A21")

    @property
    def op_A22(self):
        return self._layer_op("A22")

    # -- Q ----------------------------------------------------------------
    def _build_kink_delta(self):
        bnd = self.bnd
        E = self.med.energy
        rows, cols, vals = [], [], []
        for pi, pan in enumerate(bnd.panels):
            if pan.is_buffer:
                continue
            nlo = pi * NODES_PER_PANEL
            idx = np.arange(nlo, nlo + NODES_PER_PANEL)
            taus = bnd.arc[idx]
            t0 = bnd.panel_arc_start[pi]
            t1 = t0 + pan.arc_len
            naive = np.exp(1j * E * np.abs(taus[:, None] - taus[None, :])) * bnd.weight[idx][None, :]
            fine = _fine_geometry(bnd, pi)
            tau32 = bnd.panel_arc_start[pi] + fine["node_arc"]
            lam32 = np.empty((NODES_PER_PANEL, UPSAMPLE_ORDER), dtype=complex)
            for j, tau_j in enumerate(taus):
                lam32[j] = quad.kink_corrected_weights(t0, t1, float(tau_j), E,
                                                       node_t=tau32, n=UPSAMPLE_ORDER)
            delta = lam32 @ _UPSAMPLE - naive
            jj, ll = np.meshgrid(idx, idx, indexing="ij")
            rows.append(jj.ravel())
            cols.append(ll.ravel())
            vals.append(delta.ravel())
        n = bnd.n_over
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )

    def apply_Q(self, dens_full: np.ndarray, mass: float) -> np.ndarray:
        """(mass^2/E) * int exp(iE|arc - arc'|) dens over the CORE, at all nodes."""
        bnd = self.bnd
        E = self.med.energy
        src = np.zeros(bnd.n_over, dtype=complex)
        src[bnd.core] = dens_full[bnd.core] * bnd.weight[bnd.core]
        smooth = _sweep_exp_sum(E * bnd.arc, src)
        mask = np.zeros(bnd.n_over)
        mask[bnd.core] = 1.0
        corr = self._kink_delta @ (dens_full * mask)
        return (mass**2 / E) * (smooth + corr)

    def apply_P(self, rho_core: np.ndarray) -> np.ndarray:
        """P = 1 + Q: core density -> buffered density."""
        bnd = self.bnd
        full = bnd.extend_core(rho_core)
        return full + self.apply_Q(full, self.med.m1)

    def apply_P2(self, sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """P2 sigma = (mu, rho) on the buffered range; sigma stacked (2*n_core,)."""
        bnd = self.bnd
        med = self.med
        n = bnd.n_core
        s1, s2 = sigma[:n], sigma[n:]
        d = med.delta
        combo = bnd.extend_core(s1 - d * s2)
        g = self.apply_Q(combo, med.mbar) / (1.0 + d * d)
        mu = bnd.extend_core(s1) + g
        rho = bnd.extend_core(s2) - d * g
        return mu, rho

    # -- L ----------------------------------------------------------------
    def apply_L(self, mu_full: np.ndarray) -> np.ndarray:
        """L = 1 - 2m S: buffered density -> core values."""
        if not self.med.equal_mass:
            raise OperatorError("apply_L requires equal masses; use apply_L2")
        bnd = self.bnd
        s = self.op_S.apply(mu_full)
        return mu_full[bnd.core] - 2.0 * self.med.m1 * s[bnd.core]

    def apply_L2(self, mu_full: np.ndarray, rho_full: np.ndarray):
        bnd = self.bnd
        out_mu = mu_full[bnd.core] - self.op_A11.apply(mu_full)[bnd.core] \
            - self.op_A12.apply(rho_full)[bnd.core]
        out_rho = rho_full[bnd.core] - self.op_A21.apply(mu_full)[bnd.core] \
            - self.op_A22.apply(rho_full)[bnd.core]
        return out_mu, out_rho

    # -- compositions -------------------------------------------------------
    def apply_LP(self, rho_core: np.ndarray) -> np.ndarray:
        return self.apply_L(self.apply_P(rho_core))

    def apply_L2P2(self, sigma: np.ndarray) -> np.ndarray:
        mu, rho = self.apply_P2(sigma)
        out_mu, out_rho = self.apply_L2(mu, rho)
        return np.concatenate([out_mu, out_rho])

    # -- dense oracles --------------------------------------------------------
    def _guard_dense(self):
        if self.bnd.n_over > DENSE_GUARD:
            raise OperatorError("n_over exceeds the dense-assembly guard")

    def dense_Q(self, mass: float) -> np.ndarray:
        self._guard_dense()
        bnd = self.bnd
        E = self.med.energy
        n = bnd.n_over
        mat = np.exp(1j * E * np.abs(bnd.arc[:, None] - bnd.arc[None, :])) * bnd.weight[None, :]
        mat = mat.astype(complex)
        mat += self._kink_delta.toarray()
        mask = np.zeros(n)
        mask[bnd.core] = 1.0
        return (mass**2 / E) * (mat * mask[None, :])

    def dense_P(self) -> np.ndarray:
        bnd = self.bnd
        ext = np.zeros((bnd.n_over, bnd.n_core))
        ext[bnd.core, :] = np.eye(bnd.n_core)
        return ext + self.dense_Q(self.med.m1)[:, bnd.core]

    def dense_P2(self) -> np.ndarray:
        bnd = self.bnd
        med = self.med
        n, n_c = bnd.n_over, bnd.n_core
        q = self.dense_Q(med.mbar)[:, bnd.core] / (1.0 + med.delta**2)
        ext = np.zeros((n, n_c))
        ext[bnd.core, :] = np.eye(n_c)
        d = med.delta
        out = np.zeros((2 * n, 2 * n_c), dtype=complex)
        out[:n, :n_c] = ext + q
        out[:n, n_c:] = -d * q
        out[n:, :n_c] = -d * q
        out[n:, n_c:] = ext + d * d * q
        return out

    def dense_L(self) -> np.ndarray:
        self._guard_dense()
        bnd = self.bnd
        s = self.op_S.dense()
        ident = np.zeros((bnd.n_core, bnd.n_over))
        ident[:, bnd.core] = np.eye(bnd.n_core)
        return ident - 2.0 * self.med.m1 * s[bnd.core, :]

    def dense_L2(self) -> np.ndarray:
        self._guard_dense()
        bnd = self.bnd
        n, n_c = bnd.n_over, bnd.n_core
        ident = np.zeros((n_c, n))
        ident[:, bnd.core] = np.eye(n_c)
        out = np.zeros((2 * n_c, 2 * n))
        out[:n_c, :n] = ident - self.op_A11.dense()[bnd.core, :]
        out[:n_c, n:] = -self.op_A12.dense()[bnd.core, :]
        out[n_c:, :n] = -self.op_A21.dense()[bnd.core, :]
        out[n_c:, n:] = ident - self.op_A22.dense()[bnd.core, :]
        return out

    def dense_LP(self) -> np.ndarray:
        return self.dense_L() @ self.dense_P()

    def dense_L2P2(self) -> np.ndarray:
        return self.dense_L2() @ self.dense_P2()


class _Scaled:
    """Scalar multiple of a kernel."""

    def __init__(self, kernel, scale):
        self.kernel = kernel
        self.scale = scale

    def far(self, g):
        return self.scale * self.kernel.far(g)

    def log_coeff(self, g):
        return self.scale * self.kernel.log_coeff(g)

    def smooth(self, g, curve=None, tgt_t=None):
        return self.scale * self.kernel.smooth(g, curve=curve, tgt_t=tgt_t)


def write_operator_dump(matrix: np.ndarray, path) -> None:
    """Flat binary: int64 n_rows, int64 n_cols, then row-major complex128."""
    matrix = np.ascontiguousarray(matrix, dtype=complex)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", matrix.shape[0], matrix.shape[1]))
        matrix.tofile(fh)


def read_operator_dump(path) -> np.ndarray:
    with open(path, "rb") as fh:
        n_rows, n_cols = struct.unpack("<qq", fh.read(16))
        data = np.fromfile(fh, dtype=complex, count=n_rows * n_cols)
    return data.reshape(n_rows, n_cols)
