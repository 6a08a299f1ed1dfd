"""Augmented-Hamiltonian diagnostics at traveling waves.

E_c = E - cP.  Fixing v = (eta, xbar, ybar) and minimizing over phi gives
phi_m and the augmented potential V_c(v).  The second variation of E_c at
u_m(v) = (eta, phi_m, xbar, ybar) splits as

    H_c = [[A + L* G^-1 L, -L*], [-L, G]]   (blocks in (v, phi) order),

with L, A and L* the operators of the quadratic-form splitting.  The discrete spectrum of
I^-1 H_c, I = (1 - d^2, |d|, Id, Id), is computed on a Fourier basis.
"""

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.linalg import eigh, lu_factor, lu_solve
from scipy.optimize import minimize_scalar

from . import dynamics as dy
from . import potentials as pot
from . import steady as st
from .errors import AmbiguousSignature, BranchTooShort, DegenerateGeometry
from .potentials import DipoleConfig
from .surface import (Grid, SurfaceState, _dno, deriv, dno_inverse, project, shift,
                      velocity_trace)


@dataclass
class ReducedState:
    """v = (eta, xbar, ybar); the grid and expansion order ride along."""
    eta: np.ndarray
    xbar: np.ndarray
    ybar: np.ndarray
    grid: Grid
    order: int = 8

    def __post_init__(self):
        self.xbar = np.asarray(self.xbar, float).reshape(2)
        self.ybar = np.asarray(self.ybar, float).reshape(2)
        if self.xbar[1] >= 0 or self.ybar[1] >= 0:
            raise DegenerateGeometry("vortex centers must lie below the undisturbed surface")

    @classmethod
    def from_full(cls, u):
        return cls(u.surface.eta, u.dipole.xbar, u.dipole.ybar, u.grid, u.surface.order)


@dataclass
class SpectrumReport:
    negatives: int
    near_zeros: int
    min_positive: float
    mu_c_sq: float
    chi_c: object            # TangentVector on the grid
    zero_tol: float
    eigenvalues: np.ndarray
    translation_correlation: float
    asymmetry: float
    dimension: int

    def to_json(self):
        d = {k: v for k, v in asdict(self).items() if k not in ("chi_c", "eigenvalues")}
        d["lowest_eigenvalues"] = [float(x) for x in self.eigenvalues[:8]]
        return json.dumps(d, indent=2, default=float)


@dataclass
class BranchDiagnostics:
    c_values: list
    d_values: list
    dpp_closed_form: float
    dpp_fd: float
    p_values: list = field(default_factory=list)
    dp_fd: list = field(default_factory=list)
    dpp_uncancelled: float = float("nan")
    dp_center: float = float("nan")
    p_center: float = float("nan")

    def dp_identity_error(self):
        """|d'(c) + P(U_c)| / |P(U_c)| at the middle branch point."""
        return abs(self.dp_center + self.p_center) / abs(self.p_center)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, default=float)


# ---------------------------------------------------------------------------
# phi_m and the surface velocities


def _cfg(v, cfg):
    return cfg.with_centers(v.xbar, v.ybar)


def _phi_rhs(v, c, cfg):
    grid = v.grid
    x = grid.nodes
    ex = deriv(v.eta, grid)
    T1, T2 = pot.grad_theta(x, v.eta, cfg)
    return project(-c * ex - cfg.epsilon * (-ex * T1 + T2))


def varphi_min(v, c, cfg):
    """phi_m = G(eta)^-1 [-c eta' - eps grad_perp Theta] (zero-mean)."""
    cfg = _cfg(v, cfg)
    rhs = _phi_rhs(v, c, cfg)
    if not np.any(rhs):
        return np.zeros_like(rhs)
    s = SurfaceState(v.eta, np.zeros_like(v.eta), v.grid, v.order)
    return dno_inverse(s, rhs)


def relative_velocity_b(v, c, cfg, phi_m=None):
    """(b1, b2) = a + eps grad Theta|S - c e1, with a the trace of grad(H phi_m)."""
    cfg = _cfg(v, cfg)
    phi_m = varphi_min(v, c, cfg) if phi_m is None else phi_m
    s = SurfaceState(v.eta, phi_m, v.grid, v.order)
    a1, a2 = velocity_trace(s)
    T1, T2 = pot.grad_theta(v.grid.nodes, v.eta, cfg)
    eps = cfg.epsilon
    return a1 + eps * T1 - c, a2 + eps * T2


class Linearization:
    """All traces needed by L, A and H_c at a fixed (v, c).

    G(eta) is assembled densely (N columns of the DNO) and factored once, so
    repeated G^-1 solves during spectrum assembly are direct.
    """

    def __init__(self, v, c, cfg, g=1.0, b=1.0, phi_m=None):
        self.v, self.c, self.g, self.b = v, c, g, b
        self.cfg = cfg = _cfg(v, cfg)
        self.grid = grid = v.grid
        self.eps = eps = cfg.epsilon
        n = grid.N
        x = grid.nodes
        eta = v.eta
        cols = np.eye(n)
        self.Gmat = np.column_stack([_dno(eta, cols[:, j], grid, v.order, check=False) for j in range(n)])
        self._lu = lu_factor(self.Gmat + np.ones((n, n)) / n)
        self.phi_m = self.Ginv(_phi_rhs(v, c, cfg)) if phi_m is None else phi_m
        self.surface = SurfaceState(eta, self.phi_m, grid, v.order)
        self.a1, self.a2 = velocity_trace(self.surface)
        T1, T2 = pot.grad_theta(x, eta, cfg)
        self.T1, self.T2 = T1, T2
        self.b1 = self.a1 + eps * T1 - c
        self.b2 = self.a2 + eps * T2
        self.etax = deriv(eta, grid)
        self.u = dy.FullState(self.surface, cfg)
        self.tr = dy._traces(self.u)
        self.xi, self.zeta = pot.xi_zeta((x, eta), cfg)
        self.pxi = dy._perp_jac(self.tr, cfg, 1)      # grad_perp xi_j, shape (2, N)
        self.pzeta = dy._perp_jac(self.tr, cfg, 2)
        self.Gi_pxi = np.array([self.Ginv(project(r)) for r in self.pxi])
        self.Gi_pzeta = np.array([self.Ginv(project(r)) for r in self.pzeta])
        # A13, A14 profiles: eps b1 d/dx (G^-1 grad_perp xi - xi)
        self.q_x = np.array([eps * self.b1 * deriv(self.Gi_pxi[j] - self.xi[j], grid) for j in range(2)])
        self.q_y = np.array([eps * self.b1 * deriv(self.Gi_pzeta[j] - self.zeta[j], grid) for j in range(2)])
        self.A_vortex = self._vortex_block()

    # -- G and its inverse on zero-mean functions
    def G(self, f):
        return self.Gmat @ f

    def Ginv(self, r):
        return project(lu_solve(self._lu, project(r)))

    def inner(self, f, g):
        return self.grid.h * np.sum(f * g, axis=-1)

    # -- printed vortex-vortex blocks
    def _center_hess(self, which, kind):
        x, eta, cfg = self.grid.nodes, self.v.eta, self.cfg
        names = ("1", "1*") if which == 1 else ("2", "2*")
        if kind == "theta":
            a11, a12, a22 = pot.center_hessian_theta(x, eta, cfg, which)
            return np.array([[a11, a12], [a12, a22]])
        a = pot.hess_gamma(x, eta, cfg, include=(names[0],))
        s = pot.hess_gamma(x, eta, cfg, include=(names[1],))
        # starred center is (c1, -c2): conjugate by diag(1, -1)
        return np.array([[a[0] + s[0], a[1] - s[1]], [a[1] - s[1], a[2] + s[2]]])

    def vortex_hessian_Ec(self):
        """D^2_(xbar, ybar) E_c(u_m) from the printed trace integrals (4x4)."""
        eps, tr = self.eps, self.tr
        H = np.zeros((4, 4))
        hs = pot.hess_gamma_star(self.cfg)
        Gphi = self.surface.Gphi
        phix = deriv(self.phi_m, self.grid)
        for which, vec, pj, sl in ((1, self.xi, self.pxi, slice(0, 2)), (2, self.zeta, self.pzeta, slice(2, 4))):
            DT = self._center_hess(which, "theta")
            DG = self._center_hess(which, "gamma")
            M = np.einsum("in,jn->ij", pj, vec) * self.grid.h
            H[sl, sl] = (eps**2 * hs[sl, sl]
                         - eps * self.inner(Gphi * DT + phix * DG, 1.0)
                         + eps**2 * 0.5 * (M + M.T)
                         - 0.5 * eps**2 * self.inner(tr.perp * DT + tr.top * DG, 1.0))
        # grad_perp (xi_i zeta_j) = xi_i grad_perp zeta_j + zeta_j grad_perp xi_i
        X = (np.einsum("in,jn->ij", self.xi, self.pzeta) + np.einsum("jn,in->ij", self.zeta, self.pxi)) * self.grid.h
        H[0:2, 2:4] = eps**2 * hs[0:2, 2:4] + 0.5 * eps**2 * 0.5 * (X + X.T)
        H[2:4, 0:2] = H[0:2, 2:4].T
        return H

    def _vortex_block(self):
        eps = self.eps
        H = self.vortex_hessian_Ec()
        h = self.grid.h
        sym = lambda P, Q: 0.5 * (P @ Q.T + Q @ P.T) * h
        H[0:2, 0:2] -= eps**2 * sym(self.pxi, self.Gi_pxi)
        H[2:4, 2:4] -= eps**2 * sym(self.pzeta, self.Gi_pzeta)
        C = eps**2 * sym(self.pxi, self.Gi_pzeta)
        H[0:2, 2:4] -= C
        H[2:4, 0:2] -= C.T
        return H


def _lin(v, c, cfg, lin):
    return Linearization(v, c, cfg) if lin is None else lin


def _split(vdot):
    """Accept a TangentVector-like object or a tuple (eta_dot, xbar_dot, ybar_dot)."""
    if isinstance(vdot, (tuple, list)):
        return np.asarray(vdot[0], float), np.asarray(vdot[1], float), np.asarray(vdot[2], float)
    return np.asarray(vdot.d_eta, float), np.asarray(vdot.d_xbar, float), np.asarray(vdot.d_ybar, float)


def operator_L_apply(v, vdot, c, cfg, lin=None):
    """L(v) vdot = G(a2 eta_dot) + (b1 eta_dot)' + eps grad_perp xi . xdot + eps grad_perp zeta . ydot."""
    L = _lin(v, c, cfg, lin)
    ed, xd, yd = _split(vdot)
    out = L.G(L.a2 * ed) + deriv(L.b1 * ed, L.grid) + L.eps * (xd @ L.pxi + yd @ L.pzeta)
    return project(out)


def operator_L_adjoint(v, phidot, c, cfg, lin=None):
    """L* phi_dot = (a2 G phi_dot - b1 phi_dot', eps <grad_perp xi, phi_dot>, eps <grad_perp zeta, phi_dot>)."""
    L = _lin(v, c, cfg, lin)
    pd = project(phidot)
    return (L.a2 * L.G(pd) - L.b1 * deriv(pd, L.grid),
            L.eps * L.inner(L.pxi, pd), L.eps * L.inner(L.pzeta, pd))


def operator_M_apply(lin, ed):
    """M eta_dot = -b1 (G^-1 (b1 eta_dot)')'."""
    return -lin.b1 * deriv(lin.Ginv(deriv(lin.b1 * ed, lin.grid)), lin.grid)


def operator_A_apply(v, vdot, c, cfg, lin=None):
    """A(v) vdot as the triple (eta part, xbar part, ybar part)."""
    L = _lin(v, c, cfg, lin)
    ed, xd, yd = _split(vdot)
    s2 = 1 + L.etax**2
    A11 = ((L.g + deriv(L.b2, L.grid) * L.b1) * ed
           - deriv(L.b / s2**1.5 * deriv(ed, L.grid), L.grid)
           - operator_M_apply(L, ed))
    e_out = A11 + xd @ L.q_x + yd @ L.q_y
    w = np.concatenate([xd, yd])
    V = L.A_vortex @ w
    x_out = L.inner(L.q_x, ed) + V[:2]
    y_out = L.inner(L.q_y, ed) + V[2:]
    return e_out, x_out, y_out


def hessian_Hc_apply(v, udot, c, cfg, lin=None):
    """H_c udot for udot = (eta_dot, phi_dot, xbar_dot, ybar_dot); returns a CotangentVector."""
    L = _lin(v, c, cfg, lin)
    vd = (udot.d_eta, udot.d_xbar, udot.d_ybar)
    pd = project(udot.d_phi)
    Lv = operator_L_apply(v, vd, c, cfg, L)
    Ae, Ax, Ay = operator_A_apply(v, vd, c, cfg, L)
    r = L.Ginv(Lv) - pd
    Se, Sx, Sy = operator_L_adjoint(v, r, c, cfg, L)
    return dy.CotangentVector(Ae + Se, project(L.G(pd) - Lv), Ax + Sx, Ay + Sy)


def quadratic_form_split(v, udot, c, cfg, lin=None):
    """(<A vdot, vdot>, <G w, w>) with w = phi_dot - G^-1 L vdot."""
    L = _lin(v, c, cfg, lin)
    vd = (udot.d_eta, udot.d_xbar, udot.d_ybar)
    Ae, Ax, Ay = operator_A_apply(v, vd, c, cfg, L)
    qa = L.inner(Ae, udot.d_eta) + Ax @ udot.d_xbar + Ay @ udot.d_ybar
    w = project(udot.d_phi) - L.Ginv(operator_L_apply(v, vd, c, cfg, L))
    return qa, L.inner(L.G(w), w)


# ---------------------------------------------------------------------------
# leading-order vortex matrix


def matrix_A_small(a, rho, gamma1, gamma2, epsilon):
    """Leading-order vortex block of H_c.

    Returns (matrix, (alpha, beta, delta1, delta2), closed-form eigenvalues).
    The matrix includes the eps^2/(4 pi) prefactor; the eigenvalues do not.
    """
    if not (0 < rho < a):
        raise DegenerateGeometry(f"need 0 < rho < a, got a={a}, rho={rho}")
    al = 0.5 * gamma1 * gamma2 * (1 / rho**2 - 1 / a**2)
    be = 0.5 * gamma1 * gamma2 * (1 / rho**2 + 1 / a**2)
    d1 = gamma1**2 / (a - rho) ** 2
    d2 = gamma2**2 / (a + rho) ** 2
    M = np.array([[-al, 0, al, 0],
                  [0, d1 + al, 0, -be],
                  [al, 0, -al, 0],
                  [0, -be, 0, d2 + al]])
    root = np.sqrt((d1 - d2) ** 2 + 4 * be**2)
    eig = np.array([0.0, -2 * al, (2 * al + d1 + d2 + root) / 2, (2 * al + d1 + d2 - root) / 2])
    return epsilon**2 / (4 * np.pi) * M, (al, be, d1, d2), eig


def certificate_printed(a, rho, gamma1):
    """Right-hand side of the printed positivity identity."""
    return 2 * (a + rho) * gamma1**4 / ((a - rho) * (a * a + a * rho + rho * rho) ** 2)


def certificate_lhs(a, rho, gamma1, gamma2):
    _, (al, be, d1, d2), _ = matrix_A_small(a, rho, gamma1, gamma2, 1.0)
    return al * al + al * d1 + al * d2 + d1 * d2 - be * be


def certificate_corrected(a, rho, gamma1):
    """Simplification of the left-hand side under compatibility."""
    return (3 * gamma1**4 * (a * a - a * rho + rho * rho) * (a**4 - a * a * rho * rho + rho**4)
            / ((a - rho) ** 4 * (a * a + a * rho + rho * rho) ** 3))


# ---------------------------------------------------------------------------
# discrete spectrum


def _fourier_basis(grid, modes="dealiased"):
    """Real Fourier basis for eta (all kept modes) and phi (k != 0), with I weights."""
    x = grid.nodes + grid.L
    k = grid.k
    keep = np.where(grid.mask > 0)[0] if modes == "dealiased" else np.arange(len(k))
    cols, wts, kinds = [], [], []
    for blk in (0, 1):
        for j in keep:
            kk = k[j]
            for f, lab in ((np.cos, 0), (np.sin, 1)):
                if lab == 1 and (kk == 0 or j == grid.N // 2):
                    continue
                if blk == 1 and kk == 0:
                    continue
                prof = f(kk * x)
                nrm = grid.h * prof @ prof
                cols.append((blk, prof))
                wts.append(((1 + kk * kk) if blk == 0 else abs(kk)) * nrm)
                kinds.append(blk)
    return cols, np.array(wts)


def _basis_vector(grid, col):
    n = grid.N
    blk, prof = col
    z = np.zeros(2 * n + 4)
    z[blk * n:(blk + 1) * n] = prof
    return z


def x_norm(grid, t):
    """Discrete X (energy) norm of a tangent vector: H^1 x H^(1/2) x R^2 x R^2."""
    k = grid.k
    eh = grid.fft(t.d_eta)
    ph = grid.fft(project(t.d_phi))
    w = np.full(len(k), 2.0)
    w[0] = 1.0
    if grid.N % 2 == 0:
        w[-1] = 1.0
    scale = 2 * grid.L / grid.N**2
    s = scale * np.sum(w * ((1 + k * k) * np.abs(eh) ** 2 + np.abs(k) * np.abs(ph) ** 2))
    return float(np.sqrt(s + t.d_xbar @ t.d_xbar + t.d_ybar @ t.d_ybar))


def translation_mode(u):
    """T'(0) u = (-eta', -phi', e1, e1)."""
    g = u.grid
    e1 = np.array([1.0, 0.0])
    return dy.TangentVector(-deriv(u.surface.eta, g), -deriv(u.surface.phi, g), e1, e1.copy())


def default_zero_tol(eps, hnorm):
    # the four eigenvalues bifurcating from 0 scale like eps^2
    return 1e-6 * max(eps * eps, 1e-16) * hnorm


def assemble_Hc(wave, g=1.0, b=1.0, modes="dealiased"):
    """Dense Galerkin matrix of H_c on the Fourier basis, plus I weights and the basis."""
    u = wave.state
    grid = u.grid
    v = ReducedState.from_full(u)
    lin = Linearization(v, wave.c, u.dipole, g, b, phi_m=u.surface.phi)
    cols, wts = _fourier_basis(grid, modes)
    n = grid.N
    B = [_basis_vector(grid, col) for col in cols]
    for i in range(4):
        z = np.zeros(2 * n + 4)
        z[2 * n + i] = 1.0
        B.append(z)
    B = np.array(B).T
    wts = np.concatenate([wts, np.ones(4)])
    W = np.concatenate([np.full(2 * n, grid.h), np.ones(4)])
    H = np.empty((B.shape[1], B.shape[1]))
    for j in range(B.shape[1]):
        t = dy.TangentVector.from_vector(B[:, j], n)
        H[:, j] = B.T @ (W * hessian_Hc_apply(v, t, wave.c, u.dipole, lin).as_vector())
    return H, wts, B


def spectrum_report(wave, zero_tol=None, g=1.0, b=1.0, modes="dealiased"):
    """Signature of the discretized I^-1 H_c at a traveling wave."""
    H, wts, B = assemble_Hc(wave, g, b, modes)
    scale = np.max(np.abs(H))
    asym = float(np.max(np.abs(H - H.T)) / scale)
    H = 0.5 * (H + H.T)
    lam, V = eigh(H, np.diag(wts))
    hnorm = float(np.max(np.abs(lam)))
    eps = wave.state.eps
    tol = default_zero_tol(eps, hnorm) if zero_tol is None else zero_tol
    # translation mode by I-weighted correlation
    grid = wave.state.grid
    T = translation_mode(wave.state).as_vector()
    cT, *_ = np.linalg.lstsq(B, T, rcond=None)
    Iw = wts
    nT = np.sqrt(cT @ (Iw * cT))
    corr = np.abs(V.T @ (Iw * cT)) / (np.sqrt(np.einsum("ij,i,ij->j", V, Iw, V)) * nT)
    it = int(np.argmax(corr))
    zeros = np.abs(lam) <= tol
    others = np.abs(np.delete(lam, it))
    if np.any(others <= 10 * tol):
        bad = np.delete(lam, it)[others <= 10 * tol]
        raise AmbiguousSignature(f"eigenvalues {bad} within 10*zero_tol={10 * tol:.2e} of 0",
                                 eigenvalues=bad)
    neg = int(np.sum(lam < -tol))
    pos = lam[lam > tol]
    chi = dy.TangentVector.from_vector(B @ V[:, 0], grid.N)
    return SpectrumReport(
        negatives=neg, near_zeros=int(np.sum(zeros)),
        min_positive=float(pos.min()) if pos.size else float("nan"),
        mu_c_sq=float(-lam[0]) if neg == 1 else float("nan"),
        chi_c=chi, zero_tol=float(tol), eigenvalues=lam,
        translation_correlation=float(corr[it]), asymmetry=asym, dimension=len(lam))


# ---------------------------------------------------------------------------
# moment of instability


def dpp_closed_form(a0, rho0, gamma1, gamma2):
    """Printed leading-order d''(c)."""
    _, det, _ = st.matrix_T(a0, rho0, gamma1, gamma2)
    return (gamma1**2 / (2 * np.pi * det) * 6 * a0 * rho0**2
            / ((a0 + rho0) * (a0 - rho0) ** 2 * (a0 * a0 + a0 * rho0 + rho0 * rho0)))


def dpp_uncancelled(a0, rho0, gamma1, gamma2):
    """-g1 (a_c - rho_c) + g2 (a_c + rho_c) from the first-order branch coefficients."""
    ac, rc = st.first_order_coefficients(a0, rho0, gamma1, gamma2)
    return -gamma1 * (ac - rc) + gamma2 * (ac + rc)


def moment(wave, g=1.0, b=1.0):
    """d(c) = E(U_c) - c P(U_c)."""
    return dy.energy(wave.state, g, b) - wave.c * dy.momentum(wave.state)


def solve_c_branch(a0, rho0, gamma1, epsilon, n=5, dct=None, grid=None, order=8, tol=1e-12):
    """Traveling waves at fixed eps with c_t = c0 + k dct, k = -(n-1)/2 .. (n-1)/2."""
    # h = 0.078 resolves the vortex traces; dct balances stencil and Newton error
    grid = Grid(20.0, 256) if grid is None else grid
    g2 = st.compatibility_gamma2(a0, rho0, gamma1)
    c0 = st.base_speed(a0, rho0, gamma1, g2)
    dct = 0.005 * c0 if dct is None else dct
    p = st.SteadyParams(0.0, c0, gamma1, g2)
    sched = [(0.0, None), (epsilon, None)]
    ks = np.arange(n) - (n - 1) / 2
    sched += [(epsilon, c0 + k * dct) for k in ks]
    br = st.solve_branch(p, (a0, rho0), sched, grid, order, tol)
    return br[2:]


def moment_of_instability(branch, geometry=None, g=1.0, b=1.0):
    """d(c) along a branch equispaced in c, with d' and d'' by central differences.

    dp_fd holds 3-point d' at the interior points; dp_center and dpp_fd use
    5-point stencils at the middle point.

    ``geometry`` = (a0, rho0) of the eps -> 0 base point for the closed forms;
    defaults to the middle wave's (a, rho).
    """
    if len(branch) < 5:
        raise BranchTooShort(f"need at least 5 branch points, got {len(branch)}")
    cs = np.array([w.c for w in branch])
    dc = np.diff(cs)
    if np.max(np.abs(dc - dc.mean())) > 1e-9 * abs(dc.mean()):
        raise BranchTooShort("branch points must be equispaced in c")
    h = dc.mean()
    d = np.array([moment(w, g, b) for w in branch])
    P = np.array([dy.momentum(w.state) for w in branch])
    dp = [(d[i + 1] - d[i - 1]) / (2 * h) for i in range(1, len(d) - 1)]
    m = len(d) // 2
    w5 = d[m - 2:m + 3]
    dp5 = (w5[0] - 8 * w5[1] + 8 * w5[3] - w5[4]) / (12 * h)
    dpp = (-w5[0] + 16 * w5[1] - 30 * w5[2] + 16 * w5[3] - w5[4]) / (12 * h**2)
    p = branch[m].params
    a0, r0 = (branch[m].a, branch[m].rho) if geometry is None else geometry
    base = (a0, r0, p.gamma1, p.gamma2)
    return BranchDiagnostics(
        c_values=[float(c) for c in cs], d_values=[float(x) for x in d],
        dpp_closed_form=float(dpp_closed_form(*base)), dpp_fd=float(dpp),
        p_values=[float(x) for x in P], dp_fd=[float(x) for x in dp],
        dpp_uncancelled=float(dpp_uncancelled(*base)),
        dp_center=float(dp5), p_center=float(P[m]))


# ---------------------------------------------------------------------------
# nonlinear instability experiment


@dataclass
class GrowthReport:
    direction: str
    amplitude: float
    dt: float
    t: list
    distance: list
    growth_factor: float
    efold_time: float
    breach: object = None

    def to_json(self):
        d = asdict(self)
        d["breach"] = None if self.breach is None else asdict(self.breach)
        return json.dumps(d, indent=2, default=float)


def orbital_distance(wave, u, t_guess):
    """inf_s ||T(s) U_c - u||_X by golden-section search seeded at s = c t."""
    U = wave.state
    grid = U.grid
    zu = u.as_vector()

    def f(s):
        d = dy.translate(U, s).as_vector() - zu
        return x_norm(grid, dy.TangentVector.from_vector(d, grid.N))

    s0 = wave.c * t_guess
    hs = 0.5 * grid.h
    r = minimize_scalar(f, bracket=(s0 - hs, s0 + hs), method="golden", tol=1e-10)
    return float(r.fun), float(r.x)


def perturbation_direction(wave, direction, report=None, seed=0):
    u = wave.state
    grid = u.grid
    if direction == "chi_c":
        if report is None:
            report = spectrum_report(wave)
        t = report.chi_c
    elif direction == "translation":
        t = translation_mode(u)
    elif direction in ("random", "transverse"):
        rng = np.random.default_rng(seed)
        x = grid.nodes
        env = np.exp(-x**2 / 8)
        t = dy.TangentVector(rng.normal() * env, project(rng.normal() * x * env),
                             rng.normal(size=2), rng.normal(size=2))
        if direction == "transverse":
            # remove the translation component in the X inner product
            T = translation_mode(u)
            c = _x_inner(grid, t, T) / _x_inner(grid, T, T)
            t = t - T.scaled(c)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return t.scaled(1.0 / x_norm(grid, t))


def _x_inner(grid, s, t):
    a = x_norm(grid, dy.TangentVector.from_vector(s.as_vector() + t.as_vector(), grid.N))
    b = x_norm(grid, dy.TangentVector.from_vector(s.as_vector() - t.as_vector(), grid.N))
    return 0.25 * (a * a - b * b)


def instability_experiment(wave, direction="chi_c", amplitude=1e-4, T=100.0, dt=0.05,
                           samples=50, report=None, g=1.0, b=1.0, seed=0, order=None,
                           form="direct"):
    """Evolve U_c + amplitude * direction and record the orbital distance.

    ``order`` lowers the DNO expansion order for the run (the wave's own
    order by default); at small amplitude the truncation is far below the
    perturbation size.  ``form`` defaults to the explicit equations of
    motion, for which the solved wave is an exact relative equilibrium; the
    printed-sign J grad E moves its centers at O(eps^3) relative to c.
    """
    u0 = wave.state
    if order is not None:
        s = u0.surface
        u0 = dy.FullState(SurfaceState(s.eta, s.phi, s.grid, order), u0.dipole)
        wave = replace(wave, state=u0)
    d = perturbation_direction(wave, direction, report, seed)
    z = u0.as_vector() + amplitude * d.as_vector()
    start = u0.from_vector(z)
    stride = max(1, int(round(T / dt / samples)))
    tr = dy.evolve(start, dt, T, g, b, form=form, stride=stride)
    ts, ds = [], []
    for t, u in tr.snapshots:
        dist, _ = orbital_distance(wave, u, t)
        ts.append(float(t))
        ds.append(dist)
    d0 = max(ds[0], 1e-300)
    gf = ds[-1] / max(amplitude, 1e-300) if amplitude > 0 else 0.0
    rate = np.nan
    if amplitude > 0 and len(ts) > 2 and ds[-1] > ds[0]:
        rate = np.log(ds[-1] / d0) / (ts[-1] - ts[0])
    return GrowthReport(direction, amplitude, dt, ts, ds, float(gf),
                        float(1 / rate) if rate and rate > 0 else float("inf"), tr.breach)
