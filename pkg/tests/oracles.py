"""Independent numerical oracles used only by the test-suite.

``fd_dno`` solves Laplace's equation in {-H < x2 < eta(x1)} by second-order
finite differences on a boundary-fitted grid and returns the scaled normal
derivative -eta' Phi_x1 + Phi_x2 at the surface.  The map is

    x2 = Z(t) + eta(X) (1 + Z(t)/H),   t in [0, 1],

with Z stretched geometrically towards the surface.  The Laplacian becomes
div(K grad u) with K = [[J, -p], [-p, (1+p^2)/J]], J = dx2/dt, p = dx2/dX.
Homogeneous Neumann data are imposed at the bottom.
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve


def _Z(t, H, beta):
    s = np.expm1(beta * (1 - t)) / np.expm1(beta)
    dZ = H * beta * np.exp(beta * (1 - t)) / np.expm1(beta)
    return -H * s, dZ


def fd_dno_single(eta_fn, detas_fn, f_fn, L, nx, nt, H, beta):
    hx = 2 * L / nx
    X = -L + hx * np.arange(nx)
    t = np.linspace(0.0, 1.0, nt + 1)
    ht = t[1] - t[0]
    eta = eta_fn(X)
    etax = detas_fn(X)
    Z, dZ = _Z(t, H, beta)
    w = 1 + Z / H

    def coeffs(Xq, tq):
        e = eta_fn(Xq)
        ex = detas_fn(Xq)
        Zq, dZq = _Z(tq, H, beta)
        J = dZq * (1 + e / H)
        p = ex * (1 + Zq / H)
        return J, -p, (1 + p * p) / J

    nunk = nx * nt  # levels 0..nt-1 are unknown, level nt is Dirichlet
    idx = lambda i, j: (j * nx + (i % nx))
    rows, cols, vals = [], [], []
    rhs = np.zeros(nunk)
    fs = f_fn(X)

    def add(r, i, j, v):
        if j == nt:
            rhs[r] -= v * fs[i % nx]
        else:
            jj = -j if j < 0 else j  # Neumann reflection at the bottom
            rows.append(r)
            cols.append(idx(i, jj))
            vals.append(v)

    Xh = X + hx / 2
    for j in range(nt):
        tj = t[j]
        Ae, _, _ = coeffs(Xh, np.full(nx, tj))            # A at i+1/2
        Aw = np.roll(Ae, 1)                                 # A at i-1/2
        _, _, Cn = coeffs(X, np.full(nx, tj + ht / 2))
        _, _, Cs = coeffs(X, np.full(nx, tj - ht / 2))
        if j == 0:
            Cs = Cn  # mirror across the Neumann bottom
        _, Bc, _ = coeffs(X, np.full(nx, tj))
        Bp = np.roll(Bc, -1)
        Bm = np.roll(Bc, 1)
        _, Bup, _ = coeffs(X, np.full(nx, min(tj + ht, 1.0)))
        _, Bdn, _ = coeffs(X, np.full(nx, tj - ht if j > 0 else tj + ht))
        for i in range(nx):
            r = idx(i, j)
            add(r, i + 1, j, Ae[i] / hx**2)
            add(r, i - 1, j, Aw[i] / hx**2)
            add(r, i, j, -(Ae[i] + Aw[i]) / hx**2 - (Cn[i] + Cs[i]) / ht**2)
            add(r, i, j + 1, Cn[i] / ht**2)
            add(r, i, j - 1, Cs[i] / ht**2)
            c = 1.0 / (4 * hx * ht)
            # d/dX (B u_t): B_{i+1} u_t(i+1) - B_{i-1} u_t(i-1)
            add(r, i + 1, j + 1, Bp[i] * c)
            add(r, i + 1, j - 1, -Bp[i] * c)
            add(r, i - 1, j + 1, -Bm[i] * c)
            add(r, i - 1, j - 1, Bm[i] * c)
            # d/dt (B u_X)
            bu = Bup[i]
            bd = Bdn[i] if j > 0 else Bup[i]
            add(r, i + 1, j + 1, bu * c)
            add(r, i - 1, j + 1, -bu * c)
            add(r, i + 1, j - 1, -bd * c)
            add(r, i - 1, j - 1, bd * c)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(nunk, nunk))
    u = spsolve(A.tocsc(), rhs).reshape(nt, nx)
    u = np.vstack([u, fs])
    ut = (3 * u[nt] - 4 * u[nt - 1] + u[nt - 2]) / (2 * ht)
    uX = (np.roll(fs, -1) - np.roll(fs, 1)) / (2 * hx)
    J = dZ[nt] * (1 + eta / H)
    a2 = ut / J
    a1 = uX - etax * a2
    G = -etax * uX + (1 + etax**2) * a2
    return X, np.array([G, a1, a2])


def _richardson(eta_fn, detas_fn, f_fn, L, nx, nt, H, beta, levels):
    H = 6 * L if H is None else H
    res = []
    for lev in range(levels):
        s = 2**lev
        _, out = fd_dno_single(eta_fn, detas_fn, f_fn, L, nx * s, nt * s, H, beta)
        res.append(out[:, ::s])
    tab = res
    p = 1
    while len(tab) > 1:
        tab = [(4**p * tab[i + 1] - tab[i]) / (4**p - 1) for i in range(len(tab) - 1)]
        p += 1
    return -L + 2 * L / nx * np.arange(nx), tab[0]


def fd_dno(eta_fn, detas_fn, f_fn, L, nx=128, nt=64, H=None, beta=4.0, levels=2):
    """Richardson-extrapolated scaled normal derivative at nx coarse nodes."""
    X, out = _richardson(eta_fn, detas_fn, f_fn, L, nx, nt, H, beta, levels)
    return X, out[0]


def fd_velocity_trace(eta_fn, detas_fn, f_fn, L, nx=128, nt=64, H=None, beta=4.0, levels=2):
    """Richardson-extrapolated surface trace of grad Phi (a1, a2)."""
    X, out = _richardson(eta_fn, detas_fn, f_fn, L, nx, nt, H, beta, levels)
    return X, out[1], out[2]
