"""Hamiltonian formulation of the surface/dipole system.

State u = (eta, phi, xbar, ybar).  Energy, momentum, their L2 gradients, the
Poisson map J(u), the explicit evolution system and an RK4 integrator.

Integrals are trapezoidal sums over the periodic box (spectrally accurate for
decaying integrands).  The non-decaying trace Theta|S is kept out of the
quadratures by integrating by parts once:

    1/2 <Theta, grad_perp Theta> = 1/2 <Gamma, grad_perp Gamma>,
    -<eta', Theta>               = <eta, grad_top Theta>,

both exact on the line because Gamma vanishes on the undisturbed surface.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import potentials as pot
from .errors import BreachEvent, EpsilonZero, StepUnstable, VortexNearSurface
from .potentials import DipoleConfig
from .surface import SurfaceState, deriv, extension_gradient, project, shift

J2 = np.array([[0.0, -1.0], [1.0, 0.0]])  # rotation by +pi/2


@dataclass
class FullState:
    surface: SurfaceState
    dipole: DipoleConfig

    @property
    def grid(self):
        return self.surface.grid

    @property
    def eps(self):
        return self.dipole.epsilon

    def as_vector(self):
        s = self.surface
        return np.concatenate([s.eta, s.phi, self.dipole.xbar, self.dipole.ybar])

    def from_vector(self, z):
        n = self.grid.N
        surf = SurfaceState(z[:n], project(z[n:2 * n]), self.grid, self.surface.order)
        d = self.dipole
        return FullState(surf, DipoleConfig(z[2 * n:2 * n + 2], z[2 * n + 2:], d.gamma1, d.gamma2, d.epsilon))


@dataclass
class CotangentVector:
    d_eta: np.ndarray
    d_phi: np.ndarray
    d_xbar: np.ndarray
    d_ybar: np.ndarray

    def as_vector(self):
        return np.concatenate([self.d_eta, self.d_phi, self.d_xbar, self.d_ybar])

    @classmethod
    def from_vector(cls, z, n):
        return cls(z[:n], z[n:2 * n], z[2 * n:2 * n + 2], z[2 * n + 2:2 * n + 4])

    def __sub__(self, o):
        return CotangentVector(self.d_eta - o.d_eta, self.d_phi - o.d_phi,
                               self.d_xbar - o.d_xbar, self.d_ybar - o.d_ybar)

    def scaled(self, c):
        return CotangentVector(c * self.d_eta, c * self.d_phi, c * self.d_xbar, c * self.d_ybar)


# tangent increments carry the same four blocks
TangentVector = CotangentVector


def translate(u, s):
    """(eta(.-s), phi(.-s), xbar + s e1, ybar + s e1)."""
    g = u.grid
    surf = SurfaceState(shift(u.surface.eta, g, s), shift(u.surface.phi, g, s), g, u.surface.order)
    return FullState(surf, u.dipole.translated(s))


# ---------------------------------------------------------------------------
# surface traces


@dataclass
class _Traces:
    x: np.ndarray
    eta: np.ndarray
    etax: np.ndarray
    phix: np.ndarray
    Gphi: np.ndarray
    G: np.ndarray        # Gamma|S
    T1: np.ndarray       # Theta_x1|S
    T2: np.ndarray       # Theta_x2|S
    H: tuple             # Hessian of Theta at S (h11, h12, h22)

    @property
    def perp(self):      # grad_perp Theta
        return -self.etax * self.T1 + self.T2

    @property
    def top(self):       # grad_top Theta
        return self.T1 + self.etax * self.T2


def _traces(u):
    s, cfg, grid = u.surface, u.dipole, u.grid
    x = grid.nodes
    eta = s.eta
    T1, T2 = pot.grad_theta(x, eta, cfg)
    return _Traces(x, eta, s.eta_x, deriv(s.phi, grid), s.Gphi, sum(pot.gamma_terms(x, eta, cfg)),
                   T1, T2, pot.hess_theta(x, eta, cfg))


def _perp_jac(tr, cfg, which):
    """grad_perp of the two components of xi (which=1) or zeta (which=2)."""
    d11, d21, d12, d22 = pot.xi_zeta_jacobian(tr.x, tr.eta, cfg, which)
    return np.array([-tr.etax * d11 + d21, -tr.etax * d12 + d22])


def _inner(grid, f, g):
    return grid.h * np.sum(f * g, axis=-1)


# ---------------------------------------------------------------------------
# energy and momentum


def _sign(convention):
    if convention == "printed":
        return 1.0
    if convention == "consistent":
        return -1.0
    raise ValueError(f"unknown convention {convention!r}")


def energy_parts(u, g=1.0, b=1.0, convention="printed"):
    """Energy split into K0, K1, K2, V.

    ``convention="consistent"`` negates Gamma* (see poisson_apply).
    """
    sg = _sign(convention)
    tr = _traces(u)
    grid, eps = u.grid, u.eps
    phi = u.surface.phi
    K0 = 0.5 * _inner(grid, phi, tr.Gphi)
    K1 = _inner(grid, phi, tr.perp)
    # grad_perp Gamma = -grad_top Theta
    K2 = 0.5 * _inner(grid, tr.G, -tr.top) + sg * pot.gamma_star(u.dipole)
    V = grid.h * np.sum(0.5 * g * tr.eta**2 + b * (np.sqrt(1 + tr.etax**2) - 1))
    return {"K0": K0, "K1": K1, "K2": K2, "V": V, "E": K0 + eps * K1 + eps**2 * K2 + V}


def energy(u, g=1.0, b=1.0, convention="printed"):
    """E = K0 + eps K1 + eps^2 K2 + V."""
    return energy_parts(u, g, b, convention)["E"]


def momentum(u, convention="printed"):
    """P = -eps g1 xbar2 + eps g2 ybar2 - int eta' (phi + eps Theta|S)."""
    sg = _sign(convention)
    tr = _traces(u)
    cfg, eps, grid = u.dipole, u.eps, u.grid
    return (sg * (-eps * cfg.gamma1 * cfg.xbar[1] + eps * cfg.gamma2 * cfg.ybar[1])
            - _inner(grid, tr.etax, u.surface.phi) + eps * _inner(grid, tr.eta, tr.top))


def grad_energy(u, g=1.0, b=1.0, convention="printed"):
    sg = _sign(convention)
    tr = _traces(u)
    cfg, eps, grid = u.dipole, u.eps, u.grid
    phi = u.surface.phi
    s2 = 1 + tr.etax**2
    E_phi = project(tr.Gphi + eps * tr.perp)
    E_eta = (0.5 / s2 * (tr.phix**2 - tr.Gphi**2 - 2 * tr.etax * tr.phix * tr.Gphi)
             + eps * tr.phix * tr.T1 + 0.5 * eps**2 * (tr.T1**2 + tr.T2**2)
             + g * tr.eta - b * deriv(tr.etax / np.sqrt(s2), grid))
    Theta = sum(pot.theta_terms(tr.x, tr.eta, cfg))
    xi, zeta = pot.xi_zeta((tr.x, tr.eta), cfg)
    gx, gy = pot.grad_gamma_star(cfg)
    out = []
    for vec, which, gs in ((xi, 1, gx), (zeta, 2, gy)):
        pj = _perp_jac(tr, cfg, which)
        out.append(-eps * _inner(grid, phi, pj)
                   - 0.5 * eps**2 * _inner(grid, vec * tr.perp + Theta * pj, 1.0)
                   + sg * eps**2 * np.asarray(gs))
    return CotangentVector(E_eta, E_phi, out[0], out[1])


def grad_momentum(u, convention="printed"):
    sg = _sign(convention)
    tr = _traces(u)
    cfg, eps, grid = u.dipole, u.eps, u.grid
    xi, zeta = pot.xi_zeta((tr.x, tr.eta), cfg)
    e2 = np.array([0.0, 1.0])
    return CotangentVector(tr.phix + eps * tr.T1, -tr.etax,
                           -sg * eps * cfg.gamma1 * e2 + eps * _inner(grid, tr.etax, xi),
                           sg * eps * cfg.gamma2 * e2 + eps * _inner(grid, tr.etax, zeta))


# ---------------------------------------------------------------------------
# Poisson map


def poisson_apply(u, w, convention="printed"):
    """J(u) w with J = B(u) J_hat.

    The x- and y-rows are

        (Jw)_x = s [g1^-1 JJ <xi, w_phi> + (eps g1)^-1 JJ w_x],
        (Jw)_y = -s [g2^-1 JJ <zeta, w_phi> + (eps g2)^-1 JJ w_y],

    and (Jw)_phi = P0[-w_eta + eps xi.(Jw)_x + eps zeta.(Jw)_y], which is the
    printed J22, J23, J24 block for s = 1.  The printed operator has s = 1.
    With s = 1, Green's identity gives g1^-1 JJ (<xi, G phi> - <phi, grad_perp xi>)
    = -grad Phi(xbar), so the printed pair (E, J) moves the vortices against the
    irrotational flow.  ``convention="consistent"`` uses s = -1 together with
    the sign-flipped Gamma* and vortex impulse, which reproduces the explicit
    system exactly.
    """
    eps = u.eps
    if eps == 0:
        raise EpsilonZero("J(u) has (eps gamma)^-1 vortex blocks; eps must be nonzero")
    sg = _sign(convention)
    cfg, grid = u.dipole, u.grid
    g1, g2 = cfg.gamma1, cfg.gamma2
    xi, zeta = pot.xi_zeta((grid.nodes, u.surface.eta), cfg)
    wphi = project(w.d_phi)
    xt = sg * (J2 @ _inner(grid, xi, wphi) / g1 + J2 @ np.asarray(w.d_xbar) / (eps * g1))
    yt = -sg * (J2 @ _inner(grid, zeta, wphi) / g2 + J2 @ np.asarray(w.d_ybar) / (eps * g2))
    d_phi = -w.d_eta + eps * (xi[0] * xt[0] + xi[1] * xt[1] + zeta[0] * yt[0] + zeta[1] * yt[1])
    return TangentVector(wphi, project(d_phi), xt, yt)


def hamiltonian_rhs(u, g=1.0, b=1.0, convention="printed"):
    """J(u) grad E(u)."""
    return poisson_apply(u, grad_energy(u, g, b, convention), convention)


# ---------------------------------------------------------------------------
# explicit evolution system


def _interp(f, grid, x):
    """Trigonometric interpolant of grid data at points x."""
    fh = np.fft.rfft(f) / grid.N
    w = np.full(fh.shape, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    ph = np.exp(1j * np.outer(np.atleast_1d(x) + grid.L, grid.k))
    return np.real(ph @ (w * fh))


def surface_separation(u):
    """min(eta(xbar1) - xbar2, eta(ybar1) - ybar2)."""
    d = u.dipole
    e = _interp(u.surface.eta, u.grid, [d.xbar[0], d.ybar[0]])
    return float(min(e[0] - d.xbar[1], e[1] - d.ybar[1]))


def vortex_velocities(u):
    """Kirchhoff-Helmholtz velocities of the two centers."""
    cfg, s, grid = u.dipole, u.surface, u.grid
    d1, d2 = extension_gradient(s.eta, s.phi, grid, s.order, np.array([cfg.xbar[0], cfg.ybar[0]]),
                                np.array([cfg.xbar[1], cfg.ybar[1]]))
    eps = u.eps
    tx = pot.grad_theta(cfg.xbar[0], cfg.xbar[1], cfg, include=("1*", "2", "2*"))
    ty = pot.grad_theta(cfg.ybar[0], cfg.ybar[1], cfg, include=("1", "1*", "2*"))
    xt = np.array([d1[0] + eps * float(tx[0]), d2[0] + eps * float(tx[1])])
    yt = np.array([d1[1] + eps * float(ty[0]), d2[1] + eps * float(ty[1])])
    return xt, yt


def evolution_rhs(u, g=1.0, b=1.0, delta_surf=None):
    """Time derivative of (eta, phi, xbar, ybar) from the explicit system."""
    grid = u.grid
    dsurf = 3 * grid.h if delta_surf is None else delta_surf
    sep = surface_separation(u)
    if sep < dsurf:
        raise VortexNearSurface(f"vortex-surface separation {sep:.3e} below {dsurf:.3e}")
    tr = _traces(u)
    cfg, eps = u.dipole, u.eps
    s2 = 1 + tr.etax**2
    xt, yt = vortex_velocities(u)
    xi, zeta = pot.xi_zeta((tr.x, tr.eta), cfg)
    dtTheta = -(xi[0] * xt[0] + xi[1] * xt[1]) - (zeta[0] * yt[0] + zeta[1] * yt[1])
    eta_t = project(tr.Gphi + eps * tr.perp)
    phi_t = (-0.5 / s2 * (tr.phix**2 - 2 * tr.etax * tr.phix * tr.Gphi - tr.Gphi**2)
             - eps * dtTheta - eps * tr.phix * tr.T1 - 0.5 * eps**2 * (tr.T1**2 + tr.T2**2)
             - g * tr.eta + b * deriv(tr.eta, grid, 2) / s2**1.5)
    return TangentVector(eta_t, project(phi_t), xt, yt)


# ---------------------------------------------------------------------------
# time integration


@dataclass
class Trajectory:
    t: list = field(default_factory=list)
    E: list = field(default_factory=list)
    P: list = field(default_factory=list)
    xbar: list = field(default_factory=list)
    ybar: list = field(default_factory=list)
    eta_max: list = field(default_factory=list)
    separation: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)   # (t, FullState)
    breach: BreachEvent = None
    convention: str = "printed"

    @property
    def final(self):
        return self.snapshots[-1][1]

    def record(self, t, u, g, b):
        self.t.append(t)
        self.E.append(energy(u, g, b, self.convention))
        self.P.append(momentum(u, self.convention))
        self.xbar.append(tuple(u.dipole.xbar))
        self.ybar.append(tuple(u.dipole.ybar))
        self.eta_max.append(float(np.max(np.abs(u.surface.eta))))
        self.separation.append(surface_separation(u))

    def drift(self):
        E0, P0 = self.E[0], self.P[0]
        return (max(abs(e - E0) for e in self.E) / max(1.0, abs(E0)),
                max(abs(p - P0) for p in self.P) / max(1.0, abs(P0)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "E", "P", "xbar1", "xbar2", "ybar1", "ybar2", "eta_max", "min_separation"])
            for i in range(len(self.t)):
                w.writerow([repr(float(v)) for v in (self.t[i], self.E[i], self.P[i], *self.xbar[i],
                                                    *self.ybar[i], self.eta_max[i], self.separation[i])])

    def save_snapshots(self, path_npz, path_json, meta=None):
        arrs = {}
        for i, (t, u) in enumerate(self.snapshots):
            arrs[f"eta_{i}"] = u.surface.eta
            arrs[f"phi_{i}"] = u.surface.phi
            arrs[f"centers_{i}"] = np.concatenate([u.dipole.xbar, u.dipole.ybar])
        np.savez(path_npz, **arrs)
        info = {"times": [t for t, _ in self.snapshots], "fields": ["eta", "phi", "centers"],
                "breach": None if self.breach is None else vars(self.breach)}
        info.update(meta or {})
        with open(path_json, "w") as fh:
            json.dump(info, fh, indent=2, default=float)


def stability_number(grid, dt, g=1.0, b=1.0):
    """dt times the fastest linear frequency sqrt(k (g + b k^2))."""
    kmax = grid.k[-1]
    return dt * np.sqrt(kmax * (g + b * kmax**2))


def evolve(u0, dt, T, g=1.0, b=1.0, form="hamiltonian", stride=None, delta_surf=None,
           stage_hook=None, convention="printed"):
    """Classical RK4 from u0 over [0, T].

    ``form`` selects J grad E ("hamiltonian") or the explicit system
    ("direct").  The two agree under convention="consistent"; the printed
    signs move the vortex centers differently.  Integration stops with a
    BreachEvent when the vortex-surface guard trips.
    """
    grid = u0.grid
    if stability_number(grid, dt, g, b) > 2.8:
        raise StepUnstable(f"dt={dt} exceeds the RK4 bound for capillary dispersion "
                           f"(dt*omega_max = {stability_number(grid, dt, g, b):.2f} > 2.8)")
    n = grid.N
    dsurf = 3 * grid.h if delta_surf is None else delta_surf

    def f(z):
        u = u0.from_vector(z)
        if form == "hamiltonian":
            sep = surface_separation(u)
            if sep < dsurf:
                raise VortexNearSurface(f"vortex-surface separation {sep:.3e} below {dsurf:.3e}")
            r = hamiltonian_rhs(u, g, b, convention)
        else:
            r = evolution_rhs(u, g, b, dsurf)
        return r.as_vector()

    nsteps = int(round(T / dt))
    stride = nsteps if stride is None else stride
    traj = Trajectory(convention=convention)
    z = u0.as_vector()
    traj.record(0.0, u0, g, b)
    traj.snapshots.append((0.0, u0))
    t = 0.0
    for i in range(1, nsteps + 1):
        try:
            k1 = f(z)
            k2 = f(z + 0.5 * dt * k1)
            k3 = f(z + 0.5 * dt * k2)
            k4 = f(z + dt * k3)
        except VortexNearSurface as e:
            u = u0.from_vector(z)
            traj.breach = BreachEvent(t, surface_separation(u), "vortex", str(e))
            traj.snapshots.append((t, u))
            return traj
        zn = z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        nz, nn = np.linalg.norm(z), np.linalg.norm(zn)
        if not np.all(np.isfinite(zn)) or nn > 1e3 * max(nz, 1e-300):
            raise StepUnstable(f"state norm grew from {nz:.3e} to {nn:.3e} at t={t + dt:.4g}")
        z = zn
        t = i * dt
        u = u0.from_vector(z)
        traj.record(t, u, g, b)
        if i % stride == 0 or i == nsteps:
            traj.snapshots.append((t, u))
        if stage_hook is not None:
            stage_hook(t, u)
    return traj
