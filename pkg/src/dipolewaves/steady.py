"""Steady traveling waves: the scaled operator F, closed-form existence
quantities and a damped Newton / continuation solver.

Scaled unknowns: eta = eps*eta_t, psi = eps*psi_t, c = eps*c_t.  The solver
works in the reflection-symmetric subspace.  eta_t and psi_t are even, so they
are parametrized by cosine coefficients.  The Nyquist and mean modes of psi_t
are dropped because F sees psi_t only through psi_t' and G psi_t.  F1 is even
and is sampled on x1 >= 0.  F2 is odd and is sampled on 0 < x1 < L.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import potentials as pot
from .dynamics import FullState
from .errors import (CompatibilityViolated, DegenerateGeometry, NewtonDiverged,
                     SingularEvaluation, SymmetryBroken)
from .surface import (Grid, SurfaceState, _dno, antideriv, deriv, extension_gradient,
                      project)

RESIDUAL_TOL = 1e-10


@dataclass
class SteadyParams:
    epsilon: float
    c_t: float
    gamma1: float
    gamma2: float
    b: float = 1.0
    g: float = 1.0

    def __post_init__(self):
        if not (self.b > 0 and self.g > 0):
            raise ValueError("b and g must be positive")


@dataclass
class SteadyUnknowns:
    eta_t: np.ndarray
    psi_t: np.ndarray
    a: float
    rho: float
    x1: float = 0.0  # horizontal position of the pair (translated frames)

    def __post_init__(self):
        if not (0 < self.rho < self.a):
            raise DegenerateGeometry(f"need 0 < rho < a, got a={self.a}, rho={self.rho}")


@dataclass
class TravelingWave:
    c: float
    state: FullState
    a: float
    rho: float
    residual_norm: float
    params: SteadyParams
    unknowns: SteadyUnknowns = field(repr=False, default=None)
    iterations: int = 0


# ---------------------------------------------------------------------------
# closed-form existence quantities


def _check_geometry(a0, rho0):
    if not (0 < rho0 < a0):
        raise DegenerateGeometry(f"need 0 < rho0 < a0, got a0={a0}, rho0={rho0}")


def compatibility_gamma2(a0, rho0, gamma1):
    """gamma2 = gamma1 (a0^3 + rho0^3)/(a0^3 - rho0^3)."""
    _check_geometry(a0, rho0)
    return gamma1 * (a0**3 + rho0**3) / (a0**3 - rho0**3)


def base_speed(a0, rho0, gamma1, gamma2):
    """c_t0 = -g1/(4pi(a0-rho0)) + (g2/4pi)(1/a0 + 1/rho0)."""
    _check_geometry(a0, rho0)
    return -gamma1 / (4 * np.pi * (a0 - rho0)) + gamma2 / (4 * np.pi) * (1 / a0 + 1 / rho0)


def _check_compat(a0, rho0, gamma1, gamma2, tol=1e-12):
    g2 = compatibility_gamma2(a0, rho0, gamma1)
    if abs(gamma2 - g2) > tol * abs(g2):
        raise CompatibilityViolated(f"gamma2={gamma2} but compatibility requires {g2}")


def matrix_T(a0, rho0, gamma1, gamma2, check=True):
    """Entries of the 2x2 matrix T, its numeric determinant and the closed form."""
    _check_geometry(a0, rho0)
    if check:
        _check_compat(a0, rho0, gamma1, gamma2)
    q = 4 * np.pi
    a, r, g1, g2 = a0, rho0, gamma1, gamma2
    T = np.array([
        [-g1 / (q * (a - r) ** 2) + g2 / (q * a**2), g1 / (q * (a - r) ** 2) + g2 / (q * r**2)],
        [-g1 / (q * a**2) + g2 / (q * (a + r) ** 2), g2 / (q * (a + r) ** 2) + g1 / (q * r**2)],
    ])
    det_num = T[0, 0] * T[1, 1] - T[0, 1] * T[1, 0]
    det_cf = -(g1**2 / (16 * np.pi**2)) * 6 * (a**4 - a**2 * r**2 + r**4) / (
        (a + r) * (a - r) ** 3 * (a**2 + a * r + r**2) ** 2)
    return T, det_num, det_cf


def first_order_coefficients(a0, rho0, gamma1, gamma2):
    """(a_0100, rho_0100), the derivatives of (a, rho) in c_t at eps = 0."""
    _check_compat(a0, rho0, gamma1, gamma2)
    _, _, det = matrix_T(a0, rho0, gamma1, gamma2)
    q = 4 * np.pi
    a, r, g1, g2 = a0, rho0, gamma1, gamma2
    a1 = (-g2 / (q * (a + r) ** 2) - g1 / (q * r**2) + g1 / (q * (a - r) ** 2) + g2 / (q * r**2)) / det
    r1 = (g2 / (q * (a + r) ** 2) - g1 / (q * a**2) + g1 / (q * (a - r) ** 2) - g2 / (q * a**2)) / det
    return a1, r1


def axis_gamma_x2(x1, a, rho, gamma1, gamma2):
    """Gamma_x2(x1, 0) for the symmetric pair at (0, -a +- rho)."""
    return (gamma1 / np.pi) * (a - rho) / (x1**2 + (a - rho) ** 2) - (gamma2 / np.pi) * (a + rho) / (
        x1**2 + (a + rho) ** 2)


def asymptotic_eta(grid, a0, rho0, gamma1, gamma2, epsilon, b=1.0, g=1.0, bernoulli_quadratic=False):
    """Leading-order elevation -eps^2 (g - b d^2)^-1 [c_t0 Gamma_x2(x1, 0)].

    With ``bernoulli_quadratic`` the (1/2) Gamma_x2^2 term that the scaled
    Bernoulli residual carries at the same order is included.
    """
    c0 = base_speed(a0, rho0, gamma1, gamma2)
    G2 = axis_gamma_x2(grid.nodes, a0, rho0, gamma1, gamma2)
    src = c0 * G2 + (0.5 * G2**2 if bernoulli_quadratic else 0.0)
    fh = grid.fft(src) / (g + b * grid.k**2)
    return -epsilon**2 * grid.ifft(fh)


# ---------------------------------------------------------------------------
# residual


def _dipole(a, rho, params, x1=0.0):
    return pot.DipoleConfig.symmetric(a, rho, params.gamma1, params.gamma2, params.epsilon, x1)


def residual(unknowns, params, grid, order=8, full=False):
    """Scaled residuals (F1, F2, F3, F4) on the full grid.

    The c_t term of F1 uses c_t (G psi_t + eps eta_t' psi_t')/<eps eta_t'>^2,
    i.e. c times the vertical derivative of the stream function.
    """
    eps, ct, b, g = params.epsilon, params.c_t, params.b, params.g
    a, rho = unknowns.a, unknowns.rho
    if a - rho < pot.DELTA_MIN or rho < pot.DELTA_MIN:
        raise SingularEvaluation("vortex depth or separation below guard")
    et, pt = unknowns.eta_t, unknowns.psi_t
    x = grid.nodes
    eta = eps * et
    if np.max(np.abs(eta)) * 5 > a - rho:
        raise SingularEvaluation("upper vortex too close to the surface (a - rho < 5 |eta|)")
    cfg = _dipole(a, rho, params, unknowns.x1)
    etx = deriv(et, grid)
    etxx = deriv(et, grid, 2)
    px = deriv(pt, grid)
    Gp = _dno(eta, pt, grid, order)
    s2 = 1.0 + (eps * etx) ** 2
    G1, G2 = pot.grad_gamma(x, eta, cfg)
    perpG = -eps * etx * G1 + G2
    topG = G1 + eps * etx * G2
    F1 = (eps * ct / s2 * (Gp + eps * etx * px) + eps * ct * G2
          + eps / (2 * s2) * (px**2 + Gp**2)
          + eps / s2 * (Gp * perpG + px * topG)
          + eps / 2 * (G1**2 + G2**2)
          + g * et - b * etxx / s2**1.5)
    F2 = eps * ct * etx + px + topG
    pts1 = np.array([cfg.xbar[0], cfg.ybar[0]])
    pts2 = np.array([cfg.xbar[1], cfg.ybar[1]])
    _, dpsi2 = extension_gradient(eta, pt, grid, order, pts1, pts2)
    F3 = ct + dpsi2[0] + pot.grad_gamma(cfg.xbar[0], cfg.xbar[1], cfg, include=("2", "1*", "2*"))[1]
    F4 = ct + dpsi2[1] + pot.grad_gamma(cfg.ybar[0], cfg.ybar[1], cfg, include=("1", "1*", "2*"))[1]
    return F1, F2, float(F3), float(F4)


def residual_sup(F):
    F1, F2, F3, F4 = F
    return max(np.max(np.abs(F1)), np.max(np.abs(F2)), abs(F3), abs(F4))


# ---------------------------------------------------------------------------
# symmetric parametrization


class _Basis:
    def __init__(self, grid):
        n = grid.N
        x = grid.nodes
        self.grid = grid
        self.ne = n // 2 + 1                    # eta cosine modes 0..N/2
        self.np_ = n // 2 - 1                    # psi cosine modes 1..N/2-1
        self.Ce = np.cos(np.outer(x, grid.k))
        self.Cp = self.Ce[:, 1:-1]
        self.i1 = np.r_[np.arange(n // 2, n), 0]     # x1 >= 0 (node 0 is x1 = -L = L)
        self.i2 = np.arange(n // 2 + 1, n)           # 0 < x1 < L
        self.size = self.ne + self.np_ + 2
        # least-squares projections (exact for even data)
        self.Pe = np.linalg.pinv(self.Ce)
        self.Pp = np.linalg.pinv(self.Cp)

    def unpack(self, z):
        ce = z[: self.ne]
        cp = z[self.ne: self.ne + self.np_]
        return SteadyUnknowns(self.Ce @ ce, self.Cp @ cp, z[-2], z[-1])

    def pack(self, u):
        return np.concatenate([self.Pe @ u.eta_t, self.Pp @ project(u.psi_t), [u.a, u.rho]])

    def reduce(self, F):
        F1, F2, F3, F4 = F
        return np.concatenate([F1[self.i1], F2[self.i2], [F3, F4]])


def _parity_error(f, grid, sign):
    r = np.roll(f[::-1], 1)  # reflection about x1 = 0
    return np.max(np.abs(r - sign * f))


def newton_solve(guess, params, grid, order=8, tol=RESIDUAL_TOL, maxiter=30, fd_step=1e-7):
    """Damped chord-Newton solve in the symmetric subspace."""
    B = _Basis(grid)
    z = B.pack(guess)

    def R(zz):
        return B.reduce(residual(B.unpack(zz), params, grid, order))

    r = R(z)
    nrm = np.max(np.abs(r))
    if nrm <= tol:
        return B.unpack(z), nrm, 0
    J = None
    it = 0
    for it in range(1, maxiter + 1):
        if J is None:
            J = np.empty((B.size, B.size))
            for j in range(B.size):
                h = fd_step * max(1.0, abs(z[j])) if j >= B.size - 2 else fd_step
                zp = z.copy()
                zp[j] += h
                J[:, j] = (R(zp) - r) / h
        dz = np.linalg.solve(J, -r)
        lam = 1.0
        while True:
            zn = z + lam * dz
            try:
                rn = R(zn)
                nn = np.max(np.abs(rn))
            except (SingularEvaluation, DegenerateGeometry, ValueError):
                nn = np.inf
            if nn < nrm or lam < 1e-3:
                break
            lam *= 0.5
        if not np.isfinite(nn) or nn >= nrm:
            if J is not None and it > 1:
                J = None  # refresh the Jacobian once before giving up
                continue
            raise NewtonDiverged(f"Newton stalled at residual {nrm:.3e}", B.unpack(z), nrm)
        slow = nn > 0.1 * nrm
        z, r, nrm = zn, rn, nn
        if nrm <= tol:
            return B.unpack(z), nrm, it
        if slow:
            J = None
    raise NewtonDiverged(f"Newton did not converge: residual {nrm:.3e}", B.unpack(z), nrm)


def to_traveling_wave(unknowns, params, grid, order, res_norm, iters=0):
    """Convert scaled steady unknowns to the Hamiltonian variables."""
    eps = params.epsilon
    eta = eps * unknowns.eta_t
    psi = eps * project(unknowns.psi_t)
    # phi' = -G(eta) psi
    phi = project(-antideriv(_dno(eta, psi, grid, order), grid))
    surf = SurfaceState(eta, phi, grid, order)
    cfg = _dipole(unknowns.a, unknowns.rho, params)
    return TravelingWave(eps * params.c_t, FullState(surf, cfg), unknowns.a, unknowns.rho,
                         res_norm, params, unknowns, iters)


def check_symmetry(unknowns, params, grid, order=8, tol=1e-8):
    F1, F2, _, _ = residual(unknowns, params, grid, order)
    errs = (_parity_error(unknowns.eta_t, grid, 1), _parity_error(unknowns.psi_t, grid, 1),
            _parity_error(F1, grid, 1), _parity_error(F2, grid, -1))
    if max(errs[:2]) > tol:
        raise SymmetryBroken(f"parity violation {max(errs):.2e}")
    return max(errs)


def trivial_unknowns(grid, a0, rho0):
    return SteadyUnknowns(np.zeros(grid.N), np.zeros(grid.N), a0, rho0)


def solve_point(params, grid, guess, order=8, tol=RESIDUAL_TOL):
    u, nrm, it = newton_solve(guess, params, grid, order, tol)
    check_symmetry(u, params, grid, order)
    return to_traveling_wave(u, params, grid, order, nrm, it)


def default_schedule(epsilon, c_t=None, n_eps=3, c_offsets=(0.0,)):
    """Continuation in eps from 0 to epsilon, then one point per c_t offset.

    Entries are (epsilon, c_t) pairs; c_t = None means the base speed.  The
    returned branch contains only the final-eps points.
    """
    steps = [(e, c_t) for e in np.linspace(0.0, epsilon, n_eps + 1)]
    return steps, [(epsilon, None if c_t is None else c_t + dc, dc) for dc in c_offsets]


def solve_branch(params, geometry, schedule, grid, order=8, tol=RESIDUAL_TOL, keep_all=False):
    """Follow the branch along ``schedule`` = list of (epsilon, c_t) pairs.

    c_t = None stands for the base speed c_t0.  Each point seeds the next.  The
    first entry may be eps = 0, where the trivial root is returned unchanged.
    """
    a0, rho0 = geometry
    guess = trivial_unknowns(grid, a0, rho0)
    c0 = base_speed(a0, rho0, params.gamma1, params.gamma2)
    out = []
    prev_eps = None
    for eps, ct in schedule:
        p = replace(params, epsilon=float(eps), c_t=float(c0 if ct is None else ct))
        if prev_eps is not None and prev_eps > 0 and eps > 0:
            # eta_t and psi_t scale like eps, eps^2 near the trivial branch
            guess = SteadyUnknowns(guess.eta_t * (eps / prev_eps), guess.psi_t * (eps / prev_eps) ** 2,
                                   guess.a, guess.rho)
        wave = _solve_with_halving(p, grid, guess, prev_eps, order, tol)
        out.append(wave)
        guess = wave.unknowns
        prev_eps = eps
    return out


def _solve_with_halving(p, grid, guess, prev_eps, order, tol, depth=0):
    try:
        return solve_point(p, grid, guess, order, tol)
    except NewtonDiverged:
        if depth >= 4 or prev_eps is None:
            raise
        mid = 0.5 * (prev_eps + p.epsilon)
        w = _solve_with_halving(replace(p, epsilon=mid), grid, guess, prev_eps, order, tol, depth + 1)
        return _solve_with_halving(p, grid, w.unknowns, mid, order, tol, depth + 1)


# ---------------------------------------------------------------------------
# stream-function and velocity-potential cross-check residuals


def steady_residual_crosscheck(wave, printed_psi_form=False):
    """Sup norms of the velocity-potential and stream-function steady residuals.

    Both are evaluated in unscaled variables and divided by eps so that they
    share the scale of F1.  With ``printed_psi_form`` the c-term of the stream
    form is taken literally as c (psi' + eta' G psi)/<eta'>^2.
    """
    u = wave.state
    p = wave.params
    grid = u.grid
    eps, c, b, g = p.epsilon, wave.c, p.b, p.g
    eta, phi = u.surface.eta, u.surface.phi
    M = u.surface.order
    x = grid.nodes
    ex = deriv(eta, grid)
    exx = deriv(eta, grid, 2)
    s2 = 1 + ex**2
    phx = deriv(phi, grid)
    Gphi = _dno(eta, phi, grid, M)
    G1, G2 = pot.grad_gamma(x, eta, u.dipole)
    perpG = -ex * G1 + G2
    topG = G1 + ex * G2
    tail = eps * c * G2 + eps**2 / 2 * (G1**2 + G2**2) + g * eta - b * exx / s2**1.5
    r_phi = (-c / s2 * (phx - ex * Gphi) + 0.5 / s2 * (phx**2 + Gphi**2)
             + eps / s2 * (-phx * perpG + Gphi * topG) + tail)
    psi = eps * project(wave.unknowns.psi_t) if wave.unknowns is not None else None
    psx = deriv(psi, grid)
    Gpsi = _dno(eta, psi, grid, M)
    ct_term = (psx + ex * Gpsi) if printed_psi_form else (Gpsi + ex * psx)
    r_psi = (c / s2 * ct_term + 0.5 / s2 * (psx**2 + Gpsi**2)
             + eps / s2 * (Gpsi * perpG + psx * topG) + tail)
    if eps == 0:
        return float(np.max(np.abs(r_phi))), float(np.max(np.abs(r_psi)))
    return float(np.max(np.abs(r_phi)) / eps), float(np.max(np.abs(r_psi)) / eps)
