"""Surface unknowns on a periodic grid and the nonlocal surface operators.

The real line is truncated to [-L, L) with periodic identification.  Fourier
multipliers act through ``numpy.fft.rfft``; odd multipliers (derivatives) drop
the Nyquist mode so that D is exactly skew and |D| exactly symmetric.

The Dirichlet-Neumann operator G(eta) uses the Craig-Sulem Taylor series in
powers of eta about G(0) = |D|, in the self-adjoint ordering

    G_0 = |D|,
    G_j = (1/j!) |D|^(j-1) D eta^j D - sum_{m=1..j} |D|^m (eta^m/m!) G_{j-m},

with D = -i d/dx1, so D eta^j D f = -(eta^j f')'.  The harmonic extension is
represented by its Rayleigh series Phi = sum_k a_k exp(i k x1 + |k| x2), which
gives interior velocities at the vortex centres.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg, gmres

from .errors import ExpansionDiverged, NoConvergence, NonZeroMean

DEFAULT_ORDER = 8
SLOPE_GUARD = 0.5
TAIL_TOL = 1e-8


@dataclass(frozen=True)
class Grid:
    L: float
    N: int
    dealias: bool = True

    def __post_init__(self):
        if self.N < 64 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 64, got {self.N}")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def h(self):
        return 2 * self.L / self.N

    @cached_property
    def nodes(self):
        return -self.L + self.h * np.arange(self.N)

    @cached_property
    def k(self):
        return np.pi / self.L * np.arange(self.N // 2 + 1)

    @cached_property
    def k_odd(self):
        # wavenumbers for odd multipliers: Nyquist dropped
        kk = self.k.copy()
        kk[-1] = 0.0
        return kk

    @cached_property
    def mask(self):
        """2/3-rule mask on rfft coefficients (all ones when dealiasing is off)."""
        m = np.ones(self.N // 2 + 1)
        if self.dealias:
            m[self.k > (2.0 / 3.0) * self.k[-1]] = 0.0
        return m

    def inner(self, f, g):
        """Discrete L2 pairing h * sum(f g)."""
        return self.h * float(np.dot(f, g))

    def fft(self, f):
        return np.fft.rfft(f)

    def ifft(self, fh):
        return np.fft.irfft(fh, n=self.N)


def deriv(f, grid, n=1):
    """Spectral n-th derivative."""
    fh = grid.fft(f)
    if n % 2:
        fh = fh * (1j * grid.k_odd) ** n
    else:
        fh = fh * (-(grid.k**2)) ** (n // 2)
    return grid.ifft(fh)


def absD(f, grid, power=1):
    """Fourier multiplier |k|^power (power may be negative; zero mode set to 0)."""
    fh = grid.fft(f)
    kk = grid.k.copy()
    if power < 0:
        kk[0] = 1.0
        mult = kk**power
        mult[0] = 0.0
    else:
        mult = kk**power
    return grid.ifft(fh * mult)


def antideriv(f, grid):
    """Zero-mean antiderivative (inverse of d/dx1 on zero-mean functions)."""
    fh = grid.fft(f)
    kk = grid.k_odd.copy()
    mult = np.zeros_like(fh)
    nz = kk != 0
    mult[nz] = 1.0 / (1j * kk[nz])
    return grid.ifft(fh * mult)


def project(f):
    """Zero-mean projection."""
    return f - np.mean(f)


def dealias(f, grid):
    if not grid.dealias:
        return f
    return grid.ifft(grid.fft(f) * grid.mask)


def shift(f, grid, s):
    """Translate f(. - s); exact roll for grid-commensurate s, spectral otherwise."""
    n = s / grid.h
    if abs(n - round(n)) < 1e-12:
        return np.roll(f, int(round(n)))
    fh = grid.fft(f) * np.exp(-1j * grid.k * s)
    # the Nyquist cosine keeps only its in-phase part on the grid
    fh[-1] = grid.fft(f)[-1].real * np.cos(grid.k[-1] * s)
    return grid.ifft(fh)


@dataclass
class SurfaceState:
    eta: np.ndarray
    phi: np.ndarray
    grid: Grid
    order: int = DEFAULT_ORDER
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.eta = np.asarray(self.eta, float)
        self.phi = np.asarray(self.phi, float)
        if self.eta.shape != (self.grid.N,) or self.phi.shape != (self.grid.N,):
            raise ValueError("eta and phi must be sampled on the grid")
        scale = max(np.max(np.abs(self.phi)), 1e-300)
        if abs(np.mean(self.phi)) > 1e-12 * scale:
            raise NonZeroMean("phi must have zero mean")

    def tail_ratio(self):
        """max |eta| over the two end nodes relative to max |eta|."""
        m = np.max(np.abs(self.eta))
        if m == 0:
            return 0.0
        return max(abs(self.eta[0]), abs(self.eta[-1])) / m

    def check_tail(self):
        """Warn (not fail) when the truncated solitary profile is not yet negligible."""
        r = self.tail_ratio()
        if r > TAIL_TOL:
            warnings.warn(f"eta tail ratio {r:.2e} exceeds {TAIL_TOL:g}; algebraic tails are truncated",
                          RuntimeWarning, stacklevel=2)
        return r

    @property
    def eta_x(self):
        if "eta_x" not in self._cache:
            self._cache["eta_x"] = deriv(self.eta, self.grid)
        return self._cache["eta_x"]

    def G(self, f):
        """G(eta) f with the state's expansion order."""
        return _dno(self.eta, f, self.grid, self.order)

    @property
    def Gphi(self):
        if "Gphi" not in self._cache:
            self._cache["Gphi"] = self.G(self.phi)
        return self._cache["Gphi"]


# ---------------------------------------------------------------------------
# Dirichlet-Neumann operator


def _guard_slope(eta, grid):
    s = np.max(np.abs(deriv(eta, grid))) if np.any(eta) else 0.0
    if s >= SLOPE_GUARD:
        raise ExpansionDiverged(f"max |eta'| = {s:.3f} exceeds the expansion guard {SLOPE_GUARD}")


def _check_terms(norms):
    # successive terms must not grow: flag a term exceeding both predecessors
    ref = norms[0] if norms[0] > 0 else max(norms)
    for j in range(3, len(norms)):
        if norms[j] > 1e-10 * ref and norms[j] > norms[j - 1] and norms[j] > norms[j - 2]:
            raise ExpansionDiverged(f"DNO series term {j} grew: {norms[j]:.3e} > {norms[j - 1]:.3e}")


def _dno(eta, f, grid, order, check=True):
    f = project(np.asarray(f, float))
    G0 = absD(f, grid)
    if order == 0 or not np.any(eta):
        return G0
    if check:
        _guard_slope(eta, grid)
    pw = [np.ones_like(eta)]
    for m in range(1, order + 1):
        pw.append(pw[-1] * eta / m)  # eta^m / m!
    fx = deriv(f, grid)
    terms = [G0]
    for j in range(1, order + 1):
        # (1/j!) |D|^(j-1) D eta^j D f = -(1/j!) |D|^(j-1) (eta^j f')'
        t = -absD(deriv(dealias(pw[j] * fx, grid), grid), grid, j - 1)
        for m in range(1, j + 1):
            t -= absD(dealias(pw[m] * terms[j - m], grid), grid, m)
        terms.append(t)
    if check:
        _check_terms([np.max(np.abs(t)) for t in terms])
    return project(sum(terms))


def dno_apply(state, f, order=None, check_mean=True):
    """G(eta) f by the Craig-Sulem expansion truncated at order M; zero-mean output."""
    f = np.asarray(f, float)
    if check_mean:
        scale = max(np.max(np.abs(f)), 1e-300)
        if abs(np.mean(f)) > 1e-12 * scale:
            raise NonZeroMean(f"input mean {np.mean(f):.3e} is not zero")
    M = state.order if order is None else order
    if M < 0:
        raise ValueError("order must be >= 0")
    return _dno(state.eta, f, state.grid, M)


def dno_inverse(state, g, order=None, tol=1e-10, maxiter=200):
    """Zero-mean f with G(eta) f = g, by preconditioned CG (|D|^-1 preconditioner)."""
    grid = state.grid
    M = state.order if order is None else order
    g = np.asarray(g, float)
    scale = max(np.max(np.abs(g)), 1e-300)
    if abs(np.mean(g)) > 1e-12 * scale:
        raise NonZeroMean(f"right-hand side mean {np.mean(g):.3e} is not zero")
    g = project(g)
    if not np.any(state.eta):
        return absD(g, grid, -1)
    n = grid.N

    def mv(f):
        return _dno(state.eta, f, grid, M, check=False) + np.mean(f)

    def prec(r):
        return absD(project(r), grid, -1) + np.mean(r)

    A = LinearOperator((n, n), matvec=mv, dtype=float)
    P = LinearOperator((n, n), matvec=prec, dtype=float)
    _guard_slope(state.eta, grid)
    x0 = absD(g, grid, -1)
    rtol = 1e-3 * tol
    f, info = cg(A, g, x0=x0, rtol=rtol, atol=0.0, M=P, maxiter=maxiter)
    res = np.max(np.abs(mv(f) - g))
    if info != 0 or res > tol * max(1.0, scale):
        f, info = gmres(A, g, x0=f, rtol=rtol, atol=0.0, M=P, maxiter=maxiter, restart=60)
        res = np.max(np.abs(mv(f) - g))
        if res > tol * max(1.0, scale):
            raise NoConvergence(f"dno_inverse residual {res:.2e} after {maxiter} iterations")
    return project(f)


def extension_coefficients(eta, f, grid, order):
    """rfft coefficients of the Rayleigh series of the harmonic extension of f."""
    f = project(np.asarray(f, float))
    if order == 0 or not np.any(eta):
        return grid.fft(f)
    pw = [np.ones_like(eta)]
    for m in range(1, order + 1):
        pw.append(pw[-1] * eta / m)
    a = [f]
    for j in range(1, order + 1):
        t = np.zeros_like(f)
        for m in range(1, j + 1):
            t -= dealias(pw[m] * absD(a[j - m], grid, m), grid)
        a.append(t)
    return grid.fft(sum(a))


def extension_gradient(eta, f, grid, order, x1, x2):
    """grad of the harmonic extension of f at interior points (x1, x2) (arrays)."""
    ah = extension_coefficients(eta, f, grid, order)
    return _eval_gradient(ah, grid, x1, x2)


def _eval_gradient(ah, grid, x1, x2):
    x1 = np.atleast_1d(np.asarray(x1, float))
    x2 = np.atleast_1d(np.asarray(x2, float))
    k = grid.k[1:-1]  # drop mean and Nyquist
    c = ah[1:-1] * (2.0 / grid.N)
    ph = np.exp(1j * np.outer(x1 + grid.L, k)) * np.exp(np.outer(x2, k))
    d1 = np.real(ph @ (1j * k * c))
    d2 = np.real(ph @ (k * c))
    return d1, d2


def extension_hessian(eta, f, grid, order, x1, x2):
    """(Phi_11, Phi_12) of the harmonic extension at interior points; Phi_22 = -Phi_11."""
    ah = extension_coefficients(eta, f, grid, order)
    x1 = np.atleast_1d(np.asarray(x1, float))
    x2 = np.atleast_1d(np.asarray(x2, float))
    k = grid.k[1:-1]
    c = ah[1:-1] * (2.0 / grid.N)
    ph = np.exp(1j * np.outer(x1 + grid.L, k)) * np.exp(np.outer(x2, k))
    return np.real(ph @ (-(k**2) * c)), np.real(ph @ (1j * k * k * c))


# ---------------------------------------------------------------------------
# surface calculus


def surface_derivatives(state, grad_F):
    """(grad_perp F, grad_top F) on the surface.

    ``grad_F(x1, x2)`` returns the pair (F_x1, F_x2) evaluated pointwise.
    """
    x1 = state.grid.nodes
    F1, F2 = grad_F(x1, state.eta)
    ex = state.eta_x
    return -ex * F1 + F2, F1 + ex * F2


def curvature(eta, grid):
    """kappa = -eta'' / <eta'>^3 with spectral derivatives."""
    e1 = deriv(eta, grid)
    e2 = deriv(eta, grid, 2)
    return -e2 / (1 + e1 * e1) ** 1.5


def velocity_trace(state, order=None):
    """(a1, a2) = grad of the harmonic extension of phi restricted to the surface."""
    M = state.order if order is None else order
    phix = deriv(state.phi, state.grid)
    Gphi = state.Gphi if M == state.order else _dno(state.eta, state.phi, state.grid, M)
    ex = state.eta_x
    w = 1.0 / (1 + ex * ex)
    return w * (phix - ex * Gphi), w * (ex * phix + Gphi)
