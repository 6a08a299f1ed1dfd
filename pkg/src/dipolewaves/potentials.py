"""Closed-form dipole potentials.

The rotational part of the flow comes from two point vortices (strengths
gamma1 at xbar, gamma2 at ybar, opposite senses) and their mirror images across
x2 = 0.  We keep four terms, indexed by ``TERMS``::

    Gamma_1  = +(g1/2pi) log|x - xbar|      Gamma_1* = -(g1/2pi) log|x - xbar*|
    Gamma_2  = -(g2/2pi) log|x - ybar|      Gamma_2* = +(g2/2pi) log|x - ybar*|

with c* = (c1, -c2).  Each Theta_i is the harmonic conjugate of Gamma_i,
normalized so that grad Theta_i = grad_perp Gamma_i = (-d2 Gamma_i, d1 Gamma_i).
Concretely Theta_i = -(s_i/2pi) * angle, where s_i is the log coefficient and
the angle is atan2(u1, u2) for the submerged vortices (cut straight down) and
atan2(-u1, -u2) for the images (cut straight up, outside the fluid).

All derivatives are closed form.  Functions broadcast over array inputs.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateGeometry, SingularEvaluation

DELTA_MIN = 1e-6
TERMS = ("1", "1*", "2", "2*")


@dataclass(frozen=True)
class DipoleConfig:
    xbar: np.ndarray
    ybar: np.ndarray
    gamma1: float
    gamma2: float
    epsilon: float

    def __post_init__(self):
        xb = np.asarray(self.xbar, dtype=float).reshape(2)
        yb = np.asarray(self.ybar, dtype=float).reshape(2)
        object.__setattr__(self, "xbar", xb)
        object.__setattr__(self, "ybar", yb)
        if np.allclose(xb, yb):
            raise DegenerateGeometry("xbar and ybar coincide")
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise DegenerateGeometry("vortex strengths must be positive")

    @classmethod
    def symmetric(cls, a, rho, gamma1, gamma2, epsilon, x1=0.0):
        """Vertically stacked pair at (x1, -a+rho) and (x1, -a-rho)."""
        if not (0 < rho < a):
            raise DegenerateGeometry(f"need 0 < rho < a, got a={a}, rho={rho}")
        return cls((x1, -a + rho), (x1, -a - rho), gamma1, gamma2, epsilon)

    def with_centers(self, xbar, ybar):
        return replace(self, xbar=np.asarray(xbar, float), ybar=np.asarray(ybar, float))

    def translated(self, s):
        e1 = np.array([s, 0.0])
        return self.with_centers(self.xbar + e1, self.ybar + e1)

    def centers(self):
        """(center, log coefficient s_i, starred flag) for each term."""
        g1, g2 = self.gamma1, self.gamma2
        xs = self.xbar * np.array([1.0, -1.0])
        ys = self.ybar * np.array([1.0, -1.0])
        return (
            (self.xbar, g1, False),
            (xs, -g1, True),
            (self.ybar, -g2, False),
            (ys, g2, True),
        )


@dataclass
class FieldSample:
    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray = field(default=None)


def _offsets(x1, x2, center, guard=True):
    u1 = np.asarray(x1, float) - center[0]
    u2 = np.asarray(x2, float) - center[1]
    r2 = u1 * u1 + u2 * u2
    if guard and np.any(r2 < DELTA_MIN**2):
        raise SingularEvaluation(f"evaluation within {DELTA_MIN} of center {tuple(center)}")
    return u1, u2, r2


def _check_cut(u1, u2, starred):
    # distance to the ray {u1 = 0, u2 < 0} (or u2 > 0 for images)
    on_side = (u2 > 0) if starred else (u2 < 0)
    if np.any(on_side & (np.abs(u1) < DELTA_MIN)):
        raise SingularEvaluation("evaluation on a branch cut of Theta")


def _angle(u1, u2, starred):
    return np.arctan2(-u1, -u2) if starred else np.arctan2(u1, u2)


# ---------------------------------------------------------------------------
# per-term kernels


def theta_terms(x1, x2, cfg):
    """Values (Theta_1, Theta_1*, Theta_2, Theta_2*) at the given points."""
    out = []
    for c, s, starred in cfg.centers():
        u1, u2, _ = _offsets(x1, x2, c)
        _check_cut(u1, u2, starred)
        out.append(-(s / (2 * np.pi)) * _angle(u1, u2, starred))
    return tuple(out)


def gamma_terms(x1, x2, cfg):
    """Values (Gamma_1, Gamma_1*, Gamma_2, Gamma_2*)."""
    out = []
    for c, s, _ in cfg.centers():
        _, _, r2 = _offsets(x1, x2, c)
        out.append((s / (4 * np.pi)) * np.log(r2))
    return tuple(out)


def _grad_gamma_term(x1, x2, c, s):
    u1, u2, r2 = _offsets(x1, x2, c)
    k = s / (2 * np.pi)
    return k * u1 / r2, k * u2 / r2


def _hess_gamma_term(x1, x2, c, s):
    u1, u2, r2 = _offsets(x1, x2, c)
    k = s / (2 * np.pi) / (r2 * r2)
    return k * (u2 * u2 - u1 * u1), -2 * k * u1 * u2, k * (u1 * u1 - u2 * u2)


def _theta_derivs_term(x1, x2, c, s):
    """First and second derivatives of one Theta term (branch-independent)."""
    u1, u2, r2 = _offsets(x1, x2, c)
    k = s / (2 * np.pi)
    r4 = r2 * r2
    g = (-k * u2 / r2, k * u1 / r2)
    h11 = 2 * k * u1 * u2 / r4
    h12 = k * (u2 * u2 - u1 * u1) / r4
    return g, (h11, h12, -h11)


def _select(cfg, include):
    terms = cfg.centers()
    if include is None:
        include = TERMS
    return [terms[TERMS.index(t)] for t in include]


def grad_theta(x1, x2, cfg, include=None):
    """grad Theta summed over the selected terms (default all four)."""
    g1 = g2 = 0.0
    for c, s, _ in _select(cfg, include):
        (a, b), _ = _theta_derivs_term(x1, x2, c, s)
        g1 = g1 + a
        g2 = g2 + b
    return g1, g2


def hess_theta(x1, x2, cfg, include=None):
    """(Theta_11, Theta_12, Theta_22) summed over the selected terms."""
    h11 = h12 = h22 = 0.0
    for c, s, _ in _select(cfg, include):
        _, (a, b, d) = _theta_derivs_term(x1, x2, c, s)
        h11, h12, h22 = h11 + a, h12 + b, h22 + d
    return h11, h12, h22


def grad_gamma(x1, x2, cfg, include=None):
    g1 = g2 = 0.0
    for c, s, _ in _select(cfg, include):
        a, b = _grad_gamma_term(x1, x2, c, s)
        g1, g2 = g1 + a, g2 + b
    return g1, g2


def hess_gamma(x1, x2, cfg, include=None):
    h11 = h12 = h22 = 0.0
    for c, s, _ in _select(cfg, include):
        a, b, d = _hess_gamma_term(x1, x2, c, s)
        h11, h12, h22 = h11 + a, h12 + b, h22 + d
    return h11, h12, h22


# ---------------------------------------------------------------------------
# public point operations


def theta(x, cfg):
    """Four Theta terms at point(s) x = (x1, x2) and their sum."""
    parts = theta_terms(x[0], x[1], cfg)
    return parts, sum(parts)


def gamma(x, cfg):
    """Four Gamma terms at point(s) x and their sum."""
    parts = gamma_terms(x[0], x[1], cfg)
    return parts, sum(parts)


def theta_field(x, cfg):
    """FieldSample of the total Theta at a single point."""
    _, val = theta(x, cfg)
    g = grad_theta(x[0], x[1], cfg)
    h11, h12, h22 = hess_theta(x[0], x[1], cfg)
    return FieldSample(np.asarray(val), np.array(g), np.array([[h11, h12], [h12, h22]]))


def gamma_field(x, cfg):
    _, val = gamma(x, cfg)
    g = grad_gamma(x[0], x[1], cfg)
    h11, h12, h22 = hess_gamma(x[0], x[1], cfg)
    return FieldSample(np.asarray(val), np.array(g), np.array([[h11, h12], [h12, h22]]))


def _center_pair(x1, x2, cfg, which):
    """Derivatives of (Theta_i, Theta_i*) for vortex i = 1 or 2."""
    terms = cfg.centers()
    (c, s, _), (cs, ss, _) = (terms[0], terms[1]) if which == 1 else (terms[2], terms[3])
    return _theta_derivs_term(x1, x2, c, s), _theta_derivs_term(x1, x2, cs, ss)


def xi_zeta(x, cfg):
    """xi = -grad_xbar Theta = (Ups1_x1, Xi1_x2), zeta likewise for ybar.

    Here Ups_i = Theta_i + Theta_i*, Xi_i = Theta_i - Theta_i*.
    """
    out = []
    for which in (1, 2):
        ((g1, g2), _), ((s1, s2), _) = _center_pair(x[0], x[1], cfg, which)
        out.append(np.array([g1 + s1, g2 - s2]))
    return out[0], out[1]


def xi_zeta_jacobian(x1, x2, cfg, which):
    """Spatial derivatives of xi (which=1) or zeta (which=2).

    Returns (d1 v1, d2 v1, d1 v2, d2 v2) with v = xi or zeta, i.e.
    (Ups_11, Ups_12, Xi_12, Xi_22).
    """
    (_, (a11, a12, a22)), (_, (b11, b12, b22)) = _center_pair(x1, x2, cfg, which)
    return a11 + b11, a12 + b12, a12 - b12, a22 - b22


def center_hessian_theta(x1, x2, cfg, which):
    """D^2 of Theta in the center xbar (which=1) or ybar (which=2).

    Entries (Ups_11, Xi_12, Ups_22); the matrix is [[Ups_11, Xi_12], [Xi_12, Ups_22]].
    """
    (_, (a11, a12, a22)), (_, (b11, b12, b22)) = _center_pair(x1, x2, cfg, which)
    return a11 + b11, a12 - b12, a22 + b22


# ---------------------------------------------------------------------------
# vortex self/interaction energy Gamma*(xbar, ybar)


def _gamma_term_at(cfg, k, p):
    c, s, _ = cfg.centers()[k]
    _, _, r2 = _offsets(p[0], p[1], c)
    return (s / (4 * np.pi)) * np.log(r2)


def gamma_star(cfg):
    """Gamma* = (g1/2)(G1*+G2+G2*)(xbar) - (g2/2)(G1+G1*+G2*)(ybar), term by term."""
    xb, yb = cfg.xbar, cfg.ybar
    at_x = sum(_gamma_term_at(cfg, k, xb) for k in (1, 2, 3))
    at_y = sum(_gamma_term_at(cfg, k, yb) for k in (0, 1, 3))
    return 0.5 * cfg.gamma1 * at_x - 0.5 * cfg.gamma2 * at_y


def gamma_star_total(cfg):
    """Closed form of Gamma* as a function of (xbar, ybar)."""
    g1, g2 = cfg.gamma1, cfg.gamma2
    xb, yb = cfg.xbar, cfg.ybar
    d = xb - yb
    e = np.array([xb[0] - yb[0], xb[1] + yb[1]])
    return (-(g1 * g1) / (4 * np.pi) * np.log(2 * abs(xb[1]))
            - (g2 * g2) / (4 * np.pi) * np.log(2 * abs(yb[1]))
            - (g1 * g2) / (4 * np.pi) * np.log(d @ d)
            + (g1 * g2) / (4 * np.pi) * np.log(e @ e))


def grad_gamma_star(cfg):
    """Total gradient of Gamma*(xbar, ybar): returns (d/dxbar, d/dybar)."""
    g1, g2 = cfg.gamma1, cfg.gamma2
    xb, yb = cfg.xbar, cfg.ybar
    d = xb - yb
    e = np.array([xb[0] - yb[0], xb[1] + yb[1]])
    kd = -(g1 * g2) / (2 * np.pi) / (d @ d)
    ke = (g1 * g2) / (2 * np.pi) / (e @ e)
    gx = kd * d + ke * e + np.array([0.0, -(g1 * g1) / (4 * np.pi) / xb[1]])
    # d e/d ybar = diag(-1, +1)
    gy = -kd * d + ke * e * np.array([-1.0, 1.0]) + np.array([0.0, -(g2 * g2) / (4 * np.pi) / yb[1]])
    return gx, gy


def _log_hess(v):
    """Hessian of 0.5*log|v|^2 = log|v| with respect to v."""
    r2 = v @ v
    return (r2 * np.eye(2) - 2 * np.outer(v, v)) / (r2 * r2)


def hess_gamma_star(cfg):
    """Total 4x4 Hessian of Gamma* in (xbar1, xbar2, ybar1, ybar2)."""
    g1, g2 = cfg.gamma1, cfg.gamma2
    xb, yb = cfg.xbar, cfg.ybar
    d = xb - yb
    e = np.array([xb[0] - yb[0], xb[1] + yb[1]])
    H = np.zeros((4, 4))
    # log|d|: d = xbar - ybar, Jacobian [I, -I]
    Pd = np.hstack([np.eye(2), -np.eye(2)])
    H += -(g1 * g2) / (2 * np.pi) * Pd.T @ _log_hess(d) @ Pd
    Pe = np.hstack([np.eye(2), np.diag([-1.0, 1.0])])
    H += (g1 * g2) / (2 * np.pi) * Pe.T @ _log_hess(e) @ Pe
    H[1, 1] += (g1 * g1) / (4 * np.pi) / xb[1] ** 2
    H[3, 3] += (g2 * g2) / (4 * np.pi) / yb[1] ** 2
    return H


def second_center_derivatives(x, cfg):
    """D^2_xbar Theta and D^2_ybar Theta at x, plus the Gamma* derivatives.

    Returns a dict with 2x2 matrices ``D2x``, ``D2y`` and ``grad_xbar``,
    ``grad_ybar`` (2-vectors) and ``hess`` (4x4) of Gamma*.
    """
    a11, a12, a22 = center_hessian_theta(x[0], x[1], cfg, 1)
    b11, b12, b22 = center_hessian_theta(x[0], x[1], cfg, 2)
    gx, gy = grad_gamma_star(cfg)
    return {
        "D2x": np.array([[a11, a12], [a12, a22]]),
        "D2y": np.array([[b11, b12], [b12, b22]]),
        "grad_xbar": gx,
        "grad_ybar": gy,
        "hess": hess_gamma_star(cfg),
    }
