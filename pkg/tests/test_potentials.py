import numpy as np
import pytest
from scipy.integrate import quad

from dipolewaves import potentials as pot
from dipolewaves.errors import SingularEvaluation


@pytest.fixture
def cfg():
    return pot.DipoleConfig.symmetric(2.0, 1.0, 1.0, 9 / 7, 0.1)


def _pts(rng, n=100):
    # points in the fluid region above the vortex pair and away from the axis cut
    x1 = rng.uniform(-6, 6, n)
    x2 = rng.uniform(-0.8, 0.6, n)
    return x1, x2


def _theta_total(x1, x2, c):
    return sum(pot.theta_terms(x1, x2, c))


def _gamma_total(x1, x2, c):
    return sum(pot.gamma_terms(x1, x2, c))


def test_theta_axis_value(cfg):
    parts, _ = pot.theta((0.0, 0.0), pot.DipoleConfig((0, -1), (0, -3), 1.0, 1.0, 1.0))
    assert parts[0] == 0.0


def test_gamma_unit_distance():
    c = pot.DipoleConfig((0, -1), (0, -3), 1.0, 1.0, 1.0)
    parts, _ = pot.gamma((0.0, 0.0), c)
    assert parts[0] == 0.0


def test_cauchy_riemann(cfg):
    rng = np.random.default_rng(0)
    x1, x2 = _pts(rng)
    h = 1e-6
    t1 = (_theta_total(x1 + h, x2, cfg) - _theta_total(x1 - h, x2, cfg)) / (2 * h)
    t2 = (_theta_total(x1, x2 + h, cfg) - _theta_total(x1, x2 - h, cfg)) / (2 * h)
    g1, g2 = pot.grad_gamma(x1, x2, cfg)
    a1, a2 = pot.grad_theta(x1, x2, cfg)
    assert np.allclose(t1, -g2, atol=1e-8) and np.allclose(t2, g1, atol=1e-8)
    assert np.allclose(a1, -g2, atol=1e-14) and np.allclose(a2, g1, atol=1e-14)


def test_gamma_gradient_fd(cfg):
    rng = np.random.default_rng(1)
    x1, x2 = _pts(rng)
    h = 1e-6
    g1 = (_gamma_total(x1 + h, x2, cfg) - _gamma_total(x1 - h, x2, cfg)) / (2 * h)
    g2 = (_gamma_total(x1, x2 + h, cfg) - _gamma_total(x1, x2 - h, cfg)) / (2 * h)
    a1, a2 = pot.grad_gamma(x1, x2, cfg)
    assert np.allclose(a1, g1, atol=1e-8) and np.allclose(a2, g2, atol=1e-8)


def test_harmonicity(cfg):
    rng = np.random.default_rng(2)
    x1, x2 = _pts(rng)
    h = 1e-3
    for f in (_theta_total, _gamma_total):
        lap = (f(x1 + h, x2, cfg) + f(x1 - h, x2, cfg) + f(x1, x2 + h, cfg)
               + f(x1, x2 - h, cfg) - 4 * f(x1, x2, cfg)) / h**2
        scale = np.maximum(1.0, np.abs(f(x1, x2, cfg)))
        assert np.max(np.abs(lap) / scale) < 1e-5
    # closed-form Hessians are traceless
    h11, _, h22 = pot.hess_gamma(x1, x2, cfg)
    assert np.max(np.abs(h11 + h22)) < 1e-12


def test_gamma_laplacian_small_step(cfg):
    h = 1e-4
    x1, x2 = 0.7, 0.2
    f = _gamma_total
    lap = (f(x1 + h, x2, cfg) + f(x1 - h, x2, cfg) + f(x1, x2 + h, cfg)
           + f(x1, x2 - h, cfg) - 4 * f(x1, x2, cfg)) / h**2
    assert abs(lap) < 1e-6


def test_hessians_fd(cfg):
    rng = np.random.default_rng(3)
    x1, x2 = _pts(rng, 30)
    h = 1e-5
    for grad, hess in ((pot.grad_theta, pot.hess_theta), (pot.grad_gamma, pot.hess_gamma)):
        p1 = grad(x1 + h, x2, cfg)
        m1 = grad(x1 - h, x2, cfg)
        p2 = grad(x1, x2 + h, cfg)
        m2 = grad(x1, x2 - h, cfg)
        h11, h12, h22 = hess(x1, x2, cfg)
        assert np.allclose((p1[0] - m1[0]) / (2 * h), h11, atol=1e-7)
        assert np.allclose((p2[0] - m2[0]) / (2 * h), h12, atol=1e-7)
        assert np.allclose((p1[1] - m1[1]) / (2 * h), h12, atol=1e-7)
        assert np.allclose((p2[1] - m2[1]) / (2 * h), h22, atol=1e-7)


def test_axis_trace_of_gamma_x2(cfg):
    # closed form of Gamma_x2(x1, 0) for the symmetric pair
    a, rho, g1, g2 = 2.0, 1.0, 1.0, 9 / 7
    x1 = np.linspace(-5, 5, 41)
    h = 1e-6
    fd = (_gamma_total(x1, h, cfg) - _gamma_total(x1, -h, cfg)) / (2 * h)
    ref = (g1 / np.pi) * (a - rho) / (x1**2 + (a - rho) ** 2) - (g2 / np.pi) * (a + rho) / (x1**2 + (a + rho) ** 2)
    assert np.allclose(fd, ref, atol=1e-8)
    assert np.allclose(pot.grad_gamma(x1, 0 * x1, cfg)[1], ref, atol=1e-14)
    # Gamma vanishes on the flat surface
    assert np.max(np.abs(_gamma_total(x1, 0 * x1, cfg))) < 1e-15


def test_path_integral_theta1_pair():
    # Theta_1 + Theta_1* at (1, 0) from the integral of grad Theta along a path
    c = pot.DipoleConfig((0, -1), (0, -3), 1.0, 1.0, 1.0)
    ref_pt = np.array([1.0, -0.5])
    tgt = np.array([1.0, 0.0])

    def integrand(t):
        p = ref_pt + t * (tgt - ref_pt)
        g = pot.grad_theta(p[0], p[1], c, include=("1", "1*"))
        return g[0] * (tgt - ref_pt)[0] + g[1] * (tgt - ref_pt)[1]

    val, _ = quad(integrand, 0, 1, epsabs=1e-14)
    t = pot.theta_terms(np.array([tgt[0], ref_pt[0]]), np.array([tgt[1], ref_pt[1]]), c)
    diff = (t[0] + t[1])[0] - (t[0] + t[1])[1]
    assert abs(diff - val) < 1e-12


def test_theta_continuous_on_surface(cfg):
    # with the image cut pointing up, Theta is continuous across x1 = 0 on x2 = 0
    d = 1e-4
    t = _theta_total(np.array([-d, d]), np.zeros(2), cfg)
    assert abs(t[1] - t[0]) < 1e-4


def test_xi_zeta_center_fd(cfg):
    rng = np.random.default_rng(4)
    x1, x2 = _pts(rng, 20)
    h = 1e-5
    xi, zeta = pot.xi_zeta((x1, x2), cfg)
    for which, vec in ((1, xi), (2, zeta)):
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            if which == 1:
                cp = cfg.with_centers(cfg.xbar + e, cfg.ybar)
                cm = cfg.with_centers(cfg.xbar - e, cfg.ybar)
            else:
                cp = cfg.with_centers(cfg.xbar, cfg.ybar + e)
                cm = cfg.with_centers(cfg.xbar, cfg.ybar - e)
            fd = -(_theta_total(x1, x2, cp) - _theta_total(x1, x2, cm)) / (2 * h)
            assert np.allclose(vec[k], fd, rtol=1e-6, atol=1e-9)


def test_center_hessians_fd(cfg):
    rng = np.random.default_rng(5)
    x1, x2 = _pts(rng, 20)
    h = 1e-3
    for which, key in ((1, "D2x"), (2, "D2y")):
        for i in range(len(x1)):
            out = pot.second_center_derivatives((x1[i], x2[i]), cfg)[key]
            assert np.allclose(out, out.T)
            for j in range(2):
                for k in range(2):
                    ej = np.zeros(2)
                    ek = np.zeros(2)
                    ej[j] = h
                    ek[k] = h

                    def th(dc):
                        if which == 1:
                            cc = cfg.with_centers(cfg.xbar + dc, cfg.ybar)
                        else:
                            cc = cfg.with_centers(cfg.xbar, cfg.ybar + dc)
                        return _theta_total(x1[i], x2[i], cc)

                    fd = (th(ej + ek) - th(ej - ek) - th(-ej + ek) + th(-ej - ek)) / (4 * h * h)
                    assert abs(out[j, k] - fd) < 1e-4


def test_center_hessian_axis_symmetry():
    c = pot.DipoleConfig((0, -1), (0, -3), 1.0, 1.0, 1.0)
    # the origin is equidistant from xbar and its image
    D = pot.second_center_derivatives((0.0, 0.0), c)["D2x"]
    # reflection x1 -> -x1 makes Theta odd about the axis, so the diagonal
    # entries vanish there; the mixed entry Xi_12 = 1/pi does not
    assert abs(D[0, 0]) < 1e-15 and abs(D[1, 1]) < 1e-15
    assert abs(D[0, 1] - 1 / np.pi) < 1e-15


def test_gamma_star_derivatives(cfg):
    h = 1e-5
    v0 = np.concatenate([cfg.xbar, cfg.ybar])

    def gs(v):
        return pot.gamma_star(cfg.with_centers(v[:2], v[2:]))

    gx, gy = pot.grad_gamma_star(cfg)
    grad = np.concatenate([gx, gy])
    H = pot.hess_gamma_star(cfg)
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        assert abs((gs(v0 + e) - gs(v0 - e)) / (2 * h) - grad[k]) < 1e-9
        for j in range(4):
            f = np.zeros(4)
            f[j] = 1e-4
            e2 = np.zeros(4)
            e2[k] = 1e-4
            fd = (gs(v0 + e2 + f) - gs(v0 + e2 - f) - gs(v0 - e2 + f) + gs(v0 - e2 - f)) / (4e-8)
            assert abs(fd - H[k, j]) < 1e-5
    assert abs(pot.gamma_star(cfg) - pot.gamma_star_total(cfg)) < 1e-14


def test_decay_on_surface(cfg):
    x1 = np.linspace(30, 300, 200)
    g1, g2 = pot.grad_theta(x1, 0 * x1, cfg)
    mag = np.hypot(g1, g2)
    assert np.all(np.diff(mag) < 0)


def test_guards(cfg):
    with pytest.raises(SingularEvaluation):
        pot.gamma(tuple(cfg.xbar), cfg)
    with pytest.raises(SingularEvaluation):
        pot.theta((0.0, -5.0), cfg)  # on the downward cut of the lower vortex
