import math

import numpy as np
import pytest
from scipy import integrate, optimize

from tdpoint import specfun as sf

import oracles as orc


# gamma


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (5.0, 24.0), (0.5, math.sqrt(math.pi))])
def test_gamma_values(x, expected):
    assert sf.gamma_fn(x) == pytest.approx(expected, rel=1e-14)


def test_gamma_rejects_nonpositive():
    with pytest.raises(sf.DomainError):
        sf.gamma_fn(0.0)


# Volterra functions


def test_volterra_I_small_t_expansion():
    t = 1e-8
    assert abs(sf.volterra_I(t) * t * math.log(1 / t) ** 2 - 1.0) <= 0.07


def test_volterra_I_large_t():
    assert abs(sf.volterra_I(10.0) / math.exp(10.0) - 1.0) <= 1e-4


@pytest.mark.parametrize("t", [1.0, 0.5])
def test_volterra_I_frozen_oracle(t):
    assert sf.volterra_I(t) == pytest.approx(orc.I_AT[t], rel=1e-12)


@pytest.mark.parametrize("t", [3e-3, 0.2, 7.5])
def test_volterra_I_live_oracle(t):
    assert sf.volterra_I(t) == pytest.approx(orc.volterra_I_mp(t), rel=1e-11)


def test_volterra_nu0_zero():
    assert sf.volterra_nu0(0.0) == 0.0


@pytest.mark.parametrize("t", [1.0, 2.0])
def test_volterra_nu0_frozen_oracle(t):
    assert sf.volterra_nu0(t) == pytest.approx(orc.NU_AT[t], rel=1e-12)


def test_volterra_nu0_derivative_is_I():
    h = 1e-4
    fd = (sf.volterra_nu0(1.0 + h) - sf.volterra_nu0(1.0 - h)) / (2 * h)
    assert abs(fd - sf.volterra_I(1.0)) <= 10 * h * h * orc.I_AT[1.0]


def test_volterra_vectorised_matches_scalar():
    t = np.array([[0.1, 1.0], [2.0, 3.5]])
    vec = sf.volterra_I(t)
    assert vec.shape == t.shape
    assert np.allclose(vec, [[sf.volterra_I(v) for v in row] for row in t], rtol=1e-14)


def test_nu_increment_matches_difference():
    lo, hi = np.array([0.0, 0.3, 1.0]), np.array([0.2, 0.31, 4.0])
    ref = sf.volterra_nu0(hi) - sf.volterra_nu0(lo)
    assert np.allclose(sf.nu_increment(lo, hi), ref, rtol=1e-11)


def test_kernel_moments_first_moment_by_quadrature():
    lo, hi = 0.25, 0.4
    _, m1 = sf.kernel_moments(lo, hi)
    ref, _ = integrate.quad(lambda u: (u - lo) * sf.volterra_I(u), lo, hi, epsabs=1e-14)
    assert m1[0] == pytest.approx(ref, rel=1e-11)


def test_kernel_legendre_moments_against_quadrature():
    w = 0.3
    mom = sf.kernel_legendre_moments(w, 4)
    from numpy.polynomial.legendre import Legendre

    for n in range(5):
        p = Legendre.basis(n, domain=[0, 1])
        ref = orc.i_convolution(lambda s: p((w - s) / w), w, eps=1e-12)
        assert mom[n] == pytest.approx(ref, abs=1e-9)


# Bessel and trigonometric integrals


def test_k0_small_argument():
    x = 1e-6
    assert abs(sf.bessel_k0(x) + math.log(x / 2) + orc.EULER) <= 1e-10


def test_k0_integral_representation():
    # K0(x) = int_0^inf exp(-x cosh u) du; the integrand is below 1e-1000 past u = 8
    ref, _ = integrate.quad(lambda u: math.exp(-math.cosh(u)), 0, 8, epsabs=1e-14, limit=200)
    assert sf.bessel_k0(1.0) == pytest.approx(ref, abs=1e-12)
    assert sf.bessel_k0(1.0) == pytest.approx(orc.K0_1, rel=1e-14)


def test_k0_large_argument():
    x = 20.0
    assert abs(sf.bessel_k0(x) * math.exp(x) * math.sqrt(2 * x / math.pi) - 1) <= 1e-2


def test_j0_values():
    assert sf.bessel_j0(0.0) == 1.0
    root = optimize.brentq(lambda x: sf.bessel_j0(x), 2.0, 3.0, xtol=1e-15)
    assert root == pytest.approx(2.404825557695773, abs=1e-12)
    assert abs(sf.bessel_j0(2.404825557695773)) <= 1e-9
    assert sf.bessel_j0(10.0) == pytest.approx(orc.J0_10, rel=1e-13)


def test_si_ci_values():
    si, ci = sf.si_ci(1.0)
    assert si == pytest.approx(orc.SI_1, rel=1e-14)
    assert ci == pytest.approx(orc.CI_1, rel=1e-14)
    x = 1e-9
    si, ci = sf.si_ci(x)
    assert abs(si) < 2e-9
    assert abs(ci - (orc.EULER + math.log(x))) < 1e-12
    assert abs(sf.si_ci(1e3)[0] - math.pi / 2) <= 1e-3


def test_cin_series_and_large_branch_agree():
    x = np.array([0.999999, 1.000001])
    a = sf.cin(x)
    assert abs(a[1] - a[0]) < 1e-6


# Q remainder


def test_q_remainder_zero_lambda():
    for u in (0.1, 1.0, 10.0):
        assert sf.q_remainder(0.0, u) == 0


def test_q_remainder_defining_identity():
    lam, u = 1.0, 1.0
    x = lam * u
    si, ci = sf.si_ci(x)
    lhs = -math.pi * np.exp(1j * x) * (ci - 1j * si)
    rhs = -math.pi * (orc.EULER + math.log(lam) + math.log(u)) + sf.q_remainder(lam, u) * np.exp(1j * x)
    assert abs(lhs - rhs) <= 1e-9


def test_q_remainder_continuous_at_zero():
    assert abs(sf.q_remainder(1e-12, 1.0)) <= 1e-9
    assert abs(sf.q_remainder(1e-6, 1.0)) <= 1e-4


# free kernel and lag integrals


def test_free_kernel_modulus_and_origin():
    t = 0.7
    r = np.linspace(0, 5, 11)
    assert np.allclose(np.abs(sf.free_kernel(t, r)), 1 / (2 * t), rtol=1e-15)
    assert sf.free_kernel(t, 0.0) == pytest.approx(1 / (2j * t), rel=1e-15)
    with pytest.raises(sf.DomainError):
        sf.free_kernel(0.0, 1.0)


@pytest.mark.parametrize("point", [(0.7, -0.2), (0.0, 0.0), (1.5, 1.0), (-2.0, 0.3), (0.1, 3.0)])
def test_free_kernel_convolution_gives_gaussian_evolution(point):
    from tdpoint.charge_solver import Gaussian, free_gaussian

    t = 0.4
    got = free_gaussian(Gaussian(1.0, (0.0, 0.0), 1.0), t, np.array(point))
    assert abs(got - orc.gaussian_convolution(t, point)) <= 1e-6


@pytest.mark.parametrize("key", list(orc.LAGGED))
def test_lagged_free_integral_oracle(key):
    assert abs(sf.lagged_free_integral(*key) - orc.LAGGED[key]) <= 1e-8


def test_lagged_free_integral_vanishes_at_zero_lag():
    assert abs(sf.lagged_free_integral(1e-12, 1.0)) < 1e-10


def test_lagged_free_integral_bound():
    for delta, d in ((0.1, 1.0), (1.0, 0.3), (5.0, 2.0)):
        a = d * d / (4 * delta)
        si, ci = sf.si_ci(a)
        assert abs(sf.lagged_free_integral(delta, d)) <= 0.5 * (abs(ci) + abs(math.pi / 2 - si)) + 1e-15


def test_lagged_free_moment1_by_quadrature():
    # int_0^delta u U0(u; d) du = (b/2i) int_a^inf e^{iv}/v^2 dv with b = d^2/4, a = b/delta
    delta, d = 0.6, 1.1
    b = d * d / 4
    a = b / delta
    c, _ = integrate.quad(lambda v: 1 / v**2, a, np.inf, weight="cos", wvar=1.0, limlst=200)
    s, _ = integrate.quad(lambda v: 1 / v**2, a, np.inf, weight="sin", wvar=1.0, limlst=200)
    assert abs(sf.lagged_free_moment1(delta, d) - b * (c + 1j * s) / 2j) <= 1e-10


def test_lagged_free_pair_matches_singles():
    f0, f1 = sf.lagged_free_pair(np.array([0.0, 0.3]), 0.8)
    assert f0[0] == 0 and f1[0] == 0
    assert f0[1] == sf.lagged_free_integral(0.3, 0.8)
    assert f1[1] == sf.lagged_free_moment1(0.3, 0.8)


# evolution of K0


@pytest.mark.parametrize("key", list(orc.K0_DIAG))
def test_k0_evolution_diag_oracle(key):
    assert abs(sf.k0_evolution_diag(*key) - orc.K0_DIAG[key]) <= 1e-8


def test_k0_evolution_diag_scales_with_lambda_tau():
    # substitution r -> lam r leaves only the product lam tau
    for lam, tau in ((2.0, 0.3), (0.5, 1.2), (4.0, 0.05)):
        ref = orc.k0_diag_mp(1.0, lam * tau)
        assert abs(sf.k0_evolution_diag(lam, tau) - ref) <= 1e-8


def test_k0_evolution_diag_log_leading_term():
    vals = [sf.k0_evolution_diag(1.0, tau) + 0.5 * (orc.EULER + math.log(tau)) for tau in (1e-3, 1e-6, 1e-9)]
    assert max(abs(v) for v in vals) < 1.0
    assert abs(vals[-1] - vals[-2]) < 1e-5


def test_k0_log_remainder_is_continuous_at_zero():
    r0 = sf.k0_log_remainder(1.0, 0.0)
    assert r0 == pytest.approx(-0.25j * math.pi, abs=1e-15)
    assert abs(sf.k0_log_remainder(1.0, 1e-10) - r0) < 1e-8
    tau = 0.37
    assert sf.k0_log_remainder(1.0, tau) == pytest.approx(
        sf.k0_evolution_diag(1.0, tau) + 0.5 * (orc.EULER + math.log(tau)), abs=1e-14
    )


def test_k0_evolution_offdiag_static_limit():
    assert sf.k0_evolution_offdiag(1.0, 0.0, 1.3) == pytest.approx(float(sf.bessel_k0(1.3)), rel=1e-15)
    assert abs(sf.k0_evolution_offdiag(1.0, 1e-8, 1.3) - sf.bessel_k0(1.3)) < 1e-6


@pytest.mark.parametrize("key", list(orc.K0_OFF))
def test_k0_evolution_offdiag_oracle(key):
    assert abs(sf.k0_evolution_offdiag(*key) - orc.K0_OFF[key]) <= 1e-6


def test_k0_evolution_offdiag_decreasing_in_distance():
    mags = [abs(sf.k0_evolution_offdiag(1.0, 0.5, d)) for d in (1.0, 2.0, 4.0)]
    assert mags[0] > mags[1] > mags[2]


@pytest.mark.parametrize(
    "fn, args",
    [
        (sf.volterra_I, (0.0,)),
        (sf.volterra_nu0, (-1.0,)),
        (sf.bessel_k0, (0.0,)),
        (sf.si_ci, (0.0,)),
        (sf.lagged_free_integral, (0.0, 1.0)),
        (sf.k0_evolution_diag, (0.0, 1.0)),
        (sf.k0_evolution_offdiag, (1.0, 1.0, 0.0)),
    ],
)
def test_domain_errors(fn, args):
    with pytest.raises(sf.DomainError):
        fn(*args)
