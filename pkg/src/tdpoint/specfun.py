"""Scalar special functions and closed-form kernels.

The Volterra functions are evaluated straight from their defining integrals
over the order variable ``a``::

    nu(t)  = int_0^inf t**a / Gamma(a + 1) da
    I(t)   = int_0^inf t**(a - 1) / Gamma(a) da      (= d nu / dt)

with a composite Gauss-Legendre rule that is graded towards ``a = 0`` and
truncated where the integrand has fallen below ``exp(-40)`` of its peak.
The same rule gives exact moments of ``I`` over arbitrary intervals, which is
what the product-integration weights in :mod:`tdpoint.volterra_ops` consume.

Gamma, K0, J0 and Si/Ci are taken from :mod:`scipy.special`; everything here
only adds domain checks and the combinations the charge equation needs.

Closed-form audit notes
-----------------------
* ``(1/2) int_0^inf exp(-i r tau) / (r + lam) dr = (1/2) e^{i lam tau} E1(i lam tau)``
  and ``E1(ix) = -Ci(x) + i (Si(x) - pi/2)``.  The often quoted form
  ``(1/2) e^{i lam tau} (i Si - Ci)`` drops the constant ``-i pi/2`` inside the
  bracket; :func:`k0_evolution_diag` keeps it (checked against direct
  quadrature in the test-suite).
* The Laplace transform of ``I`` is ``1 / log p`` for ``p > 1`` (not
  ``p / log p``); see :func:`tdpoint.verify.asymptotics_suite`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special as sc

__all__ = [
    "Constants",
    "CONSTANTS",
    "DomainError",
    "EULER_GAMMA",
    "gamma_fn",
    "volterra_I",
    "volterra_nu0",
    "nu_increment",
    "kernel_moments",
    "kernel_power_moments",
    "kernel_legendre_moments",
    "bessel_k0",
    "bessel_j0",
    "si_ci",
    "cin",
    "q_remainder",
    "free_kernel",
    "lagged_free_integral",
    "lagged_free_moment1",
    "lagged_free_pair",
    "k0_evolution_diag",
    "k0_log_remainder",
    "k0_evolution_offdiag",
]


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


@dataclass(frozen=True)
class Constants:
    euler_gamma: float = 0.57721566490153286061
    pi: float = np.pi


CONSTANTS = Constants()
EULER_GAMMA = CONSTANTS.euler_gamma


def _check(cond, name, what):
    if not np.all(cond):
        raise DomainError(f"{name}: argument must be {what}")


def _out(x, scalar):
    return x.item() if scalar else x


# ---------------------------------------------------------------------------
# order-variable quadrature


_GL16 = leggauss(16)
_GRADE = 12  # dyadic panels [2^-k-1, 2^-k] below a = 1


@lru_cache(maxsize=64)
def _alpha_rule(a_max: int):
    """Composite Gauss-Legendre nodes/weights on [0, a_max]."""
    edges = [0.0] + [2.0 ** -k for k in range(_GRADE, 0, -1)]
    edges += [float(k) for k in range(1, a_max + 1)]
    x, w = _GL16
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    a = np.concatenate(nodes)
    wa = np.concatenate(weights)
    a.flags.writeable = False
    wa.flags.writeable = False
    return a, wa, sc.gammaln(a + 1.0)


def _a_max(t_max: float) -> int:
    # smallest integer past the peak where t^a / Gamma(a+1) < exp(-40) * max(1, e^t)
    t_max = max(float(t_max), 1e-300)
    lt = np.log(t_max)
    floor = max(t_max, 0.0) - 40.0 if t_max > 1.0 else -40.0
    a = max(20, int(np.ceil(t_max)) + 1)
    while a * lt - sc.gammaln(a + 1.0) > floor:
        a += 4
    return int(a)


def _nu_like(t, shift=0):
    """int_0^inf t^(a+shift) / Gamma(a+shift+1) da, vectorized in t > 0."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    a, wa, _ = _alpha_rule(_a_max(t.max(initial=1.0) if t.size else 1.0))
    lg = sc.gammaln(a + shift + 1.0)
    for sl in _chunks(t.size):
        lt = np.log(t[sl])[:, None]
        out[sl] = np.exp((a + shift) * lt - lg) @ wa
    return out


def _chunks(n, size=2048):
    for i in range(0, n, size):
        yield slice(i, min(n, i + size))


def gamma_fn(x):
    """Gamma(x) for x > 0."""
    xa = np.asarray(x, dtype=float)
    _check(xa > 0, "gamma_fn", "> 0")
    return _out(sc.gamma(xa), xa.ndim == 0)


def volterra_I(t):
    """Volterra function of order -1, ``int_0^inf t^(a-1)/Gamma(a) da``, t > 0."""
    ta = np.asarray(t, dtype=float)
    _check(ta > 0, "volterra_I", "> 0")
    tt = np.atleast_1d(ta).ravel()
    a, wa, lg = _alpha_rule(_a_max(tt.max()))
    out = np.empty_like(tt)
    for sl in _chunks(tt.size):
        lt = np.log(tt[sl])[:, None]
        # a t^(a-1) / Gamma(a+1)
        out[sl] = (np.exp(a * lt - lg) * a) @ wa / tt[sl]
    return _out(out.reshape(ta.shape), ta.ndim == 0)


def volterra_nu0(t):
    """``nu(t) = int_0^inf t^a / Gamma(a+1) da``; antiderivative of I with nu(0) = 0."""
    ta = np.asarray(t, dtype=float)
    _check(ta >= 0, "volterra_nu0", ">= 0")
    tt = np.atleast_1d(ta).ravel()
    out = np.zeros_like(tt)
    pos = tt > 0
    if pos.any():
        out[pos] = _nu_like(tt[pos])
    return _out(out.reshape(ta.shape), ta.ndim == 0)


def nu_increment(lo, hi):
    """``nu(hi) - nu(lo)`` without cancellation (0 <= lo <= hi)."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    lo, hi = np.broadcast_arrays(lo, hi)
    _check((lo >= 0) & (hi >= lo), "nu_increment", "0 <= lo <= hi")
    out = np.zeros(lo.shape)
    a, wa, lg = _alpha_rule(_a_max(hi.max(initial=1.0)))
    zero = lo == 0
    if zero.any():
        out[zero] = volterra_nu0(hi[zero])
    idx = np.flatnonzero(~zero & (hi > lo))
    for sl in _chunks(idx.size):
        ii = idx[sl]
        llo = np.log(lo[ii])[:, None]
        ratio = np.log(hi[ii] / lo[ii])[:, None]
        out[ii] = (np.exp(a * llo - lg) * np.expm1(a * ratio)) @ wa
    return out


_GL10 = leggauss(10)


def kernel_moments(lo, hi):
    """Zeroth and first moments of I on [lo, hi].

    Returns ``(M0, M1)`` with ``M0 = int I`` and ``M1 = int (u - lo) I(u) du``.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    lo, hi = np.broadcast_arrays(lo, hi)
    m0 = nu_increment(lo, hi)
    m1 = np.zeros(lo.shape)
    a, wa, lg = _alpha_rule(_a_max(hi.max(initial=1.0)))
    zero = lo == 0
    if zero.any():
        m1[zero] = kernel_power_moments(hi[zero], 1)[:, 1]
    idx = np.flatnonzero(~zero & (hi > lo))
    xg, wg = _GL10
    for sl in _chunks(idx.size, 1024):
        ii = idx[sl]
        r = ((hi[ii] - lo[ii]) / lo[ii])[:, None]
        llo = np.log(lo[ii])[:, None]
        # a-integrand: lo^(a+1) / Gamma(a) * int_0^r x (1+x)^(a-1) dx
        small = (r[:, 0] < 0.1)
        inner = np.empty((ii.size, a.size))
        if small.any():
            rs = r[small]
            xs = 0.5 * rs[:, :, None] * (xg + 1.0)  # (m,1,10)
            ws = 0.5 * rs[:, :, None] * wg
            f = xs * np.exp((a[None, :, None] - 1.0) * np.log1p(xs))
            inner[small] = (f * ws).sum(axis=2)
        if (~small).any():
            lr = np.log1p(r[~small])

            def e_fun(beta):
                return np.expm1(beta * lr) / beta

            inner[~small] = e_fun(a + 1.0) - e_fun(a)
        m1[ii] = (np.exp((a + 1.0) * llo - lg) * a * inner) @ wa
    return m0, m1


def kernel_power_moments(w, jmax):
    """``int_0^w u^j I(u) du`` for j = 0..jmax, shape (len(w), jmax+1)."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    _check(w > 0, "kernel_power_moments", "> 0")
    a, wa, lg = _alpha_rule(_a_max(w.max()))
    j = np.arange(jmax + 1)[:, None]
    out = np.empty((w.size, jmax + 1))
    for i, wi in enumerate(w):
        lw = np.log(wi)
        # a w^(a+j) / ((a+j) Gamma(a+1)); the j = 0 row is nu(w)
        base = np.exp(a * lw - lg)
        rows = base * np.where(j == 0, 1.0, a / (a + j)) * np.exp(j * lw)
        out[i] = rows @ wa
    return out


def kernel_legendre_moments(w, nmax):
    """``int_0^w I(u) P_n(u / w) du`` with P_n the shifted Legendre polynomials on [0, 1].

    Uses the Mellin transform ``int_0^1 x^(a-1) P_n(x) dx
    = prod_{k=1}^n (a - k) / prod_{k=0}^n (a + k)``.
    """
    w = float(w)
    _check(w > 0, "kernel_legendre_moments", "> 0")
    a, wa, lg = _alpha_rule(_a_max(w))
    base = np.exp(a * np.log(w) - lg)  # w^a / Gamma(a+1)
    # 1/Gamma(a) * 1/a = 1/Gamma(a+1): fold the k=0 factor into base
    out = np.empty(nmax + 1)
    ratio = np.ones_like(a)
    out[0] = base @ wa
    for n in range(1, nmax + 1):
        ratio = ratio * (a - n) / (a + n)
        out[n] = (base * ratio) @ wa
    return out


# ---------------------------------------------------------------------------
# Bessel and trigonometric integrals


def bessel_k0(x):
    """Macdonald function K0(x), x > 0."""
    xa = np.asarray(x, dtype=float)
    _check(xa > 0, "bessel_k0", "> 0")
    return _out(sc.k0(xa), xa.ndim == 0)


def bessel_j0(x):
    """Bessel J0(x), x >= 0."""
    xa = np.asarray(x, dtype=float)
    _check(xa >= 0, "bessel_j0", ">= 0")
    return _out(sc.j0(xa), xa.ndim == 0)


def si_ci(x):
    """Sine and cosine integrals ``(Si(x), Ci(x))`` for x > 0."""
    xa = np.asarray(x, dtype=float)
    _check(xa > 0, "si_ci", "> 0")
    si, ci = sc.sici(xa)
    return _out(si, xa.ndim == 0), _out(ci, xa.ndim == 0)


def cin(x):
    """Entire cosine integral ``int_0^x (1 - cos t)/t dt = gamma + log x - Ci(x)``."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xa)
    small = np.abs(xa) < 1.0
    xs = xa[small]
    term = np.ones_like(xs)
    acc = np.zeros_like(xs)
    x2 = xs * xs
    for n in range(1, 14):
        term = term * (-x2) / ((2 * n - 1) * (2 * n))
        acc -= term / (2 * n)
    out[small] = acc
    big = ~small
    if big.any():
        xb = np.abs(xa[big])
        out[big] = EULER_GAMMA + np.log(xb) - sc.sici(xb)[1]
    return _out(out.reshape(np.shape(x)), np.ndim(x) == 0)


def _e_tail(a):
    """``int_a^inf e^{iv}/v dv = -Ci(a) + i (pi/2 - Si(a))`` for a > 0."""
    si, ci = sc.sici(a)
    return -ci + 1j * (0.5 * np.pi - si)


def q_remainder(lam, u):
    """Smooth remainder Q(lam; u) of the p-integral of e^{-i p^2 u}/(p^2 + lam).

    Defined through
    ``-pi e^{i lam u} [Ci(lam u) - i Si(lam u)] = -pi (gamma + log lam + log u) + Q e^{i lam u}``
    and continuous with Q(0; u) = 0.
    """
    la = np.asarray(lam, dtype=float)
    ua = np.asarray(u, dtype=float)
    _check(ua > 0, "q_remainder", "u > 0")
    _check(la >= 0, "q_remainder", "lambda >= 0")
    x = np.atleast_1d(la * ua).astype(float)
    out = np.zeros(x.shape, dtype=complex)
    pos = x > 0
    xp = x[pos]
    if xp.size:
        si = sc.sici(xp)[0]
        lx = np.log(xp)
        out[pos] = np.pi * cin(xp) + 1j * np.pi * si + np.pi * np.expm1(-1j * xp) * (EULER_GAMMA + lx)
    scalar = la.ndim == 0 and ua.ndim == 0
    return _out(out.reshape(np.broadcast(la, ua).shape), scalar)


def free_kernel(t, r):
    """Free propagator kernel ``U0(t; r) = exp(i r^2 / (4t)) / (2 i t)``."""
    ta = np.asarray(t, dtype=float)
    ra = np.asarray(r, dtype=float)
    _check(ta != 0, "free_kernel", "nonzero in t")
    val = np.exp(1j * ra * ra / (4.0 * ta)) / (2j * ta)
    return _out(val, np.ndim(val) == 0)


def lagged_free_integral(delta, d):
    """``int_0^delta U0(u; d) du = (1/2i) int_a^inf e^{iv}/v dv``, a = d^2/(4 delta)."""
    da = np.asarray(delta, dtype=float)
    dd = np.asarray(d, dtype=float)
    _check(da > 0, "lagged_free_integral", "delta > 0")
    _check(dd > 0, "lagged_free_integral", "d > 0")
    a = dd * dd / (4.0 * da)
    val = _e_tail(a) / 2j
    return _out(val, np.ndim(val) == 0)


def lagged_free_moment1(delta, d):
    """``int_0^delta u U0(u; d) du`` (closed form through the same Si/Ci tail)."""
    da = np.asarray(delta, dtype=float)
    dd = np.asarray(d, dtype=float)
    _check(da > 0, "lagged_free_moment1", "delta > 0")
    _check(dd > 0, "lagged_free_moment1", "d > 0")
    b = dd * dd / 4.0
    a = b / da
    val = (da * np.exp(1j * a) + 1j * b * _e_tail(a)) / 2j
    return _out(val, np.ndim(val) == 0)


def lagged_free_pair(delta, d):
    """Both lag moments ``(int_0^delta U0, int_0^delta u U0)``; zero at delta = 0."""
    da, dd = np.broadcast_arrays(np.asarray(delta, dtype=float), np.asarray(d, dtype=float))
    _check(da >= 0, "lagged_free_pair", "delta >= 0")
    _check(dd > 0, "lagged_free_pair", "d > 0")
    f0 = np.zeros(da.shape, dtype=complex)
    f1 = np.zeros(da.shape, dtype=complex)
    pos = da > 0
    b = dd[pos] ** 2 / 4.0
    a = b / da[pos]
    e = _e_tail(a)
    f0[pos] = e / 2j
    f1[pos] = (da[pos] * np.exp(1j * a) + 1j * b * e) / 2j
    return f0, f1


def k0_evolution_diag(lam, tau):
    """Free evolution of K0(sqrt(lam)|x|) evaluated at its own center.

    ``(1/2) int_0^inf e^{-i r tau}/(r + lam) dr
    = (1/2) e^{i lam tau} [-Ci(lam tau) + i (Si(lam tau) - pi/2)]``.
    """
    la = np.asarray(lam, dtype=float)
    ta = np.asarray(tau, dtype=float)
    _check(la > 0, "k0_evolution_diag", "lambda > 0")
    _check(ta > 0, "k0_evolution_diag", "tau > 0")
    x = la * ta
    si, ci = sc.sici(x)
    val = 0.5 * np.exp(1j * x) * (-ci + 1j * (si - 0.5 * np.pi))
    return _out(val, np.ndim(val) == 0)


def k0_log_remainder(lam, tau):
    """``k0_evolution_diag(lam, tau) + (gamma + log tau)/2``; bounded, tau >= 0."""
    la = float(lam)
    ta = np.atleast_1d(np.asarray(tau, dtype=float))
    out = np.empty(ta.shape, dtype=complex)
    x = la * ta
    # e^{ix} E1(ix) + gamma + log tau = -log lam - i pi/2 + [e^{ix}-1](...) + Cin + i Si
    si = np.zeros_like(x)
    pos = x > 0
    si[pos] = sc.sici(x[pos])[0]
    lx = np.zeros_like(x)
    lx[pos] = np.log(x[pos])
    c = cin(x)
    e1 = -(EULER_GAMMA + lx) + c + 1j * (si - 0.5 * np.pi)  # E1(ix)
    out = 0.5 * (np.expm1(1j * x) * e1 + c + 1j * (si - 0.5 * np.pi) - np.log(la))
    return _out(out.reshape(np.shape(tau)), np.ndim(tau) == 0)


# free evolution of K0 away from its center, through the heat-kernel representation
#   K0(sqrt(lam) r) = (1/2) int_0^inf exp(-lam s - r^2/(4s)) / s ds
# whose Schroedinger evolution by tau shifts s -> s + i tau.
_GL12 = leggauss(12)


def k0_evolution_offdiag(lam, tau, d):
    """Free evolution by ``tau`` of K0(sqrt(lam)|x - y|) evaluated at distance ``d``.

    Equals ``int_0^inf p e^{-i p^2 tau} J0(p d) / (p^2 + lam) dp``; computed as
    ``(1/2) int_0^inf exp(-lam s - d^2 / (4 (s + i tau))) / (s + i tau) ds``,
    which is non-oscillatory away from a thin boundary layer at s = 0.
    ``tau = 0`` returns K0(sqrt(lam) d).
    """
    la = float(lam)
    _check(la > 0, "k0_evolution_offdiag", "lambda > 0")
    ta, da = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(d, dtype=float))
    _check(ta >= 0, "k0_evolution_offdiag", "tau >= 0")
    _check(da > 0, "k0_evolution_offdiag", "d > 0")
    scalar = ta.ndim == 0
    tf = ta.ravel()
    df = da.ravel()
    out = np.empty(tf.size, dtype=complex)
    static = tf == 0
    if static.any():
        out[static] = sc.k0(np.sqrt(la) * df[static])
    idx = np.flatnonzero(~static)
    if idx.size:
        out[idx] = _k0_evolve_quad(la, tf[idx], df[idx])
    res = out.reshape(ta.shape)
    return _out(res, scalar)


def _k0_evolve_quad(lam, tau, d):
    x, w = _GL12
    # log-spaced s panels: from far inside the s=0 boundary layer to the e^{-lam s} tail
    layer = np.minimum(tau, 4.0 * tau * tau / (d * d))
    s_lo = 1e-10 * layer
    s_hi = np.maximum(60.0 / lam, 1e-300)
    n_pan = 120
    out = np.empty(tau.size, dtype=complex)
    for sl in _chunks(tau.size, 512):
        lo = np.log(s_lo[sl])[:, None]
        hi = np.log(np.full(lo.shape, s_hi))
        edges = lo + (hi - lo) * np.linspace(0.0, 1.0, n_pan + 1)[None, :]
        half = 0.5 * np.diff(edges, axis=1)  # (m, n_pan)
        mid = edges[:, :-1] + half
        y = (mid[:, :, None] + half[:, :, None] * x).reshape(lo.shape[0], -1)
        wy = (half[:, :, None] * w).reshape(lo.shape[0], -1)
        s = np.exp(y)
        z = s + 1j * tau[sl][:, None]
        f = np.exp(-lam * s - d[sl][:, None] ** 2 / (4.0 * z)) / z * s
        val = (f * wy).sum(axis=1)
        # [0, s_lo]: integrand is constant to first order there
        z0 = 1j * tau[sl]
        val += s_lo[sl] * np.exp(-d[sl] ** 2 / (4.0 * z0)) / z0
        out[sl] = 0.5 * val
    return out
