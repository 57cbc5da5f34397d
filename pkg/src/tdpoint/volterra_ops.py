"""Discrete actions of the operators I (kernel 𝓘) and J (kernel -gamma - log).

Both operators are convolutions on a uniform grid, so the product-integration
weights depend only on the lag.  The density is represented as piecewise
linear in time; the kernel is integrated exactly against it.  With

    M0[k] = int_{kh}^{(k+1)h} K(u) du,   M1[k] = int_{kh}^{(k+1)h} (u - kh) K(u) du

the weights of row n are

    w[n][n] = M0[0] - M1[0]/h
    w[n][m] = M1[k-1]/h + M0[k] - M1[k]/h,   k = n - m,   0 < m < n
    w[n][0] = M1[n-1]/h

Samples with an integrable log singularity at t0 are passed to :func:`apply_I`
as ``log_coeff``; their contribution goes through a separately computed
vector of singular weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss, legval

from .specfun import (
    EULER_GAMMA,
    kernel_legendre_moments,
    kernel_moments,
    volterra_I,
)

__all__ = [
    "TimeGrid",
    "LagRule",
    "WeightTable",
    "build_weights",
    "apply_I",
    "apply_J",
    "panel_mean_correction",
    "j_rule",
    "log_kernel",
    "operator_norm",
]

T_MAX = 100.0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_m = t0 + m h, m = 0..n_steps."""

    t0: float
    h: float
    n_steps: int

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise ValueError(f"h must be > 0, got {self.h}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if self.h * self.n_steps > T_MAX * (1 + 1e-12):
            raise ValueError(f"h * n_steps must be <= {T_MAX:g}")

    @classmethod
    def span(cls, t0: float, t1: float, h: float) -> "TimeGrid":
        """Grid from t0 to t1 with step h (t1 - t0 must be a multiple of h)."""
        n = int(round((t1 - t0) / h))
        if n < 1 or abs(t0 + n * h - t1) > 1e-9 * max(1.0, abs(t1)):
            raise ValueError(f"interval [{t0}, {t1}] is not a positive multiple of h = {h}")
        return cls(float(t0), float(h), n)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    @property
    def t_end(self) -> float:
        return self.t0 + self.h * self.n_steps

    def index_of(self, t: float) -> int:
        """Node index of time t; raises if t is not a node."""
        m = int(round((t - self.t0) / self.h))
        if m < 0 or m > self.n_steps or abs(self.t0 + m * self.h - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not a node of the grid")
        return m


@dataclass(frozen=True)
class LagRule:
    """Piecewise-linear product integration for a convolution kernel.

    ``moment0[k]`` and ``moment1[k]`` are the kernel moments on the k-th lag
    interval (see module docstring); they may be complex.
    """

    h: float
    moment0: np.ndarray
    moment1: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.moment0.size

    def _ab(self):
        b = self.moment1 / self.h
        return self.moment0 - b, b

    def row(self, n: int) -> np.ndarray:
        """Weights w[n][0..n]."""
        if n == 0:
            return np.zeros(1, dtype=self.moment0.dtype)
        a, b = self._ab()
        out = np.zeros(n + 1, dtype=np.result_type(a, b))
        # node m = n - k receives a[k] and node m = n - 1 - k receives b[k]
        out[1:] += a[:n][::-1]
        out[:-1] += b[:n][::-1]
        return out

    def weight(self, n: int, m: int):
        return self.row(n)[m]

    def matrix(self) -> np.ndarray:
        n = self.n_steps
        a, b = self._ab()
        w = np.zeros((n + 1, n + 1), dtype=np.result_type(a, b))
        for k in range(n):
            idx = np.arange(k + 1, n + 1)
            w[idx, idx - k] += a[k]
            w[idx, idx - 1 - k] += b[k]
        return w

    def apply(self, f) -> np.ndarray:
        """Convolution of the rule with node samples ``f`` (first axis = time)."""
        f = np.asarray(f)
        n = self.n_steps
        if f.shape[0] != n + 1:
            raise ValueError(f"expected {n + 1} samples, got {f.shape[0]}")
        a, b = self._ab()
        flat = f.reshape(n + 1, -1)
        out = np.zeros(flat.shape, dtype=np.result_type(a, flat))
        for c in range(flat.shape[1]):
            col = flat[:, c]
            out[1:, c] = np.convolve(col[1:], a)[:n] + np.convolve(col[:-1], b)[:n]
        return out.reshape((n + 1,) + f.shape[1:])


@dataclass(frozen=True)
class WeightTable(LagRule):
    """Product-integration rule for I on a grid, plus the weights for a
    ``-gamma - log(t - t0)`` density (``log_weights[n]``)."""

    grid: TimeGrid = field(default=None)
    log_weights: np.ndarray = field(default=None)


# ---------------------------------------------------------------------------
# Gauss rules on [0, 1]

_P = 16
_XG, _WG = leggauss(_P)
_X01 = 0.5 * (_XG + 1.0)
_W01 = 0.5 * _WG


def _shifted_legendre(x, nmax):
    """P_n(2x - 1) for n = 0..nmax, shape (nmax+1, len(x))."""
    y = 2.0 * x - 1.0
    out = np.empty((nmax + 1, x.size))
    for n in range(nmax + 1):
        c = np.zeros(n + 1)
        c[n] = 1.0
        out[n] = legval(y, c)
    return out


_PL = _shifted_legendre(_X01, _P - 1)
_NORM = (2 * np.arange(_P) + 1)[:, None] * _PL * _W01  # coefficient projector


def _moment_rule(moments):
    """Weights on the Gauss nodes reproducing given Legendre moments of a weight."""
    return moments @ _NORM


# int_0^1 -log(x) P_n(2x-1) dx = 1 (n = 0), (-1)^n / (n (n+1)) otherwise
_n = np.arange(1, _P)
_MU_LOG = np.concatenate([[1.0], (-1.0) ** _n / (_n * (_n + 1.0))])
_W_LOG = _moment_rule(_MU_LOG)


def log_kernel(u):
    """-gamma - log(u), the kernel of J."""
    return -EULER_GAMMA - np.log(u)


def _singular_panel(w_len, smooth):
    """int_0^w (-gamma - log x) smooth(x) dx on one panel, x = w * node."""
    x = w_len * _X01
    wt = w_len * ((-EULER_GAMMA - np.log(w_len)) * _W01 + _W_LOG)
    return smooth(x) @ wt


def _kernel_panel(w_len, smooth):
    """int_0^w I(u) smooth(u) du on one panel."""
    wt = _moment_rule(kernel_legendre_moments(w_len, _P - 1))
    return smooth(w_len * _X01) @ wt


# ---------------------------------------------------------------------------


def build_weights(grid: TimeGrid) -> WeightTable:
    """Product-integration weights of I on ``grid`` (lag moments + log weights)."""
    n, h = grid.n_steps, grid.h
    k = np.arange(n, dtype=float)
    m0, m1 = kernel_moments(k * h, (k + 1.0) * h)
    if not (np.all(np.isfinite(m0)) and np.all(np.isfinite(m1)) and np.all(m0 >= 0)):
        raise ArithmeticError("kernel moment quadrature failed")
    m0.flags.writeable = False
    m1.flags.writeable = False
    lw = _log_weights(grid, m0, m1)
    lw.flags.writeable = False
    return WeightTable(h=h, moment0=m0, moment1=m1, grid=grid, log_weights=lw)


def _log_weights(grid, m0, m1):
    """LW[n] ~ int_0^{t_n} I(t_n - tau) (-gamma - log tau) dtau, tau from t0."""
    n, h = grid.n_steps, grid.h
    lw = np.empty(n + 1)
    lw[0] = 1.0  # limit value of the identity int I(t - tau)(-gamma - log tau) = 1
    # n = 1: split the single panel at h/2 so each half has one singular end
    half = 0.5 * h
    lw[1] = _singular_panel(half, lambda x: volterra_I(h - x)) + _kernel_panel(
        half, lambda u: log_kernel(h - u)
    )
    if n == 1:
        return lw
    nn = np.arange(2, n + 1)
    tn = nn * h
    # first panel [0, h]: log end, I smooth there
    x = h * _X01
    wt = h * ((-EULER_GAMMA - np.log(h)) * _W01 + _W_LOG)
    first = volterra_I(tn[:, None] - x[None, :]) @ wt
    # last panel: I end, log smooth
    wk = _moment_rule(kernel_legendre_moments(h, _P - 1))
    last = log_kernel(tn[:, None] - h * _X01[None, :]) @ wk
    # middle panels m = 1..n-2 on [t_m, t_{m+1}], lag k = n-1-m: linear
    # interpolation of the log plus the panel-mean correction
    lnode = log_kernel(np.arange(1, n + 1) * h)  # at nodes 1..n
    exact = _j_panel_integrals(np.arange(1, n), h)  # panels m = 1..n-1
    corr = exact - 0.5 * h * (lnode[:-1] + lnode[1:])
    # first moment of the defect, s = (tau - m h)/h: 12 int L (s - 1/2) ds - (L_{m+1} - L_m)
    tau = h * (np.arange(1, n)[:, None] + _X01[None, :])
    slope = 12.0 * (log_kernel(tau) @ (_W01 * (_X01 - 0.5))) - (lnode[1:] - lnode[:-1])
    a = m0 - m1 / h
    b = m1 / h
    middle = np.zeros(nn.size)
    if n > 2:
        # sum_{m=1}^{n-2} L_m b_k + L_{m+1} a_k + corr_m m0_k / h + slope_m (a_k - m0_k/2), k = n-1-m
        c1 = np.convolve(lnode[:-1], b[1:])
        c2 = np.convolve(lnode[1:], a[1:])
        c3 = np.convolve(corr, m0[1:] / h)
        c4 = np.convolve(slope, (a - 0.5 * m0)[1:])
        # n = 2 has no middle panel; for n >= 3 the sum ends at index n - 3
        middle[1:] = (c1 + c2 + c3 + c4)[: n - 2]
    # for the first rows the curvature of the log on the early panels meets a
    # steep I; there the middle panels are integrated directly (both factors smooth)
    n_direct = min(n, _DIRECT_ROWS)
    for r in range(3, n_direct + 1):
        tau = h * (np.arange(1, r - 1)[:, None] + _X01[None, :])
        middle[r - 2] = h * np.sum(volterra_I(r * h - tau) * log_kernel(tau) * _W01)
    lw[2:] = first + last + middle
    return lw


_DIRECT_ROWS = 64


def _j_panel_integrals(k, h):
    """int_{kh}^{(k+1)h} (-gamma - log u) du for integer k >= 0 (first entries)."""
    k = np.asarray(k, dtype=float)
    return h * (-EULER_GAMMA - np.log(h) - _int_log(k))


_XG20, _WG20 = leggauss(20)
_X20 = 0.5 * (_XG20 + 1.0)
_W20 = 0.5 * _WG20


def _int_log(k):
    """int_0^1 log(k + y) dy."""
    out = np.empty(k.shape)
    z = k == 0
    out[z] = -1.0
    out[~z] = np.log(k[~z, None] + _X20) @ _W20
    return out


def _int_ylog(k):
    """int_0^1 y log(k + y) dy."""
    out = np.empty(k.shape)
    z = k == 0
    out[z] = -0.25
    out[~z] = np.log(k[~z, None] + _X20) @ (_X20 * _W20)
    return out


def j_rule(grid: TimeGrid) -> LagRule:
    """Exact log-moment product integration rule for J on ``grid``."""
    h = grid.h
    k = np.arange(grid.n_steps, dtype=float)
    c = -EULER_GAMMA - np.log(h)
    m0 = h * (c - _int_log(k))
    m1 = h * h * (0.5 * c - _int_ylog(k))
    return LagRule(h=h, moment0=m0, moment1=m1)


def _as_samples(f):
    f = np.asarray(f)
    if f.ndim == 0:
        raise ValueError("samples must be an array")
    return f


def apply_I(weights: WeightTable, f, log_coeff=None) -> np.ndarray:
    """(I g)(t_n) for g(tau) = f(tau) + log_coeff * (-gamma - log(tau - t0)).

    ``f`` holds the regular part at the nodes (first axis = time); ``log_coeff``
    (scalar or one value per trailing column) multiplies the singular density.
    """
    f = _as_samples(f)
    out = weights.apply(f)
    if log_coeff is not None:
        c = np.asarray(log_coeff)
        lw = weights.log_weights.reshape((-1,) + (1,) * (out.ndim - 1))
        out = out + lw * c
    return out


def panel_mean_correction(weights: WeightTable, fun, levels: int = 24) -> np.ndarray:
    """Correction to ``apply_I(weights, fun(nodes))`` for a density given as a callable.

    ``fun`` maps the lag ``tau - t0 >= 0`` to values and may behave like
    ``x log x`` at 0.  :func:`apply_I` sees the density through its linear
    interpolant; the defect ``e = fun - interpolant`` is integrated against I
    directly on the first rows and through its panel means (times the panel
    masses of I) on the rest.
    """
    grid = weights.grid
    n, h = grid.n_steps, grid.h
    nodes = np.asarray(fun(h * np.arange(n + 1.0)))
    # first panel graded towards 0: sub-panel nodes and weights on [0, w]
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1.0)])
    g_x = (edges[:-1, None] + np.diff(edges)[:, None] * _X01[None, :]).ravel()
    g_w = (np.diff(edges)[:, None] * _W01[None, :]).ravel()

    def defect(tau):
        k = np.minimum((tau / h).astype(int), n - 1)
        frac = tau / h - k
        return np.asarray(fun(tau)) - (1 - frac) * nodes[k] - frac * nodes[k + 1]

    # L2 projection of the defect on {1, s - 1/2} per panel, s = (tau - kh)/h
    k = np.arange(n, dtype=float)
    vals = np.asarray(fun(h * (k[:, None] + _X01[None, :])))
    p0 = vals @ _W01
    p1 = vals @ (_W01 * (_X01 - 0.5))
    v0 = np.asarray(fun(h * g_x))
    p0[0] = v0 @ g_w
    p1[0] = v0 @ (g_w * (g_x - 0.5))
    c0 = p0 - 0.5 * (nodes[:-1] + nodes[1:])
    c1 = 12.0 * p1 - (nodes[1:] - nodes[:-1])
    a, _ = weights._ab()
    r0 = weights.moment0.copy()
    r1 = a - 0.5 * weights.moment0
    r0[0] = r1[0] = 0.0  # the panel at the singular end of I is done exactly below
    out = np.zeros(n + 1, dtype=np.result_type(c0, nodes))
    out[1:] = np.convolve(c0, r0)[:n] + np.convolve(c1, r1)[:n]
    wk = _moment_rule(kernel_legendre_moments(h, _P - 1))
    t_rows = h * np.arange(2, n + 1.0)
    out[2:] += defect(t_rows[:, None] - h * _X01[None, :]) @ wk

    e_first = defect(h * g_x)
    # row 1: both ends singular, split at h/2
    half = 0.5 * h
    sel = g_x <= 0.5
    xs, ws = g_x[sel] * h, g_w[sel] * h
    out[1] = (volterra_I(h - xs) * e_first[sel]) @ ws + _kernel_panel(half, lambda u: defect(h - u))
    for r in range(2, min(n, _DIRECT_ROWS) + 1):
        t = r * h
        acc = (volterra_I(t - h * g_x) * e_first) @ g_w * h
        if r > 2:
            tau = h * (np.arange(1, r - 1)[:, None] + _X01[None, :])
            acc += h * np.sum(volterra_I(t - tau) * defect(tau) * _W01)
        acc += _kernel_panel(h, lambda u: defect(t - u))
        out[r] = acc
    return out


def apply_J(grid: TimeGrid, f, rule: LagRule | None = None) -> np.ndarray:
    """(J f)(t_n) = int_{t0}^{t_n} (-gamma - log(t_n - tau)) f(tau) dtau."""
    f = _as_samples(f)
    rule = rule if rule is not None else j_rule(grid)
    return rule.apply(f)


def operator_norm(weights: LagRule, iters: int = 200, tol: float = 1e-12) -> float:
    """Power-iteration estimate of the l2 operator norm of a discrete rule.

    With the discrete inner product ``h * sum f_m g_m`` on both sides this is
    the largest singular value of the weight matrix.
    """
    w = weights.matrix()
    v = np.ones(w.shape[1])
    v /= np.linalg.norm(v)
    s = 0.0
    for _ in range(iters):
        u = w.T @ (w @ v)
        s_new = np.sqrt(np.linalg.norm(u))
        v = u / np.linalg.norm(u)
        if abs(s_new - s) <= tol * s_new:
            s = s_new
            break
        s = s_new
    return float(s)
