"""Charge equation for N time-dependent point interactions in the plane.

The charges q_j solve the Volterra system

    q_j(t) + 4 pi I[ (alpha_j - log 2 / 2pi + gamma / 2pi - i/8) q_j ](t)
           - 2i sum_{k != j} I[ V_jk ](t) = f_j(t),
    V_jk(tau) = int_s^tau U0(tau - sigma; |y_j - y_k|) q_k(sigma) dsigma,
    f_j(t) = 4 pi I[ (U0(. - s) psi_s)(y_j) ](t),      f_j(s) := q_j(s),

with U0(u; r) = exp(i r^2 / 4u) / (2iu).  The ``-i/8`` comes from the
constant ``-i pi / 4`` in the self evolution of K0 (see
:func:`tdpoint.specfun.k0_log_remainder`).  The off-diagonal coupling keeps
the full time dependence of q_k inside V_jk; freezing q_k(sigma) = q_k(tau)
would reduce it to ``-2i I(t - tau) int_0^{tau-s} U0`` (:func:`kernel_entry`).

Time is discretized with the piecewise-linear product integration of
:mod:`tdpoint.volterra_ops`; V_jk uses the same scheme with exact lag moments
of U0.  The march solves one N x N system per step.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import specfun as sf
from .specfun import EULER_GAMMA
from .volterra_ops import LagRule, TimeGrid, WeightTable, apply_I, build_weights, panel_mean_correction

__all__ = [
    "StrengthTrajectory",
    "Center",
    "Gaussian",
    "InitialState",
    "ChargeSolution",
    "SingularStepError",
    "gamma_matrix",
    "kernel_entry",
    "diagonal_shift",
    "domain_residual",
    "free_gaussian",
    "free_part_at_centers",
    "forcing",
    "solve_charges",
    "restart_forcing",
    "pre_regularization_residual",
    "write_charges_csv",
    "read_charges_csv",
]

COND_LIMIT = 1e12
DOMAIN_WARN = 1e-8
_LOG2 = np.log(2.0)


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class StrengthTrajectory:
    """alpha(t) = a0 | a0 + a1 t | a0 + a1 sin(omega t + phi)."""

    kind: str = "constant"
    a0: float = 0.0
    a1: float = 0.0
    omega: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "sinusoidal"):
            raise ValueError(f"unknown strength kind {self.kind!r}")
        for name in ("a0", "a1", "omega", "phi"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"strength parameter {name} must be finite")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full(t.shape, self.a0) if t.ndim else float(self.a0)
        if self.kind == "linear":
            return self.a0 + self.a1 * t
        return self.a0 + self.a1 * np.sin(self.omega * t + self.phi)


@dataclass(frozen=True)
class Center:
    position: tuple
    strength: StrengthTrajectory = field(default_factory=StrengthTrajectory)

    def __post_init__(self):
        p = tuple(float(v) for v in self.position)
        if len(p) != 2 or not all(np.isfinite(p)):
            raise ValueError("center position must be a finite 2-vector")
        object.__setattr__(self, "position", p)


@dataclass(frozen=True)
class Gaussian:
    """amplitude * exp(-|x - center|^2 / (2 sigma^2))."""

    amplitude: complex
    center: tuple
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("gaussian sigma must be > 0")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "amplitude", complex(self.amplitude))


@dataclass(frozen=True)
class InitialState:
    """psi_s = sum of Gaussians + (1/2pi) sum_j charges0[j] K0(sqrt(lam)|x - y_j|)."""

    gaussians: tuple = ()
    charges0: tuple = ()
    lam: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError("lambda must be > 0")
        object.__setattr__(self, "gaussians", tuple(self.gaussians))
        object.__setattr__(self, "charges0", tuple(complex(c) for c in self.charges0))


@dataclass
class ChargeSolution:
    grid: TimeGrid
    q: np.ndarray  # (N, n_steps + 1) complex
    residual_norm: float
    max_condition: float = float("nan")
    domain_residual: float = float("nan")

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


class SingularStepError(ArithmeticError):
    def __init__(self, t, cond):
        super().__init__(f"step matrix singular at t = {t:.17g} (condition estimate {cond:.3e})")
        self.t = t
        self.cond = cond


# ---------------------------------------------------------------------------
# geometry and pointwise pieces


def _positions(centers):
    return np.array([c.position for c in centers], dtype=float).reshape(-1, 2)


def _distances(centers):
    y = _positions(centers)
    d = np.sqrt(((y[:, None, :] - y[None, :, :]) ** 2).sum(-1))
    n = len(centers)
    for j in range(n):
        for k in range(j + 1, n):
            if not d[j, k] > 0:
                raise ValueError(f"centers {j} and {k} coincide")
    return d


def gamma_matrix(lam: float, centers, t: float) -> np.ndarray:
    """Boundary-condition matrix Gamma_lambda at time t."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    d = _distances(centers)
    n = len(centers)
    g = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    if n > 1:
        g[off] = -sf.bessel_k0(np.sqrt(lam) * d[off]) / (2 * np.pi)
    diag = [c.strength(t) + (np.log(np.sqrt(lam) / 2) + EULER_GAMMA) / (2 * np.pi) for c in centers]
    g[np.diag_indices(n)] = diag
    return g


def diagonal_shift(alpha):
    """alpha - log 2 / 2pi + gamma / 2pi - i/8: the diagonal bracket of the kernel."""
    return np.asarray(alpha) - _LOG2 / (2 * np.pi) + EULER_GAMMA / (2 * np.pi) - 0.125j


def kernel_entry(j: int, k: int, t: float, tau: float, centers, s: float) -> complex:
    """Pointwise kernel K_jk(t, tau).

    Diagonal: 4 pi I(t - tau) (alpha_j(tau) - log 2/2pi + gamma/2pi - i/8).
    Off-diagonal: the frozen-charge form -2i I(t - tau) int_0^{tau - s} U0(u; d) du.
    The solver integrates the off-diagonal coupling as a double convolution
    instead (module docstring); this entry is the kernel it reduces to for a
    constant charge.
    """
    if tau > t:
        raise ValueError("kernel_entry needs tau <= t")
    if tau < s:
        raise ValueError("kernel_entry needs tau >= s")
    if tau == t:
        return complex("nan")
    i_val = sf.volterra_I(t - tau)
    if j == k:
        return complex(4 * np.pi * i_val * diagonal_shift(centers[j].strength(tau)))
    if tau == s:
        return 0j
    d = float(_distances(centers)[j, k])
    return complex(-2j * i_val * sf.lagged_free_integral(tau - s, d))


def free_gaussian(g: Gaussian, tau, x) -> np.ndarray:
    """Free evolution by tau of one Gaussian at points x (..., 2)."""
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    r2 = ((x - np.asarray(g.center)) ** 2).sum(-1)
    s2 = g.sigma**2 + 2j * tau
    return g.amplitude * (g.sigma**2 / s2) * np.exp(-r2 / (2 * s2))


def domain_residual(state: InitialState, centers) -> np.ndarray:
    """|phi_lambda(y_j) - (Gamma_lambda q)_j| per center at the initial time."""
    if len(state.charges0) != len(centers):
        raise ValueError("charges0 must have one entry per center")
    if not centers:
        return np.zeros(0)
    y = _positions(centers)
    phi = np.zeros(len(centers), dtype=complex)
    for g in state.gaussians:
        phi += free_gaussian(g, 0.0, y)
    return np.abs(phi - gamma_matrix(state.lam, centers, 0.0) @ np.array(state.charges0))


def _domain_residual_at(state, centers, s):
    y = _positions(centers)
    phi = np.zeros(len(centers), dtype=complex)
    for g in state.gaussians:
        phi += free_gaussian(g, 0.0, y)
    return np.abs(phi - gamma_matrix(state.lam, centers, s) @ np.array(state.charges0))


def free_part_at_centers(state: InitialState, centers, lag, include_self=True) -> np.ndarray:
    """(U0(lag) psi_s)(y_j) for lag >= 0, shape (N, len(lag)).

    With ``include_self=False`` the self term (1/2pi) q_j(s) k0_evolution_diag,
    log singular at lag 0, is left out.
    """
    lag = np.atleast_1d(np.asarray(lag, dtype=float))
    y = _positions(centers)
    n = len(centers)
    out = np.zeros((n, lag.size), dtype=complex)
    for g in state.gaussians:
        out += free_gaussian(g, lag[None, :], y[:, None, :])
    q0 = np.asarray(state.charges0, dtype=complex)
    if n > 1 and np.any(q0 != 0):
        d = _distances(centers)
        for j in range(n):
            for k in range(n):
                if k != j and q0[k] != 0:
                    out[j] += q0[k] / (2 * np.pi) * sf.k0_evolution_offdiag(state.lam, lag, d[j, k])
    if include_self and np.any(q0 != 0):
        out += q0[:, None] / (2 * np.pi) * sf.k0_evolution_diag(state.lam, lag)[None, :]
    return out


def _check_inputs(state, centers):
    if len(state.charges0) != len(centers):
        raise ValueError(
            f"charges0 has {len(state.charges0)} entries for {len(centers)} centers"
        )
    if centers:
        _distances(centers)


def forcing(state: InitialState, centers, grid: TimeGrid, weights: WeightTable | None = None):
    """Right-hand side f_j(t_n), shape (N, n_steps + 1); the state lives at t0."""
    _check_inputs(state, centers)
    w = weights if weights is not None else build_weights(grid)
    lag = grid.times - grid.t0
    q0 = np.asarray(state.charges0, dtype=complex)
    reg = free_part_at_centers(state, centers, lag, include_self=False)
    # 2 q0 k0_evolution_diag = q0 (-gamma - log lag) + 2 q0 R(lag), R bounded
    reg = reg + q0[:, None] / (2 * np.pi) * sf.k0_log_remainder(state.lam, lag)[None, :]
    f = 4 * np.pi * apply_I(w, reg.T, log_coeff=q0 / (4 * np.pi)).T
    if np.any(q0 != 0):
        # R is not smooth at lag 0 (x log x); add the sub-panel part of I[R]
        corr = panel_mean_correction(w, lambda u: sf.k0_log_remainder(state.lam, u))
        f += 2 * q0[:, None] * corr[None, :]
    f[:, 0] = q0
    return f


# ---------------------------------------------------------------------------
# off-diagonal lag rules


@lru_cache(maxsize=32)
def _u0_lag_moments(h: float, n: int, d: float):
    """Lag moments of U0(.; d) on [kh, (k+1)h], k < n."""
    edges = h * np.arange(n + 1, dtype=float)
    f0 = np.zeros(n + 1, dtype=complex)
    f1 = np.zeros(n + 1, dtype=complex)
    f0[1:] = sf.lagged_free_integral(edges[1:], d)
    f1[1:] = sf.lagged_free_moment1(edges[1:], d)
    m0 = np.diff(f0)
    m1 = np.diff(f1) - edges[:-1] * m0
    m0.flags.writeable = False
    m1.flags.writeable = False
    return m0, m1


def _pair_rules(grid, centers):
    n = len(centers)
    rules = {}
    if n < 2:
        return rules
    d = _distances(centers)
    for j in range(n):
        for k in range(n):
            if j != k:
                m0, m1 = _u0_lag_moments(grid.h, grid.n_steps, float(d[j, k]))
                rules[j, k] = LagRule(h=grid.h, moment0=m0, moment1=m1)
    return rules


def _coupled(q, rules, n_centers):
    """sum_{k != j} V_jk at the nodes, shape (N, n+1)."""
    out = np.zeros(q.shape, dtype=complex)
    for (j, k), r in rules.items():
        out[j] += r.apply(q[k])
    return out


def _equation_residual(q, f, w, shift, rules):
    s_term = shift * q - 2j * _coupled(q, rules, q.shape[0])
    res = q + w.apply(s_term.T).T - f
    return float(np.max(np.abs(res))) if res.size else 0.0


# ---------------------------------------------------------------------------
# solver


def solve_charges(
    state: InitialState,
    centers,
    grid: TimeGrid,
    *,
    method: str = "march",
    weights: WeightTable | None = None,
    f=None,
) -> ChargeSolution:
    """Solve the discrete charge equation on ``grid`` (state given at grid.t0)."""
    _check_inputs(state, centers)
    n_c = len(centers)
    w = weights if weights is not None else build_weights(grid)
    if f is None:
        f = forcing(state, centers, grid, w)
    f = np.asarray(f, dtype=complex)
    if f.shape != (n_c, grid.n_steps + 1):
        raise ValueError("forcing has the wrong shape")
    dres = _domain_residual_at(state, centers, grid.t0) if n_c else np.zeros(0)
    dmax = float(dres.max()) if dres.size else 0.0
    if dmax > DOMAIN_WARN:
        warnings.warn(f"initial state violates the boundary condition by {dmax:.3e}", stacklevel=2)
    if n_c == 0:
        return ChargeSolution(grid, np.zeros((0, grid.n_steps + 1), complex), 0.0, 1.0, 0.0)
    times = grid.times
    shift = 4 * np.pi * np.array([diagonal_shift(c.strength(times)) for c in centers])
    rules = _pair_rules(grid, centers)
    if method == "march":
        q, cond = _march(f, w, shift, rules, times, np.asarray(state.charges0))
    elif method == "assembled":
        q, cond = _assembled(f, w, shift, rules, np.asarray(state.charges0))
    else:
        raise ValueError(f"unknown method {method!r}")
    res = _equation_residual(q, f, w, shift, rules)
    return ChargeSolution(grid, q, res, cond, dmax)


def _march(f, w, shift, rules, times, q0):
    n_c, n1 = f.shape
    n = n1 - 1
    q = np.zeros((n_c, n1), dtype=complex)
    q[:, 0] = q0
    vsum = np.zeros((n_c, n1), dtype=complex)  # sum_k V_jk at nodes
    a, b = w._ab()
    pair_ab = {jk: r._ab() for jk, r in rules.items()}
    v0 = np.zeros((n_c, n_c), dtype=complex)
    for (j, k), (pa, _) in pair_ab.items():
        v0[j, k] = pa[0]
    eye = np.eye(n_c)
    cond_max = 1.0
    s_hist = np.zeros((n_c, n1), dtype=complex)  # shift*q - 2i vsum at nodes
    s_hist[:, 0] = shift[:, 0] * q[:, 0]
    for m in range(1, n1):
        # known part of V_jk(t_m): all nodes before m
        vknown = np.zeros(n_c, dtype=complex)
        for (j, k), (pa, pb) in pair_ab.items():
            # node m-i gets pa[i], node m-1-i gets pb[i]
            vknown[j] += pa[1:m][::-1] @ q[k, 1:m] + pb[:m][::-1] @ q[k, :m]
        wnn = a[0]
        hist = a[1:m][::-1] @ s_hist[:, 1:m].T + b[:m][::-1] @ s_hist[:, :m].T
        mat = eye + wnn * (np.diag(shift[:, m]) - 2j * v0)
        rhs = f[:, m] - hist + 2j * wnn * vknown
        cond = np.linalg.cond(mat)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularStepError(times[m], cond)
        cond_max = max(cond_max, cond)
        q[:, m] = np.linalg.solve(mat, rhs)
        vsum[:, m] = v0 @ q[:, m] + vknown
        s_hist[:, m] = shift[:, m] * q[:, m] - 2j * vsum[:, m]
    return q, cond_max


def _assembled(f, w, shift, rules, q0):
    """Assemble the full block system and solve it in one dense LU."""
    n_c, n1 = f.shape
    wm = w.matrix()
    big = np.zeros((n_c * n1, n_c * n1), dtype=complex)

    def blk(j):
        return slice(j * n1, (j + 1) * n1)

    for j in range(n_c):
        big[blk(j), blk(j)] = np.eye(n1) + wm * shift[j][None, :]
    for (j, k), r in rules.items():
        big[blk(j), blk(k)] += -2j * (wm @ r.matrix())
    rhs = f.reshape(-1).copy()
    for j in range(n_c):
        row = j * n1
        big[row, :] = 0.0
        big[row, row] = 1.0
        rhs[row] = q0[j]
    cond = float(np.linalg.cond(big))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularStepError(float("nan"), cond)
    q = np.linalg.solve(big, rhs).reshape(n_c, n1)
    return q, cond


# ---------------------------------------------------------------------------
# restart from a charge history


def _history_self(qh, h, delta):
    """Regular part of int_s^{s'} q(sigma) / (tau - sigma) dsigma, delta = tau - s'.

    ``qh`` holds the history at nodes s..s' (last entry = q(s')).  The
    returned value plus ``q(s') (-gamma - log delta)`` is the full integral.
    """
    p = qh.size - 1
    rev = qh[::-1]  # rev[k] = q(s' - k h)
    delta = np.asarray(delta, dtype=float)[:, None]
    qa, qb = rev[1], rev[0]
    # k = 0 panel, singular part removed analytically
    with np.errstate(divide="ignore", invalid="ignore"):
        dl = np.where(delta > 0, (delta / h) * np.log1p(h / np.where(delta > 0, delta, 1.0)), 0.0)
    out = qb * (np.log(delta + h) + EULER_GAMMA) + (qa - qb) * (1.0 - dl)
    out = out[:, 0]
    if p > 1:
        k = np.arange(1, p)[None, :]
        dk = delta + k * h
        lg = np.log1p(h / dk)
        qA = rev[1:p][None, :]
        qB = rev[2 : p + 1][None, :]
        out = out + (qA * lg + (qB - qA) * (1.0 - (dk / h) * lg)).sum(axis=1)
    return out


def _history_cross(qh, h, delta, d):
    """int_s^{s'} U0(tau - sigma; d) q(sigma) dsigma, delta = tau - s'."""
    p = qh.size - 1
    rev = qh[::-1]
    delta = np.asarray(delta, dtype=float)
    out = np.zeros(delta.size, dtype=complex)
    k = np.arange(p + 1)
    for sl in _chunks(delta.size, max(1, 400000 // (p + 1))):
        edges = delta[sl, None] + h * k[None, :]
        f0 = np.zeros(edges.shape, dtype=complex)
        f1 = np.zeros(edges.shape, dtype=complex)
        pos = edges > 0
        f0[pos] = sf.lagged_free_integral(edges[pos], d)
        f1[pos] = sf.lagged_free_moment1(edges[pos], d)
        m0 = np.diff(f0, axis=1)
        m1 = np.diff(f1, axis=1) - edges[:, :-1] * m0
        qA = rev[:p][None, :]
        qB = rev[1:][None, :]
        out[sl] = (qA * m0 + (qB - qA) * m1 / h).sum(axis=1)
    return out


def _chunks(n, size):
    for i in range(0, n, size):
        yield slice(i, min(n, i + size))


def restart_forcing(
    history: ChargeSolution,
    state: InitialState,
    centers,
    s_new: float,
    grid_new: TimeGrid,
    weights: WeightTable | None = None,
):
    """Forcing for the problem restarted at s_new from the charge history on [s, s_new]."""
    _check_inputs(state, centers)
    hg = history.grid
    idx = hg.index_of(s_new)
    if abs(grid_new.t0 - s_new) > 1e-9 * max(1.0, abs(s_new)):
        raise ValueError("grid_new must start at s_new")
    w = weights if weights is not None else build_weights(grid_new)
    if idx == 0:
        return forcing(state, centers, grid_new, w)
    n_c = len(centers)
    delta = grid_new.times - s_new
    lag = grid_new.times - hg.t0
    reg = free_part_at_centers(state, centers, lag, include_self=True).astype(complex)
    q_new0 = history.q[:, idx].copy()
    d = _distances(centers) if n_c > 1 else None
    for j in range(n_c):
        qh = history.q[j, : idx + 1]
        # (i/2pi) int q/(2i(tau - sigma)) = (1/4pi) int q/(tau - sigma)
        reg[j] += _history_self(qh, hg.h, delta) / (4 * np.pi)
        for k in range(n_c):
            if k != j:
                reg[j] += 1j / (2 * np.pi) * _history_cross(history.q[k, : idx + 1], hg.h, delta, d[j, k])
    f = 4 * np.pi * apply_I(w, reg.T, log_coeff=q_new0 / (4 * np.pi)).T
    for j in range(n_c):
        # the history self term behaves like delta log delta at the restart time
        qh = history.q[j, : idx + 1]
        f[j] += panel_mean_correction(w, lambda u, qh=qh: _history_self(qh, hg.h, np.ravel(u)).reshape(np.shape(u)))
    f[:, 0] = q_new0
    return f


def restart_solve(history, state, centers, s_new, grid_new, weights=None, method="march"):
    """Solve the restarted problem on grid_new using :func:`restart_forcing`."""
    w = weights if weights is not None else build_weights(grid_new)
    f = restart_forcing(history, state, centers, s_new, grid_new, w)
    idx = history.grid.index_of(s_new)
    restarted = InitialState(gaussians=(), charges0=tuple(history.q[:, idx]), lam=state.lam)
    with warnings.catch_warnings():
        # the restarted state carries no Gaussian list; its boundary data is implicit
        warnings.simplefilter("ignore")
        return solve_charges(restarted, centers, grid_new, method=method, weights=w, f=f)


# ---------------------------------------------------------------------------
# consistency check against the un-integrated equation


def pre_regularization_residual(
    solution: ChargeSolution, state: InitialState, centers, t_min: float = 0.1
) -> float:
    """Max residual of the charge equation before applying I, on [s + t_min, T].

    Checks
    ``(U0 psi_s)(y_j) - q_j(s)(-gamma - log t)/4pi + (i/2pi) sum V_jk
    - (alpha_j - log 2/2pi + gamma/2pi - i/8) q_j = (1/4pi) J[dq_j/dt]``
    with a finite-difference derivative of the solved charge.
    """
    from .volterra_ops import apply_J

    grid = solution.grid
    q = solution.q
    lag = grid.times - grid.t0
    q0 = np.asarray(state.charges0, dtype=complex)
    lhs = free_part_at_centers(state, centers, lag, include_self=False)
    lhs += q0[:, None] / (2 * np.pi) * sf.k0_log_remainder(state.lam, lag)[None, :]
    lhs += 1j / (2 * np.pi) * _coupled(q, _pair_rules(grid, centers), q.shape[0])
    alpha = np.array([c.strength(grid.times) for c in centers])
    lhs -= diagonal_shift(alpha) * q
    qdot = np.gradient(q, grid.h, axis=1)
    rhs = apply_J(grid, qdot.T).T / (4 * np.pi)
    sel = lag >= t_min - 1e-12
    return float(np.max(np.abs(lhs - rhs)[:, sel]))


# ---------------------------------------------------------------------------
# CSV


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_charges_csv(path, solution: ChargeSolution) -> None:
    n_c = solution.q.shape[0]
    header = ["t"]
    for j in range(1, n_c + 1):
        header += [f"re_q{j}", f"im_q{j}"]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for n, t in enumerate(solution.grid.times):
            row = [_fmt(t)]
            for j in range(n_c):
                row += [_fmt(solution.q[j, n].real), _fmt(solution.q[j, n].imag)]
            wr.writerow(row)


def read_charges_csv(path):
    """Returns (times, q) with q of shape (N, n_nodes)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    if not header or header[0] != "t" or (len(header) - 1) % 2:
        raise ValueError(f"{path}: not a charge CSV")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    if data.size == 0:
        return np.zeros(0), np.zeros((((len(header) - 1) // 2), 0), complex)
    t = data[:, 0]
    q = (data[:, 1::2] + 1j * data[:, 2::2]).T
    return t, q
