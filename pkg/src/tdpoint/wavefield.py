"""Wave function reconstruction from the charges.

    psi_t(x) = (U0(t - s) psi_s)(x) + (i/2pi) sum_j int_s^t U0(t - tau; |x - y_j|) q_j(tau) dtau

The time integral is done with the charges interpolated linearly between
nodes and the kernel integrated exactly on each lag panel through the closed
form ``int_0^delta U0(u; r) du = (1/2i) E(r^2 / 4 delta)`` and its first
moment.  This needs no resolution of the oscillation of U0 near ``tau = t``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import specfun as sf
from .charge_solver import ChargeSolution, InitialState, _positions, free_gaussian

__all__ = [
    "GridSpec",
    "GridField",
    "free_evolve_state",
    "evaluate",
    "reconstruct",
    "field_norm",
    "boundary_fit",
    "write_field_csv",
    "write_norm_csv",
    "RING_RADII",
]

RING_RADII = (1e-3, 2e-3, 4e-3, 8e-3)


@dataclass(frozen=True)
class GridSpec:
    """Offset grid with m x m cell midpoints on [-L, L]^2."""

    half_width: float
    m: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("box half width L must be > 0")
        if self.m < 2 or self.m % 2:
            raise ValueError("m must be an even integer >= 2")

    @property
    def cell(self) -> float:
        return 2.0 * self.half_width / self.m

    def axis(self) -> np.ndarray:
        # written symmetric so mirrored samples are bitwise negatives
        return (np.arange(self.m) + 0.5 - 0.5 * self.m) * self.cell

    def points(self) -> np.ndarray:
        ax = self.axis()
        xx, yy = np.meshgrid(ax, ax, indexing="ij")
        return np.stack([xx, yy], axis=-1)


@dataclass
class GridField:
    spec: GridSpec
    t: float
    values: np.ndarray  # (m, m) complex, values[a, b] at (axis[a], axis[b])
    offset: bool = True

    @property
    def half_width(self) -> float:
        return self.spec.half_width

    @property
    def m(self) -> int:
        return self.spec.m


def _unique_apply(r, fun):
    """fun evaluated once per distinct value of r."""
    flat = r.ravel()
    uniq, inv = np.unique(flat, return_inverse=True)
    return fun(uniq)[inv].reshape(r.shape)


def free_evolve_state(state: InitialState, centers, lag: float, x) -> np.ndarray:
    """(U0(lag) psi_s)(x) at points x (..., 2), lag >= 0."""
    if lag < 0:
        raise ValueError("free evolution needs t >= s")
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1], dtype=complex)
    for g in state.gaussians:
        out += free_gaussian(g, lag, x)
    if state.charges0 and len(state.charges0) != len(centers):
        raise ValueError("charges0 must have one entry per center")
    y = _positions(centers)
    for j, q0 in enumerate(state.charges0):
        if q0 == 0:
            continue
        r = np.sqrt(((x - y[j]) ** 2).sum(-1))
        if np.any(r == 0):
            raise ValueError("evaluation point coincides with a center")
        if lag == 0:
            prof = _unique_apply(r, lambda u: sf.bessel_k0(np.sqrt(state.lam) * u))
        else:
            prof = _unique_apply(r, lambda u: sf.k0_evolution_offdiag(state.lam, lag, u))
        out += q0 / (2 * np.pi) * prof
    return out


def _duhamel_profile(q, h, r, chunk=2048):
    """(i/2pi) int_0^{nh} U0(u; r) q(t_n - u) du for q on nodes 0..n, per distance r."""
    n = q.size - 1
    out = np.zeros(r.size, dtype=complex)
    if n == 0:
        return out
    edges = h * np.arange(n + 1, dtype=float)
    rev = q[::-1]  # rev[k] = q(t_n - k h)
    qa = rev[:-1]
    dq = (rev[1:] - rev[:-1]) / h
    for i in range(0, r.size, chunk):
        rr = r[i : i + chunk]
        f0, f1 = sf.lagged_free_pair(edges[None, :], rr[:, None])
        m0 = np.diff(f0, axis=1)
        m1 = np.diff(f1, axis=1) - edges[None, :-1] * m0
        out[i : i + chunk] = m0 @ qa + m1 @ dq
    return 1j / (2 * np.pi) * out


def evaluate(points, state: InitialState, centers, charges: ChargeSolution, t: float) -> np.ndarray:
    """psi_t at arbitrary points (..., 2); t must be a node of the charge grid."""
    grid = charges.grid
    n = grid.index_of(t)
    pts = np.asarray(points, dtype=float)
    out = free_evolve_state(state, centers, t - grid.t0, pts)
    if n == 0:
        return out
    y = _positions(centers)
    for j in range(len(centers)):
        qj = charges.q[j, : n + 1]
        if not np.any(qj):
            continue
        r = np.sqrt(((pts - y[j]) ** 2).sum(-1))
        if np.any(r == 0):
            raise ValueError(f"evaluation point coincides with center {j}")
        out += _unique_apply(r, lambda u, qj=qj: _duhamel_profile(qj, grid.h, u))
    return out


def reconstruct(spec: GridSpec, state: InitialState, centers, charges: ChargeSolution, t: float) -> GridField:
    """Sample psi_t on the offset grid."""
    vals = evaluate(spec.points(), state, centers, charges, t)
    if not np.all(np.isfinite(vals)):
        raise ArithmeticError("non-finite field value in reconstruction")
    return GridField(spec, float(t), vals)


# ---------------------------------------------------------------------------
# norm


_S_EDGES = np.concatenate([[0.0], 2.0 ** -np.arange(12, -1, -1.0)])  # graded towards the apex


def _duffy_rule(n):
    x, w = leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    s_nodes, s_w = [], []
    for lo, hi in zip(_S_EDGES[:-1], _S_EDGES[1:]):
        s_nodes.append(lo + (hi - lo) * x)
        s_w.append((hi - lo) * w)
    return np.concatenate(s_nodes), np.concatenate(s_w), x, w


def _block_integral(evaluator, y, lo, hi, n):
    """int over the rectangle [lo, hi] of |psi|^2 with a log singularity at y inside."""
    corners = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
    s, ws, w_nodes, ww = _duffy_rule(n)
    pts, wts = [], []
    for i in range(4):
        c0 = corners[i] - y
        c1 = corners[(i + 1) % 4] - y
        jac = abs(c0[0] * c1[1] - c0[1] * c1[0])
        base = c0[None, :] + w_nodes[:, None] * (c1 - c0)[None, :]  # (nw, 2)
        p = y + s[:, None, None] * base[None, :, :]  # (ns, nw, 2)
        pts.append(p.reshape(-1, 2))
        wts.append((jac * (s * ws)[:, None] * ww[None, :]).ravel())
    pts = np.concatenate(pts)
    wts = np.concatenate(wts)
    vals = evaluator(pts)
    return float(np.sum(wts * np.abs(vals) ** 2))


def _edge_flux(evaluator, lo, hi, n):
    """Outward flux of grad |psi|^2 through the rectangle boundary."""
    x, w = leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    step = 1e-3 * float(np.min(hi - lo))
    total = 0.0
    for axis in (0, 1):
        other = 1 - axis
        length = hi[other] - lo[other]
        for side, sign in ((lo[axis], -1.0), (hi[axis], 1.0)):
            p = np.empty((n, 2))
            p[:, axis] = side
            p[:, other] = lo[other] + length * x
            dp = np.zeros(2)
            dp[axis] = step
            fp = np.abs(evaluator(p + dp)) ** 2
            fm = np.abs(evaluator(p - dp)) ** 2
            total += sign * length * np.sum(w * (fp - fm)) / (2 * step)
    return float(total)


def field_norm(field: GridField, centers=(), evaluator=None, n_duffy: int = 8):
    """L2 norm of the field and an error estimate.

    Midpoint rule on the offset grid.  With an ``evaluator`` (points -> psi),
    the cells around each center are replaced by a Duffy-transformed Gauss
    rule that integrates the log^2 singularity; the difference between
    ``n_duffy`` and ``2 n_duffy`` nodes per direction is the error estimate.
    The replaced block keeps the midpoint rule's leading error term
    ``-(c^2/24) int div grad |psi|^2`` (a boundary flux), so that for smooth
    fields the global midpoint cancellation is preserved.
    """
    spec = field.spec
    c = spec.cell
    dens = np.abs(field.values) ** 2
    mask = np.ones(dens.shape, dtype=bool)
    extra = 0.0
    err = 0.0
    if evaluator is not None:
        L = spec.half_width
        for y in _positions(centers):
            pos = (y + L) / c
            i0 = np.ceil(pos - 1e-9).astype(int) - 2
            i1 = np.floor(pos + 1e-9).astype(int) + 1
            if np.any(i0 < 0) or np.any(i1 >= spec.m):
                continue  # center too close to the box edge; keep midpoint cells
            if not mask[i0[0] : i1[0] + 1, i0[1] : i1[1] + 1].all():
                continue  # overlaps an already refined block
            mask[i0[0] : i1[0] + 1, i0[1] : i1[1] + 1] = False
            lo = -L + c * i0
            hi = -L + c * (i1 + 1)
            coarse = _block_integral(evaluator, y, lo, hi, n_duffy)
            fine = _block_integral(evaluator, y, lo, hi, 2 * n_duffy)
            flux = _edge_flux(evaluator, lo, hi, 4 * n_duffy)
            extra += fine - c * c / 24.0 * flux
            err += abs(fine - coarse)
    # np.sum uses pairwise summation: fixed order, reproducible
    total = c * c * np.sum(dens[mask]) + extra
    norm = float(np.sqrt(total))
    return norm, (0.5 * err / norm if norm > 0 else 0.0)


# ---------------------------------------------------------------------------
# boundary behaviour


def boundary_fit(evaluator, center, radii=RING_RADII, n_angles: int = 8):
    """Fit psi ~ (q/2pi) log(1/r) + c on small rings around ``center``.

    Returns ``(q_fit, const_fit)``.  ``evaluator`` maps points (..., 2) to psi.
    """
    radii = np.asarray(radii, dtype=float)
    if np.unique(radii).size < 2:
        raise ValueError("boundary fit needs at least two distinct ring radii")
    ang = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles
    rr, aa = np.meshgrid(radii, ang, indexing="ij")
    y = np.asarray(center, dtype=float)
    pts = np.stack([y[0] + rr * np.cos(aa), y[1] + rr * np.sin(aa)], axis=-1).reshape(-1, 2)
    vals = evaluator(pts)
    design = np.stack([np.log(1.0 / rr.ravel()) / (2 * np.pi), np.ones(rr.size)], axis=1)
    if np.linalg.cond(design) > 1e8:
        raise ArithmeticError("boundary fit is ill-conditioned")
    coef, *_ = np.linalg.lstsq(design.astype(complex), vals, rcond=None)
    return complex(coef[0]), complex(coef[1])


# ---------------------------------------------------------------------------
# CSV


def write_field_csv(path, field: GridField) -> None:
    ax = field.spec.axis()
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["x", "y", "re", "im"])
        for a, xa in enumerate(ax):
            for b, yb in enumerate(ax):
                v = field.values[a, b]
                wr.writerow([f"{xa:.17g}", f"{yb:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def write_norm_csv(path, rows) -> None:
    """rows: iterable of (t, norm, refinement_error)."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "norm", "refinement_error"])
        for t, nrm, err in rows:
            wr.writerow([f"{t:.17g}", f"{nrm:.17g}", f"{err:.17g}"])
