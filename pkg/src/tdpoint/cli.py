"""Command-line front end.

Configuration is an INI file::

    [run]
    t_start = 0.0        ; s
    t_end = 1.0          ; T
    h = 1e-3
    lambda = 1.0
    checkpoints = 0.1, 0.3, 0.6
    output = out         ; optional, --out wins

    [grid]
    L = 12
    m = 512

    [center.1]
    position = 0.0, 0.0
    strength = constant  ; constant | linear | sinusoidal
    a0 = 0.0             ; alpha(t) = a0 [+ a1 t | + a1 sin(omega t + phi)]
    charge0 = 0.0, 0.0   ; re, im of q_j(s)

    [gaussian.1]
    amplitude = 1.0, 0.0
    center = 0.8, 0.0
    sigma = 0.5

Sections ``center.N`` and ``gaussian.N`` are ordered by N.
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, field

__all__ = ["ConfigError", "RunConfig", "parse_config", "run", "main"]

COMMANDS = ("charges", "evolve", "verify", "specfun-table")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    centers: list
    gaussians: list
    charges0: list
    lam: float
    s: float
    T: float
    h: float
    L: float
    m: int
    checkpoints: list = field(default_factory=list)
    output_dir: str | None = None
    options: dict = field(default_factory=dict)

    def state(self):
        from .charge_solver import InitialState

        return InitialState(tuple(self.gaussians), tuple(self.charges0), self.lam)


# ---------------------------------------------------------------------------
# parsing


def _get(sec, key, name, conv=float, default=None, required=True):
    if key not in sec:
        if required and default is None:
            raise ConfigError(f"[{name}] missing key `{key}`")
        return default
    raw = sec[key]
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}] key `{key}`: cannot parse {raw!r} ({exc})") from None


def _floats(raw):
    return [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]


def _pair(raw):
    vals = _floats(raw)
    if len(vals) != 2:
        raise ValueError("expected two comma-separated numbers")
    return tuple(vals)


def _cplx(raw):
    vals = _floats(raw)
    if len(vals) == 1:
        return complex(vals[0], 0.0)
    if len(vals) == 2:
        return complex(vals[0], vals[1])
    raise ValueError("expected `re` or `re, im`")


def _indexed(cp, prefix):
    out = []
    for name in cp.sections():
        if name.startswith(prefix + "."):
            tag = name[len(prefix) + 1 :]
            if not tag.isdigit():
                raise ConfigError(f"section [{name}]: index must be an integer")
            out.append((int(tag), name))
    return sorted(out)


def parse_config(path) -> RunConfig:
    """Read and validate an INI run configuration."""
    from .charge_solver import Center, Gaussian, StrengthTrajectory

    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path) as fh:
        cp.read_file(fh)
    if "run" not in cp:
        raise ConfigError("missing section [run]")
    run_s = cp["run"]
    s = _get(run_s, "t_start", "run", default=0.0, required=False)
    T = _get(run_s, "t_end", "run")
    h = _get(run_s, "h", "run")
    lam = _get(run_s, "lambda", "run", default=1.0, required=False)
    if not h > 0:
        raise ConfigError(f"[run] `h` must be > 0 (got {h})")
    if not T > s:
        raise ConfigError(f"[run] `t_end` must be > `t_start` (got {T} <= {s})")
    if not lam > 0:
        raise ConfigError(f"[run] `lambda` must be > 0 (got {lam})")
    n = (T - s) / h
    if abs(n - round(n)) > 1e-6 * max(1.0, n):
        raise ConfigError("[run] `t_end - t_start` must be a multiple of `h`")
    if round(n) * h > 100.0 * (1 + 1e-12):
        raise ConfigError("[run] `t_end - t_start` must be <= 100")
    checkpoints = _get(run_s, "checkpoints", "run", conv=_floats, default=[], required=False)
    for c in checkpoints:
        if not (s - 1e-12 <= c <= T + 1e-12):
            raise ConfigError(f"[run] checkpoint {c} outside [t_start, t_end]")
        k = (c - s) / h
        if abs(k - round(k)) > 1e-6:
            raise ConfigError(f"[run] checkpoint {c} is not a time node (multiple of `h` from `t_start`)")
    output = run_s.get("output")

    grid_s = cp["grid"] if "grid" in cp else {}
    L = _get(grid_s, "l", "grid", default=12.0, required=False)
    m = _get(grid_s, "m", "grid", conv=int, default=512, required=False)
    if not L > 0:
        raise ConfigError(f"[grid] `L` must be > 0 (got {L})")
    if m < 2 or m % 2:
        raise ConfigError(f"[grid] `m` must be an even integer >= 2 (got {m})")

    centers, charges0 = [], []
    for idx, name in _indexed(cp, "center"):
        sec = cp[name]
        pos = _get(sec, "position", name, conv=_pair)
        kind = sec.get("strength", "constant").strip()
        if kind not in ("constant", "linear", "sinusoidal"):
            raise ConfigError(f"[{name}] `strength` must be constant, linear or sinusoidal (got {kind!r})")
        params = {k: _get(sec, k, name, default=0.0, required=False) for k in ("a1", "omega", "phi")}
        a0 = _get(sec, "a0", name)
        centers.append(Center(pos, StrengthTrajectory(kind, a0, **params)))
        charges0.append(_get(sec, "charge0", name, conv=_cplx, default=0j, required=False))
    tags = [idx for idx, _ in _indexed(cp, "center")]
    for a in range(len(centers)):
        for b in range(a + 1, len(centers)):
            if centers[a].position == centers[b].position:
                raise ConfigError(f"centers {tags[a]} and {tags[b]} coincide at {centers[a].position}")
        if max(abs(v) for v in centers[a].position) + 5.0 >= L:
            raise ConfigError(f"[grid] `L` must exceed max center coordinate + 5 (center {tags[a]})")

    gaussians = []
    for idx, name in _indexed(cp, "gaussian"):
        sec = cp[name]
        sigma = _get(sec, "sigma", name)
        if not sigma > 0:
            raise ConfigError(f"[{name}] `sigma` must be > 0 (got {sigma})")
        gaussians.append(Gaussian(_get(sec, "amplitude", name, conv=_cplx), _get(sec, "center", name, conv=_pair),
                                  sigma))
    options = {}
    if "verify" in cp:
        options["verify_full"] = cp["verify"].getboolean("full", fallback=True)
    return RunConfig(centers, gaussians, charges0, lam, s, T, h, L, m, checkpoints, output, options)


# ---------------------------------------------------------------------------
# commands


class StageError(RuntimeError):
    def __init__(self, stage, exc):
        super().__init__(f"stage `{stage}` failed: {exc}")
        self.stage = stage


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except Exception as exc:  # report the failing stage, keep the cause
        raise StageError(name, exc) from exc


def _need_centers(cfg, command):
    if not cfg.centers:
        raise ConfigError(f"`{command}` needs at least one [center.N] section")


def _solve(cfg):
    from .charge_solver import solve_charges
    from .volterra_ops import TimeGrid

    grid = TimeGrid.span(cfg.s, cfg.T, cfg.h)
    return solve_charges(cfg.state(), cfg.centers, grid)


def _cmd_charges(cfg, out):
    from .charge_solver import write_charges_csv

    _need_centers(cfg, "charges")
    sol = _stage("solve", _solve, cfg)
    path = os.path.join(out, "charges.csv")
    _stage("write charges", write_charges_csv, path, sol)
    print(f"charges: {path} (residual {sol.residual_norm:.3e})")
    return 0


def _cmd_evolve(cfg, out):
    from .charge_solver import write_charges_csv
    from .wavefield import GridSpec, evaluate, field_norm, reconstruct, write_field_csv, write_norm_csv

    _need_centers(cfg, "evolve")
    sol = _stage("solve", _solve, cfg)
    _stage("write charges", write_charges_csv, os.path.join(out, "charges.csv"), sol)
    spec = GridSpec(cfg.L, cfg.m)
    state = cfg.state()
    rows = []
    for t in cfg.checkpoints or [cfg.T]:
        t = sol.grid.times[sol.grid.index_of(t)]
        field = _stage(f"reconstruct t={t:g}", reconstruct, spec, state, cfg.centers, sol, t)
        _stage("write field", write_field_csv, os.path.join(out, f"field_t{t:.6f}.csv"), field)
        nrm, err = _stage("norm", field_norm, field, cfg.centers,
                          lambda p, t=t: evaluate(p, state, cfg.centers, sol, t))
        rows.append((t, nrm, err))
    _stage("write norms", write_norm_csv, os.path.join(out, "norms.csv"), rows)
    for t, nrm, err in rows:
        print(f"t={t:.6g} norm={nrm:.12g} refinement_error={err:.2e}")
    return 0


def _cmd_verify(cfg, out, scale):
    from . import verify as vf

    full = True if cfg is None else cfg.options.get("verify_full", True)
    reports = _stage("verify", vf.default_suite, workdir=os.path.join(out, "verify_artifacts"), full=full)
    if cfg is not None and cfg.centers:
        reports += _stage("configured state", _configured_cases, cfg, os.path.join(out, "verify_artifacts"))
    if scale != 1.0:
        reports = [r.scaled(scale) for r in reports]
    path = os.path.join(out, "verify_report.csv")
    _stage("write report", vf.write_report_csv, path, reports)
    print(vf.format_report(reports))
    failed = [r.name for r in reports if not r.passed]
    if failed:
        print(f"{len(failed)} invariant(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _configured_cases(cfg, workdir):
    from . import verify as vf

    state = cfg.state()
    reports = []
    mid = cfg.s + cfg.h * round((cfg.T - cfg.s) / (2 * cfg.h))
    reports.append(vf.group_law_case(state, cfg.centers, cfg.h, cfg.T, mid, s=cfg.s, workdir=workdir,
                                     name="group_law_config"))
    offsets = [c - cfg.s for c in cfg.checkpoints if c > cfg.s]
    if offsets:
        rep, _ = vf.unitarity_case(state, cfg.centers, cfg.h, tuple(offsets), cfg.L, cfg.m, s=cfg.s,
                                   workdir=workdir, name="unitarity_config")
        reports.append(rep)
    return reports


def _cmd_specfun_table(out):
    import csv

    import numpy as np

    from . import specfun as sf
    from .verify import laplace_transform_check

    xs = [1e-8, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
    rows = []
    for x in xs:
        rows.append(("volterra_I", x, sf.volterra_I(x)))
        rows.append(("volterra_nu0", x, sf.volterra_nu0(x)))
        rows.append(("bessel_k0", x, sf.bessel_k0(x)))
        rows.append(("bessel_j0", x, sf.bessel_j0(x)))
        si, ci = sf.si_ci(x)
        rows.append(("si", x, si))
        rows.append(("ci", x, ci))
        rows.append(("k0_evolution_diag[lam=1]", x, sf.k0_evolution_diag(1.0, x)))
        rows.append(("k0_evolution_offdiag[lam=1,d=1]", x, sf.k0_evolution_offdiag(1.0, x, 1.0)))
        rows.append(("lagged_free_integral[d=1]", x, sf.lagged_free_integral(x, 1.0)))
    val, e_inv, e_p = laplace_transform_check(np.e)
    rows.append(("laplace_I[p=e]", np.e, val))
    rows.append(("laplace_I[p=e]-1/log(p)", np.e, e_inv))
    rows.append(("laplace_I[p=e]-p/log(p)", np.e, e_p))
    path = os.path.join(out, "specfun_table.csv")
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["name", "x", "value_re", "value_im"])
        for name, x, v in rows:
            v = complex(v)
            wr.writerow([name, f"{x:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
    print(f"specfun table: {path}")
    return 0


def run(command: str, cfg: RunConfig | None, out: str, tolerance_scale: float = 1.0) -> int:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    os.makedirs(out, exist_ok=True)
    if command in ("charges", "evolve") and cfg is None:
        raise ConfigError(f"`{command}` needs --config")
    if command == "charges":
        return _cmd_charges(cfg, out)
    if command == "evolve":
        return _cmd_evolve(cfg, out)
    if command == "verify":
        return _cmd_verify(cfg, out, tolerance_scale)
    return _cmd_specfun_table(out)


def _parser():
    p = argparse.ArgumentParser(prog="tdpoint", description="Point interactions with time-dependent strengths in 2D.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--out", help="output directory (default: [run] output or ./out)")
    p.add_argument("--threads", type=int, default=0, help="BLAS threads (0 = library default)")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="verify only: scale all tolerances (report marked non-authoritative)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return 2
    if args.threads > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    if args.tolerance_scale != 1.0 and args.command != "verify":
        print("error: --tolerance-scale only applies to `verify`", file=sys.stderr)
        return 2
    if not args.tolerance_scale > 0:
        print("error: --tolerance-scale must be > 0", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(args.config) if args.config else None
        out = args.out or (cfg.output_dir if cfg and cfg.output_dir else "out")
        return run(args.command, cfg, out, args.tolerance_scale)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
