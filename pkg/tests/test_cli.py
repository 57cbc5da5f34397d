import csv
import hashlib
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from tdpoint.cli import ConfigError, main, parse_config

MINIMAL = """
[run]
t_end = 0.05
h = 1e-3

[center.1]
position = 0, 0
a0 = 0.0
"""

TWO_GAUSSIAN = """
[run]
t_start = 0
t_end = 0.1
h = 1e-3
checkpoints = 0.0, 0.05

[grid]
L = 8
m = 64

[center.1]
position = 0, 0
strength = constant
a0 = 0

[gaussian.1]
amplitude = 1
center = 0.8, 0
sigma = 0.5

[gaussian.2]
amplitude = {amp!r}
center = -0.6, 0.3
sigma = 0.7
"""


def two_gaussian_text():
    amp = -np.exp(-0.64 / 0.5) / np.exp(-0.45 / 0.98)
    return TWO_GAUSSIAN.format(amp=float(amp))


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


# parsing


def test_minimal_config(tmp_path):
    cfg = parse_config(write(tmp_path, MINIMAL))
    assert len(cfg.centers) == 1
    assert cfg.h == 1e-3 and cfg.s == 0.0 and cfg.T == 0.05
    assert cfg.lam == 1.0 and cfg.m == 512 and cfg.L == 12.0
    assert cfg.charges0 == [0j]


def test_full_config(tmp_path):
    cfg = parse_config(write(tmp_path, two_gaussian_text()))
    assert len(cfg.gaussians) == 2
    assert cfg.checkpoints == [0.0, 0.05]
    assert cfg.state().lam == 1.0


@pytest.mark.parametrize(
    "edit, pattern",
    [
        (("h = 1e-3", "h = 0"), r"`h` must be > 0"),
        (("h = 1e-3", "h = -1"), r"`h` must be > 0"),
        (("t_end = 0.05", "t_end = 0"), r"`t_end` must be > `t_start`"),
        (("t_end = 0.05", "t_end = 0.0505"), r"multiple of `h`"),
        (("a0 = 0.0", "a0 = zero"), r"`a0`"),
        (("position = 0, 0", "position = 0"), r"`position`"),
    ],
)
def test_config_errors_name_the_key(tmp_path, edit, pattern):
    text = MINIMAL.replace(*edit)
    with pytest.raises(ConfigError, match=pattern):
        parse_config(write(tmp_path, text))


def test_missing_key(tmp_path):
    with pytest.raises(ConfigError, match="missing key `h`"):
        parse_config(write(tmp_path, MINIMAL.replace("h = 1e-3", "")))


def test_coincident_centers(tmp_path):
    text = MINIMAL + "\n[center.2]\nposition = 1, 1\na0 = 0\n[center.3]\nposition = 0, 0\na0 = 0\n"
    with pytest.raises(ConfigError, match="centers 1 and 3 coincide"):
        parse_config(write(tmp_path, text))


def test_box_must_contain_centers(tmp_path):
    text = MINIMAL.replace("position = 0, 0", "position = 8, 0") + "\n[grid]\nL = 12\nm = 64\n"
    with pytest.raises(ConfigError, match="`L` must exceed"):
        parse_config(write(tmp_path, text))


def test_odd_grid(tmp_path):
    with pytest.raises(ConfigError, match="`m` must be an even"):
        parse_config(write(tmp_path, MINIMAL + "\n[grid]\nm = 63\n"))


def test_checkpoint_outside_window(tmp_path):
    with pytest.raises(ConfigError, match="checkpoint"):
        parse_config(write(tmp_path, MINIMAL.replace("h = 1e-3", "h = 1e-3\ncheckpoints = 0.2")))


# commands


def test_charges_zero_state(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    out = tmp_path / "out"
    assert main(["charges", "--config", str(cfg), "--out", str(out)]) == 0
    rows = list(csv.reader(open(out / "charges.csv")))
    assert rows[0] == ["t", "re_q1", "im_q1"]
    assert len(rows) == 52
    assert all(float(v) == 0.0 for r in rows[1:] for v in r[1:])


def test_charges_need_a_center(tmp_path, capsys):
    cfg = write(tmp_path, "[run]\nt_end = 0.01\nh = 1e-3\n")
    assert main(["charges", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "[center.N]" in capsys.readouterr().err


def test_charges_need_config(tmp_path, capsys):
    assert main(["charges", "--out", str(tmp_path)]) == 2
    assert "--config" in capsys.readouterr().err


def test_evolve_outputs_and_initial_dump(tmp_path):
    cfg_path = write(tmp_path, two_gaussian_text())
    before = cfg_path.read_bytes()
    out = tmp_path / "out"
    assert main(["evolve", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert cfg_path.read_bytes() == before
    names = sorted(os.listdir(out))
    assert names == ["charges.csv", "field_t0.000000.csv", "field_t0.050000.csv", "norms.csv"]
    # the dump at t = s holds the initial state samples
    cfg = parse_config(cfg_path)
    rows = np.loadtxt(out / "field_t0.000000.csv", delimiter=",", skiprows=1)
    psi = rows[:, 2] + 1j * rows[:, 3]
    ref = sum(g.amplitude * np.exp(-((rows[:, :2] - g.center) ** 2).sum(-1) / (2 * g.sigma**2))
              for g in cfg.gaussians)
    assert np.max(np.abs(psi - ref)) < 1e-15
    norms = np.loadtxt(out / "norms.csv", delimiter=",", skiprows=1)
    assert norms.shape == (2, 3)
    assert abs(norms[1, 1] / norms[0, 1] - 1) < 5e-3


def test_outputs_are_reproducible(tmp_path):
    cfg = write(tmp_path, two_gaussian_text())
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["evolve", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["evolve", "--config", str(cfg), "--out", str(b)]) == 0
    for name in os.listdir(a):
        assert sha(a / name) == sha(b / name)


def test_specfun_table(tmp_path):
    assert main(["specfun-table", "--out", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "specfun_table.csv")))
    assert rows[0] == ["name", "x", "value_re", "value_im"]
    names = {r[0] for r in rows[1:]}
    assert {"volterra_I", "bessel_k0", "si", "ci", "laplace_I[p=e]"} <= names
    k0 = [r for r in rows if r[0] == "bessel_k0" and float(r[1]) == 1.0][0]
    assert float(k0[2]) == pytest.approx(0.42102443824070833, rel=1e-15)


def test_tolerance_scale_only_for_verify(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL)
    assert main(["charges", "--config", str(cfg), "--out", str(tmp_path), "--tolerance-scale", "2"]) == 2
    assert "verify" in capsys.readouterr().err


def test_failing_stage_is_named(tmp_path, capsys, monkeypatch):
    import tdpoint.charge_solver as cs

    def boom(*a, **k):
        raise ArithmeticError("singular step")

    monkeypatch.setattr(cs, "solve_charges", boom)
    cfg = write(tmp_path, MINIMAL)
    assert main(["charges", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "stage `solve` failed" in capsys.readouterr().err


def test_verify_end_to_end(tmp_path):
    # console entry point in a fresh interpreter with a thread cap
    out = tmp_path / "v"
    proc = subprocess.run(
        [sys.executable, "-m", "tdpoint.cli", "verify", "--out", str(out), "--threads", "1"],
        capture_output=True, text=True, timeout=600,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    rows = list(csv.reader(open(out / "verify_report.csv")))
    assert rows[0][:4] == ["name", "measured", "tolerance", "passed"]
    assert all(r[3] == "true" for r in rows[1:])
    assert "PASS" in proc.stdout and "FAIL" not in proc.stdout
