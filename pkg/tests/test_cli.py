import subprocess
import sys

import numpy as np
import pytest

from horolab.cli import main
from horolab.harmonics import make_grid, field_from_function, write_field_csv


def write_config(path, **kv):
    path.write_text("".join(f"{k} = {v}\n" for k, v in kv.items()))
    return str(path)


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["build", "-o", str(tmp_path)]) == 2
    assert main(["build", str(tmp_path / "nope.cfg"), "-o", str(tmp_path)]) == 2


def test_bad_config_line_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("rho constant:0.5\n")
    assert main(["build", str(cfg), "-o", str(tmp_path)]) == 2


def test_build_constant_sphere(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.cfg", rho="constant:0.6931471805599453", L=8)
    assert main(["build", cfg, "-o", str(tmp_path)]) == 0
    report = (tmp_path / "report.csv").read_text().splitlines()
    assert report[0].startswith("theta,phi,kappa_min")
    kmin = float(report[1].split(",")[2])
    assert kmin == pytest.approx(-5.0 / 3.0, abs=1e-9)
    summary = (tmp_path / "summary.txt").read_text()
    assert "strongly_H_convex = True" in summary
    obj = (tmp_path / "mesh.obj").read_text().splitlines()
    nverts = sum(1 for l in obj if l.startswith("v "))
    assert nverts == make_grid(8).nnodes
    # ball radius tanh(c/2) for the ln 2 sphere
    first = np.array([float(t) for t in obj[1].split()[1:]])
    assert np.linalg.norm(first) == pytest.approx(np.tanh(np.log(2.0) / 2.0), abs=1e-9)


def test_build_coordinate_factor(tmp_path):
    # rho = 1 + x3/2 keeps lambda below 1/2 everywhere; the unshifted
    # rho = x3 hits lambda = 1 on the equator and is covered below
    cfg = write_config(tmp_path / "c.cfg", rho="coordinate:3:1:0.5", L=8)
    assert main(["build", cfg, "-o", str(tmp_path)]) == 0
    assert (tmp_path / "report.csv").exists()


def test_build_equator_singular_coordinate(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.cfg", rho="coordinate:3:0:1", L=8)
    assert main(["build", cfg, "-o", str(tmp_path)]) == 1
    assert "tau" in capsys.readouterr().err


def test_build_singular_exits_1_with_advice(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.cfg", rho="constant:0.0", L=8)
    assert main(["build", cfg, "-o", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "tau" in err


def test_build_from_field_csv(tmp_path):
    g = make_grid(8)
    fld = field_from_function(g, lambda p: 0.7 + 0.05 * p[0])
    write_field_csv(tmp_path / "rho.csv", fld)
    cfg = write_config(tmp_path / "c.cfg", rho=str(tmp_path / "rho.csv"), L=8)
    assert main(["build", cfg, "-o", str(tmp_path)]) == 0


def test_corrupt_field_csv_exits_2(tmp_path):
    (tmp_path / "rho.csv").write_text("theta,phi,value\nnot,a,number\n")
    cfg = write_config(tmp_path / "c.cfg", rho=str(tmp_path / "rho.csv"), L=8)
    assert main(["build", cfg, "-o", str(tmp_path)]) == 2


def test_solve_constant_target(tmp_path):
    cfg = write_config(tmp_path / "s.cfg", target="constant:0.5", L=8, tol="1e-10")
    assert main(["solve", cfg, "-o", str(tmp_path)]) == 0
    summary = (tmp_path / "summary.txt").read_text()
    assert "status = Converged" in summary
    res = (tmp_path / "residuals.csv").read_text().splitlines()
    assert res[0] == "iter,residual"
    assert float(res[-1].split(",")[1]) <= 1e-10
    assert (tmp_path / "rho.csv").exists()
    assert (tmp_path / "kw.csv").exists()
    assert (tmp_path / "report.csv").exists()
    assert (tmp_path / "mesh.obj").exists()


def test_solve_obstructed_target_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path / "s.cfg", target="coordinate:3:2:1", L=8,
                       max_iter=10)
    assert main(["solve", cfg, "-o", str(tmp_path)]) == 1
    assert "ObstructionSuspected" in capsys.readouterr().err
    assert (tmp_path / "kw.csv").exists()


def test_dual_command(tmp_path):
    cfg = write_config(tmp_path / "d.cfg", rho="constant:0.6931471805599453", L=8)
    assert main(["dual", cfg, "-o", str(tmp_path)]) == 0
    rows = (tmp_path / "dual.csv").read_text().splitlines()
    assert rows[0] == "theta,phi,lambda_i,lambda_star_i,product"
    prods = [float(r.split(",")[4]) for r in rows[1:]]
    assert np.max(np.abs(np.array(prods) - 1.0)) <= 1e-5


def test_weingarten_command(tmp_path):
    cfg = write_config(tmp_path / "w.cfg", rho="constant:1.0", L=8, k=2)
    assert main(["weingarten", cfg, "-o", str(tmp_path)]) == 0
    txt = (tmp_path / "weingarten_summary.txt").read_text()
    assert "max_spread" in txt


def test_verify_quick_mode(tmp_path, capsys):
    assert main(["verify", "-o", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "PASS all invariant suites" in out
    for name in ("report.csv", "mesh.obj", "residuals.csv", "kw.csv", "dual.csv"):
        assert (tmp_path / name).exists(), name


def test_verify_deterministic_across_threads(tmp_path):
    def run(sub, threads):
        d = tmp_path / sub
        d.mkdir()
        env = {"HOROLAB_THREADS": threads, "PATH": "/usr/bin:/bin"}
        r = subprocess.run(
            [sys.executable, "-m", "horolab.cli", "verify", "-o", str(d)],
            capture_output=True, env=env)
        assert r.returncode == 0, r.stderr.decode()
        return {f: (d / f).read_bytes()
                for f in ("report.csv", "mesh.obj", "residuals.csv", "kw.csv",
                          "dual.csv", "verify_summary.txt")}

    a = run("a", "1")
    b = run("b", "4")
    c = run("c", "1")
    assert a == b == c
