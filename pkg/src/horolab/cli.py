"""Command-line entry point.

Commands: build, solve, verify, dual, weingarten.  Configuration is a flat
``key = value`` text file; every numeric output is written with full
round-trip decimal formatting so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import christoffel as ch
from . import horospherical as hs
from . import weingarten as wg
from .errors import (
    ConfigError,
    HoroLabError,
    SingularPoint,
    SolveFailed,
    TauNotFound,
    ZeroEigenvalue,
)
from .harmonics import (
    ScalarField,
    field_factor,
    field_from_function,
    make_grid,
    read_field_csv,
    write_field_csv,
)
from .sphere import SpherePoint, constant_factor, coordinate_factor, jet2


def thread_budget() -> int:
    """Worker cap from HOROLAB_THREADS; results never depend on it."""
    raw = os.environ.get("HOROLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"HOROLAB_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def parse_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    out = {}
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{p}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out


def _builtin_factor(name: str):
    parts = name.split(":")
    if parts[0] == "constant" and len(parts) == 2:
        return constant_factor(float(parts[1]))
    if parts[0] == "coordinate" and len(parts) == 4:
        return coordinate_factor(int(parts[1]), float(parts[2]), float(parts[3]))
    return None


def load_factor(source: str, L: int):
    """Conformal factor from a builtin name or a field CSV path."""
    built = _builtin_factor(source)
    if built is not None:
        return built, None
    fld = read_field_csv(source)
    return field_factor(fld), fld


def load_target_field(source: str, grid) -> ScalarField:
    built = _builtin_factor(source)
    if built is not None:
        return field_from_function(grid, lambda p: built.evaluator(p))
    fld = read_field_csv(source)
    if fld.grid.L != grid.L:
        raise ConfigError(f"target grid degree {fld.grid.L} != configured L {grid.L}")
    return fld


def _sweep(spec, grid):
    reports, frames = [], []
    for p in grid.points():
        j = jet2(spec, SpherePoint(p))
        reports.append(hs.curvature_report(j))
        frames.append(hs.represent(j))
    return reports, frames


def _chain_deviation(reports) -> float:
    dev = 0.0
    for rep in reports:
        dev = max(dev, float(np.max(np.abs(0.5 * wg.transform_T(rep.kappas) - rep.lambdas))))
        dev = max(dev, abs(rep.scalar - (2.0 - 2.0 * float(np.sum(rep.radii)))))
        dev = max(dev, abs(float(np.sum(rep.lambdas)) - rep.scalar / 2.0))
    return dev


def _write_summary(path, lines) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _regularity_advice(spec, grid) -> str:
    try:
        tau = hs.find_tau0(spec, grid)
    except TauNotFound as exc:
        return f"no dilation certifies regularity ({exc})"
    return (f"construction singular at tau = 1; retry after shifting rho by "
            f"ln(tau) with tau = {float(tau)!r}")


def run_build(cfg: dict, outdir: Path) -> int:
    if "rho" not in cfg:
        print("config key 'rho' is required (builtin name or field CSV path)",
              file=sys.stderr)
        return 2
    L = int(cfg.get("L", "16"))
    grid = make_grid(L)
    spec, _ = load_factor(cfg["rho"], L)
    try:
        reports, frames = _sweep(spec, grid)
    except SingularPoint as exc:
        print(f"regularity failure: {exc}", file=sys.stderr)
        print(_regularity_advice(spec, grid), file=sys.stderr)
        return 1
    hs.write_report_csv(outdir / "report.csv", grid, reports)
    hs.write_obj(outdir / "mesh.obj", grid, frames)
    kmin = min(float(r.kappas[-1]) for r in reports)
    kmax = max(float(r.kappas[0]) for r in reports)
    _write_summary(outdir / "summary.txt", [
        f"command = build",
        f"L = {L}",
        f"nodes = {grid.nnodes}",
        f"kappa_min = {kmin!r}",
        f"kappa_max = {kmax!r}",
        f"canonical = {all(r.canonical for r in reports)}",
        f"strongly_H_convex = {all(r.strongly_H_convex for r in reports)}",
        f"umbilic = {all(r.umbilic for r in reports)}",
        f"identity_chain_max_dev = {_chain_deviation(reports)!r}",
    ])
    return 0


def run_solve(cfg: dict, outdir: Path) -> int:
    if "target" not in cfg:
        print("config key 'target' is required (builtin name or field CSV path)",
              file=sys.stderr)
        return 2
    L = int(cfg.get("L", "16"))
    grid = make_grid(L)
    S = load_target_field(cfg["target"], grid)
    scfg = ch.SolveConfig(
        L=L,
        tol=float(cfg.get("tol", "1e-10")),
        max_iter=int(cfg.get("max_iter", "40")),
        damping=float(cfg.get("damping", "0.5")))
    try:
        result = ch.build_solution(S, scfg)
    except SolveFailed as exc:
        out = ch.solve_nirenberg(S, scfg)
        ch.write_residuals_csv(outdir / "residuals.csv", out.residuals)
        ch.write_kw_csv(outdir / "kw.csv", out.kw)
        print(f"solve failed: {exc} (status {out.status.value})", file=sys.stderr)
        return 1
    except (SingularPoint, TauNotFound) as exc:
        print(f"regularity failure: {exc}", file=sys.stderr)
        return 1
    write_field_csv(outdir / "rho.csv", result.outcome.rho)
    ch.write_residuals_csv(outdir / "residuals.csv", result.outcome.residuals)
    ch.write_kw_csv(outdir / "kw.csv", result.outcome.kw)
    hs.write_report_csv(outdir / "report.csv", grid, result.reports)
    hs.write_obj(outdir / "mesh.obj", grid, result.frames)
    _write_summary(outdir / "summary.txt", [
        f"command = solve",
        f"L = {L}",
        f"status = {result.outcome.status.value}",
        f"newton_steps = {len(result.outcome.residuals) - 1}",
        f"final_residual = {result.outcome.residuals[-1]!r}",
        f"tau = {result.tau!r}",
        f"achieved_C_dev = {result.achieved_C_dev!r}",
        f"metric_dev = {result.metric_dev!r}",
    ])
    return 0


def run_dual(cfg: dict, outdir: Path) -> int:
    if "rho" not in cfg:
        print("config key 'rho' is required", file=sys.stderr)
        return 2
    L = int(cfg.get("L", "16"))
    grid = make_grid(L)
    spec, _ = load_factor(cfg["rho"], L)

    from .sphere import schouten, schouten_eigen

    lams = []
    for p in grid.points():
        j = jet2(spec, SpherePoint(p))
        lams.append(np.sort(schouten_eigen(schouten(j), j)))
    pooled = np.concatenate(lams)
    if "t" in cfg:
        t = float(cfg["t"])
    else:
        t = hs.choose_inverse_t(pooled)

    th, ph = grid.node_angles()
    lines = ["theta,phi,lambda_i,lambda_star_i,product"]
    skipped = []
    worst = 0.0
    for idx, p in enumerate(grid.points()):
        try:
            lam_star = hs.schouten_inverse(spec, SpherePoint(p), t)
        except ZeroEigenvalue:
            skipped.append(idx)
            continue
        for lam_i, star_i in zip(lams[idx], lam_star):
            prod = float(lam_i * star_i)
            worst = max(worst, abs(prod - 1.0))
            lines.append(",".join([
                repr(float(th[idx])), repr(float(ph[idx])),
                repr(float(lam_i)), repr(float(star_i)), repr(prod)]))
    with open(outdir / "dual.csv", "w") as fh:
        fh.write("\n".join(lines) + "\n")
    summary = [
        f"command = dual",
        f"L = {L}",
        f"t = {float(t)!r}",
        f"max_product_dev = {worst!r}",
        f"zero_eigenvalue_nodes = {len(skipped)}",
    ]
    if skipped:
        summary.append("skipped_node_indices = " + " ".join(str(i) for i in skipped))
    _write_summary(outdir / "dual_summary.txt", summary)
    return 0


def run_weingarten(cfg: dict, outdir: Path) -> int:
    if "rho" not in cfg:
        print("config key 'rho' is required", file=sys.stderr)
        return 2
    L = int(cfg.get("L", "16"))
    k = int(cfg.get("k", "1"))
    grid = make_grid(L)
    spec, _ = load_factor(cfg["rho"], L)
    try:
        reports, _ = _sweep(spec, grid)
    except SingularPoint as exc:
        print(f"regularity failure: {exc}", file=sys.stderr)
        print(_regularity_advice(spec, grid), file=sys.stderr)
        return 1
    wf = wg.WeingartenFunctional(n=2, k=k)
    diag = wg.umbilicity_diagnostic(reports, wf)
    _write_summary(outdir / "weingarten_summary.txt", [
        f"command = weingarten",
        f"L = {L}",
        f"k = {k}",
        f"max_spread = {diag['max_spread']!r}",
        f"wein_const_dev = {diag['wein_const_dev']!r}",
    ])
    return 0


# ---------------------------------------------------------------------------
# verify: the cross-module invariant suite, emitting every artifact the
# plotting side consumes
# ---------------------------------------------------------------------------

def _verify_checks(L: int, rng):
    from .lorentz import QuadricTag, classify, lorentz_dot

    def lorentz_basics():
        v = np.array([2.0, 1.0, 1.0, 1.0])
        assert classify(v).tag is QuadricTag.HYPERBOLIC
        assert abs(lorentz_dot(v, v) + 1.0) <= 1e-12

    def sphere_oracles():
        for c in (0.25, np.log(2.0), 1.0):
            for n in (2, 3):
                x = SpherePoint(np.eye(n + 1)[-1])
                rep = hs.curvature_report(jet2(constant_factor(c), x))
                coth = np.cosh(c) / np.sinh(c)
                assert np.max(np.abs(rep.kappas + coth)) <= 1e-9
                assert np.max(np.abs(rep.radii - 0.5 * (1 - np.exp(-2 * c)))) <= 1e-9
                assert abs(rep.scalar - n * (n - 1) * np.exp(-2 * c)) <= 1e-9

    def identity_chain():
        grid = make_grid(L)
        from .harmonics import degree_of_index
        nb = min(81, (L + 1) ** 2)  # band limit 8 regardless of grid degree
        ell = degree_of_index(L)
        coeffs = np.zeros((L + 1) ** 2)
        # spectral decay keeps the Hessian small enough to stay regular
        coeffs[:nb] = 0.05 * rng.normal(size=nb) / (1.0 + ell[:nb]) ** 2
        # and center away from the lambda = 1/2 regularity boundary
        coeffs[0] += 0.8 * np.sqrt(4.0 * np.pi)
        from .harmonics import field_from_coeffs
        spec = field_factor(field_from_coeffs(grid, coeffs))
        for p in grid.points()[:: max(1, grid.nnodes // 40)]:
            rep = hs.curvature_report(jet2(spec, SpherePoint(p)))
            assert np.max(np.abs(0.5 * wg.transform_T(rep.kappas) - rep.lambdas)) <= 1e-7

    def flow_law():
        rep = hs.curvature_report(jet2(constant_factor(0.8), SpherePoint(np.array([0.0, 0.0, 1.0]))))
        for t in (0.2, 0.9):
            assert abs(hs.christoffel_flow_mean(rep.christoffel_mean, t)
                       - 0.5 * (1 - np.exp(-2 * (0.8 + t)))) <= 1e-12

    def transform_involution():
        for _ in range(200):
            x = 1.0 - np.abs(rng.normal(size=3)) - 0.01
            assert np.max(np.abs(wg.transform_T(wg.transform_T(x)) - x)) <= 1e-12

    return [
        ("lorentz basics", lorentz_basics),
        ("geodesic sphere oracles", sphere_oracles),
        ("identity chain", identity_chain),
        ("christoffel flow law", flow_law),
        ("transform involution", transform_involution),
    ]


def run_verify(cfg: dict, outdir: Path) -> int:
    L = int(cfg.get("L", "16"))
    if "rho" in cfg:
        # optional user-supplied field; parse failures surface as exit 2
        load_factor(cfg["rho"], L)
    rng = np.random.default_rng(0)
    for name, check in _verify_checks(L, rng):
        try:
            check()
        except AssertionError:
            print(f"FAIL {name}", file=sys.stderr)
            return 1
        print(f"PASS {name}")

    # artifacts for the plotting side: a constant-factor build, a solve and
    # a dual sweep, all deterministic
    grid = make_grid(L)
    spec = constant_factor(np.log(2.0))
    reports, frames = _sweep(spec, grid)
    hs.write_report_csv(outdir / "report.csv", grid, reports)
    hs.write_obj(outdir / "mesh.obj", grid, frames)

    S = field_from_function(grid, lambda p: 0.5)
    out = ch.solve_nirenberg(S, ch.SolveConfig(L=L, tol=1e-10))
    ch.write_residuals_csv(outdir / "residuals.csv", out.residuals)
    ch.write_kw_csv(outdir / "kw.csv", out.kw)
    dual_code = run_dual({"rho": "constant:" + repr(float(np.log(2.0))), "L": str(L)},
                         outdir)
    if dual_code != 0:
        print("FAIL dual sweep", file=sys.stderr)
        return 1
    _write_summary(outdir / "verify_summary.txt", [
        "command = verify",
        f"L = {L}",
        f"solver_status = {out.status.value}",
        "result = PASS",
    ])
    print("PASS all invariant suites")
    return 0


COMMANDS = {
    "build": run_build,
    "solve": run_solve,
    "verify": run_verify,
    "dual": run_dual,
    "weingarten": run_weingarten,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="horolab",
        description="conformal factors on the sphere and their horospherically "
                    "convex hypersurfaces")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", nargs="?", help="flat key = value config file")
    parser.add_argument("-o", "--out", default=".", help="output directory")
    args = parser.parse_args(argv)

    thread_budget()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.command == "verify" and args.config is None:
        cfg = {}
    elif args.config is None:
        parser.print_usage(sys.stderr)
        print("a config file is required for this command", file=sys.stderr)
        return 2
    else:
        try:
            cfg = parse_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2

    try:
        return COMMANDS[args.command](cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HoroLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
