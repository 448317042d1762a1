import numpy as np
import pytest

from horolab.christoffel import (
    BuildResult,
    SolveConfig,
    SolveStatus,
    build_solution,
    christoffel_to_scalar,
    kazdan_warner,
    nirenberg_residual,
    scalar_to_christoffel,
    solve_nirenberg,
    write_kw_csv,
    write_residuals_csv,
    KW_NOISE_FLOOR,
)
from horolab.errors import SolveFailed
from horolab.harmonics import (
    ScalarField,
    analyze,
    field_from_coeffs,
    field_from_function,
    laplacian_coeffs,
    make_grid,
    synthesize,
)

rng = np.random.default_rng(23)


def constant_field(grid, v):
    return ScalarField(grid, np.full(grid.nnodes, float(v)))


def manufactured(grid, amp=0.15):
    """rho0 of degree 2 and the scalar field it solves for: S = 2 e^{-2 rho0} (1 - Lap rho0)."""
    rho0 = field_from_function(
        grid, lambda p: amp * (p[0] * p[1] + 0.5 * p[2]))
    lap = synthesize(grid, laplacian_coeffs(rho0.coeffs, grid.L))
    S = ScalarField(grid, 2.0 * np.exp(-2.0 * rho0.samples) * (1.0 - lap.samples))
    return rho0, S


# ---------------------------------------------------------------------------
# algebraic conversions
# ---------------------------------------------------------------------------

def test_christoffel_to_scalar_examples():
    g = make_grid(6)
    assert np.allclose(christoffel_to_scalar(constant_field(g, 3.0 / 8.0), 2).samples, 0.5)
    assert np.allclose(christoffel_to_scalar(constant_field(g, 0.5), 2).samples, 0.0)
    assert np.allclose(christoffel_to_scalar(constant_field(g, 0.0), 3).samples, 6.0)


def test_scalar_to_christoffel_examples():
    g = make_grid(6)
    assert np.allclose(scalar_to_christoffel(constant_field(g, 0.5), 1.0, 2).samples, 3.0 / 8.0)
    big = scalar_to_christoffel(constant_field(g, 7.3), 1e8, 2)
    assert np.allclose(big.samples, 0.5, atol=1e-15)
    with pytest.raises(ValueError):
        scalar_to_christoffel(constant_field(g, 1.0), 0.0, 2)


def test_conversion_round_trip():
    g = make_grid(8)
    C = ScalarField(g, 0.1 * rng.normal(size=g.nnodes))
    back = scalar_to_christoffel(christoffel_to_scalar(C, 2), 1.0, 2)
    assert np.max(np.abs(back.samples - C.samples)) <= 1e-14


# ---------------------------------------------------------------------------
# Kazdan-Warner integrals
# ---------------------------------------------------------------------------

def test_kw_constant_C_vanishes():
    g = make_grid(8)
    rho = field_from_function(g, lambda p: 0.2 * p[0])
    kw = kazdan_warner(constant_field(g, 0.37), rho)
    assert np.max(np.abs(kw)) <= 1e-12


def test_kw_moment_oracle():
    # C = x3, rho = 0: KW_3 = integral of (1 - x3^2) = 8 pi / 3
    g = make_grid(12)
    C = field_from_function(g, lambda p: p[2])
    rho = constant_field(g, 0.0)
    kw = kazdan_warner(C, rho)
    assert kw[2] == pytest.approx(8.0 * np.pi / 3.0, abs=1e-10)
    assert abs(kw[0]) <= 1e-12 and abs(kw[1]) <= 1e-12


def test_kw_noise_floor_on_exact_case():
    # known-exact case: solution-derived C, quadrature noise only
    g = make_grid(16)
    rho0, S = manufactured(g)
    C = scalar_to_christoffel(christoffel_to_scalar(
        scalar_to_christoffel(S, 1.0, 2), 2), 1.0, 2)
    kw = kazdan_warner(scalar_to_christoffel(S, 1.0, 2), rho0)
    assert np.max(np.abs(kw)) <= KW_NOISE_FLOOR


# ---------------------------------------------------------------------------
# Nirenberg solver
# ---------------------------------------------------------------------------

def test_constant_solution_oracle():
    g = make_grid(16)
    S = constant_field(g, 0.5)
    out = solve_nirenberg(S, SolveConfig(L=16, tol=1e-10))
    assert out.status is SolveStatus.CONVERGED
    assert len(out.residuals) - 1 <= 8  # Newton steps taken
    assert out.residuals[-1] <= 1e-10
    assert np.max(np.abs(out.rho.samples - np.log(2.0))) <= 1e-9
    assert np.max(np.abs(out.kw)) <= 10.0 * KW_NOISE_FLOOR


def test_round_metric_fixed_point():
    g = make_grid(8)
    out = solve_nirenberg(constant_field(g, 2.0), SolveConfig(L=8))
    assert out.status is SolveStatus.CONVERGED
    assert np.max(np.abs(out.rho.samples)) <= 1e-12


def test_manufactured_nonconstant_solve():
    g = make_grid(16)
    rho0, S = manufactured(g)
    out = solve_nirenberg(S, SolveConfig(L=16, tol=1e-9))
    assert out.status is SolveStatus.CONVERGED
    # the gauge group moves solutions around; judge by residual, not by rho
    assert nirenberg_residual(out.rho, S) <= 1e-9
    assert np.max(np.abs(out.kw)) <= 10.0 * KW_NOISE_FLOOR


def test_newton_quadratic_tail():
    # asserted on a run whose linearization is uniformly well conditioned;
    # near-round nonconstant targets carry an approximate gauge kernel that
    # inflates the quadratic constant (see the superlinear check below)
    g = make_grid(16)
    out = solve_nirenberg(constant_field(g, 0.5), SolveConfig(L=16, tol=1e-12))
    rs = [r for r in out.residuals if r > 1e-14]
    tail = [r for r in rs if r < 1e-3][-3:]
    assert len(tail) >= 2
    for a, b in zip(tail, tail[1:]):
        assert b <= 10.0 * a * a


def test_newton_superlinear_tail_nonconstant():
    g = make_grid(16)
    _, S = manufactured(g)
    out = solve_nirenberg(S, SolveConfig(L=16, tol=1e-9))
    rs = out.residuals
    # once genuinely below the gauge-crawl scale the steps are superlinear
    tail = [r for r in rs if r < 1e-5 and r > 1e-13]
    for a, b in zip(tail, tail[1:]):
        assert b <= a ** 1.3


def test_monotone_target_obstructed():
    g = make_grid(16)
    S = field_from_function(g, lambda p: 2.0 + p[2])
    out = solve_nirenberg(S, SolveConfig(L=16, tol=1e-10, max_iter=25))
    assert out.status is not SolveStatus.CONVERGED
    assert out.status is SolveStatus.OBSTRUCTION_SUSPECTED
    assert abs(out.kw[2]) >= 1.0


def test_gauge_covariance_residual():
    # if rho solves for S then rho + t has the same residual for e^{-2t} S
    g = make_grid(16)
    rho0, S = manufactured(g)
    out = solve_nirenberg(S, SolveConfig(L=16, tol=1e-9))
    t = 0.37
    shifted = ScalarField(g, out.rho.samples + t)
    S_shift = ScalarField(g, np.exp(-2.0 * t) * S.samples)
    assert nirenberg_residual(shifted, S_shift) == pytest.approx(
        nirenberg_residual(out.rho, S), abs=1e-11)


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(tol=-1.0)
    with pytest.raises(ValueError):
        SolveConfig(max_iter=0)
    with pytest.raises(ValueError):
        SolveConfig(damping=0.0)


# ---------------------------------------------------------------------------
# build_solution
# ---------------------------------------------------------------------------

def test_build_constant_case():
    g = make_grid(8)
    S = constant_field(g, 0.5)
    res = build_solution(S, SolveConfig(L=8, tol=1e-10))
    # rho = ln 2 gives lambda = 1/8 < 1/2, already regular at tau = 1
    assert res.tau == pytest.approx(1.0)
    assert res.achieved_C_dev <= 1e-6
    assert res.metric_dev <= 1e-6
    target = 0.5 * (1.0 - 0.5 / (2.0 * res.tau ** 2))
    for rep in res.reports[::19]:
        assert rep.christoffel_mean == pytest.approx(target, abs=1e-9)


def test_build_round_metric_needs_dilation():
    g = make_grid(8)
    res = build_solution(constant_field(g, 2.0), SolveConfig(L=8, tol=1e-10))
    assert res.tau > 1.0
    assert res.achieved_C_dev <= 1e-6 and res.metric_dev <= 1e-6


def test_build_nonconstant_case():
    g = make_grid(16)
    _, S = manufactured(g)
    res = build_solution(S, SolveConfig(L=16, tol=1e-9))
    assert res.achieved_C_dev <= 1e-6
    assert res.metric_dev <= 1e-6
    for rep in res.reports:
        assert rep.canonical


def test_build_requires_convergence():
    g = make_grid(12)
    S = field_from_function(g, lambda p: 2.0 + p[2])
    with pytest.raises(SolveFailed):
        build_solution(S, SolveConfig(L=12, tol=1e-10, max_iter=10))


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

def test_residuals_csv(tmp_path):
    path = tmp_path / "residuals.csv"
    write_residuals_csv(path, [1.0, 0.25, 1e-12])
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,residual"
    assert lines[2] == "1,0.25"


def test_kw_csv(tmp_path):
    path = tmp_path / "kw.csv"
    write_kw_csv(path, np.array([0.0, 0.0, -2.0 * np.pi / 3.0]))
    lines = path.read_text().splitlines()
    assert lines[0] == "i,value"
    assert lines[3].startswith("3,-2.0943951")
