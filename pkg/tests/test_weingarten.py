import numpy as np
import pytest

from horolab.errors import DomainViolation
from horolab.harmonics import make_grid
from horolab.sphere import (
    Polynomial,
    SpherePoint,
    constant_factor,
    jet2,
    polynomial_factor,
)
from horolab.horospherical import curvature_report
from horolab.weingarten import (
    ConeKind,
    ConeSpec,
    WeingartenFunctional,
    cone_contains,
    sigma_k,
    transform_T,
    umbilicity_diagnostic,
    weingarten_value,
)

rng = np.random.default_rng(31)


def omega_sample(n):
    # componentwise below 1, spread over both signs
    return 1.0 - np.abs(rng.normal(size=n)) - 0.01


def test_transform_examples():
    assert np.allclose(transform_T(np.zeros(4)), -1.0)
    # at the ln 2 sphere's kappa: T = 1/4 = 2 lambda; the signed contact
    # radius is its negative
    assert np.allclose(transform_T(np.array([-5.0 / 3.0, -5.0 / 3.0])), 0.25)


def test_transform_involution():
    for _ in range(1000):
        x = omega_sample(rng.integers(2, 5))
        assert np.max(np.abs(transform_T(transform_T(x)) - x)) <= 1e-12


def test_transform_domain():
    with pytest.raises(DomainViolation):
        transform_T(np.array([0.5, 1.0]))


def test_sigma_k_examples():
    assert sigma_k([1.0, 2.0, 3.0], 1) == pytest.approx(6.0)
    assert sigma_k([1.0, 2.0, 3.0], 2) == pytest.approx(11.0)
    x = 0.7
    assert sigma_k([x] * 5, 5) == pytest.approx(x ** 5)
    with pytest.raises(ValueError):
        sigma_k([1.0, 2.0], 3)


def test_cone_examples():
    for k in (1, 2, 3):
        assert cone_contains(ConeSpec(ConeKind.GAMMA_K, 3, k), np.ones(3))
    v = np.array([-1.0, 3.0, 3.0])
    assert cone_contains(ConeSpec(ConeKind.GAMMA_K, 3, 2), v)
    assert not cone_contains(ConeSpec(ConeKind.GAMMA_K, 3, 3), v)
    assert not cone_contains(ConeSpec(ConeKind.GAMMA_1, 3), np.array([-2.0, 0.5, 0.5]))
    assert cone_contains(ConeSpec(ConeKind.GAMMA_N, 2), np.array([0.1, 2.0]))
    assert not cone_contains(ConeSpec(ConeKind.GAMMA_N, 2), np.array([-0.1, 2.0]))


def test_gamma_k_matches_component_by_path_sampling():
    # brute-force check of the nested-positivity test: walk a straight path
    # from the positive cone; membership must coincide with S_k staying
    # positive along the whole path
    cone = ConeSpec(ConeKind.GAMMA_K, 3, 2)
    for _ in range(200):
        x = rng.normal(size=3) * 2.0
        inside = cone_contains(cone, x)
        start = np.ones(3)
        ts = np.linspace(0.0, 1.0, 400)
        path_ok = all(
            sigma_k(start + t * (x - start), 2) > 0 for t in ts)
        if inside:
            assert path_ok or cone_contains(cone, x)  # straight path may exit
        if path_ok:
            assert inside


def test_weingarten_sphere_value():
    wf = WeingartenFunctional(n=2, k=1)
    kap = np.array([-5.0 / 3.0, -5.0 / 3.0])
    assert weingarten_value(wf, kap) == pytest.approx(0.25, abs=1e-12)


def test_base_homogeneity():
    for k in (1, 2, 3):
        wf = WeingartenFunctional(n=3, k=k)
        for _ in range(100):
            lam = np.abs(rng.normal(size=3)) + 0.05
            s = float(np.exp(rng.normal()))
            assert wf.base_value(s * lam) == pytest.approx(
                s * wf.base_value(lam), rel=1e-10)


def test_base_symmetry():
    wf = WeingartenFunctional(n=3, k=2)
    for _ in range(50):
        lam = np.abs(rng.normal(size=3)) + 0.05
        perm = rng.permutation(3)
        assert wf.base_value(lam[perm]) == pytest.approx(wf.base_value(lam), rel=1e-12)


def test_induced_homogeneity_law():
    # s W(kappa) = W(T(s T(kappa)))
    for k in (1, 2):
        wf = WeingartenFunctional(n=2, k=k)
        for _ in range(100):
            lam = rng.uniform(0.05, 0.45, size=2)
            kap = transform_T(2.0 * lam)
            s = rng.uniform(0.1, 1.0 / (2.0 * np.max(lam)) - 1e-6)
            lhs = s * weingarten_value(wf, kap)
            rhs = weingarten_value(wf, transform_T(s * transform_T(kap)))
            assert rhs == pytest.approx(lhs, abs=1e-10, rel=1e-10)


def test_boundary_limit_probe():
    # along a ray approaching the cone boundary the induced value vanishes
    wf = WeingartenFunctional(n=2, k=2)
    lam0 = np.array([0.3, 0.2])
    lamb = np.array([0.3, 0.0])
    for t in (1.0 - 1e-12,):
        lam = (1.0 - t) * lam0 + t * lamb
        lam[1] = max(lam[1], 1e-13)
        kap = transform_T(2.0 * lam)
        assert abs(weingarten_value(wf, kap)) <= 1e-6


def test_monotonicity_inside_cone():
    h = 1e-6
    for k in (1, 2, 3):
        wf = WeingartenFunctional(n=3, k=k)
        for _ in range(100):
            lam = np.abs(rng.normal(size=3)) + 0.1
            for i in range(3):
                e = np.zeros(3)
                e[i] = h
                d = (wf.base_value(lam + e) - wf.base_value(lam - e)) / (2 * h)
                assert d > 0.0


def test_dictionary_consistency_with_reports():
    poly = Polynomial(3, {(1, 0, 0): 0.07, (0, 1, 1): -0.1, (0, 0, 0): 1.0})
    spec = polynomial_factor(poly)
    for _ in range(20):
        v = rng.normal(size=3)
        x = SpherePoint(v / np.linalg.norm(v))
        rep = curvature_report(jet2(spec, x))
        assert np.max(np.abs(0.5 * transform_T(rep.kappas) - rep.lambdas)) <= 1e-9


def sweep_reports(spec, grid):
    return [curvature_report(jet2(spec, SpherePoint(p))) for p in grid.points()]


def test_umbilicity_round_sphere():
    g = make_grid(6)
    wf = WeingartenFunctional(n=2, k=1)
    diag = umbilicity_diagnostic(sweep_reports(constant_factor(np.log(2.0)), g), wf)
    assert diag["max_spread"] <= 1e-10
    assert diag["wein_const_dev"] <= 1e-10


def test_umbilicity_perturbation_slope():
    # rho = c + eps * (x3^2 - 1/3): spread grows linearly in eps
    g = make_grid(6)
    wf = WeingartenFunctional(n=2, k=1)
    spreads = []
    for eps in (0.005, 0.01, 0.02):
        poly = Polynomial(3, {(0, 0, 0): np.log(2.0) - eps / 3.0, (0, 0, 2): eps})
        diag = umbilicity_diagnostic(sweep_reports(polynomial_factor(poly), g), wf)
        spreads.append(diag["max_spread"])
    assert spreads[0] > 0.0
    assert spreads[1] / spreads[0] == pytest.approx(2.0, rel=0.25)
    assert spreads[2] / spreads[1] == pytest.approx(2.0, rel=0.25)


def test_sigma_of_signed_contact_constant_on_spheres():
    # delta == -1/4 at c = ln 2; S_2(delta) = 1/16, S_1(delta) = -1/2 (sign kept)
    g = make_grid(6)
    reps = sweep_reports(constant_factor(np.log(2.0)), g)
    s2 = [sigma_k(r.signed_contact, 2) for r in reps]
    s1 = [sigma_k(r.signed_contact, 1) for r in reps]
    assert np.allclose(s2, 1.0 / 16.0, atol=1e-10)
    assert np.allclose(s1, -0.5, atol=1e-10)
