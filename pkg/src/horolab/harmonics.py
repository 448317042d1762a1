"""Quadrature grid and real spherical-harmonic transform on S^2.

The grid is Gauss-Legendre in colatitude (L+1 nodes) times uniform in
longitude (2L+2 nodes), with product weights summing to 4*pi.  Analysis
and synthesis use the orthonormal real harmonic basis up to degree L,
indexed by idx(l, m) = l^2 + l + m.

Normalized associated Legendre functions and their colatitude derivatives
are generated by stable three-term recurrences, so fields backed by a
coefficient vector also expose analytic 2-jets (used by the solver and the
curvature pipeline).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .sphere import AmbientJet, ConformalFactorSpec, Jet2, JetMode, SpherePoint


def _legendre_block(L: int, m: int, ct: np.ndarray, st: np.ndarray):
    """Normalized P-bar_{l m}(cos theta) and d/dtheta, for l = m..L.

    Returns arrays of shape (L - m + 1, npts).
    """
    npts = ct.shape[0]
    nl = L - m + 1
    P = np.zeros((nl, npts))
    # P-bar_mm by the sectoral recurrence
    pmm = np.full(npts, 1.0 / np.sqrt(4.0 * np.pi))
    for k in range(1, m + 1):
        pmm = np.sqrt((2 * k + 1) / (2.0 * k)) * st * pmm
    P[0] = pmm
    if nl > 1:
        P[1] = np.sqrt(2 * m + 3.0) * ct * pmm
    for l in range(m + 2, L + 1):
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
        b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
        P[l - m] = a * (ct * P[l - m - 1] - b * P[l - m - 2])
    # d/dtheta from the degree-lowering relation; st > 0 off the poles
    dP = np.zeros_like(P)
    for l in range(m, L + 1):
        acc = l * ct * P[l - m]
        if l > m:
            c = np.sqrt((2.0 * l + 1.0) * (l * l - m * m) / (2.0 * l - 1.0))
            acc = acc - c * P[l - m - 1]
        dP[l - m] = acc / st
    return P, dP


def basis_size(L: int) -> int:
    return (L + 1) * (L + 1)


def basis_index(l: int, m: int) -> int:
    return l * l + l + m


def degree_of_index(L: int) -> np.ndarray:
    """Array mapping basis index -> degree l."""
    out = np.zeros(basis_size(L), dtype=int)
    for l in range(L + 1):
        out[l * l:(l + 1) * (l + 1)] = l
    return out


def basis_row(L: int, theta: float, phi: float, derivs: bool = False):
    """Real harmonic basis values at one point; optionally all derivatives.

    With derivs=True returns (Y, Yt, Yp, Ytt, Ytp, Ypp) where t is theta
    and p is phi.  Points must avoid the poles.
    """
    ct = np.array([np.cos(theta)])
    st = np.array([np.sin(theta)])
    B = basis_size(L)
    Y = np.zeros(B)
    out = [Y]
    if derivs:
        Yt, Yp, Ytt, Ytp, Ypp = (np.zeros(B) for _ in range(5))
        out = [Y, Yt, Yp, Ytt, Ytp, Ypp]
    for m in range(L + 1):
        P, dP = _legendre_block(L, m, ct, st)
        ls = np.arange(m, L + 1)
        if derivs:
            # theta second derivative from the associated Legendre ODE
            ddP = (-ct / st * dP
                   - (ls[:, None] * (ls[:, None] + 1.0) - m * m / (st * st)) * P)
        if m == 0:
            idx = ls * ls + ls
            Y[idx] = P[:, 0]
            if derivs:
                Yt[idx] = dP[:, 0]
                Ytt[idx] = ddP[:, 0]
        else:
            c = np.sqrt(2.0) * np.cos(m * phi)
            s = np.sqrt(2.0) * np.sin(m * phi)
            ic = ls * ls + ls + m
            isn = ls * ls + ls - m
            Y[ic] = c * P[:, 0]
            Y[isn] = s * P[:, 0]
            if derivs:
                Yt[ic] = c * dP[:, 0]
                Yt[isn] = s * dP[:, 0]
                Yp[ic] = -m * s * P[:, 0]
                Yp[isn] = m * c * P[:, 0]
                Ytt[ic] = c * ddP[:, 0]
                Ytt[isn] = s * ddP[:, 0]
                Ytp[ic] = -m * s * dP[:, 0]
                Ytp[isn] = m * c * dP[:, 0]
                Ypp[ic] = -m * m * c * P[:, 0]
                Ypp[isn] = -m * m * s * P[:, 0]
    return tuple(out) if derivs else Y


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre x uniform-longitude product grid on S^2."""

    L: int
    thetas: np.ndarray      # (L+1,) colatitudes, increasing
    phis: np.ndarray        # (2L+2,) longitudes in [0, 2 pi)
    theta_weights: np.ndarray
    phi_weight: float

    @property
    def ntheta(self) -> int:
        return self.thetas.shape[0]

    @property
    def nphi(self) -> int:
        return self.phis.shape[0]

    @property
    def nnodes(self) -> int:
        return self.ntheta * self.nphi

    @property
    def weights(self) -> np.ndarray:
        """Flat node weights, colatitude-major; sum = 4 pi."""
        return np.repeat(self.theta_weights, self.nphi) * self.phi_weight

    def node_angles(self):
        """Flat (theta, phi) arrays in colatitude-major order."""
        th = np.repeat(self.thetas, self.nphi)
        ph = np.tile(self.phis, self.ntheta)
        return th, ph

    def points(self) -> np.ndarray:
        th, ph = self.node_angles()
        st = np.sin(th)
        return np.column_stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)])


def make_grid(L: int) -> SphereGrid:
    if L < 4:
        raise ValueError("grid degree must be at least 4")
    xs, ws = np.polynomial.legendre.leggauss(L + 1)
    order = np.argsort(-xs)  # increasing colatitude
    thetas = np.arccos(xs[order])
    tw = ws[order]
    nphi = 2 * L + 2
    phis = 2.0 * np.pi * np.arange(nphi) / nphi
    return SphereGrid(L, thetas, phis, tw, 2.0 * np.pi / nphi)


@dataclass
class ScalarField:
    """Samples on a SphereGrid, with lazily computed harmonic coefficients."""

    grid: SphereGrid
    samples: np.ndarray
    _coeffs: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).reshape(-1)
        if s.shape[0] != self.grid.nnodes:
            raise ValueError("sample count does not match grid")
        self.samples = s

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = analyze(self)
        return self._coeffs


def field_from_function(grid: SphereGrid, fn) -> ScalarField:
    pts = grid.points()
    return ScalarField(grid, np.array([float(fn(p)) for p in pts]))


def field_from_coeffs(grid: SphereGrid, coeffs: np.ndarray) -> ScalarField:
    f = synthesize(grid, coeffs)
    f._coeffs = np.asarray(coeffs, dtype=float).copy()
    return f


def _phi_tables(grid: SphereGrid):
    m = np.arange(1, grid.L + 1)
    ang = np.outer(grid.phis, m)
    return np.cos(ang), np.sin(ang)  # (nphi, L)


def analyze(fld: ScalarField) -> np.ndarray:
    """Project onto the real harmonic basis by grid quadrature.

    Exact for band-limited fields of degree <= L.
    """
    grid = fld.grid
    L = grid.L
    f = fld.samples.reshape(grid.ntheta, grid.nphi)
    cosT, sinT = _phi_tables(grid)
    # longitude sums, weighted
    a0 = f.sum(axis=1) * grid.phi_weight                 # (ntheta,)
    ac = (f @ cosT) * grid.phi_weight                    # (ntheta, L)
    as_ = (f @ sinT) * grid.phi_weight
    ct, st = np.cos(grid.thetas), np.sin(grid.thetas)
    w = grid.theta_weights
    coeffs = np.zeros(basis_size(L))
    for m in range(L + 1):
        P, _ = _legendre_block(L, m, ct, st)
        ls = np.arange(m, L + 1)
        if m == 0:
            coeffs[ls * ls + ls] = P @ (w * a0)
        else:
            r2 = np.sqrt(2.0)
            coeffs[ls * ls + ls + m] = r2 * (P @ (w * ac[:, m - 1]))
            coeffs[ls * ls + ls - m] = r2 * (P @ (w * as_[:, m - 1]))
    return coeffs


def synthesize(grid: SphereGrid, coeffs: np.ndarray) -> ScalarField:
    coeffs = np.asarray(coeffs, dtype=float)
    L = grid.L
    if coeffs.shape[0] != basis_size(L):
        raise ValueError("coefficient vector does not match grid degree")
    ct, st = np.cos(grid.thetas), np.sin(grid.thetas)
    cosT, sinT = _phi_tables(grid)
    f = np.zeros((grid.ntheta, grid.nphi))
    for m in range(L + 1):
        P, _ = _legendre_block(L, m, ct, st)
        ls = np.arange(m, L + 1)
        if m == 0:
            f += np.outer(coeffs[ls * ls + ls] @ P, np.ones(grid.nphi))
        else:
            r2 = np.sqrt(2.0)
            gc = coeffs[ls * ls + ls + m] @ P
            gs = coeffs[ls * ls + ls - m] @ P
            f += r2 * (np.outer(gc, cosT[:, m - 1]) + np.outer(gs, sinT[:, m - 1]))
    return ScalarField(grid, f.reshape(-1))


def integrate(fld: ScalarField, weight: Optional[ScalarField] = None) -> float:
    w = fld.grid.weights
    vals = fld.samples if weight is None else fld.samples * weight.samples
    # fixed summation order for reproducibility
    return float(np.dot(w, vals))


def laplacian_coeffs(coeffs: np.ndarray, L: int) -> np.ndarray:
    ls = degree_of_index(L)
    return -ls * (ls + 1.0) * np.asarray(coeffs, dtype=float)


def angles_of_point(p: np.ndarray):
    p = np.asarray(p, dtype=float)
    theta = float(np.arccos(np.clip(p[2], -1.0, 1.0)))
    phi = float(np.arctan2(p[1], p[0])) % (2.0 * np.pi)
    return theta, phi


def evaluate_coeffs(coeffs: np.ndarray, L: int, p: np.ndarray) -> float:
    theta, phi = angles_of_point(p)
    return float(basis_row(L, theta, phi) @ coeffs)


def spherical_frame(theta: float, phi: float) -> np.ndarray:
    """Rows are the unit vectors e_theta, e_phi at (theta, phi)."""
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    return np.array([[ct * cp, ct * sp, -st],
                     [-sp, cp, 0.0]])


def coeff_jet(coeffs: np.ndarray, L: int, p: np.ndarray) -> Jet2:
    """Analytic 2-jet of the synthesized field at an off-pole point."""
    theta, phi = angles_of_point(p)
    st = np.sin(theta)
    if st < 1e-12:
        raise ValueError("jet evaluation at a pole is not supported")
    ct = np.cos(theta)
    Y, Yt, Yp, Ytt, Ytp, Ypp = basis_row(L, theta, phi, derivs=True)
    c = np.asarray(coeffs, dtype=float)
    v = float(Y @ c)
    ft, fp = float(Yt @ c), float(Yp @ c)
    ftt, ftp, fpp = float(Ytt @ c), float(Ytp @ c), float(Ypp @ c)
    grad = np.array([ft, fp / st])
    hess = np.array([
        [ftt, (ftp - ct / st * fp) / st],
        [(ftp - ct / st * fp) / st, fpp / (st * st) + ct / st * ft],
    ])
    point = SpherePoint(np.array([st * np.cos(phi), st * np.sin(phi), ct]))
    return Jet2(point, spherical_frame(theta, phi), v, grad, hess)


def field_factor(fld: ScalarField, mode: JetMode = JetMode.ANALYTIC) -> ConformalFactorSpec:
    """ConformalFactorSpec backed by the field's harmonic coefficients."""
    coeffs = fld.coeffs
    L = fld.grid.L

    def ev(x):
        return evaluate_coeffs(coeffs, L, x)

    def jev(x: SpherePoint) -> Jet2:
        return coeff_jet(coeffs, L, x.coords)

    return ConformalFactorSpec(ev, jet_evaluator=jev, mode=mode, label="field")


# ---------------------------------------------------------------------------
# CSV import/export: header theta,phi,value, colatitude-major row order
# ---------------------------------------------------------------------------

def write_field_csv(path, fld: ScalarField) -> None:
    th, ph = fld.grid.node_angles()
    with open(path, "w") as fh:
        fh.write("theta,phi,value\n")
        for t, p, v in zip(th, ph, fld.samples):
            fh.write(f"{float(t)!r},{float(p)!r},{float(v)!r}\n")


def read_field_csv(path) -> ScalarField:
    try:
        raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except Exception as exc:
        raise ConfigError(f"cannot parse field CSV {path}: {exc}") from exc
    if raw.shape[1] != 3:
        raise ConfigError(f"field CSV {path} must have columns theta,phi,value")
    thetas = np.unique(raw[:, 0])
    ntheta = thetas.shape[0]
    L = ntheta - 1
    if L < 4:
        raise ConfigError(f"field CSV {path} has too few colatitude rings")
    grid = make_grid(L)
    th, ph = grid.node_angles()
    if raw.shape[0] != grid.nnodes:
        raise ConfigError(f"field CSV {path} node count {raw.shape[0]} does not "
                          f"match degree-{L} grid ({grid.nnodes})")
    if (np.max(np.abs(raw[:, 0] - th)) > 1e-9
            or np.max(np.abs(raw[:, 1] - ph)) > 1e-9):
        raise ConfigError(f"field CSV {path} nodes are not the degree-{L} "
                          "Gauss-Legendre grid in colatitude-major order")
    return ScalarField(grid, raw[:, 2])
