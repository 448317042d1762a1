"""The correspondence core between conformal factors on S^n and
horospherically convex hypersurfaces in hyperbolic space.

A conformal factor rho gives the light-cone map psi = e^rho (1, x) and,
through the representation formula, the hypersurface phi with unit normal
eta = psi - phi.  Curvature data, the parallel flow, regularity tests and
the Schouten-eigenvalue inversion all live here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import FlowNotRegular, NotStronglyConvex, SingularPoint, TauNotFound, ZeroEigenvalue
from .lorentz import lorentz_dot
from .sphere import (
    ConformalFactorSpec,
    Jet2,
    SpherePoint,
    SymBilinear,
    chart_point,
    jet2,
    schouten,
    schouten_eigen,
    sym_eigh,
)

FRAME_TOL = 1e-9
UMBILIC_SPREAD = 1e-7
MAP_FD_STEP = 1e-5


@dataclass(frozen=True)
class SurfaceFrame:
    """The triple (phi, eta, psi) over a sphere point x, psi = phi + eta."""

    x: SpherePoint
    phi: np.ndarray
    eta: np.ndarray
    psi: np.ndarray

    def check(self, tol: float = FRAME_TOL) -> None:
        if abs(lorentz_dot(self.phi, self.phi) + 1.0) > tol:
            raise ValueError("phi is not on the hyperboloid")
        if abs(lorentz_dot(self.eta, self.eta) - 1.0) > tol:
            raise ValueError("eta is not de Sitter")
        if abs(lorentz_dot(self.phi, self.eta)) > tol:
            raise ValueError("eta is not normal to phi")
        if np.max(np.abs(self.psi - self.phi - self.eta)) > tol:
            raise ValueError("psi != phi + eta")
        if self.psi[0] <= 0:
            raise ValueError("psi must lie on the future light cone")
        if np.max(np.abs(self.psi[1:] / self.psi[0] - self.x.coords)) > tol:
            raise ValueError("hyperbolic Gauss map is not the identity chart")

    @property
    def support_rho(self) -> float:
        return float(np.log(self.psi[0]))


def light_cone_map(rho: float, x: SpherePoint) -> np.ndarray:
    """psi = e^rho (1, x) on the future light cone."""
    return np.exp(rho) * np.concatenate([[1.0], x.coords])


def represent(j: Jet2, x: Optional[SpherePoint] = None) -> SurfaceFrame:
    """Representation formula: hypersurface point from the 2-jet of rho.

    The formula is total; regularity of the resulting map is a separate
    check (`regularity`).
    """
    if x is None:
        x = j.point
    er = np.exp(j.value)
    grad = j.grad_ambient
    one_x = np.concatenate([[1.0], x.coords])
    xi = np.concatenate([[0.0], -x.coords + grad])
    f = 0.5 * er * (1.0 + (1.0 + j.grad_norm_sq) / (er * er))
    phi = f * one_x + xi / er
    psi = er * one_x
    return SurfaceFrame(x, phi, psi - phi, psi)


def fundamental_forms(j: Jet2):
    """First and second fundamental forms of phi as frame matrices."""
    n = j.n
    g = np.exp(2.0 * j.value) * np.eye(n)
    sch = schouten(j).matrix
    a = g - 2.0 * sch
    first = 0.25 * np.exp(-2.0 * j.value) * (a @ a)
    second = first - 0.5 * g + sch
    return (SymBilinear(j.point, j.frame, first),
            SymBilinear(j.point, j.frame, second))


@dataclass(frozen=True)
class RegularityInfo:
    regular: bool
    min_eig: float


def regularity_threshold(rho: float) -> float:
    # scale-aware cutoff; the A = g - 2 Sch test keeps the sign that
    # squaring A into the first fundamental form would lose
    return 1e-8 * (1.0 + np.exp(2.0 * rho))


def regularity(j: Jet2) -> RegularityInfo:
    """Positive definiteness of g - 2 Sch_g (canonical-orientation test)."""
    n = j.n
    a = np.exp(2.0 * j.value) * np.eye(n) - 2.0 * schouten(j).matrix
    min_eig = float(np.min(sym_eigh(a)))
    return RegularityInfo(min_eig > regularity_threshold(j.value), min_eig)


@dataclass(frozen=True)
class CurvatureReport:
    """Per-point curvature dictionary, ordered so lambdas are ascending."""

    point: SpherePoint
    kappas: np.ndarray          # principal curvatures, descending
    radii: np.ndarray           # R_i = 1/(1 - kappa_i)
    lambdas: np.ndarray         # Schouten eigenvalues, 1/2 - R_i
    signed_contact: np.ndarray  # delta_i = (1 + kappa_i)/(1 - kappa_i)
    dilation: np.ndarray        # |delta_i|
    dilation_valid: np.ndarray  # kappa_i != -1
    christoffel_mean: float     # C = mean of R_i
    scalar: float               # S(g) = n(n-1) - 2(n-1) sum R_i
    sigma: np.ndarray           # sigma_k(lambda), k = 1..n
    horospherically_convex: bool
    canonical: bool
    strongly_H_convex: bool
    umbilic: bool
    direction_match: Optional[float]  # min |cos| of paired eigendirections
    principal_directions: np.ndarray  # frame components, columns follow kappas


def _elementary_symmetric(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    e = np.zeros(n + 1)
    e[0] = 1.0
    for v in values:
        e[1:] = e[1:] + v * e[:-1].copy()
    return e[1:]


def curvature_report(j: Jet2, n: Optional[int] = None) -> CurvatureReport:
    """Extract all curvature data at a regular point; raises SingularPoint."""
    if n is None:
        n = j.n
    reg = regularity(j)
    if not reg.regular:
        raise SingularPoint(
            f"first fundamental form degenerates (min eig of g - 2 Sch = {reg.min_eig:.3e})",
            min_eig=reg.min_eig)
    first, second = fundamental_forms(j)
    kap, vecs = scipy.linalg.eigh(second.matrix, first.matrix)
    order = np.argsort(-kap)          # descending kappa <-> ascending lambda
    kap = kap[order]
    vecs = vecs[:, order]
    radii = 1.0 / (1.0 - kap)
    lambdas = 0.5 - radii
    delta = (1.0 + kap) / (1.0 - kap)
    valid = np.abs(kap + 1.0) > 1e-12
    spread = float(kap[0] - kap[-1])
    umbilic = spread < UMBILIC_SPREAD

    match = None
    if not umbilic:
        _, sch_vecs = sym_eigh(schouten(j).matrix, with_vectors=True)
        # pair principal directions with Schouten eigendirections by
        # greatest |cos|; both live in the same g0-frame coordinates
        cosines = []
        for k in range(n):
            v = vecs[:, k] / np.linalg.norm(vecs[:, k])
            best = float(np.max(np.abs(sch_vecs.T @ v)))
            cosines.append(best)
        match = float(min(cosines))

    return CurvatureReport(
        point=j.point,
        kappas=kap,
        radii=radii,
        lambdas=lambdas,
        signed_contact=delta,
        dilation=np.abs(delta),
        dilation_valid=valid,
        christoffel_mean=float(np.mean(radii)),
        scalar=float(n * (n - 1) - 2.0 * (n - 1) * np.sum(radii)),
        sigma=_elementary_symmetric(lambdas),
        horospherically_convex=bool(np.all(kap < 1.0) or np.all(kap > 1.0)),
        canonical=bool(np.all(kap < 1.0)),
        strongly_H_convex=bool(np.all(kap < -1.0)),
        umbilic=umbilic,
        direction_match=match,
        principal_directions=vecs,
    )


def parallel_flow(f: SurfaceFrame, t: float) -> SurfaceFrame:
    """Normal exponential flow: phi_t = e^{-t} phi + sinh(t) psi."""
    phi_t = np.exp(-t) * f.phi + np.sinh(t) * f.psi
    psi_t = np.exp(t) * f.psi
    return SurfaceFrame(f.x, phi_t, psi_t - phi_t, psi_t)


def flowed_kappa(kappa: float, t: float) -> float:
    """Principal-curvature Moebius law under the parallel flow."""
    th = np.tanh(t)
    return (kappa - th) / (1.0 - kappa * th)


def christoffel_flow_mean(C: float, t: float) -> float:
    """Mean curvature-radius flow law C_t = 1/2 - e^{-2t}(1 - 2C)/2."""
    return 0.5 - 0.5 * np.exp(-2.0 * t) * (1.0 - 2.0 * C)


def contact_mean(report: CurvatureReport) -> float:
    """Mean of the contact radii acoth(|kappa_i|) for strongly H-convex points.

    Sign convention: with the canonical orientation (kappa_i < -1) the
    returned mean equals -log(2^n sigma_n(lambda)) / (2n); the identity is
    asserted in that form.
    """
    if not report.strongly_H_convex:
        raise NotStronglyConvex("contact radii need all principal curvatures < -1")
    n = report.kappas.shape[0]
    rho_i = np.arctanh(1.0 / np.abs(report.kappas))  # acoth(|k|) for |k| > 1
    mean = float(np.mean(rho_i))
    sig_n = report.sigma[-1]
    ref = float(np.log(2.0 ** n * sig_n) / (2.0 * n))
    if abs(mean + ref) > 1e-8 * (1.0 + abs(mean)):
        raise AssertionError(f"contact-radius identity violated: {mean} vs -({ref})")
    return mean


# ---------------------------------------------------------------------------
# finite differences of sphere-to-Minkowski maps
# ---------------------------------------------------------------------------

def map_differential(fn: Callable[[np.ndarray], np.ndarray], x: SpherePoint,
                     frame: np.ndarray, h: float = MAP_FD_STEP) -> np.ndarray:
    """Columns d(fn)(e_i) by central differences in the normal chart at x."""
    n = frame.shape[0]
    cols = []
    for i in range(n):
        u = np.zeros(n)
        u[i] = h
        fp = np.asarray(fn(chart_point(x, frame, u)))
        fm = np.asarray(fn(chart_point(x, frame, -u)))
        cols.append((fp - fm) / (2.0 * h))
    return np.column_stack(cols)


def pullback_matrix(d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """Lorentzian pairings <d1_i, d2_j> of two differentials."""
    n = d1.shape[1]
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = lorentz_dot(d1[:, i], d2[:, j])
    return out


# ---------------------------------------------------------------------------
# dilation scan and Schouten inversion
# ---------------------------------------------------------------------------

def find_tau0(spec: ConformalFactorSpec, grid, tau_min: float = 1.0,
              max_doublings: int = 40) -> float:
    """Smallest tau in the geometric scan {tau_min 2^k} making the dilated
    construction regular on every grid node."""
    pts = grid.points()
    rhos = np.empty(pts.shape[0])
    mu_max = np.empty(pts.shape[0])
    for i, p in enumerate(pts):
        jj = jet2(spec, SpherePoint(p))
        rhos[i] = jj.value
        mu_max[i] = float(np.max(sym_eigh(schouten(jj).matrix)))
    tau = tau_min
    for _ in range(max_doublings + 1):
        scale = tau * tau * np.exp(2.0 * rhos)
        min_eig = np.min(scale - 2.0 * mu_max - 1e-8 * (1.0 + scale))
        if min_eig > 0.0:
            return tau
        tau *= 2.0
    lam = np.abs(mu_max) * np.exp(-2.0 * rhos)
    raise TauNotFound(f"no tau <= {tau} certifies regularity",
                      max_abs_lambda=float(np.max(lam)))


def choose_inverse_t(lambdas: np.ndarray, offsets=np.arange(0.0, 8.0, 0.05)) -> float:
    """Smallest dilation exponent t making the inversion well conditioned.

    Needs e^{-2t} lambda_i < 1/2 (regularity) and the flowed curvature
    away from -1, i.e. |4 lam_t / (2 lam_t - 1)| > 0.1.
    """
    lam = np.asarray(lambdas, dtype=float).reshape(-1)
    for t in offsets:
        lt = np.exp(-2.0 * t) * lam
        if np.max(lt) < 0.45 and np.min(np.abs(4.0 * lt / (2.0 * lt - 1.0))) > 0.1:
            return float(t)
    raise FlowNotRegular("no admissible dilation exponent found")


def schouten_inverse(spec: ConformalFactorSpec, x: SpherePoint, t: float,
                     zero_tol: float = 1e-6, check_tol: float = 1e-4) -> np.ndarray:
    """Eigenvalues of the dual metric obtained from the negative Gauss map.

    Returns lambda*_i = 1/lambda_i (ascending in the pairing order of the
    direct eigenvalues), computed through the t-dilated hypersurface and
    finite differences of its orientation-reversed light-cone map.
    """
    j = jet2(spec, x)
    lam = np.asarray(schouten_eigen(schouten(j), j), dtype=float)
    if np.min(np.abs(lam)) < zero_tol:
        raise ZeroEigenvalue(f"Schouten eigenvalue too close to zero: {lam}")
    lam_t = np.exp(-2.0 * t) * lam
    if np.max(lam_t) >= 0.5:
        raise FlowNotRegular(f"dilated eigenvalues not below 1/2: {lam_t}")

    def phi_map(p):
        return represent(jet2(spec, SpherePoint(p)).shifted(t)).phi

    def psi_star_map(p):
        fr = represent(jet2(spec, SpherePoint(p)).shifted(t))
        return fr.phi - fr.eta

    frame = j.frame
    dphi = map_differential(phi_map, x, frame)
    dpsi_star = map_differential(psi_star_map, x, frame)
    first = pullback_matrix(dphi, dphi)
    mixed = pullback_matrix(dphi, dpsi_star)
    second_star = first - 0.5 * (mixed + mixed.T)
    kap_star, _ = scipy.linalg.eigh(second_star, first)
    if np.min(np.abs(1.0 - kap_star)) < 0.05:
        raise FlowNotRegular("flowed curvature hits the dual regularity bound")
    lam_t_star = 0.5 - 1.0 / (1.0 - kap_star)
    lam_star = np.exp(-2.0 * t) * lam_t_star    # eigenvalues of e^{2t} g_t*
    # pair with the direct eigenvalues: 4 lam_star = 1/lam is decreasing on
    # each sign branch, so sort by its reciprocal
    lam_star = np.array(sorted(lam_star, key=lambda v: 1.0 / (4.0 * v)))
    prods = lam * lam_star
    if np.max(np.abs(prods - 0.25)) > check_tol:
        raise AssertionError(f"inversion identity violated: products {prods}")
    return 4.0 * lam_star


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ("theta", "phi", "kappa_min", "kappa_max", "R_mean",
                  "lambda_min", "lambda_max", "S", "C", "regular")


def write_report_csv(path, grid, reports) -> None:
    """Per-node curvature summary; node order is colatitude-major like the grid."""
    th, ph = grid.node_angles()
    lines = [",".join(REPORT_COLUMNS)]
    for t, p, rep in zip(th, ph, reports):
        row = [float(t), float(p), float(rep.kappas[-1]), float(rep.kappas[0]),
               float(rep.christoffel_mean), float(rep.lambdas[0]),
               float(rep.lambdas[-1]), float(rep.scalar),
               float(rep.christoffel_mean)]
        lines.append(",".join(repr(v) for v in row) + ",1")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def ball_vertex(phi: np.ndarray) -> np.ndarray:
    """Poincare-ball coordinates of a hyperboloid point."""
    return phi[1:] / (1.0 + phi[0])


def write_obj(path, grid, frames) -> None:
    """Poincare-ball mesh: one vertex per node, quads of the lat-long grid
    split into triangles, longitude seam closed."""
    nt, np_ = grid.ntheta, grid.nphi
    lines = ["# poincare ball mesh"]
    for f in frames:
        v = ball_vertex(f.phi)
        lines.append("v " + " ".join(repr(float(c)) for c in v))
    for i in range(nt - 1):
        for j in range(np_):
            a = i * np_ + j + 1
            b = i * np_ + (j + 1) % np_ + 1
            c = (i + 1) * np_ + (j + 1) % np_ + 1
            d = (i + 1) * np_ + j + 1
            lines.append(f"f {a} {b} {c}")
            lines.append(f"f {a} {c} {d}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
