"""Pointwise calculus on the round sphere (S^n, g0).

Provides 2-jets (value, gradient, covariant Hessian) of conformal factors,
either from an analytic ambient extension or by finite differences in a
normal stereographic chart, together with the Laplacian, scalar curvature
and Schouten tensor of the conformal metric g = e^{2 rho} g0.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# Finite-difference steps in the rescaled chart (chart metric = Id at center).
FD_STEP_GRAD = 1e-5
FD_STEP_HESS = 1e-3

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SpherePoint:
    """A unit vector in R^{n+1}."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        nrm = np.linalg.norm(c)
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"point is off the sphere by {abs(nrm - 1.0):.3e}")
        # renormalize so downstream invariants hold to 1e-12
        object.__setattr__(self, "coords", c / nrm)

    @property
    def n(self) -> int:
        return self.coords.shape[0] - 1


def sphere_point(*coords) -> SpherePoint:
    if len(coords) == 1:
        return SpherePoint(np.asarray(coords[0], dtype=float))
    return SpherePoint(np.asarray(coords, dtype=float))


@dataclass(frozen=True)
class TangentVec:
    base: SpherePoint
    vec: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float)
        if abs(float(np.dot(v, self.base.coords))) > 1e-10 * max(1.0, np.linalg.norm(v)):
            raise ValueError("vector is not tangent to the sphere at its base point")
        object.__setattr__(self, "vec", v)


def tangent_frame(x: SpherePoint) -> np.ndarray:
    """Deterministic g0-orthonormal tangent frame at x, shape (n, n+1).

    Axes are taken in order of increasing |x_k| (lowest index breaks ties)
    and Gram-Schmidt is run against x and the previously accepted vectors.
    """
    c = x.coords
    n1 = c.shape[0]
    order = sorted(range(n1), key=lambda k: (abs(c[k]), k))
    frame = []
    for k in order:
        v = np.zeros(n1)
        v[k] = 1.0
        v = v - np.dot(v, c) * c
        for e in frame:
            v = v - np.dot(v, e) * e
        nrm = np.linalg.norm(v)
        if nrm < 1e-8:
            continue
        frame.append(v / nrm)
        if len(frame) == n1 - 1:
            break
    return np.array(frame)


@dataclass(frozen=True)
class Jet2:
    """2-jet of a function at a sphere point, in a stored orthonormal frame.

    grad and hess are components in the rows of `frame` (shape (n, n+1)).
    """

    point: SpherePoint
    frame: np.ndarray
    value: float
    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.hess, dtype=float)
        if np.max(np.abs(h - h.T)) > 1e-10 * max(1.0, np.max(np.abs(h))):
            raise ValueError("Hessian must be symmetric")
        object.__setattr__(self, "hess", 0.5 * (h + h.T))
        object.__setattr__(self, "grad", np.asarray(self.grad, dtype=float))

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    @property
    def grad_norm_sq(self) -> float:
        return float(np.dot(self.grad, self.grad))

    @property
    def grad_ambient(self) -> np.ndarray:
        return self.frame.T @ self.grad

    def shifted(self, c: float) -> "Jet2":
        """Jet of rho + c (same derivatives)."""
        return Jet2(self.point, self.frame, self.value + c, self.grad, self.hess)


class JetMode(enum.Enum):
    ANALYTIC = "Analytic"
    FINITE_DIFFERENCE = "FiniteDifference"


# ---------------------------------------------------------------------------
# ambient extensions (analytic jets)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmbientJet:
    """Value, gradient and Hessian of an ambient extension F at a point of R^{n+1}."""

    value: float
    grad: np.ndarray
    hess: np.ndarray


@dataclass(frozen=True)
class Polynomial:
    """Multivariate polynomial sum_t c_t * x^t over n+1 ambient variables.

    terms maps exponent tuples to coefficients.
    """

    nvars: int
    terms: dict

    def __call__(self, x: np.ndarray) -> float:
        return self.ambient_jet(x).value

    def ambient_jet(self, x: np.ndarray) -> AmbientJet:
        x = np.asarray(x, dtype=float)
        val = 0.0
        grad = np.zeros(self.nvars)
        hess = np.zeros((self.nvars, self.nvars))
        for expo, c in self.terms.items():
            powers = [x[i] ** e for i, e in enumerate(expo)]
            mono = np.prod(powers)
            val += c * mono
            for i, ei in enumerate(expo):
                if ei == 0:
                    continue
                gi = c * ei * x[i] ** (ei - 1)
                for k, ek in enumerate(expo):
                    if k != i:
                        gi *= x[k] ** ek
                grad[i] += gi
                for j, ej in enumerate(expo):
                    if j == i:
                        if ei >= 2:
                            hii = c * ei * (ei - 1) * x[i] ** (ei - 2)
                            for k, ek in enumerate(expo):
                                if k != i:
                                    hii *= x[k] ** ek
                            hess[i, i] += hii
                    elif ej > 0 and j > i:
                        hij = c * ei * ej * x[i] ** (ei - 1) * x[j] ** (ej - 1)
                        for k, ek in enumerate(expo):
                            if k != i and k != j:
                                hij *= x[k] ** ek
                        hess[i, j] += hij
                        hess[j, i] += hij
        return AmbientJet(float(val), grad, hess)


@dataclass
class ConformalFactorSpec:
    """The conformal factor rho on S^n with access to its 2-jet.

    evaluator takes ambient coordinates of a sphere point.  In analytic
    mode ambient_jet must supply the jet of a smooth ambient extension;
    finite-difference mode differentiates evaluator in a local chart.
    """

    evaluator: Callable[[np.ndarray], float]
    ambient_jet: Optional[Callable[[np.ndarray], AmbientJet]] = None
    jet_evaluator: Optional[Callable[[SpherePoint], Jet2]] = None
    mode: JetMode = JetMode.FINITE_DIFFERENCE
    label: str = ""

    def with_mode(self, mode: JetMode) -> "ConformalFactorSpec":
        return ConformalFactorSpec(self.evaluator, self.ambient_jet,
                                   self.jet_evaluator, mode, self.label)


def constant_factor(c: float) -> ConformalFactorSpec:
    def ev(x):
        return float(c)

    def aj(x):
        x = np.asarray(x, dtype=float)
        m = x.shape[0]
        return AmbientJet(float(c), np.zeros(m), np.zeros((m, m)))

    return ConformalFactorSpec(ev, aj, mode=JetMode.ANALYTIC, label=f"constant:{c}")


def coordinate_factor(i: int, a: float = 0.0, b: float = 1.0) -> ConformalFactorSpec:
    """rho(x) = a + b * x_i with 1-based ambient index i."""

    def ev(x):
        return a + b * float(x[i - 1])

    def aj(x):
        x = np.asarray(x, dtype=float)
        m = x.shape[0]
        g = np.zeros(m)
        g[i - 1] = b
        return AmbientJet(a + b * float(x[i - 1]), g, np.zeros((m, m)))

    return ConformalFactorSpec(ev, aj, mode=JetMode.ANALYTIC,
                               label=f"coordinate:{i}:{a}:{b}")


def polynomial_factor(poly: Polynomial) -> ConformalFactorSpec:
    return ConformalFactorSpec(poly.__call__, poly.ambient_jet,
                               mode=JetMode.ANALYTIC, label="polynomial")


# ---------------------------------------------------------------------------
# charts and jets
# ---------------------------------------------------------------------------

def chart_point(x: SpherePoint, frame: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Normal stereographic chart centered at x; metric = Id at u = 0.

    sigma(u) = ((1 - |u|^2/4) x + sum u_i e_i) / (1 + |u|^2/4).
    """
    q = float(np.dot(u, u)) / 4.0
    return ((1.0 - q) * x.coords + frame.T @ u) / (1.0 + q)


def jet2(spec: ConformalFactorSpec, x: SpherePoint) -> Jet2:
    """2-jet of the conformal factor at x, in the deterministic frame at x."""
    frame = tangent_frame(x)
    if spec.mode is JetMode.ANALYTIC:
        if spec.jet_evaluator is not None:
            return spec.jet_evaluator(x)
        if spec.ambient_jet is None:
            raise ValueError("analytic mode requires ambient_jet or jet_evaluator")
        aj = spec.ambient_jet(x.coords)
        grad = frame @ aj.grad
        radial = float(np.dot(aj.grad, x.coords))
        hess = frame @ aj.hess @ frame.T - radial * np.eye(frame.shape[0])
        return Jet2(x, frame, float(aj.value), grad, hess)
    return _fd_jet(spec.evaluator, x, frame)


def _fd_jet(f: Callable[[np.ndarray], float], x: SpherePoint, frame: np.ndarray) -> Jet2:
    n = frame.shape[0]
    value = float(f(x.coords))

    def at(u):
        return float(f(chart_point(x, frame, u)))

    h = FD_STEP_GRAD
    grad = np.zeros(n)
    for i in range(n):
        u = np.zeros(n)
        u[i] = h
        grad[i] = (at(u) - at(-u)) / (2.0 * h)

    h = FD_STEP_HESS

    def second_along(d):
        # fourth-order central stencil; d carries the step h per coordinate,
        # the h^2 denominator absorbs the parametrization
        return (-at(2.0 * d) + 16.0 * at(d) - 30.0 * value
                + 16.0 * at(-d) - at(-2.0 * d)) / (12.0 * h * h)

    hess = np.zeros((n, n))
    dirs = np.eye(n)
    for i in range(n):
        hess[i, i] = second_along(h * dirs[i])
    for i in range(n):
        for j in range(i + 1, n):
            # polarization: f_ij = (D_{i+j} - D_{i-j}) / 4
            fpp = second_along(h * (dirs[i] + dirs[j]))
            fmm = second_along(h * (dirs[i] - dirs[j]))
            hess[i, j] = (fpp - fmm) / 4.0
            hess[j, i] = hess[i, j]
    # in this chart the metric is Euclidean to second order at the center,
    # so chart derivatives are already covariant
    return Jet2(x, frame, value, grad, hess)


# ---------------------------------------------------------------------------
# curvature quantities of g = e^{2 rho} g0
# ---------------------------------------------------------------------------

def laplacian_g0(j: Jet2) -> float:
    """Trace of the covariant Hessian (so that Lap x_k = -n x_k)."""
    return float(np.trace(j.hess))


def scalar_curvature(j: Jet2, n: Optional[int] = None) -> float:
    """Scalar curvature of g = e^{2 rho} g0 solved from the conformal PDE."""
    if n is None:
        n = j.n
    return float(2.0 * (n - 1) * np.exp(-2.0 * j.value)
                 * (n / 2.0 - laplacian_g0(j) - (n - 2) / 2.0 * j.grad_norm_sq))


@dataclass(frozen=True)
class SymBilinear:
    """Symmetric bilinear form at a sphere point, as a matrix in a g0-frame."""

    point: SpherePoint
    frame: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if np.max(np.abs(m - m.T)) > 1e-10 * max(1.0, np.max(np.abs(m))):
            raise ValueError("matrix must be symmetric")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))


def schouten(j: Jet2) -> SymBilinear:
    """Schouten tensor of g = e^{2 rho} g0 as a matrix in the jet's g0-frame."""
    n = j.n
    mat = (-j.hess + np.outer(j.grad, j.grad)
           - 0.5 * (-1.0 + j.grad_norm_sq) * np.eye(n))
    return SymBilinear(j.point, j.frame, mat)


def sym_eigh(mat: np.ndarray, with_vectors: bool = False):
    """Eigen-decomposition of a small symmetric matrix, ascending order.

    2x2 uses the closed form; larger sizes use numpy's symmetric solver.
    """
    m = np.asarray(mat, dtype=float)
    if m.shape == (2, 2):
        a, b, c = m[0, 0], m[0, 1], m[1, 1]
        tr = a + c
        disc = np.hypot(a - c, 2.0 * b)
        lam = np.array([(tr - disc) / 2.0, (tr + disc) / 2.0])
        if not with_vectors:
            return lam
        scale = max(abs(a), abs(b), abs(c), 1.0)
        if disc <= 1e-12 * scale:
            vecs = np.eye(2)  # umbilic: eigenvectors ill-defined, report identity
        else:
            if abs(b) > 1e-300:
                v0 = np.array([lam[0] - c, b])
            else:
                v0 = np.array([1.0, 0.0]) if a <= c else np.array([0.0, 1.0])
            v0 = v0 / np.linalg.norm(v0)
            v1 = np.array([-v0[1], v0[0]])
            vecs = np.column_stack([v0, v1])
        return lam, vecs
    lam, vecs = np.linalg.eigh(m)
    if with_vectors:
        return lam, vecs
    return lam


def schouten_eigen(sch: SymBilinear, j: Jet2, with_vectors: bool = False):
    """Eigenvalues of g^{-1} Sch_g, ascending (frame is g0-orthonormal)."""
    if sch.point is not j.point and np.max(np.abs(sch.point.coords - j.point.coords)) > 1e-12:
        raise ValueError("Schouten form and jet must be at the same point")
    scaled = np.exp(-2.0 * j.value) * sch.matrix
    return sym_eigh(scaled, with_vectors=with_vectors)
