"""Symmetric-function machinery for Weingarten-type curvature relations.

The involution T(x)_i = (x_i + 1)/(x_i - 1) exchanges principal curvatures
and (twice the) Schouten eigenvalues; Garding cones Gamma_k and the
1-homogeneous roots f_k = S_k^{1/k} build the induced functionals W on the
curvature side.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainViolation


def transform_T(x: np.ndarray) -> np.ndarray:
    """Componentwise (x_i + 1)/(x_i - 1); an involution on {x < 1}."""
    x = np.asarray(x, dtype=float)
    if np.any(x >= 1.0):
        raise DomainViolation("transform requires every component below 1")
    return (x + 1.0) / (x - 1.0)


def sigma_k(values: Sequence[float], k: int) -> float:
    """k-th elementary symmetric function."""
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    if not 1 <= k <= n:
        raise ValueError("order k must lie in 1..n")
    e = np.zeros(k + 1)
    e[0] = 1.0
    for x in v:
        e[1:] = e[1:] + x * e[:-1].copy()
    return float(e[k])


class ConeKind(enum.Enum):
    GAMMA_K = "Gamma_k"
    GAMMA_N = "Gamma_n"
    GAMMA_1 = "Gamma_1"


@dataclass(frozen=True)
class ConeSpec:
    kind: ConeKind
    n: int
    k: int = 1

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("cone order k must lie in 1..n")


def cone_contains(cone: ConeSpec, x: np.ndarray) -> bool:
    """Membership test; Gamma_k uses the nested-positivity characterization
    S_j > 0 for all j <= k of the component containing the positive cone."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != cone.n:
        raise ValueError("dimension mismatch with the cone")
    if cone.kind is ConeKind.GAMMA_N:
        return bool(np.all(x > 0.0))
    if cone.kind is ConeKind.GAMMA_1:
        return bool(np.sum(x) > 0.0)
    return all(sigma_k(x, j) > 0.0 for j in range(1, cone.k + 1))


@dataclass(frozen=True)
class WeingartenFunctional:
    """f_k = S_k^{1/k} on Gamma_k and the induced functional on kappa space."""

    n: int
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("order k must lie in 1..n")

    @property
    def cone(self) -> ConeSpec:
        return ConeSpec(ConeKind.GAMMA_K, self.n, self.k)

    def base_value(self, lam: np.ndarray) -> float:
        """f_k at a point of Gamma_k."""
        lam = np.asarray(lam, dtype=float)
        if not cone_contains(self.cone, lam):
            raise DomainViolation("argument outside the functional's cone")
        return float(sigma_k(lam, self.k) ** (1.0 / self.k))


def weingarten_value(wf: WeingartenFunctional, kappas: np.ndarray) -> float:
    """W(kappa) = f(T(kappa)/2); defined for kappa in the pulled-back cone."""
    kap = np.asarray(kappas, dtype=float)
    lam = 0.5 * transform_T(kap)
    return wf.base_value(lam)


def umbilicity_diagnostic(reports, wf: WeingartenFunctional) -> dict:
    """Closed-sweep umbilicity probe: principal-curvature spread and the
    deviation of W from its sweep mean; both vanish on round spheres."""
    spreads = np.array([float(r.kappas[0] - r.kappas[-1]) for r in reports])
    wvals = np.array([weingarten_value(wf, r.kappas) for r in reports])
    mean = float(np.mean(wvals))
    return {
        "max_spread": float(np.max(spreads)),
        "wein_const_dev": float(np.max(np.abs(wvals - mean))),
    }
