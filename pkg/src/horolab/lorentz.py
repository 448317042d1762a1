"""Lorentzian linear algebra for Minkowski space with signature (-,+,...,+).

Vectors are plain one-dimensional numpy arrays of length n+2; index 0 is
the timelike coordinate.  The three model hyperquadrics are classified by
the sign of the self-pairing together with the sign of the timelike
coordinate.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


def as_lorentz_vec(v) -> np.ndarray:
    """Validate and return v as a float array usable as a Lorentz vector."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.shape[0] < 4:
        raise ValueError(f"Lorentz vector must be 1-d of length >= 4, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Lorentz vector entries must be finite")
    return arr


def lorentz_dot(u, v) -> float:
    """Minkowski pairing -u0*v0 + sum_i ui*vi."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatch(f"shapes {u.shape} and {v.shape} differ")
    return float(np.dot(u[1:], v[1:]) - u[0] * v[0])


def lorentz_norm_sq(v) -> float:
    return lorentz_dot(v, v)


class QuadricTag(enum.Enum):
    HYPERBOLIC = "Hyperbolic"   # <v,v> = -1, v0 > 0
    DE_SITTER = "DeSitter"      # <v,v> = +1
    LIGHT_CONE = "LightCone"    # <v,v> = 0, v0 > 0
    NONE = "None"


@dataclass(frozen=True)
class QuadricClass:
    tag: QuadricTag
    tolerance: float


DEFAULT_CLASSIFY_TOL = 1e-9


def classify(v, tol: float = DEFAULT_CLASSIFY_TOL) -> QuadricClass:
    """Classify v against the hyperbolic space, de Sitter space and light cone.

    The hyperbolic and light-cone branches additionally require v0 > 0.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    v = as_lorentz_vec(v)
    q = lorentz_norm_sq(v)
    if abs(q + 1.0) <= tol and v[0] > 0:
        tag = QuadricTag.HYPERBOLIC
    elif abs(q - 1.0) <= tol:
        tag = QuadricTag.DE_SITTER
    elif abs(q) <= tol and v[0] > 0:
        tag = QuadricTag.LIGHT_CONE
    else:
        tag = QuadricTag.NONE
    return QuadricClass(tag, tol)
