"""Conformal metrics on the sphere and horospherically convex hypersurfaces.

The package realizes the dictionary between conformal factors rho on S^n
and hypersurfaces of hyperbolic space whose hyperbolic Gauss map is the
identity chart: representation formula, curvature extraction, parallel
flow, Schouten-eigenvalue inversion, the n = 2 prescribed-scalar-curvature
solver and the symmetric-function (Weingarten) machinery.
"""

from .errors import (
    ConfigError,
    DimensionMismatch,
    DomainViolation,
    FlowNotRegular,
    HoroLabError,
    NotStronglyConvex,
    SingularPoint,
    SolveFailed,
    TauNotFound,
    ZeroEigenvalue,
)
from .lorentz import QuadricTag, classify, lorentz_dot, lorentz_norm_sq
from .sphere import (
    ConformalFactorSpec,
    Jet2,
    JetMode,
    Polynomial,
    SpherePoint,
    constant_factor,
    coordinate_factor,
    jet2,
    laplacian_g0,
    polynomial_factor,
    scalar_curvature,
    schouten,
    schouten_eigen,
)
from .harmonics import (
    ScalarField,
    SphereGrid,
    analyze,
    field_factor,
    field_from_coeffs,
    field_from_function,
    integrate,
    make_grid,
    read_field_csv,
    synthesize,
    write_field_csv,
)
from .horospherical import (
    CurvatureReport,
    SurfaceFrame,
    christoffel_flow_mean,
    contact_mean,
    curvature_report,
    find_tau0,
    fundamental_forms,
    light_cone_map,
    parallel_flow,
    regularity,
    represent,
    schouten_inverse,
)
from .christoffel import (
    SolveConfig,
    SolveOutcome,
    SolveStatus,
    build_solution,
    christoffel_to_scalar,
    kazdan_warner,
    scalar_to_christoffel,
    solve_nirenberg,
)
from .weingarten import (
    ConeKind,
    ConeSpec,
    WeingartenFunctional,
    cone_contains,
    sigma_k,
    transform_T,
    umbilicity_diagnostic,
    weingarten_value,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
