"""algsense: identifiability of variety-constrained signals from linear measurements.

A point on an n-dimensional algebraic model is pinned down by n+1
generic measurements drawn from a non-degenerate irreducible family,
while n measurements leave a finite fiber whose size is the model's
degree.  This package builds the models and measurement families,
enumerates fibers numerically, and cross-checks the counts with exact
plane-curve computations.
"""

from .backend import active_backend
from .curves import (
    AffineLine,
    ComplexPoint,
    LineIntersection,
    ScanReport,
    cluster_roots,
    conic_tangent_recovery,
    curve_points_at_x1,
    figure_data,
    hessian_determinant,
    hessian_inflection_system,
    inflection_points,
    line_intersect,
    poly_backward_error,
    random_real_curve_point,
    single_measurement_scan,
    tangent_line,
    univariate_roots,
)
from .engine import (
    AuditReport,
    CurResult,
    ExperimentConfig,
    TrialReport,
    audit_family,
    collect_trial_reports,
    cur_reconstruct,
    degree_experiment,
    run_trials,
)
from .errors import (
    AlgsenseError,
    ConfigError,
    DimensionMismatchError,
    LineOnCurveError,
    NumericalError,
    RootFindingError,
    SingularPivotError,
)
from .fiber import (
    FiberReport,
    SolverOptions,
    enumerate_fiber,
    genericity_witness_check,
    local_identifiability,
    local_solve,
    residual,
    residual_jacobian,
)
from .measurements import (
    LinearFunctional,
    MeasurementFamily,
    MeasurementSystem,
    entry_family,
    entry_functional,
    evaluation_coeffs,
    evaluation_family,
    gaussian_family,
    line_family,
    measure_all,
    nondegeneracy_rank,
    rank_one_family,
    rank_one_functional,
    system_from_jsonable,
    tensor_feature_coeffs,
    tensor_feature_family,
)
from .numerics import numerical_rank
from .polymap import PolynomialMap, coefficient_space_dim, monomial_exponents
from .varieties import (
    ImplicitPlaneCurve,
    ParametricVariety,
    evaluate,
    make_circle,
    make_cubic,
    make_low_rank,
    make_parabola,
    make_parabola_implicit,
    make_veronese_model,
    random_point,
)

__version__ = "0.1.0"
