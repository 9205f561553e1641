from importlib.metadata import version

from .errors import (
    BasisError,
    DegenerateInputError,
    DomainError,
    NikaveError,
    ShapeError,
    SizeError,
    SweepPointError,
)
from .estimators import (
    EstimatorTask,
    MCEstimate,
    MomentRatio,
    Nikolskii,
    NormMoment,
    RecipSupMoment,
    parse_statistic,
    run_estimator,
    verify_moment_ratio_identity,
    verify_reciprocal_identity,
    verify_sigma_invariance,
)
from .poly import (
    BasisKind,
    BasisSpec,
    GridSpec,
    TrigPoly,
    default_basis,
    dirichlet_kernel,
    evaluate,
    fejer_poly,
    make_poly,
)
from .quadrature import DEFAULT_QUAD, NormSpec, QuadConfig, norm
from .sampling import Law, RandomSpec, derive_stream, sample_coeffs
from .sweep import (
    Normalizer,
    SweepPlan,
    dimension_match,
    run_sweep,
    sweep_point,
    worst_case_probe,
)

__all__ = [
    "DEFAULT_QUAD",
    "BasisError",
    "BasisKind",
    "BasisSpec",
    "DegenerateInputError",
    "DomainError",
    "EstimatorTask",
    "GridSpec",
    "Law",
    "MCEstimate",
    "MomentRatio",
    "NikaveError",
    "Nikolskii",
    "NormMoment",
    "NormSpec",
    "Normalizer",
    "QuadConfig",
    "RandomSpec",
    "RecipSupMoment",
    "ShapeError",
    "SizeError",
    "SweepPlan",
    "SweepPointError",
    "TrigPoly",
    "__version__",
    "default_basis",
    "derive_stream",
    "dimension_match",
    "dirichlet_kernel",
    "evaluate",
    "fejer_poly",
    "make_poly",
    "norm",
    "parse_statistic",
    "run_estimator",
    "run_sweep",
    "sample_coeffs",
    "sweep_point",
    "verify_moment_ratio_identity",
    "verify_reciprocal_identity",
    "verify_sigma_invariance",
    "worst_case_probe",
]

__version__ = version("nikave")
