from __future__ import annotations

from .config import REFERENCE_C, FibmapConfig, load_config
from .errors import (
    ConstructionError,
    DepthError,
    DomainError,
    FibmapError,
    PrecisionError,
    ResolutionError,
    SearchError,
    ShapeError,
    StructuralError,
    UnsupportedRepresentationError,
)
from .fib_arith import (
    FibIndexSet,
    cylinder_word,
    enumerate_cylinders,
    epsilon,
    fib,
    sigma_power,
    sigma_shift,
    successor,
    zeckendorf,
)
from .kneading import (
    ClassASeq,
    KneadingSeries,
    SignSeq,
    admissible,
    entropy_from_kneading,
    fib_classA,
    fib_sign,
    fib_signs,
    first_difference,
    renormalize_kneading,
)
from .model_map import (
    GAMMA,
    ModelParams,
    QuadSurd,
    eval_F,
    gap_slope,
    model_cells,
    order_compare,
    phi,
    y_value,
    zero_preimages,
)
from .mp_dynamics import (
    MPValue,
    OrbitRecord,
    derivative_product,
    escalating_orbit,
    itinerary,
    orbit_piecewise,
    orbit_quadratic,
    poincare_length,
)
from .quad_fibonacci import (
    CInterval,
    CoverM,
    build_cover,
    build_model_cover,
    derivative_growth_fit,
    dimension_estimate,
    find_c,
    gap_partner,
    parameter_depth,
    return_derivative_ratios,
    scaling_report,
    summability_series,
    target_bits_for,
    verify_closest_returns,
)
from .class_a import (
    ClassAMap,
    RenormalizedMap,
    fib_intervals,
    geometry_experiment,
    index_law_check,
    lambda_sequence,
    renormalize_numeric,
    surgery_from_unimodal,
    tune_v,
    two_branch_example,
)
from .registry import RunRegistry, create_run
from .run_manifest import MANIFEST_VERSION, RunManifest, run_manifest_from_dict

__all__ = [
    # config / errors
    "REFERENCE_C",
    "FibmapConfig",
    "load_config",
    "FibmapError",
    "DomainError",
    "UnsupportedRepresentationError",
    "PrecisionError",
    "ResolutionError",
    "DepthError",
    "ShapeError",
    "StructuralError",
    "SearchError",
    "ConstructionError",
    # Fibonacci arithmetic
    "FibIndexSet",
    "fib",
    "zeckendorf",
    "successor",
    "sigma_shift",
    "sigma_power",
    "epsilon",
    "enumerate_cylinders",
    "cylinder_word",
    # kneading
    "SignSeq",
    "KneadingSeries",
    "ClassASeq",
    "fib_sign",
    "fib_signs",
    "admissible",
    "first_difference",
    "entropy_from_kneading",
    "fib_classA",
    "renormalize_kneading",
    # model map
    "QuadSurd",
    "GAMMA",
    "ModelParams",
    "y_value",
    "eval_F",
    "model_cells",
    "gap_slope",
    "zero_preimages",
    "order_compare",
    "phi",
    # certified orbits
    "MPValue",
    "OrbitRecord",
    "orbit_quadratic",
    "escalating_orbit",
    "itinerary",
    "derivative_product",
    "poincare_length",
    "orbit_piecewise",
    # quadratic Fibonacci map
    "CInterval",
    "CoverM",
    "find_c",
    "parameter_depth",
    "verify_closest_returns",
    "build_cover",
    "build_model_cover",
    "gap_partner",
    "scaling_report",
    "return_derivative_ratios",
    "derivative_growth_fit",
    "summability_series",
    "target_bits_for",
    "dimension_estimate",
    # class A maps
    "ClassAMap",
    "RenormalizedMap",
    "two_branch_example",
    "tune_v",
    "surgery_from_unimodal",
    "renormalize_numeric",
    "index_law_check",
    "fib_intervals",
    "lambda_sequence",
    "geometry_experiment",
    # runs
    "RunRegistry",
    "create_run",
    "MANIFEST_VERSION",
    "RunManifest",
    "run_manifest_from_dict",
]
