"""Multiparameter random simplicial complexes: sampling, lexicographical
discrete-Morse critical counts, subcomplex statistics, parameter estimation
and goodness-of-fit testing."""

from .complexes import (
    SimplicialComplex,
    SkeletonCounts,
    build_from_facets,
    complete_complex,
)
from .models import (
    EDGE_MODEL_THRESHOLD,
    ConstantKernel,
    GeometricKernel,
    ModelParams,
    PointCloud,
    Seed,
    ThresholdKernel,
    edge_model_kernel,
    sample_multiparameter,
    sample_soft_geometric,
    simplex_volume,
    tetrahedron_model_kernel,
    triangle_area,
    triangle_model_kernel,
)
from .morse import (
    Classification,
    CriticalCounts,
    Matching,
    classify_simplex,
    critical_counts,
    lexicographic_matching,
    verify_acyclic,
)
from .patterns import (
    IsoClass,
    PatternComplex,
    count_subcomplexes,
    exact_covariance,
    expected_count,
    iso_class,
    pattern_from_facets,
)
from .moments import (
    CriticalVariance,
    MomentReport,
    cone_prob,
    critical_mean_bounds,
    critical_mean_exact,
    critical_moment_report,
    critical_variance_exact,
    hollow_prob,
    limiting_covariance,
    limiting_covariance_upper_bound,
    mle_scaling,
    mu_of,
    span_prob,
)
from .inference import (
    GofResult,
    MleResult,
    chi_square_quantile,
    gof_critical,
    gof_triangle,
    mle_fit,
)
from .textio import (
    ComplexParseError,
    dump_complex,
    dumps_complex,
    load_complex,
    loads_complex,
)

__version__ = "0.1.0"
