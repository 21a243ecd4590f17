"""randig: isomorphism-invariant random digraph families.

Exact probability mass functions at small n, seeded samplers at all n,
and numeric oracles for the structural identities that separate the
families (arc-, vertex-, vertex-arc-, direction-randomized, and
nearest-neighbor digraph models).
"""

from .digraph import (
    ArcCounts,
    Digraph,
    Graph,
    apply_permutation,
    apply_permutation_graph,
    arc_counts,
    canonical_form,
    enumerate_digraphs,
    enumerate_graphs,
    underlying_graph,
)
from .errors import (
    DegenerateModelError,
    NoClosedFormError,
    RandigError,
    UnsupportedExactError,
    ValidationError,
)
from .estimate import EstimateWithError
from .kernels import (
    BallKernel,
    Circle38Kernel,
    Derd3ProductKernel,
    FiniteKernel,
    HalfLineKernel,
    TwoValueKernel,
    UnderlyingKernel,
    constant_kernel,
    discretize,
    intersection_kernel,
    underlying_kernel,
)
from .models import (
    Ard,
    Derd,
    Drd,
    Erg,
    Gard,
    Pmf,
    Uniform,
    Vard,
    Verg,
    Vrd,
    Vrg,
    conditional_pattern_prob,
    exact_pmf,
    model_from_json,
    model_to_json,
    sample,
    sample_masks,
    supports_exact,
    underlying_model,
    underlying_pmf,
)
from .rnnd import (
    KNearest,
    PointCloud,
    RankSubset,
    Rnnd,
    RnndStats,
    knn_digraph,
    rnnd_exact_pmf_n3k1,
    rnnd_stats,
    sample_rnnd,
)
from .analysis import (
    derd3_vard_kernel,
    derd_ard_params,
    event_probability,
    g_moment_checks,
    invariance_check,
    kernel_product_constancy,
    n2_classify,
    positive_dependence_check,
    spectral_cycle_moment,
    total_variation,
)

__version__ = "0.1.0"
