"""Minimal spanning trees, energies, and dimension estimation for finite
point sets under pluggable (quasi-)metric distance oracles."""

__version__ = "0.1.0"

from .dimension import (
    DimensionEstimate,
    PackingResult,
    WindowPolicy,
    box_dimension,
    greedy_packing,
    mst_dimension,
    packing_lower_bound_check,
)
from .energy import EnergyReport, count_edges_longer_than, dyadic_energy_bound, energy, theorem1_bound
from .errors import (
    CheckFailedError,
    DegenerateInputError,
    EstimationError,
    InputError,
    InsufficientScalesError,
    ResourceError,
    ToolkitError,
    UnsupportedMetricError,
)
from .generators import (
    IfsSystem,
    SimilarityMap,
    builtin_shape,
    generate_grid,
    generate_ifs_depth,
    generate_uniform,
    shape_family,
)
from .lemma_checks import (
    lemma1_check,
    lemma1_sweep,
    lemma2_check,
    lemma4_check,
    theorem1_check,
)
from .metric import (
    DistanceSpec,
    Lp,
    PointCloud,
    PowerQuasi,
    Snowflake,
    distance,
    read_cloud,
    rescale_to_unit_diameter,
    validate_quasi_metric,
    write_cloud,
)
from .mst import (
    SpanningTree,
    brute_force_min_tree,
    build_mst_kruskal,
    build_mst_prim,
    tree_total_length,
)
