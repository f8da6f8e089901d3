"""Line-decompositions of finitely presented graphs."""

from linedecomp.line import (
    Cut,
    CutPosition,
    Line,
    OrdinalExpr,
    Ordering,
    Point,
    Segment,
    SegmentKind,
    UnsupportedScopeError,
    all_points,
    compare_cuts,
    compare_points,
    count_points_between,
    enumerate_cuts,
    fin,
    is_integral,
    is_well_order,
    line_ordinal,
    normalize_cut,
    omega,
    omega_star,
    ordinal_line,
    zeta,
)
from linedecomp.decomposition import (
    Bag,
    Decomposition,
    ExplicitBags,
    PeriodicBags,
    Region,
    Side,
    V,
    VerificationReport,
    VertexId,
    bag_at,
    bag_of,
    boundary_split,
    limit_vertices,
    remove_from_bags,
    restrict,
    reverse_decomposition,
    shift_decomposition,
    shift_set,
    slice_between,
    tidy,
    verify,
    width,
)
from linedecomp.splits import (
    MinSplitIndexing,
    RepeatedSplit,
    Split,
    SplitBounds,
    before,
    empty_split_cuts,
    enumerate_min_splits,
    repeated_splits,
    split_at,
    split_bounds,
    split_budget,
)
from linedecomp.wo import (
    WoDecomposition,
    add_to_bags,
    as_wo,
    concat_wo,
    to_wo,
)
from linedecomp.prime import (
    FactorTree,
    SubstitutionPlan,
    compose_tree,
    concat_components,
    factor,
    factor_tree,
    is_prime,
    split_components,
    substitute,
)
from linedecomp.oracle import (
    FiniteGraph,
    ProbeReport,
    brute_splits,
    certificate_lowerbound,
    compactness_probe,
    graph_from_bags,
    graph_from_edge_list,
    graph_to_edge_list,
    materialize,
    pathwidth_exact,
    random_decomposition,
    witness_family,
)

__all__ = [
    "Bag",
    "Cut",
    "CutPosition",
    "Decomposition",
    "ExplicitBags",
    "FactorTree",
    "FiniteGraph",
    "Line",
    "MinSplitIndexing",
    "OrdinalExpr",
    "Ordering",
    "PeriodicBags",
    "Point",
    "ProbeReport",
    "Region",
    "RepeatedSplit",
    "Segment",
    "SegmentKind",
    "Side",
    "Split",
    "SplitBounds",
    "SubstitutionPlan",
    "UnsupportedScopeError",
    "V",
    "VerificationReport",
    "VertexId",
    "WoDecomposition",
    "add_to_bags",
    "all_points",
    "as_wo",
    "bag_at",
    "bag_of",
    "before",
    "boundary_split",
    "brute_splits",
    "certificate_lowerbound",
    "compactness_probe",
    "compare_cuts",
    "compare_points",
    "compose_tree",
    "concat_components",
    "concat_wo",
    "count_points_between",
    "empty_split_cuts",
    "enumerate_cuts",
    "enumerate_min_splits",
    "factor",
    "factor_tree",
    "fin",
    "graph_from_bags",
    "graph_from_edge_list",
    "graph_to_edge_list",
    "is_integral",
    "is_prime",
    "is_well_order",
    "limit_vertices",
    "line_ordinal",
    "materialize",
    "normalize_cut",
    "omega",
    "omega_star",
    "ordinal_line",
    "pathwidth_exact",
    "random_decomposition",
    "remove_from_bags",
    "repeated_splits",
    "restrict",
    "reverse_decomposition",
    "shift_decomposition",
    "shift_set",
    "slice_between",
    "split_at",
    "split_bounds",
    "split_budget",
    "split_components",
    "substitute",
    "tidy",
    "to_wo",
    "verify",
    "width",
    "witness_family",
    "zeta",
]
