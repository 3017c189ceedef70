"""Generalized tree-based wavelet transform (GTBWT) for point-cloud signals."""
from .filters import (
    UnknownWaveletError,
    WaveletFilterSet,
    analyze_level,
    available_filters,
    filter_set,
    synthesize_level,
)
from .ordering import (
    NeighborIndex,
    greedy_path,
    pair_points,
    path_smoothness,
    randomized_path,
    squared_euclidean,
    total_variation,
)
from .tree import (
    PlanError,
    TreePlan,
    build_binary_tree,
    build_generalized_tree,
    leaf_order,
    load_plan,
    save_plan,
)
from .transform import (
    Coefficients,
    PlanMismatchError,
    basis_element,
    decompose,
    identity_plan,
    m_term_approx,
    reconstruct,
)
from .denoise import (
    DenoiseParams,
    DenoiseReport,
    denoise_cycle_spin,
    denoise_iterative,
    denoise_single_tree,
    denoise_subimage_avg,
    hard_threshold,
)

__version__ = "0.1.0"
