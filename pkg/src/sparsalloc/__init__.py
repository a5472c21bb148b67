"""sparsalloc: layer-wise sparsity allocation by arithmetic progression.

Library + CLI for allocating per-layer sparsity rates on synthetic
layer-chain networks, measuring reconstruction-error propagation, and
validating the monotone-allocation theory behind the arithmetic scheme.
"""

__version__ = "0.1.0"

from sparsalloc._kernels import BACKEND as KERNEL_BACKEND
from sparsalloc.errors import DomainError, NetFileError, ShapeError, SparsallocError
from sparsalloc.linalg import DenseMatrix, frob_norm_sq, lemma1_gap, matmul, sigma_min
from sparsalloc.netmodel import (
    Activation,
    CalibrationSet,
    LayerNet,
    forward,
    generate_calibration,
    generate_net,
    load_net,
    save_net,
)
from sparsalloc.pruner import (
    Magnitude,
    Mask,
    NMGroup,
    WandaStyle,
    nm_mask,
    prune_layer,
    prune_net,
    prune_net_nm,
    score_layer,
)
from sparsalloc.allocator import (
    Origin,
    SparsityProfile,
    allocate_arithmetic,
    allocate_erk,
    allocate_global,
    allocate_lamp,
    allocate_uniform,
    beta_upper_bound,
    grid_candidates,
    nm_allocation,
    permutations_of,
)
from sparsalloc.reconerr import (
    ErrorTrace,
    check_theorem1,
    check_theorem2_bound,
    layer_error,
    trace_errors,
)
from sparsalloc.abstractmodel import (
    AbstractErrorParams,
    ExpF,
    RatioF,
    SquareF,
    recurrence_total,
    swap_gain,
    verify_theorem4,
)
from sparsalloc.search import (
    ObjectiveKind,
    SearchReport,
    grid_search_beta,
    random_search_profiles,
    step_ablation,
)

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "SparsallocError",
    "ShapeError",
    "DomainError",
    "NetFileError",
    "DenseMatrix",
    "matmul",
    "frob_norm_sq",
    "sigma_min",
    "lemma1_gap",
    "Activation",
    "LayerNet",
    "CalibrationSet",
    "generate_net",
    "generate_calibration",
    "forward",
    "save_net",
    "load_net",
    "Magnitude",
    "WandaStyle",
    "NMGroup",
    "Mask",
    "score_layer",
    "prune_layer",
    "prune_net",
    "prune_net_nm",
    "nm_mask",
    "Origin",
    "SparsityProfile",
    "beta_upper_bound",
    "allocate_arithmetic",
    "allocate_uniform",
    "allocate_erk",
    "allocate_lamp",
    "allocate_global",
    "grid_candidates",
    "permutations_of",
    "nm_allocation",
    "ErrorTrace",
    "layer_error",
    "trace_errors",
    "check_theorem1",
    "check_theorem2_bound",
    "AbstractErrorParams",
    "SquareF",
    "RatioF",
    "ExpF",
    "recurrence_total",
    "swap_gain",
    "verify_theorem4",
    "ObjectiveKind",
    "SearchReport",
    "grid_search_beta",
    "step_ablation",
    "random_search_profiles",
]
