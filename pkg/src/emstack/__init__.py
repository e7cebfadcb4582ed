"""Tools for refining, augmenting, windowing, and scoring segmentations of
3D EM image stacks with sparse ground-truth slices."""

from .errors import (
    DegenerateTriangleError,
    DimensionMismatchError,
    EmptyInputError,
    EmstackError,
    InvalidArgumentError,
    SamplingFailureError,
    StackIOError,
)
from .stack_io import (
    LabelAtlas,
    SliceRole,
    SliceWindow,
    assemble_window,
    export_training_pairs,
    load_stack,
    save_stack,
    select_labeled_slices,
)
from .morphology import (
    ComponentLabeling,
    connected_components,
    erode,
    intersect,
    remove_small_components,
    union,
)
from .refine import (
    RefineConfig,
    continuity_intersect_step,
    continuity_union_step,
    foreground_union_step,
    nearest_gt_index,
    refine_phases,
    refine_stack,
)
from .augment import (
    AffineParams,
    DisplacementField,
    ElasticConfig,
    PiecewiseAffineConfig,
    PiecewiseWarp,
    augment_pair,
    build_piecewise_warp,
    flip_rotate,
    gaussian_kernel,
    grid_points,
    inverse_code,
    sample_elastic_field,
    sample_piecewise_warp,
    solve_affine,
    warp_displacement,
    warp_piecewise,
)
from .metrics import (
    ConfusionCounts,
    binarize,
    confusion,
    dice,
    iou,
    overlay,
    rot8_average,
)

__version__ = "0.1.0"

__all__ = [
    "AffineParams", "ComponentLabeling", "ConfusionCounts",
    "DegenerateTriangleError", "DimensionMismatchError", "DisplacementField",
    "ElasticConfig", "EmptyInputError", "EmstackError", "InvalidArgumentError",
    "LabelAtlas", "PiecewiseAffineConfig", "PiecewiseWarp", "RefineConfig",
    "SamplingFailureError", "SliceRole", "SliceWindow", "StackIOError",
    "assemble_window", "augment_pair", "binarize", "build_piecewise_warp",
    "confusion", "connected_components", "continuity_intersect_step",
    "continuity_union_step", "dice", "erode", "export_training_pairs",
    "flip_rotate", "foreground_union_step", "gaussian_kernel", "grid_points",
    "intersect", "inverse_code", "iou", "load_stack", "nearest_gt_index",
    "overlay", "refine_phases", "refine_stack", "remove_small_components",
    "rot8_average", "sample_elastic_field", "sample_piecewise_warp",
    "save_stack", "select_labeled_slices", "solve_affine", "union",
    "warp_displacement", "warp_piecewise",
]
