"""Dual cube complexes of wallspaces and charge checks for block graphs."""

from .errors import (
    BelowMinimumError,
    BudgetError,
    CubulandError,
    DegenerateBasepointError,
    InputError,
    InvalidLatticeError,
    InvalidRetwistError,
    MixedKindError,
    PartialResultError,
    StructuralFailureError,
    UnsupportedConfigurationError,
)
from .wallspace import (
    Bipartition,
    HalfplanePair,
    Line,
    Orientation,
    SpanningWall,
    Wall,
    Wallspace,
    Window,
    expand_window,
    principal_orientation,
    sides_intersect,
    walls_cross,
)
from .dual_complex import (
    CubeComplex,
    ProductDecomposition,
    build_dual,
    convex_hull,
    cubical_neighborhood,
    decompose_product,
    essential_core,
    is_isometrically_embedded,
    median,
)
from .planar import (
    CombinatorialFlat,
    ExtraWall,
    FamilyClassification,
    PeriodicArrangement,
    PeriodicLine,
    build_pinned_dual,
    classify_families,
    dual_flat,
    parallel_families,
)

__version__ = "0.1.0"
