"""Fractal dimension interpolation: point clouds, estimators and closed forms."""

from .errors import (
    DimkitError,
    DomainError,
    ExtinctionError,
    ExtrapolationError,
    InsufficientDataError,
    ResolutionError,
    SpecError,
)
from .geometry import (
    CoverSpec,
    CoveringProfile,
    DiscreteMeasure,
    LocalCounter,
    PointCloud,
    ScalePair,
    covering_profile,
    frostman_exponent,
    geometric_scales,
    local_count,
    mesh_count,
    min_cover_cost_1d,
    read_cloud,
    separated_net,
    write_cloud,
)
from .generators import (
    FIGURE6_CARPET,
    Carpet,
    Countable,
    Percolation,
    SelfSimilarLine,
    Spiral,
    generate,
    load_spec,
    parse_spec,
    realize,
)
from .estimators import (
    Identity,
    LogCorrection,
    PowerLaw,
    SpectrumCurve,
    box_profile,
    estimate_assouad_spectrum,
    estimate_box,
    estimate_intermediate_lower,
    estimate_intermediate_upper,
    estimate_phi_assouad,
    theta_sweep,
)
from .analytic import (
    DimensionReport,
    HolderExponents,
    assouad_spectrum_formula,
    dims,
    holder_transform,
    intermediate_formula_or_bounds,
    lemma1_bounds,
    lemma3_bound,
    percolation_phi_regime,
    rho_formula,
    winding_bounds,
)

__version__ = "0.1.0"
