"""Convex sets of the plane through their surface-area measures on the circle."""
from .circle_measure import (
    CircleMeasure,
    FourierCoeffs,
    cdf,
    circ_convolve,
    dirac,
    fourier,
    from_grid,
    half_disc,
    is_closed,
    mixture,
    quantile,
    reflect,
    regular_polygon,
    resultant,
    rotate,
    scale_mass,
    segment,
    uniform,
)
from .boundary import (
    ConvexBoundary,
    NonConvexError,
    NotClosedError,
    area_exact,
    area_fourier,
    area_pairs,
    area_shoelace,
    boundary_from_measure,
    curvature_radius,
    curve_point,
    extremal_points,
    hausdorff,
    hausdorff_curves,
    measure_from_boundary,
)

__version__ = "0.1.0"
