"""Numerical laboratory for sharp HLS and fractional Sobolev inequalities.

Sharp constants, stability bounds, radial quadrature of Riesz kernels,
deficits and distances to the bubble families, planar symmetrization
flows and trace (restriction) inequalities.
"""

from .constants import Params, sobolev_sharp_constant, stability_bounds, trace_constants
from .errors import DomainError, NearManifoldError, OptimizerError, SingularityError, UsageError
from .funcspace import BubbleCombo, Flavor, RadialFn, RadialGrid, ZonalSphereFn, make_bubble

__all__ = [
    "Params", "sobolev_sharp_constant", "stability_bounds", "trace_constants",
    "DomainError", "NearManifoldError", "OptimizerError", "SingularityError", "UsageError",
    "BubbleCombo", "Flavor", "RadialFn", "RadialGrid", "ZonalSphereFn", "make_bubble",
]
__version__ = "0.1.0"
