"""Distance and signed-distance fields from the screened Poisson equation.

Solve ``-a Lap u + u = f`` on a box with ``f`` vanishing exactly on a set A;
then ``-sqrt(a) log u`` approximates the distance to the boundary of A as
``a`` goes to zero.
"""

from .errors import *  # noqa: F401,F403
from .fields import Grid, Mask, NodeSet, ScalarField, surface_mean, verify_mean_relation, volume_mean
from .geometry import (Annulus, Ball, Box, DesignDomain, Interval, Union, exact_distance,
                       exact_signed_distance, rasterize_interface)
from .solver import SolverConfig, assemble, solve, verify_bounds
from .sources import ConstantBoundary, Custom, IndicatorComplement, PowerLaw1D, PowerLawBall
from .transform import beta_diagnostic, distance_field, signed_distance_field, sup_error

__version__ = "0.1.0"
