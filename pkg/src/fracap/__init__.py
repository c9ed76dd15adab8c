"""Fractional perimeters, Besov seminorms and fractional Sobolev capacities."""

from ._jit import JIT_ENABLED
from .besov import (SampledFunction, besov_seminorm, build_cutoff, bump, coarea_decompose,
                    lp_norm, pyramid, read_grid, superlevel_set, tent, write_grid)
from .capacity import (CapacityBracket, capacity_bracket, capacity_lower, capacity_upper,
                       capacity_upper_witness, homogeneity_check, monotonicity_check,
                       sharp_kappa, usc_check)
from .constants import AlphaContext, kappa, kernel_tail, tau, unit_ball_volume, unit_sphere_area
from .dsl import parse_function, parse_shape
from .errors import (ConvergenceFailure, DslParseError, FracapError, InvalidArgument,
                     UnsupportedOperation)
from .geometry import (Ball, Box, BoxUnion, Empty, IndicatorSet, Interval, Lattice, covariogram,
                       volume)
from .inequalities import (DeficitReport, sharpness_gap, verify_cap_perimeter,
                           verify_cap_strong_sobolev, verify_chain, verify_isocapacitary,
                           verify_isoperimetric, verify_sobolev, verify_truncation)
from .numerics import Estimate, LimitScanResult, McSpec, QuadratureSpec
from .perimeter import (ball_perimeter, frac_perimeter, limit_alpha0_check, limit_alpha1_check)

__version__ = "0.1.0"
