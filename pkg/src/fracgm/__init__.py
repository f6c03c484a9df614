"""Numerical laboratory for multi-bump ground states of the 1-D fractional
Gierer-Meinhardt system."""

from .errors import FGMError, InvalidInputError, NumericalError
from .green import GreenExpansion, green_constants, green_eval, green_far_field
from .ground_state import GroundState, convolution_asymptotics, kernel_direction, solve_ground_state
from .interaction import InteractionConstants
from .multibump import (
    MultiBumpContext,
    SpikeConfig,
    build_context,
    error_term,
    project_error,
    reduced_force,
    weighted_norm,
)
from .params import FracParams
from .reduced import (
    ReducedWindow,
    calibrate_constants,
    minimize_xi,
    rescale_config,
    scalar_model,
    xi_energy,
    xi_gradient,
)
from .solver import LSResult, SolutionPair, lyapunov_schmidt_solve, newton_full, verify_solution
from .spectral import (
    Field,
    Grid1D,
    fit_decay_exponent,
    fractional_laplacian,
    inner_product,
    resolvent,
)

__version__ = "0.1.0"
