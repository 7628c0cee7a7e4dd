"""funcball: averages of integral functionals on lp balls of C[0,1].

Closed forms (weighted quadrature against the generalized Gaussian /
exponential limit densities) and Monte Carlo experiments (exact uniform
sampling of the dimension-n ball sections), with a CLI runner.
"""

from .averages import (
    AnnulusAverage,
    BlockScheme,
    FunctionalSpec,
    SweepFlag,
    SweepResult,
    VarianceCertificate,
    annulus_average,
    average_blocks,
    average_multivariate,
    average_single,
    average_subinterval,
    average_time_weighted,
    nonlinear_exchange,
    variance_closed_form,
    whole_space_sweep,
)
from .ball import BallSpec, PExponent, Quadrant, ball
from .densities import (
    coordinate_density_finite,
    coordinate_density_limit,
    finite_coordinate_cdf,
    gamma_transform_density,
    joint_density_finite,
    joint_density_limit,
)
from .exceptions import (
    AccuracyError,
    ConfigurationError,
    DomainError,
    FuncballError,
)
from .mclab import (
    ConvergenceRecord,
    MCEstimate,
    PiecewisePath,
    kernel_limit_report,
    mc_annulus,
    mc_block_scheme,
    mc_exchange_gap,
    mc_functional_average,
    mc_general_functional,
    mc_variance_decay,
)
from .quadrature import (
    IntegralEstimate,
    QuadratureSettings,
    kernel_integral_finite_n,
    kernel_limit_integral,
    weighted_integral_1d,
    weighted_integral_nd,
)
from .sampler import (
    SamplePoint,
    SeedSpec,
    derive_substream,
    sample_ball_uniform,
    sample_ball_batch,
    sample_generalized_gaussian,
    sample_weighted_ball_uniform,
    sample_weighted_ball_batch,
)
from .special import (
    NormalizationConstant,
    log_gamma,
    normalization_constant,
    stirling_log_gamma,
)

__version__ = "0.1.0"
