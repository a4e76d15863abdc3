"""dwlab: a numerical laboratory for strongly damped wave systems.

Builds discrete sesquilinear forms a, b on a space pair (V, H), assembles
the first-order block form and its generator, verifies the quantitative
inequalities tying continuity/ellipticity constants to sector and
parabola containment of the numerical range, and propagates linear,
semilinear, nonautonomous, and dynamic-boundary problems.
"""

import os as _os

# Desk-scale dense problems (dims <= a few hundred): BLAS thread pools are
# pure overhead here, and numpy's and scipy's separate OpenBLAS builds
# spin-wait against each other. Parallelism belongs to the sweep level
# (--threads). Respects explicit user overrides.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    _os.environ.setdefault(_var, "1")

from .block import (
    BlockConstants,
    BlockForm,
    BlockOperator,
    assemble_block_form,
    block_constants,
    block_continuity_bound,
    block_ellipticity,
    extract_operator,
    noncoercivity_witness,
    rho_characterization_check,
    selfadjointness_check,
)
from .errors import (
    BlowUpError,
    CoefficientError,
    ConfigError,
    DefinitenessError,
    DwlabError,
    MatrixRangeError,
    NonlinearityError,
    NumericalError,
    SingularMatrixError,
    StepError,
)
from .evolution import (
    NonautonomousFamily,
    State,
    TrajectoryRecord,
    equi_ellipticity_check,
    halving_order,
    propagate_linear,
    propagate_nonautonomous,
    propagate_semilinear,
    reality_drift,
    semigroup_norm_curve,
)
from .forms import (
    EllipticityCertificate,
    InnerProductPair,
    InterpolationScale,
    SesquilinearForm,
    accretivity_check,
    build_interpolation_scale,
    continuity_constant,
    default_omega_grid,
    ellipticity_constants,
    imag_bound_constant,
    mixed_continuity_constant,
    perturbed_ellipticity,
    re_equals_V_inner,
    young_shift,
)
from .kernel import (
    DEFAULT_TOL,
    Tolerances,
    hermitian_geig,
    matrix_exponential,
    solve_linear,
    weighted_operator_norm,
)
from .models import (
    CoefficientField,
    DynamicBCSystem,
    Mesh1D,
    analytic_mode_oracle,
    assemble_dirichlet_block,
    assemble_dirichlet_model,
    assemble_dynamic_bc,
    discrete_mode,
    dynamic_bc_invariant_check,
)
from .spectral import (
    FrequencyResponseCurve,
    NumericalRangeSample,
    default_lambda_grid,
    frequency_response,
    numerical_range,
    parabola_check,
    sector_check,
    spectrum,
)

__version__ = "0.1.0"
