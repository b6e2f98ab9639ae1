"""Hodge decomposition on weighted simplicial complexes via the heat semigroup.

Builds the discrete operators d, delta, and the Hodge Laplacian on
weighted cochain complexes, computes harmonic projectors and Green
operators both spectrally and through certified heat-semigroup integrals,
splits arbitrary cochains into exact + coexact + harmonic parts with
measured weighted p-norm bounds, and derives the admissible exponent
interval from measured growth and decay rates.
"""

from .complexes import (
    Cochain,
    OperatorMatrix,
    SimplicialComplex,
    betti_numbers,
    build_complex,
    coboundary,
    codifferential,
    hodge_laplacian,
    inner_product,
    lp_norm,
    weighted_adjoint,
)
from .decomposition import (
    DecompositionResult,
    QuadratureGrid,
    QuadratureResult,
    decompose,
    green_quadrature,
    green_spectral,
    harmonic_representative,
    inv_sqrt_spectral,
    inv_sqrt_subordinated,
    riesz_transform_norms,
    shifted_sqrt_diff,
    shifted_sqrt_norms,
    verify_uniqueness,
)
from .interpolation import (
    AlphaFit,
    InterpolationReport,
    admissible_interval,
    conjugate_exponent,
    decay_rate,
    dimension_consistency,
    gaffney_constant,
    interpolation_report,
    kernel_decay_fit,
    measure_alpha,
    measure_tau,
    opnorm_bracket,
    opnorm_exact_extremes,
    opnorm_power_method,
    projector_norm_profile,
    riesz_thorin_bound,
    select_t0,
    volume_growth_fit,
)
from .spectral import (
    SpectralData,
    classify_zero,
    eigendecompose,
    harmonic_projector,
    heat_apply,
    heat_derivative,
    heat_limit_projector,
    heat_operator,
    laplacian_spectrum,
)

__version__ = "0.1.0"
